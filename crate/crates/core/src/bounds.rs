//! Exact and empirical checks of the bounds built on top of the face lattice:
//! the lower bound for `ν(k)` on each face fiber, the convexity property behind
//! it, the decay of `|S_f(p^m)|`, and the decay of torus sums in `p`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::modarith::is_prime;
use crate::newton::{FaceLattice, Limits};
use crate::rational;
use crate::sums::{brute_force_s, torus_critical_point, torus_e, SumConfig};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NuCheckRecord {
    pub k: Vec<u64>,
    pub face_id: usize,
    pub nu: u64,
    #[serde(rename = "N")]
    pub big_n: i64,
    /// `σ(N+1) − σ(f_τ)`
    #[serde(serialize_with = "rational::serialize")]
    pub rhs_exact: BigRational,
    /// `σ(N+1) − (dim τ + 1)/2`
    #[serde(serialize_with = "rational::serialize")]
    pub rhs_weak: BigRational,
    pub exact_ok: bool,
    pub weak_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NuCheckReport {
    #[serde(rename = "T")]
    pub t: u64,
    pub points_checked: u64,
    /// Whether no vertex of `F₀` lies in `{0,1}ⁿ`.
    pub weak_hypothesis_holds: bool,
    pub exact_violations: Vec<NuCheckRecord>,
    pub weak_violations: Vec<NuCheckRecord>,
}

impl NuCheckReport {
    pub fn passed(&self) -> bool {
        self.exact_violations.is_empty()
    }
}

/// Checks `ν(k) ≥ σ(N(k)+1) − σ(f_τ)` and `ν(k) ≥ σ(N(k)+1) − (dim τ+1)/2`
/// exactly for every `k` with `ν(k) ≤ t`, where `τ = F(k)`.
pub fn check_nu_inequality(lattice: &FaceLattice, t: u64, limits: &Limits) -> Result<NuCheckReport> {
    let sd = lattice.sigma_data();
    let sigma = sd.sigma.clone();
    let half_dims: Vec<BigRational> = lattice
        .faces()
        .iter()
        .map(|f| rational::ratio(f.dim as i64 + 1, 2))
        .collect();
    let mut report = NuCheckReport {
        t,
        points_checked: 0,
        weak_hypothesis_holds: weak_bound_hypothesis_holds(lattice),
        exact_violations: Vec::new(),
        weak_violations: Vec::new(),
    };
    lattice.for_each_lattice_point(t, limits, |k, nu, big_n, face_id| {
        report.points_checked += 1;
        let face = lattice.face(face_id);
        let base = &sigma * rational::integer(big_n + 1);
        let rhs_exact = &base - &face.sigma_tau;
        let rhs_weak = &base - &half_dims[face_id];
        let nu_q = rational::integer(nu as i64);
        let exact_ok = nu_q >= rhs_exact;
        let weak_ok = nu_q >= rhs_weak;
        if exact_ok && weak_ok {
            return;
        }
        let record = NuCheckRecord {
            k: k.to_vec(),
            face_id,
            nu,
            big_n,
            rhs_exact,
            rhs_weak,
            exact_ok,
            weak_ok,
        };
        if !exact_ok {
            report.exact_violations.push(record.clone());
        }
        if !weak_ok {
            report.weak_violations.push(record);
        }
    })?;
    Ok(report)
}

/// No vertex of `F₀` has all coordinates in `{0,1}`.
pub fn weak_bound_hypothesis_holds(lattice: &FaceLattice) -> bool {
    let f0 = lattice.face(lattice.f0_face_id());
    let vertices = lattice.polyhedron().vertices();
    !f0.vertex_ids
        .iter()
        .any(|&v| vertices[v].iter().all(|&c| c == 0 || c == 1))
}

/// A concrete instance of the convexity property on a face.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConvexityInstance {
    pub face_id: usize,
    #[serde(serialize_with = "serialize_points")]
    pub points: Vec<Vec<BigRational>>,
    #[serde(serialize_with = "serialize_vec")]
    pub betas: Vec<BigRational>,
    #[serde(serialize_with = "rational::serialize")]
    pub sum_beta: BigRational,
    /// `Σ β_j R_j ≤ (1/σ, …, 1/σ)`
    pub hypothesis_holds: bool,
    /// `Σ β_j ≤ 1`
    pub unit_ok: bool,
    /// `Σ β_j ≤ σ(f_τ)/σ`
    pub face_ok: bool,
}

fn serialize_vec<S: serde::Serializer>(v: &[BigRational], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(rational::to_string))
}

fn serialize_points<S: serde::Serializer>(v: &[Vec<BigRational>], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|p| p.iter().map(rational::to_string).collect::<Vec<_>>()))
}

/// Whether `x` lies on face `face_id` of the Newton polyhedron.
pub fn face_contains(lattice: &FaceLattice, face_id: usize, x: &[BigRational]) -> bool {
    let poly = lattice.polyhedron();
    let active = &lattice.face(face_id).active_facet_ids;
    x.len() == lattice.n()
        && poly.facets().iter().enumerate().all(|(i, facet)| {
            let value: BigRational = facet
                .normal
                .iter()
                .zip(x)
                .map(|(&a, xi)| xi * rational::integer(a))
                .sum();
            let offset = rational::integer(facet.offset);
            if active.contains(&i) {
                value == offset
            } else {
                value >= offset
            }
        })
}

/// Evaluates both conclusions for given points of `τ` and weights.
pub fn check_convexity_instance(
    lattice: &FaceLattice,
    face_id: usize,
    points: &[Vec<BigRational>],
    betas: &[BigRational],
) -> Result<ConvexityInstance> {
    if face_id >= lattice.faces().len() {
        return Err(Error::InvalidInput(format!("no face with id {face_id}")));
    }
    if points.len() != betas.len() {
        return Err(Error::InvalidInput("one weight per point is required".into()));
    }
    if betas.iter().any(|b| b.is_negative()) {
        return Err(Error::InvalidInput("weights must be nonnegative".into()));
    }
    if let Some(bad) = points.iter().find(|r| !face_contains(lattice, face_id, r)) {
        let shown: Vec<String> = bad.iter().map(rational::to_string).collect();
        return Err(Error::InvalidInput(format!("point ({}) is not on face {face_id}", shown.join(", "))));
    }
    Ok(evaluate_instance(lattice, face_id, points.to_vec(), betas.to_vec()))
}

fn evaluate_instance(
    lattice: &FaceLattice,
    face_id: usize,
    points: Vec<Vec<BigRational>>,
    betas: Vec<BigRational>,
) -> ConvexityInstance {
    let sd = lattice.sigma_data();
    let n = lattice.n();
    let mut combo = vec![BigRational::zero(); n];
    for (r, b) in points.iter().zip(&betas) {
        for (c, x) in combo.iter_mut().zip(r) {
            *c += b * x;
        }
    }
    let hypothesis_holds = combo.iter().all(|c| c <= &sd.t_star);
    let sum_beta: BigRational = betas.iter().sum();
    let face_bound = &lattice.face(face_id).sigma_tau * &sd.t_star;
    ConvexityInstance {
        face_id,
        unit_ok: sum_beta <= rational::integer(1),
        face_ok: sum_beta <= face_bound,
        hypothesis_holds,
        sum_beta,
        points,
        betas,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SamplerReport {
    pub face_id: usize,
    pub seed: u64,
    pub trials: u64,
    pub accepted: u64,
    #[serde(serialize_with = "rational::serialize")]
    pub face_bound: BigRational,
    #[serde(serialize_with = "rational::serialize")]
    pub max_sum_beta: BigRational,
    pub counterexample: Option<ConvexityInstance>,
}

impl SamplerReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

const GRID: i64 = 16;

/// Random rational points of `τ` and weights; samples violating the
/// hypothesis are discarded.
pub fn convexity_sampler(lattice: &FaceLattice, face_id: usize, trials: u64, seed: u64) -> Result<SamplerReport> {
    if face_id >= lattice.faces().len() {
        return Err(Error::InvalidInput(format!("no face with id {face_id}")));
    }
    let face = lattice.face(face_id);
    let vertices = lattice.polyhedron().vertices();
    let t_star = lattice.sigma_data().t_star.clone();
    let n = lattice.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SamplerReport {
        face_id,
        seed,
        trials,
        accepted: 0,
        face_bound: &face.sigma_tau * &t_star,
        max_sum_beta: BigRational::zero(),
        counterexample: None,
    };

    for _ in 0..trials {
        let count = rng.gen_range(1..=3usize);
        let mut points = Vec::with_capacity(count);
        let mut betas = Vec::with_capacity(count);
        for _ in 0..count {
            let mut weights: Vec<i64> = face.vertex_ids.iter().map(|_| rng.gen_range(0..=GRID)).collect();
            if weights.iter().all(|&w| w == 0) {
                weights[0] = 1;
            }
            let total: i64 = weights.iter().sum();
            let mut r = vec![BigRational::zero(); n];
            for (&v, &w) in face.vertex_ids.iter().zip(&weights) {
                for (c, &x) in r.iter_mut().zip(&vertices[v]) {
                    *c += rational::ratio(w * x, total);
                }
            }
            for &axis in &face.recession_axes {
                r[axis] += &t_star * rational::ratio(rng.gen_range(0..=GRID), GRID);
            }
            // Scale weights so that roughly half the draws meet the hypothesis.
            let widest = r.iter().max().cloned().unwrap_or_else(BigRational::zero);
            let scale = rational::integer(2) * &t_star / (widest * rational::integer(count as i64));
            betas.push(scale * rational::ratio(rng.gen_range(0..=GRID), GRID));
            points.push(r);
        }
        let instance = evaluate_instance(lattice, face_id, points, betas);
        if !instance.hypothesis_holds {
            continue;
        }
        report.accepted += 1;
        if instance.sum_beta > report.max_sum_beta {
            report.max_sum_beta = instance.sum_beta.clone();
        }
        if !(instance.unit_ok && instance.face_ok) && report.counterexample.is_none() {
            report.counterexample = Some(instance);
        }
    }
    if report.accepted * 10 < trials {
        return Err(Error::DegenerateSampling {
            accepted: report.accepted as usize,
            required: trials.div_ceil(10) as usize,
        });
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioRow {
    pub p: u64,
    pub m: u32,
    pub abs_s: Option<f64>,
    pub abs_error_budget: Option<f64>,
    /// `|S|·p^{σm}/m^{κ−1}`
    pub ratio_kappa: Option<f64>,
    /// `|S|·p^{σm}/m^{n−1}`
    pub ratio_n: Option<f64>,
    pub exceeds_ceiling: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioTable {
    /// Set when the input is not homogeneous.
    pub banner: Option<String>,
    #[serde(serialize_with = "rational::serialize")]
    pub sigma: BigRational,
    pub kappa: usize,
    pub n: usize,
    pub ceiling: Option<f64>,
    pub rows: Vec<RatioRow>,
    pub estimated_c: Option<f64>,
    pub findings: Vec<String>,
}

impl RatioTable {
    pub fn ratios(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.ratio_kappa).collect()
    }

    pub fn median_ratio(&self) -> Option<f64> {
        let mut v = self.ratios();
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        let mid = v.len() / 2;
        Some(if v.len() % 2 == 1 { v[mid] } else { (v[mid - 1] + v[mid]) / 2.0 })
    }

    pub fn to_csv(&self) -> String {
        let cell = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        let mut out = String::from("p,m,abs_s,abs_error_budget,ratio_kappa,ratio_n,exceeds_ceiling,error\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.p,
                r.m,
                cell(r.abs_s),
                cell(r.abs_error_budget),
                cell(r.ratio_kappa),
                cell(r.ratio_n),
                r.exceeds_ceiling,
                r.error.as_deref().unwrap_or("").replace(',', ";"),
            ));
        }
        out
    }
}

/// Brute-force `|S_f(p^m)|` for every cell and its normalized ratios.
/// Budget failures are recorded on their row.
pub fn bound_ratio_table(
    lattice: &FaceLattice,
    primes: &[u64],
    ms: &[u32],
    cfg: &SumConfig,
    ceiling: Option<f64>,
) -> Result<RatioTable> {
    if let Some(&p) = primes.iter().find(|&&p| !is_prime(p)) {
        return Err(Error::InvalidInput(format!("{p} is not prime")));
    }
    if ms.contains(&0) {
        return Err(Error::InvalidInput("m must be positive".into()));
    }
    let f = lattice.polyhedron().source();
    let sd = lattice.sigma_data();
    let sigma = rational::to_f64(&sd.sigma);
    let n = lattice.n();
    let banner = match f.homogeneity() {
        Some(_) => None,
        None => Some("hypothesis unmet: polynomial is not homogeneous".to_string()),
    };
    let mut primes = primes.to_vec();
    primes.sort_unstable();
    primes.dedup();
    let mut ms = ms.to_vec();
    ms.sort_unstable();
    ms.dedup();

    let mut rows = Vec::new();
    let mut findings = Vec::new();
    for &p in &primes {
        for &m in &ms {
            let mut row = RatioRow {
                p,
                m,
                abs_s: None,
                abs_error_budget: None,
                ratio_kappa: None,
                ratio_n: None,
                exceeds_ceiling: false,
                error: None,
            };
            match brute_force_s(f, p, m, cfg) {
                Ok(s) => {
                    let abs = s.abs();
                    let growth = (p as f64).powf(sigma * m as f64);
                    let ratio = abs * growth / (m as f64).powi(sd.kappa as i32 - 1);
                    row.abs_s = Some(abs);
                    row.abs_error_budget = Some(s.abs_error_budget);
                    row.ratio_kappa = Some(ratio);
                    row.ratio_n = Some(abs * growth / (m as f64).powi(n as i32 - 1));
                    if let Some(c) = ceiling {
                        if ratio > c {
                            row.exceeds_ceiling = true;
                            findings.push(format!("p={p} m={m}: ratio {ratio:e} exceeds ceiling {c:e}"));
                        }
                    }
                }
                Err(e) => row.error = Some(e.to_string()),
            }
            rows.push(row);
        }
    }
    let estimated_c = rows.iter().filter_map(|r| r.ratio_kappa).reduce(f64::max);
    Ok(RatioTable {
        banner,
        sigma: sd.sigma.clone(),
        kappa: sd.kappa,
        n,
        ceiling,
        rows,
        estimated_c,
        findings,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EDecayPoint {
    pub p: u64,
    pub abs_e: Option<f64>,
    pub abs_error_budget: Option<f64>,
    pub used: bool,
    /// Why the prime was left out of the fit.
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EDecayFit {
    pub face_id: usize,
    pub points: Vec<EDecayPoint>,
    pub fitted_exponent: f64,
    /// `σ(f_τ)`; the predicted exponent is its negative.
    #[serde(serialize_with = "rational::serialize")]
    pub sigma_tau: BigRational,
    /// `−(dim τ + 1)/2`
    #[serde(serialize_with = "rational::serialize")]
    pub dim_exponent: BigRational,
}

/// Least-squares slope of `log|E(p, f_τ)|` against `log p`.
pub fn e_decay_fit(lattice: &FaceLattice, face_id: usize, primes: &[u64], cfg: &SumConfig) -> Result<EDecayFit> {
    if face_id >= lattice.faces().len() {
        return Err(Error::InvalidInput(format!("no face with id {face_id}")));
    }
    if let Some(&p) = primes.iter().find(|&&p| !is_prime(p)) {
        return Err(Error::InvalidInput(format!("{p} is not prime")));
    }
    let face = lattice.face(face_id);
    let g = face.restriction.as_sparse();
    let mut primes = primes.to_vec();
    primes.sort_unstable();
    primes.dedup();

    let mut points = Vec::with_capacity(primes.len());
    let mut xy = Vec::new();
    for &p in &primes {
        let mut point = EDecayPoint {
            p,
            abs_e: None,
            abs_error_budget: None,
            used: false,
            note: None,
        };
        if torus_critical_point(g, p).is_some() {
            point.note = Some("degenerate mod p".into());
            points.push(point);
            continue;
        }
        match torus_e(g, p, cfg) {
            Ok(e) => {
                let abs = e.abs();
                point.abs_e = Some(abs);
                point.abs_error_budget = Some(e.abs_error_budget);
                if abs < 10.0 * e.abs_error_budget {
                    point.note = Some("below noise floor".into());
                } else {
                    point.used = true;
                    xy.push(((p as f64).ln(), abs.ln()));
                }
            }
            Err(e) => point.note = Some(e.to_string()),
        }
        points.push(point);
    }
    if xy.len() < 3 {
        return Err(Error::InsufficientPrimes {
            usable: xy.len(),
            required: 3,
        });
    }
    Ok(EDecayFit {
        face_id,
        points,
        fitted_exponent: ols_slope(&xy),
        sigma_tau: face.sigma_tau.clone(),
        dim_exponent: rational::ratio(-(face.dim as i64 + 1), 2),
    })
}

fn ols_slope(xy: &[(f64, f64)]) -> f64 {
    let n = xy.len() as f64;
    let mx = xy.iter().map(|v| v.0).sum::<f64>() / n;
    let my = xy.iter().map(|v| v.1).sum::<f64>() / n;
    let sxy: f64 = xy.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xy.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SigmaDimCheck {
    pub d: usize,
    #[serde(serialize_with = "rational::serialize")]
    pub sigma: BigRational,
    /// `(n − d)/2`
    #[serde(serialize_with = "rational::serialize")]
    pub bound: BigRational,
    pub holds: bool,
}

/// `σ(f) ≤ (n − d)/2` for a homogeneous `f` of degree at least 2, with `d`
/// the dimension of its critical locus as supplied by the caller.
pub fn check_sigma_dim_bound(lattice: &FaceLattice, d: usize) -> Result<SigmaDimCheck> {
    let n = lattice.n();
    match lattice.polyhedron().source().homogeneity() {
        Some(deg) if deg >= 2 => {}
        Some(deg) => return Err(Error::HypothesisUnmet(format!("homogeneous of degree {deg} < 2"))),
        None => return Err(Error::HypothesisUnmet("polynomial is not homogeneous".into())),
    }
    if d > n {
        return Err(Error::InvalidInput(format!("d = {d} exceeds the number of variables {n}")));
    }
    let sigma = lattice.sigma_data().sigma.clone();
    let bound = BigRational::new(BigInt::from(n - d), BigInt::from(2));
    Ok(SigmaDimCheck {
        d,
        holds: sigma <= bound,
        sigma,
        bound,
    })
}
