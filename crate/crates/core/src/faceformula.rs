//! The face decomposition of `S_f(p^m)`:
//!
//! ```text
//! S_f(p^m) = (1 - 1/p)ⁿ Σ_τ ( A(p,m,τ) + E(p,f_τ) · B(p,m,τ) )
//! A(p,m,τ) = Σ_{F(k)=τ, N(k)≥m} p^{-ν(k)}      B(p,m,τ) = Σ_{F(k)=τ, N(k)=m-1} p^{-ν(k)}
//! ```
//!
//! `A` and `B` are accumulated exactly over all `k` with `ν(k) ≤ T`. Everything
//! left out is covered by one certificate: the exact remainder of
//! `Σ_{k∈ℕⁿ} p^{-ν(k)} = (1 - 1/p)^{-n}` beyond level `T`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::modarith::is_prime;
use crate::newton::{binomial, FaceLattice, Limits};
use crate::rational;
use crate::sums::{brute_force_s, check_nondegenerate_mod_p, torus_e, NondegReport, SumConfig, SumValue};

/// `(1 - 1/p)^{-n}`, the total mass of `p^{-ν(k)}` over `ℕⁿ`.
pub fn total_mass(n: usize, p: u64) -> BigRational {
    let base = BigRational::new(BigInt::from(p), BigInt::from(p - 1));
    num_traits::pow(base, n)
}

/// Exact mass of all `k` with `ν(k) > t`.
pub fn tail_mass(n: usize, p: u64, t: u64) -> BigRational {
    let mut partial = BigRational::zero();
    for s in 0..=t {
        partial += level_mass(n, p, s);
    }
    total_mass(n, p) - partial
}

fn level_mass(n: usize, p: u64, s: u64) -> BigRational {
    let count = binomial(s as u128 + n as u128 - 1, n as u128 - 1);
    BigRational::from_integer(BigInt::from(count)) * rational::inv_pow(p, s as u32)
}

/// Smallest `T` whose tail is at most `eps`, with that tail.
pub fn truncation_for(n: usize, p: u64, eps: &BigRational, limits: &Limits) -> Result<(u64, BigRational)> {
    if !rational::is_positive(eps) {
        return Err(Error::InvalidInput("eps must be positive".into()));
    }
    let mut tail = total_mass(n, p);
    let mut t = 0u64;
    loop {
        tail -= level_mass(n, p, t);
        if &tail <= eps {
            return Ok((t, tail));
        }
        t += 1;
        let points = crate::newton::lattice_point_count(n, t);
        if points > limits.max_lattice_points as u128 {
            return Err(Error::BudgetExceeded {
                points,
                cap: limits.max_lattice_points,
            });
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaceConeSums {
    pub face_id: usize,
    /// `a[m]` for `m = 0..=max_m`
    pub a: Vec<BigRational>,
    /// `b[m]` for `m = 0..=max_m` (`b[0] = 0`)
    pub b: Vec<BigRational>,
}

/// Truncated `A`/`B` sums for every face and every `m ≤ max_m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeSums {
    pub p: u64,
    pub max_m: u32,
    pub truncation_t: u64,
    pub tail: BigRational,
    pub faces: Vec<FaceConeSums>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConeSumResult {
    pub face_id: usize,
    pub m: u32,
    #[serde(serialize_with = "rational::serialize")]
    pub a_partial: BigRational,
    #[serde(serialize_with = "rational::serialize")]
    pub b_partial: BigRational,
    pub truncation_t: u64,
    #[serde(serialize_with = "rational::serialize")]
    pub tail: BigRational,
}

impl ConeSums {
    pub fn result(&self, face_id: usize, m: u32) -> ConeSumResult {
        let fs = &self.faces[face_id];
        ConeSumResult {
            face_id,
            m,
            a_partial: fs.a[m as usize].clone(),
            b_partial: fs.b[m as usize].clone(),
            truncation_t: self.truncation_t,
            tail: self.tail.clone(),
        }
    }
}

/// One enumeration pass up to the truncation level chosen from `eps`; all
/// faces and all `m ∈ 0..=max_m` at once.
pub fn cone_sums_upto(
    lattice: &FaceLattice,
    p: u64,
    max_m: u32,
    eps: &BigRational,
    limits: &Limits,
) -> Result<ConeSums> {
    if !is_prime(p) {
        return Err(Error::InvalidInput(format!("{p} is not prime")));
    }
    let (t, tail) = truncation_for(lattice.n(), p, eps, limits)?;
    cone_sums_with(lattice, p, max_m, t, tail, limits)
}

/// Same as [`cone_sums_upto`] at a fixed truncation level `t`.
pub fn cone_sums_at_level(lattice: &FaceLattice, p: u64, max_m: u32, t: u64, limits: &Limits) -> Result<ConeSums> {
    if !is_prime(p) {
        return Err(Error::InvalidInput(format!("{p} is not prime")));
    }
    let tail = tail_mass(lattice.n(), p, t);
    cone_sums_with(lattice, p, max_m, t, tail, limits)
}

fn cone_sums_with(
    lattice: &FaceLattice,
    p: u64,
    max_m: u32,
    t: u64,
    tail: BigRational,
    limits: &Limits,
) -> Result<ConeSums> {
    let buckets = max_m as usize + 1;
    let levels = t as usize + 1;
    // counts[face][min(N, max_m)][ν]
    let mut counts = vec![vec![vec![0u64; levels]; buckets]; lattice.faces().len()];
    lattice.for_each_lattice_point(t, limits, |_, nu, big_n, face| {
        let bucket = (big_n as usize).min(max_m as usize);
        counts[face][bucket][nu as usize] += 1;
    })?;

    let p_big = BigInt::from(p);
    let denom = num_traits::pow(p_big.clone(), levels - 1);
    let bucket_mass = |row: &[u64]| -> BigRational {
        // Σ c_ν p^{-ν} = (Σ c_ν p^{T-ν}) / p^T, Horner in p from ν = 0.
        let num = row.iter().fold(BigInt::zero(), |acc, &c| acc * &p_big + BigInt::from(c));
        BigRational::new(num, denom.clone())
    };
    let faces = counts
        .iter()
        .enumerate()
        .map(|(face_id, per_bucket)| {
            let masses: Vec<BigRational> = per_bucket.iter().map(|row| bucket_mass(row)).collect();
            let mut a = vec![BigRational::zero(); buckets];
            let mut running = BigRational::zero();
            for m in (0..buckets).rev() {
                running += &masses[m];
                a[m] = running.clone();
            }
            let b = (0..buckets)
                .map(|m| if m == 0 { BigRational::zero() } else { masses[m - 1].clone() })
                .collect();
            FaceConeSums { face_id, a, b }
        })
        .collect();
    Ok(ConeSums {
        p,
        max_m,
        truncation_t: t,
        tail,
        faces,
    })
}

/// `A(p,m,τ)` and `B(p,m,τ)` for every face at a single `m`.
pub fn cone_sums(
    lattice: &FaceLattice,
    p: u64,
    m: u32,
    eps: &BigRational,
    limits: &Limits,
) -> Result<Vec<ConeSumResult>> {
    let sums = cone_sums_upto(lattice, p, m, eps, limits)?;
    Ok((0..lattice.faces().len()).map(|id| sums.result(id, m)).collect())
}

/// Torus sums `E(p, f_τ)` for every face, indexed by face id.
pub fn face_torus_sums(lattice: &FaceLattice, p: u64, cfg: &SumConfig) -> Result<Vec<SumValue>> {
    lattice.faces().iter().map(|f| torus_e(&f.restriction, p, cfg)).collect()
}

/// Right-hand side of the decomposition from precomputed pieces.
pub fn assemble(lattice: &FaceLattice, sums: &ConeSums, e_values: &[SumValue], m: u32) -> SumValue {
    assert!(m >= 1 && m <= sums.max_m, "m outside the accumulated range");
    let p = sums.p as f64;
    let scale = (1.0 - 1.0 / p).powi(lattice.n() as i32);
    let mut total = num_complex::Complex64::new(0.0, 0.0);
    let mut float_budget = 0.0;
    let mut max_e: f64 = 0.0;
    let mut terms = 0u64;
    for (fs, e) in sums.faces.iter().zip(e_values) {
        let a = rational::to_f64(&fs.a[m as usize]);
        let b = rational::to_f64(&fs.b[m as usize]);
        total += e.value * b + a;
        float_budget += b * e.abs_error_budget + 4.0 * f64::EPSILON * (a + b * (1.0 + e.abs()));
        max_e = max_e.max(e.abs());
        terms += e.term_count;
    }
    let tail = rational::to_f64(&sums.tail);
    SumValue {
        value: total * scale,
        abs_error_budget: scale * (tail * (1.0 + max_e) + float_budget) + 4.0 * f64::EPSILON,
        term_count: terms,
    }
}

/// `(1 - 1/p)ⁿ Σ_τ (A + E·B)` with a certified error budget.
pub fn rhs_assembly(
    lattice: &FaceLattice,
    p: u64,
    m: u32,
    eps: &BigRational,
    cfg: &SumConfig,
    limits: &Limits,
) -> Result<SumValue> {
    if m == 0 {
        return Err(Error::InvalidInput("m must be positive".into()));
    }
    let sums = cone_sums_upto(lattice, p, m, eps, limits)?;
    let e_values = face_torus_sums(lattice, p, cfg)?;
    Ok(assemble(lattice, &sums, &e_values, m))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// Some face restriction has a torus critical point mod p.
    NotApplicable,
    Error(String),
}

impl Verdict {
    pub fn label(&self) -> String {
        match self {
            Verdict::Pass => "pass".into(),
            Verdict::Fail => "fail".into(),
            Verdict::NotApplicable => "not-applicable".into(),
            Verdict::Error(e) => format!("error: {e}"),
        }
    }
}

impl Serialize for Verdict {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.label())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FormulaReport {
    pub p: u64,
    pub m: u32,
    pub lhs: Option<SumValue>,
    pub rhs: Option<SumValue>,
    pub certified_tolerance: Option<f64>,
    pub verdict: Verdict,
    pub truncation_t: Option<u64>,
    pub tail: Option<BigRational>,
    pub nondeg: NondegReport,
}

impl FormulaReport {
    pub fn residual(&self) -> Option<f64> {
        Some((self.lhs?.value - self.rhs?.value).norm())
    }

    pub fn row(&self) -> FormulaRow {
        FormulaRow {
            p: self.p,
            m: self.m,
            lhs: self.lhs.map(|s| Complex { re: s.value.re, im: s.value.im }),
            rhs: self.rhs.map(|s| Complex { re: s.value.re, im: s.value.im }),
            tol: self.certified_tolerance,
            residual: self.residual(),
            verdict: self.verdict.clone(),
            t: self.truncation_t,
            tail: self.tail.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

/// Serialized form of a [`FormulaReport`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FormulaRow {
    pub p: u64,
    pub m: u32,
    pub lhs: Option<Complex>,
    pub rhs: Option<Complex>,
    pub tol: Option<f64>,
    pub residual: Option<f64>,
    pub verdict: Verdict,
    #[serde(rename = "T")]
    pub t: Option<u64>,
    #[serde(serialize_with = "rational::serialize_opt")]
    pub tail: Option<BigRational>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Evaluate both sides even when the nondegeneracy scan fails.
    pub report_degenerate: bool,
    /// Fixed truncation level; overrides the level chosen from `eps`.
    pub level: Option<u64>,
}

/// Compares brute-force `S_f(p^m)` with the assembled right-hand side for
/// each `m` in `ms`. Budget failures become error rows.
pub fn verify_formula(
    lattice: &FaceLattice,
    p: u64,
    ms: &[u32],
    eps: &BigRational,
    cfg: &SumConfig,
    limits: &Limits,
    options: VerifyOptions,
) -> Result<Vec<FormulaReport>> {
    if !is_prime(p) {
        return Err(Error::InvalidInput(format!("{p} is not prime")));
    }
    if ms.contains(&0) {
        return Err(Error::InvalidInput("m must be positive".into()));
    }
    let nondeg = check_nondegenerate_mod_p(lattice.faces(), p, cfg)?;
    let applicable = nondeg.all_pass();
    let blank = |m: u32, verdict: Verdict| FormulaReport {
        p,
        m,
        lhs: None,
        rhs: None,
        certified_tolerance: None,
        verdict,
        truncation_t: None,
        tail: None,
        nondeg: nondeg.clone(),
    };
    if !applicable && !options.report_degenerate {
        return Ok(ms.iter().map(|&m| blank(m, Verdict::NotApplicable)).collect());
    }

    let max_m = ms.iter().copied().max().unwrap_or(1);
    let sums = match options.level {
        Some(t) => cone_sums_at_level(lattice, p, max_m, t, limits),
        None => cone_sums_upto(lattice, p, max_m, eps, limits),
    };
    let shared = sums
        .and_then(|sums| Ok((face_torus_sums(lattice, p, cfg)?, sums)));
    let (e_values, sums) = match shared {
        Ok(v) => v,
        Err(e) => return Ok(ms.iter().map(|&m| blank(m, Verdict::Error(e.to_string()))).collect()),
    };

    let f = lattice.polyhedron().source();
    Ok(ms
        .iter()
        .map(|&m| {
            let rhs = assemble(lattice, &sums, &e_values, m);
            let mut report = blank(m, Verdict::NotApplicable);
            report.rhs = Some(rhs);
            report.truncation_t = Some(sums.truncation_t);
            report.tail = Some(sums.tail.clone());
            match brute_force_s(f, p, m, cfg) {
                Ok(lhs) => {
                    let tol = lhs.abs_error_budget + rhs.abs_error_budget;
                    report.lhs = Some(lhs);
                    report.certified_tolerance = Some(tol);
                    if applicable {
                        report.verdict = if (lhs.value - rhs.value).norm() <= tol {
                            Verdict::Pass
                        } else {
                            Verdict::Fail
                        };
                    }
                }
                Err(e) => report.verdict = Verdict::Error(e.to_string()),
            }
            report
        })
        .collect())
}

/// Scaled cone sums `A·p^{mσ}/m^{κ-1}` and `B·p^{mσ-σ(f_τ)}/m^{κ-1}`,
/// maximized over faces; they stay bounded in `m` for nondegenerate `f`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConeBoundRow {
    pub m: u32,
    pub max_scaled_a: f64,
    pub max_scaled_b: f64,
}

pub fn cone_bound_monitor(lattice: &FaceLattice, sums: &ConeSums) -> Vec<ConeBoundRow> {
    let sd = lattice.sigma_data();
    let sigma = rational::to_f64(&sd.sigma);
    let p = sums.p as f64;
    (1..=sums.max_m)
        .map(|m| {
            let mf = m as f64;
            let denom = mf.powi(sd.kappa as i32 - 1);
            let mut max_a: f64 = 0.0;
            let mut max_b: f64 = 0.0;
            for (face, fs) in lattice.faces().iter().zip(&sums.faces) {
                let a = rational::to_f64(&fs.a[m as usize]);
                let b = rational::to_f64(&fs.b[m as usize]);
                let sigma_tau = rational::to_f64(&face.sigma_tau);
                max_a = max_a.max(a * p.powf(mf * sigma) / denom);
                max_b = max_b.max(b * p.powf(mf * sigma - sigma_tau) / denom);
            }
            ConeBoundRow {
                m,
                max_scaled_a: max_a,
                max_scaled_b: max_b,
            }
        })
        .collect()
}

/// Convenience for callers holding a `f64` tolerance.
pub fn eps_from_f64(eps: f64) -> Result<BigRational> {
    BigRational::from_float(eps)
        .filter(rational::is_positive)
        .ok_or_else(|| Error::InvalidInput(format!("eps must be positive, got {eps}")))
}

/// `(1 - 1/p)^n` exactly.
pub fn unit_measure(n: usize, p: u64) -> BigRational {
    total_mass(n, p).recip()
}
