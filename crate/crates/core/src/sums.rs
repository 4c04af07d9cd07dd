//! Complete exponential sums `S_f(p^m)` and torus sums `E(p, f_τ)` by direct
//! summation, plus the per-prime nondegeneracy scan of face restrictions.
//!
//! The kernel walks a box `[lo, hi)ⁿ`. The last variable is the inner loop:
//! for each outer point `f` collapses to a one-variable polynomial
//! `g(x) = Σ C_e xᵉ (mod q)` whose values are produced by a forward-difference
//! table, `deg g` additions per point. Phases come from a precomputed table of
//! `q`-th roots of unity and are summed with Neumaier compensation.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::modarith::{is_prime, mul_mod, pow_mod};
use crate::newton::Face;
use crate::poly::{ModularEvaluator, SparsePoly};

/// Per-term rounding allowance declared by the summation kernel.
pub const KERNEL_EPS_PER_TERM: f64 = 4.0 * f64::EPSILON;

/// Direct root tables above this size are replaced by a two-level split.
const DIRECT_ROOT_TABLE_MAX: u64 = 1 << 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SumConfig {
    /// Maximum number of polynomial evaluations per call.
    pub work_budget: u64,
    pub workers: usize,
}

impl Default for SumConfig {
    fn default() -> Self {
        SumConfig {
            work_budget: 200_000_000,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

impl SumConfig {
    pub fn serial() -> Self {
        SumConfig {
            workers: 1,
            ..SumConfig::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SumValue {
    #[serde(serialize_with = "serialize_complex")]
    pub value: Complex64,
    pub abs_error_budget: f64,
    pub term_count: u64,
}

impl SumValue {
    pub fn abs(&self) -> f64 {
        self.value.norm()
    }
}

fn serialize_complex<S: serde::Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeStruct;
    let mut st = s.serialize_struct("Complex", 2)?;
    st.serialize_field("re", &z.re)?;
    st.serialize_field("im", &z.im)?;
    st.end()
}

/// Neumaier-compensated complex accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    re: f64,
    re_c: f64,
    im: f64,
    im_c: f64,
}

#[inline]
fn two_sum_step(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, z: Complex64) {
        two_sum_step(&mut self.re, &mut self.re_c, z.re);
        two_sum_step(&mut self.im, &mut self.im_c, z.im);
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(Complex64::new(other.re, other.im));
        self.add(Complex64::new(other.re_c, other.im_c));
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re + self.re_c, self.im + self.im_c)
    }
}

/// `e^{2πi r/q}` for `r ∈ [0, q)`.
pub struct RootTable {
    q: u64,
    split: u64,
    low: Vec<Complex64>,
    high: Vec<Complex64>,
}

fn root(r: u64, q: u64) -> Complex64 {
    // Reduce to |angle| ≤ π before scaling so the argument error stays small.
    let signed = if 2 * r > q { r as f64 - q as f64 } else { r as f64 };
    Complex64::from_polar(1.0, TAU * (signed / q as f64))
}

impl RootTable {
    pub fn new(q: u64) -> Self {
        if q <= DIRECT_ROOT_TABLE_MAX {
            RootTable {
                q,
                split: q,
                low: (0..q).map(|r| root(r, q)).collect(),
                high: vec![Complex64::new(1.0, 0.0)],
            }
        } else {
            let split = (q as f64).sqrt().ceil() as u64;
            let high_len = q.div_ceil(split);
            RootTable {
                q,
                split,
                low: (0..split).map(|r| root(r, q)).collect(),
                high: (0..high_len).map(|h| root(h * split, q)).collect(),
            }
        }
    }

    #[inline]
    pub fn get(&self, r: u64) -> Complex64 {
        debug_assert!(r < self.q);
        if self.split == self.q {
            self.low[r as usize]
        } else {
            self.high[(r / self.split) as usize] * self.low[(r % self.split) as usize]
        }
    }
}

/// The polynomial prepared for summation over `[lo, hi)ⁿ` modulo `q`.
struct BoxKernel {
    q: u64,
    lo: u64,
    hi: u64,
    n: usize,
    inner_degree: usize,
    /// `(coefficient, [(outer var, slot in outer_pows[var])], inner exponent)`
    terms: Vec<(u64, Vec<(usize, usize)>, usize)>,
    /// `outer_pows[j][slot][x - lo]`
    outer_pows: Vec<Vec<Vec<u64>>>,
}

impl BoxKernel {
    fn new(f: &SparsePoly, q: u64, lo: u64, hi: u64) -> Self {
        let n = f.n();
        let inner = n - 1;
        let residues = f.residues(q);
        let mut exps: Vec<Vec<u32>> = vec![Vec::new(); n];
        for (e, _) in &residues {
            for (j, &ej) in e.entries()[..inner].iter().enumerate() {
                if ej > 0 && !exps[j].contains(&ej) {
                    exps[j].push(ej);
                }
            }
        }
        let outer_pows = exps
            .iter()
            .map(|list| {
                list.iter()
                    .map(|&e| (lo..hi).map(|x| pow_mod(x, e as u64, q)).collect())
                    .collect()
            })
            .collect();
        let terms: Vec<_> = residues
            .iter()
            .map(|(e, c)| {
                let lookups = e.entries()[..inner]
                    .iter()
                    .enumerate()
                    .filter(|(_, &ej)| ej > 0)
                    .map(|(j, ej)| (j, exps[j].iter().position(|x| x == ej).expect("indexed")))
                    .collect();
                (*c, lookups, e.entries()[inner] as usize)
            })
            .collect();
        let inner_degree = terms.iter().map(|t| t.2).max().unwrap_or(0);
        BoxKernel {
            q,
            lo,
            hi,
            n,
            inner_degree,
            terms,
            outer_pows,
        }
    }

    /// Sums the phases over outer points whose first coordinate lies in
    /// `first` (for `n = 1`, over inner values in `first`).
    fn sum_range(&self, roots: &RootTable, first: std::ops::Range<u64>) -> CompensatedSum {
        let mut acc = CompensatedSum::default();
        if first.is_empty() {
            return acc;
        }
        let q = self.q;
        let d = self.inner_degree;
        let mut coeffs = vec![0u64; d + 1];
        let mut diffs = vec![0u64; d + 1];
        if self.n == 1 {
            for (c, _, e) in &self.terms {
                coeffs[*e] = (coeffs[*e] + c) % q;
            }
            self.inner_loop(roots, &coeffs, &mut diffs, first, &mut acc);
            return acc;
        }
        let outer = self.n - 1;
        let mut point = vec![self.lo; outer];
        point[0] = first.start;
        loop {
            coeffs.iter_mut().for_each(|c| *c = 0);
            for (c, lookups, e) in &self.terms {
                let mut t = *c;
                for &(j, slot) in lookups {
                    t = mul_mod(t, self.outer_pows[j][slot][(point[j] - self.lo) as usize], q);
                }
                coeffs[*e] += t;
                if coeffs[*e] >= q {
                    coeffs[*e] -= q;
                }
            }
            self.inner_loop(roots, &coeffs, &mut diffs, self.lo..self.hi, &mut acc);
            // odometer over the outer coordinates, last one fastest
            let mut j = outer;
            loop {
                if j == 0 {
                    return acc;
                }
                j -= 1;
                point[j] += 1;
                let end = if j == 0 { first.end } else { self.hi };
                if point[j] < end {
                    break;
                }
                if j == 0 {
                    return acc;
                }
                point[j] = self.lo;
            }
        }
    }

    #[inline]
    fn inner_loop(
        &self,
        roots: &RootTable,
        coeffs: &[u64],
        diffs: &mut [u64],
        range: std::ops::Range<u64>,
        acc: &mut CompensatedSum,
    ) {
        let q = self.q;
        let d = coeffs.len() - 1;
        // g(start), g(start+1), …, g(start+d), then forward differences.
        for (i, slot) in diffs.iter_mut().enumerate() {
            let x = (range.start + i as u64) % q;
            *slot = coeffs.iter().rev().fold(0u64, |h, &c| (mul_mod(h, x, q) + c) % q);
        }
        for level in 1..=d {
            for i in (level..=d).rev() {
                diffs[i] = (diffs[i] + q - diffs[i - 1]) % q;
            }
        }
        for _ in range {
            acc.add(roots.get(diffs[0]));
            for i in 0..d {
                let s = diffs[i] + diffs[i + 1];
                diffs[i] = if s >= q { s - q } else { s };
            }
        }
    }
}

/// Unnormalized phase sum over `[lo, hi)ⁿ`, split across workers by the
/// first coordinate; partial sums are merged in ascending range order.
fn box_sum(f: &SparsePoly, q: u64, lo: u64, hi: u64, workers: usize) -> CompensatedSum {
    let kernel = BoxKernel::new(f, q, lo, hi);
    let roots = RootTable::new(q);
    let len = hi - lo;
    let workers = (workers.max(1) as u64).min(len.max(1));
    let chunk = len.div_ceil(workers);
    let ranges: Vec<_> = (0..workers)
        .map(|w| (lo + w * chunk).min(hi)..(lo + (w + 1) * chunk).min(hi))
        .collect();
    if ranges.len() == 1 {
        return kernel.sum_range(&roots, ranges[0].clone());
    }
    let partials: Vec<CompensatedSum> = std::thread::scope(|s| {
        let handles: Vec<_> = ranges
            .iter()
            .cloned()
            .map(|r| {
                let kernel = &kernel;
                let roots = &roots;
                s.spawn(move || kernel.sum_range(roots, r))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("kernel worker panicked")).collect()
    });
    let mut total = CompensatedSum::default();
    for p in &partials {
        total.merge(p);
    }
    total
}

fn check_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{p} is not prime")))
    }
}

fn check_budget(side: u64, n: usize, budget: u64) -> Result<u64> {
    let estimated = (side as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if estimated > budget as u128 {
        return Err(Error::WorkBudgetExceeded { estimated, budget });
    }
    Ok(estimated as u64)
}

/// `S_f(p^m) = p^{-mn} Σ_{x ∈ [0,p^m)ⁿ} e^{2πi f(x)/p^m}`.
pub fn brute_force_s(f: &SparsePoly, p: u64, m: u32, cfg: &SumConfig) -> Result<SumValue> {
    check_prime(p)?;
    if m == 0 {
        return Err(Error::InvalidInput("m must be positive".into()));
    }
    let q = p
        .checked_pow(m)
        .ok_or(Error::WorkBudgetExceeded {
            estimated: u128::MAX,
            budget: cfg.work_budget,
        })?;
    let count = check_budget(q, f.n(), cfg.work_budget)?;
    let total = box_sum(f, q, 0, q, cfg.workers);
    Ok(normalized(total, count))
}

/// `E(p, f_τ) = (p-1)^{-n} Σ_{x ∈ {1..p-1}ⁿ} e^{2πi f_τ(x)/p}`.
pub fn torus_e(f_tau: &SparsePoly, p: u64, cfg: &SumConfig) -> Result<SumValue> {
    check_prime(p)?;
    if p == 2 {
        // The torus of 𝔽₂ⁿ is the single point (1, …, 1).
        let val = ModularEvaluator::new(f_tau, 2).eval(&vec![1; f_tau.n()]);
        let mut acc = CompensatedSum::default();
        acc.add(root(val, 2));
        return Ok(normalized(acc, 1));
    }
    let count = check_budget(p - 1, f_tau.n(), cfg.work_budget)?;
    let total = box_sum(f_tau, p, 1, p, cfg.workers);
    Ok(normalized(total, count))
}

fn normalized(total: CompensatedSum, count: u64) -> SumValue {
    SumValue {
        value: total.value() / count as f64,
        abs_error_budget: count as f64 * KERNEL_EPS_PER_TERM,
        term_count: count,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FaceNondeg {
    pub face_id: usize,
    pub pass: bool,
    /// A torus point where every partial derivative of `f_τ` vanishes mod p.
    pub witness: Option<Vec<u64>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NondegReport {
    pub prime: u64,
    pub faces: Vec<FaceNondeg>,
}

impl NondegReport {
    pub fn all_pass(&self) -> bool {
        self.faces.iter().all(|f| f.pass)
    }

    pub fn failing(&self) -> impl Iterator<Item = &FaceNondeg> {
        self.faces.iter().filter(|f| !f.pass)
    }
}

/// First point of `(𝔽_p^×)ⁿ` where the gradient of `g` vanishes mod `p`.
pub fn torus_critical_point(g: &SparsePoly, p: u64) -> Option<Vec<u64>> {
    let n = g.n();
    let grads: Vec<ModularEvaluator> = g.gradient().iter().map(|d| ModularEvaluator::new(d, p)).collect();
    if grads.iter().all(ModularEvaluator::is_zero) {
        return Some(vec![1; n]);
    }
    let mut x = vec![1u64; n];
    loop {
        if grads.iter().all(|d| d.eval(&x) == 0) {
            return Some(x);
        }
        let mut j = n;
        loop {
            if j == 0 {
                return None;
            }
            j -= 1;
            x[j] += 1;
            if x[j] < p {
                break;
            }
            x[j] = 1;
        }
    }
}

/// Scans every face restriction for critical points on the torus mod `p`.
pub fn check_nondegenerate_mod_p(faces: &[Face], p: u64, cfg: &SumConfig) -> Result<NondegReport> {
    check_prime(p)?;
    if let Some(first) = faces.first() {
        let per_face = check_budget(p - 1, first.restriction.n(), cfg.work_budget)?;
        let total = per_face as u128 * faces.len() as u128;
        if total > cfg.work_budget as u128 {
            return Err(Error::WorkBudgetExceeded {
                estimated: total,
                budget: cfg.work_budget,
            });
        }
    }
    let faces = faces
        .iter()
        .map(|face| {
            let witness = torus_critical_point(&face.restriction, p);
            FaceNondeg {
                face_id: face.id,
                pass: witness.is_none(),
                witness,
            }
        })
        .collect();
    Ok(NondegReport { prime: p, faces })
}
