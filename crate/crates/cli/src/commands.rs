use std::fmt::Write as _;

use newtonsum_core::bounds::{
    bound_ratio_table, check_nu_inequality, check_sigma_dim_bound, convexity_sampler, e_decay_fit, NuCheckRecord,
    SamplerReport,
};
use newtonsum_core::faceformula::{verify_formula, FormulaRow, Verdict, VerifyOptions};
use newtonsum_core::rational;
use newtonsum_core::sums::{brute_force_s, check_nondegenerate_mod_p, torus_critical_point, torus_e, SumValue};
use newtonsum_core::{Facet, FaceLattice, Limits};
use serde::Serialize;

use crate::report::{csv_opt, float, linear_form, opt_float, q, tuple, Report, EXIT_ASSERTION, EXIT_OK, EXIT_USAGE};
use crate::{Command, Outcome};

fn err(e: newtonsum_core::Error) -> String {
    e.to_string()
}

pub fn run(command: &Command) -> Outcome {
    match command {
        Command::Analyze { poly, .. } => analyze(&poly.lattice().map_err(err)?),
        Command::Nondeg { poly, primes, work, .. } => nondeg(&poly.lattice().map_err(err)?, &primes.list()?, work),
        Command::Sum {
            poly, primes, powers, work, ..
        } => sum(&poly.lattice().map_err(err)?, &primes.list()?, &powers.list()?, work),
        Command::Esum {
            poly, primes, face, work, ..
        } => esum(&poly.lattice().map_err(err)?, &primes.list()?, *face, work),
        Command::VerifyFormula {
            poly,
            primes,
            powers,
            trunc,
            report_degenerate,
            work,
            ..
        } => {
            let options = VerifyOptions {
                report_degenerate: *report_degenerate,
                level: trunc.t,
            };
            verify(&poly.lattice().map_err(err)?, &primes.list()?, &powers.list()?, &trunc.eps, options, work)
        }
        Command::VerifyNu {
            poly, t, samples, seed, ..
        } => verify_nu(&poly.lattice().map_err(err)?, *t, *samples, *seed),
        Command::Ratios {
            poly,
            primes,
            powers,
            ceiling,
            work,
            ..
        } => ratios(&poly.lattice().map_err(err)?, &primes.list()?, &powers.list()?, *ceiling, work),
        Command::Edecay {
            poly, primes, face, work, ..
        } => edecay(&poly.lattice().map_err(err)?, &primes.list()?, *face, work),
        Command::SigmaBound { poly, d, .. } => sigma_bound(&poly.lattice().map_err(err)?, *d),
    }
}

fn face_or(lattice: &FaceLattice, face: Option<usize>, default: usize) -> Result<usize, String> {
    match face {
        Some(id) if id < lattice.faces().len() => Ok(id),
        Some(id) => Err(format!("no face with id {id}; `analyze` lists {} faces", lattice.faces().len())),
        None => Ok(default),
    }
}

#[derive(Serialize)]
struct FaceRow {
    id: usize,
    dim: usize,
    vertices: Vec<usize>,
    recession_axes: Vec<usize>,
    active_facets: Vec<usize>,
    witness_k: Vec<u64>,
    sigma_tau: String,
    restriction: String,
}

#[derive(Serialize)]
struct AnalyzeReport<'a> {
    polynomial: String,
    n: usize,
    homogeneous_degree: Option<u64>,
    vertices: &'a [Vec<i64>],
    facets: &'a [Facet],
    sigma: String,
    t_star: String,
    kappa: usize,
    f0_face: usize,
    f0_dim: usize,
    faces: Vec<FaceRow>,
}

fn analyze(lattice: &FaceLattice) -> Outcome {
    let poly = lattice.polyhedron();
    let sd = lattice.sigma_data();
    let f = poly.source();
    let f0 = lattice.f0_face_id();
    let faces: Vec<FaceRow> = lattice
        .faces()
        .iter()
        .map(|face| FaceRow {
            id: face.id,
            dim: face.dim,
            vertices: face.vertex_ids.clone(),
            recession_axes: face.recession_axes.clone(),
            active_facets: face.active_facet_ids.clone(),
            witness_k: face.witness_k.clone(),
            sigma_tau: rational::to_string(&face.sigma_tau),
            restriction: face.restriction.to_string(),
        })
        .collect();
    let report = AnalyzeReport {
        polynomial: f.to_string(),
        n: lattice.n(),
        homogeneous_degree: f.homogeneity(),
        vertices: poly.vertices(),
        facets: poly.facets(),
        sigma: rational::to_string(&sd.sigma),
        t_star: rational::to_string(&sd.t_star),
        kappa: sd.kappa,
        f0_face: f0,
        f0_dim: sd.f0_dim,
        faces,
    };

    let mut h = String::new();
    let degree = match f.homogeneity() {
        Some(d) => format!(", homogeneous of degree {d}"),
        None => String::new(),
    };
    let _ = writeln!(h, "f = {f}  (n = {}{degree})", lattice.n());
    let _ = writeln!(
        h,
        "sigma = {}, t* = {}, kappa = {}, F0 = face {f0} (dim {})",
        q(&sd.sigma),
        q(&sd.t_star),
        sd.kappa,
        sd.f0_dim
    );
    let _ = writeln!(h, "vertices:");
    for (i, v) in poly.vertices().iter().enumerate() {
        let _ = writeln!(h, "  v{i} {}", tuple(v));
    }
    let _ = writeln!(h, "facets:");
    for (i, facet) in poly.facets().iter().enumerate() {
        let _ = writeln!(h, "  F{i} {} >= {}", linear_form(&facet.normal), facet.offset);
    }
    let _ = writeln!(h, "faces:");
    let _ = writeln!(h, "  {:>3} {:>3}  {:<14} {:<10} {:>9}  f_tau", "id", "dim", "vertices", "axes", "sigma_tau");
    for row in &report.faces {
        let verts: Vec<String> = row.vertices.iter().map(|v| format!("v{v}")).collect();
        let axes: Vec<String> = row.recession_axes.iter().map(|a| format!("e{}", a + 1)).collect();
        let _ = writeln!(
            h,
            "  {:>3} {:>3}  {:<14} {:<10} {:>9}  {}",
            row.id,
            row.dim,
            verts.join(","),
            if axes.is_empty() { "-".into() } else { axes.join(",") },
            q(&lattice.face(row.id).sigma_tau),
            row.restriction
        );
    }
    Report::new(&report, h)
}

#[derive(Serialize)]
struct NondegFace {
    face_id: usize,
    restriction: String,
    pass: bool,
    witness: Option<Vec<u64>>,
}

#[derive(Serialize)]
struct NondegPrime {
    prime: u64,
    all_pass: bool,
    faces: Vec<NondegFace>,
}

fn nondeg(lattice: &FaceLattice, primes: &[u64], work: &crate::WorkArgs) -> Outcome {
    let cfg = work.config();
    let mut rows = Vec::new();
    let mut h = String::new();
    for &p in primes {
        let report = check_nondegenerate_mod_p(lattice.faces(), p, &cfg).map_err(err)?;
        let faces: Vec<NondegFace> = report
            .faces
            .iter()
            .map(|fnd| NondegFace {
                face_id: fnd.face_id,
                restriction: lattice.face(fnd.face_id).restriction.to_string(),
                pass: fnd.pass,
                witness: fnd.witness.clone(),
            })
            .collect();
        let _ = writeln!(
            h,
            "p = {p}: {}",
            if report.all_pass() { "nondegenerate on every face" } else { "degenerate" }
        );
        for face in faces.iter().filter(|f| !f.pass) {
            let witness = face.witness.as_deref().map(tuple).unwrap_or_default();
            let _ = writeln!(h, "  face {} ({}) critical at {witness}", face.face_id, face.restriction);
        }
        rows.push(NondegPrime {
            prime: p,
            all_pass: report.all_pass(),
            faces,
        });
    }
    Report::new(&rows, h)
}

#[derive(Serialize)]
struct SumRow {
    p: u64,
    m: u32,
    sum: Option<SumValue>,
    abs: Option<f64>,
    error: Option<String>,
}

fn render_sum(s: &SumValue) -> String {
    format!("{} {} {}i", float(s.value.re), if s.value.im < 0.0 { "-" } else { "+" }, float(s.value.im.abs()))
}

fn sum(lattice: &FaceLattice, primes: &[u64], powers: &[u32], work: &crate::WorkArgs) -> Outcome {
    let cfg = work.config();
    let f = lattice.polyhedron().source();
    let mut rows = Vec::new();
    let mut h = String::new();
    let mut exit = EXIT_OK;
    for &p in primes {
        for &m in powers {
            let row = match brute_force_s(f, p, m, &cfg) {
                Ok(s) => {
                    let _ = writeln!(
                        h,
                        "S({p}^{m}) = {}  |S| = {}  budget {}",
                        render_sum(&s),
                        float(s.abs()),
                        float(s.abs_error_budget)
                    );
                    SumRow {
                        p,
                        m,
                        sum: Some(s),
                        abs: Some(s.abs()),
                        error: None,
                    }
                }
                Err(e) => {
                    exit = EXIT_USAGE;
                    let _ = writeln!(h, "S({p}^{m}): {e}");
                    SumRow {
                        p,
                        m,
                        sum: None,
                        abs: None,
                        error: Some(e.to_string()),
                    }
                }
            };
            rows.push(row);
        }
    }
    Ok(Report::new(&rows, h)?.with_exit(exit))
}

#[derive(Serialize)]
struct EsumRow {
    p: u64,
    face_id: usize,
    restriction: String,
    nondegenerate: bool,
    sum: Option<SumValue>,
    abs: Option<f64>,
    error: Option<String>,
}

fn esum(lattice: &FaceLattice, primes: &[u64], face: Option<usize>, work: &crate::WorkArgs) -> Outcome {
    let cfg = work.config();
    let face_id = face_or(lattice, face, lattice.whole_face_id())?;
    let g = &lattice.face(face_id).restriction;
    let mut rows = Vec::new();
    let mut h = String::new();
    let mut exit = EXIT_OK;
    let _ = writeln!(h, "f_tau = {g}  (face {face_id})");
    for &p in primes {
        let result = if newtonsum_core::modarith::is_prime(p) {
            torus_e(g, p, &cfg)
        } else {
            Err(newtonsum_core::Error::InvalidInput(format!("{p} is not prime")))
        };
        let nondegenerate = result.is_ok() && torus_critical_point(g, p).is_none();
        let row = match result {
            Ok(e) => {
                let _ = writeln!(
                    h,
                    "E({p}) = {}  |E| = {}  budget {}{}",
                    render_sum(&e),
                    float(e.abs()),
                    float(e.abs_error_budget),
                    if nondegenerate { "" } else { "  (degenerate mod p)" }
                );
                EsumRow {
                    p,
                    face_id,
                    restriction: g.to_string(),
                    nondegenerate,
                    sum: Some(e),
                    abs: Some(e.abs()),
                    error: None,
                }
            }
            Err(e) => {
                exit = EXIT_USAGE;
                let _ = writeln!(h, "E({p}): {e}");
                EsumRow {
                    p,
                    face_id,
                    restriction: g.to_string(),
                    nondegenerate,
                    sum: None,
                    abs: None,
                    error: Some(e.to_string()),
                }
            }
        };
        rows.push(row);
    }
    Ok(Report::new(&rows, h)?.with_exit(exit))
}

#[derive(Serialize)]
struct DegenerateFace {
    p: u64,
    face_id: usize,
    witness: Option<Vec<u64>>,
}

#[derive(Serialize)]
struct VerifyReport {
    polynomial: String,
    eps: String,
    rows: Vec<FormulaRow>,
    degenerate_faces: Vec<DegenerateFace>,
}

fn verify(
    lattice: &FaceLattice,
    primes: &[u64],
    powers: &[u32],
    eps: &newtonsum_core::BigRational,
    options: VerifyOptions,
    work: &crate::WorkArgs,
) -> Outcome {
    let cfg = work.config();
    let mut rows = Vec::new();
    let mut degenerate_faces = Vec::new();
    for &p in primes {
        let reports = verify_formula(lattice, p, powers, eps, &cfg, &Limits::default(), options).map_err(err)?;
        if let Some(first) = reports.first() {
            degenerate_faces.extend(first.nondeg.failing().map(|f| DegenerateFace {
                p,
                face_id: f.face_id,
                witness: f.witness.clone(),
            }));
        }
        rows.extend(reports.iter().map(|r| r.row()));
    }
    let exit = if rows.iter().any(|r| r.verdict == Verdict::Fail) {
        EXIT_ASSERTION
    } else if rows.iter().any(|r| matches!(r.verdict, Verdict::Error(_))) {
        EXIT_USAGE
    } else {
        EXIT_OK
    };

    let mut h = String::new();
    let _ = writeln!(h, "f = {}", lattice.polyhedron().source());
    let _ = writeln!(
        h,
        "{:>5} {:>3} {:>14} {:>14} {:>12} {:>12} {:>4}  verdict",
        "p", "m", "lhs", "rhs", "residual", "tol", "T"
    );
    for r in &rows {
        let _ = writeln!(
            h,
            "{:>5} {:>3} {:>14} {:>14} {:>12} {:>12} {:>4}  {}",
            r.p,
            r.m,
            opt_float(r.lhs.map(|z| z.re)),
            opt_float(r.rhs.map(|z| z.re)),
            opt_float(r.residual),
            opt_float(r.tol),
            r.t.map(|t| t.to_string()).unwrap_or_else(|| "-".into()),
            r.verdict.label()
        );
    }
    for d in &degenerate_faces {
        let _ = writeln!(
            h,
            "p = {}: face {} degenerate at {}",
            d.p,
            d.face_id,
            d.witness.as_deref().map(tuple).unwrap_or_default()
        );
    }

    let mut csv = String::from("p,m,lhs_re,lhs_im,rhs_re,rhs_im,tol,residual,verdict,T,tail\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.p,
            r.m,
            csv_opt(r.lhs.map(|z| z.re)),
            csv_opt(r.lhs.map(|z| z.im)),
            csv_opt(r.rhs.map(|z| z.re)),
            csv_opt(r.rhs.map(|z| z.im)),
            csv_opt(r.tol),
            csv_opt(r.residual),
            r.verdict.label().replace(',', ";"),
            r.t.map(|t| t.to_string()).unwrap_or_default(),
            r.tail.as_ref().map(rational::to_string).unwrap_or_default()
        );
    }
    let report = VerifyReport {
        polynomial: lattice.polyhedron().source().to_string(),
        eps: rational::to_string(eps),
        rows,
        degenerate_faces,
    };
    Ok(Report::new(&report, h)?.with_csv(csv).with_exit(exit))
}

#[derive(Serialize)]
struct SamplerRow {
    face_id: usize,
    report: Option<SamplerReport>,
    error: Option<String>,
}

#[derive(Serialize)]
struct NuReport {
    polynomial: String,
    sigma: String,
    #[serde(rename = "T")]
    t: u64,
    points_checked: u64,
    weak_hypothesis_holds: bool,
    exact_violations: Vec<NuCheckRecord>,
    /// Findings only; never affect the exit code.
    weak_violations: Vec<NuCheckRecord>,
    sampler: Vec<SamplerRow>,
}

fn verify_nu(lattice: &FaceLattice, t: u64, samples: u64, seed: u64) -> Outcome {
    let check = check_nu_inequality(lattice, t, &Limits::default()).map_err(err)?;
    let sampler: Vec<SamplerRow> = if samples == 0 {
        Vec::new()
    } else {
        lattice
            .faces()
            .iter()
            .map(|face| match convexity_sampler(lattice, face.id, samples, seed) {
                Ok(r) => SamplerRow {
                    face_id: face.id,
                    report: Some(r),
                    error: None,
                },
                Err(e) => SamplerRow {
                    face_id: face.id,
                    report: None,
                    error: Some(e.to_string()),
                },
            })
            .collect()
    };
    let counterexamples = sampler
        .iter()
        .filter(|s| s.report.as_ref().is_some_and(|r| !r.passed()))
        .count();
    let sampler_errors = sampler.iter().filter(|s| s.error.is_some()).count();
    let exit = if !check.passed() || counterexamples > 0 {
        EXIT_ASSERTION
    } else if sampler_errors > 0 {
        EXIT_USAGE
    } else {
        EXIT_OK
    };

    let mut h = String::new();
    let _ = writeln!(h, "f = {}", lattice.polyhedron().source());
    let _ = writeln!(h, "checked {} lattice points with nu(k) <= {t}", check.points_checked);
    let _ = writeln!(
        h,
        "exact bound nu >= sigma(N+1) - sigma(f_tau): {} violations",
        check.exact_violations.len()
    );
    for r in &check.exact_violations {
        let _ = writeln!(h, "  VIOLATION k={} nu={} rhs={}", tuple(&r.k), r.nu, q(&r.rhs_exact));
    }
    let _ = writeln!(
        h,
        "finding: weaker bound nu >= sigma(N+1) - (dim tau+1)/2 fails at {} points (no vertex of F0 in {{0,1}}^n: {})",
        check.weak_violations.len(),
        if check.weak_hypothesis_holds { "yes" } else { "no" }
    );
    for r in check.weak_violations.iter().take(10) {
        let _ = writeln!(h, "  k={} nu={} < {}", tuple(&r.k), r.nu, q(&r.rhs_weak));
    }
    if check.weak_violations.len() > 10 {
        let _ = writeln!(h, "  ... {} more", check.weak_violations.len() - 10);
    }
    if samples > 0 {
        let _ = writeln!(
            h,
            "convexity sampler: {} faces, {samples} trials each, seed {seed}: {counterexamples} counterexamples, {sampler_errors} errors",
            sampler.len()
        );
        for s in &sampler {
            if let Some(e) = &s.error {
                let _ = writeln!(h, "  face {}: {e}", s.face_id);
            }
        }
    }

    let mut csv = String::from("kind,k,face_id,nu,N,rhs_exact,rhs_weak\n");
    let rows = check
        .exact_violations
        .iter()
        .map(|r| ("exact", r))
        .chain(check.weak_violations.iter().map(|r| ("weak", r)));
    for (kind, r) in rows {
        let k: Vec<String> = r.k.iter().map(u64::to_string).collect();
        let _ = writeln!(
            csv,
            "{kind},{},{},{},{},{},{}",
            k.join(" "),
            r.face_id,
            r.nu,
            r.big_n,
            rational::to_string(&r.rhs_exact),
            rational::to_string(&r.rhs_weak)
        );
    }
    let report = NuReport {
        polynomial: lattice.polyhedron().source().to_string(),
        sigma: rational::to_string(&lattice.sigma_data().sigma),
        t,
        points_checked: check.points_checked,
        weak_hypothesis_holds: check.weak_hypothesis_holds,
        exact_violations: check.exact_violations,
        weak_violations: check.weak_violations,
        sampler,
    };
    Ok(Report::new(&report, h)?.with_csv(csv).with_exit(exit))
}

fn ratios(lattice: &FaceLattice, primes: &[u64], powers: &[u32], ceiling: Option<f64>, work: &crate::WorkArgs) -> Outcome {
    let table = bound_ratio_table(lattice, primes, powers, &work.config(), ceiling).map_err(err)?;
    let exit = if table.rows.iter().any(|r| r.error.is_some()) {
        EXIT_USAGE
    } else {
        EXIT_OK
    };
    let mut h = String::new();
    if let Some(banner) = &table.banner {
        let _ = writeln!(h, "*** {banner} ***");
    }
    let _ = writeln!(h, "f = {}  sigma = {}  kappa = {}", lattice.polyhedron().source(), q(&table.sigma), table.kappa);
    let _ = writeln!(h, "{:>5} {:>3} {:>14} {:>14} {:>14}", "p", "m", "|S|", "ratio_kappa", "ratio_n");
    for r in &table.rows {
        let _ = write!(
            h,
            "{:>5} {:>3} {:>14} {:>14} {:>14}",
            r.p,
            r.m,
            opt_float(r.abs_s),
            opt_float(r.ratio_kappa),
            opt_float(r.ratio_n)
        );
        if let Some(e) = &r.error {
            let _ = write!(h, "  {e}");
        }
        if r.exceeds_ceiling {
            let _ = write!(h, "  above ceiling");
        }
        h.push('\n');
    }
    let _ = writeln!(h, "estimated c = {}", opt_float(table.estimated_c));
    for finding in &table.findings {
        let _ = writeln!(h, "finding: {finding}");
    }
    let csv = table.to_csv();
    Ok(Report::new(&table, h)?.with_csv(csv).with_exit(exit))
}

fn edecay(lattice: &FaceLattice, primes: &[u64], face: Option<usize>, work: &crate::WorkArgs) -> Outcome {
    let face_id = face_or(lattice, face, lattice.f0_face_id())?;
    let fit = e_decay_fit(lattice, face_id, primes, &work.config()).map_err(err)?;
    let mut h = String::new();
    let _ = writeln!(h, "f_tau = {}  (face {face_id})", lattice.face(face_id).restriction);
    for pt in &fit.points {
        let _ = write!(h, "  p = {:>5}  |E| = {}", pt.p, opt_float(pt.abs_e));
        if let Some(note) = &pt.note {
            let _ = write!(h, "  ({note})");
        }
        h.push('\n');
    }
    let _ = writeln!(
        h,
        "fitted exponent {:.4}; -sigma(f_tau) = -{}; -(dim tau+1)/2 = {}",
        fit.fitted_exponent,
        q(&fit.sigma_tau),
        q(&fit.dim_exponent)
    );
    let mut csv = String::from("p,abs_e,abs_error_budget,used,note\n");
    for pt in &fit.points {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            pt.p,
            csv_opt(pt.abs_e),
            csv_opt(pt.abs_error_budget),
            pt.used,
            pt.note.as_deref().unwrap_or("").replace(',', ";")
        );
    }
    Ok(Report::new(&fit, h)?.with_csv(csv))
}

fn sigma_bound(lattice: &FaceLattice, d: usize) -> Outcome {
    let check = check_sigma_dim_bound(lattice, d).map_err(err)?;
    let mut h = format!(
        "sigma = {} {} (n - d)/2 = {}\n",
        q(&check.sigma),
        if check.holds { "<=" } else { ">" },
        q(&check.bound)
    );
    if !check.holds {
        h.push_str("finding: bound fails; the supplied d or the hypotheses are inconsistent\n");
    }
    Report::new(&check, h)
}
