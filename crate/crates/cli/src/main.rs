use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use newtonsum_core::sums::SumConfig;
use newtonsum_core::{parse_polynomial, BigRational, FaceLattice, Limits, Polynomial};

mod commands;
mod report;

use report::{Format, Report};

/// Newton-polyhedron invariants, exponential sums modulo prime powers, and
/// exact checks of their face decomposition.
#[derive(Parser, Debug)]
#[command(name = "newtonsum", version, propagate_version = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Newton polyhedron, faces, sigma, kappa and the face sigma table.
    Analyze {
        #[command(flatten)]
        poly: PolyArg,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Scan every face restriction for torus critical points mod p.
    Nondeg {
        #[command(flatten)]
        poly: PolyArg,
        #[command(flatten)]
        primes: PrimeArgs,
        #[command(flatten)]
        work: WorkArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Brute-force S_f(p^m).
    Sum {
        #[command(flatten)]
        poly: PolyArg,
        #[command(flatten)]
        primes: PrimeArgs,
        #[command(flatten)]
        powers: PowerArgs,
        #[command(flatten)]
        work: WorkArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Torus sum E(p, f_tau) of a face restriction (default: f itself).
    Esum {
        #[command(flatten)]
        poly: PolyArg,
        #[command(flatten)]
        primes: PrimeArgs,
        /// Face id as listed by `analyze`.
        #[arg(long)]
        face: Option<usize>,
        #[command(flatten)]
        work: WorkArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Compare brute-force S_f(p^m) with the assembled face decomposition.
    VerifyFormula {
        #[command(flatten)]
        poly: PolyArg,
        #[command(flatten)]
        primes: PrimeArgs,
        #[command(flatten)]
        powers: PowerArgs,
        #[command(flatten)]
        trunc: TruncArgs,
        /// Evaluate both sides even when some face is degenerate mod p.
        #[arg(long)]
        report_degenerate: bool,
        #[command(flatten)]
        work: WorkArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Exact lower bounds for nu(k) up to level T, plus the convexity sampler.
    VerifyNu {
        #[command(flatten)]
        poly: PolyArg,
        /// Enumeration level.
        #[arg(long = "T", default_value_t = 20)]
        t: u64,
        /// Sampler trials per face (0 disables sampling).
        #[arg(long, default_value_t = 200)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// |S_f(p^m)| normalized by p^{-sigma m} m^{kappa-1}.
    Ratios {
        #[command(flatten)]
        poly: PolyArg,
        #[command(flatten)]
        primes: PrimeArgs,
        #[command(flatten)]
        powers: PowerArgs,
        /// Flag cells whose ratio exceeds this value.
        #[arg(long)]
        ceiling: Option<f64>,
        #[command(flatten)]
        work: WorkArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Fit the decay exponent of |E(p, f_tau)| in p (default face: F0).
    Edecay {
        #[command(flatten)]
        poly: PolyArg,
        #[command(flatten)]
        primes: PrimeArgs,
        #[arg(long)]
        face: Option<usize>,
        #[command(flatten)]
        work: WorkArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Check sigma(f) <= (n - d)/2 for a user-supplied critical-locus dimension d.
    SigmaBound {
        #[command(flatten)]
        poly: PolyArg,
        #[arg(long)]
        d: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Args, Debug)]
struct PolyArg {
    /// Polynomial, e.g. "x*y + z*u" or "3*x1^2*x2 - x3".
    polynomial: String,
    /// Number of variables, if more than the highest one used.
    #[arg(long)]
    vars: Option<usize>,
}

impl PolyArg {
    fn lattice(&self) -> newtonsum_core::Result<FaceLattice> {
        FaceLattice::of(&self.parse()?, &Limits::default())
    }

    fn parse(&self) -> newtonsum_core::Result<Polynomial> {
        parse_polynomial(&self.polynomial, self.vars)
    }
}

#[derive(Args, Debug)]
struct PrimeArgs {
    #[arg(short = 'p', long = "prime")]
    prime: Vec<u64>,
    /// Comma-separated primes, e.g. 3,5,7.
    #[arg(long, value_delimiter = ',')]
    primes: Vec<u64>,
}

impl PrimeArgs {
    fn list(&self) -> Result<Vec<u64>, String> {
        let mut all: Vec<u64> = self.prime.iter().chain(&self.primes).copied().collect();
        all.sort_unstable();
        all.dedup();
        if all.is_empty() {
            return Err("at least one prime is required (--prime or --primes)".into());
        }
        Ok(all)
    }
}

#[derive(Args, Debug)]
struct PowerArgs {
    #[arg(short = 'm', long = "power")]
    power: Vec<u32>,
    /// Inclusive range, e.g. 1..4.
    #[arg(long, value_parser = parse_range)]
    powers: Option<(u32, u32)>,
}

impl PowerArgs {
    fn list(&self) -> Result<Vec<u32>, String> {
        let mut all = self.power.clone();
        if let Some((a, b)) = self.powers {
            all.extend(a..=b);
        }
        all.sort_unstable();
        all.dedup();
        if all.is_empty() {
            return Err("at least one power is required (--power or --powers)".into());
        }
        if all.contains(&0) {
            return Err("powers must be positive".into());
        }
        Ok(all)
    }
}

fn parse_range(text: &str) -> Result<(u32, u32), String> {
    let (a, b) = text.split_once("..").ok_or_else(|| format!("expected a..b, got {text:?}"))?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let a: u32 = a.trim().parse().map_err(|_| format!("bad range start in {text:?}"))?;
    let b: u32 = b.trim().parse().map_err(|_| format!("bad range end in {text:?}"))?;
    if a > b {
        return Err(format!("empty range {text:?}"));
    }
    Ok((a, b))
}

#[derive(Args, Debug)]
struct TruncArgs {
    /// Bound on the truncated lattice mass; picks the level T.
    #[arg(long, default_value = "1e-8", value_parser = parse_eps)]
    eps: BigRational,
    /// Fixed lattice level T (overrides --eps).
    #[arg(long = "T")]
    t: Option<u64>,
}

fn parse_eps(text: &str) -> Result<BigRational, String> {
    let eps = newtonsum_core::rational::parse(text).map_err(|e| e.to_string())?;
    if !newtonsum_core::rational::is_positive(&eps) {
        return Err("eps must be positive".into());
    }
    Ok(eps)
}

#[derive(Args, Debug)]
struct WorkArgs {
    /// Maximum number of polynomial evaluations per sum.
    #[arg(long, default_value_t = 200_000_000)]
    budget: u64,
    /// Worker threads (default: available cores).
    #[arg(long)]
    workers: Option<usize>,
}

impl WorkArgs {
    fn config(&self) -> SumConfig {
        let base = SumConfig::default();
        SumConfig {
            work_budget: self.budget,
            workers: self.workers.unwrap_or(base.workers).max(1),
        }
    }
}

#[derive(Args, Debug)]
struct OutputArgs {
    #[arg(long, conflicts_with = "csv")]
    json: bool,
    #[arg(long)]
    csv: bool,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl OutputArgs {
    fn format(&self) -> Format {
        if self.json {
            Format::Json
        } else if self.csv {
            Format::Csv
        } else {
            Format::Human
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.command.output();
    let result = commands::run(&cli.command);
    match result.and_then(|report| report.emit(out.format(), out.out.as_deref()).map(|()| report.exit)) {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(report::EXIT_USAGE)
        }
    }
}

impl Command {
    fn output(&self) -> &OutputArgs {
        match self {
            Command::Analyze { out, .. }
            | Command::Nondeg { out, .. }
            | Command::Sum { out, .. }
            | Command::Esum { out, .. }
            | Command::VerifyFormula { out, .. }
            | Command::VerifyNu { out, .. }
            | Command::Ratios { out, .. }
            | Command::Edecay { out, .. }
            | Command::SigmaBound { out, .. } => out,
        }
    }
}

pub(crate) type Outcome = Result<Report, String>;
