//! The `ergomax` command line.
//!
//! Exit codes: 0 when everything checked passes, 1 on a violation, 2 on a
//! usage or input error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ergomax_core::cz::{cz_decompose, strong_pp_check, weak11_with_mw, weighted_weak_pp};
use ergomax_core::ergodic::{
    converse_probe, cover_by_rectangle_bases, ergodic_ap_constant, ergodic_maximal,
    verify_transference_identity, ErgodicRectangle,
};
use ergomax_core::io::{
    parse_atom_function, parse_sequence, parse_system, parse_weight, LambdaGrid,
};
use ergomax_core::maximal::{centered_maximal, dyadic_maximal, sharp_maximal, uncentered_maximal};
use ergomax_core::scalar::format_scalar;
use ergomax_core::weights::{ap_constant, ap_exceedance, weighted_norm, weighted_norm_pow};
use ergomax_core::{Exact, InequalityReport, IntegerInterval, MaximalOp, Scalar};

use crate::campaign::run_campaign;
use crate::config::{CampaignConfig, SEED_ENV};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "ergomax",
    version,
    about = "Discrete maximal operators, A_p weights and their ergodic transference"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a maximal operator on a window and write CSV.
    Maximal(MaximalArgs),
    /// Windowed A_p constant of a weight.
    Apconst(ApconstArgs),
    /// Weighted ℓ^p norm of a sequence.
    Wnorm(WnormArgs),
    /// Calderón–Zygmund intervals at one height.
    Cz(CzArgs),
    /// Check a weighted inequality over a λ-grid.
    Verify(VerifyArgs),
    /// Finite measure-preserving systems.
    #[command(subcommand)]
    Ergodic(ErgodicCommand),
    /// Run a verification campaign and write its report.
    Campaign(CampaignArgs),
}

#[derive(Args, Debug)]
struct MaximalArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    op: OpArg,
    #[arg(long)]
    truncate: Option<u64>,
    #[arg(long)]
    exact: bool,
    #[arg(long, allow_hyphen_values = true)]
    eval_lo: i64,
    #[arg(long, allow_hyphen_values = true)]
    eval_hi: i64,
    /// CSV destination; standard output if omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OpArg {
    Centered,
    Uncentered,
    Dyadic,
    Sharp,
}

impl From<OpArg> for MaximalOp {
    fn from(op: OpArg) -> Self {
        match op {
            OpArg::Centered => MaximalOp::Centered,
            OpArg::Uncentered => MaximalOp::Uncentered,
            OpArg::Dyadic => MaximalOp::Dyadic,
            OpArg::Sharp => MaximalOp::Sharp,
        }
    }
}

#[derive(Args, Debug)]
struct ApconstArgs {
    #[arg(long)]
    weight: PathBuf,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    exact: bool,
    /// Stop at the first interval whose product exceeds this and exit 1.
    #[arg(long)]
    threshold: Option<String>,
}

#[derive(Args, Debug)]
struct WnormArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    weight: PathBuf,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    exact: bool,
}

#[derive(Args, Debug)]
struct CzArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    lambda: String,
    #[arg(long)]
    exact: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Inequality {
    Weak11,
    Weakpp,
    Strongpp,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(value_enum)]
    inequality: Inequality,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    weight: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    /// `a,b,c`, `geom:λ0:count`, `auto` or `auto:count`.
    #[arg(long, default_value = "auto")]
    lambda_grid: String,
    #[arg(long)]
    exact: bool,
}

#[derive(Subcommand, Debug)]
enum ErgodicCommand {
    /// M̃f at every atom.
    Maximal {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        truncate: Option<u64>,
        #[arg(long)]
        exact: bool,
    },
    /// Ergodic A_p constant.
    Apconst {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        weight: PathBuf,
        #[arg(long)]
        p: f64,
        /// Scan radii 1..=N only instead of the exact supremum.
        #[arg(long)]
        n_max: Option<u64>,
        #[arg(long)]
        exact: bool,
    },
    /// Transference identity along every orbit (or the orbit of one atom).
    Transfer {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        f: PathBuf,
        #[arg(long = "L")]
        l: u64,
        #[arg(long = "J")]
        j: u64,
        #[arg(long)]
        x: Option<usize>,
        #[arg(long)]
        exact: bool,
    },
    /// Rectangle bases of half-length K covering the main cycle, or a check
    /// of a given base.
    Rectangle {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        k: u64,
        /// Comma-separated atoms to check as a base.
        #[arg(long, value_delimiter = ',')]
        base: Option<Vec<usize>>,
        #[arg(long)]
        exact: bool,
    },
    /// Operator-norm estimate from rectangle test functions next to the A_p constant.
    Converse {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        weight: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long = "J")]
        j: u64,
        #[arg(long, default_value_t = 8)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        exact: bool,
    },
}

#[derive(Args, Debug)]
struct CampaignArgs {
    /// Campaign config; the default (golden) campaign if omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    report: PathBuf,
    #[arg(long)]
    jobs: Option<usize>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// Runs the command line and returns the exit code.
pub fn run<I, S>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_PASS
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_USAGE
        }
    }
}

macro_rules! typed {
    ($exact:expr, $f:ident($($arg:expr),*)) => {
        if $exact { $f::<Exact>($($arg),*) } else { $f::<f64>($($arg),*) }
    };
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Maximal(a) => typed!(a.exact, maximal(&a, out)),
        Command::Apconst(a) => typed!(a.exact, apconst(&a, out)),
        Command::Wnorm(a) => typed!(a.exact, wnorm(&a, out)),
        Command::Cz(a) => typed!(a.exact, cz(&a, out)),
        Command::Verify(a) => typed!(a.exact, verify(&a, out)),
        Command::Ergodic(e) => {
            let exact = match &e {
                ErgodicCommand::Maximal { exact, .. }
                | ErgodicCommand::Apconst { exact, .. }
                | ErgodicCommand::Transfer { exact, .. }
                | ErgodicCommand::Rectangle { exact, .. }
                | ErgodicCommand::Converse { exact, .. } => *exact,
            };
            typed!(exact, ergodic(&e, out))
        }
        Command::Campaign(a) => campaign(&a, out),
    }
}

fn maximal<T: Scalar>(args: &MaximalArgs, out: &mut dyn Write) -> Result<i32> {
    let a: ergomax_core::WindowedSequence<T> = parse_sequence(&read(&args.input)?)?;
    let eval = IntegerInterval::new(args.eval_lo, args.eval_hi)?;
    let result = match MaximalOp::from(args.op) {
        MaximalOp::Centered => centered_maximal(&a, args.truncate, eval)?,
        MaximalOp::Uncentered => uncentered_maximal(&a, args.truncate, eval)?,
        MaximalOp::Dyadic | MaximalOp::Sharp if args.truncate.is_some() => {
            bail!("--truncate applies to the centered and uncentered operators only")
        }
        MaximalOp::Dyadic => dyadic_maximal(&a, eval)?,
        MaximalOp::Sharp => sharp_maximal(&a, eval, None)?,
    };
    let mut csv = String::from("m,value,witness_lo,witness_hi\n");
    for (m, v) in result.iter() {
        let w = result.witness(m).expect("aligned with values");
        csv.push_str(&format!("{m},{},{},{}\n", format_scalar(v), w.lo(), w.hi()));
    }
    match &args.output {
        Some(path) => {
            fs::write(path, csv).with_context(|| format!("cannot write {}", path.display()))?
        }
        None => out.write_all(csv.as_bytes())?,
    }
    Ok(EXIT_PASS)
}

fn apconst<T: Scalar>(args: &ApconstArgs, out: &mut dyn Write) -> Result<i32> {
    let w = parse_weight::<T>(&read(&args.weight)?)?;
    if let Some(t) = &args.threshold {
        let threshold = T::parse_text(t)?;
        return Ok(match ap_exceedance(&w, args.p, &threshold)? {
            Some((v, interval)) => {
                writeln!(out, "exceeds {threshold}: product {v} on {interval}")?;
                EXIT_VIOLATION
            }
            None => {
                writeln!(out, "within {threshold}")?;
                EXIT_PASS
            }
        });
    }
    let r = ap_constant(&w, args.p)?;
    writeln!(out, "constant {}", format_scalar(&r.constant))?;
    writeln!(out, "witness {} {}", r.witness.lo(), r.witness.hi())?;
    writeln!(out, "conjugate {}", r.conjugate)?;
    Ok(EXIT_PASS)
}

fn wnorm<T: Scalar>(args: &WnormArgs, out: &mut dyn Write) -> Result<i32> {
    let a = parse_sequence::<T>(&read(&args.input)?)?;
    let w = parse_weight::<T>(&read(&args.weight)?)?;
    writeln!(
        out,
        "norm_pow {}",
        format_scalar(&weighted_norm_pow(&a, &w, args.p)?)
    )?;
    writeln!(out, "norm {}", weighted_norm(&a, &w, args.p)?)?;
    Ok(EXIT_PASS)
}

fn cz<T: Scalar>(args: &CzArgs, out: &mut dyn Write) -> Result<i32> {
    let a = parse_sequence::<T>(&read(&args.input)?)?;
    let height = T::parse_text(&args.lambda)?;
    let d = cz_decompose(&a, &height)?;
    for (i, avg) in d.intervals.iter().zip(&d.averages) {
        writeln!(
            out,
            "{} {} {} {} {}",
            i.level(),
            i.index(),
            i.lo(),
            i.hi(),
            format_scalar(avg)
        )?;
    }
    Ok(EXIT_PASS)
}

fn emit(reports: &[InequalityReport], out: &mut dyn Write) -> Result<i32> {
    for r in reports {
        writeln!(out, "{}", serde_json::to_string(r)?)?;
    }
    Ok(if reports.iter().all(|r| r.pass) {
        EXIT_PASS
    } else {
        EXIT_VIOLATION
    })
}

fn verify<T: Scalar>(args: &VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let a = parse_sequence::<T>(&read(&args.input)?)?;
    let w = parse_weight::<T>(&read(&args.weight)?)?;
    let reports = match args.inequality {
        Inequality::Strongpp => vec![strong_pp_check(&a, &w, args.p)?.report],
        Inequality::Weak11 | Inequality::Weakpp => {
            let heights = LambdaGrid::parse(&args.lambda_grid)?.resolve(&a)?;
            heights
                .iter()
                .map(|h| match args.inequality {
                    Inequality::Weak11 => weak11_with_mw(&a, &w, h),
                    _ => weighted_weak_pp(&a, &w, args.p, h),
                })
                .collect::<Result<Vec<_>, _>>()?
        }
    };
    emit(&reports, out)
}

fn ergodic<T: Scalar>(command: &ErgodicCommand, out: &mut dyn Write) -> Result<i32> {
    match command {
        ErgodicCommand::Maximal {
            system,
            f,
            truncate,
            ..
        } => {
            let sys = parse_system::<T>(&read(system)?)?;
            let f = parse_atom_function::<T>(&read(f)?)?;
            let m = ergodic_maximal(&sys, &f, *truncate)?;
            for (x, (v, r)) in m.values.values().iter().zip(&m.radii).enumerate() {
                writeln!(out, "{x} {} {r}", format_scalar(v))?;
            }
            Ok(EXIT_PASS)
        }
        ErgodicCommand::Apconst {
            system,
            weight,
            p,
            n_max,
            ..
        } => {
            let sys = parse_system::<T>(&read(system)?)?;
            let w = parse_atom_function::<T>(&read(weight)?)?;
            let r = ergodic_ap_constant(&sys, &w, *p, *n_max)?;
            writeln!(out, "constant {}", format_scalar(&r.constant))?;
            writeln!(out, "atom {}", r.atom)?;
            match r.radius {
                Some(n) => writeln!(out, "radius {n}")?,
                None => writeln!(out, "radius unbounded")?,
            }
            Ok(EXIT_PASS)
        }
        ErgodicCommand::Transfer {
            system, f, l, j, x, ..
        } => {
            let sys = parse_system::<T>(&read(system)?)?;
            let f = parse_atom_function::<T>(&read(f)?)?;
            let atoms: Vec<usize> = match x {
                Some(x) => vec![*x],
                None => (0..sys.n()).collect(),
            };
            let reports = atoms
                .iter()
                .map(|&x| verify_transference_identity(&sys, &f, x, *l, *j))
                .collect::<Result<Vec<_>, _>>()?;
            emit(&reports, out)
        }
        ErgodicCommand::Rectangle {
            system, k, base, ..
        } => {
            let sys = parse_system::<T>(&read(system)?)?;
            match base {
                Some(base) => {
                    let rect = ErgodicRectangle {
                        base: base.clone(),
                        k: *k,
                    };
                    let valid = rect.is_valid(&sys);
                    writeln!(out, "valid {valid}")?;
                    writeln!(out, "measure {}", format_scalar(&rect.measure(&sys)))?;
                    Ok(if valid { EXIT_PASS } else { EXIT_VIOLATION })
                }
                None => {
                    for rect in cover_by_rectangle_bases(&sys, *k)? {
                        let atoms: Vec<String> = rect.base.iter().map(usize::to_string).collect();
                        writeln!(out, "{}", atoms.join(","))?;
                    }
                    Ok(EXIT_PASS)
                }
            }
        }
        ErgodicCommand::Converse {
            system,
            weight,
            p,
            j,
            trials,
            seed,
            ..
        } => {
            let sys = parse_system::<T>(&read(system)?)?;
            let w = parse_atom_function::<T>(&read(weight)?)?;
            let r = converse_probe(&sys, &w, *p, *j, *trials, *seed)?;
            writeln!(out, "{}", serde_json::to_string(&r)?)?;
            Ok(EXIT_PASS)
        }
    }
}

fn campaign(args: &CampaignArgs, out: &mut dyn Write) -> Result<i32> {
    let config = match &args.config {
        Some(path) => CampaignConfig::from_json(&read(path)?)?,
        None => CampaignConfig::default(),
    };
    let config = config.with_env_seed(std::env::var(SEED_ENV).ok().as_deref())?;
    if args.jobs == Some(0) {
        bail!("--jobs must be positive");
    }
    let outcome = run_campaign(&config, args.jobs)?;
    fs::write(&args.report, outcome.to_json())
        .with_context(|| format!("cannot write {}", args.report.display()))?;
    for (check, s) in &outcome.summary.checks {
        let ratio = s
            .max_ratio
            .map_or_else(|| "-".into(), |r| format!("{r:.6}"));
        writeln!(
            out,
            "{check:<15} reports {:>5}  failed {:>4}  max ratio {ratio}",
            s.reports, s.failed
        )?;
    }
    writeln!(
        out,
        "total {} reports, {} failed",
        outcome.summary.reports, outcome.summary.failed
    )?;
    Ok(if outcome.passed() {
        EXIT_PASS
    } else {
        EXIT_VIOLATION
    })
}
