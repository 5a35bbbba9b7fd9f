//! The `dfdiag` command line: parse a job, run it, write one JSON report.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::algebra::{Polynomial, Vars};
use crate::bounds::{
    bivariate_bounds, complete_bounds, gessel_bounds, iterated_report, iterated_table, primary_bounds, BoundsReport,
    GesselKind,
};
use crate::dfinite::DFiniteSystem;
use crate::error::{Error, Result};
use crate::gessel::bivariate_annihilator;
use crate::lipshitz::{annihilator, Mode, Options, Strategy, Target};
use crate::series::{DiagonalSpec, TruncatedSeries, VerificationReport, FORMAT_VERSION};
use crate::weyl::DiffOperator;

/// Environment variable overriding the directory relative paths are resolved against.
pub const WORKDIR_ENV: &str = "DFDIAG_WORKDIR";

#[derive(Parser, Debug, Clone)]
#[command(name = "dfdiag", version, about = "Annihilating operators for diagonals of D-finite series")]
pub struct JobConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Construct and verify an annihilator of the diagonal.
    Diag(DiagArgs),
    /// Evaluate closed-form bounds.
    Bounds(BoundsArgs),
    /// Check a stored operator against a stored or freshly expanded series.
    Verify(VerifyArgs),
    /// Dump a truncated series or one of its diagonals.
    Oracle(OracleArgs),
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pipeline {
    Lipshitz,
    Gessel,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeArg {
    Primary,
    Complete,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyArg {
    Minimal,
    Bound,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioArg {
    Primary,
    PrimaryH,
    GesselP,
    GesselQh,
    Bivariate,
    Complete,
    Iterated,
}

#[derive(Args, Debug, Clone)]
pub struct Output {
    /// Write the report here instead of stdout.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct DiagArgs {
    /// System file.
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "lipshitz")]
    pub pipeline: Pipeline,
    #[arg(long, value_enum, default_value = "primary")]
    pub mode: ModeArg,
    /// The two variables (1-based) of the primary diagonal.
    #[arg(long, num_args = 2, value_names = ["I", "J"])]
    pub pair: Option<Vec<usize>>,
    #[arg(long, value_enum, default_value = "minimal")]
    pub strategy: StrategyArg,
    /// Order of the diagonal checked by verification.
    #[arg(long, default_value_t = 50)]
    pub trunc: u32,
    /// Annihilate in the direction of this (1-based) variable instead of the diagonal one.
    #[arg(long)]
    pub spectator: Option<usize>,
    #[arg(long, default_value_t = 40)]
    pub max_n: u32,
    #[arg(long, default_value_t = 2000)]
    pub max_unknowns: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: Output,
}

#[derive(Args, Debug, Clone)]
pub struct BoundsArgs {
    #[arg(long, value_enum)]
    pub scenario: ScenarioArg,
    /// Degrees `d_i`.
    #[arg(long, num_args = 1.., default_values_t = Vec::<u32>::new())]
    pub d: Vec<u32>,
    /// Orders `r_i`.
    #[arg(long, num_args = 1.., default_values_t = Vec::<u32>::new())]
    pub r: Vec<u32>,
    /// Spectator variable (1-based) for `gessel-qh`.
    #[arg(long, default_value_t = 3)]
    pub h: usize,
    /// Iteration count for `iterated`.
    #[arg(long, default_value_t = 1)]
    pub k: u32,
    /// Emit the `iterated` table for `k = 0..=K`.
    #[arg(long, value_name = "K")]
    pub table: Option<u32>,
    #[command(flatten)]
    pub out: Output,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    /// File holding `variables` and `operator` (any `diag` report qualifies).
    pub operator: PathBuf,
    /// System whose diagonal is expanded for the check.
    #[arg(long, conflicts_with = "series", required_unless_present = "series")]
    pub input: Option<PathBuf>,
    /// Stored series to check against.
    #[arg(long)]
    pub series: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "primary")]
    pub diag: ModeArg,
    #[arg(long, num_args = 2, value_names = ["I", "J"])]
    pub pair: Option<Vec<usize>>,
    #[arg(long, default_value_t = 50)]
    pub trunc: u32,
    #[command(flatten)]
    pub out: Output,
}

#[derive(Args, Debug, Clone)]
pub struct OracleArgs {
    pub input: PathBuf,
    /// Diagonal to take; omit to dump the series itself.
    #[arg(long, value_enum)]
    pub diag: Option<ModeArg>,
    #[arg(long, num_args = 2, value_names = ["I", "J"])]
    pub pair: Option<Vec<usize>>,
    #[arg(long, default_value_t = 10)]
    pub trunc: u32,
    #[command(flatten)]
    pub out: Output,
}

/// A finished job: the report and whether its verdict (if any) passed.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Value,
    pub passed: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

fn resolve(p: &Path, workdir: Option<&Path>) -> PathBuf {
    match workdir {
        Some(w) if p.is_relative() => w.join(p),
        _ => p.to_path_buf(),
    }
}

fn read_json(p: &Path, workdir: Option<&Path>) -> Result<Value> {
    let path = resolve(p, workdir);
    let text = fs::read_to_string(&path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    serde_json::from_str(&text).map_err(|e| {
        Error::parse(
            format!("{}:{}:{}", path.display(), e.line(), e.column()),
            e.to_string(),
        )
    })
}

pub fn load_system(p: &Path, workdir: Option<&Path>) -> Result<DFiniteSystem> {
    DFiniteSystem::from_json(&read_json(p, workdir)?)
}

/// Zero-based pair from 1-based CLI indices, defaulting to the first two variables.
fn pair(sel: &Option<Vec<usize>>, n: usize) -> Result<(usize, usize)> {
    let (i, j) = match sel.as_deref() {
        None => (1, 2),
        Some([i, j]) => (*i, *j),
        Some(_) => return Err(Error::InvalidArgument("--pair takes two indices".into())),
    };
    if i == j || i == 0 || j == 0 || i > n || j > n {
        return Err(Error::InvalidArgument(format!(
            "--pair needs two distinct indices in 1..={n}, got {i} {j}"
        )));
    }
    Ok((i - 1, j - 1))
}

fn diagonal_of(sys: &DFiniteSystem, mode: ModeArg, sel: &Option<Vec<usize>>, trunc: u32) -> Result<TruncatedSeries> {
    let n = sys.n() as u32;
    let (depth, spec) = match mode {
        ModeArg::Primary => {
            let (i, j) = pair(sel, sys.n())?;
            (2 * trunc, DiagonalSpec::Primary { keep: i, drop: j })
        }
        ModeArg::Complete => (n * trunc, DiagonalSpec::Complete),
    };
    let depth = sys.max_series_order().map_or(depth, |m| m.min(depth));
    sys.series(depth)?.diagonal(&spec)
}

fn diag(a: &DiagArgs, workdir: Option<&Path>) -> Result<Outcome> {
    let sys = load_system(&a.input, workdir)?;
    let opts = Options {
        strategy: match a.strategy {
            StrategyArg::Minimal => Strategy::Minimal,
            StrategyArg::Bound => Strategy::Bound,
        },
        trunc: a.trunc,
        max_n: a.max_n,
        max_unknowns: a.max_unknowns,
        seed: a.seed,
    };
    let n = sys.n();
    let lead = match a.mode {
        ModeArg::Primary => {
            let (i, j) = pair(&a.pair, n)?;
            vec![i, j]
        }
        ModeArg::Complete => {
            if a.pair.is_some() {
                return Err(Error::InvalidArgument("--pair applies to primary mode only".into()));
            }
            vec![]
        }
    };
    let sys = if lead.is_empty() { sys } else { sys.reorder(&lead)? };
    match a.pipeline {
        Pipeline::Gessel => {
            if n != 2 {
                return Err(Error::InvalidArgument(format!("the gessel pipeline needs n = 2, got n = {n}")));
            }
            if a.spectator.is_some() {
                return Err(Error::InvalidArgument("--spectator applies to the lipshitz pipeline".into()));
            }
            let res = bivariate_annihilator(&sys, &opts)?;
            Ok(Outcome {
                passed: res.verification.passed(),
                report: res.to_json(),
            })
        }
        Pipeline::Lipshitz => {
            let (mode, target) = match (a.mode, a.spectator) {
                (ModeArg::Complete, Some(_)) => {
                    return Err(Error::InvalidArgument("--spectator applies to primary mode".into()))
                }
                (ModeArg::Complete, None) => (Mode::Complete, Target::Diagonal),
                (ModeArg::Primary, None) => (Mode::Primary, Target::Diagonal),
                (ModeArg::Primary, Some(h)) => {
                    if h == 0 || h > n || lead.contains(&(h - 1)) {
                        return Err(Error::InvalidArgument(format!(
                            "--spectator must be a variable in 1..={n} outside the pair"
                        )));
                    }
                    let mut order = lead.clone();
                    order.extend((0..n).filter(|k| !lead.contains(k)));
                    let pos = order.iter().position(|&k| k == h - 1).unwrap();
                    (Mode::Primary, Target::Spectator(pos))
                }
            };
            let res = annihilator(&sys, mode, target, &opts)?;
            Ok(Outcome {
                passed: res.verification.passed(),
                report: res.to_json(),
            })
        }
    }
}

fn one_based(h: usize, n: usize) -> Result<usize> {
    if h == 0 || h > n {
        return Err(Error::InvalidArgument(format!("--h must be in 1..={n}")));
    }
    Ok(h - 1)
}

pub fn bounds_report(a: &BoundsArgs) -> Result<Value> {
    let need = |len: usize| -> Result<()> {
        if a.d.len() != len || a.r.len() != len {
            return Err(Error::InvalidArgument(format!(
                "scenario needs {len} degrees and {len} orders, got {} and {}",
                a.d.len(),
                a.r.len()
            )));
        }
        Ok(())
    };
    let rep: BoundsReport = match a.scenario {
        ScenarioArg::Primary => {
            need(2)?;
            primary_bounds(a.d[0], a.d[1], a.r[0], a.r[1], None)?
        }
        ScenarioArg::PrimaryH => {
            need(3)?;
            primary_bounds(a.d[0], a.d[1], a.r[0], a.r[1], Some((a.d[2], a.r[2])))?
        }
        ScenarioArg::GesselP => gessel_bounds(&a.d, &a.r, GesselKind::P)?,
        ScenarioArg::GesselQh => gessel_bounds(&a.d, &a.r, GesselKind::Qh(one_based(a.h, a.d.len())?))?,
        ScenarioArg::Bivariate => {
            need(2)?;
            bivariate_bounds(&a.d, &a.r)?
        }
        ScenarioArg::Complete => complete_bounds(&a.d, &a.r)?,
        ScenarioArg::Iterated => {
            if let Some(kmax) = a.table {
                let rows: Vec<Value> = iterated_table(kmax)?
                    .into_iter()
                    .map(|(k, e)| {
                        json!({"k": k, "u": e.u.to_string(), "v": e.v.to_string(), "s": e.s.to_string(), "t": e.t.to_string()})
                    })
                    .collect();
                return Ok(json!({
                    "format_version": FORMAT_VERSION,
                    "scenario": "iterated-table",
                    "rows": rows,
                }));
            }
            iterated_report(a.k)?
        }
    };
    Ok(rep.to_json())
}

/// The `variables`/`operator` pair of a report or operator file.
pub fn operator_from_json(v: &Value) -> Result<DiffOperator> {
    let names: Vec<String> = v
        .get("variables")
        .and_then(Value::as_array)
        .and_then(|a| a.iter().map(|x| x.as_str().map(str::to_string)).collect())
        .ok_or_else(|| Error::parse("variables", "expected a list of variable names"))?;
    let op = v.get("operator").ok_or_else(|| Error::parse("operator", "missing"))?;
    DiffOperator::from_json(op, &Vars::new(names), "operator")
}

fn rename_series(s: &TruncatedSeries, vars: &Vars) -> Result<TruncatedSeries> {
    if s.vars().len() != vars.len() {
        return Err(Error::VariableMismatch(s.vars().names().to_vec(), vars.names().to_vec()));
    }
    let map: Vec<usize> = (0..vars.len()).collect();
    Ok(TruncatedSeries::from_polynomial(
        &s.to_polynomial().embed(vars, &map),
        s.valid(),
    ))
}

fn verify(a: &VerifyArgs, workdir: Option<&Path>) -> Result<Outcome> {
    let op = operator_from_json(&read_json(&a.operator, workdir)?)?;
    let series = match (&a.input, &a.series) {
        (_, Some(p)) => TruncatedSeries::from_json(&read_json(p, workdir)?, "series")?,
        (Some(p), None) => diagonal_of(&load_system(p, workdir)?, a.diag, &a.pair, a.trunc)?,
        (None, None) => return Err(Error::InvalidArgument("verify needs --input or --series".into())),
    };
    let series = rename_series(&series, op.vars())?;
    let rep: VerificationReport = series.verify_annihilation(&op)?;
    let mut report = rep.to_json();
    report["format_version"] = json!(FORMAT_VERSION);
    report["variables"] = json!(op.vars().names());
    report["valid_order"] = json!(series.valid());
    Ok(Outcome {
        passed: rep.passed(),
        report,
    })
}

fn oracle(a: &OracleArgs, workdir: Option<&Path>) -> Result<Outcome> {
    let sys = load_system(&a.input, workdir)?;
    let s = match a.diag {
        None => sys.series(a.trunc)?,
        Some(m) => diagonal_of(&sys, m, &a.pair, a.trunc)?,
    };
    Ok(Outcome {
        passed: true,
        report: s.to_json(),
    })
}

/// Run a job; relative paths resolve against `workdir` when given.
pub fn run(config: &JobConfig, workdir: Option<&Path>) -> Result<Outcome> {
    match &config.command {
        Command::Diag(a) => diag(a, workdir),
        Command::Bounds(a) => Ok(Outcome {
            report: bounds_report(a)?,
            passed: true,
        }),
        Command::Verify(a) => verify(a, workdir),
        Command::Oracle(a) => oracle(a, workdir),
    }
}

fn output_of(config: &JobConfig) -> Option<&PathBuf> {
    match &config.command {
        Command::Diag(a) => a.out.output.as_ref(),
        Command::Bounds(a) => a.out.output.as_ref(),
        Command::Verify(a) => a.out.output.as_ref(),
        Command::Oracle(a) => a.out.output.as_ref(),
    }
}

/// Pretty JSON with a trailing newline; key order is sorted so output is byte-stable.
pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

/// Run and write the report; returns the process exit code (0 pass, 1 fail, 2 error).
pub fn main_with(config: &JobConfig, workdir: Option<&Path>) -> i32 {
    let outcome = match run(config, workdir) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let text = render(&outcome.report);
    match output_of(config) {
        None => print!("{text}"),
        Some(p) => {
            let path = resolve(p, workdir);
            if let Err(e) = fs::write(&path, text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return 2;
            }
        }
    }
    outcome.exit_code()
}

/// A system file for `num/den`, as read by `diag`, `verify` and `oracle`.
pub fn rational_system_json(num: &Polynomial, den: &Polynomial) -> Value {
    json!({
        "format_version": FORMAT_VERSION,
        "variables": num.vars().names(),
        "rational": {"num": num.to_json(), "den": den.to_json()},
    })
}
