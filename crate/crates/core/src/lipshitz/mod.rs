//! Diagonal annihilators through the substitution `x1 ↦ s, x2 ↦ t/s` (and its chain
//! over all variables): the diagonal becomes a residue in the `s`-variables, so any
//! operator killing `σ(f)` yields one killing the diagonal.

pub mod state;
pub mod system;

use num_bigint::BigInt;
use serde_json::{json, Value};

use crate::algebra::{binomial, first_dependency, Exps, Vars};
use crate::bounds::{complete_bounds, primary_bounds, BoundsReport};
use crate::dfinite::DFiniteSystem;
use crate::error::{Error, Result};
use crate::series::{DiagonalSpec, TruncatedSeries, VerificationReport, FORMAT_VERSION};
use crate::weyl::DiffOperator;

pub use state::{Mode, SigmaContext, SigmaState};
pub use system::{LinearSystem, StateTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    /// `D_t`.
    Diagonal,
    /// `D_{x_h}` for a zero-based variable index `h ≥ 2` (primary mode).
    Spectator(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Minimal,
    Bound,
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Minimal => "minimal-search",
            Strategy::Bound => "bound-N",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Options {
    pub strategy: Strategy,
    /// Order of the diagonal truncation used for verification.
    pub trunc: u32,
    /// Largest `N` tried by the minimal search.
    pub max_n: u32,
    /// Refuse linear systems with more columns than this.
    pub max_unknowns: usize,
    pub seed: u64,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            strategy: Strategy::Minimal,
            trunc: 50,
            max_n: 40,
            max_unknowns: 2000,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct AnnihilatorResult {
    pub mode: Mode,
    pub target: Target,
    pub strategy: Strategy,
    /// Annihilator of `σ(f)` over the substituted variables.
    pub p: DiffOperator,
    /// The minimal `D_s` slice; it annihilates the diagonal.
    pub extracted: DiffOperator,
    pub n_used: u32,
    pub bounds: BoundsReport,
    pub dim_v: usize,
    pub dim_w: usize,
    pub rank: usize,
    pub ord: u32,
    pub deg: u32,
    pub verification: VerificationReport,
    pub diagonal: TruncatedSeries,
}

impl AnnihilatorResult {
    pub fn n_bound(&self) -> BigInt {
        self.bounds.int("N")
    }

    pub fn ord_bound(&self) -> BigInt {
        self.bounds.int("ord_bound")
    }

    pub fn deg_bound(&self) -> BigInt {
        self.bounds.int("deg_bound")
    }

    pub fn to_json(&self) -> Value {
        json!({
            "format_version": FORMAT_VERSION,
            "pipeline": "lipshitz",
            "mode": self.mode.name(),
            "target": match self.target {
                Target::Diagonal => json!("diagonal"),
                Target::Spectator(h) => json!({"spectator": h}),
            },
            "strategy": self.strategy.name(),
            "N_used": self.n_used,
            "N_bound": self.bounds.get("N").map(|n| n.to_string()),
            "dim_V": self.dim_v,
            "dim_W": self.dim_w,
            "rank": self.rank,
            "degree_stats": {
                "ord": self.ord,
                "deg": self.deg,
                "ord_bound": self.ord_bound().to_string(),
                "deg_bound": self.deg_bound().to_string(),
            },
            "variables": self.extracted.vars().names(),
            "operator": self.extracted.to_json(),
            "full_operator": {
                "variables": self.p.vars().names(),
                "terms": self.p.to_json(),
            },
            "verification": self.verification.to_json(),
        })
    }
}

/// The coefficient of the lexicographically smallest `D_s`-monomial, `D_{s1} ≻ D_{s2} ≻ ⋯`,
/// as an operator in the remaining variables. The `s`-variables lead: one of them in
/// primary mode, all but the last in complete mode.
pub fn extract_min_slice(p: &DiffOperator, mode: Mode) -> Result<DiffOperator> {
    if p.is_zero() {
        return Err(Error::InvalidArgument("cannot extract a slice of the zero operator".into()));
    }
    let vars = p.vars();
    let m = match mode {
        Mode::Primary => 1,
        Mode::Complete => vars.len().saturating_sub(1),
    };
    if m == 0 || m >= vars.len() {
        return Err(Error::InvalidArgument(format!(
            "{} mode needs s-variables and a diagonal variable, got {:?}",
            mode.name(),
            vars.names()
        )));
    }
    let min: Exps = p.terms().map(|(b, _)| b[..m].to_vec()).min().unwrap();
    let rest = Vars::new(vars.names()[m..].iter().cloned());
    let keep: Vec<Option<usize>> = (0..vars.len()).map(|i| i.checked_sub(m)).collect();
    let mut out = DiffOperator::zero(&rest);
    for (b, c) in p.terms() {
        if b[..m] != min[..] {
            continue;
        }
        let mut b2 = b.clone();
        b2[..m].iter_mut().for_each(|k| *k = 0);
        let one = DiffOperator::monomial(vars, b2, c.clone());
        let r = one.restrict(&rest, &keep).ok_or_else(|| {
            Error::InvalidArgument("slice coefficients depend on the s-variables".into())
        })?;
        out = out.add(&r);
    }
    Ok(out)
}

/// Truncated diagonal through order `trunc`, over `vars` (`t` first).
fn diagonal_series(sys: &DFiniteSystem, mode: Mode, trunc: u32, vars: &Vars) -> Result<TruncatedSeries> {
    let n = sys.n() as u32;
    let factor = match mode {
        Mode::Primary => 2,
        Mode::Complete => n,
    };
    let mut depth = factor * trunc;
    if let Some(max) = sys.max_series_order() {
        depth = depth.min(max);
    }
    let f = sys.series(depth)?;
    let d = match mode {
        Mode::Primary => f.diagonal(&DiagonalSpec::Primary { keep: 1, drop: 0 })?,
        Mode::Complete => f.diagonal(&DiagonalSpec::Complete)?,
    };
    Ok(TruncatedSeries::new(vars, d.coeffs().map(|(e, c)| (e.clone(), c.clone())), d.valid()))
}

fn bounds_for(sys: &DFiniteSystem, mode: Mode, target: Target) -> Result<BoundsReport> {
    let d = sys.degrees();
    let r = sys.orders();
    match mode {
        Mode::Primary => {
            let h = match target {
                Target::Diagonal => None,
                Target::Spectator(h) => Some((d[h], r[h])),
            };
            primary_bounds(d[0], d[1], r[0], r[1], h)
        }
        Mode::Complete => complete_bounds(d, r),
    }
}

struct Attempt {
    p: DiffOperator,
    extracted: DiffOperator,
    dim_v: usize,
    dim_w: usize,
    rank: usize,
    verification: VerificationReport,
}

fn attempt(table: &mut StateTable, n: u32, diag: &TruncatedSeries, seed: u64) -> Result<(usize, usize, Option<Attempt>)> {
    let ctx = table.context();
    let (mode, target) = (ctx.mode(), ctx.target().clone());
    let sys = table.system(n)?;
    let (dim_v, dim_w) = (sys.columns.len(), sys.matrix.rows());
    let Some(dep) = first_dependency(&sys.matrix, seed)? else {
        return Ok((dim_v, dim_w, None));
    };
    let back: Vec<usize> = (0..target.len()).filter(|&k| sys.coef_map[k].is_some()).collect();
    let mut p = DiffOperator::zero(&target);
    for (w, c) in sys.columns.iter().zip(&dep.vector) {
        if !c.is_zero() {
            p.add_term(w.clone(), c.embed(&target, &back));
        }
    }
    let p = p.primitive();
    let extracted = extract_min_slice(&p, mode)?.primitive();
    let verification = diag.verify_annihilation(&extracted)?;
    Ok((
        dim_v,
        dim_w,
        Some(Attempt {
            p,
            extracted,
            dim_v,
            dim_w,
            rank: dep.rank,
            verification,
        }),
    ))
}

/// An operator annihilating the diagonal of `sys`, found by solving for an annihilator of `σ(f)`.
pub fn annihilator(sys: &DFiniteSystem, mode: Mode, target: Target, opts: &Options) -> Result<AnnihilatorResult> {
    let spectator = match target {
        Target::Diagonal => None,
        Target::Spectator(h) => Some(h),
    };
    let ctx = SigmaContext::new(sys, mode, spectator)?;
    let dir = spectator.unwrap_or(ctx.t_var());
    let bounds = bounds_for(sys, mode, target)?;
    let mut table = StateTable::new(&ctx, dir)?;
    let coef_vars = Vars::new(
        (0..ctx.target().len())
            .filter(|k| !ctx.s_vars().contains(k))
            .map(|k| ctx.target().name(k).to_string()),
    );
    let diagonal = diagonal_series(sys, mode, opts.trunc, &coef_vars)?;
    let k = ctx.s_vars().len() as u64 + 1;
    let words = |n: u32| -> usize { binomial(n as u64 + k, k).try_into().unwrap_or(usize::MAX) };

    let schedule: Vec<u32> = match opts.strategy {
        Strategy::Minimal => (1..=opts.max_n).collect(),
        Strategy::Bound => {
            let slack = bounds.int("slack");
            if slack <= BigInt::from(0) {
                return Err(Error::KernelTrivial(format!(
                    "dim V = {} does not exceed dim W = {}",
                    bounds.int("dim_V"),
                    bounds.int("dim_W")
                )));
            }
            let n: u32 = bounds
                .int("N")
                .try_into()
                .map_err(|_| Error::InvalidArgument("bounding N does not fit a machine integer".into()))?;
            vec![n]
        }
    };

    let finish = |n: u32, a: Attempt| -> Result<AnnihilatorResult> {
        let ord = a.extracted.order().unwrap_or(0);
        let deg = a.extracted.degree().unwrap_or(0);
        Ok(AnnihilatorResult {
            mode,
            target,
            strategy: opts.strategy,
            p: a.p,
            extracted: a.extracted,
            n_used: n,
            bounds: bounds.clone(),
            dim_v: a.dim_v,
            dim_w: a.dim_w,
            rank: a.rank,
            ord,
            deg,
            verification: a.verification,
            diagonal: diagonal.clone(),
        })
    };

    for &n in &schedule {
        if words(n) > opts.max_unknowns {
            return Err(match opts.strategy {
                Strategy::Bound => Error::InvalidArgument(format!(
                    "bounding N = {n} needs {} unknowns, more than the limit {}",
                    words(n),
                    opts.max_unknowns
                )),
                Strategy::Minimal => Error::SearchExhausted(format!(
                    "no verified annihilator with at most {} unknowns (stopped before N = {n})",
                    opts.max_unknowns
                )),
            });
        }
        let (dim_v, dim_w, found) = attempt(&mut table, n, &diagonal, opts.seed)?;
        match (opts.strategy, found) {
            (Strategy::Minimal, Some(a)) if a.verification.passed() => return finish(n, a),
            (Strategy::Minimal, _) => continue,
            (Strategy::Bound, None) => {
                return Err(Error::KernelTrivial(format!(
                    "no kernel at N = {n}: {dim_v} columns, {dim_w} rows"
                )))
            }
            (Strategy::Bound, Some(a)) => {
                let res = finish(n, a)?;
                if BigInt::from(res.ord) > res.ord_bound() || BigInt::from(res.deg) > res.deg_bound() {
                    return Err(Error::BoundViolated(format!(
                        "ord {} / deg {} exceed {} / {}",
                        res.ord,
                        res.deg,
                        res.ord_bound(),
                        res.deg_bound()
                    )));
                }
                return Ok(res);
            }
        }
    }
    Err(Error::SearchExhausted(format!("no verified annihilator up to N = {}", opts.max_n)))
}
