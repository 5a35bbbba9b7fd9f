//! Diagonals by elimination: find `P` in the subalgebra generated by `x1x2`, `x̂`,
//! `T = θ1 − θ2` and `D_{x1}D_{x2}` (or `D_{xh}`) with `P(f) = 0`, strip the left
//! `T`-power and read off an annihilator of the bivariate diagonal.

use num_bigint::BigInt;
use serde_json::{json, Value};

use crate::algebra::{assemble_columns, binomial, first_dependency, grlex_cmp, Exps, Polynomial, Vars, Q};
use crate::bounds::{bivariate_bounds, gessel_bounds, image_bounds, BoundsReport, GesselKind};
use crate::dfinite::{Coeffs, DFiniteSystem, ReductionData};
use crate::error::{Error, Result};
use crate::lipshitz::{Options, Strategy};
use crate::series::{monomials_up_to, DiagonalSpec, TruncatedSeries, VerificationReport, FORMAT_VERSION};
use crate::weyl::{subalgebra_decompose, Coordinates, DiffOperator, SubIndex, SubalgebraKind};

#[derive(Clone, Debug)]
pub struct GesselOperator {
    pub kind: GesselKind,
    pub coords: Coordinates,
    pub n_used: u32,
    pub strategy: Strategy,
    pub bounds: BoundsReport,
    pub dim_v: usize,
    pub dim_w: usize,
    pub verification: Option<VerificationReport>,
}

/// Degree in `x1x2`, total degree in `x̂`, total degree in `(T, D)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GesselStats {
    pub x1x2_deg: u32,
    pub xhat_deg: u32,
    pub op_deg: u32,
}

impl GesselOperator {
    pub fn operator(&self) -> DiffOperator {
        self.coords.recompose()
    }

    pub fn stats(&self) -> GesselStats {
        let mut s = GesselStats {
            x1x2_deg: 0,
            xhat_deg: 0,
            op_deg: 0,
        };
        for idx in self.coords.coords.keys() {
            s.x1x2_deg = s.x1x2_deg.max(idx.i);
            s.xhat_deg = s.xhat_deg.max(idx.k.iter().sum());
            s.op_deg = s.op_deg.max(idx.j + idx.l);
        }
        s
    }

    pub fn to_json(&self) -> Value {
        let st = self.stats();
        json!({
            "kind": match self.kind {
                GesselKind::P => json!("P"),
                GesselKind::Qh(h) => json!({"Qh": h}),
            },
            "variables": self.coords.vars.names(),
            "coords": self.coords.to_json(),
            "stats": {
                "x1x2_deg": st.x1x2_deg,
                "xhat_deg": st.xhat_deg,
                "op_deg": st.op_deg,
            },
            "N_used": self.n_used,
            "N_bound": self.bounds.int("N").to_string(),
            "strategy": self.strategy.name(),
            "dim_V": self.dim_v,
            "dim_W": self.dim_w,
            "verification": self.verification.as_ref().map(|v| v.to_json()),
        })
    }
}

fn subalgebra_kind(kind: GesselKind) -> SubalgebraKind {
    match kind {
        GesselKind::P => SubalgebraKind::TDxx,
        GesselKind::Qh(h) => SubalgebraKind::TDh(h),
    }
}

/// `(x1x2)^i T^j D^ℓ` with `D = D_{x1}D_{x2}` or `D_{xh}`.
struct Monomials {
    vars: Vars,
    kind: GesselKind,
    t_pows: Vec<DiffOperator>,
}

impl Monomials {
    fn new(vars: &Vars, kind: GesselKind) -> Self {
        Monomials {
            vars: vars.clone(),
            kind,
            t_pows: vec![DiffOperator::one(vars)],
        }
    }

    fn get(&mut self, i: u32, j: u32, l: u32) -> DiffOperator {
        let t = DiffOperator::t_op(&self.vars, 0, 1);
        while self.t_pows.len() <= j as usize {
            let next = self.t_pows.last().unwrap().mul(&t);
            self.t_pows.push(next);
        }
        let mut a = vec![0u32; self.vars.len()];
        a[0] = i;
        a[1] = i;
        let mut b = vec![0u32; self.vars.len()];
        match self.kind {
            GesselKind::P => {
                b[0] = l;
                b[1] = l;
            }
            GesselKind::Qh(h) => b[h] = l,
        }
        let x = Polynomial::monomial(&self.vars, a, Q::from_integer(1.into()));
        self.t_pows[j as usize].mul_left_poly(&x).mul(&DiffOperator::d_pow(&self.vars, b))
    }
}

fn reduction_set(kind: GesselKind) -> Vec<usize> {
    match kind {
        GesselKind::P => vec![0, 1],
        GesselKind::Qh(h) => vec![0, 1, h],
    }
}

/// Solve `Σ c_col(x̂) · op_col(f) = 0`; returns the kernel combination.
fn solve(
    data: &ReductionData,
    vars: &Vars,
    ops: &[DiffOperator],
    split: &[usize],
    seed: u64,
) -> Result<(usize, usize, Option<Vec<(usize, Polynomial)>>)> {
    let reduced: Vec<Coeffs> = ops.iter().map(|p| data.reduce_operator(p)).collect::<Result<_>>()?;
    let refs: Vec<&Coeffs> = reduced.iter().collect();
    let a = assemble_columns(&refs, vars, split)?;
    let dims = (ops.len(), a.matrix.rows());
    let Some(dep) = first_dependency(&a.matrix, seed)? else {
        return Ok((dims.0, dims.1, None));
    };
    let back: Vec<usize> = (0..vars.len()).filter(|&k| a.coef_map[k].is_some()).collect();
    let combo = dep
        .vector
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(j, c)| (j, c.embed(vars, &back)))
        .collect();
    Ok((dims.0, dims.1, Some(combo)))
}

fn series_for(sys: &DFiniteSystem, trunc: u32) -> Result<TruncatedSeries> {
    let depth = match sys.max_series_order() {
        Some(max) => trunc.min(max),
        None => trunc,
    };
    sys.series(depth)
}

/// A non-zero `P` (or `Q_h`) with `P(f) = 0`, coefficients polynomial in `x̂`.
/// `opts.trunc` is the truncation order of `f` used for verification.
pub fn elim_operator(sys: &DFiniteSystem, kind: GesselKind, opts: &Options) -> Result<GesselOperator> {
    let n = sys.n();
    if n < 2 {
        return Err(Error::InvalidArgument("elimination needs at least two variables".into()));
    }
    let bounds = gessel_bounds(sys.degrees(), sys.orders(), kind)?;
    let vars = sys.vars().clone();
    let data = ReductionData::new(sys, &reduction_set(kind))?;
    let split = [0usize, 1];
    let f = series_for(sys, opts.trunc)?;
    let schedule: Vec<u32> = match opts.strategy {
        Strategy::Minimal => (1..=opts.max_n).collect(),
        Strategy::Bound => {
            let n: u32 = bounds
                .int("N")
                .try_into()
                .map_err(|_| Error::InvalidArgument("bounding N does not fit a machine integer".into()))?;
            vec![n]
        }
    };
    let mut mono = Monomials::new(&vars, kind);
    for &big_n in &schedule {
        let count: BigInt = binomial(big_n as u64 + 3, 3);
        if count > BigInt::from(opts.max_unknowns) {
            return Err(match opts.strategy {
                Strategy::Bound => Error::InvalidArgument(format!(
                    "bounding N = {big_n} needs {count} unknowns, more than the limit {}",
                    opts.max_unknowns
                )),
                Strategy::Minimal => Error::SearchExhausted(format!(
                    "no verified operator with at most {} unknowns (stopped before N = {big_n})",
                    opts.max_unknowns
                )),
            });
        }
        let mut idx = monomials_up_to(3, big_n);
        idx.sort_by(|a, b| grlex_cmp(a, b));
        let ops: Vec<DiffOperator> = idx.iter().map(|e| mono.get(e[0], e[1], e[2])).collect();
        let (dim_v, dim_w, combo) = solve(&data, &vars, &ops, &split, opts.seed)?;
        let Some(combo) = combo else {
            if opts.strategy == Strategy::Bound {
                return Err(Error::KernelTrivial(format!(
                    "no kernel at N = {big_n}: {dim_v} columns, {dim_w} rows"
                )));
            }
            continue;
        };
        let mut p = DiffOperator::zero(&vars);
        for (j, c) in &combo {
            p = p.add(&ops[*j].mul_left_poly(c));
        }
        let p = p.primitive();
        let coords = subalgebra_decompose(&p, subalgebra_kind(kind))?;
        let verification = f.verify_annihilation(&p)?;
        let out = GesselOperator {
            kind,
            coords,
            n_used: big_n,
            strategy: opts.strategy,
            bounds: bounds.clone(),
            dim_v,
            dim_w,
            verification: Some(verification),
        };
        if out.verification.as_ref().unwrap().passed() {
            if opts.strategy == Strategy::Bound {
                check_elim_bounds(&out)?;
            }
            return Ok(out);
        }
        if opts.strategy == Strategy::Bound {
            return Ok(out);
        }
    }
    Err(Error::SearchExhausted(format!("no verified operator up to N = {}", opts.max_n)))
}

fn check_elim_bounds(p: &GesselOperator) -> Result<()> {
    let st = p.stats();
    let n = p.bounds.int("N");
    let coeff = p.bounds.int("coeff_deg_bound");
    if BigInt::from(st.x1x2_deg) > n || BigInt::from(st.op_deg) > n || BigInt::from(st.xhat_deg) > coeff {
        return Err(Error::BoundViolated(format!(
            "x1x2 degree {}, operator degree {}, coefficient degree {} against N = {n}, {coeff}",
            st.x1x2_deg, st.op_deg, st.xhat_deg
        )));
    }
    Ok(())
}

/// `P = T^s P̃` with `s` maximal, and `H = A_0(x1, x̂, D_{x1}θ_{x1})` from the `T`-free part `A_0` of `P̃`.
pub fn strip_t_and_build_h(p: &Coordinates) -> Result<(u32, Coordinates, DiffOperator)> {
    if p.is_zero() {
        return Err(Error::InvalidArgument("cannot strip the zero operator".into()));
    }
    if p.kind == SubalgebraKind::Dx1 {
        return Err(Error::InvalidArgument("expected coordinates over a T-subalgebra".into()));
    }
    let s = p.coords.keys().map(|k| k.j).min().unwrap();
    let shifted = p
        .coords
        .iter()
        .map(|(k, c)| (SubIndex { j: k.j - s, ..k.clone() }, c.clone()))
        .collect();
    let ptilde = Coordinates {
        kind: p.kind,
        vars: p.vars.clone(),
        coords: shifted,
    };
    let vars = &p.vars;
    let d1_theta1 = DiffOperator::d(vars, 0).mul(&DiffOperator::theta(vars, 0));
    let d_dir = match p.kind {
        SubalgebraKind::TDh(h) => DiffOperator::d(vars, h),
        _ => d1_theta1,
    };
    let mut pows = vec![DiffOperator::one(vars)];
    let mut h = DiffOperator::zero(vars);
    for (k, c) in &ptilde.coords {
        if k.j != 0 {
            continue;
        }
        while pows.len() <= k.l as usize {
            let next = pows.last().unwrap().mul(&d_dir);
            pows.push(next);
        }
        let mut a = vec![0u32; vars.len()];
        a[0] = k.i;
        a[2..].copy_from_slice(&k.k);
        let x = Polynomial::monomial(vars, a, c.clone());
        h = h.add(&pows[k.l as usize].mul_left_poly(&x));
    }
    Ok((s, ptilde, h))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ImageForm {
    /// `Σ a_{k,m} (x1x2)^m θ_{x1}^k`.
    Theta,
    /// `Σ a_{k,a,b} x1^a x2^b D_{x1}^k`.
    Plain,
}

/// `A` with `(A·L)(f) = 0` for a bivariate `f`.
#[derive(Clone, Debug)]
pub struct ImageAnnihilator {
    pub form: ImageForm,
    /// `(k, monomial exponents) ↦ a`; the exponents are `[m]` in θ-form and `[a, b]` otherwise.
    pub coeffs: Vec<((u32, Exps), Q)>,
    pub ord_budget: u32,
    pub deg_budget: u64,
    pub within_budget: bool,
    /// `A` in the variables of `f`.
    pub operator: DiffOperator,
}

impl ImageAnnihilator {
    pub fn order(&self) -> u32 {
        self.coeffs.iter().map(|((k, _), _)| *k).max().unwrap_or(0)
    }

    pub fn degree(&self) -> u32 {
        self.coeffs.iter().map(|((_, e), _)| e.iter().sum::<u32>()).max().unwrap_or(0)
    }

    /// `Σ a_{k,m} t^m θ_t^k` over a single variable; θ-form only.
    pub fn univariate(&self, vars: &Vars) -> Result<DiffOperator> {
        if self.form != ImageForm::Theta {
            return Err(Error::InvalidArgument("only θ-form annihilators transfer to the diagonal variable".into()));
        }
        let theta = DiffOperator::theta(vars, 0);
        let mut out = DiffOperator::zero(vars);
        for ((k, e), c) in &self.coeffs {
            let x = Polynomial::monomial(vars, e.clone(), c.clone());
            out = out.add(&theta.pow(*k).mul_left_poly(&x));
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "form": match self.form {
                ImageForm::Theta => "theta",
                ImageForm::Plain => "plain",
            },
            "coeffs": self.coeffs.iter().map(|((k, e), c)| json!([[k, e], crate::algebra::polynomial::q_to_string(c)])).collect::<Vec<_>>(),
            "ord_budget": self.ord_budget,
            "deg_budget": self.deg_budget,
            "within_budget": self.within_budget,
        })
    }
}

struct ImageSearch<'a> {
    sys: &'a DFiniteSystem,
    data: ReductionData,
    l: &'a DiffOperator,
    ord_budget: u32,
    deg_budget: u64,
    seed: u64,
    max_unknowns: usize,
}

impl<'a> ImageSearch<'a> {
    fn new(sys: &'a DFiniteSystem, l: &'a DiffOperator, opts: &Options) -> Result<Self> {
        if sys.n() != 2 {
            return Err(Error::InvalidArgument("image annihilators are built for bivariate systems".into()));
        }
        l.vars().ensure_same(sys.vars())?;
        let r = sys.orders();
        let d_f = *sys.degrees().iter().max().unwrap() as u64;
        let r_f = *r.iter().max().unwrap() as u64;
        let (d_g, _) = image_bounds(l.degree().unwrap_or(0) as u64, l.order().unwrap_or(0) as u64, d_f, r_f);
        Ok(ImageSearch {
            sys,
            data: ReductionData::new(sys, &[0, 1])?,
            l,
            ord_budget: (r[0] * r[1]).max(1),
            deg_budget: d_g.try_into().unwrap_or(u64::MAX),
            seed: opts.seed,
            max_unknowns: opts.max_unknowns,
        })
    }

    /// Columns `multiplier · L` with keys, graded by monomial degree and then by order.
    fn columns(&self, form: ImageForm, k_max: u32, m_max: u32) -> Vec<((u32, Exps), DiffOperator)> {
        let vars = self.sys.vars();
        let step = match form {
            ImageForm::Theta => DiffOperator::theta(vars, 0),
            ImageForm::Plain => DiffOperator::d(vars, 0),
        };
        let mut pows = vec![self.l.clone()];
        for _ in 0..k_max {
            let next = step.mul(pows.last().unwrap());
            pows.push(next);
        }
        let monos: Vec<Exps> = match form {
            ImageForm::Theta => (0..=m_max).map(|m| vec![m]).collect(),
            ImageForm::Plain => {
                let mut v = monomials_up_to(2, m_max);
                v.sort_by(|a, b| grlex_cmp(a, b));
                v
            }
        };
        let mut out = Vec::new();
        for e in monos {
            let x = match form {
                ImageForm::Theta => Polynomial::monomial(vars, vec![e[0], e[0]], Q::from_integer(1.into())),
                ImageForm::Plain => Polynomial::monomial(vars, e.clone(), Q::from_integer(1.into())),
            };
            for (k, p) in pows.iter().enumerate() {
                out.push(((k as u32, e.clone()), p.mul_left_poly(&x)));
            }
        }
        out
    }

    fn attempt(&self, form: ImageForm, k_max: u32, m_max: u64, within: bool) -> Result<Option<ImageAnnihilator>> {
        let m_max = m_max.min(u32::MAX as u64) as u32;
        let count = match form {
            ImageForm::Theta => (k_max as u64 + 1) * (m_max as u64 + 1),
            ImageForm::Plain => (k_max as u64 + 1) * (m_max as u64 + 1) * (m_max as u64 + 2) / 2,
        };
        if count > self.max_unknowns as u64 {
            return Ok(None);
        }
        let cols = self.columns(form, k_max, m_max);
        let ops: Vec<DiffOperator> = cols.iter().map(|(_, p)| p.clone()).collect();
        let vars = self.sys.vars();
        let (_, _, combo) = solve(&self.data, vars, &ops, &[0, 1], self.seed)?;
        let Some(combo) = combo else { return Ok(None) };
        let mut coeffs = Vec::new();
        for (j, c) in combo {
            let q = c
                .as_constant()
                .ok_or_else(|| Error::Internal("image annihilator coefficient is not constant".into()))?;
            coeffs.push((cols[j].0.clone(), q));
        }
        coeffs.sort_by(|a, b| a.0.cmp(&b.0));
        let step = match form {
            ImageForm::Theta => DiffOperator::theta(vars, 0),
            ImageForm::Plain => DiffOperator::d(vars, 0),
        };
        let operator = coeffs.iter().fold(DiffOperator::zero(vars), |acc, ((k, e), c)| {
            let x = match form {
                ImageForm::Theta => Polynomial::monomial(vars, vec![e[0], e[0]], c.clone()),
                ImageForm::Plain => Polynomial::monomial(vars, e.clone(), c.clone()),
            };
            acc.add(&step.pow(*k).mul_left_poly(&x))
        });
        Ok(Some(ImageAnnihilator {
            form,
            coeffs,
            ord_budget: self.ord_budget,
            deg_budget: self.deg_budget,
            within_budget: within,
            operator,
        }))
    }

    /// Degree budgets `1, 2, 4, .., d_g` at the budgeted order.
    fn within(&self, form: ImageForm) -> Result<Option<ImageAnnihilator>> {
        let mut m = 1u64;
        loop {
            let mm = m.min(self.deg_budget);
            if let Some(a) = self.attempt(form, self.ord_budget, mm, true)? {
                return Ok(Some(a));
            }
            if mm >= self.deg_budget {
                return Ok(None);
            }
            m *= 2;
        }
    }

    fn widened(&self, form: ImageForm) -> Result<Option<ImageAnnihilator>> {
        for k in [2 * self.ord_budget, 4 * self.ord_budget + 4] {
            if let Some(a) = self.attempt(form, k, 2 * self.deg_budget + 16, false)? {
                return Ok(Some(a));
            }
        }
        Ok(None)
    }

    fn exhausted(&self) -> Error {
        Error::SearchExhausted(format!(
            "no annihilator of L(f) of order ≤ {} and degree ≤ {}",
            4 * self.ord_budget + 4,
            2 * self.deg_budget + 16
        ))
    }
}

/// `A` with `(A·L)(f) = 0`, `n = 2`, order budget `r1·r2` and degree budget `d_g`.
/// The θ-form is tried first; it exists only when `L(f)` depends on `x1x2` alone, so
/// the plain form follows, then wider θ-form searches.
pub fn annihilator_of_image(sys: &DFiniteSystem, l: &DiffOperator, opts: &Options) -> Result<ImageAnnihilator> {
    let search = ImageSearch::new(sys, l, opts)?;
    if let Some(a) = search.within(ImageForm::Theta)? {
        return Ok(a);
    }
    if let Some(a) = search.within(ImageForm::Plain)? {
        return Ok(a);
    }
    search.widened(ImageForm::Theta)?.ok_or_else(|| search.exhausted())
}

fn theta_annihilator_of_image(sys: &DFiniteSystem, l: &DiffOperator, opts: &Options) -> Result<ImageAnnihilator> {
    let search = ImageSearch::new(sys, l, opts)?;
    if let Some(a) = search.within(ImageForm::Theta)? {
        return Ok(a);
    }
    search.widened(ImageForm::Theta)?.ok_or_else(|| search.exhausted())
}

#[derive(Clone, Debug)]
pub struct BivariateResult {
    pub elim: GesselOperator,
    pub s: u32,
    pub h: DiffOperator,
    pub g: ImageAnnihilator,
    /// `P̄ = G·H` in the diagonal variable.
    pub operator: DiffOperator,
    pub bounds: BoundsReport,
    pub ord: u32,
    pub deg: u32,
    pub verification: VerificationReport,
}

impl BivariateResult {
    pub fn to_json(&self) -> Value {
        json!({
            "format_version": FORMAT_VERSION,
            "pipeline": "gessel",
            "strategy": self.elim.strategy.name(),
            "N_used": self.elim.n_used,
            "N_bound": self.bounds.int("N").to_string(),
            "dim_V": self.elim.dim_v,
            "dim_W": self.elim.dim_w,
            "elimination": self.elim.to_json(),
            "t_power": self.s,
            "H": self.h.to_json(),
            "G": self.g.to_json(),
            "degree_stats": {
                "ord": self.ord,
                "deg": self.deg,
                "ord_bound": self.bounds.int("ord_bound").to_string(),
                "deg_bound": self.bounds.int("deg_bound").to_string(),
            },
            "variables": self.operator.vars().names(),
            "operator": self.operator.to_json(),
            "verification": self.verification.to_json(),
        })
    }
}

/// Annihilator of the diagonal of a bivariate `f`; `opts.trunc` is the diagonal order
/// checked, so `f` is expanded to twice that.
pub fn bivariate_annihilator(sys: &DFiniteSystem, opts: &Options) -> Result<BivariateResult> {
    if sys.n() != 2 {
        return Err(Error::InvalidArgument("the bivariate route needs n = 2".into()));
    }
    let bounds = bivariate_bounds(sys.degrees(), sys.orders())?;
    let elim_opts = Options {
        trunc: 2 * opts.trunc,
        ..opts.clone()
    };
    let elim = elim_operator(sys, GesselKind::P, &elim_opts)?;
    let (s, ptilde, h) = strip_t_and_build_h(&elim.coords)?;
    let g = theta_annihilator_of_image(sys, &ptilde.recompose(), opts)?;

    let t_name = if sys.vars().names().iter().any(|x| x == "t") { "t_" } else { "t" };
    let tv = Vars::new([t_name]);
    let h1 = h
        .restrict(&tv, &[Some(0), None])
        .ok_or_else(|| Error::Internal("H involves x2".into()))?;
    let operator = g.univariate(&tv)?.mul(&h1).primitive();
    let f = series_for(sys, 2 * opts.trunc)?;
    let d = f.diagonal(&DiagonalSpec::Primary { keep: 0, drop: 1 })?;
    let diag = TruncatedSeries::new(&tv, d.coeffs().map(|(e, c)| (e.clone(), c.clone())), d.valid());
    let verification = diag.verify_annihilation(&operator)?;
    Ok(BivariateResult {
        ord: operator.order().unwrap_or(0),
        deg: operator.degree().unwrap_or(0),
        elim,
        s,
        h,
        g,
        operator,
        bounds,
        verification,
    })
}

#[cfg(test)]
mod tests;
