//! D-finite systems: one operator `L_i ∈ K[x]⟨D_i⟩` per variable, plus a way to get
//! truncated solution data for the oracle.

mod reduce;

use num_traits::Zero;
use serde_json::{json, Value};

use crate::algebra::rational::normalize;
use crate::algebra::{Polynomial, Vars};
use crate::error::{Error, Result};
use crate::series::{TruncatedSeries, FORMAT_VERSION};
use crate::weyl::DiffOperator;

pub use reduce::{coeffs_equal, Coeffs, Reduction, ReductionData};

/// Truncation used when a system built from a rational function checks its own operators.
const SELF_CHECK_ORDER: u32 = 8;

#[derive(Clone, Debug, PartialEq)]
pub enum Source {
    Rational { num: Polynomial, den: Polynomial },
    Seeded(TruncatedSeries),
}

#[derive(Clone, Debug)]
pub struct DFiniteSystem {
    vars: Vars,
    ops: Vec<DiffOperator>,
    orders: Vec<u32>,
    degrees: Vec<u32>,
    source: Source,
}

/// Divide `a` and `b` by the normalized factors of `b` that also divide `a`.
fn strip_common(mut a: Polynomial, mut b: Polynomial) -> (Polynomial, Polynomial) {
    if b.is_zero() {
        return (Polynomial::one(a.vars()), b);
    }
    let (_, factors) = normalize(&b);
    for (base, e) in factors {
        for _ in 0..e {
            match (a.div_exact(&base), b.div_exact(&base)) {
                (Some(qa), Some(qb)) => {
                    a = qa;
                    b = qb;
                }
                _ => break,
            }
        }
    }
    (a, b)
}

impl DFiniteSystem {
    /// First-order annihilators `(num·den) D_i − (den ∂_i num − num ∂_i den)` of `num/den`,
    /// with common polynomial factors stripped.
    pub fn from_rational(num: Polynomial, den: Polynomial) -> Result<Self> {
        num.vars().ensure_same(den.vars())?;
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        if den.constant_term().is_zero() {
            return Err(Error::SingularAtOrigin);
        }
        if num.is_zero() {
            return Err(Error::InvalidSystem("the zero series has no leading coefficients to normalize".into()));
        }
        let vars = num.vars().clone();
        let n = vars.len();
        let mut ops = Vec::with_capacity(n);
        for i in 0..n {
            let a = &num * &den;
            let b = &(&den * &num.derivative(i)) - &(&num * &den.derivative(i));
            let (a, b) = strip_common(a, b);
            let mut beta = vec![0; n];
            beta[i] = 1;
            let op = DiffOperator::monomial(&vars, beta, a).sub(&DiffOperator::from_poly(b));
            ops.push(op.primitive());
        }
        let sys = Self::assemble(vars, ops, Source::Rational { num, den })?;
        let f = sys.series(SELF_CHECK_ORDER)?;
        for (i, l) in sys.ops.iter().enumerate() {
            if !f.verify_annihilation(l)?.passed() {
                return Err(Error::Internal(format!("L_{} does not annihilate the expansion", i + 1)));
            }
        }
        Ok(sys)
    }

    /// A system given by its operators, with enough exact coefficients to check them.
    pub fn from_operators(vars: &Vars, ops: Vec<DiffOperator>, seed: TruncatedSeries) -> Result<Self> {
        seed.vars().ensure_same(vars)?;
        let sys = Self::assemble(vars.clone(), ops, Source::Seeded(seed.clone()))?;
        for (i, l) in sys.ops.iter().enumerate() {
            let r = sys.orders[i];
            if r > seed.valid() {
                return Err(Error::InvalidSystem(format!(
                    "seed valid through order {} cannot check L_{} of order {r}",
                    seed.valid(),
                    i + 1
                )));
            }
            let rep = seed.verify_annihilation(l)?;
            if !rep.passed() {
                return Err(Error::InvalidSystem(format!(
                    "L_{} does not annihilate the seed coefficients (first residual at {:?})",
                    i + 1,
                    rep.first_nonzero.map(|x| x.0)
                )));
            }
        }
        Ok(sys)
    }

    fn assemble(vars: Vars, ops: Vec<DiffOperator>, source: Source) -> Result<Self> {
        let n = vars.len();
        if n == 0 {
            return Err(Error::InvalidSystem("no variables".into()));
        }
        if ops.len() != n {
            return Err(Error::InvalidSystem(format!("{} operators for {n} variables", ops.len())));
        }
        let mut orders = Vec::with_capacity(n);
        let mut degrees = Vec::with_capacity(n);
        for (i, l) in ops.iter().enumerate() {
            l.vars().ensure_same(&vars)?;
            if l.is_zero() {
                return Err(Error::InvalidSystem(format!("L_{} is zero", i + 1)));
            }
            if l.terms().any(|(b, _)| b.iter().enumerate().any(|(j, &k)| j != i && k > 0)) {
                return Err(Error::InvalidSystem(format!(
                    "L_{} may only involve D_{}",
                    i + 1,
                    vars.name(i)
                )));
            }
            let r = l.order_in(i).unwrap();
            if r == 0 {
                return Err(Error::InvalidSystem(format!("L_{} has order 0", i + 1)));
            }
            orders.push(r);
            degrees.push(l.degree().unwrap());
        }
        Ok(DFiniteSystem {
            vars,
            ops,
            orders,
            degrees,
            source,
        })
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn n(&self) -> usize {
        self.vars.len()
    }

    pub fn operators(&self) -> &[DiffOperator] {
        &self.ops
    }

    pub fn orders(&self) -> &[u32] {
        &self.orders
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn r_f(&self) -> u32 {
        *self.orders.iter().max().unwrap()
    }

    pub fn d_f(&self) -> u32 {
        *self.degrees.iter().max().unwrap()
    }

    /// `ℓ_{i,k}`, the coefficient of `D_i^k` in `L_i`.
    pub fn coeff(&self, i: usize, k: u32) -> Polynomial {
        let mut b = vec![0; self.n()];
        b[i] = k;
        self.ops[i].coeff(&b)
    }

    pub fn leading(&self, i: usize) -> Polynomial {
        self.coeff(i, self.orders[i])
    }

    pub fn source(&self) -> &Source {
        &self.source
    }

    pub fn rational(&self) -> Option<(&Polynomial, &Polynomial)> {
        match &self.source {
            Source::Rational { num, den } => Some((num, den)),
            Source::Seeded(_) => None,
        }
    }

    /// Deepest available truncation; `None` when any depth can be produced.
    pub fn max_series_order(&self) -> Option<u32> {
        match &self.source {
            Source::Rational { .. } => None,
            Source::Seeded(s) => Some(s.valid()),
        }
    }

    /// Exact solution data through total degree `t`.
    pub fn series(&self, t: u32) -> Result<TruncatedSeries> {
        match &self.source {
            Source::Rational { num, den } => TruncatedSeries::expand_rational(num, den, t),
            Source::Seeded(s) => {
                if t > s.valid() {
                    Err(Error::TruncationExhausted {
                        valid: s.valid() as i64,
                        order: t as i64,
                    })
                } else {
                    Ok(s.truncate(t))
                }
            }
        }
    }

    /// The same system with the variables in `lead` moved to the front, in that order.
    pub fn reorder(&self, lead: &[usize]) -> Result<Self> {
        let n = self.n();
        let mut seen = vec![false; n];
        for &i in lead {
            if i >= n || seen[i] {
                return Err(Error::InvalidArgument(format!("bad variable selection {lead:?} for {n} variables")));
            }
            seen[i] = true;
        }
        let order: Vec<usize> = lead.iter().copied().chain((0..n).filter(|&i| !seen[i])).collect();
        let mut map = vec![0; n];
        for (new, &old) in order.iter().enumerate() {
            map[old] = new;
        }
        let vars = Vars::new(order.iter().map(|&i| self.vars.name(i).to_string()));
        let ops = order.iter().map(|&i| self.ops[i].embed(&vars, &map)).collect();
        let source = match &self.source {
            Source::Rational { num, den } => Source::Rational {
                num: num.embed(&vars, &map),
                den: den.embed(&vars, &map),
            },
            Source::Seeded(s) => Source::Seeded(TruncatedSeries::from_polynomial(
                &s.to_polynomial().embed(&vars, &map),
                s.valid(),
            )),
        };
        Self::assemble(vars, ops, source)
    }

    pub fn reduction_data(&self, set: &[usize]) -> Result<ReductionData> {
        ReductionData::new(self, set)
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "format_version": FORMAT_VERSION,
            "variables": self.vars.names(),
        });
        match &self.source {
            Source::Rational { num, den } => {
                v["rational"] = json!({"num": num.to_json(), "den": den.to_json()});
            }
            Source::Seeded(s) => {
                v["operators"] = Value::Array(self.ops.iter().map(|l| l.to_json()).collect());
                let sj = s.to_json();
                v["coefficients"] = sj["coefficients"].clone();
                v["valid_order"] = sj["valid_order"].clone();
            }
        }
        v
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let names = v
            .get("variables")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::parse("variables", "expected a list of variable names"))?;
        let names: Vec<String> = names
            .iter()
            .map(|x| x.as_str().map(str::to_string))
            .collect::<Option<_>>()
            .ok_or_else(|| Error::parse("variables", "variable names must be strings"))?;
        if names.is_empty() {
            return Err(Error::parse("variables", "at least one variable is required"));
        }
        let vars = Vars::new(names);
        if let Some(r) = v.get("rational") {
            let num = Polynomial::from_json(
                r.get("num").ok_or_else(|| Error::parse("rational", "missing num"))?,
                &vars,
                "rational.num",
            )?;
            let den = match r.get("den") {
                Some(d) => Polynomial::from_json(d, &vars, "rational.den")?,
                None => Polynomial::one(&vars),
            };
            return Self::from_rational(num, den);
        }
        let ops = v
            .get("operators")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::parse("<root>", "expected either `rational` or `operators`"))?;
        let ops = ops
            .iter()
            .enumerate()
            .map(|(k, o)| DiffOperator::from_json(o, &vars, &format!("operators[{k}]")))
            .collect::<Result<Vec<_>>>()?;
        let coeffs = TruncatedSeries::coeffs_from_json(
            v.get("coefficients")
                .ok_or_else(|| Error::parse("coefficients", "operator systems need seed coefficients"))?,
            &vars,
            "coefficients",
        )?;
        let valid = v
            .get("valid_order")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::parse("valid_order", "operator systems need the seed's valid order"))?;
        let seed = TruncatedSeries::new(&vars, coeffs, valid as u32);
        Self::from_operators(&vars, ops, seed)
    }
}

impl PartialEq for DFiniteSystem {
    fn eq(&self, o: &Self) -> bool {
        self.vars == o.vars && self.ops == o.ops && self.source == o.source
    }
}
