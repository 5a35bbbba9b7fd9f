//! Truncated multivariate power series: the exact oracle every operator is checked against.

pub mod laurent;

use std::collections::BTreeMap;

use num_traits::Zero;
use serde_json::{json, Value};

use crate::algebra::polynomial::{exps_from_json, q_from_json, q_to_string};
use crate::algebra::{exps_degree, grlex_cmp, Exps, Polynomial, Vars, Q};
use crate::error::{Error, Result};
use crate::weyl::DiffOperator;

pub use laurent::LaurentSeries;

pub const FORMAT_VERSION: u64 = 1;

/// Coefficients of total degree `≤ valid` are exact; nothing above is stored.
#[derive(Clone, PartialEq, Eq)]
pub struct TruncatedSeries {
    vars: Vars,
    coeffs: BTreeMap<Exps, Q>,
    valid: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DiagonalSpec {
    /// Collapse `drop` onto `keep`; the result keeps `keep`'s name.
    Primary { keep: usize, drop: usize },
    /// `Σ a_{i,..,i} x_n^i`.
    Complete,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    /// Residual coefficients of total degree `0..=window` were checked.
    pub window: u32,
    pub checked: usize,
    pub first_nonzero: Option<(Exps, Q)>,
    pub verdict: Verdict,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn to_json(&self) -> Value {
        json!({
            "window": [0, self.window],
            "checked_coefficients": self.checked,
            "first_nonzero": self.first_nonzero.as_ref().map(|(e, c)| json!([e, q_to_string(c)])),
            "verdict": self.verdict.as_str(),
        })
    }
}

/// All exponent vectors of length `n` and total degree `≤ t`, in graded order.
pub fn monomials_up_to(n: usize, t: u32) -> Vec<Exps> {
    let mut out = Vec::new();
    for d in 0..=t {
        monomials_of_degree(n, d, &mut Vec::with_capacity(n), &mut out);
    }
    out
}

fn monomials_of_degree(n: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Vec<Exps>) {
    if prefix.len() + 1 == n {
        prefix.push(d);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    if n == 0 {
        if d == 0 {
            out.push(Vec::new());
        }
        return;
    }
    for k in (0..=d).rev() {
        prefix.push(k);
        monomials_of_degree(n, d - k, prefix, out);
        prefix.pop();
    }
}

impl TruncatedSeries {
    pub fn new(vars: &Vars, coeffs: impl IntoIterator<Item = (Exps, Q)>, valid: u32) -> Self {
        let mut map = BTreeMap::new();
        for (e, c) in coeffs {
            assert_eq!(e.len(), vars.len());
            if exps_degree(&e) <= valid && !c.is_zero() {
                *map.entry(e).or_insert_with(Q::zero) += c;
            }
        }
        map.retain(|_, c: &mut Q| !c.is_zero());
        TruncatedSeries {
            vars: vars.clone(),
            coeffs: map,
            valid,
        }
    }

    pub fn from_polynomial(p: &Polynomial, valid: u32) -> Self {
        Self::new(p.vars(), p.terms().map(|(e, c)| (e.clone(), c.clone())), valid)
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn valid(&self) -> u32 {
        self.valid
    }

    pub fn coeff(&self, e: &[u32]) -> Q {
        self.coeffs.get(e).cloned().unwrap_or_else(Q::zero)
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&Exps, &Q)> {
        self.coeffs.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// The kept part as a polynomial.
    pub fn to_polynomial(&self) -> Polynomial {
        Polynomial::from_terms(&self.vars, self.coeffs.iter().map(|(e, c)| (e.clone(), c.clone())))
    }

    pub fn truncate(&self, valid: u32) -> TruncatedSeries {
        assert!(valid <= self.valid, "cannot extend validity by truncating");
        Self::new(&self.vars, self.coeffs.iter().map(|(e, c)| (e.clone(), c.clone())), valid)
    }

    /// Coefficients of a univariate series as a dense list `a_0..a_valid`.
    pub fn univariate_coeffs(&self) -> Vec<Q> {
        assert_eq!(self.vars.len(), 1, "univariate series expected");
        (0..=self.valid).map(|k| self.coeff(&[k])).collect()
    }

    /// `num/den` expanded through total degree `t`.
    pub fn expand_rational(num: &Polynomial, den: &Polynomial, t: u32) -> Result<Self> {
        num.vars().ensure_same(den.vars())?;
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        let d0 = den.constant_term();
        if d0.is_zero() {
            return Err(Error::SingularAtOrigin);
        }
        let inv0 = d0.recip();
        let vars = num.vars().clone();
        let dterms: Vec<(Exps, Q)> = den
            .terms()
            .filter(|(e, _)| exps_degree(e) > 0)
            .map(|(e, c)| (e.clone(), c.clone()))
            .collect();
        let mut coeffs: BTreeMap<Exps, Q> = BTreeMap::new();
        for e in monomials_up_to(vars.len(), t) {
            let mut acc = num.coeff(&e);
            for (d, c) in &dterms {
                if d.iter().zip(&e).all(|(a, b)| a <= b) {
                    let back: Exps = e.iter().zip(d).map(|(a, b)| a - b).collect();
                    if let Some(v) = coeffs.get(&back) {
                        acc -= c * v;
                    }
                }
            }
            if !acc.is_zero() {
                coeffs.insert(e, acc * &inv0);
            }
        }
        Ok(TruncatedSeries { vars, coeffs, valid: t })
    }

    pub fn derivative(&self, i: usize) -> Result<Self> {
        if self.valid == 0 {
            return Err(Error::TruncationExhausted { valid: 0, order: 1 });
        }
        let mut out = BTreeMap::new();
        for (e, c) in &self.coeffs {
            if e[i] > 0 {
                let mut e2 = e.clone();
                e2[i] -= 1;
                out.insert(e2, c * Q::from_integer(e[i].into()));
            }
        }
        Ok(TruncatedSeries {
            vars: self.vars.clone(),
            coeffs: out,
            valid: self.valid - 1,
        })
    }

    pub fn mul_poly(&self, p: &Polynomial) -> TruncatedSeries {
        let mut acc: BTreeMap<Exps, Q> = BTreeMap::new();
        for (a, c) in p.terms() {
            let da = exps_degree(a);
            if da > self.valid {
                continue;
            }
            for (e, v) in &self.coeffs {
                if exps_degree(e) + da > self.valid {
                    continue;
                }
                let k: Exps = a.iter().zip(e).map(|(x, y)| x + y).collect();
                *acc.entry(k).or_insert_with(Q::zero) += c * v;
            }
        }
        Self::new(&self.vars, acc, self.valid)
    }

    pub fn add(&self, o: &TruncatedSeries) -> TruncatedSeries {
        let valid = self.valid.min(o.valid);
        Self::new(
            &self.vars,
            self.coeffs.iter().chain(o.coeffs.iter()).map(|(e, c)| (e.clone(), c.clone())),
            valid,
        )
    }

    pub fn scale(&self, c: &Q) -> TruncatedSeries {
        Self::new(&self.vars, self.coeffs.iter().map(|(e, v)| (e.clone(), v * c)), self.valid)
    }

    pub fn sub(&self, o: &TruncatedSeries) -> TruncatedSeries {
        self.add(&o.scale(&-Q::from_integer(1.into())))
    }

    /// `P(f)`, exact through total degree `valid − ord(P)`.
    pub fn apply_operator(&self, p: &DiffOperator) -> Result<TruncatedSeries> {
        self.vars.ensure_same(p.vars())?;
        let ord = p.order().unwrap_or(0);
        if ord > self.valid {
            return Err(Error::TruncationExhausted {
                valid: self.valid as i64,
                order: ord as i64,
            });
        }
        let valid = self.valid - ord;
        let mut acc: BTreeMap<Exps, Q> = BTreeMap::new();
        for (beta, a) in p.terms() {
            let mut d = self.clone();
            for (i, &k) in beta.iter().enumerate() {
                for _ in 0..k {
                    d = d.derivative(i)?;
                }
            }
            let d = d.truncate(valid);
            for (e, c) in d.mul_poly(a).coeffs {
                *acc.entry(e).or_insert_with(Q::zero) += c;
            }
        }
        Ok(Self::new(&self.vars, acc, valid))
    }

    pub fn diagonal(&self, spec: &DiagonalSpec) -> Result<TruncatedSeries> {
        let n = self.vars.len();
        match *spec {
            DiagonalSpec::Primary { keep, drop } => {
                if keep == drop {
                    return Err(Error::InvalidArgument("diagonal needs two distinct variables".into()));
                }
                if keep >= n || drop >= n {
                    return Err(Error::InvalidArgument("diagonal variable out of range".into()));
                }
                let kept: Vec<usize> = (0..n).filter(|&i| i != drop).collect();
                let vars = Vars::new(kept.iter().map(|&i| self.vars.name(i).to_string()));
                let coeffs = self
                    .coeffs
                    .iter()
                    .filter(|(e, _)| e[keep] == e[drop])
                    .map(|(e, c)| (kept.iter().map(|&i| e[i]).collect::<Exps>(), c.clone()));
                Ok(Self::new(&vars, coeffs, self.valid / 2))
            }
            DiagonalSpec::Complete => {
                if n == 0 {
                    return Err(Error::InvalidArgument("complete diagonal of a constant".into()));
                }
                let vars = Vars::new([self.vars.name(n - 1).to_string()]);
                let coeffs = self
                    .coeffs
                    .iter()
                    .filter(|(e, _)| e.iter().all(|&k| k == e[0]))
                    .map(|(e, c)| (vec![e[0]], c.clone()));
                Ok(Self::new(&vars, coeffs, self.valid / n as u32))
            }
        }
    }

    pub fn verify_annihilation(&self, p: &DiffOperator) -> Result<VerificationReport> {
        let ord = p.order().unwrap_or(0);
        if ord > self.valid {
            return Err(Error::EmptyWindow {
                valid: self.valid as i64,
                order: ord as i64,
            });
        }
        let r = self.apply_operator(p)?;
        let mut nz: Vec<(&Exps, &Q)> = r.coeffs.iter().collect();
        nz.sort_by(|a, b| grlex_cmp(a.0, b.0));
        let first = nz.first().map(|(e, c)| ((*e).clone(), (*c).clone()));
        Ok(VerificationReport {
            window: r.valid,
            checked: monomials_count(self.vars.len(), r.valid),
            verdict: if first.is_none() { Verdict::Pass } else { Verdict::Fail },
            first_nonzero: first,
        })
    }

    pub fn to_json(&self) -> Value {
        let mut terms: Vec<(&Exps, &Q)> = self.coeffs.iter().collect();
        terms.sort_by(|a, b| grlex_cmp(a.0, b.0));
        json!({
            "format_version": FORMAT_VERSION,
            "variables": self.vars.names(),
            "valid_order": self.valid,
            "coefficients": terms.into_iter().map(|(e, c)| json!([e, q_to_string(c)])).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value, path: &str) -> Result<Self> {
        let names = v
            .get("variables")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::parse(format!("{path}.variables"), "expected a list of names"))?;
        let names: Vec<String> = names
            .iter()
            .map(|x| x.as_str().map(str::to_string))
            .collect::<Option<_>>()
            .ok_or_else(|| Error::parse(format!("{path}.variables"), "names must be strings"))?;
        let vars = Vars::new(names);
        let valid = v
            .get("valid_order")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::parse(format!("{path}.valid_order"), "expected a non-negative integer"))?;
        let coeffs = Self::coeffs_from_json(
            v.get("coefficients").unwrap_or(&Value::Array(vec![])),
            &vars,
            &format!("{path}.coefficients"),
        )?;
        Ok(Self::new(&vars, coeffs, valid as u32))
    }

    /// `[[exps, "p/q"], ...]`
    pub fn coeffs_from_json(v: &Value, vars: &Vars, path: &str) -> Result<Vec<(Exps, Q)>> {
        let arr = v
            .as_array()
            .ok_or_else(|| Error::parse(path, "expected [[exponents, value], ...]"))?;
        arr.iter()
            .enumerate()
            .map(|(k, t)| {
                let tp = format!("{path}[{k}]");
                let pair = t
                    .as_array()
                    .filter(|a| a.len() == 2)
                    .ok_or_else(|| Error::parse(&tp, "expected [exponents, value]"))?;
                Ok((exps_from_json(&pair[0], vars.len(), &tp)?, q_from_json(&pair[1], &tp)?))
            })
            .collect()
    }
}

fn monomials_count(n: usize, t: u32) -> usize {
    let b = crate::algebra::binomial(t as u64 + n as u64, n as u64);
    usize::try_from(b).unwrap_or(usize::MAX)
}

impl std::fmt::Debug for TruncatedSeries {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "TruncatedSeries({} + O(deg {}))", self.to_polynomial(), self.valid + 1)
    }
}
