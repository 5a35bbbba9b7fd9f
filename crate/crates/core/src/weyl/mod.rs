//! The Weyl algebra: operators `Σ a_β(x) D^β` with polynomial coefficients on the left.

mod subalgebra;

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use serde_json::Value;

use crate::algebra::{binomial, grlex_cmp, Exps, Polynomial, Vars, Q};
use crate::error::{Error, Result};

pub use subalgebra::{subalgebra_decompose, Coordinates, SubIndex, SubalgebraKind};

/// Canonical form: every x-power stands left of every D-power.
#[derive(Clone, PartialEq, Eq)]
pub struct DiffOperator {
    vars: Vars,
    terms: BTreeMap<Exps, Polynomial>,
}

/// All `μ ≤ β` componentwise.
pub(crate) fn sub_vectors(beta: &[u32]) -> Vec<Exps> {
    let mut out = vec![Vec::with_capacity(beta.len())];
    for &b in beta {
        let mut next = Vec::with_capacity(out.len() * (b as usize + 1));
        for v in &out {
            for m in 0..=b {
                let mut w = v.clone();
                w.push(m);
                next.push(w);
            }
        }
        out = next;
    }
    out
}

fn multi_binomial(beta: &[u32], mu: &[u32]) -> Q {
    let mut c = num_bigint::BigInt::from(1);
    for (b, m) in beta.iter().zip(mu) {
        c *= binomial(*b as u64, *m as u64);
    }
    Q::from_integer(c)
}

/// Leibniz rule: `D^β b = Σ_μ C(β, μ) ∂^μ(b) D^{β−μ}`, as `(β − μ, coefficient)` pairs.
pub fn leibniz(beta: &[u32], b: &Polynomial) -> Vec<(Exps, Polynomial)> {
    let mut out = Vec::new();
    for mu in sub_vectors(beta) {
        let d = b.derivative_multi(&mu);
        if d.is_zero() {
            continue;
        }
        let rest: Exps = beta.iter().zip(&mu).map(|(x, y)| x - y).collect();
        out.push((rest, d.scale(&multi_binomial(beta, &mu))));
    }
    out
}

/// `a D_i^k` next to `D_i^k a`, with `correction = a D_i^k − D_i^k a`.
#[derive(Clone, Debug)]
pub struct Commutation {
    pub canonical: DiffOperator,
    pub product: DiffOperator,
    pub correction: DiffOperator,
}

impl DiffOperator {
    pub fn zero(vars: &Vars) -> Self {
        DiffOperator {
            vars: vars.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(vars: &Vars) -> Self {
        Self::from_poly(Polynomial::one(vars))
    }

    pub fn from_poly(p: Polynomial) -> Self {
        let vars = p.vars().clone();
        let mut op = Self::zero(&vars);
        op.add_term(vec![0; vars.len()], p);
        op
    }

    pub fn monomial(vars: &Vars, beta: Exps, coeff: Polynomial) -> Self {
        let mut op = Self::zero(vars);
        op.add_term(beta, coeff);
        op
    }

    pub fn from_terms(vars: &Vars, terms: impl IntoIterator<Item = (Exps, Polynomial)>) -> Self {
        let mut op = Self::zero(vars);
        for (b, p) in terms {
            op.add_term(b, p);
        }
        op
    }

    pub fn x(vars: &Vars, i: usize) -> Self {
        Self::from_poly(Polynomial::var(vars, i))
    }

    pub fn d(vars: &Vars, i: usize) -> Self {
        let mut b = vec![0; vars.len()];
        b[i] = 1;
        Self::monomial(vars, b, Polynomial::one(vars))
    }

    pub fn d_pow(vars: &Vars, beta: Exps) -> Self {
        Self::monomial(vars, beta, Polynomial::one(vars))
    }

    /// Euler operator `x_i D_i`.
    pub fn theta(vars: &Vars, i: usize) -> Self {
        let mut b = vec![0; vars.len()];
        b[i] = 1;
        Self::monomial(vars, b, Polynomial::var(vars, i))
    }

    /// `θ_i − θ_j`.
    pub fn t_op(vars: &Vars, i: usize, j: usize) -> Self {
        Self::theta(vars, i).sub(&Self::theta(vars, j))
    }

    /// `D_i D_j`.
    pub fn d_pair(vars: &Vars, i: usize, j: usize) -> Self {
        let mut b = vec![0; vars.len()];
        b[i] += 1;
        b[j] += 1;
        Self::d_pow(vars, b)
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Exps, &Polynomial)> + ExactSizeIterator {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, beta: &[u32]) -> Polynomial {
        self.terms
            .get(beta)
            .cloned()
            .unwrap_or_else(|| Polynomial::zero(&self.vars))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, beta: Exps, p: Polynomial) {
        assert_eq!(beta.len(), self.vars.len(), "D-exponent length");
        if p.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(beta) {
            Entry::Vacant(v) => {
                v.insert(p);
            }
            Entry::Occupied(mut o) => {
                let s = o.get() + &p;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    /// Highest `|β|`; `None` for the zero operator.
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().map(|b| b.iter().sum()).max()
    }

    pub fn order_in(&self, i: usize) -> Option<u32> {
        self.terms.keys().map(|b| b[i]).max()
    }

    /// Highest total degree among the coefficients.
    pub fn degree(&self) -> Option<u32> {
        self.terms.values().filter_map(|p| p.tdeg()).max()
    }

    pub fn add(&self, o: &DiffOperator) -> DiffOperator {
        debug_assert_eq!(self.vars, o.vars);
        let mut out = self.clone();
        for (b, p) in &o.terms {
            out.add_term(b.clone(), p.clone());
        }
        out
    }

    pub fn sub(&self, o: &DiffOperator) -> DiffOperator {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> DiffOperator {
        self.scale(&-Q::from_integer(1.into()))
    }

    pub fn scale(&self, c: &Q) -> DiffOperator {
        if c.is_zero() {
            return Self::zero(&self.vars);
        }
        DiffOperator {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(b, p)| (b.clone(), p.scale(c))).collect(),
        }
    }

    /// `p · self`; no commutation needed.
    pub fn mul_left_poly(&self, p: &Polynomial) -> DiffOperator {
        let mut out = Self::zero(&self.vars);
        for (b, a) in &self.terms {
            out.add_term(b.clone(), a * p);
        }
        out
    }

    pub fn try_mul(&self, o: &DiffOperator) -> Result<DiffOperator> {
        self.vars.ensure_same(&o.vars)?;
        Ok(self.mul(o))
    }

    /// Noncommutative product in canonical form.
    pub fn mul(&self, o: &DiffOperator) -> DiffOperator {
        assert_eq!(self.vars, o.vars, "operator variable lists differ");
        let mut acc: BTreeMap<Exps, Polynomial> = BTreeMap::new();
        for (beta, a) in &self.terms {
            for (gamma, b) in &o.terms {
                for (rest, c) in leibniz(beta, b) {
                    let key: Exps = rest.iter().zip(gamma).map(|(x, y)| x + y).collect();
                    let term = a * &c;
                    let slot = acc.entry(key).or_insert_with(|| Polynomial::zero(&self.vars));
                    *slot = &*slot + &term;
                }
            }
        }
        acc.retain(|_, p| !p.is_zero());
        DiffOperator {
            vars: self.vars.clone(),
            terms: acc,
        }
    }

    pub fn pow(&self, k: u32) -> DiffOperator {
        let mut r = Self::one(&self.vars);
        for _ in 0..k {
            r = r.mul(self);
        }
        r
    }

    /// Action on a polynomial.
    pub fn apply(&self, p: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero(&self.vars);
        for (b, a) in &self.terms {
            let d = p.derivative_multi(b);
            if !d.is_zero() {
                out = &out + &(a * &d);
            }
        }
        out
    }

    /// Re-express over `target`; source variable `i` becomes `map[i]`.
    pub fn embed(&self, target: &Vars, map: &[usize]) -> DiffOperator {
        let mut out = Self::zero(target);
        for (b, p) in &self.terms {
            let mut b2 = vec![0; target.len()];
            for (i, &k) in b.iter().enumerate() {
                b2[map[i]] += k;
            }
            out.add_term(b2, p.embed(target, map));
        }
        out
    }

    /// Drop variables that occur neither in coefficients nor in D-powers.
    pub fn restrict(&self, target: &Vars, keep: &[Option<usize>]) -> Option<DiffOperator> {
        let mut out = Self::zero(target);
        for (b, p) in &self.terms {
            let mut b2 = vec![0; target.len()];
            for (i, &k) in b.iter().enumerate() {
                match keep[i] {
                    Some(j) => b2[j] = k,
                    None if k > 0 => return None,
                    None => {}
                }
            }
            out.add_term(b2, p.restrict(target, keep)?);
        }
        Some(out)
    }

    /// Same operator under renamed variables (same count).
    pub fn rename(&self, target: &Vars) -> DiffOperator {
        assert_eq!(target.len(), self.vars.len());
        let map: Vec<usize> = (0..target.len()).collect();
        self.embed(target, &map)
    }

    /// Divide all coefficients by their joint rational content, positive leading coefficient
    /// on the highest D-monomial.
    pub fn primitive(&self) -> DiffOperator {
        use num_integer::Integer;
        use num_traits::Signed;
        let mut num = num_bigint::BigInt::zero();
        let mut den = num_bigint::BigInt::from(1);
        for p in self.terms.values() {
            let c = p.content();
            num = num.gcd(c.numer());
            den = den.lcm(c.denom());
        }
        if num.is_zero() {
            return self.clone();
        }
        let mut c = Q::new(num, den);
        let top = self
            .terms
            .iter()
            .max_by(|a, b| grlex_cmp(a.0, b.0))
            .map(|(_, p)| p.leading_coeff().unwrap().is_negative())
            .unwrap();
        if top {
            c = -c;
        }
        self.scale(&c.recip())
    }

    pub fn to_json(&self) -> Value {
        let mut terms: Vec<(&Exps, &Polynomial)> = self.terms.iter().collect();
        terms.sort_by(|a, b| grlex_cmp(b.0, a.0));
        Value::Array(
            terms
                .into_iter()
                .map(|(b, p)| Value::Array(vec![p.to_json(), serde_json::json!(b)]))
                .collect(),
        )
    }

    pub fn from_json(v: &Value, vars: &Vars, path: &str) -> Result<DiffOperator> {
        let arr = v
            .as_array()
            .ok_or_else(|| Error::parse(path, "expected an operator [[poly, [b..]], ...]"))?;
        let mut op = Self::zero(vars);
        for (k, t) in arr.iter().enumerate() {
            let tp = format!("{path}[{k}]");
            let pair = t
                .as_array()
                .filter(|a| a.len() == 2)
                .ok_or_else(|| Error::parse(&tp, "expected [coefficient polynomial, D-exponents]"))?;
            let p = Polynomial::from_json(&pair[0], vars, &format!("{tp}[0]"))?;
            let b = crate::algebra::polynomial::exps_from_json(&pair[1], vars.len(), &format!("{tp}[1]"))?;
            op.add_term(b, p);
        }
        Ok(op)
    }

    /// `a D_i^k` in canonical form together with `D_i^k a` and their difference.
    pub fn commute_power_right(k: u32, a: &Polynomial, i: usize) -> Commutation {
        let vars = a.vars().clone();
        let mut b = vec![0; vars.len()];
        b[i] = k;
        let canonical = DiffOperator::monomial(&vars, b.clone(), a.clone());
        let product = DiffOperator::from_terms(&vars, leibniz(&b, a));
        let correction = canonical.sub(&product);
        Commutation {
            canonical,
            product,
            correction,
        }
    }

    /// Right-hand side of `a D_i^k = Σ_ℓ (−1)^ℓ C(k, ℓ) D_i^{k−ℓ} ∂_i^ℓ(a)`, expanded canonically.
    pub fn dual_leibniz(k: u32, a: &Polynomial, i: usize) -> DiffOperator {
        let vars = a.vars().clone();
        let mut out = DiffOperator::zero(&vars);
        let mut d = a.clone();
        for l in 0..=k {
            let mut b = vec![0; vars.len()];
            b[i] = k - l;
            let mut c = Q::from_integer(binomial(k as u64, l as u64));
            if l % 2 == 1 {
                c = -c;
            }
            let term = DiffOperator::d_pow(&vars, b).mul(&DiffOperator::from_poly(d.scale(&c)));
            out = out.add(&term);
            d = d.derivative(i);
        }
        out
    }
}

impl fmt::Display for DiffOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut terms: Vec<(&Exps, &Polynomial)> = self.terms.iter().collect();
        terms.sort_by(|a, b| grlex_cmp(b.0, a.0));
        let parts: Vec<String> = terms
            .into_iter()
            .map(|(b, p)| {
                let ds: Vec<String> = b
                    .iter()
                    .enumerate()
                    .filter(|(_, &k)| k > 0)
                    .map(|(i, &k)| {
                        if k == 1 {
                            format!("D_{}", self.vars.name(i))
                        } else {
                            format!("D_{}^{}", self.vars.name(i), k)
                        }
                    })
                    .collect();
                let c = if p.num_terms() == 1 { p.to_string() } else { format!("({p})") };
                if ds.is_empty() {
                    c
                } else if p.is_one() {
                    ds.join("*")
                } else {
                    format!("{c}*{}", ds.join("*"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for DiffOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DiffOperator({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::q_int;

    #[test]
    fn commutation_rule() {
        let v = Vars::new(["x"]);
        let d = DiffOperator::d(&v, 0);
        let x = DiffOperator::x(&v, 0);
        let expect = DiffOperator::theta(&v, 0).add(&DiffOperator::one(&v));
        assert_eq!(d.mul(&x), expect);
    }

    #[test]
    fn second_order_leibniz() {
        let v = Vars::new(["x"]);
        let xx = Polynomial::var(&v, 0);
        let a = &(&xx * &xx) * &xx;
        let op = DiffOperator::d_pow(&v, vec![2]).mul(&DiffOperator::from_poly(a.clone()));
        assert_eq!(op.coeff(&[2]), a);
        assert_eq!(op.coeff(&[1]), a.derivative(0).scale(&q_int(2)));
        assert_eq!(op.coeff(&[0]), a.derivative(0).derivative(0));
    }

    #[test]
    fn theta_squared() {
        let v = Vars::new(["x"]);
        let th = DiffOperator::theta(&v, 0);
        let sq = th.mul(&th);
        let x = Polynomial::var(&v, 0);
        assert_eq!(sq.coeff(&[2]), &x * &x);
        assert_eq!(sq.coeff(&[1]), x.clone());
        let m = x.pow(5);
        assert_eq!(sq.apply(&m), m.scale(&q_int(25)));
    }

    #[test]
    fn commute_power_right_shapes() {
        let v = Vars::new(["x", "y"]);
        let x = Polynomial::var(&v, 0);
        let c = DiffOperator::commute_power_right(1, &x, 0);
        assert_eq!(c.correction, DiffOperator::from_poly(Polynomial::int(&v, -1)));
        let a = &(&x * &x) + &Polynomial::var(&v, 1);
        let c2 = DiffOperator::commute_power_right(2, &a, 0);
        assert!(c2.correction.order().unwrap() < 2);
        assert!(c2.correction.degree().unwrap() <= 2);
        assert_eq!(DiffOperator::dual_leibniz(2, &a, 0), c2.canonical);
        let c0 = DiffOperator::commute_power_right(0, &a, 0);
        assert!(c0.correction.is_zero());
    }

    #[test]
    fn json_round_trip() {
        let v = Vars::new(["x1", "x2"]);
        let op = DiffOperator::t_op(&v, 0, 1).mul(&DiffOperator::d_pair(&v, 0, 1));
        let back = DiffOperator::from_json(&op.to_json(), &v, "op").unwrap();
        assert_eq!(back, op);
    }
}
