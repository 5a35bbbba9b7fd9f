//! Rational functions with a factored denominator.
//!
//! The denominator is kept as a product of normalized bases: single variables or
//! primitive, monomial-free polynomials with positive leading coefficient. Arithmetic
//! merges bases by equality, so no multivariate gcd is ever needed; a cheap modular
//! filter followed by exact division cancels numerator factors when they appear.

use std::fmt;

use num_traits::{One, Zero};
use serde_json::{json, Value};

use super::modular::{self, Sampler};
use super::polynomial::{Polynomial, Vars, Q};
use crate::error::{Error, Result};

pub type Factors = Vec<(Polynomial, u32)>;

#[derive(Clone)]
pub struct RationalFunction {
    num: Polynomial,
    den: Factors,
}

fn filter_point(n: usize) -> Vec<u64> {
    Sampler::new(0x9e37_79b9 ^ n as u64).point(n)
}

/// Split a non-zero polynomial as `c * Π bases^e` with normalized bases.
pub fn normalize(p: &Polynomial) -> (Q, Factors) {
    assert!(!p.is_zero());
    let (c, prim) = p.primitive();
    let m = prim.monomial_content();
    let mut out = Factors::new();
    let vars = p.vars().clone();
    for (i, &k) in m.iter().enumerate() {
        if k > 0 {
            out.push((Polynomial::var(&vars, i), k));
        }
    }
    let rest = prim.div_monomial(&m);
    if rest.as_constant().is_none() {
        out.push((rest, 1));
    }
    (c, out)
}

fn merge_into(den: &mut Factors, base: Polynomial, e: u32) {
    if e == 0 {
        return;
    }
    if let Some(slot) = den.iter_mut().find(|(b, _)| *b == base) {
        slot.1 += e;
    } else {
        den.push((base, e));
    }
}

fn exponent_of(den: &Factors, base: &Polynomial) -> u32 {
    den.iter().find(|(b, _)| b == base).map(|x| x.1).unwrap_or(0)
}

/// Integer exponent map used for Laurent monomial substitutions such as x2 ↦ t/s.
#[derive(Clone, Debug)]
pub struct MonomialMap {
    pub target: Vars,
    /// `images[i]` is the exponent vector of the image of source variable `i`.
    pub images: Vec<Vec<i64>>,
}

impl MonomialMap {
    /// Image of a polynomial as `(numerator, shift)` meaning `numerator * x^shift`, with
    /// the numerator not divisible by any target variable.
    pub fn apply(&self, p: &Polynomial) -> (Polynomial, Vec<i64>) {
        let n = self.target.len();
        let mut raw: Vec<(Vec<i64>, Q)> = Vec::with_capacity(p.num_terms());
        for (e, c) in p.terms() {
            let mut te = vec![0i64; n];
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    for (j, &w) in self.images[i].iter().enumerate() {
                        te[j] += w * k as i64;
                    }
                }
            }
            raw.push((te, c.clone()));
        }
        let mut shift = vec![i64::MAX; n];
        for (te, _) in &raw {
            for j in 0..n {
                shift[j] = shift[j].min(te[j]);
            }
        }
        if raw.is_empty() {
            shift = vec![0; n];
        }
        let poly = Polynomial::from_terms(
            &self.target,
            raw.into_iter()
                .map(|(te, c)| (te.iter().zip(&shift).map(|(a, b)| (a - b) as u32).collect(), c)),
        );
        (poly, shift)
    }
}

impl RationalFunction {
    pub fn new(num: Polynomial, den: &Polynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        num.vars().ensure_same(den.vars())?;
        let (c, f) = normalize(den);
        let mut r = RationalFunction {
            num: num.scale(&c.recip()),
            den: f,
        };
        r.cancel();
        Ok(r)
    }

    pub fn from_poly(p: Polynomial) -> Self {
        RationalFunction { num: p, den: Vec::new() }
    }

    pub fn zero(vars: &Vars) -> Self {
        Self::from_poly(Polynomial::zero(vars))
    }

    pub fn one(vars: &Vars) -> Self {
        Self::from_poly(Polynomial::one(vars))
    }

    pub fn constant(vars: &Vars, c: Q) -> Self {
        Self::from_poly(Polynomial::constant(vars, c))
    }

    pub fn vars(&self) -> &Vars {
        self.num.vars()
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den_factors(&self) -> &[(Polynomial, u32)] {
        &self.den
    }

    pub fn den(&self) -> Polynomial {
        let mut d = Polynomial::one(self.vars());
        for (b, e) in &self.den {
            d = &d * &b.pow(*e);
        }
        d
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn as_polynomial(&self) -> Option<&Polynomial> {
        self.den.is_empty().then_some(&self.num)
    }

    /// Remove numerator factors shared with the denominator bases.
    fn cancel(&mut self) {
        if self.num.is_zero() {
            self.den.clear();
            return;
        }
        if self.den.is_empty() {
            return;
        }
        let pt = filter_point(self.vars().len());
        for slot in self.den.iter_mut() {
            while slot.1 > 0 && modular::may_divide(&slot.0, &self.num, &pt) {
                match self.num.div_exact(&slot.0) {
                    Some(q) => {
                        self.num = q;
                        slot.1 -= 1;
                    }
                    None => break,
                }
            }
        }
        self.den.retain(|(_, e)| *e > 0);
    }

    fn with_den(num: Polynomial, den: Factors) -> Self {
        let mut r = RationalFunction { num, den };
        r.cancel();
        r
    }

    pub fn add(&self, o: &RationalFunction) -> RationalFunction {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        let mut den = self.den.clone();
        for (b, e) in &o.den {
            let cur = exponent_of(&den, b);
            if *e > cur {
                merge_into(&mut den, b.clone(), e - cur);
            }
        }
        let lift = |r: &RationalFunction| -> Polynomial {
            let mut n = r.num.clone();
            for (b, e) in &den {
                let have = exponent_of(&r.den, b);
                if *e > have {
                    n = &n * &b.pow(e - have);
                }
            }
            n
        };
        let num = &lift(self) + &lift(o);
        Self::with_den(num, den)
    }

    pub fn neg(&self) -> RationalFunction {
        RationalFunction {
            num: -&self.num,
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, o: &RationalFunction) -> RationalFunction {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &RationalFunction) -> RationalFunction {
        if self.is_zero() || o.is_zero() {
            return Self::zero(self.vars());
        }
        let mut den = self.den.clone();
        for (b, e) in &o.den {
            merge_into(&mut den, b.clone(), *e);
        }
        Self::with_den(&self.num * &o.num, den)
    }

    pub fn scale(&self, c: &Q) -> RationalFunction {
        if c.is_zero() {
            return Self::zero(self.vars());
        }
        RationalFunction {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    pub fn mul_poly(&self, p: &Polynomial) -> RationalFunction {
        Self::with_den(&self.num * p, self.den.clone())
    }

    pub fn div_poly(&self, p: &Polynomial) -> Result<RationalFunction> {
        if p.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        let (c, f) = normalize(p);
        let mut den = self.den.clone();
        for (b, e) in f {
            merge_into(&mut den, b, e);
        }
        Ok(Self::with_den(self.num.scale(&c.recip()), den))
    }

    pub fn inv(&self) -> Result<RationalFunction> {
        if self.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        let (c, f) = normalize(&self.num);
        let mut num = Polynomial::constant(self.vars(), c.recip());
        for (b, e) in &self.den {
            num = &num * &b.pow(*e);
        }
        Ok(Self::with_den(num, f))
    }

    pub fn derivative(&self, i: usize) -> RationalFunction {
        let moving: Vec<usize> = (0..self.den.len())
            .filter(|&k| self.den[k].0.degree_in(i).unwrap_or(0) > 0)
            .collect();
        if moving.is_empty() {
            return RationalFunction {
                num: self.num.derivative(i),
                den: self.den.clone(),
            };
        }
        let prod_except = |skip: Option<usize>| -> Polynomial {
            let mut p = Polynomial::one(self.vars());
            for &k in &moving {
                if Some(k) != skip {
                    p = &p * &self.den[k].0;
                }
            }
            p
        };
        let mut num = &self.num.derivative(i) * &prod_except(None);
        for &k in &moving {
            let (b, e) = &self.den[k];
            let term = &(&self.num * &b.derivative(i)) * &prod_except(Some(k));
            num.add_scaled(&term, &-Q::from_integer((*e).into()), None);
        }
        let mut den = self.den.clone();
        for &k in &moving {
            den[k].1 += 1;
        }
        Self::with_den(num, den)
    }

    /// Multiply by `Π factors` (normalized bases) and return the result if it is a polynomial.
    pub fn clear_with(&self, factors: &[(Polynomial, u32)]) -> Option<Polynomial> {
        let mut den = self.den.clone();
        let mut num = self.num.clone();
        for (b, f) in factors {
            let mut f = *f;
            if let Some(slot) = den.iter_mut().find(|(x, _)| x == b) {
                let m = slot.1.min(f);
                slot.1 -= m;
                f -= m;
            }
            if f > 0 {
                num = &num * &b.pow(f);
            }
        }
        den.retain(|(_, e)| *e > 0);
        let r = Self::with_den(num, den);
        r.den.is_empty().then_some(r.num)
    }

    /// Apply a monomial substitution such as x1 ↦ s, x2 ↦ t/s.
    pub fn substitute_monomials(&self, map: &MonomialMap) -> RationalFunction {
        let n = map.target.len();
        let (num, mut net) = map.apply(&self.num);
        let mut den = Factors::new();
        let mut scale = Q::one();
        for (b, e) in &self.den {
            let (bp, sh) = map.apply(b);
            for j in 0..n {
                net[j] -= sh[j] * *e as i64;
            }
            let (c, f) = normalize(&bp);
            scale /= num_traits::pow(c, *e as usize);
            for (fb, fe) in f {
                merge_into(&mut den, fb, fe * e);
            }
        }
        let mut mono = vec![0u32; n];
        for j in 0..n {
            if net[j] >= 0 {
                mono[j] = net[j] as u32;
            } else {
                merge_into(&mut den, Polynomial::var(&map.target, j), (-net[j]) as u32);
            }
        }
        let num = num.mul_monomial(&mono, &scale);
        Self::with_den(num, den)
    }

    pub fn eval_mod(&self, point: &[u64]) -> Option<u64> {
        let n = modular::eval_poly(&self.num, point)?;
        let mut d = 1u64;
        for (b, e) in &self.den {
            d = modular::mul(d, modular::pow(modular::eval_poly(b, point)?, *e as u64));
        }
        (d != 0).then(|| modular::mul(n, modular::inv(d)))
    }

    pub fn to_json(&self) -> Value {
        json!({"num": self.num.to_json(), "den": self.den().to_json()})
    }

    pub fn from_json(v: &Value, vars: &Vars, path: &str) -> Result<Self> {
        let num = Polynomial::from_json(
            v.get("num").ok_or_else(|| Error::parse(path, "missing num"))?,
            vars,
            &format!("{path}.num"),
        )?;
        let den = match v.get("den") {
            Some(d) => Polynomial::from_json(d, vars, &format!("{path}.den"))?,
            None => Polynomial::one(vars),
        };
        Self::new(num, &den)
    }
}

impl PartialEq for RationalFunction {
    fn eq(&self, o: &RationalFunction) -> bool {
        if self.vars() != o.vars() {
            return false;
        }
        let mut lhs = self.num.clone();
        let mut rhs = o.num.clone();
        let mut bases: Vec<&Polynomial> = self.den.iter().map(|x| &x.0).collect();
        for (b, _) in &o.den {
            if !bases.contains(&b) {
                bases.push(b);
            }
        }
        for b in bases {
            let ea = exponent_of(&self.den, b);
            let eb = exponent_of(&o.den, b);
            let m = ea.min(eb);
            if eb > m {
                lhs = &lhs * &b.pow(eb - m);
            }
            if ea > m {
                rhs = &rhs * &b.pow(ea - m);
            }
        }
        lhs == rhs
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_empty() {
            return write!(f, "{}", self.num);
        }
        let parts: Vec<String> = self
            .den
            .iter()
            .map(|(b, e)| if *e == 1 { format!("({b})") } else { format!("({b})^{e}") })
            .collect();
        write!(f, "({})/{}", self.num, parts.join("*"))
    }
}

impl fmt::Debug for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RationalFunction({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::polynomial::q_int;

    fn setup() -> (Vars, Polynomial, Polynomial, Polynomial) {
        let v = Vars::new(["x", "y"]);
        let x = Polynomial::var(&v, 0);
        let y = Polynomial::var(&v, 1);
        let q = &(&Polynomial::one(&v) - &x) - &y;
        (v, x, y, q)
    }

    #[test]
    fn cancellation_and_equality() {
        let (v, x, _y, q) = setup();
        let a = RationalFunction::new(&q * &x, &(&q * &q)).unwrap();
        assert_eq!(a.den_factors().len(), 1);
        let b = RationalFunction::new(x.clone(), &q).unwrap();
        assert_eq!(a, b);
        let one = RationalFunction::one(&v);
        assert_eq!(b.mul(&b.inv().unwrap()), one);
    }

    #[test]
    fn derivative_of_reciprocal() {
        let (v, _x, _y, q) = setup();
        let f = RationalFunction::new(Polynomial::one(&v), &q).unwrap();
        let df = f.derivative(0);
        let expect = RationalFunction::new(Polynomial::one(&v), &(&q * &q)).unwrap();
        assert_eq!(df, expect);
        let d2 = df.derivative(0);
        let expect2 = RationalFunction::new(Polynomial::int(&v, 2), &q.pow(3)).unwrap();
        assert_eq!(d2, expect2);
    }

    #[test]
    fn clear_and_substitute() {
        let (v, x, y, q) = setup();
        let f = RationalFunction::new(Polynomial::one(&v), &(&q * &x)).unwrap();
        assert!(f.clear_with(&[(q.clone(), 1)]).is_none());
        let p = f.clear_with(&[(q.clone(), 1), (x.clone(), 1)]).unwrap();
        assert!(p.is_one());
        let sv = Vars::new(["s", "t"]);
        let map = MonomialMap {
            target: sv.clone(),
            images: vec![vec![1, 0], vec![-1, 1]],
        };
        let g = RationalFunction::new(Polynomial::one(&v), &q)
            .unwrap()
            .mul_poly(&y)
            .substitute_monomials(&map);
        let s = Polynomial::var(&sv, 0);
        let t = Polynomial::var(&sv, 1);
        let expect_den = &(&s - &(&s * &s)) - &t;
        let expect = RationalFunction::new(t.clone(), &expect_den).unwrap();
        assert_eq!(g, expect);
        assert_eq!(g.den_factors()[0].0.coeff(&[2, 0]), q_int(1));
    }
}
