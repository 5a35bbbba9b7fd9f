//! Sparse multivariate polynomials over the rationals.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};

/// Exact rational coefficient.
pub type Q = BigRational;

/// Exponent vector aligned with a [`Vars`] list.
pub type Exps = Vec<u32>;

/// Ordered, shared list of variable names.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vars(Arc<Vec<String>>);

impl Vars {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Self {
        Vars(Arc::new(names.into_iter().map(Into::into).collect()))
    }

    pub fn empty() -> Self {
        Vars(Arc::new(Vec::new()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn name(&self, i: usize) -> &str {
        &self.0[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|v| v == name)
    }

    pub fn ensure_same(&self, other: &Vars) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::VariableMismatch(self.0.to_vec(), other.0.to_vec()))
        }
    }
}

impl fmt::Debug for Vars {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

pub fn q_int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Graded lexicographic comparison: total degree first, then lexicographic with
/// the first variable most significant.
pub fn grlex_cmp(a: &[u32], b: &[u32]) -> Ordering {
    let da: u64 = a.iter().map(|&e| e as u64).sum();
    let db: u64 = b.iter().map(|&e| e as u64).sum();
    da.cmp(&db).then_with(|| a.cmp(b))
}

pub fn exps_degree(e: &[u32]) -> u32 {
    e.iter().sum()
}

pub fn q_to_string(c: &Q) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

pub fn q_from_str(s: &str) -> Option<Q> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(Q::new(n, d))
            }
        }
        None => Some(Q::from_integer(s.parse().ok()?)),
    }
}

pub(crate) fn q_from_json(v: &Value, path: &str) -> Result<Q> {
    match v {
        Value::String(s) => q_from_str(s).ok_or_else(|| Error::parse(path, format!("bad rational {s:?}"))),
        Value::Number(n) => n
            .as_i64()
            .map(q_int)
            .ok_or_else(|| Error::parse(path, "non-integer JSON number; use a \"p/q\" string")),
        _ => Err(Error::parse(path, "expected a rational string")),
    }
}

pub(crate) fn exps_from_json(v: &Value, len: usize, path: &str) -> Result<Exps> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::parse(path, "expected an exponent list"))?;
    if arr.len() != len {
        return Err(Error::parse(
            path,
            format!("exponent list has length {}, expected {len}", arr.len()),
        ));
    }
    arr.iter()
        .map(|e| {
            e.as_u64()
                .and_then(|x| u32::try_from(x).ok())
                .ok_or_else(|| Error::parse(path, "exponents must be non-negative integers"))
        })
        .collect()
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

/// A polynomial: a finite map from exponent vectors to non-zero rationals.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    vars: Vars,
    terms: BTreeMap<Exps, Q>,
}

impl Polynomial {
    pub fn zero(vars: &Vars) -> Self {
        Polynomial {
            vars: vars.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(vars: &Vars) -> Self {
        Self::constant(vars, Q::one())
    }

    pub fn constant(vars: &Vars, c: Q) -> Self {
        Self::monomial(vars, vec![0; vars.len()], c)
    }

    pub fn int(vars: &Vars, c: i64) -> Self {
        Self::constant(vars, q_int(c))
    }

    pub fn monomial(vars: &Vars, exps: Exps, c: Q) -> Self {
        assert_eq!(exps.len(), vars.len(), "exponent vector length");
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exps, c);
        }
        Polynomial {
            vars: vars.clone(),
            terms,
        }
    }

    pub fn var(vars: &Vars, i: usize) -> Self {
        let mut e = vec![0; vars.len()];
        e[i] = 1;
        Self::monomial(vars, e, Q::one())
    }

    pub fn from_terms(vars: &Vars, terms: impl IntoIterator<Item = (Exps, Q)>) -> Self {
        let mut p = Self::zero(vars);
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Exps, &Q)> + ExactSizeIterator {
        self.terms.iter()
    }

    pub fn into_terms(self) -> BTreeMap<Exps, Q> {
        self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    /// The value if the polynomial is a constant (zero included).
    pub fn as_constant(&self) -> Option<Q> {
        match self.terms.len() {
            0 => Some(Q::zero()),
            1 => {
                let (e, c) = self.terms.iter().next().unwrap();
                e.iter().all(|&x| x == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn coeff(&self, e: &[u32]) -> Q {
        self.terms.get(e).cloned().unwrap_or_else(Q::zero)
    }

    pub fn constant_term(&self) -> Q {
        self.coeff(&vec![0; self.vars.len()])
    }

    pub fn add_term(&mut self, e: Exps, c: Q) {
        debug_assert_eq!(e.len(), self.vars.len());
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// Total degree; `None` stands for the zero polynomial (degree −∞).
    pub fn tdeg(&self) -> Option<u32> {
        self.terms.keys().map(|e| exps_degree(e)).max()
    }

    pub fn degree_in(&self, i: usize) -> Option<u32> {
        self.terms.keys().map(|e| e[i]).max()
    }

    /// Leading term under the graded lexicographic order.
    pub fn leading_term(&self) -> Option<(&Exps, &Q)> {
        self.terms.iter().max_by(|a, b| grlex_cmp(a.0, b.0))
    }

    pub fn leading_coeff(&self) -> Option<&Q> {
        self.leading_term().map(|(_, c)| c)
    }

    /// `self += c * x^shift * other`.
    pub fn add_scaled(&mut self, other: &Polynomial, c: &Q, shift: Option<&[u32]>) {
        if c.is_zero() {
            return;
        }
        for (e, d) in &other.terms {
            let e2 = match shift {
                Some(s) => e.iter().zip(s).map(|(a, b)| a + b).collect(),
                None => e.clone(),
            };
            self.add_term(e2, c * d);
        }
    }

    pub fn scale(&self, c: &Q) -> Polynomial {
        if c.is_zero() {
            return Self::zero(&self.vars);
        }
        Polynomial {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, d)| (e.clone(), d * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, shift: &[u32], c: &Q) -> Polynomial {
        let mut out = Self::zero(&self.vars);
        out.add_scaled(self, c, Some(shift));
        out
    }

    pub fn pow(&self, k: u32) -> Polynomial {
        let mut result = Self::one(&self.vars);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        result
    }

    pub fn derivative(&self, i: usize) -> Polynomial {
        let mut out = Self::zero(&self.vars);
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut e2 = e.clone();
                e2[i] -= 1;
                out.add_term(e2, c * q_int(e[i] as i64));
            }
        }
        out
    }

    /// Mixed partial derivative `∂^mu`.
    pub fn derivative_multi(&self, mu: &[u32]) -> Polynomial {
        let mut out = Self::zero(&self.vars);
        'terms: for (e, c) in &self.terms {
            let mut e2 = e.clone();
            let mut factor = BigInt::one();
            for (i, &m) in mu.iter().enumerate() {
                if e[i] < m {
                    continue 'terms;
                }
                for k in 0..m {
                    factor *= BigInt::from(e[i] - k);
                }
                e2[i] -= m;
            }
            out.add_term(e2, c * Q::from_integer(factor));
        }
        out
    }

    pub fn eval(&self, point: &[Q]) -> Q {
        let mut acc = Q::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (x, &k) in point.iter().zip(e) {
                if k > 0 {
                    t *= num_traits::pow(x.clone(), k as usize);
                }
            }
            acc += t;
        }
        acc
    }

    /// Composition: variable `i` is replaced by `images[i]`; all images share one variable list.
    pub fn substitute(&self, images: &[Polynomial], target: &Vars) -> Polynomial {
        assert_eq!(images.len(), self.vars.len());
        let mut powers: Vec<Vec<Polynomial>> = images.iter().map(|p| vec![Polynomial::one(&p.vars)]).collect();
        let mut out = Polynomial::zero(target);
        for (e, c) in &self.terms {
            let mut t = Polynomial::constant(target, c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                while powers[i].len() <= k as usize {
                    let next = powers[i].last().unwrap() * &images[i];
                    powers[i].push(next);
                }
                t = &t * &powers[i][k as usize];
            }
            out = &out + &t;
        }
        out
    }

    /// Re-express over a larger (or permuted) variable list: source variable `i` becomes target `map[i]`.
    pub fn embed(&self, target: &Vars, map: &[usize]) -> Polynomial {
        Polynomial {
            vars: target.clone(),
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut e2 = vec![0; target.len()];
                    for (i, &k) in e.iter().enumerate() {
                        e2[map[i]] += k;
                    }
                    (e2, c.clone())
                })
                .collect(),
        }
    }

    /// Drop variables whose exponent is identically zero; `keep[i]` is the target index or `None`.
    pub fn restrict(&self, target: &Vars, keep: &[Option<usize>]) -> Option<Polynomial> {
        let mut out = Polynomial::zero(target);
        for (e, c) in &self.terms {
            let mut e2 = vec![0; target.len()];
            for (i, &k) in e.iter().enumerate() {
                match keep[i] {
                    Some(j) => e2[j] = k,
                    None if k > 0 => return None,
                    None => {}
                }
            }
            out.add_term(e2, c.clone());
        }
        Some(out)
    }

    /// Exact division; `None` if `d` does not divide `self`.
    pub fn div_exact(&self, d: &Polynomial) -> Option<Polynomial> {
        assert!(!d.is_zero(), "division by zero polynomial");
        if self.is_zero() {
            return Some(Polynomial::zero(&self.vars));
        }
        if let Some(c) = d.as_constant() {
            return Some(self.scale(&c.recip()));
        }
        let (lde, ldc) = d.leading_term().map(|(e, c)| (e.clone(), c.clone())).unwrap();
        let ldc_inv = ldc.recip();
        let mut rem = self.clone();
        let mut quot = Polynomial::zero(&self.vars);
        while let Some((re, rc)) = rem.leading_term().map(|(e, c)| (e.clone(), c.clone())) {
            if re.iter().zip(&lde).any(|(a, b)| a < b) {
                return None;
            }
            let shift: Exps = re.iter().zip(&lde).map(|(a, b)| a - b).collect();
            let q = &rc * &ldc_inv;
            rem.add_scaled(d, &(-&q), Some(&shift));
            quot.add_term(shift, q);
        }
        Some(quot)
    }

    /// Positive rational content: gcd of numerators over lcm of denominators.
    pub fn content(&self) -> Q {
        let mut num = BigInt::zero();
        let mut den = BigInt::one();
        for c in self.terms.values() {
            num = num.gcd(c.numer());
            den = den.lcm(c.denom());
        }
        if num.is_zero() {
            Q::zero()
        } else {
            Q::new(num, den)
        }
    }

    /// `self = c * prim` with `prim` integral, coprime and of positive leading coefficient.
    pub fn primitive(&self) -> (Q, Polynomial) {
        if self.is_zero() {
            return (Q::zero(), self.clone());
        }
        let mut c = self.content();
        if self.leading_coeff().unwrap().is_negative() {
            c = -c;
        }
        (c.clone(), self.scale(&c.recip()))
    }

    /// Componentwise minimum exponent over all terms.
    pub fn monomial_content(&self) -> Exps {
        let mut m: Option<Exps> = None;
        for e in self.terms.keys() {
            m = Some(match m {
                None => e.clone(),
                Some(m) => m.iter().zip(e).map(|(a, b)| *a.min(b)).collect(),
            });
        }
        m.unwrap_or_else(|| vec![0; self.vars.len()])
    }

    pub fn div_monomial(&self, m: &[u32]) -> Polynomial {
        Polynomial {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.iter().zip(m).map(|(a, b)| a - b).collect(), c.clone()))
                .collect(),
        }
    }

    /// Index of the only variable occurring, if at most one does.
    pub fn univariate_var(&self) -> Option<Option<usize>> {
        let mut found: Option<usize> = None;
        for e in self.terms.keys() {
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    match found {
                        None => found = Some(i),
                        Some(j) if j != i => return None,
                        _ => {}
                    }
                }
            }
        }
        Some(found)
    }

    pub fn is_variable(&self) -> Option<usize> {
        if self.terms.len() != 1 {
            return None;
        }
        let (e, c) = self.terms.iter().next().unwrap();
        if !c.is_one() || exps_degree(e) != 1 {
            return None;
        }
        e.iter().position(|&k| k == 1)
    }

    pub fn max_abs_coeff_bits(&self) -> u64 {
        self.terms
            .values()
            .map(|c| c.numer().bits().max(c.denom().bits()))
            .max()
            .unwrap_or(0)
    }

    pub fn to_json(&self) -> Value {
        let mut terms: Vec<(&Exps, &Q)> = self.terms.iter().collect();
        terms.sort_by(|a, b| grlex_cmp(b.0, a.0));
        Value::Array(
            terms
                .into_iter()
                .map(|(e, c)| json!([q_to_string(c), e]))
                .collect(),
        )
    }

    pub fn from_json(v: &Value, vars: &Vars, path: &str) -> Result<Polynomial> {
        let arr = v
            .as_array()
            .ok_or_else(|| Error::parse(path, "expected a term list [[c, [e..]], ...]"))?;
        let mut p = Polynomial::zero(vars);
        for (k, t) in arr.iter().enumerate() {
            let tp = format!("{path}[{k}]");
            let pair = t
                .as_array()
                .filter(|a| a.len() == 2)
                .ok_or_else(|| Error::parse(&tp, "expected [coefficient, exponents]"))?;
            let c = q_from_json(&pair[0], &tp)?;
            let e = exps_from_json(&pair[1], vars.len(), &tp)?;
            p.add_term(e, c);
        }
        Ok(p)
    }
}

/// Monic gcd of two univariate polynomials in variable `i` (all other exponents zero).
pub fn gcd_univariate(a: &Polynomial, b: &Polynomial, i: usize) -> Polynomial {
    let vars = a.vars().clone();
    let to_dense = |p: &Polynomial| -> Vec<Q> {
        let deg = p.degree_in(i).unwrap_or(0) as usize;
        let mut v = vec![Q::zero(); deg + 1];
        for (e, c) in p.terms() {
            v[e[i] as usize] = c.clone();
        }
        while v.len() > 1 && v.last().unwrap().is_zero() {
            v.pop();
        }
        v
    };
    let is_zero = |v: &Vec<Q>| v.iter().all(|c| c.is_zero());
    let mut x = to_dense(a);
    let mut y = to_dense(b);
    if is_zero(&x) {
        std::mem::swap(&mut x, &mut y);
    }
    while !is_zero(&y) {
        // x mod y
        let ly = y.last().unwrap().clone();
        while x.len() >= y.len() && !is_zero(&x) {
            let shift = x.len() - y.len();
            let q = x.last().unwrap() / &ly;
            for (k, c) in y.iter().enumerate() {
                x[k + shift] -= &q * c;
            }
            x.pop();
            while x.len() > 1 && x.last().unwrap().is_zero() {
                x.pop();
            }
        }
        if x.is_empty() {
            x.push(Q::zero());
        }
        std::mem::swap(&mut x, &mut y);
    }
    let lead = x.last().unwrap().clone();
    let mut out = Polynomial::zero(&vars);
    if lead.is_zero() {
        return out;
    }
    for (k, c) in x.iter().enumerate() {
        let mut e = vec![0; vars.len()];
        e[i] = k as u32;
        out.add_term(e, c / &lead);
    }
    out
}

impl<'a> Add<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        debug_assert_eq!(self.vars, rhs.vars);
        let (big, small) = if self.terms.len() >= rhs.terms.len() {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let mut out = big.clone();
        out.add_scaled(small, &Q::one(), None);
        out
    }
}

impl<'a> Sub<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        debug_assert_eq!(self.vars, rhs.vars);
        let mut out = self.clone();
        out.add_scaled(rhs, &-Q::one(), None);
        out
    }
}

impl<'a> Mul<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        debug_assert_eq!(self.vars, rhs.vars);
        let mut out = Polynomial::zero(&self.vars);
        if let Some(c) = rhs.as_constant() {
            return self.scale(&c);
        }
        if let Some(c) = self.as_constant() {
            return rhs.scale(&c);
        }
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let e: Exps = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(&-Q::one())
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut terms: Vec<(&Exps, &Q)> = self.terms.iter().collect();
        terms.sort_by(|a, b| grlex_cmp(b.0, a.0));
        for (k, (e, c)) in terms.into_iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| {
                    if k == 1 {
                        self.vars.name(i).to_string()
                    } else {
                        format!("{}^{}", self.vars.name(i), k)
                    }
                })
                .collect();
            if mono.is_empty() {
                write!(f, "{}", q_to_string(&a))?;
            } else if a.is_one() {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "{}*{}", q_to_string(&a), mono.join("*"))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xy() -> Vars {
        Vars::new(["x", "y"])
    }

    #[test]
    fn arithmetic_and_display() {
        let v = xy();
        let x = Polynomial::var(&v, 0);
        let y = Polynomial::var(&v, 1);
        let one = Polynomial::one(&v);
        let p = &(&one - &x) - &y;
        assert_eq!(p.to_string(), "-x - y + 1");
        let sq = &p * &p;
        assert_eq!(sq.tdeg(), Some(2));
        assert_eq!(sq.coeff(&[1, 1]), q_int(2));
        assert_eq!(sq.div_exact(&p), Some(p.clone()));
        assert_eq!(sq.div_exact(&x), None);
        assert_eq!(Polynomial::zero(&v).tdeg(), None);
    }

    #[test]
    fn derivative_and_substitution() {
        let v = xy();
        let x = Polynomial::var(&v, 0);
        let y = Polynomial::var(&v, 1);
        let p = &(&x * &x) * &y;
        assert_eq!(p.derivative(0), (&x * &y).scale(&q_int(2)));
        assert_eq!(p.derivative_multi(&[2, 1]), Polynomial::int(&v, 2));
        let s = p.substitute(&[y.clone(), x.clone()], &v);
        assert_eq!(s, &(&y * &y) * &x);
    }

    #[test]
    fn primitive_and_json_round_trip() {
        let v = xy();
        let p = Polynomial::from_terms(&v, [(vec![1, 0], q_frac(-2, 3)), (vec![0, 0], q_frac(4, 9))]);
        let (c, prim) = p.primitive();
        assert_eq!(c, q_frac(-2, 9));
        assert_eq!(prim.coeff(&[1, 0]), q_int(3));
        assert_eq!(prim.coeff(&[0, 0]), q_int(-2));
        let back = Polynomial::from_json(&p.to_json(), &v, "p").unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn univariate_gcd() {
        let v = Vars::new(["t"]);
        let t = Polynomial::var(&v, 0);
        let one = Polynomial::one(&v);
        let a = &(&t - &one) * &(&t + &one);
        let b = &(&t - &one) * &t;
        assert_eq!(gcd_univariate(&a, &b, 0), &t - &one);
    }
}
