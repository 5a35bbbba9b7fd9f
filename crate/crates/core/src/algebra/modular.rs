//! Arithmetic modulo the Mersenne prime 2^61 − 1, used for rank profiles and cheap filters.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::polynomial::{Polynomial, Q};

pub const P: u64 = (1u64 << 61) - 1;

#[inline]
pub fn add(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= P {
        s - P
    } else {
        s
    }
}

#[inline]
pub fn sub(a: u64, b: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + P - b
    }
}

#[inline]
pub fn mul(a: u64, b: u64) -> u64 {
    let prod = (a as u128) * (b as u128);
    let lo = (prod as u64) & P;
    let hi = (prod >> 61) as u64;
    add(lo, hi)
}

pub fn pow(mut a: u64, mut e: u64) -> u64 {
    let mut r = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            r = mul(r, a);
        }
        a = mul(a, a);
        e >>= 1;
    }
    r
}

pub fn inv(a: u64) -> u64 {
    assert!(a != 0, "inverse of zero mod p");
    pow(a, P - 2)
}

pub fn reduce_int(n: &BigInt) -> u64 {
    let m: BigInt = n.mod_floor(&BigInt::from(P));
    m.to_u64().unwrap()
}

/// Image of a rational; `None` if the denominator vanishes mod p.
pub fn reduce_q(c: &Q) -> Option<u64> {
    let d = reduce_int(c.denom());
    if d == 0 {
        return None;
    }
    Some(mul(reduce_int(c.numer()), inv(d)))
}

/// Evaluate at a point given by residues; `None` on a bad denominator.
pub fn eval_poly(p: &Polynomial, point: &[u64]) -> Option<u64> {
    let mut acc = 0u64;
    for (e, c) in p.terms() {
        let mut t = reduce_q(c)?;
        for (x, &k) in point.iter().zip(e) {
            if k > 0 {
                t = mul(t, pow(*x, k as u64));
            }
        }
        acc = add(acc, t);
    }
    Some(acc)
}

/// Deterministic source of random residues.
pub struct Sampler(ChaCha8Rng);

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn residue(&mut self) -> u64 {
        loop {
            let v = self.0.next_u64() & P;
            if v != 0 && v != P {
                return v;
            }
        }
    }

    pub fn point(&mut self, n: usize) -> Vec<u64> {
        (0..n).map(|_| self.residue()).collect()
    }
}

/// Dense univariate polynomial mod p, low degree first.
fn trim(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

/// Specialize every variable except `main` at `point`, giving a dense univariate image.
pub fn univariate_image(p: &Polynomial, main: usize, point: &[u64]) -> Option<Vec<u64>> {
    let deg = p.degree_in(main).unwrap_or(0) as usize;
    let mut v = vec![0u64; deg + 1];
    for (e, c) in p.terms() {
        let mut t = reduce_q(c)?;
        for (i, (&x, &k)) in point.iter().zip(e).enumerate() {
            if i != main && k > 0 {
                t = mul(t, pow(x, k as u64));
            }
        }
        let slot = &mut v[e[main] as usize];
        *slot = add(*slot, t);
    }
    trim(&mut v);
    Some(v)
}

/// Whether `b` can divide `a`, tested on a random line; `false` is definitive.
pub fn may_divide(b: &Polynomial, a: &Polynomial, point: &[u64]) -> bool {
    if a.is_zero() {
        return true;
    }
    let main = match (0..b.vars().len()).find(|&i| b.degree_in(i).unwrap_or(0) > 0) {
        Some(i) => i,
        None => return true,
    };
    let db = b.degree_in(main).unwrap() as usize;
    let (bu, au) = match (univariate_image(b, main, point), univariate_image(a, main, point)) {
        (Some(x), Some(y)) => (x, y),
        _ => return true,
    };
    if bu.len() != db + 1 {
        return true;
    }
    if au.len() < bu.len() {
        return au.is_empty();
    }
    let mut r = au;
    let lb = inv(*bu.last().unwrap());
    while r.len() >= bu.len() {
        let shift = r.len() - bu.len();
        let q = mul(*r.last().unwrap(), lb);
        for (k, &c) in bu.iter().enumerate() {
            r[k + shift] = sub(r[k + shift], mul(q, c));
        }
        r.pop();
        trim(&mut r);
        if r.is_empty() {
            break;
        }
    }
    r.iter().all(|x| x.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::polynomial::{q_frac, Vars};

    #[test]
    fn field_laws() {
        let a = 123_456_789_012_345u64;
        assert_eq!(mul(a, inv(a)), 1);
        assert_eq!(sub(add(a, 5), 5), a);
        let half = reduce_q(&q_frac(1, 2)).unwrap();
        assert_eq!(mul(half, 2), 1);
    }

    #[test]
    fn divisibility_filter() {
        let v = Vars::new(["x", "y"]);
        let x = Polynomial::var(&v, 0);
        let y = Polynomial::var(&v, 1);
        let one = Polynomial::one(&v);
        let b = &(&one - &x) - &y;
        let a = &b * &(&x + &y);
        let pt = Sampler::new(7).point(2);
        assert!(may_divide(&b, &a, &pt));
        assert!(!may_divide(&b, &(&a + &one), &pt));
    }
}
