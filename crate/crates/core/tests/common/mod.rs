#![allow(dead_code)]

use diagonal_core::algebra::{q_int, Exps, Polynomial, Vars, Q};
use diagonal_core::dfinite::DFiniteSystem;
use diagonal_core::series::{monomials_up_to, TruncatedSeries};
use num_bigint::BigInt;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Gen(ChaCha8Rng);

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.0.next_u64() % n
    }

    pub fn int(&mut self, lo: i64, hi: i64) -> i64 {
        lo + self.below((hi - lo + 1) as u64) as i64
    }

    pub fn nonzero(&mut self, lo: i64, hi: i64) -> i64 {
        loop {
            let x = self.int(lo, hi);
            if x != 0 {
                return x;
            }
        }
    }

    /// Up to `terms` random monomials of total degree `≤ deg`.
    pub fn poly(&mut self, vars: &Vars, deg: u32, terms: usize, c: i64) -> Polynomial {
        let monos = monomials_up_to(vars.len(), deg);
        let mut p = Polynomial::zero(vars);
        for _ in 0..terms {
            let e = monos[self.below(monos.len() as u64) as usize].clone();
            p.add_term(e, q_int(self.int(-c, c)));
        }
        p
    }

    /// Random exponent vector of total degree `≤ deg` and length `n`.
    pub fn exps(&mut self, n: usize, deg: u32) -> Exps {
        let monos = monomials_up_to(n, deg);
        monos[self.below(monos.len() as u64) as usize].clone()
    }

    /// Dense random integer series through total degree `valid`.
    pub fn series(&mut self, vars: &Vars, valid: u32, c: i64) -> TruncatedSeries {
        let coeffs: Vec<(Exps, Q)> = monomials_up_to(vars.len(), valid)
            .into_iter()
            .map(|e| (e, q_int(self.int(-c, c))))
            .collect();
        TruncatedSeries::new(vars, coeffs, valid)
    }

    /// `num/den` with `den(0) ≠ 0` and a non-zero numerator.
    pub fn rational_system(&mut self, vars: &Vars) -> DFiniteSystem {
        loop {
            let mut den = self.poly(vars, 2, 2, 2);
            let c0 = den.constant_term();
            den.add_term(vec![0; vars.len()], -c0 + q_int(self.nonzero(-2, 2)));
            let mut num = self.poly(vars, 1, 2, 2);
            if num.is_zero() {
                num = Polynomial::one(vars);
            }
            if let Ok(sys) = DFiniteSystem::from_rational(num, den) {
                return sys;
            }
        }
    }
}

pub fn vars(n: usize) -> Vars {
    Vars::new((1..=n).map(|i| format!("x{i}")))
}

/// `1/(1 − x1 − ⋯ − xn)`.
pub fn simplex(n: usize) -> DFiniteSystem {
    let v = vars(n);
    let mut den = Polynomial::one(&v);
    for i in 0..n {
        den = &den - &Polynomial::var(&v, i);
    }
    DFiniteSystem::from_rational(Polynomial::one(&v), den).unwrap()
}

/// `(2k)!/(k!)²` for `k < n`, by the ratio `2(2k+1)/(k+1)`.
pub fn central_binomials(n: usize) -> Vec<BigInt> {
    let mut out = Vec::with_capacity(n);
    let mut c = BigInt::from(1);
    for k in 0..n as u64 {
        out.push(c.clone());
        c = c * BigInt::from(2 * (2 * k + 1)) / BigInt::from(k + 1);
    }
    out
}

/// Univariate series over `vars` with the given coefficients, valid through `len − 1`.
pub fn univariate(vars: &Vars, coeffs: &[BigInt]) -> TruncatedSeries {
    TruncatedSeries::new(
        vars,
        coeffs.iter().enumerate().map(|(k, c)| (vec![k as u32], Q::from_integer(c.clone()))),
        coeffs.len() as u32 - 1,
    )
}

/// `a` and `b` agree on every coefficient both know.
pub fn agree(a: &TruncatedSeries, b: &TruncatedSeries) -> bool {
    let v = a.valid().min(b.valid());
    a.truncate(v) == b.truncate(v)
}

pub fn binom(n: u64, k: u64) -> BigInt {
    let mut acc = BigInt::from(1);
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}
