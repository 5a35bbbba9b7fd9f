//! Exact arithmetic in `Q(√37)`, enough to evaluate the eigenvalue closed forms.

use std::ops::{Add, Mul, Sub};

use num_traits::{One, Zero};

use crate::algebra::{q_frac, q_int, Q};

/// `a + b√37`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QSqrt37 {
    pub a: Q,
    pub b: Q,
}

impl QSqrt37 {
    pub fn new(a: Q, b: Q) -> Self {
        QSqrt37 { a, b }
    }

    pub fn rational(a: Q) -> Self {
        QSqrt37 { a, b: Q::zero() }
    }

    pub fn one() -> Self {
        Self::rational(Q::one())
    }

    /// `(7 + √37)/2`, the larger root of `λ² − 7λ + 3`.
    pub fn lambda1() -> Self {
        QSqrt37::new(q_frac(7, 2), q_frac(1, 2))
    }

    pub fn lambda2() -> Self {
        QSqrt37::new(q_frac(7, 2), q_frac(-1, 2))
    }

    /// `c/√37 = (c/37)√37`.
    pub fn over_sqrt(c: Q) -> Self {
        QSqrt37::new(Q::zero(), c / q_int(37))
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    pub fn as_rational(&self) -> Option<&Q> {
        self.b.is_zero().then_some(&self.a)
    }
}

impl Add for &QSqrt37 {
    type Output = QSqrt37;
    fn add(self, o: &QSqrt37) -> QSqrt37 {
        QSqrt37::new(&self.a + &o.a, &self.b + &o.b)
    }
}

impl Sub for &QSqrt37 {
    type Output = QSqrt37;
    fn sub(self, o: &QSqrt37) -> QSqrt37 {
        QSqrt37::new(&self.a - &o.a, &self.b - &o.b)
    }
}

impl Mul for &QSqrt37 {
    type Output = QSqrt37;
    fn mul(self, o: &QSqrt37) -> QSqrt37 {
        QSqrt37::new(
            &self.a * &o.a + &self.b * &o.b * q_int(37),
            &self.a * &o.b + &self.b * &o.a,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalues_satisfy_the_characteristic_polynomial() {
        for l in [QSqrt37::lambda1(), QSqrt37::lambda2()] {
            let seven_l = &QSqrt37::rational(q_int(7)) * &l;
            let v = &(&(&l * &l) - &seven_l) + &QSqrt37::rational(q_int(3));
            assert_eq!(v.as_rational(), Some(&Q::zero()));
        }
    }
}
