//! Truncated Laurent data for substituted series such as `(1/s) f(s, t/s, x3, ..)`.
//!
//! Validity is measured by a positive integer weight per variable: every coefficient
//! of weight `≤ valid` is exact. With the weights chosen so that each substituted
//! source variable has weight 1, a total-degree truncation of `f` maps to a weight
//! truncation, and derivatives and multiplications shift the bound predictably.

use std::collections::BTreeMap;

use num_traits::Zero;

use super::TruncatedSeries;
use crate::algebra::{Polynomial, Vars, Q};
use crate::error::{Error, Result};

pub type LExps = Vec<i64>;

#[derive(Clone, Debug, PartialEq)]
pub struct LaurentSeries {
    vars: Vars,
    weights: Vec<i64>,
    coeffs: BTreeMap<LExps, Q>,
    valid: i64,
}

fn weight_of(weights: &[i64], e: &[i64]) -> i64 {
    weights.iter().zip(e).map(|(w, k)| w * k).sum()
}

impl LaurentSeries {
    pub fn new(vars: &Vars, weights: Vec<i64>, coeffs: impl IntoIterator<Item = (LExps, Q)>, valid: i64) -> Self {
        assert_eq!(weights.len(), vars.len());
        assert!(weights.iter().all(|&w| w > 0), "weights must be positive");
        let mut map = BTreeMap::new();
        for (e, c) in coeffs {
            if weight_of(&weights, &e) <= valid && !c.is_zero() {
                *map.entry(e).or_insert_with(Q::zero) += c;
            }
        }
        map.retain(|_, c: &mut Q| !c.is_zero());
        LaurentSeries {
            vars: vars.clone(),
            weights,
            coeffs: map,
            valid,
        }
    }

    /// `x^prefactor · f(images)`: source variable `i` becomes the Laurent monomial
    /// `images[i]`, each of weight exactly 1.
    pub fn substitute(
        f: &TruncatedSeries,
        target: &Vars,
        weights: Vec<i64>,
        images: &[LExps],
        prefactor: &[i64],
    ) -> Result<Self> {
        if images.len() != f.vars().len() {
            return Err(Error::InvalidArgument("one image per source variable".into()));
        }
        if images.iter().any(|im| weight_of(&weights, im) != 1) {
            return Err(Error::InvalidArgument("substitution images must have weight 1".into()));
        }
        let pre = weight_of(&weights, prefactor);
        let n = target.len();
        let mut coeffs = Vec::new();
        for (e, c) in f.coeffs() {
            let mut out = prefactor.to_vec();
            for (i, &k) in e.iter().enumerate() {
                for j in 0..n {
                    out[j] += images[i][j] * k as i64;
                }
            }
            coeffs.push((out, c.clone()));
        }
        Ok(Self::new(target, weights, coeffs, f.valid() as i64 + pre))
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn valid(&self) -> i64 {
        self.valid
    }

    pub fn coeff(&self, e: &[i64]) -> Q {
        self.coeffs.get(e).cloned().unwrap_or_else(Q::zero)
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&LExps, &Q)> {
        self.coeffs.iter()
    }

    pub fn derivative(&self, i: usize) -> LaurentSeries {
        let coeffs = self.coeffs.iter().filter(|(e, _)| e[i] != 0).map(|(e, c)| {
            let mut e2 = e.clone();
            e2[i] -= 1;
            (e2, c * Q::from_integer(e[i].into()))
        });
        Self::new(&self.vars, self.weights.clone(), coeffs, self.valid - self.weights[i])
    }

    /// Multiply by a Laurent polynomial `Σ c x^e`.
    pub fn mul_laurent(&self, terms: &[(LExps, Q)]) -> LaurentSeries {
        if terms.is_empty() {
            return Self::new(&self.vars, self.weights.clone(), Vec::new(), self.valid);
        }
        let min_w = terms.iter().map(|(e, _)| weight_of(&self.weights, e)).min().unwrap();
        let valid = self.valid + min_w;
        let mut acc: BTreeMap<LExps, Q> = BTreeMap::new();
        for (a, c) in terms {
            for (e, v) in &self.coeffs {
                let k: LExps = a.iter().zip(e).map(|(x, y)| x + y).collect();
                if weight_of(&self.weights, &k) <= valid {
                    *acc.entry(k).or_insert_with(Q::zero) += c * v;
                }
            }
        }
        Self::new(&self.vars, self.weights.clone(), acc, valid)
    }

    pub fn mul_poly(&self, p: &Polynomial) -> LaurentSeries {
        let terms: Vec<(LExps, Q)> = p
            .terms()
            .map(|(e, c)| (e.iter().map(|&k| k as i64).collect(), c.clone()))
            .collect();
        self.mul_laurent(&terms)
    }

    pub fn add(&self, o: &LaurentSeries) -> LaurentSeries {
        let valid = self.valid.min(o.valid);
        Self::new(
            &self.vars,
            self.weights.clone(),
            self.coeffs.iter().chain(o.coeffs.iter()).map(|(e, c)| (e.clone(), c.clone())),
            valid,
        )
    }

    pub fn sub(&self, o: &LaurentSeries) -> LaurentSeries {
        let neg = Self::new(
            &o.vars,
            o.weights.clone(),
            o.coeffs.iter().map(|(e, c)| (e.clone(), -c)),
            o.valid,
        );
        self.add(&neg)
    }

    /// Whether all exact coefficients are zero.
    pub fn vanishes(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficientwise equality on the common validity window.
    pub fn agrees_with(&self, o: &LaurentSeries) -> bool {
        self.sub(o).vanishes()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::q_int;

    #[test]
    fn sigma_of_geometric_series() {
        let v = Vars::new(["x1", "x2"]);
        let one = Polynomial::one(&v);
        let den = &(&one - &Polynomial::var(&v, 0)) - &Polynomial::var(&v, 1);
        let f = TruncatedSeries::expand_rational(&one, &den, 6).unwrap();
        let st = Vars::new(["s", "t"]);
        let g = LaurentSeries::substitute(&f, &st, vec![1, 2], &[vec![1, 0], vec![-1, 1]], &[-1, 0]).unwrap();
        assert_eq!(g.valid(), 5);
        // the s^{-1} coefficient collects the diagonal a_{kk} t^k
        assert_eq!(g.coeff(&[-1, 1]), q_int(2));
        assert_eq!(g.coeff(&[-1, 2]), q_int(6));
        let d = g.derivative(1);
        assert_eq!(d.valid(), 3);
        assert_eq!(d.coeff(&[-1, 0]), q_int(2));
    }
}
