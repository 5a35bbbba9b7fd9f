//! `D_s^i D_t^j σ(f)` as coordinates over `{σ(D^β f) : β ∈ B}`.
//!
//! Both substitutions are instances of one chain: the first `L` source variables map as
//! `x_1 ↦ v_0` and `x_{k+1} ↦ v_k/v_{k−1}`, the remaining variables are left alone. `σ = τ / (v_0 ⋯ v_{L−2})`. The primary
//! substitution is the chain of length 2, the complete one the chain of length `n`.

use std::collections::BTreeMap;

use crate::algebra::rational::MonomialMap;
use crate::algebra::{Exps, Polynomial, RationalFunction, Vars};
use crate::dfinite::{Coeffs, DFiniteSystem, ReductionData};
use crate::error::{Error, Result};
use crate::series::{LaurentSeries, TruncatedSeries};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// `x1 ↦ s`, `x2 ↦ t/s`.
    Primary,
    /// `x1 ↦ s1`, `x_i ↦ s_i/s_{i−1}`, `x_n ↦ t/s_{n−1}`.
    Complete,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Primary => "primary",
            Mode::Complete => "complete",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SigmaState {
    /// `β ↦ coefficient`, in the substituted variables.
    pub coords: BTreeMap<Exps, RationalFunction>,
    /// Exponents of the derivatives applied so far, one per substituted variable.
    pub word: Exps,
}

impl SigmaState {
    /// Common denominator of all coordinates, as normalized bases with exponents.
    pub fn denominator(&self) -> Vec<(Polynomial, u32)> {
        let mut out: Vec<(Polynomial, u32)> = Vec::new();
        for c in self.coords.values() {
            lcm_into(&mut out, c.den_factors());
        }
        out
    }
}

pub(crate) fn lcm_into(acc: &mut Vec<(Polynomial, u32)>, factors: &[(Polynomial, u32)]) {
    for (b, e) in factors {
        match acc.iter_mut().find(|(x, _)| x == b) {
            Some(slot) => slot.1 = slot.1.max(*e),
            None => acc.push((b.clone(), *e)),
        }
    }
}

fn add_into(acc: &mut BTreeMap<Exps, RationalFunction>, key: &Exps, c: RationalFunction) {
    if c.is_zero() {
        return;
    }
    let s = match acc.get(key) {
        Some(old) => old.add(&c),
        None => c,
    };
    if s.is_zero() {
        acc.remove(key);
    } else {
        acc.insert(key.clone(), s);
    }
}

pub struct SigmaContext {
    mode: Mode,
    chain: usize,
    source: Vars,
    target: Vars,
    data: ReductionData,
    tau: MonomialMap,
    basis: Vec<Exps>,
    /// `τ(red(β + e_j))` for `β ∈ B` and `j` in the reduction set.
    lifted: BTreeMap<(Exps, usize), Coeffs>,
}

fn fresh(name: &str, taken: &[String]) -> String {
    let mut s = name.to_string();
    while taken.iter().any(|x| *x == s) {
        s.push('_');
    }
    s
}

impl SigmaContext {
    /// `spectator`: zero-based index `h ≥ 2` of an extra derivation direction (primary only).
    pub fn new(sys: &DFiniteSystem, mode: Mode, spectator: Option<usize>) -> Result<Self> {
        let n = sys.n();
        if n < 2 {
            return Err(Error::InvalidArgument("substitution needs at least two variables".into()));
        }
        let chain = match mode {
            Mode::Primary => 2,
            Mode::Complete => n,
        };
        if let Some(h) = spectator {
            if mode != Mode::Primary || h < 2 || h >= n {
                return Err(Error::InvalidArgument(format!("no spectator direction {h} in {} mode", mode.name())));
            }
        }
        let source = sys.vars().clone();
        let rest: Vec<String> = source.names()[chain..].to_vec();
        let mut names: Vec<String> = match mode {
            Mode::Primary => vec![fresh("s", &rest)],
            Mode::Complete => (1..n).map(|i| fresh(&format!("s{i}"), &rest)).collect(),
        };
        names.push(fresh("t", &rest));
        names.extend(rest);
        let target = Vars::new(names);

        let mut images = Vec::with_capacity(n);
        for i in 0..n {
            let mut e = vec![0i64; n];
            if i < chain {
                e[i] = 1;
                if i > 0 {
                    e[i - 1] = -1;
                }
            } else {
                e[i] = 1;
            }
            images.push(e);
        }
        let tau = MonomialMap { target: target.clone(), images };

        let mut set: Vec<usize> = (0..chain).collect();
        set.extend(spectator);
        let data = ReductionData::new(sys, &set)?;
        let basis = data.basis();
        let mut lifted = BTreeMap::new();
        for beta in &basis {
            for &j in &set {
                let mut a = beta.clone();
                a[j] += 1;
                let red = data.reduce_to_box(&a)?;
                let img: Coeffs = red.iter().map(|(g, c)| (g.clone(), c.substitute_monomials(&tau))).collect();
                lifted.insert((beta.clone(), j), img);
            }
        }
        Ok(SigmaContext {
            mode,
            chain,
            source,
            target,
            data,
            tau,
            basis,
            lifted,
        })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Number of substituted chain variables: `L − 1` of them are `s`-variables.
    pub fn chain(&self) -> usize {
        self.chain
    }

    pub fn source(&self) -> &Vars {
        &self.source
    }

    pub fn target(&self) -> &Vars {
        &self.target
    }

    pub fn basis(&self) -> &[Exps] {
        &self.basis
    }

    pub fn reduction(&self) -> &ReductionData {
        &self.data
    }

    pub fn tau(&self) -> &MonomialMap {
        &self.tau
    }

    /// Indices of the `s`-variables among the substituted variables.
    pub fn s_vars(&self) -> std::ops::Range<usize> {
        0..self.chain - 1
    }

    pub fn t_var(&self) -> usize {
        self.chain - 1
    }

    /// Directions whose derivatives the context can propagate.
    pub fn directions(&self) -> Vec<usize> {
        let mut d: Vec<usize> = (0..self.chain).collect();
        d.extend(self.data.set().iter().copied().filter(|&j| j >= self.chain));
        d
    }

    /// The state of `σ(f)` itself.
    pub fn init(&self) -> SigmaState {
        let zero = vec![0u32; self.source.len()];
        let mut coords = BTreeMap::new();
        coords.insert(zero, RationalFunction::one(&self.target));
        SigmaState {
            coords,
            word: vec![0; self.target.len()],
        }
    }

    fn var(&self, k: usize) -> RationalFunction {
        RationalFunction::from_poly(Polynomial::var(&self.target, k))
    }

    fn recip_var(&self, k: usize) -> RationalFunction {
        RationalFunction::one(&self.target)
            .div_poly(&Polynomial::var(&self.target, k))
            .expect("variables are non-zero")
    }

    /// `D_k σ(g) = Σ m · σ(D_j g)`, as `(m, j)` pairs (`j = None` for `σ(g)` itself).
    fn rule(&self, k: usize) -> Vec<(RationalFunction, Option<usize>)> {
        let l = self.chain;
        if k + 1 < l {
            let first = if k == 0 {
                RationalFunction::one(&self.target)
            } else {
                self.recip_var(k - 1)
            };
            let third = self.var(k + 1).mul(&self.recip_var(k)).mul(&self.recip_var(k)).neg();
            vec![(self.recip_var(k).neg(), None), (first, Some(k)), (third, Some(k + 1))]
        } else if k + 1 == l {
            vec![(self.recip_var(k - 1), Some(k))]
        } else {
            vec![(RationalFunction::one(&self.target), Some(k))]
        }
    }

    pub fn propagate(&self, st: &SigmaState, k: usize) -> Result<SigmaState> {
        if !self.directions().contains(&k) {
            return Err(Error::InvalidArgument(format!(
                "cannot differentiate along {} in this context",
                self.target.name(k)
            )));
        }
        let rule = self.rule(k);
        let mut out: BTreeMap<Exps, RationalFunction> = BTreeMap::new();
        for (beta, c) in &st.coords {
            add_into(&mut out, beta, c.derivative(k));
            for (m, j) in &rule {
                let cm = c.mul(m);
                match j {
                    None => add_into(&mut out, beta, cm),
                    Some(j) => {
                        let img = self
                            .lifted
                            .get(&(beta.clone(), *j))
                            .ok_or_else(|| Error::Internal(format!("no reduction for D_{} of {beta:?}", j + 1)))?;
                        for (g, a) in img {
                            add_into(&mut out, g, cm.mul(a));
                        }
                    }
                }
            }
        }
        let mut word = st.word.clone();
        word[k] += 1;
        Ok(SigmaState { coords: out, word })
    }

    /// Weights making every substituted source variable weight 1.
    pub fn weights(&self) -> Vec<i64> {
        (0..self.target.len())
            .map(|k| if k < self.chain { k as i64 + 1 } else { 1 })
            .collect()
    }

    /// `σ(g)` as Laurent data.
    pub fn sigma_series(&self, g: &TruncatedSeries) -> Result<LaurentSeries> {
        let mut pre = vec![0i64; self.target.len()];
        for k in self.s_vars() {
            pre[k] = -1;
        }
        LaurentSeries::substitute(g, &self.target, self.weights(), &self.tau.images, &pre)
    }

    /// `(A·Σ c_β σ(D^β f), A·D^word σ(f))` with `A` the state's common denominator;
    /// both sides must agree on the common window.
    pub fn bridge(&self, st: &SigmaState, f: &TruncatedSeries) -> Result<(LaurentSeries, LaurentSeries)> {
        let den = st.denominator();
        let mut a = Polynomial::one(&self.target);
        for (b, e) in &den {
            a = &a * &b.pow(*e);
        }
        let mut lhs: Option<LaurentSeries> = None;
        for (beta, c) in &st.coords {
            let cleared = c
                .clear_with(&den)
                .ok_or_else(|| Error::Internal("common denominator does not clear a coordinate".into()))?;
            let mut g = f.clone();
            for (i, &k) in beta.iter().enumerate() {
                for _ in 0..k {
                    g = g.derivative(i)?;
                }
            }
            let term = self.sigma_series(&g)?.mul_poly(&cleared);
            lhs = Some(match lhs {
                None => term,
                Some(x) => x.add(&term),
            });
        }
        let mut rhs = self.sigma_series(f)?;
        for (k, &m) in st.word.iter().enumerate() {
            for _ in 0..m {
                rhs = rhs.derivative(k);
            }
        }
        let rhs = rhs.mul_poly(&a);
        let lhs = lhs.unwrap_or_else(|| rhs.mul_laurent(&[]));
        Ok((lhs, rhs))
    }
}
