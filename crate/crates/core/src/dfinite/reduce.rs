//! Rewriting `D^α f` onto the box `B = Π_{j∈S} {0..r_j−1}` over `K(x)`.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use super::DFiniteSystem;
use crate::algebra::rational::{normalize, Factors};
use crate::algebra::{binomial, Exps, Polynomial, RationalFunction, Vars, Q};
use crate::error::{Error, Result};
use crate::weyl::DiffOperator;

/// Coordinates `β ↦ c_β` over the box, exponent vectors of full length `n`.
pub type Coeffs = BTreeMap<Exps, RationalFunction>;

#[derive(Clone, Debug)]
pub struct Reduction {
    pub coeffs: Coeffs,
    /// `C^{|α|} c_β`, all polynomials.
    pub certificate: BTreeMap<Exps, Polynomial>,
    pub weight: u32,
}

#[derive(Debug)]
pub struct ReductionData {
    vars: Vars,
    set: Vec<usize>,
    orders: Vec<u32>,
    /// `tails[j][k] = −ℓ_{j,k} / ℓ_{j,r_j}`
    tails: Vec<Vec<RationalFunction>>,
    c_factors: Factors,
    c: Polynomial,
    d_c: u32,
    ltilde: Vec<Option<DiffOperator>>,
    memo: Mutex<HashMap<Exps, Arc<Coeffs>>>,
    tail_memo: Mutex<HashMap<(usize, Exps), Arc<Coeffs>>>,
}

fn add_into(acc: &mut Coeffs, key: Exps, c: RationalFunction) {
    if c.is_zero() {
        return;
    }
    use std::collections::btree_map::Entry;
    match acc.entry(key) {
        Entry::Vacant(v) => {
            v.insert(c);
        }
        Entry::Occupied(mut o) => {
            let s = o.get().add(&c);
            if s.is_zero() {
                o.remove();
            } else {
                *o.get_mut() = s;
            }
        }
    }
}

fn derivative_multi(c: &RationalFunction, mu: &[u32]) -> RationalFunction {
    let mut d = c.clone();
    for (i, &m) in mu.iter().enumerate() {
        for _ in 0..m {
            d = d.derivative(i);
        }
    }
    d
}

impl ReductionData {
    pub fn new(sys: &DFiniteSystem, set: &[usize]) -> Result<Self> {
        let n = sys.n();
        let mut set = set.to_vec();
        set.sort_unstable();
        set.dedup();
        if set.is_empty() || set.iter().any(|&j| j >= n) {
            return Err(Error::InvalidArgument(format!("reduction set {set:?} is not a non-empty subset of 0..{n}")));
        }
        let vars = sys.vars().clone();
        let mut orders = vec![0u32; n];
        let mut tails = vec![Vec::new(); n];
        let mut c_factors: Factors = Vec::new();
        let mut d_c = 0;
        for &j in &set {
            let r = sys.orders()[j];
            orders[j] = r;
            d_c += sys.degrees()[j];
            let lead = sys.leading(j);
            tails[j] = (0..r)
                .map(|k| {
                    RationalFunction::new(sys.coeff(j, k).scale(&-Q::from_integer(1.into())), &lead)
                        .expect("leading coefficient is non-zero")
                })
                .collect();
            let (_, f) = normalize(&lead);
            for (b, e) in f {
                match c_factors.iter_mut().find(|(x, _)| *x == b) {
                    Some(slot) => slot.1 = slot.1.max(e),
                    None => c_factors.push((b, e)),
                }
            }
        }
        let mut c = Polynomial::one(&vars);
        for (b, e) in &c_factors {
            c = &c * &b.pow(*e);
        }
        if c.tdeg().unwrap_or(0) > d_c {
            return Err(Error::BoundViolated(format!("tdeg(C) = {:?} exceeds d_C = {d_c}", c.tdeg())));
        }
        let mut ltilde = vec![None; n];
        for &j in &set {
            let q = c
                .div_exact(&sys.leading(j))
                .ok_or_else(|| Error::Internal("C is not a multiple of a leading coefficient".into()))?;
            let lt = sys.operators()[j].mul_left_poly(&q);
            if lt.degree().unwrap_or(0) > d_c {
                return Err(Error::BoundViolated(format!("deg(L̃_{}) exceeds d_C = {d_c}", j + 1)));
            }
            ltilde[j] = Some(lt);
        }
        Ok(ReductionData {
            vars,
            set,
            orders,
            tails,
            c_factors,
            c,
            d_c,
            ltilde,
            memo: Mutex::new(HashMap::new()),
            tail_memo: Mutex::new(HashMap::new()),
        })
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn set(&self) -> &[usize] {
        &self.set
    }

    /// `r_j` for `j ∈ S`, zero elsewhere.
    pub fn orders(&self) -> &[u32] {
        &self.orders
    }

    pub fn c(&self) -> &Polynomial {
        &self.c
    }

    pub fn c_factors(&self) -> &[(Polynomial, u32)] {
        &self.c_factors
    }

    /// `C^k` as a factor list.
    pub fn c_power(&self, k: u32) -> Factors {
        self.c_factors.iter().map(|(b, e)| (b.clone(), e * k)).collect()
    }

    pub fn d_c(&self) -> u32 {
        self.d_c
    }

    pub fn ltilde(&self, j: usize) -> Option<&DiffOperator> {
        self.ltilde[j].as_ref()
    }

    pub fn in_box(&self, beta: &[u32]) -> bool {
        beta.iter().enumerate().all(|(j, &b)| if self.orders[j] == 0 { b == 0 } else { b < self.orders[j] })
    }

    /// The box `B`, in lexicographic order.
    pub fn basis(&self) -> Vec<Exps> {
        let mut out = vec![vec![0u32; self.vars.len()]];
        for &j in &self.set {
            let mut next = Vec::new();
            for v in &out {
                for k in 0..self.orders[j] {
                    let mut w = v.clone();
                    w[j] = k;
                    next.push(w);
                }
            }
            out = next;
        }
        out.sort();
        out
    }

    fn check_support(&self, alpha: &[u32]) -> Result<()> {
        if alpha.len() != self.vars.len() || alpha.iter().enumerate().any(|(j, &a)| a > 0 && self.orders[j] == 0) {
            return Err(Error::UnsupportedExponent(alpha.to_vec()));
        }
        Ok(())
    }

    /// `D^{β''} D_j^{r_j} f` over the box, `β''_j = 0`.
    fn tail(&self, j: usize, rest: &Exps) -> Arc<Coeffs> {
        if let Some(hit) = self.tail_memo.lock().unwrap().get(&(j, rest.clone())) {
            return hit.clone();
        }
        let mut acc = Coeffs::new();
        for mu in crate::weyl::sub_vectors(rest) {
            let mut binom = num_bigint::BigInt::from(1);
            for (b, m) in rest.iter().zip(&mu) {
                binom *= binomial(*b as u64, *m as u64);
            }
            let bq = Q::from_integer(binom);
            for (k, a) in self.tails[j].iter().enumerate() {
                let d = derivative_multi(a, &mu);
                if d.is_zero() {
                    continue;
                }
                let mut key: Exps = rest.iter().zip(&mu).map(|(x, y)| x - y).collect();
                key[j] += k as u32;
                add_into(&mut acc, key, d.scale(&bq));
            }
        }
        let acc = Arc::new(acc);
        self.tail_memo.lock().unwrap().insert((j, rest.clone()), acc.clone());
        acc
    }

    /// `D_j` applied to `Σ c_β D^β f`, rewritten onto the box.
    pub fn step(&self, j: usize, v: &Coeffs) -> Coeffs {
        assert!(self.orders[j] > 0, "step direction outside S");
        let mut acc = Coeffs::new();
        for (beta, c) in v {
            add_into(&mut acc, beta.clone(), c.derivative(j));
            if beta[j] + 1 < self.orders[j] {
                let mut b2 = beta.clone();
                b2[j] += 1;
                add_into(&mut acc, b2, c.clone());
            } else {
                let mut rest = beta.clone();
                rest[j] = 0;
                for (g, a) in self.tail(j, &rest).iter() {
                    add_into(&mut acc, g.clone(), c.mul(a));
                }
            }
        }
        acc
    }

    fn reduce_coeffs(&self, alpha: &Exps) -> Arc<Coeffs> {
        if let Some(hit) = self.memo.lock().unwrap().get(alpha) {
            return hit.clone();
        }
        let out = if self.in_box(alpha) {
            let mut m = Coeffs::new();
            m.insert(alpha.clone(), RationalFunction::one(&self.vars));
            m
        } else {
            let j = (0..alpha.len())
                .rev()
                .find(|&j| self.orders[j] > 0 && alpha[j] >= self.orders[j])
                .unwrap();
            let mut prev = alpha.clone();
            prev[j] -= 1;
            let base = self.reduce_coeffs(&prev);
            self.step(j, &base)
        };
        let out = Arc::new(out);
        self.memo.lock().unwrap().insert(alpha.clone(), out.clone());
        out
    }

    /// Coefficients only, without the cleared certificate.
    pub fn reduce_to_box(&self, alpha: &[u32]) -> Result<Arc<Coeffs>> {
        self.check_support(alpha)?;
        Ok(self.reduce_coeffs(&alpha.to_vec()))
    }

    pub fn reduce(&self, alpha: &[u32]) -> Result<Reduction> {
        let coeffs = (*self.reduce_to_box(alpha)?).clone();
        let weight: u32 = alpha.iter().sum();
        let certificate = self.certify(&coeffs, weight)?;
        Ok(Reduction {
            coeffs,
            certificate,
            weight,
        })
    }

    /// `C^weight c_β`, checked to be polynomials of degree `≤ weight·d_C`.
    pub fn certify(&self, coeffs: &Coeffs, weight: u32) -> Result<BTreeMap<Exps, Polynomial>> {
        let cp = self.c_power(weight);
        let bound = weight * self.d_c;
        let mut out = BTreeMap::new();
        for (b, c) in coeffs {
            let q = c.clear_with(&cp).ok_or_else(|| {
                Error::BoundViolated(format!("C^{weight} does not clear the coefficient of D^{b:?}"))
            })?;
            if q.tdeg().unwrap_or(0) > bound {
                return Err(Error::BoundViolated(format!(
                    "cleared coefficient of D^{b:?} has degree {:?} > {bound}",
                    q.tdeg()
                )));
            }
            out.insert(b.clone(), q);
        }
        Ok(out)
    }

    /// `Σ_β a_β D^β f` for an operator in `K[x]⟨D_S⟩`, onto the box.
    pub fn reduce_operator(&self, p: &DiffOperator) -> Result<Coeffs> {
        p.vars().ensure_same(&self.vars)?;
        let mut acc = Coeffs::new();
        for (beta, a) in p.terms() {
            let r = self.reduce_to_box(beta)?;
            for (b, c) in r.iter() {
                add_into(&mut acc, b.clone(), c.mul_poly(a));
            }
        }
        Ok(acc)
    }

    /// Same result as [`reduce_to_box`](Self::reduce_to_box), computed by repeatedly lowering the
    /// highest order outside the box by at least one.
    pub fn reduce_by_filtration(&self, alpha: &[u32]) -> Result<Coeffs> {
        self.check_support(alpha)?;
        let mut work = Coeffs::new();
        work.insert(alpha.to_vec(), RationalFunction::one(&self.vars));
        loop {
            let top = work
                .keys()
                .filter(|b| !self.in_box(b))
                .map(|b| b.iter().sum::<u32>())
                .max();
            let Some(top) = top else { break };
            let mut next = Coeffs::new();
            for (beta, c) in work {
                if self.in_box(&beta) || beta.iter().sum::<u32>() < top {
                    add_into(&mut next, beta, c);
                    continue;
                }
                let j = (0..beta.len())
                    .rev()
                    .find(|&j| self.orders[j] > 0 && beta[j] >= self.orders[j])
                    .unwrap();
                let mut gamma = beta.clone();
                gamma[j] -= self.orders[j];
                for mu in crate::weyl::sub_vectors(&gamma) {
                    let mut binom = num_bigint::BigInt::from(1);
                    for (g, m) in gamma.iter().zip(&mu) {
                        binom *= binomial(*g as u64, *m as u64);
                    }
                    let bq = Q::from_integer(binom);
                    for (k, a) in self.tails[j].iter().enumerate() {
                        let d = derivative_multi(a, &mu);
                        if d.is_zero() {
                            continue;
                        }
                        let mut key: Exps = gamma.iter().zip(&mu).map(|(x, y)| x - y).collect();
                        key[j] += k as u32;
                        add_into(&mut next, key, c.mul(&d).scale(&bq));
                    }
                }
            }
            work = next;
        }
        work.retain(|_, c| !c.is_zero());
        Ok(work)
    }

    pub fn clear_memo(&self) {
        self.memo.lock().unwrap().clear();
        self.tail_memo.lock().unwrap().clear();
    }
}

/// Whether two coordinate maps are equal as rational functions.
pub fn coeffs_equal(a: &Coeffs, b: &Coeffs) -> bool {
    let keys: std::collections::BTreeSet<&Exps> = a.keys().chain(b.keys()).collect();
    keys.into_iter().all(|k| match (a.get(k), b.get(k)) {
        (Some(x), Some(y)) => x == y,
        (Some(x), None) | (None, Some(x)) => x.is_zero(),
        (None, None) => true,
    })
}

impl Reduction {
    pub fn nonzero(&self) -> bool {
        self.coeffs.values().any(|c| !c.is_zero())
    }
}
