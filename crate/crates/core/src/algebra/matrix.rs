//! Kernel vectors of polynomial matrices with degree control.
//!
//! The rank profile is found modulo a large prime at a random point; the first
//! dependent column then determines a square subsystem whose exact Cramer vector is
//! computed fraction-free, or by multimodular interpolation when its entries are
//! univariate and the block is large. Every returned vector is checked exactly against the
//! whole matrix, and a fresh random point is drawn if the check fails.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::lift::univariate_kernel;
use super::modular::{self, Sampler};
use super::polynomial::{gcd_univariate, Exps, Polynomial, Vars, Q};
use super::rational::{Factors, RationalFunction};
use crate::error::{Error, Result};

/// Column-sparse matrix with polynomial entries.
#[derive(Clone, Debug)]
pub struct PolyMatrix {
    vars: Vars,
    rows: usize,
    cols: Vec<Vec<(usize, Polynomial)>>,
}

/// A kernel vector supported on columns `0..=column`.
#[derive(Clone, Debug)]
pub struct Dependency {
    pub vector: Vec<Polynomial>,
    pub column: usize,
    pub rank: usize,
}

const ATTEMPTS: u64 = 6;

impl PolyMatrix {
    pub fn new(vars: &Vars, rows: usize) -> Self {
        PolyMatrix {
            vars: vars.clone(),
            rows,
            cols: Vec::new(),
        }
    }

    pub fn from_dense(vars: &Vars, dense: &[Vec<Polynomial>]) -> Self {
        let rows = dense.len();
        let ncols = dense.first().map_or(0, |r| r.len());
        let mut m = Self::new(vars, rows);
        for j in 0..ncols {
            m.push_column((0..rows).map(|i| (i, dense[i][j].clone())).collect());
        }
        m
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols.len()
    }

    pub fn set_rows(&mut self, rows: usize) {
        assert!(rows >= self.rows);
        self.rows = rows;
    }

    /// Append a column given as `(row, entry)` pairs; zero entries are dropped.
    pub fn push_column(&mut self, mut entries: Vec<(usize, Polynomial)>) {
        entries.retain(|(r, p)| {
            assert!(*r < self.rows, "row index out of range");
            !p.is_zero()
        });
        entries.sort_by_key(|e| e.0);
        self.cols.push(entries);
    }

    pub fn column(&self, j: usize) -> &[(usize, Polynomial)] {
        &self.cols[j]
    }

    pub fn max_entry_degree(&self) -> u32 {
        self.cols
            .iter()
            .flat_map(|c| c.iter().filter_map(|(_, p)| p.tdeg()))
            .max()
            .unwrap_or(0)
    }

    pub fn entry(&self, i: usize, j: usize) -> Polynomial {
        self.cols[j]
            .binary_search_by_key(&i, |e| e.0)
            .map(|k| self.cols[j][k].1.clone())
            .unwrap_or_else(|_| Polynomial::zero(&self.vars))
    }

    /// `A v`, as one polynomial per row.
    pub fn apply(&self, v: &[Polynomial]) -> Vec<Polynomial> {
        let mut out = vec![Polynomial::zero(&self.vars); self.rows];
        for (j, col) in self.cols.iter().enumerate() {
            if v[j].is_zero() {
                continue;
            }
            for (i, a) in col {
                out[*i] = &out[*i] + &(a * &v[j]);
            }
        }
        out
    }
}

/// Linear system from coordinate vectors `β ↦ c_β(x)`: each column is cleared by the
/// common denominator and split by the monomials of the `split` variables. The
/// remaining variables carry the unknown coefficients.
#[derive(Clone, Debug)]
pub struct Assembled {
    pub matrix: PolyMatrix,
    pub coef_vars: Vars,
    /// Position of each original variable among `coef_vars`.
    pub coef_map: Vec<Option<usize>>,
    /// Row keys `(β, exponents of the split variables)`.
    pub rows: Vec<(Exps, Exps)>,
}

pub fn assemble_columns(columns: &[&BTreeMap<Exps, RationalFunction>], vars: &Vars, split: &[usize]) -> Result<Assembled> {
    let mut den: Factors = Vec::new();
    for col in columns {
        for c in col.values() {
            for (b, e) in c.den_factors() {
                match den.iter_mut().find(|(x, _)| x == b) {
                    Some(slot) => slot.1 = slot.1.max(*e),
                    None => den.push((b.clone(), *e)),
                }
            }
        }
    }
    let mut coef_map = vec![None; vars.len()];
    let mut coef_names = Vec::new();
    for k in 0..vars.len() {
        if !split.contains(&k) {
            coef_map[k] = Some(coef_names.len());
            coef_names.push(vars.name(k).to_string());
        }
    }
    let coef_vars = Vars::new(coef_names);
    let mut row_index: BTreeMap<(Exps, Exps), usize> = BTreeMap::new();
    let mut rows = Vec::new();
    let mut col_entries = Vec::with_capacity(columns.len());
    for col in columns {
        let mut entries: BTreeMap<usize, Polynomial> = BTreeMap::new();
        for (beta, c) in col.iter() {
            let cleared = c
                .clear_with(&den)
                .ok_or_else(|| Error::Internal("common denominator does not clear a coordinate".into()))?;
            for (e, q) in cleared.terms() {
                let key = (beta.clone(), split.iter().map(|&k| e[k]).collect::<Exps>());
                let next = rows.len();
                let r = *row_index.entry(key.clone()).or_insert(next);
                if r == next {
                    rows.push(key);
                }
                let mut ce = vec![0u32; coef_vars.len()];
                for (k, m) in coef_map.iter().enumerate() {
                    if let Some(j) = m {
                        ce[*j] = e[k];
                    }
                }
                entries
                    .entry(r)
                    .or_insert_with(|| Polynomial::zero(&coef_vars))
                    .add_term(ce, q.clone());
            }
        }
        col_entries.push(entries.into_iter().filter(|(_, p)| !p.is_zero()).collect::<Vec<_>>());
    }
    let mut matrix = PolyMatrix::new(&coef_vars, rows.len());
    for e in col_entries {
        matrix.push_column(e);
    }
    Ok(Assembled {
        matrix,
        coef_vars,
        coef_map,
        rows,
    })
}

/// Rank key for choosing pivot rows: simplest original entry first, then lowest row.
fn row_key(p: &Polynomial, row: usize) -> (u32, usize, usize) {
    (p.tdeg().unwrap_or(0), p.num_terms(), row)
}

/// Rank profile mod p: either the first dependent column with the pivot rows of the
/// preceding columns, or `None` if all columns are independent at this point.
fn profile(m: &PolyMatrix, point: &[u64]) -> Option<Option<(usize, Vec<usize>)>> {
    let mut basis: Vec<(usize, Vec<u64>)> = Vec::new();
    for j in 0..m.cols() {
        let mut v = vec![0u64; m.rows];
        for (i, p) in m.column(j) {
            v[*i] = modular::eval_poly(p, point)?;
        }
        for (piv, b) in &basis {
            let c = v[*piv];
            if c != 0 {
                for (x, y) in v.iter_mut().zip(b) {
                    if *y != 0 {
                        *x = modular::sub(*x, modular::mul(c, *y));
                    }
                }
            }
        }
        let mut orig: Vec<Option<&Polynomial>> = vec![None; m.rows];
        for (i, p) in m.column(j) {
            orig[*i] = Some(p);
        }
        let best = (0..m.rows)
            .filter(|&i| v[i] != 0)
            .min_by_key(|&i| orig[i].map_or((0, 0, i), |p| row_key(p, i)));
        match best {
            None => {
                return Some(Some((j, basis.into_iter().map(|b| b.0).collect())));
            }
            Some(piv) => {
                let inv = modular::inv(v[piv]);
                for x in v.iter_mut() {
                    *x = modular::mul(*x, inv);
                }
                basis.push((piv, v));
            }
        }
    }
    Some(None)
}

/// Fraction-free Gauss-Jordan on a k×(k+1) block: `(-w, det)` spans its kernel.
fn cramer_poly(sub: Vec<Vec<Polynomial>>, vars: &Vars) -> Result<Vec<Polynomial>> {
    let k = sub.len();
    let mut a = sub;
    let mut prev = Polynomial::one(vars);
    for col in 0..k {
        let piv = (col..k)
            .find(|&r| !a[r][col].is_zero())
            .ok_or_else(|| Error::Internal("singular pivot block".into()))?;
        a.swap(col, piv);
        let p = a[col][col].clone();
        for r in 0..k {
            if r == col {
                continue;
            }
            let f = a[r][col].clone();
            for c in 0..=k {
                if c == col {
                    continue;
                }
                let num = &(&p * &a[r][c]) - &(&f * &a[col][c]);
                a[r][c] = num
                    .div_exact(&prev)
                    .ok_or_else(|| Error::Internal("inexact fraction-free step".into()))?;
            }
            a[r][col] = Polynomial::zero(vars);
        }
        prev = p;
    }
    let det = if k == 0 { Polynomial::one(vars) } else { a[k - 1][k - 1].clone() };
    let mut v: Vec<Polynomial> = (0..k).map(|r| -&a[r][k]).collect();
    v.push(det);
    Ok(v)
}

fn cramer_int(sub: Vec<Vec<BigInt>>) -> Result<Vec<BigInt>> {
    let k = sub.len();
    let mut a = sub;
    let mut prev = BigInt::one();
    for col in 0..k {
        let piv = (col..k)
            .find(|&r| !a[r][col].is_zero())
            .ok_or_else(|| Error::Internal("singular pivot block".into()))?;
        a.swap(col, piv);
        let p = a[col][col].clone();
        for r in 0..k {
            if r == col {
                continue;
            }
            let f = a[r][col].clone();
            for c in 0..=k {
                if c == col {
                    continue;
                }
                let num = &p * &a[r][c] - &f * &a[col][c];
                let (q, rem) = num.div_rem(&prev);
                if !rem.is_zero() {
                    return Err(Error::Internal("inexact fraction-free step".into()));
                }
                a[r][c] = q;
            }
            a[r][col] = BigInt::zero();
        }
        prev = p;
    }
    let det = if k == 0 { BigInt::one() } else { a[k - 1][k - 1].clone() };
    let mut v: Vec<BigInt> = (0..k).map(|r| -a[r][k].clone()).collect();
    v.push(det);
    Ok(v)
}

fn row_lcm(row: &[Polynomial]) -> BigInt {
    let mut l = BigInt::one();
    for p in row {
        for (_, c) in p.terms() {
            l = l.lcm(c.denom());
        }
    }
    l
}

/// Divide by the rational content (and by the polynomial gcd when univariate) and
/// make the last non-zero entry have positive leading coefficient.
fn normalize(v: &mut [Polynomial]) {
    normalize_content_only(v);
    let mut var: Option<usize> = None;
    for p in v.iter() {
        match p.univariate_var() {
            None => return,
            Some(None) => {}
            Some(Some(i)) => match var {
                None => var = Some(i),
                Some(j) if j != i => return,
                _ => {}
            },
        }
    }
    let Some(i) = var else { return };
    let mut g = Polynomial::zero(v[0].vars());
    for p in v.iter() {
        g = gcd_univariate(&g, p, i);
        if g.as_constant().is_some() {
            return;
        }
    }
    for p in v.iter_mut() {
        *p = p.div_exact(&g).expect("gcd divides");
    }
    normalize_content_only(v);
}

fn normalize_content_only(v: &mut [Polynomial]) {
    let mut num = BigInt::zero();
    let mut den = BigInt::one();
    for p in v.iter() {
        let c = p.content();
        if !c.is_zero() {
            num = num.gcd(c.numer());
            den = den.lcm(c.denom());
        }
    }
    if num.is_zero() {
        return;
    }
    let mut c = Q::new(num, den);
    if let Some(last) = v.iter().rev().find(|p| !p.is_zero()) {
        if last.leading_coeff().unwrap().is_negative() {
            c = -c;
        }
    }
    let inv = c.recip();
    for p in v.iter_mut() {
        *p = p.scale(&inv);
    }
}

/// Blocks at least this large go through the multimodular solver when possible.
const LIFT_THRESHOLD: usize = 16;

/// `Some(None)` for constant entries, `Some(Some(i))` if only variable `i` occurs.
fn single_variable(sub: &[Vec<Polynomial>]) -> Option<Option<usize>> {
    let mut var = None;
    for p in sub.iter().flatten() {
        match p.univariate_var()? {
            None => {}
            Some(i) => match var {
                None => var = Some(i),
                Some(j) if j != i => return None,
                _ => {}
            },
        }
    }
    Some(var)
}

fn dense_coeffs(p: &Polynomial, var: usize) -> Vec<BigInt> {
    if p.vars().is_empty() {
        return vec![p.constant_term().to_integer()];
    }
    let mut out = vec![BigInt::zero(); p.degree_in(var).map_or(1, |d| d as usize + 1)];
    for (e, c) in p.terms() {
        let i = e.get(var).copied().unwrap_or(0) as usize;
        out[i] = c.to_integer();
    }
    out
}

fn exact_vector(m: &PolyMatrix, c: usize, pivots: &[usize]) -> Result<Vec<Polynomial>> {
    let k = pivots.len();
    let vars = m.vars();
    let mut sub: Vec<Vec<Polynomial>> = pivots
        .iter()
        .map(|&r| (0..=c).map(|j| m.entry(r, j)).collect())
        .collect();
    for row in sub.iter_mut() {
        let l = Q::from_integer(row_lcm(row));
        for p in row.iter_mut() {
            *p = p.scale(&l);
        }
    }
    let constant = sub.iter().flatten().all(|p| p.as_constant().is_some());
    let main = single_variable(&sub);
    let lifted = match main {
        Some(var) if k >= LIFT_THRESHOLD => {
            let var = var.unwrap_or(0);
            let dense: Vec<Vec<Vec<BigInt>>> = sub
                .iter()
                .map(|row| row.iter().map(|p| dense_coeffs(p, var)).collect())
                .collect();
            univariate_kernel(&dense, vars, var, |v| {
                let mut full = v.to_vec();
                full.resize(m.cols(), Polynomial::zero(vars));
                m.apply(&full).iter().all(|p| p.is_zero())
            })
        }
        _ => None,
    };
    let v = if let Some(v) = lifted {
        v
    } else if constant {
        let ints: Vec<Vec<BigInt>> = sub
            .iter()
            .map(|row| row.iter().map(|p| p.constant_term().to_integer()).collect())
            .collect();
        cramer_int(ints)?
            .into_iter()
            .map(|x| Polynomial::constant(vars, Q::from_integer(x)))
            .collect()
    } else {
        cramer_poly(sub, vars)?
    };
    debug_assert_eq!(v.len(), k + 1);
    let mut full = vec![Polynomial::zero(vars); m.cols()];
    for (j, p) in v.into_iter().enumerate() {
        full[j] = p;
    }
    normalize(&mut full);
    Ok(full)
}

/// The first linear dependency among the columns, or `None` if they are independent.
pub fn first_dependency(m: &PolyMatrix, seed: u64) -> Result<Option<Dependency>> {
    let d = m.max_entry_degree();
    for attempt in 0..ATTEMPTS {
        let mut sampler = Sampler::new(seed.wrapping_add(attempt.wrapping_mul(0x9e37_79b9_7f4a_7c15)));
        let point = sampler.point(m.vars().len());
        let Some(prof) = profile(m, &point) else { continue };
        let Some((c, pivots)) = prof else {
            if attempt == 0 {
                return Ok(None);
            }
            continue;
        };
        let v = exact_vector(m, c, &pivots)?;
        if m.apply(&v).iter().all(|p| p.is_zero()) {
            let k = pivots.len();
            let bound = k as u32 * d;
            if let Some(bad) = v.iter().find(|p| p.tdeg().unwrap_or(0) > bound) {
                return Err(Error::BoundViolated(format!(
                    "kernel entry of degree {:?} exceeds {bound}",
                    bad.tdeg()
                )));
            }
            return Ok(Some(Dependency { vector: v, column: c, rank: k }));
        }
    }
    Err(Error::Internal(
        "kernel vector failed exact verification at every sample point".into(),
    ))
}

/// A non-zero kernel vector of a matrix with more columns than rows, entries of total
/// degree at most `rows * max_entry_degree`.
pub fn nullspace_bounded(m: &PolyMatrix, seed: u64) -> Result<Dependency> {
    if m.cols() <= m.rows() {
        return Err(Error::NotEnoughColumns {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    first_dependency(m, seed)?
        .ok_or_else(|| Error::Internal("wide matrix reported independent columns".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::polynomial::q_int;

    #[test]
    fn constant_kernel() {
        let v = Vars::empty();
        let c = |x: i64| Polynomial::int(&v, x);
        let m = PolyMatrix::from_dense(&v, &[vec![c(1), c(2), c(3)], vec![c(4), c(5), c(6)]]);
        let dep = nullspace_bounded(&m, 1).unwrap();
        let vals: Vec<Q> = dep.vector.iter().map(|p| p.constant_term()).collect();
        assert_eq!(vals, vec![q_int(1), q_int(-2), q_int(1)]);
    }

    #[test]
    fn polynomial_kernel() {
        let v = Vars::new(["t"]);
        let t = Polynomial::var(&v, 0);
        let one = Polynomial::one(&v);
        let m = PolyMatrix::from_dense(&v, &[vec![t.clone(), &t + &one, one.clone()]]);
        let dep = nullspace_bounded(&m, 3).unwrap();
        assert_eq!(dep.column, 1);
        assert!(m.apply(&dep.vector).iter().all(|p| p.is_zero()));
        assert!(dep.vector.iter().all(|p| p.tdeg().unwrap_or(0) <= 1));
    }

    #[test]
    fn too_few_columns() {
        let v = Vars::empty();
        let m = PolyMatrix::from_dense(&v, &[vec![Polynomial::one(&v)]]);
        assert!(matches!(nullspace_bounded(&m, 0), Err(Error::NotEnoughColumns { .. })));
        assert!(first_dependency(&m, 0).unwrap().is_none());
    }
}
