//! Coordinates over the monomial bases of the subalgebras generated by
//! `x1x2, x3.., T, D_{x1}D_{x2}`, by `x1, x3.., D_{x1}`, and by `x1x2, x3.., T, D_{xh}`.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde_json::{json, Value};

use super::DiffOperator;
use crate::algebra::{Exps, Polynomial, Vars, Q};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SubalgebraKind {
    /// `(x1x2)^i x̂^k T^j (D_{x1}D_{x2})^ℓ`
    TDxx,
    /// `x1^i x̂^k D_{x1}^ℓ` (no `x2`)
    Dx1,
    /// `(x1x2)^i x̂^k T^j D_{xh}^ℓ`, `h` a zero-based index ≥ 2
    TDh(usize),
}

/// Basis index; for [`SubalgebraKind::Dx1`] `i` is the exponent of `x1` and `j = 0`.
/// `k` holds the exponents of `x3, .., xn`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubIndex {
    pub i: u32,
    pub j: u32,
    pub l: u32,
    pub k: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Coordinates {
    pub kind: SubalgebraKind,
    pub vars: Vars,
    pub coords: BTreeMap<SubIndex, Q>,
}

struct TPowers {
    vars: Vars,
    pows: Vec<DiffOperator>,
}

impl TPowers {
    fn new(vars: &Vars) -> Self {
        TPowers {
            vars: vars.clone(),
            pows: vec![DiffOperator::one(vars)],
        }
    }

    fn get(&mut self, j: u32) -> &DiffOperator {
        let t = DiffOperator::t_op(&self.vars, 0, 1);
        while self.pows.len() <= j as usize {
            let next = self.pows.last().unwrap().mul(&t);
            self.pows.push(next);
        }
        &self.pows[j as usize]
    }
}

fn check_vars(vars: &Vars, kind: SubalgebraKind) -> Result<()> {
    if vars.len() < 2 {
        return Err(Error::InvalidArgument("subalgebra bases need at least two variables".into()));
    }
    if let SubalgebraKind::TDh(h) = kind {
        if h < 2 || h >= vars.len() {
            return Err(Error::InvalidArgument(format!("spectator index {h} out of range")));
        }
    }
    Ok(())
}

fn basis_monomial(vars: &Vars, kind: SubalgebraKind, idx: &SubIndex, tp: &mut TPowers) -> DiffOperator {
    let n = vars.len();
    let mut alpha = vec![0u32; n];
    alpha[2..].copy_from_slice(&idx.k);
    let mut shift = vec![0u32; n];
    let core = match kind {
        SubalgebraKind::Dx1 => {
            alpha[0] += idx.i;
            shift[0] = idx.l;
            DiffOperator::one(vars)
        }
        SubalgebraKind::TDxx => {
            alpha[0] += idx.i;
            alpha[1] += idx.i;
            shift[0] = idx.l;
            shift[1] = idx.l;
            tp.get(idx.j).clone()
        }
        SubalgebraKind::TDh(h) => {
            alpha[0] += idx.i;
            alpha[1] += idx.i;
            shift[h] = idx.l;
            tp.get(idx.j).clone()
        }
    };
    let mono = Polynomial::monomial(vars, alpha, Q::from_integer(1.into()));
    DiffOperator::from_terms(
        vars,
        core.terms().map(|(b, p)| {
            let b2: Exps = b.iter().zip(&shift).map(|(x, y)| x + y).collect();
            (b2, p * &mono)
        }),
    )
}

impl Coordinates {
    pub fn recompose(&self) -> DiffOperator {
        let mut tp = TPowers::new(&self.vars);
        let mut out = DiffOperator::zero(&self.vars);
        for (idx, c) in &self.coords {
            out = out.add(&basis_monomial(&self.vars, self.kind, idx, &mut tp).scale(c));
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_empty()
    }

    /// `[[i, j, ℓ, [k..]], "c"]` entries.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.coords
                .iter()
                .map(|(x, c)| json!([[x.i, x.j, x.l, x.k], crate::algebra::polynomial::q_to_string(c)]))
                .collect(),
        )
    }
}

/// Every `(x^α, β)` key of an operator with its coefficient.
fn flat_terms(p: &DiffOperator) -> Vec<(Exps, Exps, Q)> {
    let mut out = Vec::new();
    for (b, poly) in p.terms() {
        for (a, c) in poly.terms() {
            out.push((a.clone(), b.clone(), c.clone()));
        }
    }
    out
}

fn describe(vars: &Vars, a: &[u32], b: &[u32]) -> String {
    let mut parts = Vec::new();
    for (i, &k) in a.iter().enumerate() {
        if k > 0 {
            parts.push(format!("{}^{k}", vars.name(i)));
        }
    }
    for (i, &k) in b.iter().enumerate() {
        if k > 0 {
            parts.push(format!("D_{}^{k}", vars.name(i)));
        }
    }
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

pub fn subalgebra_decompose(p: &DiffOperator, kind: SubalgebraKind) -> Result<Coordinates> {
    let vars = p.vars().clone();
    check_vars(&vars, kind)?;
    let mut coords = BTreeMap::new();
    let not_in = |a: &[u32], b: &[u32]| Error::NotInSubalgebra(describe(&vars, a, b));

    if kind == SubalgebraKind::Dx1 {
        for (a, b, c) in flat_terms(p) {
            if a[1] > 0 || b.iter().enumerate().any(|(i, &k)| i != 0 && k > 0) {
                return Err(not_in(&a, &b));
            }
            coords.insert(
                SubIndex {
                    i: a[0],
                    j: 0,
                    l: b[0],
                    k: a[2..].to_vec(),
                },
                c,
            );
        }
        return Ok(Coordinates { kind, vars, coords });
    }

    let extra_d = |b: &[u32]| -> bool {
        b.iter().enumerate().any(|(i, &k)| {
            k > 0
                && match kind {
                    SubalgebraKind::TDh(h) => i != h && i > 1,
                    _ => i > 1,
                }
        })
    };
    for (a, b, _) in flat_terms(p) {
        if extra_d(&b) {
            return Err(not_in(&a, &b));
        }
    }

    let mut tp = TPowers::new(&vars);
    let mut rem = p.clone();
    let key = |a: &Exps, b: &Exps| -> (Vec<u32>, Vec<u32>) {
        let head = match kind {
            SubalgebraKind::TDh(h) => vec![b[h], b[0], b[1], a[1], a[0]],
            _ => vec![b[0], b[1], a[1], a[0]],
        };
        (head, a[2..].to_vec())
    };
    let mut guard = 0usize;
    while !rem.is_zero() {
        guard += 1;
        if guard > 1_000_000 {
            return Err(Error::Internal("subalgebra elimination did not terminate".into()));
        }
        let (a, b, c) = flat_terms(&rem)
            .into_iter()
            .max_by(|x, y| key(&x.0, &x.1).cmp(&key(&y.0, &y.1)))
            .unwrap();
        let (idx, ok) = match kind {
            SubalgebraKind::TDxx => {
                let (a1, a2, b1, b2) = (a[0], a[1], b[0], b[1]);
                let ok = a1 >= a2 && b1 >= b2 && a1 - a2 == b1 - b2;
                (
                    SubIndex {
                        i: a2,
                        j: a1.saturating_sub(a2),
                        l: b2,
                        k: a[2..].to_vec(),
                    },
                    ok,
                )
            }
            SubalgebraKind::TDh(h) => {
                let (a1, a2, b1, b2) = (a[0], a[1], b[0], b[1]);
                let ok = a1 >= a2 && b2 == 0 && a1 - a2 == b1;
                (
                    SubIndex {
                        i: a2,
                        j: b1,
                        l: b[h],
                        k: a[2..].to_vec(),
                    },
                    ok,
                )
            }
            SubalgebraKind::Dx1 => unreachable!(),
        };
        if !ok {
            return Err(not_in(&a, &b));
        }
        let m = basis_monomial(&vars, kind, &idx, &mut tp);
        rem = rem.sub(&m.scale(&c));
        let slot = coords.entry(idx).or_insert_with(Q::zero);
        *slot += c;
    }
    coords.retain(|_, c: &mut Q| !c.is_zero());
    Ok(Coordinates { kind, vars, coords })
}
