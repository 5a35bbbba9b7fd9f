//! Closed-form order/degree bounds and the dimension counts behind them, evaluated exactly.

pub mod quadratic;

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Map, Value};

use crate::algebra::polynomial::{q_from_str, q_to_string};
use crate::algebra::{binomial, q_frac, q_int, Q};
use crate::error::{Error, Result};
use crate::series::FORMAT_VERSION;
use quadratic::QSqrt37;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    Primary,
    PrimaryH,
    GesselP,
    GesselQh,
    BivariateCorollary,
    Complete,
    Iterated(u32),
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Primary => "primary",
            Scenario::PrimaryH => "primary-h",
            Scenario::GesselP => "gessel-P",
            Scenario::GesselQh => "gessel-Qh",
            Scenario::BivariateCorollary => "bivariate-corollary",
            Scenario::Complete => "complete",
            Scenario::Iterated(_) => "iterated",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Num {
    Int(BigInt),
    Rat(Q),
}

impl Num {
    fn to_json(&self) -> Value {
        match self {
            Num::Int(n) => match n.to_i64() {
                Some(x) => json!(x),
                None => json!(n.to_string()),
            },
            Num::Rat(q) => json!(q_to_string(q)),
        }
    }

    fn from_json(v: &Value, path: &str) -> Result<Num> {
        if let Some(x) = v.as_i64() {
            return Ok(Num::Int(x.into()));
        }
        let s = v.as_str().ok_or_else(|| Error::parse(path, "expected a number"))?;
        let q = q_from_str(s).ok_or_else(|| Error::parse(path, "malformed rational"))?;
        Ok(if q.is_integer() {
            Num::Int(q.to_integer())
        } else {
            Num::Rat(q)
        })
    }
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Num::Int(n) => write!(f, "{n}"),
            Num::Rat(q) => write!(f, "{}", q_to_string(q)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundsReport {
    pub scenario: Scenario,
    pub d: Vec<u32>,
    pub r: Vec<u32>,
    pub outputs: Vec<(String, Num)>,
}

impl BoundsReport {
    fn new(scenario: Scenario, d: &[u32], r: &[u32]) -> Self {
        BoundsReport {
            scenario,
            d: d.to_vec(),
            r: r.to_vec(),
            outputs: Vec::new(),
        }
    }

    fn put(&mut self, name: &str, v: impl Into<BigInt>) {
        self.outputs.push((name.to_string(), Num::Int(v.into())));
    }

    fn put_q(&mut self, name: &str, q: Q) {
        let v = if q.is_integer() {
            Num::Int(q.to_integer())
        } else {
            Num::Rat(q)
        };
        self.outputs.push((name.to_string(), v));
    }

    pub fn get(&self, name: &str) -> Option<&Num> {
        self.outputs.iter().find(|(k, _)| k == name).map(|(_, v)| v)
    }

    /// Integer output by name; panics if absent or fractional.
    pub fn int(&self, name: &str) -> BigInt {
        match self.get(name) {
            Some(Num::Int(n)) => n.clone(),
            other => panic!("no integer output `{name}` (found {other:?})"),
        }
    }

    pub fn slack(&self) -> Option<BigInt> {
        match self.get("slack") {
            Some(Num::Int(n)) => Some(n.clone()),
            _ => None,
        }
    }

    pub fn to_json(&self) -> Value {
        let mut out = Map::new();
        for (k, v) in &self.outputs {
            out.insert(k.clone(), v.to_json());
        }
        let mut inputs = json!({"n": self.d.len(), "d": self.d, "r": self.r});
        if let Scenario::Iterated(k) = self.scenario {
            inputs = json!({ "k": k });
        }
        json!({
            "format_version": FORMAT_VERSION,
            "scenario": self.scenario.name(),
            "inputs": inputs,
            "outputs": Value::Object(out),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let name = v
            .get("scenario")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::parse("scenario", "missing"))?;
        let inputs = v.get("inputs").ok_or_else(|| Error::parse("inputs", "missing"))?;
        let list = |key: &str| -> Result<Vec<u32>> {
            inputs
                .get(key)
                .and_then(Value::as_array)
                .ok_or_else(|| Error::parse(format!("inputs.{key}"), "expected a list"))?
                .iter()
                .map(|x| {
                    x.as_u64()
                        .map(|y| y as u32)
                        .ok_or_else(|| Error::parse(format!("inputs.{key}"), "expected integers"))
                })
                .collect()
        };
        let (scenario, d, r) = if name == "iterated" {
            let k = inputs
                .get("k")
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::parse("inputs.k", "missing"))?;
            (Scenario::Iterated(k as u32), Vec::new(), Vec::new())
        } else {
            let s = match name {
                "primary" => Scenario::Primary,
                "primary-h" => Scenario::PrimaryH,
                "gessel-P" => Scenario::GesselP,
                "gessel-Qh" => Scenario::GesselQh,
                "bivariate-corollary" => Scenario::BivariateCorollary,
                "complete" => Scenario::Complete,
                _ => return Err(Error::parse("scenario", format!("unknown scenario `{name}`"))),
            };
            (s, list("d")?, list("r")?)
        };
        let outs = v
            .get("outputs")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::parse("outputs", "expected an object"))?;
        let mut outputs = Vec::new();
        for (k, x) in outs {
            outputs.push((k.clone(), Num::from_json(x, &format!("outputs.{k}"))?));
        }
        let mut rep = BoundsReport { scenario, d, r, outputs };
        rep.outputs.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(rep)
    }

    /// Same report with outputs in key order, as produced by a JSON round trip.
    pub fn canonical(&self) -> Self {
        let mut c = self.clone();
        c.outputs.sort_by(|a, b| a.0.cmp(&b.0));
        c
    }
}

fn check_orders(r: &[u32]) -> Result<()> {
    if r.iter().any(|&x| x == 0) {
        return Err(Error::InvalidArgument("orders must be at least 1".into()));
    }
    Ok(())
}

fn big(x: u64) -> BigInt {
    BigInt::from(x)
}

fn to_u64(n: &BigInt, what: &str) -> Result<u64> {
    n.to_u64()
        .ok_or_else(|| Error::InvalidArgument(format!("{what} = {n} is too large to evaluate binomials")))
}

/// Order and degree bounds for an annihilator of `Δ_{2,1}(f)` in `D_t`, or with
/// `h = Some((d_h, r_h))` for the spectator derivative.
pub fn primary_bounds(d1: u32, d2: u32, r1: u32, r2: u32, h: Option<(u32, u32)>) -> Result<BoundsReport> {
    let (d, r, scenario) = match h {
        None => (vec![d1, d2], vec![r1, r2], Scenario::Primary),
        Some((dh, rh)) => (vec![d1, d2, dh], vec![r1, r2, rh], Scenario::PrimaryH),
    };
    check_orders(&r)?;
    let d_c: u64 = d.iter().map(|&x| x as u64).sum();
    let rr: u64 = r.iter().map(|&x| x as u64).product();
    let dd = 2 + 2 * d_c;
    let n = 2 * dd * rr;
    let dn = big(dd) * big(n);
    let dim_v = binomial(n + 2, 2);
    let dim_w = big(rr) * (&dn + 1u32);
    let slack = &dim_v - &dim_w;
    let closed = big(3 * dd - 1) * big(rr) + 1u32;
    if slack != closed || !slack.is_positive() {
        return Err(Error::Internal(format!("dimension slack {slack} differs from (3D-1)R+1 = {closed}")));
    }
    let e = d_c + 1;
    let deg = big(8) * big(e * e) * big(rr * rr) * (big(8 * e * e * rr) + 1u32);
    if deg != &dn * &dim_w {
        return Err(Error::Internal("degree bound disagrees with DN·R(DN+1)".into()));
    }
    let mut rep = BoundsReport::new(scenario, &d, &r);
    rep.put("d_C", d_c);
    rep.put("D", dd);
    rep.put("R", rr);
    rep.put("N", n);
    rep.put("ord_bound", 4 * e * rr);
    rep.put("deg_bound", deg);
    rep.put("entry_deg_bound", dn);
    rep.put("dim_V", dim_v);
    rep.put("dim_W", dim_w);
    rep.put("slack", slack);
    Ok(rep)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GesselKind {
    P,
    /// Zero-based spectator index, at least 2.
    Qh(usize),
}

/// `C(N+3, 3) − R·C(DN+2, 2)` and its closed form at `N = 3D²R`.
pub fn elimination_count(dd: u64, rr: u64) -> (BigInt, Q) {
    let n = 3 * dd * dd * rr;
    let diff = binomial(n + 3, 3) - big(rr) * binomial(dd * n + 2, 2);
    let (d, r) = (q_int(dd as i64), q_int(rr as i64));
    let closed = q_int(9) * &r * &r * &d * &d * &d * (&d - q_frac(1, 2))
        + &r * (q_frac(11, 2) * &d * &d - q_int(1))
        + q_int(1);
    (diff, closed)
}

pub fn gessel_bounds(d: &[u32], r: &[u32], kind: GesselKind) -> Result<BoundsReport> {
    if d.len() != r.len() || d.len() < 2 {
        return Err(Error::InvalidArgument("need matching degree and order lists of length at least 2".into()));
    }
    check_orders(r)?;
    let (dd, rr, ds, rs, scenario) = match kind {
        GesselKind::P => {
            let s = (d[0] + d[1]) as u64;
            (2 * (s + 1), (r[0] * r[1]) as u64, vec![d[0], d[1]], vec![r[0], r[1]], Scenario::GesselP)
        }
        GesselKind::Qh(h) => {
            if h < 2 || h >= d.len() {
                return Err(Error::InvalidArgument(format!("spectator index {h} out of range")));
            }
            let s = (d[0] + d[1] + d[h]) as u64;
            (
                s + 2,
                (r[0] * r[1] * r[h]) as u64,
                vec![d[0], d[1], d[h]],
                vec![r[0], r[1], r[h]],
                Scenario::GesselQh,
            )
        }
    };
    let n = 3 * dd * dd * rr;
    let dim_v = binomial(n + 3, 3);
    let dim_w = big(rr) * binomial(dd * n + 2, 2);
    let slack = &dim_v - &dim_w;
    let (diff, closed) = elimination_count(dd, rr);
    if Q::from_integer(diff.clone()) != closed || diff != slack || !slack.is_positive() {
        return Err(Error::Internal(format!("counting identity fails at D={dd}, R={rr}")));
    }
    let coeff_deg = big(dd * n) * big(rr) * binomial(dd * n + 2, 2);
    let mut rep = BoundsReport::new(scenario, &ds, &rs);
    rep.put("D", dd);
    rep.put("R", rr);
    rep.put("N", n);
    rep.put("entry_deg_bound", dd * n);
    rep.put("x1x2_deg_bound", n);
    rep.put("op_deg_bound", n);
    rep.put("coeff_deg_bound", coeff_deg);
    rep.put("dim_V", dim_v);
    rep.put("dim_W", dim_w);
    rep.put("slack", slack);
    rep.put_q("closed_form", closed);
    Ok(rep)
}

/// `(d_g, r_g)` for a system satisfied by `L(f)`, bivariate `f`.
pub fn image_bounds(d_l: u64, r_l: u64, d_f: u64, r_f: u64) -> (BigInt, BigInt) {
    let r2 = big(r_f * r_f);
    let dg = (big(d_l) + big(2 * d_f) * (&r2 + big(r_l))) * &r2;
    (dg, r2)
}

/// Bounds along the bivariate elimination route: `P`, then `H`, then `G` with `P̄ = G·H`.
pub fn bivariate_bounds(d: &[u32], r: &[u32]) -> Result<BoundsReport> {
    if d.len() != 2 || r.len() != 2 {
        return Err(Error::InvalidArgument("the bivariate corollary needs n = 2".into()));
    }
    let p = gessel_bounds(d, r, GesselKind::P)?;
    let n = to_u64(&p.int("N"), "N")?;
    let d_f = *d.iter().max().unwrap() as u64;
    let r_f = *r.iter().max().unwrap() as u64;
    let (deg_h, ord_h) = (n, 2 * n);
    let (deg_g, ord_g) = image_bounds(deg_h, ord_h, d_f, r_f);
    let mut rep = BoundsReport::new(Scenario::BivariateCorollary, d, r);
    rep.put("N", n);
    rep.put("deg_H_bound", deg_h);
    rep.put("ord_H_bound", ord_h);
    rep.put("deg_G_bound", deg_g.clone());
    rep.put("ord_G_bound", ord_g.clone());
    rep.put("deg_bound", deg_g + big(deg_h));
    rep.put("ord_bound", ord_g + big(ord_h));
    rep.put("slack", 1u32);
    Ok(rep)
}

/// Bounds of the single-step complete diagonal, with `N` rounded up and `N' = D·N`.
pub fn complete_bounds(d: &[u32], r: &[u32]) -> Result<BoundsReport> {
    let n = d.len();
    if n < 2 || r.len() != n {
        return Err(Error::InvalidArgument("need matching lists for n ≥ 2 variables".into()));
    }
    check_orders(r)?;
    let sum_d: u64 = d.iter().map(|&x| x as u64).sum();
    let rr: BigInt = r.iter().map(|&x| big(x as u64)).product();
    let dd = n as u64 * (2 + sum_d);
    let n_prime_raw = num_traits::pow(big(2 * dd + 1), n) * &rr;
    let n_raw = Q::new(n_prime_raw.clone(), big(dd));
    let n_ceil = n_raw.ceil().to_integer();
    let n_prime = big(dd) * &n_ceil;
    let nu = to_u64(&n_ceil, "N")?;
    let npu = to_u64(&n_prime, "N'")?;
    let dim_v = big(npu + 1) * binomial(nu + n as u64, n as u64);
    let dim_w = &rr * binomial(dd * nu + npu + n as u64, n as u64);
    let slack = &dim_v - &dim_w;
    let fact: BigInt = (1..=n as u64).map(big).product();
    let mid_hi = Q::new(&n_prime * num_traits::pow(n_ceil.clone(), n), fact.clone());
    let mid_lo = Q::new(&rr * num_traits::pow(big(dd * nu + npu + n as u64), n), fact);
    let chain = Q::from_integer(dim_v.clone()) > mid_hi
        && mid_hi > mid_lo
        && mid_lo >= Q::from_integer(dim_w.clone());
    if !slack.is_positive() || !chain {
        return Err(Error::Internal("complete-mode counting chain fails at the rounded N".into()));
    }
    let mut rep = BoundsReport::new(Scenario::Complete, d, r);
    rep.put("D", dd);
    rep.put("R", rr);
    rep.put("d_C", sum_d);
    rep.put("N_prime_raw", n_prime_raw);
    rep.put_q("N_raw", n_raw);
    rep.put("N", n_ceil);
    rep.put("N_prime", n_prime);
    rep.put("ord_bound", nu);
    rep.put("deg_bound", npu);
    rep.put("dim_V", dim_v);
    rep.put("dim_W", dim_w);
    rep.put("slack", slack);
    Ok(rep)
}

/// `(u, v, s, t)` with `[[u, v], [s, t]] = [[4, 9], [1, 3]]^k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IteratedExponents {
    pub u: BigInt,
    pub v: BigInt,
    pub s: BigInt,
    pub t: BigInt,
}

fn matrix_power(k: u32) -> IteratedExponents {
    let (mut u, mut v, mut s, mut t) = (BigInt::one(), BigInt::zero(), BigInt::zero(), BigInt::one());
    for _ in 0..k {
        let (nu, nv) = (4 * &u + 9 * &s, 4 * &v + 9 * &t);
        let (ns, nt) = (&u + 3 * &s, &v + 3 * &t);
        u = nu;
        v = nv;
        s = ns;
        t = nt;
    }
    IteratedExponents { u, v, s, t }
}

/// `a·λ1^k + b·λ2^k` with coefficients `(x + y/√37)` given as `(x, y)` pairs.
fn eigen_combination(k: u32, c1: (Q, Q), c2: (Q, Q)) -> QSqrt37 {
    let w1 = &QSqrt37::rational(c1.0) + &QSqrt37::over_sqrt(c1.1);
    let w2 = &QSqrt37::rational(c2.0) + &QSqrt37::over_sqrt(c2.1);
    &(&w1 * &QSqrt37::lambda1().pow(k)) + &(&w2 * &QSqrt37::lambda2().pow(k))
}

/// The eigenvalue closed forms of `(u, v, s, t)`, evaluated in `Q(√37)`.
///
/// `u` uses the coefficients `1/2 ± 1/(2√37)` forced by `u(0) = 1, u(1) = 4`.
pub fn closed_forms(k: u32) -> [QSqrt37; 4] {
    let h = q_frac(1, 2);
    let z = Q::zero;
    let s = eigen_combination(k, (z(), q_int(1)), (z(), q_int(-1)));
    let t = eigen_combination(k, (h.clone(), -h.clone()), (h.clone(), h.clone()));
    let u = eigen_combination(k, (h.clone(), h.clone()), (h.clone(), -h.clone()));
    let v = eigen_combination(k, (z(), q_int(9)), (z(), q_int(-9)));
    [u, v, s, t]
}

/// The `u` closed form with coefficients `1/2 ∓ 5/(2√37)`, which does not match the recurrence.
pub fn printed_u_closed_form(k: u32) -> QSqrt37 {
    let h = q_frac(1, 2);
    eigen_combination(k, (h.clone(), q_frac(-5, 2)), (h.clone(), q_frac(5, 2)))
}

pub fn iterated_exponents(k: u32) -> Result<IteratedExponents> {
    let m = matrix_power(k);
    let forms = closed_forms(k);
    for (name, (val, form)) in ["u", "v", "s", "t"].iter().zip([&m.u, &m.v, &m.s, &m.t].into_iter().zip(forms.iter())) {
        if form.as_rational() != Some(&Q::from_integer(val.clone())) {
            return Err(Error::Internal(format!("closed form of {name}({k}) disagrees with the recurrence")));
        }
    }
    Ok(m)
}

pub fn iterated_report(k: u32) -> Result<BoundsReport> {
    let e = iterated_exponents(k)?;
    let mut rep = BoundsReport::new(Scenario::Iterated(k), &[], &[]);
    rep.put("u", e.u);
    rep.put("v", e.v);
    rep.put("s", e.s);
    rep.put("t", e.t);
    Ok(rep)
}

/// Rows `k, u, v, s, t` for `k = 0..=k_max`.
pub fn iterated_table(k_max: u32) -> Result<Vec<(u32, IteratedExponents)>> {
    (0..=k_max).map(|k| Ok((k, iterated_exponents(k)?))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primary_at_degree_one() {
        let r = primary_bounds(1, 1, 1, 1, None).unwrap();
        assert_eq!(r.int("N"), big(12));
        assert_eq!(r.int("ord_bound"), big(12));
        assert_eq!(r.int("deg_bound"), big(5256));
        assert_eq!(r.int("slack"), big(18));
        let z = primary_bounds(0, 0, 1, 1, None).unwrap();
        assert_eq!((z.int("D"), z.int("N")), (big(2), big(4)));
        let h = primary_bounds(1, 1, 1, 1, Some((1, 1))).unwrap();
        assert_eq!(h.int("ord_bound"), big(16));
    }

    #[test]
    fn gessel_sizes() {
        assert_eq!(gessel_bounds(&[1, 1], &[1, 1], GesselKind::P).unwrap().int("N"), big(108));
        assert_eq!(gessel_bounds(&[1, 1, 1], &[1, 1, 1], GesselKind::Qh(2)).unwrap().int("N"), big(75));
        let (diff, closed) = elimination_count(2, 1);
        assert_eq!(diff, big(130));
        assert_eq!(closed, q_int(130));
        assert_eq!(image_bounds(2, 2, 1, 1), (big(8), big(1)));
    }

    #[test]
    fn complete_values() {
        let r = complete_bounds(&[1, 1], &[1, 1]).unwrap();
        assert_eq!(r.int("D"), big(8));
        assert_eq!(r.int("N_prime_raw"), big(289));
        assert_eq!(r.get("N_raw"), Some(&Num::Rat(q_frac(289, 8))));
        assert_eq!((r.int("N"), r.int("N_prime")), (big(37), big(296)));
        let r3 = complete_bounds(&[1, 1, 1], &[1, 1, 1]).unwrap();
        assert_eq!((r3.int("D"), r3.int("N_prime_raw")), (big(15), big(29791)));
    }

    #[test]
    fn iterated_small_k() {
        let e = |u: i64, v: i64, s: i64, t: i64| IteratedExponents { u: u.into(), v: v.into(), s: s.into(), t: t.into() };
        assert_eq!(iterated_exponents(0).unwrap(), e(1, 0, 0, 1));
        assert_eq!(iterated_exponents(1).unwrap(), e(4, 9, 1, 3));
        assert_eq!(iterated_exponents(2).unwrap(), e(25, 63, 7, 18));
        assert_ne!(printed_u_closed_form(1).as_rational(), Some(&q_int(4)));
    }

    #[test]
    fn report_round_trip() {
        for rep in [
            primary_bounds(1, 2, 1, 2, None).unwrap(),
            complete_bounds(&[1, 1], &[1, 1]).unwrap(),
            iterated_report(3).unwrap(),
        ] {
            assert_eq!(BoundsReport::from_json(&rep.to_json()).unwrap(), rep.canonical());
        }
    }
}
