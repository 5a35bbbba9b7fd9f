use super::*;
use crate::algebra::q_int;

fn bivariate(den: &[(Exps, i64)]) -> DFiniteSystem {
    let v = Vars::new(["x1", "x2"]);
    let d = Polynomial::from_terms(&v, den.iter().map(|(e, c)| (e.clone(), q_int(*c))));
    DFiniteSystem::from_rational(Polynomial::one(&v), d).unwrap()
}

fn central() -> DFiniteSystem {
    bivariate(&[(vec![0, 0], 1), (vec![1, 0], -1), (vec![0, 1], -1)])
}

fn constant() -> DFiniteSystem {
    bivariate(&[(vec![0, 0], 1)])
}

fn opts(trunc: u32) -> Options {
    Options { trunc, ..Options::default() }
}

#[test]
fn constant_elimination_is_d12() {
    let p = elim_operator(&constant(), GesselKind::P, &opts(12)).unwrap();
    assert_eq!(p.n_used, 1);
    let v = constant().vars().clone();
    assert_eq!(p.operator(), DiffOperator::d_pair(&v, 0, 1));
}

#[test]
fn central_elimination_verifies() {
    let p = elim_operator(&central(), GesselKind::P, &opts(30)).unwrap();
    assert!(p.verification.as_ref().unwrap().passed());
    assert_eq!(subalgebra_decompose(&p.operator(), SubalgebraKind::TDxx).unwrap(), p.coords);
}

fn coords(entries: &[((u32, u32, u32), i64)]) -> Coordinates {
    Coordinates {
        kind: SubalgebraKind::TDxx,
        vars: Vars::new(["x1", "x2"]),
        coords: entries
            .iter()
            .map(|((i, j, l), c)| (SubIndex { i: *i, j: *j, l: *l, k: vec![] }, q_int(*c)))
            .collect(),
    }
}

#[test]
fn strip_examples() {
    let v = Vars::new(["x1", "x2"]);
    let (s, pt, h) = strip_t_and_build_h(&coords(&[((1, 1, 0), 1)])).unwrap();
    assert_eq!((s, pt, h), (1, coords(&[((1, 0, 0), 1)]), DiffOperator::x(&v, 0)));

    let p = coords(&[((0, 2, 0), 1), ((0, 1, 1), 1)]);
    let (s, pt, h) = strip_t_and_build_h(&p).unwrap();
    assert_eq!(s, 1);
    assert_eq!(pt, coords(&[((0, 1, 0), 1), ((0, 0, 1), 1)]));
    let expect = DiffOperator::from_terms(
        &v,
        [(vec![2, 0], Polynomial::var(&v, 0)), (vec![1, 0], Polynomial::one(&v))],
    );
    assert_eq!(h, expect);

    let p = coords(&[((0, 0, 0), 2), ((1, 1, 0), 1)]);
    let (s, pt, _) = strip_t_and_build_h(&p).unwrap();
    assert_eq!((s, &pt), (0, &p));
    let tp = DiffOperator::t_op(&v, 0, 1);
    let q = coords(&[((0, 2, 0), 1), ((0, 1, 1), 1)]);
    let (s, pt, _) = strip_t_and_build_h(&q).unwrap();
    assert_eq!(tp.pow(s).mul(&pt.recompose()), q.recompose());
}

#[test]
fn theta_annihilator_of_constant() {
    let sys = constant();
    let one = DiffOperator::one(sys.vars());
    let a = annihilator_of_image(&sys, &one, &opts(10)).unwrap();
    assert_eq!(a.operator, DiffOperator::theta(sys.vars(), 0));
}

#[test]
fn image_annihilator_of_central() {
    let sys = central();
    let one = DiffOperator::one(sys.vars());
    let a = annihilator_of_image(&sys, &one, &opts(10)).unwrap();
    assert!(a.order() <= 1 && a.within_budget);
    let f = sys.series(20).unwrap();
    assert!(f.verify_annihilation(&a.operator).unwrap().passed());
}

#[test]
fn central_bivariate() {
    let res = bivariate_annihilator(&central(), &opts(50)).unwrap();
    assert!(res.verification.passed());
    assert_eq!(res.verification.window + res.ord, 50);
}

#[test]
fn separable_bivariate() {
    let sys = bivariate(&[(vec![0, 0], 1), (vec![1, 0], -1), (vec![0, 1], -1), (vec![1, 1], 1)]);
    let res = bivariate_annihilator(&sys, &opts(30)).unwrap();
    assert!(res.verification.passed());
    let tv = res.operator.vars().clone();
    let geom = TruncatedSeries::new(&tv, (0..=30).map(|i| (vec![i], q_int(1))), 30);
    assert!(geom.verify_annihilation(&res.operator).unwrap().passed());
}

#[test]
fn constant_bivariate_has_right_factor_d_t() {
    let res = bivariate_annihilator(&constant(), &opts(10)).unwrap();
    assert!(res.verification.passed());
    assert!(res.operator.coeff(&[0]).is_zero());
}
