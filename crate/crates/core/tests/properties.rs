mod common;

use std::collections::BTreeMap;

use diagonal_core::algebra::{q_int, Polynomial, Vars, Q};
use diagonal_core::bounds::{complete_bounds, iterated_report, primary_bounds, BoundsReport};
use diagonal_core::dfinite::{coeffs_equal, DFiniteSystem};
use diagonal_core::series::TruncatedSeries;
use diagonal_core::weyl::{subalgebra_decompose, Coordinates, DiffOperator, SubIndex, SubalgebraKind};
use proptest::prelude::*;

fn vars(n: usize) -> Vars {
    common::vars(n)
}

fn poly(n: usize, deg: u32, terms: usize) -> impl Strategy<Value = Polynomial> {
    prop::collection::vec((prop::collection::vec(0..=deg, n), -3i64..=3), 0..=terms)
        .prop_map(move |ts| Polynomial::from_terms(&vars(n), ts.into_iter().map(|(e, c)| (e, q_int(c)))))
}

fn operator(n: usize) -> impl Strategy<Value = DiffOperator> {
    prop::collection::vec((prop::collection::vec(0..=2u32, n), poly(n, 2, 2)), 0..=3)
        .prop_map(move |ts| DiffOperator::from_terms(&vars(n), ts))
}

fn series(n: usize, valid: u32) -> impl Strategy<Value = TruncatedSeries> {
    let monos = diagonal_core::series::monomials_up_to(n, valid);
    prop::collection::vec(-4i64..=4, monos.len()).prop_map(move |cs| {
        TruncatedSeries::new(&vars(n), monos.iter().cloned().zip(cs.into_iter().map(q_int)), valid)
    })
}

fn coords(kind: SubalgebraKind, n: usize) -> impl Strategy<Value = Coordinates> {
    let extra = n - 2;
    prop::collection::vec(((0..=2u32, 0..=2u32, 0..=2u32, prop::collection::vec(0..=1u32, extra)), -3i64..=3), 0..=4)
        .prop_map(move |ts| {
            let mut m = BTreeMap::new();
            for ((i, j, l, k), c) in ts {
                let j = if kind == SubalgebraKind::Dx1 { 0 } else { j };
                if c != 0 {
                    m.insert(SubIndex { i, j, l, k }, q_int(c));
                }
            }
            Coordinates { kind, vars: vars(n), coords: m }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn polynomial_ring_laws(a in poly(2, 3, 4), b in poly(2, 3, 4), c in poly(2, 3, 4)) {
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        let lhs = (&a * &b).derivative(0);
        let rhs = &(&a.derivative(0) * &b) + &(&a * &b.derivative(0));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn operator_product_is_associative(p in operator(2), q in operator(2), r in operator(2)) {
        prop_assert_eq!(p.mul(&q).mul(&r), p.mul(&q.mul(&r)));
    }

    #[test]
    fn product_acts_as_composition(p in operator(2), q in operator(2), f in series(2, 9)) {
        let lhs = f.apply_operator(&p.mul(&q)).unwrap();
        let rhs = f.apply_operator(&q).unwrap().apply_operator(&p).unwrap();
        prop_assert!(common::agree(&lhs, &rhs));
    }

    #[test]
    fn operator_acts_on_polynomials_like_on_series(p in operator(2), a in poly(2, 3, 4)) {
        let s = TruncatedSeries::from_polynomial(&a, 8);
        let direct = TruncatedSeries::from_polynomial(&p.apply(&a), 8);
        prop_assert!(common::agree(&s.apply_operator(&p).unwrap(), &direct));
    }

    #[test]
    fn decompose_inverts_recompose_tdxx(c in coords(SubalgebraKind::TDxx, 3)) {
        prop_assert_eq!(subalgebra_decompose(&c.recompose(), SubalgebraKind::TDxx).unwrap(), c);
    }

    #[test]
    fn decompose_inverts_recompose_dx1(c in coords(SubalgebraKind::Dx1, 3)) {
        prop_assert_eq!(subalgebra_decompose(&c.recompose(), SubalgebraKind::Dx1).unwrap(), c);
    }

    #[test]
    fn decompose_inverts_recompose_tdh(c in coords(SubalgebraKind::TDh(2), 3)) {
        prop_assert_eq!(subalgebra_decompose(&c.recompose(), SubalgebraKind::TDh(2)).unwrap(), c);
    }

    #[test]
    fn series_json_round_trip(f in series(3, 4)) {
        prop_assert_eq!(TruncatedSeries::from_json(&f.to_json(), "f").unwrap(), f);
    }

    #[test]
    fn operator_json_round_trip(p in operator(3)) {
        let v = p.vars().clone();
        prop_assert_eq!(DiffOperator::from_json(&p.to_json(), &v, "p").unwrap(), p);
    }

    #[test]
    fn bounds_json_round_trip(d1 in 0..4u32, d2 in 0..4u32, r1 in 1..4u32, r2 in 1..4u32, k in 0..15u32) {
        for rep in [
            primary_bounds(d1, d2, r1, r2, None).unwrap(),
            primary_bounds(d1, d2, r1, r2, Some((d1, r2))).unwrap(),
            complete_bounds(&[d1, d2], &[r1, r2]).unwrap(),
            iterated_report(k).unwrap(),
        ] {
            prop_assert_eq!(BoundsReport::from_json(&rep.to_json()).unwrap(), rep.canonical());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn filtration_matches_full_reduction(seed in any::<u64>(), a in 0..5u32, b in 0..5u32) {
        let sys = common::Gen::new(seed).rational_system(&vars(2));
        let rd = sys.reduction_data(&[0, 1]).unwrap();
        let full = rd.reduce_to_box(&[a, b]).unwrap();
        let stepwise = rd.reduce_by_filtration(&[a, b]).unwrap();
        prop_assert!(coeffs_equal(&full, &stepwise));
        rd.clear_memo();
        prop_assert!(coeffs_equal(&rd.reduce_to_box(&[a, b]).unwrap(), &full));
    }

    #[test]
    fn system_json_round_trip(seed in any::<u64>()) {
        let sys = common::Gen::new(seed).rational_system(&vars(2));
        prop_assert_eq!(DFiniteSystem::from_json(&sys.to_json()).unwrap(), sys.clone());
        let seeded = DFiniteSystem::from_operators(sys.vars(), sys.operators().to_vec(), sys.series(5).unwrap()).unwrap();
        prop_assert_eq!(DFiniteSystem::from_json(&seeded.to_json()).unwrap(), seeded);
    }

    #[test]
    fn reorder_permutes_the_expansion(seed in any::<u64>()) {
        let sys = common::Gen::new(seed).rational_system(&vars(3));
        let r = sys.reorder(&[2, 0]).unwrap();
        prop_assert_eq!(r.vars().names(), ["x3", "x1", "x2"]);
        let f = sys.series(5).unwrap();
        let g = r.series(5).unwrap();
        for (e, c) in f.coeffs() {
            prop_assert_eq!(g.coeff(&[e[2], e[0], e[1]]), c.clone());
        }
        prop_assert_eq!(r.degrees(), &[sys.degrees()[2], sys.degrees()[0], sys.degrees()[1]]);
    }
}

#[test]
fn leibniz_and_theta_squared() {
    let v = vars(1);
    let x = DiffOperator::x(&v, 0);
    let d = DiffOperator::d(&v, 0);
    assert_eq!(d.mul(&x), x.mul(&d).add(&DiffOperator::one(&v)));
    let theta = DiffOperator::theta(&v, 0);
    let x2d2 = DiffOperator::monomial(&v, vec![2], Polynomial::monomial(&v, vec![2], Q::from_integer(1.into())));
    assert_eq!(theta.mul(&theta), x2d2.add(&theta));
}
