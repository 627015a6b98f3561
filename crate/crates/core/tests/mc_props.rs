use proptest::prelude::*;

use ce_formality::fixtures;
use ce_formality::linalg::SparseVec;
use ce_formality::mc::{gauge_act, mc_check, mc_lift, TruncatedElement};
use ce_formality::rational::Rational;

fn r(n: i64) -> Rational {
    Rational::from_int(n)
}

fn series(order: usize, idx: usize, coeffs: &[i64]) -> TruncatedElement {
    TruncatedElement::new(order, coeffs.iter().map(|&c| SparseVec::from_terms([(idx, r(c))])).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn lift_past_t2_iff_square_vanishes(a in -4i64..5, b in -4i64..5) {
        let l = fixtures::mc_lattice();
        let sp = l.space();
        let (e1, e2) = (sp.index_of("e1").unwrap(), sp.index_of("e2").unwrap());
        let x1 = SparseVec::from_terms([(e1, r(a)), (e2, r(b))]);
        let x = TruncatedElement::linear(2, x1.clone()).unwrap();
        let step = mc_lift(&l, &x).unwrap();
        prop_assert_eq!(step.solvable, l.bracket(&x1, &x1).is_zero());
        prop_assert_eq!(step.solvable, a * a == b * b);
        if let Some(y) = step.lifted(&x) {
            prop_assert!(mc_check(&l, &y).unwrap().is_solution());
        }
    }

    #[test]
    fn gauge_action_preserves_solutions(
        xs in proptest::collection::vec(-3i64..4, 1..5),
        a1 in proptest::collection::vec(-2i64..3, 1..5),
        a2 in proptest::collection::vec(-2i64..3, 1..5),
    ) {
        let l = fixtures::two_dim_odd();
        let h = l.space().index_of("h").unwrap();
        let e = l.space().index_of("e").unwrap();
        let x = series(5, e, &xs);
        prop_assert!(mc_check(&l, &x).unwrap().is_solution());
        let y = gauge_act(&l, &series(5, h, &a1), &x).unwrap();
        prop_assert!(mc_check(&l, &y).unwrap().is_solution());
        let z = gauge_act(&l, &series(5, h, &a2), &y).unwrap();
        prop_assert!(mc_check(&l, &z).unwrap().is_solution());
    }
}

#[test]
fn non_solutions_are_reported_at_their_first_order() {
    let l = fixtures::mc_lattice();
    let e1 = l.space().index_of("e1").unwrap();
    let x = series(3, e1, &[1]);
    let report = mc_check(&l, &x).unwrap();
    assert_eq!(report.first_failure(), Some(2));
    assert!(mc_lift(&l, &x).is_err());
}
