//! Gauge conjugation, Euler identities and the formality algorithm on random data.

mod common;

use std::collections::BTreeMap;

use common::linf_first_violation;
use proptest::prelude::*;

use ce_formality::fixtures;
use ce_formality::formality::{formality_verdict, gauge_reduce, FormalityInput, FormalityVerdict, HomBasis};
use ce_formality::graded::GradedVectorSpace;
use ce_formality::linf::{bracket_with_euler, conjugate, decalage, exp_coderivation, LInfinityAlgebra, LInfinityMorphism, Taylor};
use ce_formality::multilinear::{nr_bracket, Multilinear};
use ce_formality::rational::Rational;

fn random_hom(space: &GradedVectorSpace, arity: usize, degree: i64, coeffs: &[i64]) -> Multilinear {
    let hb = HomBasis::new(space, space, arity, degree);
    let x: Vec<Rational> = (0..hb.len()).map(|k| Rational::from_int(coeffs[k % coeffs.len()])).collect();
    hb.from_coordinates(&x)
}

fn gauge_constructed(coeffs: &[i64], weight: usize) -> (LInfinityAlgebra, LInfinityAlgebra, Taylor) {
    let v = decalage(&fixtures::hom_uu(), weight);
    let sp = v.space().clone();
    let mut alpha: Taylor = BTreeMap::new();
    alpha.insert(2, random_hom(&sp, 2, 0, coeffs));
    let twisted = LInfinityAlgebra::new(sp.clone(), conjugate(&sp, v.taylor(), &alpha, weight), weight).unwrap();
    (v, twisted, alpha)
}

fn space_of(degrees: &[i64]) -> GradedVectorSpace {
    let pairs: Vec<(String, i64)> = degrees.iter().enumerate().map(|(i, &d)| (format!("x{i}"), d)).collect();
    GradedVectorSpace::from_pairs(&pairs).unwrap()
}

#[test]
fn q_k_against_identity() {
    let v = fixtures::gauge_formal(5);
    let id = Multilinear::identity(v.space().dim());
    for k in 1..=4 {
        let qk = v.q(k);
        let expected = qk.scaled(&Rational::from_int(k as i64 - 1));
        assert_eq!(nr_bracket(v.space(), &qk, &id), expected, "k = {k}");
    }
}

#[test]
fn gauge_formal_fixture_has_higher_operations() {
    let v = fixtures::gauge_formal(5);
    assert!(!v.q(3).is_zero());
    assert_eq!(linf_first_violation(&v.with_weight(4)), None);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn euler_bracket_scales_by_arity_minus_degree(
        degrees in proptest::collection::vec(-1i64..3, 1..4),
        arity in 1usize..4,
        degree in -2i64..3,
        coeffs in proptest::collection::vec(-3i64..4, 1..7),
    ) {
        let sp = space_of(&degrees);
        let beta = random_hom(&sp, arity, degree, &coeffs);
        let lhs = bracket_with_euler(&sp, &beta);
        prop_assert_eq!(lhs, beta.scaled(&Rational::from_int(arity as i64 - degree - 1)));
    }

    #[test]
    fn conjugation_preserves_the_relations(coeffs in proptest::collection::vec(-2i64..3, 1..6)) {
        let (_, twisted, _) = gauge_constructed(&coeffs, 4);
        prop_assert!(twisted.validate().passed());
        prop_assert_eq!(linf_first_violation(&twisted), None);
    }

    #[test]
    fn gauge_reduction_recovers_the_quadratic_part(coeffs in proptest::collection::vec(-2i64..3, 1..6)) {
        let weight = 5;
        let (v, twisted, alpha) = gauge_constructed(&coeffs, weight);
        let out = gauge_reduce(&twisted).unwrap();
        prop_assert!(out.failure.is_none());
        prop_assert_eq!(out.reduced.taylor(), v.taylor());
        prop_assert!(out.gauge.validate().passed());
        // construction followed by the recovered gauge is an automorphism of (V, q_2)
        let e = LInfinityMorphism::new(v.clone(), twisted.clone(), exp_coderivation(v.space(), &alpha, weight).unwrap()).unwrap();
        prop_assert!(e.validate().passed());
        let round = out.gauge.compose(&e).unwrap();
        prop_assert!(round.validate().passed());
        prop_assert_eq!(round.linear_part().to_matrix(), ce_formality::linalg::Matrix::identity(v.space().dim()));

        let report = formality_verdict(FormalityInput::Linf(&twisted), weight, 5).unwrap();
        let formal = matches!(report.verdict, FormalityVerdict::FormalUpTo { weight: 5, columns: 5, .. });
        prop_assert!(formal);
        prop_assert!(report.obstructions.first_nonzero().is_none());
    }
}
