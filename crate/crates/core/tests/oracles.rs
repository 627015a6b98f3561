//! Library results against the independent oracles in `common`.

mod common;

use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ce_formality::ce::{ce_first_page_check, hom_dims as lib_hom_dims};
use ce_formality::dgla::{cohomology, DgLieAlgebra, DgModule};
use ce_formality::fixtures;
use ce_formality::linalg::Matrix;
use ce_formality::linf::decalage;
use ce_formality::power::{koszul_sign, PowerKind};
use ce_formality::rational::Rational;
use ce_formality::specseq::SpectralSequence;

fn dgla_fixtures() -> Vec<(&'static str, DgLieAlgebra)> {
    vec![
        ("two_dim", fixtures::two_dim()),
        ("two_dim_odd", fixtures::two_dim_odd()),
        ("sl2", fixtures::sl2()),
        ("heisenberg", fixtures::heisenberg()),
        ("transfer_example", fixtures::transfer_example()),
        ("hom_uu", fixtures::hom_uu()),
        ("end_acyclic", fixtures::end_acyclic()),
        ("hom_uu_ideal", fixtures::hom_uu_ideal()),
        ("mc_lattice", fixtures::mc_lattice()),
        ("voronov_ambient", fixtures::voronov_ambient()),
    ]
}

#[test]
fn dgla_validation_agrees_with_oracle_on_fixtures() {
    for (name, l) in dgla_fixtures() {
        assert!(l.validate().passed(), "{name}");
        assert_eq!(DenseDgla::of(&l).first_violation(), None, "{name}");
    }
    let bad = fixtures::bad_leibniz();
    assert_eq!(DenseDgla::of(&bad).first_violation(), Some("Leibniz"));
    let report = bad.validate();
    let fail = report.first_failure().expect("bad fixture fails");
    assert_eq!(fail.axiom, "Leibniz");
    assert_eq!(fail.witness.as_deref(), Some("(c, a)"));
}

#[test]
fn cohomology_dims_agree_with_rank_oracle() {
    for (name, l) in dgla_fixtures() {
        let c = cohomology(&l.complex()).unwrap();
        assert_eq!(c.cohomology.graded_dims().into_iter().filter(|(_, v)| *v > 0).collect::<std::collections::BTreeMap<_, _>>(), dgla_cohomology_dims(&l), "{name}");
    }
}

#[test]
fn power_basis_counts_agree_with_generating_function() {
    for (name, l) in dgla_fixtures() {
        let w = l.space().graded_dims();
        for p in 0..4 {
            let mut lib = lib_hom_dims(l.space(), l.space(), PowerKind::Exterior, p);
            lib.retain(|_, v| *v > 0);
            assert_eq!(lib, hom_dims(l.space().degrees(), &w, p), "{name}, p = {p}");
        }
    }
}

#[test]
fn first_page_matches_oracle_count() {
    for (name, l) in dgla_fixtures() {
        if l.dim() > 6 {
            continue;
        }
        let columns = 4;
        let report = ce_first_page_check(&DgModule::adjoint(&l), columns).expect(name);
        let h = cohomology(&l.complex()).unwrap().cohomology;
        for p in 0..columns {
            let expected = hom_dims(h.degrees(), &dgla_cohomology_dims(&l), p);
            let computed: std::collections::BTreeMap<i64, usize> =
                report.rows.iter().filter(|r| r.p == p as i64 && r.computed > 0).map(|r| (r.q, r.computed)).collect();
            assert_eq!(computed, expected, "{name}, p = {p}");
        }
    }
}

#[test]
fn linf_validation_agrees_with_oracle_on_fixtures() {
    for (name, l) in dgla_fixtures() {
        if l.dim() > 6 {
            continue;
        }
        let v = decalage(&l, 3);
        assert!(v.validate().passed(), "{name}");
        assert_eq!(linf_first_violation(&v), None, "{name}");
    }
    let g = fixtures::gauge_formal(4);
    assert!(g.validate().passed());
    assert_eq!(linf_first_violation(&g), None);
    let vor = fixtures::voronov_data();
    let data = ce_formality::linf::derived_brackets(&vor.0, &vor.1, &vor.2, 4).unwrap();
    assert!(data.algebra.validate().passed());
    assert_eq!(linf_first_violation(&data.algebra), None);
}

#[test]
fn decalage_oracle_catches_broken_leibniz() {
    let v = decalage(&fixtures::bad_leibniz(), 3);
    assert!(!v.validate().passed());
    assert_eq!(linf_first_violation(&v).as_deref(), Some("relation n = 2"));
}

#[test]
fn twenty_five_random_complexes_abut_correctly() {
    let mut higher = 0;
    for seed in 0..25u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fc = random_filtered_complex(&mut rng, 10, 4);
        let ss = SpectralSequence::new(&fc).unwrap();
        ss.check_invariants().unwrap();
        let oracle = graded_cohomology(&fc);
        let mut limit = ss.limit().dims();
        limit.retain(|_, v| *v > 0);
        assert_eq!(limit, oracle, "seed {seed}");
        ss.abutment_check().unwrap();
        if ss.page(1).dims() != ss.limit().dims() {
            higher += 1;
        }
    }
    // the generator must exercise differentials beyond d_0
    assert!(higher >= 5, "only {higher} complexes have d_r != 0 for some r >= 1");
}

fn small_matrix() -> impl Strategy<Value = Vec<Vec<i64>>> {
    (1usize..5, 1usize..5).prop_flat_map(|(r, c)| proptest::collection::vec(proptest::collection::vec(-3i64..4, c), r))
}

fn to_matrix(rows: &[Vec<i64>]) -> Matrix {
    let refs: Vec<&[i64]> = rows.iter().map(Vec::as_slice).collect();
    Matrix::from_ints(&refs)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rank_matches_oracle_and_rank_nullity(rows in small_matrix()) {
        let m = to_matrix(&rows);
        let oracle = rank(rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect());
        prop_assert_eq!(m.rank(), oracle);
        let ker = m.kernel();
        prop_assert_eq!(ker.len() + m.rank(), m.cols());
        for v in &ker {
            prop_assert!(m.apply(v).iter().all(Rational::is_zero));
        }
    }

    #[test]
    fn inverse_is_two_sided(rows in (1usize..5).prop_flat_map(|n| proptest::collection::vec(proptest::collection::vec(-3i64..4, n), n))) {
        let m = to_matrix(&rows);
        match m.inverse() {
            Some(inv) => {
                prop_assert_eq!(m.mul(&inv), Matrix::identity(m.rows()));
                prop_assert_eq!(inv.mul(&m), Matrix::identity(m.rows()));
            }
            None => prop_assert!(m.rank() < m.rows()),
        }
    }

    #[test]
    fn rational_field_laws(a in -1000i64..1000, b in 1i64..1000, c in -1000i64..1000, d in 1i64..1000, e in -50i64..50) {
        let x = Rational::new(a, b);
        let y = Rational::new(c, d);
        let z = Rational::from_int(e);
        prop_assert_eq!(&(&x + &y) * &z, &(&x * &z) + &(&y * &z));
        prop_assert_eq!(&(&x - &y) + &y, x.clone());
        prop_assert_eq!((&x * &y).to_big(), x.to_big() * y.to_big());
        if !y.is_zero() {
            prop_assert_eq!(&(&x / &y) * &y, x.clone());
        }
    }

    #[test]
    fn rational_promotes_instead_of_overflowing(a in (i64::MAX / 4)..i64::MAX, b in 2i64..9) {
        let x = Rational::from_int(a);
        let y = &(&x * &x) * &Rational::from_int(b);
        prop_assert_eq!(y.to_big(), x.to_big() * x.to_big() * q(b));
        prop_assert_eq!(&(&y / &x) / &x, Rational::from_int(b));
    }

    #[test]
    fn koszul_sign_matches_inversion_count(degs in proptest::collection::vec(-2i64..3, 1..6), seed in 0u64..1000) {
        let n = degs.len();
        let perms = permutations(n);
        let perm = &perms[(seed as usize) % perms.len()];
        let one_based: Vec<usize> = perm.iter().map(|&i| i + 1).collect();
        let lib = koszul_sign(&degs, &one_based, false).unwrap();
        prop_assert_eq!(q(lib), koszul(&degs, perm));
        let inversions = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).filter(|&(a, b)| perm[a] > perm[b]).count();
        let ext = koszul_sign(&degs, &one_based, true).unwrap();
        // exterior sign: every inverted pair contributes −1 except odd–odd pairs
        let odd_inv = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .filter(|&(a, b)| perm[a] > perm[b] && degs[perm[a]].rem_euclid(2) == 1 && degs[perm[b]].rem_euclid(2) == 1)
            .count();
        prop_assert_eq!(ext, if (inversions - odd_inv) % 2 == 0 { 1 } else { -1 });
    }

    #[test]
    fn random_complexes_satisfy_page_recursion_and_abutment(seed in 100u64..10_000, length in 2usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fc = random_filtered_complex(&mut rng, 10, length);
        let ss = SpectralSequence::new(&fc).unwrap();
        ss.check_invariants().unwrap();
        let mut limit = ss.limit().dims();
        limit.retain(|_, v| *v > 0);
        prop_assert_eq!(limit, graded_cohomology(&fc));
        for l in 1..length {
            ss.quotient_compare(l).unwrap();
        }
    }
}
