//! Ready-made inputs used by the examples, the CLI tests and the acceptance suite.

use std::collections::BTreeMap;

use crate::dgla::{dual_numbers, DgLieAlgebra, DglaMorphism};
use crate::graded::{GradedMap, GradedVectorSpace};
use crate::linalg::SparseVec;
use crate::linf::{conjugate, decalage, LInfinityAlgebra};
use crate::mc::TruncatedElement;
use crate::multilinear::Multilinear;
use crate::power::{PowerBasis, PowerKind};
use crate::problem::{vector_spec, AlgebraSpec, Kind, ProblemFile};
use crate::rational::Rational;

/// `End(U)` with the graded commutator and `d = [δ, −]`.
///
/// `u` lists the basis of `U`; `delta` gives `δ(u_j) = Σ c u_i` as `(j, i, c)`.
pub fn endomorphisms(u: &[(&str, i64)], delta: &[(usize, usize, i64)]) -> DgLieAlgebra {
    let n = u.len();
    let mut pairs = Vec::new();
    for a in 0..n {
        for b in 0..n {
            pairs.push((format!("{}{}", u[a].0, u[b].0), u[a].1 - u[b].1));
        }
    }
    let space = GradedVectorSpace::from_pairs(&pairs).expect("distinct labels");
    let idx = |a: usize, b: usize| space.index_of(&pairs[a * n + b].0).unwrap();
    let deg = |a: usize, b: usize| u[a].1 - u[b].1;
    let sign = |x: i64| if x.rem_euclid(2) == 0 { 1 } else { -1 };
    let mut bracket = Vec::new();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    if idx(a, b) > idx(c, d) {
                        continue;
                    }
                    let mut v = SparseVec::new();
                    if b == c {
                        v.add_term(idx(a, d), &Rational::one());
                    }
                    if d == a {
                        v.add_term(idx(c, b), &Rational::from_int(-sign(deg(a, b) * deg(c, d))));
                    }
                    if !v.is_zero() {
                        bracket.push(((idx(a, b), idx(c, d)), v));
                    }
                }
            }
        }
    }
    let l0 = DgLieAlgebra::from_tables(space.clone(), BTreeMap::new(), bracket.clone()).expect("commutator table");
    let mut dl = SparseVec::new();
    for &(j, i, c) in delta {
        dl.add_term(idx(i, j), &Rational::from_int(c));
    }
    let mut diff = BTreeMap::new();
    for k in 0..space.dim() {
        diff.insert(k, l0.bracket(&dl, &SparseVec::unit(k)));
    }
    DgLieAlgebra::from_tables(space, diff, bracket).expect("commutator table")
}

/// Derivations `u = ∂x`, `v_k = x^k ∂y` (k ≤ 3) of `K[x, y]` with `deg y = −1`,
/// so `[u, v_k] = k v_{k−1}`.
pub fn voronov_ambient() -> DgLieAlgebra {
    let space = GradedVectorSpace::from_pairs(&[("u", 0), ("v0", 1), ("v1", 1), ("v2", 1), ("v3", 1)]).unwrap();
    let bracket = (1..4)
        .map(|k| ((0, k + 1), SparseVec::unit(k).scaled(&Rational::from_int(k as i64))))
        .collect();
    DgLieAlgebra::from_tables(space, BTreeMap::new(), bracket).unwrap()
}

/// The subalgebra `span{v1, v2, v3}` preserving the ideal `(x, y)` and `d = v3 = x³∂y`.
pub fn voronov_data() -> (DgLieAlgebra, Vec<usize>, SparseVec) {
    (voronov_ambient(), vec![2, 3, 4], SparseVec::unit(4))
}

fn table(pairs: &[(&str, i64)], d: &[(&str, &[(&str, i64)])], br: &[(&str, &str, &[(&str, i64)])]) -> DgLieAlgebra {
    let space = GradedVectorSpace::from_pairs(pairs).expect("distinct labels");
    let idx = |x: &str| space.index_of(x).expect("known label");
    let vec = |terms: &[(&str, i64)]| SparseVec::from_terms(terms.iter().map(|&(x, c)| (idx(x), Rational::from_int(c))));
    let diff = d.iter().map(|&(x, v)| (idx(x), vec(v))).collect();
    let bracket = br.iter().map(|&(x, y, v)| ((idx(x), idx(y)), vec(v))).collect();
    DgLieAlgebra::from_tables(space.clone(), diff, bracket).expect("well-formed table")
}

/// The non-abelian two-dimensional Lie algebra `[h, e] = e`, concentrated in degree 0.
pub fn two_dim() -> DgLieAlgebra {
    table(&[("h", 0), ("e", 0)], &[], &[("h", "e", &[("e", 1)])])
}

/// `{h, e}` with `deg e = 1`, `[h, e] = e`; its MC elements form the line through `e`.
pub fn two_dim_odd() -> DgLieAlgebra {
    table(&[("h", 0), ("e", 1)], &[], &[("h", "e", &[("e", 1)])])
}

/// `sl_2` with `[h, e] = 2e`, `[h, f] = −2f`, `[e, f] = h`.
pub fn sl2() -> DgLieAlgebra {
    table(
        &[("h", 0), ("e", 0), ("f", 0)],
        &[],
        &[("h", "e", &[("e", 2)]), ("h", "f", &[("f", -2)]), ("e", "f", &[("h", 1)])],
    )
}

/// The Heisenberg algebra `[x, y] = z`.
pub fn heisenberg() -> DgLieAlgebra {
    table(&[("x", 0), ("y", 0), ("z", 0)], &[], &[("x", "y", &[("z", 1)])])
}

/// `c` closed of degree 0 acting on `a ↦ b = d(a)` by weight one.
/// The transferred structure on the one-dimensional cohomology is abelian.
pub fn transfer_example() -> DgLieAlgebra {
    table(
        &[("c", 0), ("a", 0), ("b", 1)],
        &[("a", &[("b", 1)])],
        &[("c", "a", &[("a", 1)]), ("c", "b", &[("b", 1)])],
    )
}

/// [`transfer_example`] with `[c, b] = b` removed, which breaks the Leibniz rule at `(c, a)`.
pub fn bad_leibniz() -> DgLieAlgebra {
    table(&[("c", 0), ("a", 0), ("b", 1)], &[("a", &[("b", 1)])], &[("c", "a", &[("a", 1)])])
}

/// `Hom*(U, U)` for `U = K a ⊕ K b[−1]`, zero differential.
pub fn hom_uu() -> DgLieAlgebra {
    endomorphisms(&[("a", 0), ("b", 1)], &[])
}

/// `End(U)` with `d = [δ, −]`, `δ(a) = b`; acyclic.
pub fn end_acyclic() -> DgLieAlgebra {
    endomorphisms(&[("a", 0), ("b", 1)], &[(0, 1, 1)])
}

/// `Hom*(U, U) ⋉ I` with `I = {s, t = ds}` acyclic and `x` acting on `I` by
/// the supertrace of `x`. Its cohomology is `Hom*(U, U)`.
pub fn hom_uu_ideal() -> DgLieAlgebra {
    let base = hom_uu();
    let sp = base.space();
    let mut pairs: Vec<(String, i64)> = (0..sp.dim()).map(|i| (sp.label(i).to_string(), sp.degree(i))).collect();
    pairs.push(("s".into(), 0));
    pairs.push(("t".into(), 1));
    let space = GradedVectorSpace::from_pairs(&pairs).expect("distinct labels");
    let idx = |x: &str| space.index_of(x).expect("known label");
    let relabel = |v: &SparseVec| SparseVec::from_terms(v.iter().map(|(i, c)| (idx(sp.label(i)), c.clone())));
    let mut bracket: Vec<((usize, usize), SparseVec)> = base
        .bracket_table()
        .iter()
        .map(|(&(i, j), v)| ((idx(sp.label(i)), idx(sp.label(j))), relabel(v)))
        .collect();
    for (x, w) in [("aa", 1), ("bb", -1)] {
        for y in ["s", "t"] {
            bracket.push(((idx(x), idx(y)), SparseVec::unit(idx(y)).scaled(&Rational::from_int(w))));
        }
    }
    let mut diff = BTreeMap::new();
    diff.insert(idx("s"), SparseVec::unit(idx("t")));
    DgLieAlgebra::from_tables(space, diff, bracket).expect("well-formed table")
}

/// Degree-1 `e1, e2` and degree-2 `f` with `[e1, e1] = f`, `[e2, e2] = −f`.
/// `t(a e1 + b e2)` lifts to second order exactly when `a² = b²`.
pub fn mc_lattice() -> DgLieAlgebra {
    table(
        &[("e1", 1), ("e2", 1), ("f", 2)],
        &[],
        &[("e1", "e1", &[("f", 1)]), ("e2", "e2", &[("f", -1)])],
    )
}

/// Décalage of [`hom_uu`] conjugated by `e^{α̂}` for a fixed arity-2 `α`,
/// so that `q_3, q_4, …` are nonzero but gauge-trivial.
pub fn gauge_formal(weight: usize) -> LInfinityAlgebra {
    let v = decalage(&hom_uu(), weight);
    let sp = v.space().clone();
    let mut alpha = Multilinear::zero(2, 0);
    let mut k = 0i64;
    for t in PowerBasis::new(&sp, PowerKind::Symmetric, 2).elements() {
        let deg = sp.degree(t[0]) + sp.degree(t[1]);
        for w in sp.range_in(deg) {
            k += 1;
            if k % 3 != 0 {
                alpha.add_at(t, &Rational::from_int(k % 5 - 2), &SparseVec::unit(w));
            }
        }
    }
    let mut a = BTreeMap::new();
    a.insert(2, alpha);
    let taylor = conjugate(&sp, v.taylor(), &a, weight);
    LInfinityAlgebra::new(sp, taylor, weight).expect("conjugation keeps degrees")
}

/// The inclusion `Hom*(U, U) → Hom*(U, U) ⋉ I`, a quasi-isomorphism.
pub fn ideal_inclusion() -> DglaMorphism {
    let (src, tgt) = (hom_uu(), hom_uu_ideal());
    let images = (0..src.dim())
        .map(|i| SparseVec::unit(tgt.space().index_of(src.space().label(i)).expect("shared label")))
        .collect();
    DglaMorphism::new(src, tgt.clone(), GradedMap::new(0, tgt.dim(), images).expect("in range")).expect("degree 0")
}

/// `L = {a, c}` abelian inside `M = {a, z, c}` with `[z, a] = c`, degrees 1, 1, 2.
pub fn abelian_inclusion() -> DglaMorphism {
    let src = table(&[("a", 1), ("c", 2)], &[], &[]);
    let tgt = table(&[("a", 1), ("z", 1), ("c", 2)], &[], &[("z", "a", &[("c", 1)])]);
    let images = (0..src.dim())
        .map(|i| SparseVec::unit(tgt.space().index_of(src.space().label(i)).expect("shared label")))
        .collect();
    DglaMorphism::new(src, tgt.clone(), GradedMap::new(0, tgt.dim(), images).expect("in range")).expect("degree 0")
}

/// All shipped problem files, in the order they are listed in the fixtures directory.
pub fn shipped() -> Vec<(&'static str, ProblemFile)> {
    let (g, n, d) = voronov_data();
    let mut voronov = ProblemFile {
        ambient: Some(AlgebraSpec::from_dgla(&g)),
        subalgebra: Some(n.iter().map(|&i| g.space().label(i).to_string()).collect()),
        element: Some(vector_spec(g.space(), &d)),
        ..ProblemFile::from_dgla(&g)
    };
    voronov.kind = Kind::Voronov;
    voronov.space = None;
    voronov.bracket = None;
    voronov.differential = None;
    let mut dual = ProblemFile::from_morphism(&dual_numbers(&hom_uu()).expect("dual numbers"));
    dual.properties.m_formal = Some(true);
    let mut qi = ProblemFile::from_morphism(&ideal_inclusion());
    qi.properties.m_formal = Some(true);
    let te = two_dim_odd();
    let e = SparseVec::unit(1);
    let series = TruncatedElement::new(5, vec![e.clone(), e.clone(), e.clone(), e]).expect("order 5");
    let mut gauge = ProblemFile::from_mc(&te, &TruncatedElement::linear(5, SparseVec::unit(1)).expect("order 5"));
    gauge.gauge = Some(vec![vector_spec(te.space(), &SparseVec::unit(0))]);
    vec![
        ("two_dim", ProblemFile::from_dgla(&two_dim()).with_name("two_dim", "[h, e] = e in degree 0")),
        ("sl2", ProblemFile::from_dgla(&sl2()).with_name("sl2", "[h, e] = 2e, [h, f] = -2f, [e, f] = h")),
        ("heisenberg", ProblemFile::from_dgla(&heisenberg()).with_name("heisenberg", "[x, y] = z in degree 0")),
        (
            "transfer_example",
            ProblemFile::from_dgla(&transfer_example())
                .with_name("transfer_example", "d(a) = b, c closed, [c, a] = a; one-dimensional cohomology"),
        ),
        ("hom_uu", ProblemFile::from_dgla(&hom_uu()).with_name("hom_uu", "Hom(U, U) for U = K a + K b[-1], d = 0")),
        ("end_acyclic", ProblemFile::from_dgla(&end_acyclic()).with_name("end_acyclic", "End(U) with d = [delta, -], delta(a) = b")),
        (
            "hom_uu_ideal",
            ProblemFile::from_dgla(&hom_uu_ideal())
                .with_name("hom_uu_ideal", "Hom(U, U) extended by an acyclic ideal; H = Hom(U, U)"),
        ),
        (
            "mc_lattice",
            ProblemFile::from_dgla(&mc_lattice()).with_name("mc_lattice", "[e1, e1] = f, [e2, e2] = -f in degrees 1, 1, 2"),
        ),
        (
            "voronov",
            voronov.with_name("voronov", "derived brackets of d = x^3 dy on span{x dy, x^2 dy, x^3 dy}"),
        ),
        (
            "gauge_formal",
            ProblemFile::from_linf(&gauge_formal(5))
                .with_name("gauge_formal", "decalage of hom_uu conjugated by exp of an arity-2 coderivation"),
        ),
        ("bad", ProblemFile::from_dgla(&bad_leibniz()).with_name("bad", "transfer_example with [c, b] removed")),
        ("dual_numbers", dual.with_name("dual_numbers", "hom_uu into hom_uu tensor K[eps]/(eps^2)")),
        ("ideal_inclusion", qi.with_name("ideal_inclusion", "hom_uu into hom_uu_ideal, a quasi-isomorphism")),
        (
            "abelian_inclusion",
            ProblemFile::from_morphism(&abelian_inclusion())
                .with_name("abelian_inclusion", "{a, c} abelian inside {a, z, c} with [z, a] = c"),
        ),
        (
            "mc_series",
            ProblemFile::from_mc(&te, &series).with_name("mc_series", "t e + t^2 e + t^3 e + t^4 e in {h, e}, deg e = 1"),
        ),
        ("mc_gauge", gauge.with_name("mc_gauge", "gauge action of t h on t e in {h, e}, deg e = 1")),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgla::cohomology;
    use crate::formality::{formality_verdict, transfer_criterion, FormalityInput, TransferConclusion};
    use crate::problem::Problem;

    #[test]
    fn algebras_validate() {
        for l in [two_dim(), two_dim_odd(), sl2(), heisenberg(), transfer_example(), hom_uu(), end_acyclic(), hom_uu_ideal(), mc_lattice()] {
            assert!(l.validate().passed(), "{:?}", l.validate().first_failure());
        }
        let bad = bad_leibniz().validate();
        let f = bad.first_failure().unwrap();
        assert_eq!(f.axiom, "Leibniz");
        assert_eq!(f.witness.as_deref(), Some("(c, a)"));
        assert!(gauge_formal(5).validate().passed());
        assert!(gauge_formal(5).taylor().contains_key(&3));
        for f in [ideal_inclusion(), abelian_inclusion(), dual_numbers(&hom_uu()).unwrap()] {
            assert!(f.validate().passed());
        }
    }

    #[test]
    fn ideal_has_the_cohomology_of_hom() {
        assert_eq!(cohomology(&hom_uu_ideal().complex()).unwrap().cohomology.dim(), 4);
        assert_eq!(cohomology(&end_acyclic().complex()).unwrap().cohomology.dim(), 0);
        assert!(ideal_inclusion().is_quasi_isomorphism().unwrap());
    }

    #[test]
    fn verdicts() {
        let r = formality_verdict(FormalityInput::Dgla(&hom_uu_ideal()), 5, 5).unwrap();
        assert_eq!(r.verdict.name(), "FormalUpTo");
        assert!(r.obstructions.euler.is_zero());
        let r = formality_verdict(FormalityInput::Linf(&gauge_formal(5)), 5, 5).unwrap();
        assert_eq!(r.verdict.name(), "FormalUpTo");
        let r = formality_verdict(FormalityInput::Dgla(&transfer_example()), 5, 5).unwrap();
        assert_eq!(r.verdict.name(), "HomotopyAbelianUpTo");
    }

    #[test]
    fn transfer() {
        let r = transfer_criterion(&dual_numbers(&hom_uu()).unwrap(), 5, Some(true), 5).unwrap();
        assert_eq!(r.conclusion, TransferConclusion::FormalUpToBounds);
        let r = transfer_criterion(&abelian_inclusion(), 5, None, 5).unwrap();
        println!("{r:?}");
    }

    #[test]
    fn shipped_files_build() {
        for (name, file) in shipped() {
            let back = ProblemFile::parse(&file.to_json()).unwrap();
            assert_eq!(back, file, "{name}");
            let p = back.build(5).unwrap();
            if name == "voronov" {
                assert!(matches!(p, Problem::Voronov(_)));
            }
        }
    }
}
