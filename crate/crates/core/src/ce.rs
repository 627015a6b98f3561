//! The Chevalley–Eilenberg bicomplex `CE(L, M)`, truncated to columns `p < l`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::dgla::{cohomology, DgLieAlgebra, DgModule, DglaMorphism};
use crate::error::{consistency, invalid, Result};
use crate::graded::GradedVectorSpace;
use crate::linalg::{Matrix, SparseVec};
use crate::power::{normalize, PowerBasis, PowerKind};
use crate::rational::Rational;
use crate::specseq::{FilteredComplex, FilteredMap, SpectralSequence};

/// Sign of moving entries of an exterior word into a new order, `x = sign · x_order`.
pub(crate) fn reorder_sign(degrees: &[i64], order: &[usize]) -> i64 {
    let mut s = 1;
    for a in 0..order.len() {
        for b in a + 1..order.len() {
            if order[a] > order[b] {
                s *= -crate::power::swap_sign(PowerKind::Symmetric, degrees[order[a]], degrees[order[b]]);
            }
        }
    }
    s
}

/// `CE(L, M)` with its column filtration and both differentials.
#[derive(Clone, Debug)]
pub struct CeBicomplex {
    module: DgModule,
    columns: usize,
    powers: Vec<PowerBasis>,
    offsets: Vec<usize>,
    delta: Vec<Vec<SparseVec>>,
    delta_bar: Vec<Vec<SparseVec>>,
    filtered: FilteredComplex,
}

impl CeBicomplex {
    pub fn base(&self) -> &DgLieAlgebra {
        self.module.base()
    }

    pub fn module(&self) -> &DgModule {
        &self.module
    }

    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn power(&self, p: usize) -> &PowerBasis {
        &self.powers[p]
    }

    pub fn column_dim(&self, p: usize) -> usize {
        self.powers[p].len() * self.module.space().dim()
    }

    pub fn dim(&self) -> usize {
        self.offsets[self.columns]
    }

    pub fn flat_index(&self, p: usize, tuple: usize, m: usize) -> usize {
        self.offsets[p] + tuple * self.module.space().dim() + m
    }

    /// `(p, canonical tuple, target index)` of a flat basis vector.
    pub fn element(&self, flat: usize) -> (usize, &[usize], usize) {
        let p = self.offsets.partition_point(|&o| o <= flat) - 1;
        let dm = self.module.space().dim();
        let k = flat - self.offsets[p];
        (p, self.powers[p].element(k / dm), k % dm)
    }

    /// Hom-degree `q` of a flat basis vector.
    pub fn hom_degree(&self, flat: usize) -> i64 {
        let p = self.offsets.partition_point(|&o| o <= flat) - 1;
        let dm = self.module.space().dim();
        let k = flat - self.offsets[p];
        self.module.space().degree(k % dm) - self.powers[p].degree(k / dm)
    }

    /// δ from column `p` to `p + 1`.
    pub fn delta_matrix(&self, p: usize) -> Matrix {
        column_matrix(&self.delta[p], self.column_dim((p + 1).min(self.columns - 1)), p + 1 < self.columns)
    }

    /// δ̄ on column `p`.
    pub fn delta_bar_matrix(&self, p: usize) -> Matrix {
        column_matrix(&self.delta_bar[p], self.column_dim(p), true)
    }

    pub fn filtered(&self) -> &FilteredComplex {
        &self.filtered
    }

    pub fn spectral_sequence(&self) -> Result<SpectralSequence> {
        SpectralSequence::new(&self.filtered)
    }

    /// The flat vector of the cochain taking the value `f(t)` on each canonical tuple of column `p`.
    pub fn cochain<F: FnMut(&[usize]) -> SparseVec>(&self, p: usize, mut f: F) -> SparseVec {
        let mut out = SparseVec::new();
        for (k, t) in self.powers[p].elements().iter().enumerate() {
            for (m, c) in f(t).iter() {
                out.add_term(self.flat_index(p, k, m), c);
            }
        }
        out
    }

    /// Value of a flat cochain on a canonical tuple of column `p`.
    pub fn value(&self, cochain: &SparseVec, p: usize, tuple: &[usize]) -> SparseVec {
        let Some(k) = self.powers[p].index_of(tuple) else { return SparseVec::new() };
        let dm = self.module.space().dim();
        let lo = self.flat_index(p, k, 0);
        SparseVec::from_terms(cochain.iter().filter(|(j, _)| *j >= lo && *j < lo + dm).map(|(j, c)| (j - lo, c.clone())))
    }

    pub fn format_cochain(&self, v: &SparseVec) -> String {
        if v.is_zero() {
            return "0".into();
        }
        let (ls, ms) = (self.base().space(), self.module.space());
        let terms: Vec<String> = v
            .iter()
            .map(|(j, c)| {
                let (_, t, m) = self.element(j);
                let args: Vec<&str> = t.iter().map(|&i| ls.label(i)).collect();
                format!("{c}*[({}) -> {}]", args.join(" ^ "), ms.label(m))
            })
            .collect();
        terms.join(" + ")
    }
}

fn column_matrix(images: &[SparseVec], rows: usize, present: bool) -> Matrix {
    let mut m = Matrix::zeros(if present { rows } else { 0 }, images.len());
    if present {
        for (j, v) in images.iter().enumerate() {
            for (i, c) in v.iter() {
                m.set(i, j, c.clone());
            }
        }
    }
    m
}

/// Builds `CE(L, M)` on columns `0 ≤ p < l` and asserts δ² = 0, δ̄² = 0, δδ̄ + δ̄δ = 0.
pub fn build_ce(module: &DgModule, l: usize) -> Result<CeBicomplex> {
    if l == 0 {
        return invalid("column bound must be at least 1");
    }
    let l_alg = module.base();
    let ls = l_alg.space();
    let ms = module.space();
    let (ldeg, mdeg) = (ls.degrees(), ms.degrees());
    let dm = ms.dim();
    // one extra power so δ out of the last column can be checked and dropped
    let powers: Vec<PowerBasis> = (0..=l).map(|p| PowerBasis::new(ls, PowerKind::Exterior, p)).collect();
    let mut offsets = vec![0];
    for p in 0..l {
        offsets.push(offsets[p] + powers[p].len() * dm);
    }
    let tdeg = |p: usize, k: usize| powers[p].degree(k);

    // δ̄ on each column, as images of basis vectors in column-local indices
    let mut delta_bar = Vec::with_capacity(l);
    for p in 0..l {
        let pb = &powers[p];
        let mut images = vec![SparseVec::new(); pb.len() * dm];
        for (k, t) in pb.elements().iter().enumerate() {
            for m in 0..dm {
                for (m2, c) in module.differential().image(m).iter() {
                    images[k * dm + m].add_term(k * dm + m2, c);
                }
            }
            let mut prefix = 0;
            for i in 0..p {
                for (e, c) in l_alg.differential().image(t[i]).iter() {
                    let mut u = t.clone();
                    u[i] = e;
                    let Some((s, sigma)) = normalize(PowerKind::Exterior, ldeg, &u) else { continue };
                    let s = pb.index_of(&s).expect("canonical tuple");
                    for m in 0..dm {
                        let phi = mdeg[m] - tdeg(p, s);
                        let coef = -Rational::sign(phi + prefix) * c * Rational::from_int(sigma);
                        images[s * dm + m].add_term(k * dm + m, &coef);
                    }
                }
                prefix += ldeg[t[i]];
            }
        }
        delta_bar.push(images);
    }

    // δ from column p − 1 to p, driven by the target tuple
    let mut delta: Vec<Vec<SparseVec>> = (0..l).map(|p| vec![SparseVec::new(); powers[p].len() * dm]).collect();
    for p in 1..=l {
        let src = &powers[p - 1];
        for (k, t) in powers[p].elements().iter().enumerate() {
            let xd: Vec<i64> = t.iter().map(|&i| ldeg[i]).collect();
            let mut add = |s: usize, m: usize, val: &SparseVec, c: &Rational| {
                let phi = mdeg[m] - tdeg(p - 1, s);
                let c = c * &Rational::sign(phi + p as i64 - 1);
                for (m2, x) in val.iter() {
                    delta[p - 1][s * dm + m].add_term(k * dm + m2, &(&c * x));
                }
            };
            for i in 0..p {
                let mut order: Vec<usize> = (0..p).filter(|&a| a != i).collect();
                order.push(i);
                let chi = reorder_sign(&xd, &order);
                let rest: Vec<usize> = order[..p - 1].iter().map(|&a| t[a]).collect();
                let Some((s, sigma)) = normalize(PowerKind::Exterior, ldeg, &rest) else { continue };
                let s = src.index_of(&s).expect("canonical tuple");
                let xi = SparseVec::unit(t[i]);
                for m in 0..dm {
                    let val = module.act(&SparseVec::unit(m), &xi);
                    if !val.is_zero() {
                        add(s, m, &val, &Rational::from_int(chi * sigma));
                    }
                }
            }
            for i in 0..p {
                for j in i + 1..p {
                    let br = l_alg.bracket_basis(t[i], t[j]);
                    if br.is_zero() {
                        continue;
                    }
                    let mut order: Vec<usize> = (0..p).filter(|&a| a != i && a != j).collect();
                    order.push(i);
                    order.push(j);
                    let chi = reorder_sign(&xd, &order);
                    for (e, c) in br.iter() {
                        let mut u: Vec<usize> = order[..p - 2].iter().map(|&a| t[a]).collect();
                        u.push(e);
                        let Some((s, sigma)) = normalize(PowerKind::Exterior, ldeg, &u) else { continue };
                        let s = src.index_of(&s).expect("canonical tuple");
                        let coef = -(c * &Rational::from_int(chi * sigma));
                        for m in 0..dm {
                            add(s, m, &SparseVec::unit(m), &coef);
                        }
                    }
                }
            }
        }
    }

    // assemble the truncated total complex
    let mut cells = Vec::with_capacity(offsets[l]);
    let mut diff = Vec::with_capacity(offsets[l]);
    for p in 0..l {
        for k in 0..powers[p].len() {
            for m in 0..dm {
                let q = mdeg[m] - tdeg(p, k);
                cells.push((p as i64 + q, p));
                let local = k * dm + m;
                let mut img = SparseVec::from_terms(delta_bar[p][local].iter().map(|(i, c)| (offsets[p] + i, c.clone())));
                if p + 1 < l {
                    for (i, c) in delta[p][local].iter() {
                        img.add_term(offsets[p + 1] + i, c);
                    }
                }
                diff.push(img);
            }
        }
    }
    let ce = CeBicomplex {
        module: module.clone(),
        columns: l,
        powers,
        offsets,
        delta,
        delta_bar,
        filtered: FilteredComplex::new(cells, diff, l)?,
    };
    ce.check_identities()?;
    Ok(ce)
}

impl CeBicomplex {
    /// δ² = 0, δ̄² = 0 and δδ̄ + δ̄δ = 0 on every column, including the map into column `l`.
    pub fn check_identities(&self) -> Result<()> {
        let full_delta = |p: usize| column_matrix(&self.delta[p], self.powers[p + 1].len() * self.module.space().dim(), true);
        for p in 0..self.columns {
            let db = self.delta_bar_matrix(p);
            if !db.mul(&db).is_zero() {
                return consistency(format!("delta-bar squared is nonzero on column {p}"));
            }
            if p + 1 < self.columns {
                let d = full_delta(p);
                let d_next = full_delta(p + 1);
                if !d_next.mul(&d).is_zero() {
                    return consistency(format!("delta squared is nonzero on column {p}"));
                }
                let anti = d.mul(&db).add(&self.delta_bar_matrix(p + 1).mul(&d));
                if !anti.is_zero() {
                    return consistency(format!("delta and delta-bar do not anticommute on column {p}"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FirstPageRow {
    pub p: i64,
    pub q: i64,
    pub computed: usize,
    pub expected: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FirstPageReport {
    pub columns: usize,
    pub rows: Vec<FirstPageRow>,
}

/// Graded dimensions of `Hom(V^{∧p}, W)` (or `V^{⊙p}`), keyed by Hom-degree.
pub fn hom_dims(v: &GradedVectorSpace, w: &GradedVectorSpace, kind: PowerKind, p: usize) -> BTreeMap<i64, usize> {
    let pb = PowerBasis::new(v, kind, p);
    let mut out = BTreeMap::new();
    for k in 0..pb.len() {
        for (&d, labels) in w.components() {
            *out.entry(d - pb.degree(k)).or_insert(0) += labels.len();
        }
    }
    out
}

/// Compares `E_1` of `CE(L, M)` with `Hom(H(L)^{∧p}, H(M))` dimensionwise.
pub fn ce_first_page_check(module: &DgModule, l: usize) -> Result<FirstPageReport> {
    let ce = build_ce(module, l)?;
    let ss = SpectralSequence::compute(ce.filtered(), 1)?;
    let hl = cohomology(&module.base().complex())?.cohomology;
    let hm = cohomology(&module.complex())?.cohomology;
    let page = ss.page(1);
    let mut rows = Vec::new();
    for p in 0..l {
        let expected = hom_dims(&hl, &hm, PowerKind::Exterior, p);
        let mut qs: Vec<i64> = expected.keys().copied().collect();
        qs.extend(page.dims().keys().filter(|k| k.0 == p as i64).map(|k| k.1));
        qs.sort_unstable();
        qs.dedup();
        for q in qs {
            let (c, e) = (page.dim(p as i64, q), expected.get(&q).copied().unwrap_or(0));
            if c != e {
                return consistency(format!("E_1^({p}, {q}) has dimension {c}, expected {e}"));
            }
            rows.push(FirstPageRow { p: p as i64, q, computed: c, expected: e });
        }
    }
    Ok(FirstPageReport { columns: l, rows })
}

/// `f_*: CE(L, L) → CE(L, M; f)`, `φ ↦ f ∘ φ`.
pub fn pushforward(f: &DglaMorphism, source: &CeBicomplex, target: &CeBicomplex) -> Result<FilteredMap> {
    check_shapes(source, target, f.source.space(), f.source.space())?;
    let mut images = Vec::with_capacity(source.dim());
    for j in 0..source.dim() {
        let (p, t, m) = source.element(j);
        let k = target.power(p).index_of(t).expect("same tuples");
        let img = f.map.image(m);
        images.push(SparseVec::from_terms(img.iter().map(|(m2, c)| (target.flat_index(p, k, m2), c.clone()))));
    }
    Ok(FilteredMap { images, degree_shift: 0, column_shift: 0, sign: 1 })
}

/// `f^*: CE(M, M) → CE(L, M; f)`, `ψ ↦ ψ ∘ f^{∧p}`.
pub fn pullback(f: &DglaMorphism, source: &CeBicomplex, target: &CeBicomplex) -> Result<FilteredMap> {
    check_shapes(source, target, f.target.space(), f.source.space())?;
    let mdeg = f.target.space().degrees();
    let dm = f.target.space().dim();
    let mut images = vec![SparseVec::new(); source.dim()];
    for p in 0..target.columns() {
        for (k, t) in target.power(p).elements().iter().enumerate() {
            // expand f(x_1) ∧ … ∧ f(x_p) into canonical M-tuples
            let mut terms: Vec<(Vec<usize>, Rational)> = vec![(Vec::new(), Rational::one())];
            for &x in t.iter() {
                let mut next = Vec::new();
                for (u, c) in &terms {
                    for (y, a) in f.map.image(x).iter() {
                        let mut w = u.clone();
                        w.push(y);
                        next.push((w, c * a));
                    }
                }
                terms = next;
            }
            let mut expanded: BTreeMap<usize, Rational> = BTreeMap::new();
            for (w, c) in terms {
                if let Some((s, sigma)) = normalize(PowerKind::Exterior, mdeg, &w) {
                    let s = source.power(p).index_of(&s).expect("canonical tuple");
                    *expanded.entry(s).or_default() += &c * &Rational::from_int(sigma);
                }
            }
            for (s, c) in expanded {
                if c.is_zero() {
                    continue;
                }
                for m in 0..dm {
                    images[source.flat_index(p, s, m)].add_term(target.flat_index(p, k, m), &c);
                }
            }
        }
    }
    Ok(FilteredMap { images, degree_shift: 0, column_shift: 0, sign: 1 })
}

fn check_shapes(source: &CeBicomplex, target: &CeBicomplex, src_base: &GradedVectorSpace, tgt_base: &GradedVectorSpace) -> Result<()> {
    if source.columns() != target.columns() {
        return invalid("CE complexes must have the same column bound");
    }
    if source.base().space() != src_base || target.base().space() != tgt_base {
        return invalid("CE complexes do not match the morphism");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded::GradedMap;

    fn he() -> DgLieAlgebra {
        let sp = GradedVectorSpace::from_pairs(&[("h", 0), ("e", 0)]).unwrap();
        DgLieAlgebra::from_tables(sp, BTreeMap::new(), vec![((0, 1), SparseVec::unit(1))]).unwrap()
    }

    #[test]
    fn dimension_count_for_two_dim_algebra() {
        let ce = build_ce(&DgModule::adjoint(&he()), 3).unwrap();
        assert_eq!(ce.dim(), 8);
        let dims: Vec<usize> = (0..3).map(|n| ce.filtered().dim_in(n)).collect();
        assert_eq!(dims, [2, 4, 2]);
    }

    #[test]
    fn delta_of_identity_on_two_dim_algebra() {
        let l = he();
        let ce = build_ce(&DgModule::adjoint(&l), 3).unwrap();
        let id = ce.cochain(1, |t| SparseVec::unit(t[0]));
        let d = ce.filtered().apply(&id);
        // −([h, e] − [e, h] − [h, e]) = [e, h] = −e
        assert_eq!(ce.value(&d, 2, &[0, 1]), SparseVec::unit(1).scaled(&Rational::from_int(-1)));
    }

    #[test]
    fn delta_of_zero_cochain_is_signed_action() {
        let l = he();
        let ce = build_ce(&DgModule::adjoint(&l), 2).unwrap();
        // (δ e)(h) = [e, h] = -e
        let d = ce.filtered().apply(&ce.cochain(0, |_| SparseVec::unit(1)));
        assert_eq!(ce.value(&d, 1, &[0]), SparseVec::unit(1).scaled(&Rational::from_int(-1)));
    }

    #[test]
    fn delta_bar_on_hom_complex() {
        let sp = GradedVectorSpace::from_pairs(&[("a", 0), ("b", 1)]).unwrap();
        let d = GradedMap::new(1, 2, vec![SparseVec::unit(1), SparseVec::new()]).unwrap();
        let l = DgLieAlgebra::new(sp, d, BTreeMap::new()).unwrap();
        let ce = build_ce(&DgModule::adjoint(&l), 2).unwrap();
        // φ = (a ↦ a): δ̄φ = dφ − φd = (a ↦ b) − (b ↦ ... 0) ... check directly
        let phi = ce.cochain(1, |t| if t == [0] { SparseVec::unit(0) } else { SparseVec::new() });
        let out = ce.filtered().apply(&phi);
        let mut restricted = SparseVec::new();
        for (j, c) in out.iter() {
            if ce.element(j).0 == 1 {
                restricted.add_term(j, c);
            }
        }
        // d∘φ sends a to b; φ∘d sends a to φ(b) = 0 and b to 0
        let expect = ce.cochain(1, |t| if t == [0] { SparseVec::unit(1) } else { SparseVec::new() });
        assert_eq!(restricted, expect);
        assert_eq!(ce.delta_bar_matrix(1).rows(), 4);
    }

    #[test]
    fn first_page_matches_hom_of_cohomology() {
        let sp = GradedVectorSpace::from_pairs(&[("a", 0), ("c", 0), ("b", 1)]).unwrap();
        let d = GradedMap::new(1, 3, vec![SparseVec::unit(2), SparseVec::new(), SparseVec::new()]).unwrap();
        let l = DgLieAlgebra::new(sp.clone(), d.clone(), BTreeMap::new()).unwrap();
        let m = DgModule::new(l.clone(), sp, d, BTreeMap::new()).unwrap();
        let rep = ce_first_page_check(&m, 3).unwrap();
        assert!(rep.rows.iter().all(|r| r.computed == r.expected));
        ce_first_page_check(&DgModule::adjoint(&he()), 4).unwrap();
    }
}
