//! Weight-truncated L∞[1]-algebras, their morphisms, décalage, coderivation
//! complexes and higher derived brackets.

use std::collections::BTreeMap;

use crate::dgla::{cohomology, AxiomCheck, DgLieAlgebra, ValidationReport};
use crate::error::{consistency, invalid, Error, Result};
use crate::graded::{GradedMap, GradedVectorSpace};
use crate::linalg::SparseVec;
use crate::multilinear::{compose_lift, euler_map, nr_bracket, nr_bracket_sum, Multilinear};
use crate::power::{normalize, set_partitions, unshuffles, PowerBasis, PowerKind, SymTensor};
use crate::rational::Rational;
use crate::specseq::{FilteredComplex, FilteredMap, SpectralSequence};

/// Taylor coefficients indexed by arity.
pub type Taylor = BTreeMap<usize, Multilinear>;

fn residual_check(space: &GradedVectorSpace, axiom: &str, n: usize, residual: &Multilinear) -> AxiomCheck {
    match residual.values().iter().next() {
        None => AxiomCheck { axiom: axiom.into(), passed: true, witness: None, residual: None },
        Some((t, v)) => {
            let labels: Vec<&str> = t.iter().map(|&i| space.label(i)).collect();
            AxiomCheck {
                axiom: axiom.into(),
                passed: false,
                witness: Some(format!("n = {n}, ({})", labels.join(", "))),
                residual: Some(space.format_vector(v)),
            }
        }
    }
}

/// `(V, q_1, q_2, …)` with `q_n = 0` declared for `n > weight`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LInfinityAlgebra {
    space: GradedVectorSpace,
    taylor: Taylor,
    weight: usize,
}

impl LInfinityAlgebra {
    pub fn new(space: GradedVectorSpace, taylor: Taylor, weight: usize) -> Result<Self> {
        let mut kept = BTreeMap::new();
        for (n, q) in taylor {
            if n == 0 {
                return invalid("curved structures (q_0) are not supported");
            }
            if q.arity() != n || q.degree() != 1 {
                return invalid(format!("q_{n} must have arity {n} and degree +1"));
            }
            if q.values().keys().any(|t| normalize(PowerKind::Symmetric, space.degrees(), t).map(|x| x.0) != Some(t.clone()))
            {
                return invalid(format!("q_{n} is given on a non-canonical tuple"));
            }
            if let Some(t) = q.homogeneity_violation(&space, &space) {
                let labels: Vec<&str> = t.iter().map(|&i| space.label(i)).collect();
                return invalid(format!("q_{n}({}) is not of degree +1", labels.join(", ")));
            }
            if n <= weight && !q.is_zero() {
                kept.insert(n, q);
            }
        }
        Ok(LInfinityAlgebra { space, taylor: kept, weight })
    }

    pub fn zero(space: GradedVectorSpace, weight: usize) -> Self {
        LInfinityAlgebra { space, taylor: BTreeMap::new(), weight }
    }

    pub fn space(&self) -> &GradedVectorSpace {
        &self.space
    }

    pub fn weight(&self) -> usize {
        self.weight
    }

    pub fn taylor(&self) -> &Taylor {
        &self.taylor
    }

    pub fn q(&self, n: usize) -> Multilinear {
        self.taylor.get(&n).cloned().unwrap_or_else(|| Multilinear::zero(n, 1))
    }

    pub fn is_minimal(&self) -> bool {
        !self.taylor.contains_key(&1)
    }

    /// Whether only `q_1` and `q_2` are nonzero up to the weight bound.
    pub fn is_dgla_like(&self) -> bool {
        self.taylor.keys().all(|&n| n <= 2)
    }

    pub fn with_weight(&self, weight: usize) -> Self {
        let taylor = self.taylor.iter().filter(|(&n, _)| n <= weight).map(|(&n, q)| (n, q.clone())).collect();
        LInfinityAlgebra { space: self.space.clone(), taylor, weight }
    }

    /// The residual `Σ_{a+b=n+1} q_a q̂_b` on `V^{⊙n}`.
    pub fn relation(&self, n: usize) -> Multilinear {
        let mut out = Multilinear::zero(n, 2);
        for (&a, qa) in &self.taylor {
            if a > n {
                continue;
            }
            if let Some(qb) = self.taylor.get(&(n + 1 - a)) {
                out.add_scaled(&Rational::one(), &compose_lift(&self.space, qa, qb));
            }
        }
        out
    }

    /// Checks the quadratic relations for `1 ≤ n ≤ weight`.
    pub fn validate(&self) -> ValidationReport {
        let checks = (1..=self.weight)
            .map(|n| residual_check(&self.space, &format!("relation n = {n}"), n, &self.relation(n)))
            .collect();
        ValidationReport { checks }
    }
}

/// `F(v_1 ⋯ v_n)` for the coalgebra map with corestriction components `f`.
pub fn coalgebra_image(f: &Taylor, source: &[i64], target: &[i64], tuple: &[usize]) -> SymTensor {
    let tdeg: Vec<i64> = tuple.iter().map(|&i| source[i]).collect();
    let mut out = SymTensor::new();
    for (blocks, sign) in set_partitions(&tdeg) {
        let mut acc = SymTensor::unit(Vec::new());
        for b in &blocks {
            let Some(fb) = f.get(&b.len()) else {
                acc = SymTensor::new();
                break;
            };
            let args: Vec<usize> = b.iter().map(|&i| tuple[i]).collect();
            let v = fb.eval(source, &args);
            if v.is_zero() {
                acc = SymTensor::new();
                break;
            }
            acc = acc.product(&SymTensor::from_vector(&v), target);
        }
        out.add_scaled(&Rational::from_int(sign), &acc);
    }
    out
}

/// `Σ_k g_k` applied arity-wise to a tensor.
pub(crate) fn corestrict(g: &Taylor, x: &SymTensor) -> SparseVec {
    let mut out = SparseVec::new();
    for (t, c) in x.iter() {
        if let Some(gk) = g.get(&t.len()) {
            if let Some(v) = gk.get(t) {
                out.add_scaled(c, v);
            }
        }
    }
    out
}

/// The coderivation `Σ_j α̂_j` applied to a tensor.
fn coderivation_apply(alpha: &Taylor, degrees: &[i64], x: &SymTensor) -> SymTensor {
    let mut out = SymTensor::new();
    for a in alpha.values() {
        out.add_scaled(&Rational::one(), &a.lift_apply_tensor(degrees, x));
    }
    out
}

/// An L∞[1]-morphism given by its corestriction components `f_j`, `j ≤ weight`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LInfinityMorphism {
    pub source: LInfinityAlgebra,
    pub target: LInfinityAlgebra,
    components: Taylor,
    weight: usize,
}

impl LInfinityMorphism {
    pub fn new(source: LInfinityAlgebra, target: LInfinityAlgebra, components: Taylor) -> Result<Self> {
        let weight = source.weight.min(target.weight);
        let mut kept = BTreeMap::new();
        for (j, f) in components {
            if j == 0 || f.arity() != j || f.degree() != 0 {
                return invalid(format!("morphism component {j} must have arity {j} and degree 0"));
            }
            if f.homogeneity_violation(&source.space, &target.space).is_some() {
                return invalid(format!("morphism component {j} is not homogeneous of degree 0"));
            }
            if j <= weight && !f.is_zero() {
                kept.insert(j, f);
            }
        }
        Ok(LInfinityMorphism { source, target, components: kept, weight })
    }

    pub fn identity(v: &LInfinityAlgebra) -> Self {
        let mut components = BTreeMap::new();
        if v.space.dim() > 0 {
            components.insert(1, Multilinear::identity(v.space.dim()));
        }
        LInfinityMorphism { source: v.clone(), target: v.clone(), components, weight: v.weight }
    }

    pub fn linear(source: LInfinityAlgebra, target: LInfinityAlgebra, map: &GradedMap) -> Result<Self> {
        let mut c = BTreeMap::new();
        c.insert(1, Multilinear::linear(0, map.images()));
        Self::new(source, target, c)
    }

    pub fn weight(&self) -> usize {
        self.weight
    }

    pub fn components(&self) -> &Taylor {
        &self.components
    }

    pub fn component(&self, j: usize) -> Multilinear {
        self.components.get(&j).cloned().unwrap_or_else(|| Multilinear::zero(j, 0))
    }

    pub fn linear_part(&self) -> GradedMap {
        let f = self.component(1);
        let images = (0..self.source.space.dim()).map(|i| f.get(&[i]).cloned().unwrap_or_default()).collect();
        GradedMap::new(0, self.target.space.dim(), images).expect("images inside the target")
    }

    pub fn apply(&self, tuple: &[usize]) -> SymTensor {
        coalgebra_image(&self.components, self.source.space.degrees(), self.target.space.degrees(), tuple)
    }

    /// The residual of `f Q = R f` on `V^{⊙n}`.
    pub fn relation(&self, n: usize) -> Multilinear {
        let (sd, td) = (self.source.space.degrees(), self.target.space.degrees());
        let mut out = Multilinear::zero(n, 1);
        for t in PowerBasis::new(&self.source.space, PowerKind::Symmetric, n).elements() {
            let mut lhs = SparseVec::new();
            for q in self.source.taylor.values() {
                lhs.add_scaled(&Rational::one(), &corestrict(&self.components, &q.lift_apply(sd, t)));
            }
            let rhs = corestrict(&self.target.taylor, &coalgebra_image(&self.components, sd, td, t));
            out.set(t.clone(), lhs.sub(&rhs));
        }
        out
    }

    pub fn validate(&self) -> ValidationReport {
        let checks = (1..=self.weight)
            .map(|n| residual_check(&self.target.space, &format!("morphism relation n = {n}"), n, &self.relation(n)))
            .collect();
        ValidationReport { checks }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &LInfinityMorphism) -> Result<LInfinityMorphism> {
        if other.target.space != self.source.space {
            return invalid("composing morphisms with mismatched spaces");
        }
        let weight = self.weight.min(other.weight);
        let (sd, md) = (other.source.space.degrees(), other.target.space.degrees());
        let mut components = BTreeMap::new();
        for n in 1..=weight {
            let mut c = Multilinear::zero(n, 0);
            for t in PowerBasis::new(&other.source.space, PowerKind::Symmetric, n).elements() {
                let img = coalgebra_image(&other.components, sd, md, t);
                c.set(t.clone(), corestrict(&self.components, &img));
            }
            components.insert(n, c);
        }
        LInfinityMorphism::new(other.source.clone(), self.target.clone(), components)
    }

    /// Whether the components from arity 2 on vanish and the linear part is the identity.
    pub fn is_identity(&self) -> bool {
        self.source.space == self.target.space
            && self.component(1) == Multilinear::identity(self.source.space.dim())
            && self.components.keys().all(|&j| j == 1)
    }
}

/// Corestriction of `e^{α̂}` for a degree-0 coderivation with components of arity ≥ 2.
pub fn exp_coderivation(space: &GradedVectorSpace, alpha: &Taylor, weight: usize) -> Result<Taylor> {
    if alpha.iter().any(|(&j, a)| j < 2 || a.degree() != 0) {
        return invalid("exponentials are taken of degree-0 coderivations with components of arity at least 2");
    }
    let degrees = space.degrees();
    let mut out: Taylor = BTreeMap::new();
    for n in 1..=weight {
        let mut c = Multilinear::zero(n, 0);
        for t in PowerBasis::new(space, PowerKind::Symmetric, n).elements() {
            let mut term = SymTensor::unit(t.clone());
            let mut total = SparseVec::new();
            let mut k = 0u32;
            while !term.is_zero() {
                let fact = Rational::factorial(k).recip();
                total.add_scaled(&fact, &term.linear_part());
                term = coderivation_apply(alpha, degrees, &term);
                k += 1;
            }
            c.set(t.clone(), total);
        }
        out.insert(n, c);
    }
    Ok(out)
}

/// `e^{ad α}(q) = q + [α, q] + ½[α, [α, q]] + …`, truncated at `weight`.
pub fn conjugate(space: &GradedVectorSpace, q: &Taylor, alpha: &Taylor, weight: usize) -> Taylor {
    let mut out = q.clone();
    let mut term = q.clone();
    let mut k = 1u32;
    loop {
        term = nr_bracket_sum(space, alpha, &term, weight);
        if term.is_empty() {
            break;
        }
        let c = Rational::factorial(k).recip();
        for (n, t) in &term {
            match out.get_mut(n) {
                Some(m) => m.add_scaled(&c, t),
                None => {
                    out.insert(*n, t.scaled(&c));
                }
            }
        }
        k += 1;
    }
    out.retain(|_, m| !m.is_zero());
    out
}

/// Décalage `V = L[1]`: same labels in degree one lower,
/// `q_1(v) = −d(sv)`, `q_2(u, v) = −(−1)^{|u|}[su, sv]`.
pub fn decalage(l: &DgLieAlgebra, weight: usize) -> LInfinityAlgebra {
    let v = l.space().shifted(-1);
    let n = v.dim();
    let mut q1 = Multilinear::zero(1, 1);
    for i in 0..n {
        q1.set(vec![i], l.differential().image(i).scaled(&Rational::from_int(-1)));
    }
    let mut q2 = Multilinear::zero(2, 1);
    for t in PowerBasis::new(&v, PowerKind::Symmetric, 2).elements() {
        let c = -Rational::sign(v.degree(t[0]));
        q2.set(t.clone(), l.bracket_basis(t[0], t[1]).scaled(&c));
    }
    let mut taylor = BTreeMap::new();
    taylor.insert(1, q1);
    taylor.insert(2, q2);
    LInfinityAlgebra::new(v, taylor, weight).expect("décalage of a homogeneous structure")
}

/// Inverse of [`decalage`]; needs `q_n = 0` for `n ≥ 3`.
pub fn undecalage(v: &LInfinityAlgebra) -> Result<DgLieAlgebra> {
    if let Some(&n) = v.taylor.keys().find(|&&n| n >= 3) {
        return Err(Error::Precondition(format!("q_{n} is nonzero, so this is not the décalage of a DG-Lie algebra")));
    }
    let l = v.space.shifted(1);
    let dim = l.dim();
    let q1 = v.q(1);
    let q2 = v.q(2);
    let images = (0..dim).map(|i| q1.get(&[i]).map_or_else(SparseVec::new, |x| x.scaled(&Rational::from_int(-1)))).collect();
    let d = GradedMap::new(1, dim, images)?;
    let mut bracket = BTreeMap::new();
    for i in 0..dim {
        for j in i..dim {
            if i == j && l.degree(i).rem_euclid(2) == 0 {
                continue;
            }
            let val = q2.eval(v.space.degrees(), &[i, j]).scaled(&-Rational::sign(v.space.degree(i)));
            if !val.is_zero() {
                bracket.insert((i, j), val);
            }
        }
    }
    DgLieAlgebra::new(l, d, bracket)
}

/// The complex of `f`-coderivations `Coder(S(V), S(W); f)` on columns `p < l`.
///
/// A basis vector is a map sending one canonical tuple of `V^{⊙p}` to one
/// basis vector of `W`; its total degree is its Hom-degree.
#[derive(Clone, Debug)]
pub struct LinfCe {
    morphism: LInfinityMorphism,
    columns: usize,
    powers: Vec<PowerBasis>,
    offsets: Vec<usize>,
    parts: BTreeMap<usize, Vec<SparseVec>>,
    filtered: FilteredComplex,
}

impl LinfCe {
    pub fn morphism(&self) -> &LInfinityMorphism {
        &self.morphism
    }

    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn power(&self, p: usize) -> &PowerBasis {
        &self.powers[p]
    }

    pub fn dim(&self) -> usize {
        self.offsets[self.columns]
    }

    pub fn flat_index(&self, p: usize, tuple: usize, w: usize) -> usize {
        self.offsets[p] + tuple * self.morphism.target.space.dim() + w
    }

    pub fn element(&self, flat: usize) -> (usize, &[usize], usize) {
        let p = self.offsets.partition_point(|&o| o <= flat) - 1;
        let dw = self.morphism.target.space.dim();
        let k = flat - self.offsets[p];
        (p, self.powers[p].element(k / dw), k % dw)
    }

    pub fn filtered(&self) -> &FilteredComplex {
        &self.filtered
    }

    pub fn spectral_sequence(&self) -> Result<SpectralSequence> {
        SpectralSequence::new(&self.filtered)
    }

    /// The part of the differential raising the column by `shift`; for `f = id`
    /// this is `[q_{shift+1}, −]`.
    pub fn part(&self, shift: usize) -> Option<&[SparseVec]> {
        self.parts.get(&shift).map(Vec::as_slice)
    }

    pub fn apply_part(&self, shift: usize, v: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        if let Some(images) = self.parts.get(&shift) {
            for (j, c) in v.iter() {
                out.add_scaled(c, &images[j]);
            }
        }
        out
    }

    pub fn cochain<F: FnMut(&[usize]) -> SparseVec>(&self, p: usize, mut f: F) -> SparseVec {
        let mut out = SparseVec::new();
        for (k, t) in self.powers[p].elements().iter().enumerate() {
            for (w, c) in f(t).iter() {
                out.add_term(self.flat_index(p, k, w), c);
            }
        }
        out
    }

    /// Cochain of a multilinear map of arity `p < l`.
    pub fn cochain_of(&self, m: &Multilinear) -> SparseVec {
        self.cochain(m.arity(), |t| m.get(t).cloned().unwrap_or_default())
    }

    /// Column `p` of a cochain as a multilinear map of the given degree.
    pub fn multilinear(&self, v: &SparseVec, p: usize, degree: i64) -> Multilinear {
        let mut out = Multilinear::zero(p, degree);
        for (j, c) in v.iter() {
            let (pp, t, w) = self.element(j);
            if pp == p {
                out.add_at(t, c, &SparseVec::unit(w));
            }
        }
        out
    }
}

/// Builds the `f`-coderivation complex with `dα = R α̂ − (−1)^{|α|} α Q̂`; needs `l ≤ weight`.
pub fn ce_linf(f: &LInfinityMorphism, l: usize) -> Result<LinfCe> {
    if l == 0 {
        return invalid("column bound must be at least 1");
    }
    if l > f.weight.max(1) {
        return Err(Error::InsufficientBounds(format!("columns l = {l} exceed the weight bound {}", f.weight)));
    }
    let (vs, ws) = (&f.source.space, &f.target.space);
    let (vd, wd) = (vs.degrees(), ws.degrees());
    let dw = ws.dim();
    let powers: Vec<PowerBasis> = (0..l).map(|p| PowerBasis::new(vs, PowerKind::Symmetric, p)).collect();
    let mut offsets = vec![0];
    for p in 0..l {
        offsets.push(offsets[p] + powers[p].len() * dw);
    }
    let total = offsets[l];
    let mut cells = Vec::with_capacity(total);
    for p in 0..l {
        for k in 0..powers[p].len() {
            for w in 0..dw {
                cells.push((wd[w] - powers[p].degree(k), p));
            }
        }
    }
    let flat = |p: usize, k: usize, w: usize| offsets[p] + k * dw + w;
    let is_identity = f.is_identity();
    let mut parts: BTreeMap<usize, Vec<SparseVec>> = BTreeMap::new();
    let mut add = |shift: usize, src: usize, tgt: usize, c: &Rational| {
        parts.entry(shift).or_insert_with(|| vec![SparseVec::new(); total])[src].add_term(tgt, c);
    };
    for n in 0..l {
        for (kt, t) in powers[n].elements().iter().enumerate() {
            let tdeg: Vec<i64> = t.iter().map(|&i| vd[i]).collect();
            // (A) R α̂: α on a subset S, f on the rest
            for p in 0..=n {
                for (s_pos, rest_pos, eps) in unshuffles(&tdeg, PowerKind::Symmetric, p) {
                    let s_args: Vec<usize> = s_pos.iter().map(|&i| t[i]).collect();
                    let rest: Vec<usize> = rest_pos.iter().map(|&i| t[i]).collect();
                    let Some((s, sigma)) = normalize(PowerKind::Symmetric, vd, &s_args) else { continue };
                    let ks = powers[p].index_of(&s).expect("canonical tuple");
                    let frest = if is_identity {
                        let mut x = SymTensor::new();
                        x.add_tuple(wd, &rest, &Rational::one());
                        x
                    } else {
                        coalgebra_image(&f.components, vd, wd, &rest)
                    };
                    if frest.is_zero() {
                        continue;
                    }
                    let sign = Rational::from_int(eps * sigma);
                    for w in 0..dw {
                        let mut val = SparseVec::new();
                        for (u, c) in frest.iter() {
                            let Some(r) = f.target.taylor.get(&(u.len() + 1)) else { continue };
                            let mut args = Vec::with_capacity(u.len() + 1);
                            args.push(w);
                            args.extend_from_slice(u);
                            val.add_scaled(c, &r.eval(wd, &args));
                        }
                        for (w2, c) in val.iter() {
                            add(n - p, flat(p, ks, w), flat(n, kt, w2), &(&sign * c));
                        }
                    }
                }
            }
            // (B) −(−1)^{|α|} α Q̂
            for (&b, q) in &f.source.taylor {
                if b > n + 1 {
                    continue;
                }
                let p = n + 1 - b;
                if p >= l {
                    continue;
                }
                for (s, c) in q.lift_apply(vd, t).iter() {
                    if s.len() != p {
                        continue;
                    }
                    let ks = powers[p].index_of(s).expect("canonical tuple");
                    for w in 0..dw {
                        let hom = wd[w] - powers[p].degree(ks);
                        let coef = -Rational::sign(hom) * c;
                        add(b - 1, flat(p, ks, w), flat(n, kt, w), &coef);
                    }
                }
            }
        }
    }
    for v in parts.values_mut() {
        for x in v.iter_mut() {
            *x = SparseVec::from_terms(x.iter().map(|(i, c)| (i, c.clone())));
        }
    }
    parts.retain(|_, v| v.iter().any(|x| !x.is_zero()));
    let mut diff = vec![SparseVec::new(); total];
    for v in parts.values() {
        for (j, x) in v.iter().enumerate() {
            diff[j].add_scaled(&Rational::one(), x);
        }
    }
    let filtered = FilteredComplex::new(cells, diff, l)?;
    Ok(LinfCe { morphism: f.clone(), columns: l, powers, offsets, parts, filtered })
}

/// `E_1` of the coderivation complex against `Hom(H(V)^{⊙p}, H(W))`.
pub fn linf_first_page_check(ce: &LinfCe) -> Result<()> {
    let f = ce.morphism();
    let hv = cohomology_of(&f.source)?;
    let hw = cohomology_of(&f.target)?;
    let ss = SpectralSequence::compute(ce.filtered(), 1)?;
    let dims = ss.page(1).dims();
    for p in 0..ce.columns() {
        let expected = crate::ce::hom_dims(&hv, &hw, PowerKind::Symmetric, p);
        for (&hom, &e) in &expected {
            let q = hom - p as i64;
            if dims.get(&(p as i64, q)).copied().unwrap_or(0) != e {
                return consistency(format!("E_1^({p}, {q}) does not match Hom(H^p, H)"));
            }
        }
        if dims.iter().any(|(&(pp, q), _)| pp == p as i64 && !expected.contains_key(&(q + p as i64))) {
            return consistency(format!("E_1 has unexpected classes in column {p}"));
        }
    }
    Ok(())
}

/// Cohomology of `(V, q_1)`.
pub fn cohomology_of(v: &LInfinityAlgebra) -> Result<GradedVectorSpace> {
    Ok(cohomology(&linear_complex(v)?)?.cohomology)
}

pub(crate) fn linear_complex(v: &LInfinityAlgebra) -> Result<crate::dgla::CochainComplex> {
    let q1 = v.q(1);
    let images = (0..v.space.dim()).map(|i| q1.get(&[i]).cloned().unwrap_or_default()).collect();
    crate::dgla::CochainComplex::new(v.space.clone(), GradedMap::new(1, v.space.dim(), images)?)
}

/// The degree +1 isomorphism `s: CE(V, V) → CE(L, L)` for `V` the décalage of `L`.
#[derive(Clone, Debug)]
pub struct DecalageConjugation {
    pub map: FilteredMap,
}

/// Builds `s` with `(sφ)(sv_1, …, sv_k) = (−1)^{k + 1 + Σ(k−i)|v_i|} sφ(v_1, …, v_k)` and checks
/// `δ̄ s + s [q_1, −] = 0` and `δ s + s [q_2, −] = 0` exactly.
pub fn decalage_conjugation(v_ce: &LinfCe, l_ce: &crate::ce::CeBicomplex) -> Result<DecalageConjugation> {
    let vs = &v_ce.morphism().source.space;
    if v_ce.columns() != l_ce.columns() || l_ce.base().space().shifted(-1) != *vs {
        return invalid("conjugation needs CE(V, V) and CE(L, L) of a décalage pair with equal column bounds");
    }
    let mut images = Vec::with_capacity(v_ce.dim());
    for j in 0..v_ce.dim() {
        let (p, t, w) = v_ce.element(j);
        let k = t.len() as i64;
        let e: i64 = k + 1 + t.iter().enumerate().map(|(i, &x)| (k - 1 - i as i64) * vs.degree(x)).sum::<i64>();
        let kt = l_ce.power(p).index_of(t).ok_or_else(|| Error::Consistency("tuple bases differ".into()))?;
        images.push(SparseVec::unit(l_ce.flat_index(p, kt, w)).scaled(&Rational::sign(e)));
    }
    let map = FilteredMap { images, degree_shift: 1, column_shift: 0, sign: -1 };
    let apply = |x: &SparseVec| map.apply(x);
    for j in 0..v_ce.dim() {
        let x = SparseVec::unit(j);
        let sx = apply(&x);
        let (p, _, _) = v_ce.element(j);
        // split the CE(L, L) differential into δ̄ (same column) and δ (next column)
        let d = l_ce.filtered().apply(&sx);
        let (mut db, mut dl) = (SparseVec::new(), SparseVec::new());
        for (i, c) in d.iter() {
            if l_ce.element(i).0 == p {
                db.add_term(i, c);
            } else {
                dl.add_term(i, c);
            }
        }
        if !db.add(&apply(&v_ce.apply_part(0, &x))).is_zero() {
            return consistency(format!("s delta-bar + s[q1, -] != 0 on basis vector {j}"));
        }
        let mut rhs = apply(&v_ce.apply_part(1, &x));
        if p + 1 >= v_ce.columns() {
            rhs = SparseVec::new();
        }
        if !dl.add(&rhs).is_zero() {
            return consistency(format!("s delta + s[q2, -] != 0 on basis vector {j}"));
        }
    }
    map.check(v_ce.filtered(), l_ce.filtered())?;
    Ok(DecalageConjugation { map })
}

/// Higher derived brackets `q_n(a_1, …, a_n) = P[[⋯[d, a_1], …], a_n]` of an
/// inner derivation, with `q_1 = P(d_g + [d, −])`.
#[derive(Clone, Debug)]
pub struct VoronovData {
    pub ambient: DgLieAlgebra,
    pub subalgebra: Vec<usize>,
    pub complement: Vec<usize>,
    pub element: SparseVec,
    pub algebra: LInfinityAlgebra,
}

impl VoronovData {
    /// `[[⋯[d, a_1], …], a_n]` in the ambient algebra, before projection.
    pub fn iterated_bracket(&self, args: &[usize]) -> SparseVec {
        iterated(&self.ambient, &self.element, args.iter().map(|&a| self.complement[a]))
    }

    pub fn project(&self, x: &SparseVec) -> SparseVec {
        project(&self.complement, x)
    }
}

fn iterated(g: &DgLieAlgebra, d: &SparseVec, args: impl Iterator<Item = usize>) -> SparseVec {
    let mut x = d.clone();
    for a in args {
        x = g.bracket(&x, &SparseVec::unit(a));
    }
    x
}

fn project(complement: &[usize], x: &SparseVec) -> SparseVec {
    SparseVec::from_terms(
        x.iter().filter_map(|(i, c)| complement.iter().position(|&a| a == i).map(|k| (k, c.clone()))),
    )
}

pub fn derived_brackets(g: &DgLieAlgebra, subalgebra: &[usize], d: &SparseVec, n_max: usize) -> Result<VoronovData> {
    let dim = g.dim();
    let sp = g.space();
    if subalgebra.iter().any(|&i| i >= dim) {
        return invalid("subalgebra index outside the ambient algebra");
    }
    let pre = |msg: &str| Err(Error::Precondition(msg.to_string()));
    g.validate().into_result()?;
    let in_n = |v: &SparseVec| v.iter().all(|(i, _)| subalgebra.contains(&i));
    let complement: Vec<usize> = (0..dim).filter(|i| !subalgebra.contains(i)).collect();
    if !in_n(d) {
        return pre("d does not lie in the subalgebra");
    }
    if sp.homogeneous_degree(d) != Some(Some(1)) {
        return pre("d must be homogeneous of degree 1");
    }
    if !g.bracket(d, d).is_zero() {
        return pre("[d, d] != 0");
    }
    for &a in subalgebra {
        for &b in subalgebra {
            if !in_n(&g.bracket_basis(a, b)) {
                return pre("the subalgebra is not closed under the bracket");
            }
        }
        let da = g.d(&SparseVec::unit(a)).add(&g.bracket(d, &SparseVec::unit(a)));
        if !in_n(&da) {
            return pre("the subalgebra is not closed under d_g + [d, -]");
        }
    }
    for &a in &complement {
        for &b in &complement {
            if !g.bracket_basis(a, b).is_zero() {
                return pre("the complement is not an abelian subalgebra");
            }
        }
    }
    let a_space = GradedVectorSpace::from_pairs(
        &complement.iter().map(|&i| (sp.label(i).to_string(), sp.degree(i))).collect::<Vec<_>>(),
    )?;
    // complement indices are increasing, so the order inside each degree is kept
    let mut complement_sorted = complement.clone();
    complement_sorted.sort_by_key(|&i| (sp.degree(i), i));
    let mut taylor = BTreeMap::new();
    let mut q1 = Multilinear::zero(1, 1);
    for (k, &a) in complement_sorted.iter().enumerate() {
        let x = g.d(&SparseVec::unit(a)).add(&g.bracket(d, &SparseVec::unit(a)));
        q1.set(vec![k], project(&complement_sorted, &x));
    }
    taylor.insert(1, q1);
    let ad = a_space.degrees();
    for n in 2..=n_max {
        let mut qn = Multilinear::zero(n, 1);
        for t in PowerBasis::new(&a_space, PowerKind::Symmetric, n).elements() {
            let val = project(&complement_sorted, &iterated(g, d, t.iter().map(|&k| complement_sorted[k])));
            qn.set(t.clone(), val);
        }
        // graded symmetry on every ordering of each tuple
        for t in qn.clone().values().keys() {
            for perm in permutations(n) {
                let args: Vec<usize> = perm.iter().map(|&i| t[i]).collect();
                let direct = project(&complement_sorted, &iterated(g, d, args.iter().map(|&k| complement_sorted[k])));
                if direct != qn.eval(ad, &args) {
                    return consistency(format!("derived bracket q_{n} is not graded symmetric"));
                }
            }
        }
        taylor.insert(n, qn);
    }
    let algebra = LInfinityAlgebra::new(a_space, taylor, n_max)?;
    Ok(VoronovData {
        ambient: g.clone(),
        subalgebra: subalgebra.to_vec(),
        complement: complement_sorted,
        element: d.clone(),
        algebra,
    })
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// `[q_k, Id]` and `[β, e]` helpers on a fixed space.
pub fn bracket_with_euler(space: &GradedVectorSpace, beta: &Multilinear) -> Multilinear {
    nr_bracket(space, beta, &euler_map(space))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn he() -> DgLieAlgebra {
        let sp = GradedVectorSpace::from_pairs(&[("h", 0), ("e", 0)]).unwrap();
        DgLieAlgebra::from_tables(sp, BTreeMap::new(), vec![((0, 1), SparseVec::unit(1))]).unwrap()
    }

    #[test]
    fn decalage_round_trip_and_relations() {
        let l = he();
        let v = decalage(&l, 4);
        assert!(v.validate().passed());
        // q_2(h, e) = −(−1)^{−1}[h, e] = e
        assert_eq!(v.q(2).eval(v.space().degrees(), &[0, 1]), SparseVec::unit(1));
        assert_eq!(undecalage(&v).unwrap(), l);
    }

    #[test]
    fn identity_morphism_is_valid_and_neutral() {
        let v = decalage(&he(), 3);
        let id = LInfinityMorphism::identity(&v);
        assert!(id.validate().passed());
        assert_eq!(id.compose(&id).unwrap().components(), id.components());
    }

    #[test]
    fn coderivation_complex_squares_to_zero() {
        let v = decalage(&he(), 4);
        let ce = ce_linf(&LInfinityMorphism::identity(&v), 4).unwrap();
        linf_first_page_check(&ce).unwrap();
        let l_ce = crate::ce::build_ce(&crate::dgla::DgModule::adjoint(&he()), 4).unwrap();
        decalage_conjugation(&ce, &l_ce).unwrap();

        let g = crate::fixtures::endomorphisms(&[("a", 0), ("b", 1)], &[(0, 1, 1)]);
        let v = decalage(&g, 3);
        assert!(v.validate().passed());
        let ce = ce_linf(&LInfinityMorphism::identity(&v), 3).unwrap();
        linf_first_page_check(&ce).unwrap();
        let l_ce = crate::ce::build_ce(&crate::dgla::DgModule::adjoint(&g), 3).unwrap();
        decalage_conjugation(&ce, &l_ce).unwrap();
    }

    #[test]
    fn voronov_chain() {
        let (g, n, d) = crate::fixtures::voronov_data();
        let vd = derived_brackets(&g, &n, &d, 5).unwrap();
        assert!(vd.algebra.validate().passed());
        let v2 = SparseVec::unit(3);
        assert_eq!(vd.iterated_bracket(&[0]), v2.scaled(&Rational::from_int(-3)));
        assert_eq!(vd.iterated_bracket(&[0, 0]), SparseVec::unit(2).scaled(&Rational::from_int(6)));
        assert_eq!(vd.iterated_bracket(&[0, 0, 0]), SparseVec::unit(1).scaled(&Rational::from_int(-6)));
        let a = &vd.algebra;
        assert!(a.q(1).is_zero() && a.q(2).is_zero());
        assert_eq!(a.q(3).get(&[0, 0, 0]), Some(&SparseVec::unit(1).scaled(&Rational::from_int(-6))));
        assert!(a.q(4).is_zero());
    }

    #[test]
    fn euler_derivations_correspond() {
        let g = crate::fixtures::endomorphisms(&[("a", 0), ("b", 1)], &[]);
        let v = decalage(&g, 3);
        let ce = ce_linf(&LInfinityMorphism::identity(&v), 3).unwrap();
        let l_ce = crate::ce::build_ce(&crate::dgla::DgModule::adjoint(&g), 3).unwrap();
        let s = decalage_conjugation(&ce, &l_ce).unwrap();
        let ev = ce.cochain_of(&euler_map(v.space()));
        let el = l_ce.cochain(1, |t| SparseVec::unit(t[0]).scaled(&Rational::from_int(g.space().degree(t[0]))));
        assert_eq!(s.map.apply(&ev), el);
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let v = decalage(&he(), 3);
        let e = exp_coderivation(v.space(), &BTreeMap::new(), 3).unwrap();
        assert_eq!(e[&1], Multilinear::identity(2));
        assert!(e[&2].is_zero());
    }
}
