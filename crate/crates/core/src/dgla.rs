//! Differential graded Lie algebras, their modules and morphisms, and
//! cohomology computed through explicit contractions.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{consistency, invalid, Error, Result};
use crate::graded::{GradedMap, GradedVectorSpace};
use crate::linalg::{unit_vector, Matrix, SparseVec, Subspace, Vector};
use crate::power::{normalize, swap_sign, PowerKind};
use crate::rational::Rational;

fn parity_sign(d: i64) -> Rational {
    Rational::sign(d)
}

/// Outcome of one axiom check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomCheck {
    pub axiom: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<String>,
}

impl AxiomCheck {
    fn pass(axiom: &str) -> Self {
        AxiomCheck { axiom: axiom.into(), passed: true, witness: None, residual: None }
    }

    fn fail(axiom: &str, witness: String, residual: String) -> Self {
        AxiomCheck { axiom: axiom.into(), passed: false, witness: Some(witness), residual: Some(residual) }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<AxiomCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| !c.passed)
    }

    pub fn check(&self, axiom: &str) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| c.axiom == axiom)
    }

    /// Turns the first failure into an error.
    pub fn into_result(self) -> Result<()> {
        match self.first_failure() {
            None => Ok(()),
            Some(c) => Err(Error::Axiom {
                axiom: c.axiom.clone(),
                witness: format!("{} (residual {})", c.witness.clone().unwrap_or_default(), c.residual.clone().unwrap_or_default()),
            }),
        }
    }

    fn extend(&mut self, other: ValidationReport) {
        self.checks.extend(other.checks);
    }
}

/// Runs `test` over every argument tuple and records the first nonzero residual.
fn first_violation<I, F>(space: &GradedVectorSpace, axiom: &str, args: I, mut test: F) -> AxiomCheck
where
    I: IntoIterator<Item = Vec<usize>>,
    F: FnMut(&[usize]) -> SparseVec,
    {
    for a in args {
        let r = test(&a);
        if !r.is_zero() {
            let labels: Vec<&str> = a.iter().map(|&i| space.label(i)).collect();
            return AxiomCheck::fail(axiom, format!("({})", labels.join(", ")), space_fmt(space, &r));
        }
    }
    AxiomCheck::pass(axiom)
}

fn space_fmt(space: &GradedVectorSpace, v: &SparseVec) -> String {
    space.format_vector(v)
}

fn pairs(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..n).flat_map(move |i| (0..n).map(move |j| vec![i, j]))
}

fn triples(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..n).flat_map(move |i| (0..n).flat_map(move |j| (0..n).map(move |k| vec![i, j, k])))
}

/// A cochain complex `(V, d)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CochainComplex {
    pub space: GradedVectorSpace,
    pub differential: GradedMap,
}

impl CochainComplex {
    pub fn new(space: GradedVectorSpace, differential: GradedMap) -> Result<Self> {
        if differential.source_dim() != space.dim() || differential.target_dim() != space.dim() {
            return invalid("differential does not act on the space");
        }
        if differential.degree() != 1 {
            return invalid("differential must have degree +1");
        }
        Ok(CochainComplex { space, differential })
    }

    pub fn zero_differential(space: GradedVectorSpace) -> Self {
        let n = space.dim();
        CochainComplex { space, differential: GradedMap::zero(n, n, 1) }
    }

    pub fn squares_to_zero(&self) -> bool {
        self.differential.compose(&self.differential).is_zero()
    }
}

/// A DG-Lie algebra with bracket constants stored on canonical exterior pairs `i ≤ j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DgLieAlgebra {
    space: GradedVectorSpace,
    differential: GradedMap,
    bracket: BTreeMap<(usize, usize), SparseVec>,
}

impl DgLieAlgebra {
    pub fn new(
        space: GradedVectorSpace,
        differential: GradedMap,
        bracket: BTreeMap<(usize, usize), SparseVec>,
    ) -> Result<Self> {
        let n = space.dim();
        if differential.source_dim() != n || differential.target_dim() != n {
            return invalid("differential does not act on the space");
        }
        for (&(i, j), v) in &bracket {
            if i > j || j >= n {
                return invalid(format!("bracket key ({i}, {j}) is not a canonical pair"));
            }
            if v.iter().any(|(k, _)| k >= n) {
                return invalid("bracket value outside the space");
            }
            if i == j && space.degree(i).rem_euclid(2) == 0 && !v.is_zero() {
                return invalid(format!("[{0}, {0}] must vanish for the even element {0}", space.label(i)));
            }
        }
        let bracket = bracket.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        Ok(DgLieAlgebra { space, differential, bracket })
    }

    /// Bracket constants given in any order; each pair is normalized with its sign.
    pub fn from_tables(
        space: GradedVectorSpace,
        differential: BTreeMap<usize, SparseVec>,
        bracket: Vec<((usize, usize), SparseVec)>,
    ) -> Result<Self> {
        let n = space.dim();
        let mut images = vec![SparseVec::new(); n];
        for (i, v) in differential {
            if i >= n {
                return invalid("differential source outside the space");
            }
            images[i] = v;
        }
        let d = GradedMap::new(1, n, images)?;
        let mut table: BTreeMap<(usize, usize), SparseVec> = BTreeMap::new();
        for ((i, j), v) in bracket {
            if i >= n || j >= n {
                return invalid("bracket argument outside the space");
            }
            let key = (i.min(j), i.max(j));
            if table.contains_key(&key) {
                return invalid(format!("bracket [{}, {}] given twice", space.label(i), space.label(j)));
            }
            let sign = if i <= j { 1 } else { swap_sign(PowerKind::Exterior, space.degree(i), space.degree(j)) };
            table.insert(key, v.scaled(&Rational::from_int(sign)));
        }
        Self::new(space, d, table)
    }

    pub fn abelian(space: GradedVectorSpace) -> Self {
        let n = space.dim();
        DgLieAlgebra { space, differential: GradedMap::zero(n, n, 1), bracket: BTreeMap::new() }
    }

    pub fn space(&self) -> &GradedVectorSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn differential(&self) -> &GradedMap {
        &self.differential
    }

    pub fn bracket_table(&self) -> &BTreeMap<(usize, usize), SparseVec> {
        &self.bracket
    }

    pub fn has_trivial_differential(&self) -> bool {
        self.differential.is_zero()
    }

    pub fn is_abelian(&self) -> bool {
        self.bracket.is_empty()
    }

    pub fn complex(&self) -> CochainComplex {
        CochainComplex { space: self.space.clone(), differential: self.differential.clone() }
    }

    pub fn with_differential(&self, differential: GradedMap) -> Result<Self> {
        Self::new(self.space.clone(), differential, self.bracket.clone())
    }

    pub fn d(&self, x: &SparseVec) -> SparseVec {
        self.differential.apply(x)
    }

    pub fn bracket_basis(&self, i: usize, j: usize) -> SparseVec {
        match normalize(PowerKind::Exterior, self.space.degrees(), &[i, j]) {
            None => SparseVec::new(),
            Some((t, s)) => self
                .bracket
                .get(&(t[0], t[1]))
                .map_or_else(SparseVec::new, |v| v.scaled(&Rational::from_int(s))),
        }
    }

    pub fn bracket(&self, x: &SparseVec, y: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        for (i, a) in x.iter() {
            for (j, b) in y.iter() {
                out.add_scaled(&(a * b), &self.bracket_basis(i, j));
            }
        }
        out
    }

    pub fn validate(&self) -> ValidationReport {
        let sp = &self.space;
        let n = sp.dim();
        let deg = |i: usize| sp.degree(i);
        let mut checks = Vec::new();
        checks.push(first_violation(sp, "d^2 = 0", (0..n).map(|i| vec![i]), |a| {
            self.d(&self.d(&SparseVec::unit(a[0])))
        }));
        checks.push(first_violation(sp, "Jacobi", triples(n), |a| {
            let (x, y, z) = (SparseVec::unit(a[0]), SparseVec::unit(a[1]), SparseVec::unit(a[2]));
            let lhs = self.bracket(&x, &self.bracket(&y, &z));
            let mut r = lhs.sub(&self.bracket(&self.bracket(&x, &y), &z));
            r.add_scaled(&-parity_sign(deg(a[0]) * deg(a[1])), &self.bracket(&y, &self.bracket(&x, &z)));
            r
        }));
        checks.push(first_violation(sp, "Leibniz", pairs(n), |a| {
            let (x, y) = (SparseVec::unit(a[0]), SparseVec::unit(a[1]));
            let mut r = self.d(&self.bracket(&x, &y));
            r.add_scaled(&Rational::from_int(-1), &self.bracket(&self.d(&x), &y));
            r.add_scaled(&-parity_sign(deg(a[0])), &self.bracket(&x, &self.d(&y)));
            r
        }));
        let d_bad = self.differential.homogeneity_violation(sp, sp);
        let br_bad = self.bracket.iter().find(|(&(i, j), v)| v.iter().any(|(k, _)| deg(k) != deg(i) + deg(j)));
        checks.push(match (d_bad, br_bad) {
            (None, None) => AxiomCheck::pass("degree homogeneity"),
            (Some(i), _) => AxiomCheck::fail(
                "degree homogeneity",
                format!("d({})", sp.label(i)),
                sp.format_vector(self.differential.image(i)),
            ),
            (None, Some((&(i, j), v))) => AxiomCheck::fail(
                "degree homogeneity",
                format!("[{}, {}]", sp.label(i), sp.label(j)),
                sp.format_vector(v),
            ),
        });
        ValidationReport { checks }
    }

    pub fn validated(self) -> Result<Self> {
        self.validate().into_result()?;
        Ok(self)
    }
}

/// A DG-module over a DG-Lie algebra, with right action `[m, x]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DgModule {
    base: DgLieAlgebra,
    space: GradedVectorSpace,
    differential: GradedMap,
    action: BTreeMap<(usize, usize), SparseVec>,
}

impl DgModule {
    pub fn new(
        base: DgLieAlgebra,
        space: GradedVectorSpace,
        differential: GradedMap,
        action: BTreeMap<(usize, usize), SparseVec>,
    ) -> Result<Self> {
        let (m, l) = (space.dim(), base.dim());
        if differential.source_dim() != m || differential.target_dim() != m {
            return invalid("module differential does not act on the module");
        }
        for (&(a, x), v) in &action {
            if a >= m || x >= l || v.iter().any(|(k, _)| k >= m) {
                return invalid("action constant outside the spaces");
            }
        }
        let action = action.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        Ok(DgModule { base, space, differential, action })
    }

    /// `L` acting on itself by the bracket.
    pub fn adjoint(base: &DgLieAlgebra) -> Self {
        let n = base.dim();
        let mut action = BTreeMap::new();
        for i in 0..n {
            for j in 0..n {
                let v = base.bracket_basis(i, j);
                if !v.is_zero() {
                    action.insert((i, j), v);
                }
            }
        }
        DgModule { base: base.clone(), space: base.space.clone(), differential: base.differential.clone(), action }
    }

    /// `M` as an `L`-module through `[m, x] = [m, f(x)]`.
    pub fn via_morphism(f: &DglaMorphism) -> Result<Self> {
        f.validate().into_result()?;
        let (src, tgt) = (&f.source, &f.target);
        let mut action = BTreeMap::new();
        for m in 0..tgt.dim() {
            for x in 0..src.dim() {
                let v = tgt.bracket(&SparseVec::unit(m), f.map.image(x));
                if !v.is_zero() {
                    action.insert((m, x), v);
                }
            }
        }
        Ok(DgModule { base: src.clone(), space: tgt.space.clone(), differential: tgt.differential.clone(), action })
    }

    pub fn base(&self) -> &DgLieAlgebra {
        &self.base
    }

    pub fn space(&self) -> &GradedVectorSpace {
        &self.space
    }

    pub fn differential(&self) -> &GradedMap {
        &self.differential
    }

    pub fn complex(&self) -> CochainComplex {
        CochainComplex { space: self.space.clone(), differential: self.differential.clone() }
    }

    pub fn act_basis(&self, m: usize, x: usize) -> SparseVec {
        self.action.get(&(m, x)).cloned().unwrap_or_default()
    }

    pub fn act(&self, m: &SparseVec, x: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        for (i, a) in m.iter() {
            for (j, b) in x.iter() {
                if let Some(v) = self.action.get(&(i, j)) {
                    out.add_scaled(&(a * b), v);
                }
            }
        }
        out
    }

    pub fn is_trivial_action(&self) -> bool {
        self.action.is_empty()
    }

    pub fn validate(&self) -> ValidationReport {
        let (ms, ls) = (&self.space, self.base.space());
        let dm = |v: &SparseVec| self.differential.apply(v);
        let mut checks = Vec::new();
        checks.push(first_violation(ms, "d^2 = 0", (0..ms.dim()).map(|i| vec![i]), |a| {
            dm(&dm(&SparseVec::unit(a[0])))
        }));
        let mixed = |a: &[usize]| format!("({}, {})", ms.label(a[0]), ls.label(a[1]));
        let mut chain = AxiomCheck::pass("action is a chain map");
        'outer: for m in 0..ms.dim() {
            for x in 0..ls.dim() {
                let (mv, xv) = (SparseVec::unit(m), SparseVec::unit(x));
                let mut r = dm(&self.act(&mv, &xv));
                r.add_scaled(&Rational::from_int(-1), &self.act(&dm(&mv), &xv));
                r.add_scaled(&-parity_sign(ms.degree(m)), &self.act(&mv, &self.base.d(&xv)));
                if !r.is_zero() {
                    chain = AxiomCheck::fail("action is a chain map", mixed(&[m, x]), ms.format_vector(&r));
                    break 'outer;
                }
            }
        }
        checks.push(chain);
        let mut axiom = AxiomCheck::pass("module axiom");
        'outer2: for m in 0..ms.dim() {
            for x in 0..ls.dim() {
                for y in 0..ls.dim() {
                    let (mv, xv, yv) = (SparseVec::unit(m), SparseVec::unit(x), SparseVec::unit(y));
                    let mut r = self.act(&mv, &self.base.bracket(&xv, &yv));
                    r.add_scaled(&Rational::from_int(-1), &self.act(&self.act(&mv, &xv), &yv));
                    r.add_scaled(&parity_sign(ls.degree(x) * ls.degree(y)), &self.act(&self.act(&mv, &yv), &xv));
                    if !r.is_zero() {
                        axiom = AxiomCheck::fail(
                            "module axiom",
                            format!("({}, {}, {})", ms.label(m), ls.label(x), ls.label(y)),
                            ms.format_vector(&r),
                        );
                        break 'outer2;
                    }
                }
            }
        }
        checks.push(axiom);
        let bad = self
            .action
            .iter()
            .find(|(&(m, x), v)| v.iter().any(|(k, _)| ms.degree(k) != ms.degree(m) + ls.degree(x)));
        checks.push(match (self.differential.homogeneity_violation(ms, ms), bad) {
            (None, None) => AxiomCheck::pass("degree homogeneity"),
            (Some(i), _) => AxiomCheck::fail("degree homogeneity", format!("d({})", ms.label(i)), String::new()),
            (None, Some((&(m, x), v))) => AxiomCheck::fail("degree homogeneity", mixed(&[m, x]), ms.format_vector(v)),
        });
        let mut report = ValidationReport { checks };
        let base = self.base.validate();
        if !base.passed() {
            report.extend(base);
        }
        report
    }
}

/// A degree-0 linear map between DG-Lie algebras.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DglaMorphism {
    pub source: DgLieAlgebra,
    pub target: DgLieAlgebra,
    pub map: GradedMap,
}

impl DglaMorphism {
    pub fn new(source: DgLieAlgebra, target: DgLieAlgebra, map: GradedMap) -> Result<Self> {
        if map.source_dim() != source.dim() || map.target_dim() != target.dim() || map.degree() != 0 {
            return invalid("morphism must be a degree-0 map between the given spaces");
        }
        Ok(DglaMorphism { source, target, map })
    }

    pub fn identity(l: &DgLieAlgebra) -> Self {
        DglaMorphism { source: l.clone(), target: l.clone(), map: GradedMap::identity(l.dim()) }
    }

    pub fn zero(source: &DgLieAlgebra, target: &DgLieAlgebra) -> Self {
        DglaMorphism {
            source: source.clone(),
            target: target.clone(),
            map: GradedMap::zero(source.dim(), target.dim(), 0),
        }
    }

    pub fn validate(&self) -> ValidationReport {
        let (s, t) = (&self.source, &self.target);
        let f = |v: &SparseVec| self.map.apply(v);
        let mut checks = Vec::new();
        checks.push(match self.map.homogeneity_violation(s.space(), t.space()) {
            None => AxiomCheck::pass("degree homogeneity"),
            Some(i) => AxiomCheck::fail(
                "degree homogeneity",
                format!("f({})", s.space().label(i)),
                t.space().format_vector(self.map.image(i)),
            ),
        });
        let mut chain = AxiomCheck::pass("chain map");
        for x in 0..s.dim() {
            let xv = SparseVec::unit(x);
            let r = f(&s.d(&xv)).sub(&t.d(&f(&xv)));
            if !r.is_zero() {
                chain = AxiomCheck::fail("chain map", format!("({})", s.space().label(x)), t.space().format_vector(&r));
                break;
            }
        }
        checks.push(chain);
        let mut br = AxiomCheck::pass("bracket compatibility");
        'outer: for x in 0..s.dim() {
            for y in 0..s.dim() {
                let (xv, yv) = (SparseVec::unit(x), SparseVec::unit(y));
                let r = f(&s.bracket(&xv, &yv)).sub(&t.bracket(&f(&xv), &f(&yv)));
                if !r.is_zero() {
                    br = AxiomCheck::fail(
                        "bracket compatibility",
                        format!("({}, {})", s.space().label(x), s.space().label(y)),
                        t.space().format_vector(&r),
                    );
                    break 'outer;
                }
            }
        }
        checks.push(br);
        ValidationReport { checks }
    }

    pub fn validated(self) -> Result<Self> {
        self.validate().into_result()?;
        Ok(self)
    }

    /// Whether the induced map on cohomology is bijective.
    pub fn is_quasi_isomorphism(&self) -> Result<bool> {
        let hs = cohomology(&self.source.complex())?;
        let ht = cohomology(&self.target.complex())?;
        let induced = ht.projection.compose(&self.map).compose(&hs.inclusion);
        let m = induced.to_matrix();
        Ok(hs.cohomology.dim() == ht.cohomology.dim() && m.rank() == hs.cohomology.dim())
    }
}

/// A deformation retract of a complex onto its cohomology.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Contraction {
    pub complex: CochainComplex,
    pub cohomology: GradedVectorSpace,
    /// `H → V`, cocycle representatives.
    pub inclusion: GradedMap,
    /// `V → H`.
    pub projection: GradedMap,
    /// Degree −1 homotopy on `V`.
    pub homotopy: GradedMap,
}

impl Contraction {
    /// Checks `pi = 1`, `ip − 1 = dh + hd`, `hi = 0`, `ph = 0`, `hh = 0` exactly.
    pub fn verify(&self) -> Result<()> {
        let (i, p, h, d) = (&self.inclusion, &self.projection, &self.homotopy, &self.complex.differential);
        let nh = self.cohomology.dim();
        let nv = self.complex.space.dim();
        if p.compose(i).to_matrix() != Matrix::identity(nh) {
            return consistency("contraction: p i != 1");
        }
        let lhs = i.compose(p).to_matrix().add(&Matrix::identity(nv).neg());
        let rhs = d.compose(h).add(&h.compose(d)).to_matrix();
        if lhs != rhs {
            return consistency("contraction: ip - 1 != dh + hd");
        }
        if !h.compose(i).is_zero() || !p.compose(h).is_zero() || !h.compose(h).is_zero() {
            return consistency("contraction: side conditions fail");
        }
        Ok(())
    }

    /// Coordinates in `H` of a cocycle.
    pub fn class_of(&self, v: &SparseVec) -> SparseVec {
        self.projection.apply(v)
    }
}

/// Cohomology with the default pivot order.
pub fn cohomology(c: &CochainComplex) -> Result<Contraction> {
    cohomology_with(c, false)
}

/// Cohomology with a chosen pivot order; `reversed` processes the basis of
/// every degree backwards, giving a second deterministic contraction.
pub fn cohomology_with(c: &CochainComplex, reversed: bool) -> Result<Contraction> {
    if !c.squares_to_zero() {
        return Err(Error::Axiom { axiom: "d^2 = 0".into(), witness: "differential does not square to zero".into() });
    }
    let sp = &c.space;
    let nv = sp.dim();
    let degrees: Vec<i64> = sp.components().keys().copied().collect();
    let order = |k: i64| -> Vec<usize> {
        let r: Vec<usize> = sp.range_in(k).collect();
        if reversed {
            r.into_iter().rev().collect()
        } else {
            r
        }
    };
    // matrix of d from degree k to k+1 in the chosen orders
    let block = |k: i64| -> Matrix {
        let (src, tgt) = (order(k), order(k + 1));
        let mut m = Matrix::zeros(tgt.len(), src.len());
        for (b, &j) in src.iter().enumerate() {
            for (i, x) in c.differential.image(j).iter() {
                if let Some(a) = tgt.iter().position(|&t| t == i) {
                    m.set(a, b, x.clone());
                }
            }
        }
        m
    };
    let to_flat = |k: i64, v: &[Rational]| -> SparseVec {
        let ord = order(k);
        SparseVec::from_terms(v.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(a, x)| (ord[a], x.clone())))
    };

    // per degree: K pivots, B vectors, H representatives
    let mut k_pivots: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    let mut b_vecs: BTreeMap<i64, Vec<Vector>> = BTreeMap::new();
    for &k in &degrees {
        let m = block(k);
        let (_, piv) = m.rref();
        b_vecs.insert(k + 1, piv.iter().map(|&j| m.column(j)).collect());
        k_pivots.insert(k, piv);
    }

    let mut h_components: BTreeMap<i64, Vec<String>> = BTreeMap::new();
    let mut reps: Vec<(i64, SparseVec)> = Vec::new();
    let mut proj_rows: BTreeMap<i64, Vec<Vector>> = BTreeMap::new();
    let mut homotopy_images = vec![SparseVec::new(); nv];
    let mut used_labels: std::collections::BTreeSet<String> = sp.labels().iter().cloned().collect();

    for &k in &degrees {
        let n = sp.dim_in(k);
        let m = block(k);
        let z = m.kernel();
        let bk = b_vecs.get(&k).cloned().unwrap_or_default();
        let mut span = Subspace::span(n, &bk);
        let mut hk = Vec::new();
        for v in &z {
            if !span.contains(v) {
                hk.push(v.clone());
                let mut all = span.basis().to_vec();
                all.push(v.clone());
                span = Subspace::span(n, &all);
            }
        }
        let kp = &k_pivots[&k];
        let mut cols: Vec<Vector> = bk.clone();
        cols.extend(hk.iter().cloned());
        cols.extend(kp.iter().map(|&j| unit_vector(n, j)));
        if cols.len() != n {
            return consistency(format!("contraction basis in degree {k} has {} vectors for dimension {n}", cols.len()));
        }
        let change = Matrix::from_columns(n, &cols);
        let inv = change.inverse().ok_or_else(|| Error::Consistency(format!("singular change of basis in degree {k}")))?;
        let nb = bk.len();
        let nh = hk.len();
        proj_rows.insert(k, (nb..nb + nh).map(|r| inv.row(r).to_vec()).collect());
        // h(b_j) = −κ_j where κ_j is the pivot unit vector in degree k−1 with d κ_j = b_j
        if nb > 0 {
            let prev_piv = &k_pivots[&(k - 1)];
            let ord_prev = order(k - 1);
            let ord = order(k);
            for (a, &flat) in ord.iter().enumerate() {
                let mut img = SparseVec::new();
                for (j, &pj) in prev_piv.iter().enumerate() {
                    let c = inv.get(j, a);
                    if !c.is_zero() {
                        img.add_term(ord_prev[pj], &-c);
                    }
                }
                homotopy_images[flat] = img;
            }
        }
        for (j, v) in hk.iter().enumerate() {
            let flat = to_flat(k, v);
            let label = match flat.iter().collect::<Vec<_>>().as_slice() {
                [(i, c)] if c.is_one() => sp.label(*i).to_string(),
                _ => {
                    let mut l = format!("h{k}.{j}");
                    while used_labels.contains(&l) {
                        l.push('\'');
                    }
                    l
                }
            };
            used_labels.insert(label.clone());
            h_components.entry(k).or_default().push(label);
            reps.push((k, flat));
        }
    }
    let h = GradedVectorSpace::new(h_components)?;
    let nh = h.dim();
    let inclusion = GradedMap::new(0, nv, reps.iter().map(|(_, v)| v.clone()).collect())?;
    let mut proj_images = vec![SparseVec::new(); nv];
    for &k in &degrees {
        let rows = &proj_rows[&k];
        let hr = h.range_in(k);
        for (a, &flat) in order(k).iter().enumerate() {
            let mut img = SparseVec::new();
            for (r, row) in rows.iter().enumerate() {
                img.add_term(hr.start + r, &row[a]);
            }
            proj_images[flat] = img;
        }
    }
    let projection = GradedMap::new(0, nh, proj_images)?;
    let homotopy = GradedMap::new(-1, nv, homotopy_images)?;
    let contraction = Contraction { complex: c.clone(), cohomology: h, inclusion, projection, homotopy };
    contraction.verify()?;
    Ok(contraction)
}

/// The graded Lie algebra `H(L)` with bracket `[a, b] = p[ia, ib]`.
pub fn cohomology_lie(l: &DgLieAlgebra) -> Result<(DgLieAlgebra, Contraction)> {
    cohomology_lie_with(l, false)
}

pub fn cohomology_lie_with(l: &DgLieAlgebra, reversed: bool) -> Result<(DgLieAlgebra, Contraction)> {
    let c = cohomology_with(&l.complex(), reversed)?;
    let h = &c.cohomology;
    let mut bracket = BTreeMap::new();
    for a in 0..h.dim() {
        for b in a..h.dim() {
            if a == b && h.degree(a).rem_euclid(2) == 0 {
                continue;
            }
            let v = c.projection.apply(&l.bracket(c.inclusion.image(a), c.inclusion.image(b)));
            if !v.is_zero() {
                bracket.insert((a, b), v);
            }
        }
    }
    let alg = DgLieAlgebra::new(h.clone(), GradedMap::zero(h.dim(), h.dim(), 1), bracket)?;
    Ok((alg, c))
}

/// The induced morphism `H(f) = p_M f i_L` between cohomology algebras.
pub fn cohomology_morphism(f: &DglaMorphism) -> Result<DglaMorphism> {
    let (hl, cl) = cohomology_lie(&f.source)?;
    let (hm, cm) = cohomology_lie(&f.target)?;
    let map = cm.projection.compose(&f.map).compose(&cl.inclusion);
    DglaMorphism::new(hl, hm, map)
}

/// `L ⊗ 𝕂[ε]/(ε²)` with `ε` of degree 0 and the inclusion `x ↦ x ⊗ 1`.
pub fn dual_numbers(l: &DgLieAlgebra) -> Result<DglaMorphism> {
    let sp = l.space();
    let n = sp.dim();
    let mut comps: BTreeMap<i64, Vec<String>> = BTreeMap::new();
    for (&d, labels) in sp.components() {
        let e = comps.entry(d).or_default();
        e.extend(labels.iter().cloned());
        e.extend(labels.iter().map(|x| format!("{x}.eps")));
    }
    let big = GradedVectorSpace::new(comps)?;
    let one = |i: usize| big.index_of(sp.label(i)).expect("label");
    let eps = |i: usize| big.index_of(&format!("{}.eps", sp.label(i))).expect("label");
    let lift = |v: &SparseVec, f: &dyn Fn(usize) -> usize| -> SparseVec {
        SparseVec::from_terms(v.iter().map(|(i, c)| (f(i), c.clone())))
    };
    let mut dtab = BTreeMap::new();
    for i in 0..n {
        let dv = l.differential().image(i);
        dtab.insert(one(i), lift(dv, &one));
        dtab.insert(eps(i), lift(dv, &eps));
    }
    let mut br = Vec::new();
    for (&(i, j), v) in l.bracket_table() {
        br.push(((one(i), one(j)), lift(v, &one)));
        br.push(((one(i), eps(j)), lift(v, &eps)));
        if i != j {
            br.push(((eps(i), one(j)), lift(v, &eps)));
        }
    }
    let target = DgLieAlgebra::from_tables(big.clone(), dtab, br)?;
    let map = GradedMap::new(0, big.dim(), (0..n).map(|i| SparseVec::unit(one(i))).collect())?;
    DglaMorphism::new(l.clone(), target, map)
}
