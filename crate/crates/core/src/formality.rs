//! Euler classes, the obstruction sequence `d_r(e)`, minimal models by
//! homotopy transfer, gauge reduction, formality verdicts, the transfer
//! criterion and the truncated Kaledin class.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::ce::{build_ce, pushforward, CeBicomplex};
use crate::dgla::{cohomology, cohomology_morphism, Contraction, DgLieAlgebra, DgModule, DglaMorphism};
use crate::error::{consistency, invalid, Error, Result};
use crate::graded::{GradedMap, GradedVectorSpace};
use crate::linalg::{quotient_basis, solve_linear, Matrix, SparseVec, Subspace, Vector};
use crate::linf::{
    ce_linf, coalgebra_image, conjugate, corestrict, decalage, exp_coderivation, linear_complex, LInfinityAlgebra,
    LInfinityMorphism, LinfCe, Taylor,
};
use crate::multilinear::{euler_map, nr_bracket, Multilinear};
use crate::power::{PowerBasis, PowerKind, SymTensor};
use crate::rational::Rational;
use crate::specseq::{page_map, SpectralSequence};

/// Coordinates on `Hom^h(V^{⊙n}, W)`, one per (canonical tuple, basis vector of `W`).
#[derive(Clone, Debug)]
pub struct HomBasis {
    arity: usize,
    degree: i64,
    pairs: Vec<(Vec<usize>, usize)>,
    index: BTreeMap<(Vec<usize>, usize), usize>,
}

impl HomBasis {
    pub fn new(source: &GradedVectorSpace, target: &GradedVectorSpace, arity: usize, degree: i64) -> Self {
        let pb = PowerBasis::new(source, PowerKind::Symmetric, arity);
        let mut pairs = Vec::new();
        for (k, t) in pb.elements().iter().enumerate() {
            for w in 0..target.dim() {
                if target.degree(w) - pb.degree(k) == degree {
                    pairs.push((t.clone(), w));
                }
            }
        }
        let index = pairs.iter().enumerate().map(|(j, p)| (p.clone(), j)).collect();
        HomBasis { arity, degree, pairs, index }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn element(&self, j: usize) -> Multilinear {
        let mut m = Multilinear::zero(self.arity, self.degree);
        let (t, w) = &self.pairs[j];
        m.set(t.clone(), SparseVec::unit(*w));
        m
    }

    pub fn coordinates(&self, m: &Multilinear) -> Result<Vector> {
        let mut x = vec![Rational::zero(); self.len()];
        for (t, v) in m.values() {
            for (w, c) in v.iter() {
                let j = self.index.get(&(t.clone(), w)).ok_or_else(|| {
                    Error::Consistency(format!("map of arity {} has a value outside Hom^{}", self.arity, self.degree))
                })?;
                x[*j] = c.clone();
            }
        }
        Ok(x)
    }

    pub fn from_coordinates(&self, x: &[Rational]) -> Multilinear {
        let mut m = Multilinear::zero(self.arity, self.degree);
        for ((t, w), c) in self.pairs.iter().zip(x) {
            if !c.is_zero() {
                m.add_at(t, c, &SparseVec::unit(*w));
            }
        }
        m
    }

    /// Matrix of a linear operator `Hom(self) → Hom(target)`.
    pub fn operator_matrix<F: Fn(&Multilinear) -> Multilinear>(&self, target: &HomBasis, op: F) -> Result<Matrix> {
        let cols = (0..self.len()).map(|j| target.coordinates(&op(&self.element(j)))).collect::<Result<Vec<_>>>()?;
        Ok(Matrix::from_columns(target.len(), &cols))
    }
}

/// Some `x` with `op(x) = rhs`, free variables zero.
fn solve_hom<F: Fn(&Multilinear) -> Multilinear>(
    src: &HomBasis,
    tgt: &HomBasis,
    op: F,
    rhs: &Multilinear,
) -> Result<Option<Multilinear>> {
    let a = src.operator_matrix(tgt, op)?;
    let b = tgt.coordinates(rhs)?;
    Ok(solve_linear(&a, &b)?.map(|x| src.from_coordinates(&x)))
}

fn apply_linear(m: &Multilinear, v: &SparseVec) -> SparseVec {
    let mut out = SparseVec::new();
    for (i, c) in v.iter() {
        if let Some(x) = m.get(&[i]) {
            out.add_scaled(c, x);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Grading {
    /// `CE(V, V)` of an L∞[1]-algebra, Euler class at `(1, −1)`.
    Linf,
    /// `CE(L, L)` of a DG-Lie algebra, Euler class at `(1, 0)`.
    Dgla,
}

/// The class of the Euler derivation on page 2.
#[derive(Clone, Debug)]
pub struct EulerClass {
    pub grading: Grading,
    pub p: i64,
    pub q: i64,
    /// The cohomology-level representative `i ∘ e ∘ p`, a `d_0`-cocycle.
    pub derivation: SparseVec,
    /// A representative in `Z_2`.
    pub representative: SparseVec,
    /// Coordinates in `E_2^{p,q}`.
    pub coordinates: Vector,
}

impl EulerClass {
    pub fn is_zero(&self) -> bool {
        self.coordinates.iter().all(Rational::is_zero)
    }
}

fn euler_in(ss: &SpectralSequence, grading: Grading, q: i64, rep: SparseVec) -> Result<EulerClass> {
    if ss.complex().length() < 2 {
        return Err(Error::InsufficientBounds("the Euler class needs columns l >= 2".into()));
    }
    let d1 = ss.differential_of(1, 1, q, &rep)?;
    if d1.iter().any(|x| !x.is_zero()) {
        return consistency("d_1 of the Euler derivation does not vanish");
    }
    let z = ss.lift_to_next(1, 1, q, &rep)?;
    let coordinates = ss.class_of(2, 1, q, &z)?;
    Ok(EulerClass { grading, p: 1, q, derivation: rep, representative: z, coordinates })
}

/// Euler class in `CE(V, W; f)`, represented by `v ↦ f_1 i((|h| + 1) h)` for `h = p(v)`.
pub fn linf_euler_class(ce: &LinfCe, ss: &SpectralSequence) -> Result<EulerClass> {
    let f = ce.morphism();
    let c = cohomology(&linear_complex(&f.source)?)?;
    let f1 = f.component(1);
    let hs = &c.cohomology;
    let rep = ce.cochain(1, |t| {
        let h = c.projection.apply(&SparseVec::unit(t[0]));
        let scaled = SparseVec::from_terms(h.iter().map(|(k, x)| (k, x * &Rational::from_int(hs.degree(k) + 1))));
        apply_linear(&f1, &c.inclusion.apply(&scaled))
    });
    euler_in(ss, Grading::Linf, -1, rep)
}

/// Euler class in `CE(L, L)`, represented by `x ↦ i(deg(h) h)` for `h = p(x)`.
pub fn dgla_euler_class(ce: &CeBicomplex, ss: &SpectralSequence) -> Result<EulerClass> {
    if *ce.module() != DgModule::adjoint(ce.base()) {
        return invalid("the DG-Lie Euler class lives in CE(L, L) with the adjoint module");
    }
    let c = cohomology(&ce.base().complex())?;
    let hs = &c.cohomology;
    let rep = ce.cochain(1, |t| {
        let h = c.projection.apply(&SparseVec::unit(t[0]));
        let scaled = SparseVec::from_terms(h.iter().map(|(k, x)| (k, x * &Rational::from_int(hs.degree(k)))));
        c.inclusion.apply(&scaled)
    });
    euler_in(ss, Grading::Dgla, 0, rep)
}

/// `d_r` of the Euler class.
#[derive(Clone, Debug)]
pub struct ObstructionStep {
    pub r: usize,
    /// Target cell `(1 + r, q − r + 1)`.
    pub cell: (i64, i64),
    pub coordinates: Vector,
    /// The representative of the Euler class in `Z_r` used.
    pub representative: SparseVec,
}

impl ObstructionStep {
    pub fn is_zero(&self) -> bool {
        self.coordinates.iter().all(Rational::is_zero)
    }
}

#[derive(Clone, Debug)]
pub struct ObstructionReport {
    pub grading: Grading,
    pub columns: usize,
    pub r_max: usize,
    pub euler: EulerClass,
    pub steps: Vec<ObstructionStep>,
}

impl ObstructionReport {
    pub fn first_nonzero(&self) -> Option<&ObstructionStep> {
        self.steps.iter().find(|s| !s.is_zero())
    }
}

/// The largest `r` whose obstruction is visible with `l` columns.
pub fn default_r_max(columns: usize) -> usize {
    columns.saturating_sub(2)
}

/// Computes `d_2(e), d_3(e), …` up to `r_max`, stopping at the first nonzero one.
pub fn obstruction_sequence(ss: &SpectralSequence, euler: &EulerClass, r_max: usize) -> Result<ObstructionReport> {
    let l = ss.complex().length();
    if r_max + 2 > l {
        return Err(Error::InsufficientBounds(format!(
            "d_{r_max}(e) lands in column {} and needs columns l >= {}",
            r_max + 1,
            r_max + 2
        )));
    }
    let (p, q) = (euler.p, euler.q);
    let mut z = euler.representative.clone();
    let mut steps = Vec::new();
    for r in 2..=r_max {
        let ri = r as i64;
        let coordinates = ss.differential_of(r, p, q, &z)?;
        let step = ObstructionStep { r, cell: (p + ri, q - ri + 1), coordinates, representative: z.clone() };
        let stop = !step.is_zero();
        steps.push(step);
        if stop {
            break;
        }
        z = ss.lift_to_next(r, p, q, &z)?;
    }
    Ok(ObstructionReport { grading: euler.grading, columns: l, r_max, euler: euler.clone(), steps })
}

/// Obstructions of a DG-Lie algebra in `CE(L, L)`.
pub fn dgla_obstructions(l: &DgLieAlgebra, columns: usize, r_max: usize) -> Result<ObstructionReport> {
    let ce = build_ce(&DgModule::adjoint(l), columns)?;
    let ss = ce.spectral_sequence()?;
    let e = dgla_euler_class(&ce, &ss)?;
    obstruction_sequence(&ss, &e, r_max)
}

/// Obstructions of an L∞[1]-algebra in `CE(V, V)`.
pub fn linf_obstructions(v: &LInfinityAlgebra, columns: usize, r_max: usize) -> Result<ObstructionReport> {
    let ce = ce_linf(&LInfinityMorphism::identity(v), columns)?;
    let ss = ce.spectral_sequence()?;
    let e = linf_euler_class(&ce, &ss)?;
    obstruction_sequence(&ss, &e, r_max)
}

/// A minimal L∞[1]-algebra on `H(V, q_1)` with weak equivalences `f: V → W`, `g: W → V`, `fg = 1`.
#[derive(Clone, Debug)]
pub struct MinimalModel {
    pub model: LInfinityAlgebra,
    pub contraction: Contraction,
    pub projection: LInfinityMorphism,
    pub inclusion: LInfinityMorphism,
}

/// Homotopy transfer: `g_1 = i`, `r_n = p X_n`, `g_n = h X_n` with
/// `X_n = Σ_{k≥2} q_k G_n^k − Σ_{1<b<n} g(r̂_b)`, and `f` solved from
/// `f Q = R f`, `f g = 1` with `f_1 = p`.
pub fn minimal_model(v: &LInfinityAlgebra) -> Result<MinimalModel> {
    let n_max = v.weight();
    if v.is_minimal() {
        let c = cohomology(&linear_complex(v)?)?;
        let id = LInfinityMorphism::identity(v);
        return Ok(MinimalModel { model: v.clone(), contraction: c, projection: id.clone(), inclusion: id });
    }
    let c = cohomology(&linear_complex(v)?)?;
    let (vs, ws) = (v.space(), &c.cohomology);
    let (vd, wd) = (vs.degrees(), ws.degrees());
    let q1 = v.q(1);
    let q_hi: Taylor = v.taylor().iter().filter(|(&k, _)| k >= 2).map(|(&k, q)| (k, q.clone())).collect();
    let mut g: Taylor = BTreeMap::new();
    g.insert(1, Multilinear::linear(0, c.inclusion.images()));
    let mut r: Taylor = BTreeMap::new();
    for n in 2..=n_max {
        let mut rn = Multilinear::zero(n, 1);
        let mut gn = Multilinear::zero(n, 0);
        for t in PowerBasis::new(ws, PowerKind::Symmetric, n).elements() {
            let mut x = corestrict(&q_hi, &coalgebra_image(&g, wd, vd, t));
            for rb in r.values() {
                x = x.sub(&corestrict(&g, &rb.lift_apply(wd, t)));
            }
            if !apply_linear(&q1, &x).is_zero() {
                return consistency(format!("transfer term X_{n} is not q_1-closed"));
            }
            rn.set(t.clone(), c.projection.apply(&x));
            gn.set(t.clone(), c.homotopy.apply(&x));
        }
        r.insert(n, rn);
        g.insert(n, gn);
    }
    let model = LInfinityAlgebra::new(ws.clone(), r.clone(), n_max)?;
    let mut f: Taylor = BTreeMap::new();
    f.insert(1, Multilinear::linear(0, c.projection.images()));
    for n in 2..=n_max {
        let fn_ = projection_component(v, &model, &g, &f, n)?;
        f.insert(n, fn_);
    }
    let inclusion = LInfinityMorphism::new(model.clone(), v.clone(), g)?;
    let projection = LInfinityMorphism::new(v.clone(), model.clone(), f)?;
    if let Some(fail) = model.validate().first_failure() {
        return consistency(format!("transferred structure fails {}", fail.axiom));
    }
    if let Some(fail) = inclusion.validate().first_failure() {
        return consistency(format!("transferred inclusion fails {}", fail.axiom));
    }
    if let Some(fail) = projection.validate().first_failure() {
        return consistency(format!("transferred projection fails {}", fail.axiom));
    }
    if !projection.compose(&inclusion)?.is_identity() {
        return consistency("f g is not the identity");
    }
    Ok(MinimalModel { model, contraction: c, projection, inclusion })
}

fn projection_component(v: &LInfinityAlgebra, w: &LInfinityAlgebra, g: &Taylor, f: &Taylor, n: usize) -> Result<Multilinear> {
    let (vs, ws) = (v.space(), w.space());
    let (vd, wd) = (vs.degrees(), ws.degrees());
    let vpow = PowerBasis::new(vs, PowerKind::Symmetric, n);
    let wpow = PowerBasis::new(ws, PowerKind::Symmetric, n);
    let q1 = v.q(1);
    // f_n q̂_1 = Y_n on V^{⊙n}
    let mut rows: Vec<(i64, SymTensor, SparseVec)> = Vec::new();
    for (k, t) in vpow.elements().iter().enumerate() {
        let fv = coalgebra_image(f, vd, wd, t);
        let mut y = corestrict(w.taylor(), &fv);
        for (&b, qb) in v.taylor() {
            if b >= 2 {
                y = y.sub(&corestrict(f, &qb.lift_apply(vd, t)));
            }
        }
        rows.push((vpow.degree(k) + 1, q1.lift_apply(vd, t), y));
    }
    // f_n i^{⊙n} = −Σ_{k<n} f_k G^k_n on W^{⊙n}
    let mut g1 = BTreeMap::new();
    g1.insert(1, g[&1].clone());
    for (k, u) in wpow.elements().iter().enumerate() {
        let rhs = corestrict(f, &coalgebra_image(g, wd, vd, u)).scaled(&Rational::from_int(-1));
        rows.push((wpow.degree(k), coalgebra_image(&g1, wd, vd, u), rhs));
    }
    let mut out = Multilinear::zero(n, 0);
    for wi in 0..ws.dim() {
        let deg = ws.degree(wi);
        let cols: Vec<usize> = (0..vpow.len()).filter(|&k| vpow.degree(k) == deg).collect();
        if cols.is_empty() {
            continue;
        }
        let pos: BTreeMap<&[usize], usize> = cols.iter().enumerate().map(|(a, &k)| (vpow.element(k), a)).collect();
        let eqs: Vec<&(i64, SymTensor, SparseVec)> = rows.iter().filter(|(d, _, _)| *d == deg).collect();
        let mut a = Matrix::zeros(eqs.len(), cols.len());
        let mut b = vec![Rational::zero(); eqs.len()];
        for (i, (_, lhs, rhs)) in eqs.iter().enumerate() {
            for (t, c) in lhs.iter() {
                if let Some(&j) = pos.get(t.as_slice()) {
                    a.add_to(i, j, c);
                }
            }
            b[i] = rhs.get(wi);
        }
        let x = solve_linear(&a, &b)?
            .ok_or_else(|| Error::Consistency(format!("no projection component f_{n} exists at output {}", ws.label(wi))))?;
        for (a, &k) in cols.iter().enumerate() {
            if !x[a].is_zero() {
                out.add_at(vpow.element(k), &x[a], &SparseVec::unit(wi));
            }
        }
    }
    Ok(out)
}

/// `α` of arity `arity − 1` with `[q_2, α] = q_arity`.
#[derive(Clone, Debug)]
pub struct GaugeStep {
    pub arity: usize,
    pub alpha: Multilinear,
}

#[derive(Clone, Debug)]
pub struct GaugeOutcome {
    pub steps: Vec<GaugeStep>,
    /// The structure after all successful steps.
    pub reduced: LInfinityAlgebra,
    /// The composite `e^{α̂_k} ⋯ e^{α̂_1}` from the input to `reduced`.
    pub gauge: LInfinityMorphism,
    /// First arity `i` where `[q_2, α] = q_i` has no solution, with that `q_i`.
    pub failure: Option<(usize, Multilinear)>,
}

/// Kills `q_3, q_4, …, q_N` in turn by `r = e^{ad α}(q)` with `[q_2, α] = q_i`.
pub fn gauge_reduce(v: &LInfinityAlgebra) -> Result<GaugeOutcome> {
    if !v.is_minimal() {
        return Err(Error::Precondition("gauge reduction needs a minimal structure (q_1 = 0)".into()));
    }
    let n = v.weight();
    let space = v.space();
    let mut cur = v.clone();
    let mut gauge = LInfinityMorphism::identity(v);
    let mut steps = Vec::new();
    let mut failure = None;
    for i in 3..=n {
        let qi = cur.q(i);
        if qi.is_zero() {
            continue;
        }
        let src = HomBasis::new(space, space, i - 1, 0);
        let tgt = HomBasis::new(space, space, i, 1);
        let q2 = cur.q(2);
        let Some(alpha) = solve_hom(&src, &tgt, |a| nr_bracket(space, &q2, a), &qi)? else {
            failure = Some((i, qi));
            break;
        };
        let mut a: Taylor = BTreeMap::new();
        a.insert(i - 1, alpha.clone());
        let next = LInfinityAlgebra::new(space.clone(), conjugate(space, cur.taylor(), &a, n), n)?;
        if !next.q(i).is_zero() {
            return consistency(format!("gauge step did not kill q_{i}"));
        }
        let e = LInfinityMorphism::new(cur.clone(), next.clone(), exp_coderivation(space, &a, n)?)?;
        gauge = e.compose(&gauge)?;
        steps.push(GaugeStep { arity: i, alpha });
        cur = next;
    }
    Ok(GaugeOutcome { steps, reduced: cur, gauge, failure })
}

#[derive(Clone, Debug)]
pub enum FormalityVerdict {
    /// A nonzero `d_r(e)`; unconditional.
    NotFormal { witness: ObstructionStep },
    /// An explicit L∞-isomorphism from the minimal model onto `(H, 0, q_2, 0, …)` up to weight `N`.
    FormalUpTo { weight: usize, columns: usize, gauge: LInfinityMorphism },
    /// All transferred `q_n`, `n ≥ 2`, vanish up to weight `N`.
    HomotopyAbelianUpTo { weight: usize, columns: usize },
}

impl FormalityVerdict {
    pub fn name(&self) -> &'static str {
        match self {
            FormalityVerdict::NotFormal { .. } => "NotFormal",
            FormalityVerdict::FormalUpTo { .. } => "FormalUpTo",
            FormalityVerdict::HomotopyAbelianUpTo { .. } => "HomotopyAbelianUpTo",
        }
    }

    pub fn is_formal(&self) -> bool {
        !matches!(self, FormalityVerdict::NotFormal { .. })
    }
}

#[derive(Clone, Debug)]
pub struct FormalityReport {
    pub weight: usize,
    pub columns: usize,
    pub input: LInfinityAlgebra,
    pub minimal: MinimalModel,
    pub gauge: GaugeOutcome,
    pub obstructions: ObstructionReport,
    pub verdict: FormalityVerdict,
}

#[derive(Clone, Copy, Debug)]
pub enum FormalityInput<'a> {
    Dgla(&'a DgLieAlgebra),
    Linf(&'a LInfinityAlgebra),
}

/// Décalage, minimal model and gauge reduction, cross-checked against the
/// obstruction sequence computed independently in `CE(L, L)` or `CE(V, V)`.
pub fn formality_verdict(input: FormalityInput<'_>, weight: usize, columns: usize) -> Result<FormalityReport> {
    if weight < 3 || columns < 3 {
        return Err(Error::InsufficientBounds(format!(
            "formality needs weight N >= 3 and columns l >= 3 (got N = {weight}, l = {columns})"
        )));
    }
    let r_max = default_r_max(columns);
    let (v, obstructions) = match input {
        FormalityInput::Dgla(l) => {
            l.validate().into_result()?;
            (decalage(l, weight), dgla_obstructions(l, columns, r_max)?)
        }
        FormalityInput::Linf(v) => {
            let v = v.with_weight(weight);
            v.validate().into_result()?;
            let obs = linf_obstructions(&v, columns, r_max)?;
            (v, obs)
        }
    };
    let minimal = minimal_model(&v)?;
    let gauge = gauge_reduce(&minimal.model)?;
    let first = obstructions.first_nonzero().cloned();
    let verdict = match (&gauge.failure, first) {
        (Some((i, _)), Some(w)) => {
            if w.r + 1 != *i {
                return consistency(format!("gauge fails at q_{i} but the first nonzero obstruction is d_{}(e)", w.r));
            }
            FormalityVerdict::NotFormal { witness: w }
        }
        (Some((i, _)), None) => {
            if i - 1 <= r_max {
                return consistency(format!("gauge fails at q_{i} but d_{}(e) vanishes", i - 1));
            }
            return Err(Error::InsufficientBounds(format!(
                "q_{i} is not gauge-trivial; certifying this needs columns l >= {}",
                i + 1
            )));
        }
        (None, Some(w)) => {
            if w.r < weight {
                return consistency(format!("d_{}(e) is nonzero but the gauge reduction succeeds", w.r));
            }
            FormalityVerdict::NotFormal { witness: w }
        }
        (None, None) => {
            if let Some(fail) = gauge.gauge.validate().first_failure() {
                return consistency(format!("accumulated gauge fails {}", fail.axiom));
            }
            if minimal.model.taylor().is_empty() {
                FormalityVerdict::HomotopyAbelianUpTo { weight, columns }
            } else {
                FormalityVerdict::FormalUpTo { weight, columns, gauge: gauge.gauge.clone() }
            }
        }
    };
    Ok(FormalityReport { weight, columns, input: v, minimal, gauge, obstructions, verdict })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InjectivityRow {
    pub p: i64,
    pub q: i64,
    pub source_dim: usize,
    pub target_dim: usize,
    pub rank: usize,
    pub injective: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TransferConclusion {
    FormalUpToBounds,
    CriterionInconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TransferReport {
    pub columns: usize,
    pub cohomology_injective: bool,
    pub rows: Vec<InjectivityRow>,
    /// Whether the target was declared formal rather than checked.
    pub m_formal_declared: bool,
    pub m_formal: bool,
    pub conclusion: TransferConclusion,
}

/// Injectivity of `E(HL, HL)_2^{p,2−p} → E(HL, HM)_2^{p,2−p}` for `3 ≤ p < l`.
///
/// `m_formal` is the declared formality of the target; when absent it is
/// decided by [`formality_verdict`] with the given weight.
pub fn transfer_criterion(f: &DglaMorphism, columns: usize, m_formal: Option<bool>, weight: usize) -> Result<TransferReport> {
    if let Some(fail) = f.validate().first_failure() {
        return Err(Error::Precondition(format!("f is not a DG-Lie morphism: {} fails", fail.axiom)));
    }
    if columns < 4 {
        return Err(Error::InsufficientBounds("the transfer criterion needs columns l >= 4".into()));
    }
    let hf = cohomology_morphism(f)?;
    let cohomology_injective = hf.map.to_matrix().rank() == hf.source.dim();
    let ce_ll = build_ce(&DgModule::adjoint(&hf.source), columns)?;
    let ce_lm = build_ce(&DgModule::via_morphism(&hf)?, columns)?;
    let map = pushforward(&hf, &ce_ll, &ce_lm)?;
    let (ss_ll, ss_lm) = (ce_ll.spectral_sequence()?, ce_lm.spectral_sequence()?);
    let maps = page_map(&ss_ll, &ss_lm, &map, 2)?;
    let mut rows = Vec::new();
    for p in 3..columns as i64 {
        let q = 2 - p;
        let (source_dim, target_dim, rank) = match maps.get(&(p, q)) {
            Some(m) => (m.cols(), m.rows(), m.rank()),
            None => (0, ss_lm.page(2).dim(p, q), 0),
        };
        rows.push(InjectivityRow { p, q, source_dim, target_dim, rank, injective: rank == source_dim });
    }
    let (declared, m_ok) = match m_formal {
        Some(b) => (true, b),
        None => (false, formality_verdict(FormalityInput::Dgla(&f.target), weight.max(3), columns)?.verdict.is_formal()),
    };
    let conclusion = if m_ok && rows.iter().all(|r| r.injective) {
        TransferConclusion::FormalUpToBounds
    } else {
        TransferConclusion::CriterionInconclusive
    };
    Ok(TransferReport { columns, cohomology_injective, rows, m_formal_declared: declared, m_formal: m_ok, conclusion })
}

/// One identity checked coefficientwise in `t`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TIdentity {
    pub name: String,
    pub holds: bool,
    /// Least power of `t` where it fails.
    pub failing_order: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct KaledinClass {
    pub order: usize,
    pub weight: usize,
    /// `q(t) = Σ t^k q_{k+2}`, `k < m`.
    pub coefficients: Vec<Multilinear>,
    /// `∂_t q(t) = Σ (k+1) t^k q_{k+3}`, `k < m`.
    pub derivative: Vec<Multilinear>,
    pub identities: Vec<TIdentity>,
    /// `dim H^1` of the truncated complex in the relevant weight.
    pub cohomology_dim: usize,
    pub class_coordinates: Vector,
    /// `β(t)` with `[q(t), β(t)] = ∂_t q(t)` when the class vanishes.
    pub primitive: Option<Vec<Multilinear>>,
}

impl KaledinClass {
    pub fn is_zero(&self) -> bool {
        self.class_coordinates.iter().all(Rational::is_zero)
    }

    pub fn identities_hold(&self) -> bool {
        self.identities.iter().all(|i| i.holds)
    }
}

/// Coefficient spaces `Σ_s t^s Hom^h(V^{⊙ s + shift}, V)`, `s < m`, arity `≤ N`.
struct TSeries {
    blocks: Vec<(usize, HomBasis)>,
    offsets: Vec<usize>,
}

impl TSeries {
    fn new(space: &GradedVectorSpace, m: usize, n: usize, shift: usize, degree: i64) -> Self {
        let mut blocks = Vec::new();
        let mut offsets = vec![0];
        for s in 0..m {
            if s + shift > n {
                break;
            }
            let hb = HomBasis::new(space, space, s + shift, degree);
            offsets.push(offsets.last().unwrap() + hb.len());
            blocks.push((s, hb));
        }
        TSeries { blocks, offsets }
    }

    fn dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    fn coordinates(&self, x: &[Multilinear]) -> Result<Vector> {
        let mut out = Vec::with_capacity(self.dim());
        for (s, hb) in &self.blocks {
            match x.get(*s) {
                Some(m) => out.extend(hb.coordinates(m)?),
                None => out.extend(vec![Rational::zero(); hb.len()]),
            }
        }
        Ok(out)
    }

    fn series(&self, x: &[Rational]) -> Vec<Multilinear> {
        self.blocks.iter().zip(self.offsets.windows(2)).map(|((_, hb), w)| hb.from_coordinates(&x[w[0]..w[1]])).collect()
    }

    fn unit(&self, j: usize) -> (usize, Multilinear) {
        let b = self.offsets.partition_point(|&o| o <= j) - 1;
        let (s, hb) = &self.blocks[b];
        (*s, hb.element(j - self.offsets[b]))
    }
}

/// `[q(t), x(t)]` truncated at `t^m` and arity `N`, for `x` with `x_s` of arity `s + shift`.
fn bracket_series(space: &GradedVectorSpace, q: &[Multilinear], x: &BTreeMap<usize, Multilinear>, m: usize, n: usize) -> Vec<Multilinear> {
    let mut out: Vec<Option<Multilinear>> = vec![None; m];
    for (a, qa) in q.iter().enumerate() {
        for (&b, xb) in x {
            let s = a + b;
            if s >= m || qa.arity() + xb.arity() - 1 > n || qa.is_zero() || xb.is_zero() {
                continue;
            }
            let br = nr_bracket(space, qa, xb);
            match &mut out[s] {
                Some(acc) => acc.add_scaled(&Rational::one(), &br),
                slot => *slot = Some(br),
            }
        }
    }
    out.into_iter().map(|o| o.unwrap_or_else(|| Multilinear::zero(0, 0))).collect()
}

fn first_nonzero(x: &[Multilinear]) -> Option<usize> {
    x.iter().position(|m| !m.is_zero())
}

/// The Kaledin class of a minimal structure, truncated at `t^m` and weight `N`.
pub fn kaledin_class(v: &LInfinityAlgebra, m: usize) -> Result<KaledinClass> {
    if !v.is_minimal() {
        return Err(Error::Precondition("the Kaledin class is defined for minimal structures (q_1 = 0)".into()));
    }
    if m < 2 {
        return invalid("t-truncation order must be at least 2");
    }
    let n = v.weight();
    let space = v.space();
    let coefficients: Vec<Multilinear> = (0..m).map(|k| v.q(k + 2)).collect();
    let derivative: Vec<Multilinear> =
        (0..m).map(|k| v.q(k + 3).scaled(&Rational::from_int(k as i64 + 1))).collect();
    let as_map = |x: &[Multilinear]| -> BTreeMap<usize, Multilinear> { x.iter().cloned().enumerate().collect() };
    let mut identities = Vec::new();
    let sq = bracket_series(space, &coefficients, &as_map(&coefficients), m, n);
    identities.push(residual_identity("[q(t), q(t)] = 0", &sq));
    let dq = bracket_series(space, &coefficients, &as_map(&derivative), m, n);
    identities.push(residual_identity("[q(t), d/dt q(t)] = 0", &dq));
    let e = euler_map(space);
    let mut eul = Vec::new();
    for (k, c) in coefficients.iter().enumerate() {
        if c.arity() <= n {
            let lhs = c.scaled(&Rational::from_int(k as i64));
            eul.push(lhs.sub(&nr_bracket(space, c, &e)));
        }
    }
    identities.push(residual_identity("t d/dt q(t) = [q(t), e]", &eul));

    let c0 = TSeries::new(space, m, n, 2, 0);
    let c1 = TSeries::new(space, m, n, 3, 1);
    let c2 = TSeries::new(space, m, n, 4, 2);
    let d_matrix = |src: &TSeries, tgt: &TSeries| -> Result<Matrix> {
        let cols = (0..src.dim())
            .map(|j| {
                let (s, u) = src.unit(j);
                let mut x = BTreeMap::new();
                x.insert(s, u);
                tgt.coordinates(&bracket_series(space, &coefficients, &x, m, n))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Matrix::from_columns(tgt.dim(), &cols))
    };
    let d0 = d_matrix(&c0, &c1)?;
    let d1 = d_matrix(&c1, &c2)?;
    let z = Subspace::span(c1.dim(), &d1.kernel());
    let b = Subspace::span(c1.dim(), &d0.image());
    let quotient = quotient_basis(&z, &b)?;
    let target = c1.coordinates(&derivative)?;
    let (class_coordinates, primitive) = if z.contains(&target) {
        let coords = quotient.coordinates(&target)?;
        let prim = if coords.iter().all(Rational::is_zero) {
            solve_linear(&d0, &target)?.map(|x| c0.series(&x))
        } else {
            None
        };
        (coords, prim)
    } else {
        return consistency("d/dt q(t) is not a cocycle of the truncated complex");
    };
    Ok(KaledinClass {
        order: m,
        weight: n,
        coefficients,
        derivative,
        identities,
        cohomology_dim: quotient.dim(),
        class_coordinates,
        primitive,
    })
}

fn residual_identity(name: &str, residual: &[Multilinear]) -> TIdentity {
    let failing_order = first_nonzero(residual);
    TIdentity { name: name.into(), holds: failing_order.is_none(), failing_order }
}

/// `GradedMap` of the cohomology-level Euler derivation `h ↦ (|h| + 1) h`.
pub fn euler_on(space: &GradedVectorSpace, shift: i64) -> GradedMap {
    let images = (0..space.dim()).map(|i| SparseVec::unit(i).scaled(&Rational::from_int(space.degree(i) + shift))).collect();
    GradedMap::new(0, space.dim(), images).expect("diagonal map")
}
