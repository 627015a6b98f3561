//! Maurer–Cartan elements over `K[t]/(t^n)`, the gauge action, order-by-order
//! lifting and the quadraticity check.

use serde::Serialize;

use crate::dgla::{cohomology, DgLieAlgebra};
use crate::error::{consistency, invalid, Error, Result};
use crate::formality::FormalityReport;
use crate::linalg::{solve_linear, SparseVec};
use crate::linf::undecalage;
use crate::rational::Rational;

/// `Σ_{1 ≤ k < n} t^k x_k` in `L ⊗ (t)/(t^n)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedElement {
    order: usize,
    coeffs: Vec<SparseVec>,
}

impl TruncatedElement {
    /// `coeffs[k − 1]` is the coefficient of `t^k`; missing ones are zero.
    pub fn new(order: usize, mut coeffs: Vec<SparseVec>) -> Result<Self> {
        if order < 2 {
            return invalid("truncation order must be at least 2");
        }
        if coeffs.len() > order - 1 {
            if coeffs[order - 1..].iter().any(|c| !c.is_zero()) {
                return invalid(format!("coefficients beyond t^{} do not fit modulo t^{order}", order - 1));
            }
            coeffs.truncate(order - 1);
        }
        coeffs.resize(order - 1, SparseVec::new());
        Ok(TruncatedElement { order, coeffs })
    }

    pub fn zero(order: usize) -> Self {
        TruncatedElement { order, coeffs: vec![SparseVec::new(); order.max(2) - 1] }
    }

    /// `t x_1` modulo `t^order`.
    pub fn linear(order: usize, x1: SparseVec) -> Result<Self> {
        Self::new(order, vec![x1])
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coefficient(&self, k: usize) -> &SparseVec {
        &self.coeffs[k - 1]
    }

    pub fn coefficients(&self) -> &[SparseVec] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(SparseVec::is_zero)
    }

    /// The same element modulo a different power of `t`.
    pub fn with_order(&self, order: usize) -> Result<Self> {
        Self::new(order, self.coeffs.clone())
    }

    fn check_degree(&self, l: &DgLieAlgebra, degree: i64) -> Result<()> {
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.iter().any(|(i, _)| i >= l.dim()) {
                return invalid(format!("coefficient of t^{} lies outside the algebra", k + 1));
            }
            if c.iter().any(|(i, _)| l.space().degree(i) != degree) {
                return invalid(format!("coefficient of t^{} is not of degree {degree}", k + 1));
            }
        }
        Ok(())
    }
}

fn product(l: &DgLieAlgebra, x: &TruncatedElement, y: &TruncatedElement) -> Vec<SparseVec> {
    let n = x.order.min(y.order);
    let mut out = vec![SparseVec::new(); n - 1];
    for a in 1..n {
        for b in 1..n - a {
            let br = l.bracket(x.coefficient(a), y.coefficient(b));
            out[a + b - 1].add_scaled(&Rational::one(), &br);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct McReport {
    /// Coefficient of `t^k` in `dx + ½[x, x]`, for `1 ≤ k < n`.
    pub residuals: Vec<SparseVec>,
}

impl McReport {
    pub fn is_solution(&self) -> bool {
        self.residuals.iter().all(SparseVec::is_zero)
    }

    /// Least `k` with a nonzero residual.
    pub fn first_failure(&self) -> Option<usize> {
        self.residuals.iter().position(|r| !r.is_zero()).map(|k| k + 1)
    }
}

pub fn mc_check(l: &DgLieAlgebra, x: &TruncatedElement) -> Result<McReport> {
    x.check_degree(l, 1)?;
    let sq = product(l, x, x);
    let half = Rational::new(1, 2);
    let residuals = x.coeffs.iter().zip(&sq).map(|(c, s)| l.d(c).add(&s.scaled(&half))).collect();
    Ok(McReport { residuals })
}

/// `e^a ∗ x = x + Σ_{n≥0} [a, −]^n ([a, x] − da) / (n + 1)!`.
pub fn gauge_act(l: &DgLieAlgebra, a: &TruncatedElement, x: &TruncatedElement) -> Result<TruncatedElement> {
    a.check_degree(l, 0)?;
    if !mc_check(l, x)?.is_solution() {
        return Err(Error::Precondition("the gauge action is applied to Maurer–Cartan elements".into()));
    }
    let n = x.order.min(a.order);
    let x = x.with_order(n)?;
    let a = a.with_order(n)?;
    let bracket = product(l, &a, &x);
    let da: Vec<SparseVec> = a.coeffs.iter().map(|c| l.d(c)).collect();
    let mut term = TruncatedElement::new(n, bracket.iter().zip(&da).map(|(b, d)| b.sub(d)).collect())?;
    let mut out = x.coeffs.clone();
    let mut k = 0u32;
    while !term.is_zero() {
        let c = Rational::factorial(k + 1).recip();
        for (o, t) in out.iter_mut().zip(&term.coeffs) {
            o.add_scaled(&c, t);
        }
        term = TruncatedElement::new(n, product(l, &a, &term))?;
        k += 1;
    }
    let y = TruncatedElement::new(n, out)?;
    if !mc_check(l, &y)?.is_solution() {
        return consistency("gauge action left the Maurer–Cartan locus");
    }
    Ok(y)
}

/// Extending a solution modulo `t^n` to one modulo `t^{n+1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftObstruction {
    pub target_order: usize,
    /// `½ Σ_{a+b=n} [x_a, x_b]`, a cocycle in `L^2`.
    pub obstruction: SparseVec,
    /// Its coordinates in `H^2(L)`.
    pub class: SparseVec,
    pub solvable: bool,
    /// `x_n` with `dx_n = −obstruction`.
    pub increment: Option<SparseVec>,
}

impl LiftObstruction {
    pub fn lifted(&self, x: &TruncatedElement) -> Option<TruncatedElement> {
        let inc = self.increment.as_ref()?;
        let mut coeffs = x.coeffs.clone();
        coeffs.push(inc.clone());
        TruncatedElement::new(self.target_order, coeffs).ok()
    }
}

pub fn mc_lift(l: &DgLieAlgebra, x: &TruncatedElement) -> Result<LiftObstruction> {
    let report = mc_check(l, x)?;
    if let Some(k) = report.first_failure() {
        let r = &report.residuals[k - 1];
        return Err(Error::Precondition(format!(
            "not a Maurer–Cartan element: residual {} at t^{k}",
            l.space().format_vector(r)
        )));
    }
    let n = x.order;
    let ext = x.with_order(n + 1)?;
    let half = Rational::new(1, 2);
    let obstruction = product(l, &ext, &ext)[n - 1].scaled(&half);
    if !l.d(&obstruction).is_zero() {
        return consistency("lifting obstruction is not closed");
    }
    let c = cohomology(&l.complex())?;
    let class = c.class_of(&obstruction);
    let sp = l.space();
    let src: Vec<usize> = sp.range_in(1).collect();
    let tgt: Vec<usize> = sp.range_in(2).collect();
    let a = l.differential().block(sp, sp, 1);
    let rhs: Vec<Rational> = tgt.iter().map(|&i| -obstruction.get(i)).collect();
    let increment = if tgt.is_empty() {
        Some(SparseVec::new())
    } else {
        solve_linear(&a, &rhs)?.map(|y| SparseVec::from_terms(src.iter().zip(y).map(|(&i, c)| (i, c))))
    };
    if class.is_zero() != increment.is_some() {
        return consistency("lift solvability disagrees with the obstruction class");
    }
    Ok(LiftObstruction { target_order: n + 1, obstruction, class, solvable: increment.is_some(), increment })
}

/// Lifts step by step up to modulo `t^order`; returns the first failed step otherwise.
pub fn lift_to_order(l: &DgLieAlgebra, x: &TruncatedElement, order: usize) -> Result<std::result::Result<TruncatedElement, LiftObstruction>> {
    let mut cur = x.clone();
    while cur.order < order {
        let step = mc_lift(l, &cur)?;
        match step.lifted(&cur) {
            Some(next) => cur = next,
            None => return Ok(Err(step)),
        }
    }
    Ok(Ok(cur))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuadraticityRow {
    pub sample: String,
    pub lifts_to_t3: bool,
    pub lifts_in_model: bool,
    pub agree: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuadraticityReport {
    pub max_order: usize,
    pub rows: Vec<QuadraticityRow>,
    pub images_coincide: bool,
}

/// Compares liftability of `t x_1` to `t^3` in `L` with liftability to `t^{max_order}`
/// in the graded Lie model obtained from the formality certificate.
pub fn quadraticity_check(
    l: &DgLieAlgebra,
    certificate: &FormalityReport,
    samples: &[SparseVec],
    max_order: usize,
) -> Result<QuadraticityReport> {
    if !certificate.verdict.is_formal() {
        return Err(Error::Precondition("quadraticity needs a formality certificate".into()));
    }
    if certificate.input.space().shifted(1) != *l.space() {
        return Err(Error::Precondition("the certificate belongs to a different algebra".into()));
    }
    let model = undecalage(&certificate.gauge.reduced)?;
    let contraction = &certificate.minimal.contraction;
    let mut rows = Vec::new();
    for x1 in samples {
        if !l.d(x1).is_zero() {
            return invalid(format!("sample {} is not closed", l.space().format_vector(x1)));
        }
        let x = TruncatedElement::linear(2, x1.clone())?;
        let lifts_to_t3 = mc_lift(l, &x)?.solvable;
        let h1 = certificate.gauge.gauge.linear_part().apply(&contraction.class_of(x1));
        let y = TruncatedElement::linear(2, h1)?;
        let lifts_in_model = lift_to_order(&model, &y, max_order.max(3))?.is_ok();
        rows.push(QuadraticityRow {
            sample: l.space().format_vector(x1),
            lifts_to_t3,
            lifts_in_model,
            agree: lifts_to_t3 == lifts_in_model,
        });
    }
    let images_coincide = rows.iter().all(|r| r.agree);
    Ok(QuadraticityReport { max_order: max_order.max(3), rows, images_coincide })
}

/// All `Σ c_i z_i` with `|c_i| ≤ bound` over a basis `z_i` of the degree-1 cocycles.
pub fn lattice_samples(l: &DgLieAlgebra, bound: i64) -> Result<Vec<SparseVec>> {
    let sp = l.space();
    let src: Vec<usize> = sp.range_in(1).collect();
    let basis: Vec<SparseVec> = l
        .differential()
        .block(sp, sp, 1)
        .kernel()
        .into_iter()
        .map(|v| SparseVec::from_terms(src.iter().zip(v).map(|(&i, c)| (i, c))))
        .collect();
    if basis.len() > 6 {
        return invalid("more than 6 independent degree-1 cocycles; pass samples explicitly");
    }
    let width = (2 * bound + 1) as usize;
    let total = width.pow(basis.len() as u32);
    let mut out = Vec::with_capacity(total);
    for mut code in 0..total {
        let mut v = SparseVec::new();
        for b in &basis {
            let c = (code % width) as i64 - bound;
            code /= width;
            v.add_scaled(&Rational::from_int(c), b);
        }
        out.push(v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded::GradedVectorSpace;
    use std::collections::BTreeMap;

    fn he_odd() -> DgLieAlgebra {
        let sp = GradedVectorSpace::from_pairs(&[("h", 0), ("e", 1)]).unwrap();
        DgLieAlgebra::from_tables(sp, BTreeMap::new(), vec![((0, 1), SparseVec::unit(1))]).unwrap()
    }

    #[test]
    fn gauge_action_on_two_dim() {
        let l = he_odd();
        let x = TruncatedElement::linear(3, SparseVec::unit(1)).unwrap();
        let a = TruncatedElement::linear(3, SparseVec::unit(0)).unwrap();
        let y = gauge_act(&l, &a, &x).unwrap();
        assert_eq!(y.coefficients(), &[SparseVec::unit(1), SparseVec::unit(1)]);
    }

    #[test]
    fn lifting_with_trivial_differential() {
        let l = he_odd();
        let x = TruncatedElement::linear(2, SparseVec::unit(1)).unwrap();
        let lifted = lift_to_order(&l, &x, 6).unwrap().unwrap();
        assert_eq!(lifted.order(), 6);
        assert!(mc_check(&l, &lifted).unwrap().is_solution());
    }
}
