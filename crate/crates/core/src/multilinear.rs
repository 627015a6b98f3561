//! Graded-symmetric multilinear maps `V^{⊙n} → W` and their coderivation lifts.

use std::collections::BTreeMap;

use crate::graded::GradedVectorSpace;
use crate::linalg::SparseVec;
use crate::power::{normalize, unshuffles, PowerBasis, PowerKind, SymTensor};
use crate::rational::Rational;

/// A homogeneous graded-symmetric map stored on canonical tuples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Multilinear {
    arity: usize,
    degree: i64,
    values: BTreeMap<Vec<usize>, SparseVec>,
}

impl Multilinear {
    pub fn zero(arity: usize, degree: i64) -> Self {
        Multilinear { arity, degree, values: BTreeMap::new() }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zero(1, 0);
        for i in 0..dim {
            m.set(vec![i], SparseVec::unit(i));
        }
        m
    }

    /// The linear map given by a list of images.
    pub fn linear(degree: i64, images: &[SparseVec]) -> Self {
        let mut m = Self::zero(1, degree);
        for (i, v) in images.iter().enumerate() {
            m.set(vec![i], v.clone());
        }
        m
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    pub fn values(&self) -> &BTreeMap<Vec<usize>, SparseVec> {
        &self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    /// Value on a canonical tuple.
    pub fn get(&self, canonical: &[usize]) -> Option<&SparseVec> {
        self.values.get(canonical)
    }

    pub fn set(&mut self, canonical: Vec<usize>, v: SparseVec) {
        debug_assert_eq!(canonical.len(), self.arity);
        if v.is_zero() {
            self.values.remove(&canonical);
        } else {
            self.values.insert(canonical, v);
        }
    }

    pub fn add_at(&mut self, canonical: &[usize], c: &Rational, v: &SparseVec) {
        if c.is_zero() || v.is_zero() {
            return;
        }
        let e = self.values.entry(canonical.to_vec()).or_default();
        e.add_scaled(c, v);
        if e.is_zero() {
            self.values.remove(canonical);
        }
    }

    /// Value on an arbitrary tuple of source basis indices.
    pub fn eval(&self, degrees: &[i64], tuple: &[usize]) -> SparseVec {
        match normalize(PowerKind::Symmetric, degrees, tuple) {
            Some((t, s)) => self.values.get(&t).map_or_else(SparseVec::new, |v| v.scaled(&Rational::from_int(s))),
            None => SparseVec::new(),
        }
    }

    /// Applies the map to the arity-`n` part of a symmetric tensor.
    pub fn apply_tensor(&self, x: &SymTensor) -> SparseVec {
        let mut out = SparseVec::new();
        for (t, c) in x.iter() {
            if t.len() == self.arity {
                if let Some(v) = self.values.get(t) {
                    out.add_scaled(c, v);
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Multilinear) -> Multilinear {
        assert_eq!(self.arity, other.arity, "adding maps of different arity");
        let mut out = self.clone();
        for (t, v) in &other.values {
            out.add_at(t, &Rational::one(), v);
        }
        out
    }

    pub fn add_scaled(&mut self, c: &Rational, other: &Multilinear) {
        assert_eq!(self.arity, other.arity, "adding maps of different arity");
        for (t, v) in &other.values {
            self.add_at(t, c, v);
        }
    }

    pub fn sub(&self, other: &Multilinear) -> Multilinear {
        let mut out = self.clone();
        out.add_scaled(&Rational::from_int(-1), other);
        out
    }

    pub fn scaled(&self, c: &Rational) -> Multilinear {
        let mut out = Multilinear::zero(self.arity, self.degree);
        if !c.is_zero() {
            for (t, v) in &self.values {
                out.values.insert(t.clone(), v.scaled(c));
            }
        }
        out
    }

    /// `ĝ(v_t)`: the coderivation lift applied to one tuple,
    /// `Σ ε g(v_S) ⊙ v_rest` over `arity`-subsets `S`.
    pub fn lift_apply(&self, degrees: &[i64], tuple: &[usize]) -> SymTensor {
        let mut out = SymTensor::new();
        let k = self.arity;
        if k > tuple.len() {
            return out;
        }
        let tdeg: Vec<i64> = tuple.iter().map(|&i| degrees[i]).collect();
        for (s, rest, sign) in unshuffles(&tdeg, PowerKind::Symmetric, k) {
            let args: Vec<usize> = s.iter().map(|&i| tuple[i]).collect();
            let val = self.eval(degrees, &args);
            if val.is_zero() {
                continue;
            }
            let sign = Rational::from_int(sign);
            let mut buf = Vec::with_capacity(rest.len() + 1);
            for (w, c) in val.iter() {
                buf.clear();
                buf.push(w);
                buf.extend(rest.iter().map(|&i| tuple[i]));
                out.add_tuple(degrees, &buf, &(&sign * c));
            }
        }
        out
    }

    /// The lift applied to a symmetric tensor.
    pub fn lift_apply_tensor(&self, degrees: &[i64], x: &SymTensor) -> SymTensor {
        let mut out = SymTensor::new();
        for (t, c) in x.iter() {
            out.add_scaled(c, &self.lift_apply(degrees, t));
        }
        out
    }

    /// Values taken in degrees other than `deg(t) + degree`, if any.
    pub fn homogeneity_violation(&self, source: &GradedVectorSpace, target: &GradedVectorSpace) -> Option<Vec<usize>> {
        self.values.iter().find_map(|(t, v)| {
            let want: i64 = t.iter().map(|&i| source.degree(i)).sum::<i64>() + self.degree;
            v.iter().any(|(i, _)| target.degree(i) != want).then(|| t.clone())
        })
    }

    pub fn with_degree(mut self, degree: i64) -> Self {
        self.degree = degree;
        self
    }
}

/// `f ∘ ĝ` as a map of arity `f.arity + g.arity − 1` on `V`.
pub fn compose_lift(space: &GradedVectorSpace, f: &Multilinear, g: &Multilinear) -> Multilinear {
    let n = f.arity() + g.arity() - 1;
    let degrees = space.degrees();
    let basis = PowerBasis::new(space, PowerKind::Symmetric, n);
    let mut out = Multilinear::zero(n, f.degree() + g.degree());
    for t in basis.elements() {
        let v = f.apply_tensor(&g.lift_apply(degrees, t));
        out.set(t.clone(), v);
    }
    out
}

/// Nijenhuis–Richardson bracket `[f, g] = f ĝ − (−1)^{|f||g|} g f̂`.
pub fn nr_bracket(space: &GradedVectorSpace, f: &Multilinear, g: &Multilinear) -> Multilinear {
    let a = compose_lift(space, f, g);
    let b = compose_lift(space, g, f);
    let sign = Rational::sign(f.degree() * g.degree());
    let mut out = a;
    out.add_scaled(&-&sign, &b);
    out
}

/// Bracket of two maps given as sums of components by arity.
pub fn nr_bracket_sum(
    space: &GradedVectorSpace,
    f: &BTreeMap<usize, Multilinear>,
    g: &BTreeMap<usize, Multilinear>,
    max_arity: usize,
) -> BTreeMap<usize, Multilinear> {
    let mut out: BTreeMap<usize, Multilinear> = BTreeMap::new();
    for (&a, fa) in f {
        for (&b, gb) in g {
            if a + b == 0 || a + b - 1 > max_arity {
                continue;
            }
            let br = nr_bracket(space, fa, gb);
            if br.is_zero() {
                continue;
            }
            match out.get_mut(&(a + b - 1)) {
                Some(m) => m.add_scaled(&Rational::one(), &br),
                None => {
                    out.insert(a + b - 1, br);
                }
            }
        }
    }
    out.retain(|_, m| !m.is_zero());
    out
}

/// The Euler map `v ↦ (|v| + 1) v`.
pub fn euler_map(space: &GradedVectorSpace) -> Multilinear {
    let images: Vec<SparseVec> = (0..space.dim())
        .map(|i| SparseVec::unit(i).scaled(&Rational::from_int(space.degree(i) + 1)))
        .collect();
    Multilinear::linear(0, &images)
}
