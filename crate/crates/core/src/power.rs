//! Koszul signs, symmetric and exterior powers of graded spaces, and symmetric tensors.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::graded::GradedVectorSpace;
use crate::linalg::SparseVec;
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PowerKind {
    Symmetric,
    Exterior,
}

fn odd(d: i64) -> bool {
    d.rem_euclid(2) == 1
}

/// Sign picked up when two adjacent factors of degrees `a`, `b` trade places.
pub fn swap_sign(kind: PowerKind, a: i64, b: i64) -> i64 {
    let s = if odd(a) && odd(b) { -1 } else { 1 };
    match kind {
        PowerKind::Symmetric => s,
        PowerKind::Exterior => -s,
    }
}

/// Koszul sign of rearranging `(v_1, …, v_n)` into `(v_σ(1), …, v_σ(n))`.
///
/// `permutation` is one-based. With `antisymmetric` the sign of σ is included.
pub fn koszul_sign(degrees: &[i64], permutation: &[usize], antisymmetric: bool) -> Result<i64> {
    let n = degrees.len();
    if permutation.len() != n {
        return invalid(format!("permutation of length {} for {} degrees", permutation.len(), n));
    }
    let mut seen = vec![false; n];
    for &s in permutation {
        if s == 0 || s > n || seen[s - 1] {
            return invalid(format!("{permutation:?} is not a permutation of 1..{n}"));
        }
        seen[s - 1] = true;
    }
    let kind = if antisymmetric { PowerKind::Exterior } else { PowerKind::Symmetric };
    let mut sign = 1;
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (permutation[i] - 1, permutation[j] - 1);
            if a > b {
                sign *= swap_sign(kind, degrees[a], degrees[b]);
            }
        }
    }
    Ok(sign)
}

/// Sort a tuple of basis indices, returning the sign of the sorting permutation,
/// or `None` when the product vanishes (repeated odd factor in the symmetric
/// power, repeated even factor in the exterior power).
pub fn normalize(kind: PowerKind, degrees: &[i64], tuple: &[usize]) -> Option<(Vec<usize>, i64)> {
    let mut t = tuple.to_vec();
    let mut sign = 1;
    for i in 1..t.len() {
        let mut j = i;
        while j > 0 && t[j - 1] > t[j] {
            sign *= swap_sign(kind, degrees[t[j - 1]], degrees[t[j]]);
            t.swap(j - 1, j);
            j -= 1;
        }
    }
    if repeats_vanish(kind, degrees, &t) {
        return None;
    }
    Some((t, sign))
}

fn repeats_vanish(kind: PowerKind, degrees: &[i64], sorted: &[usize]) -> bool {
    sorted.windows(2).any(|w| {
        w[0] == w[1]
            && match kind {
                PowerKind::Symmetric => odd(degrees[w[0]]),
                PowerKind::Exterior => !odd(degrees[w[0]]),
            }
    })
}

/// Canonical basis of `V^{⊙n}` or `V^{∧n}`.
#[derive(Clone, Debug)]
pub struct PowerBasis {
    kind: PowerKind,
    arity: usize,
    degrees: Vec<i64>,
    elements: Vec<Vec<usize>>,
    element_degrees: Vec<i64>,
    index: HashMap<Vec<usize>, usize>,
}

impl PowerBasis {
    pub fn new(space: &GradedVectorSpace, kind: PowerKind, arity: usize) -> Self {
        Self::from_degrees(space.degrees(), kind, arity)
    }

    pub fn from_degrees(degrees: &[i64], kind: PowerKind, arity: usize) -> Self {
        let mut elements = Vec::new();
        let mut current = Vec::with_capacity(arity);
        enumerate(degrees, kind, arity, 0, &mut current, &mut elements);
        let element_degrees = elements.iter().map(|t| t.iter().map(|&i| degrees[i]).sum()).collect();
        let index = elements.iter().enumerate().map(|(k, t)| (t.clone(), k)).collect();
        PowerBasis { kind, arity, degrees: degrees.to_vec(), elements, element_degrees, index }
    }

    pub fn kind(&self) -> PowerKind {
        self.kind
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Vec<usize>] {
        &self.elements
    }

    pub fn element(&self, k: usize) -> &[usize] {
        &self.elements[k]
    }

    /// Sum of the factor degrees.
    pub fn degree(&self, k: usize) -> i64 {
        self.element_degrees[k]
    }

    pub fn index_of(&self, canonical: &[usize]) -> Option<usize> {
        self.index.get(canonical).copied()
    }

    /// Canonical index and sign of an arbitrary tuple, `None` for a vanishing product.
    pub fn normalize(&self, tuple: &[usize]) -> Option<(usize, i64)> {
        let (t, s) = normalize(self.kind, &self.degrees, tuple)?;
        Some((self.index[&t], s))
    }
}

fn enumerate(
    degrees: &[i64],
    kind: PowerKind,
    arity: usize,
    start: usize,
    current: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if current.len() == arity {
        out.push(current.clone());
        return;
    }
    for i in start..degrees.len() {
        let repeat_ok = match kind {
            PowerKind::Symmetric => !odd(degrees[i]),
            PowerKind::Exterior => odd(degrees[i]),
        };
        if current.last() == Some(&i) && !repeat_ok {
            continue;
        }
        current.push(i);
        enumerate(degrees, kind, arity, i, current, out);
        current.pop();
    }
}

/// Ways of splitting positions `0..n` into a `k`-subset and its complement,
/// each with the Koszul sign of moving the subset to the front.
pub fn unshuffles(degrees: &[i64], kind: PowerKind, k: usize) -> Vec<(Vec<usize>, Vec<usize>, i64)> {
    let n = degrees.len();
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut subset: Vec<usize> = (0..k).collect();
    loop {
        let mut in_s = vec![false; n];
        for &i in &subset {
            in_s[i] = true;
        }
        let rest: Vec<usize> = (0..n).filter(|&i| !in_s[i]).collect();
        let mut sign = 1;
        for &j in &subset {
            for &i in &rest {
                if i < j {
                    sign *= swap_sign(kind, degrees[i], degrees[j]);
                }
            }
        }
        out.push((subset.clone(), rest, sign));
        // next subset in lexicographic order
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if subset[i] < n - k + i {
                subset[i] += 1;
                for j in i + 1..k {
                    subset[j] = subset[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Unordered partitions of `0..n` into nonempty blocks, blocks listed by their
/// least element, each with the Koszul sign of the block-order rearrangement.
pub fn set_partitions(degrees: &[i64]) -> Vec<(Vec<Vec<usize>>, i64)> {
    let n = degrees.len();
    let mut out = Vec::new();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    partitions_rec(0, n, &mut blocks, &mut out);
    out.into_iter()
        .map(|bs| {
            let order: Vec<usize> = bs.iter().flatten().copied().collect();
            let perm: Vec<usize> = order.iter().map(|&i| i + 1).collect();
            let s = koszul_sign(degrees, &perm, false).expect("valid permutation");
            (bs, s)
        })
        .collect()
}

fn partitions_rec(i: usize, n: usize, blocks: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
    if i == n {
        out.push(blocks.clone());
        return;
    }
    for b in 0..blocks.len() {
        blocks[b].push(i);
        partitions_rec(i + 1, n, blocks, out);
        blocks[b].pop();
    }
    blocks.push(vec![i]);
    partitions_rec(i + 1, n, blocks, out);
    blocks.pop();
}

/// An element of `S(V)`: canonical sorted tuples with coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SymTensor(BTreeMap<Vec<usize>, Rational>);

impl SymTensor {
    pub fn new() -> Self {
        SymTensor(BTreeMap::new())
    }

    pub fn unit(t: Vec<usize>) -> Self {
        let mut s = Self::new();
        s.0.insert(t, Rational::one());
        s
    }

    pub fn from_vector(v: &SparseVec) -> Self {
        SymTensor(v.iter().map(|(i, c)| (vec![i], c.clone())).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<usize>, &Rational)> {
        self.0.iter()
    }

    pub fn add_term(&mut self, t: Vec<usize>, c: &Rational) {
        if c.is_zero() {
            return;
        }
        let e = self.0.entry(t.clone()).or_default();
        *e += c;
        if e.is_zero() {
            self.0.remove(&t);
        }
    }

    /// Adds `c · (tuple)` after normalizing the tuple.
    pub fn add_tuple(&mut self, degrees: &[i64], tuple: &[usize], c: &Rational) {
        if let Some((t, s)) = normalize(PowerKind::Symmetric, degrees, tuple) {
            self.add_term(t, &(c * &Rational::from_int(s)));
        }
    }

    pub fn add_scaled(&mut self, c: &Rational, other: &SymTensor) {
        for (t, x) in other.iter() {
            self.add_term(t.clone(), &(c * x));
        }
    }

    /// Symmetric product `self ⊙ other`.
    pub fn product(&self, other: &SymTensor, degrees: &[i64]) -> SymTensor {
        let mut out = SymTensor::new();
        for (a, x) in self.iter() {
            for (b, y) in other.iter() {
                let mut t = a.clone();
                t.extend_from_slice(b);
                out.add_tuple(degrees, &t, &(x * y));
            }
        }
        out
    }

    /// Terms of the given arity only.
    pub fn component(&self, arity: usize) -> SymTensor {
        SymTensor(self.0.iter().filter(|(t, _)| t.len() == arity).map(|(t, c)| (t.clone(), c.clone())).collect())
    }

    /// Arity-one part as a vector.
    pub fn linear_part(&self) -> SparseVec {
        self.0.iter().filter(|(t, _)| t.len() == 1).map(|(t, c)| (t[0], c.clone())).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn koszul_examples() {
        assert_eq!(koszul_sign(&[1, 1], &[2, 1], false).unwrap(), -1);
        assert_eq!(koszul_sign(&[0, 5], &[1, 2], false).unwrap(), 1);
        assert_eq!(koszul_sign(&[1, 2, 1], &[2, 3, 1], false).unwrap(), -1);
        assert!(koszul_sign(&[1, 1], &[1, 1], false).is_err());
        assert!(koszul_sign(&[1], &[1, 2], false).is_err());
    }

    #[test]
    fn power_basis_examples() {
        let v = GradedVectorSpace::from_pairs(&[("v", 1)]).unwrap();
        assert!(PowerBasis::new(&v, PowerKind::Symmetric, 2).is_empty());
        let ab = GradedVectorSpace::from_pairs(&[("a", 0), ("b", 1)]).unwrap();
        let s2 = PowerBasis::new(&ab, PowerKind::Symmetric, 2);
        assert_eq!(s2.elements(), &[vec![0, 0], vec![0, 1]]);
        assert_eq!(s2.normalize(&[1, 0]), Some((1, 1)));
        let e2 = PowerBasis::new(&ab, PowerKind::Exterior, 2);
        assert_eq!(e2.elements(), &[vec![0, 1], vec![1, 1]]);
        assert_eq!(e2.normalize(&[1, 0]), Some((0, -1)));
        assert_eq!(e2.normalize(&[0, 0]), None);
    }

    #[test]
    fn unshuffle_counts_and_signs() {
        let u = unshuffles(&[1, 1, 1], PowerKind::Symmetric, 1);
        assert_eq!(u.len(), 3);
        assert_eq!(u.iter().map(|x| x.2).collect::<Vec<_>>(), vec![1, -1, 1]);
        assert_eq!(unshuffles(&[0, 0, 0, 0], PowerKind::Symmetric, 2).len(), 6);
        assert_eq!(set_partitions(&[0, 0, 0, 0]).len(), 15);
    }
}
