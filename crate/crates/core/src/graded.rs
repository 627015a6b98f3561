//! Finite-dimensional ℤ-graded vector spaces and homogeneous linear maps.

use std::collections::BTreeMap;
use std::ops::Range;

use crate::error::{invalid, Result};
use crate::linalg::{Matrix, SparseVec};
use crate::rational::Rational;

/// A graded vector space with a labelled basis.
///
/// The flat basis is ordered by degree, then by position inside its degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedVectorSpace {
    components: BTreeMap<i64, Vec<String>>,
    labels: Vec<String>,
    degrees: Vec<i64>,
    index: BTreeMap<String, usize>,
}

impl GradedVectorSpace {
    pub fn new(components: BTreeMap<i64, Vec<String>>) -> Result<Self> {
        let components: BTreeMap<i64, Vec<String>> =
            components.into_iter().filter(|(_, v)| !v.is_empty()).collect();
        let mut labels = Vec::new();
        let mut degrees = Vec::new();
        let mut index = BTreeMap::new();
        for (&deg, basis) in &components {
            for label in basis {
                if index.insert(label.clone(), labels.len()).is_some() {
                    return invalid(format!("duplicate basis label {label:?}"));
                }
                labels.push(label.clone());
                degrees.push(deg);
            }
        }
        Ok(GradedVectorSpace { components, labels, degrees, index })
    }

    /// Build from `(label, degree)` pairs; labels keep their relative order within a degree.
    pub fn from_pairs<S: AsRef<str>>(pairs: &[(S, i64)]) -> Result<Self> {
        let mut components: BTreeMap<i64, Vec<String>> = BTreeMap::new();
        for (l, d) in pairs {
            components.entry(*d).or_default().push(l.as_ref().to_string());
        }
        Self::new(components)
    }

    pub fn zero() -> Self {
        Self::new(BTreeMap::new()).expect("empty space")
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn components(&self) -> &BTreeMap<i64, Vec<String>> {
        &self.components
    }

    pub fn degree(&self, i: usize) -> i64 {
        self.degrees[i]
    }

    pub fn degrees(&self) -> &[i64] {
        &self.degrees
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn dim_in(&self, deg: i64) -> usize {
        self.components.get(&deg).map_or(0, Vec::len)
    }

    /// Flat indices of the basis vectors of degree `deg`.
    pub fn range_in(&self, deg: i64) -> Range<usize> {
        let start = self.degrees.partition_point(|&d| d < deg);
        let end = self.degrees.partition_point(|&d| d <= deg);
        start..end
    }

    /// Same labels with every degree moved by `shift`.
    pub fn shifted(&self, shift: i64) -> Self {
        let components = self.components.iter().map(|(&d, v)| (d + shift, v.clone())).collect();
        Self::new(components).expect("shift keeps labels unique")
    }

    /// Graded dimension as a degree → dimension table.
    pub fn graded_dims(&self) -> BTreeMap<i64, usize> {
        self.components.iter().map(|(&d, v)| (d, v.len())).collect()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.components.iter().map(|(&d, v)| if d.rem_euclid(2) == 0 { v.len() as i64 } else { -(v.len() as i64) }).sum()
    }

    /// Whether the vector is homogeneous, and its degree when nonzero.
    pub fn homogeneous_degree(&self, v: &SparseVec) -> Option<Option<i64>> {
        let mut deg = None;
        for (i, _) in v.iter() {
            match deg {
                None => deg = Some(self.degrees[i]),
                Some(d) if d != self.degrees[i] => return None,
                _ => {}
            }
        }
        Some(deg)
    }

    pub fn format_vector(&self, v: &SparseVec) -> String {
        if v.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (k, (i, c)) in v.iter().enumerate() {
            let neg = c.signum() < 0;
            let a = if neg { -c.clone() } else { c.clone() };
            match (k, neg) {
                (0, true) => out.push('-'),
                (0, false) => {}
                (_, true) => out.push_str(" - "),
                (_, false) => out.push_str(" + "),
            }
            if !a.is_one() {
                out.push_str(&format!("{a}*"));
            }
            out.push_str(&self.labels[i]);
        }
        out
    }
}

/// A linear map of fixed degree, stored as the image of every source basis vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedMap {
    degree: i64,
    target_dim: usize,
    images: Vec<SparseVec>,
}

impl GradedMap {
    pub fn new(degree: i64, target_dim: usize, images: Vec<SparseVec>) -> Result<Self> {
        for img in &images {
            if img.iter().any(|(i, _)| i >= target_dim) {
                return invalid("map image outside target space");
            }
        }
        Ok(GradedMap { degree, target_dim, images })
    }

    pub fn zero(source_dim: usize, target_dim: usize, degree: i64) -> Self {
        GradedMap { degree, target_dim, images: vec![SparseVec::new(); source_dim] }
    }

    pub fn identity(dim: usize) -> Self {
        GradedMap { degree: 0, target_dim: dim, images: (0..dim).map(SparseVec::unit).collect() }
    }

    pub fn from_matrix(degree: i64, m: &Matrix) -> Self {
        let images = m.columns().iter().map(|c| SparseVec::from_dense(c)).collect();
        GradedMap { degree, target_dim: m.rows(), images }
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    pub fn source_dim(&self) -> usize {
        self.images.len()
    }

    pub fn target_dim(&self) -> usize {
        self.target_dim
    }

    pub fn image(&self, i: usize) -> &SparseVec {
        &self.images[i]
    }

    pub fn images(&self) -> &[SparseVec] {
        &self.images
    }

    pub fn is_zero(&self) -> bool {
        self.images.iter().all(SparseVec::is_zero)
    }

    pub fn apply(&self, v: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        for (i, c) in v.iter() {
            out.add_scaled(c, &self.images[i]);
        }
        out
    }

    /// `self ∘ other`
    pub fn compose(&self, other: &GradedMap) -> GradedMap {
        let images = other.images.iter().map(|v| self.apply(v)).collect();
        GradedMap { degree: self.degree + other.degree, target_dim: self.target_dim, images }
    }

    pub fn add(&self, other: &GradedMap) -> GradedMap {
        let images = self.images.iter().zip(&other.images).map(|(a, b)| a.add(b)).collect();
        GradedMap { degree: self.degree, target_dim: self.target_dim, images }
    }

    pub fn scaled(&self, c: &Rational) -> GradedMap {
        GradedMap { degree: self.degree, target_dim: self.target_dim, images: self.images.iter().map(|v| v.scaled(c)).collect() }
    }

    pub fn to_matrix(&self) -> Matrix {
        let mut m = Matrix::zeros(self.target_dim, self.images.len());
        for (j, img) in self.images.iter().enumerate() {
            for (i, c) in img.iter() {
                m.set(i, j, c.clone());
            }
        }
        m
    }

    /// The block from `source` degree `k` to `target` degree `k + degree`.
    pub fn block(&self, source: &GradedVectorSpace, target: &GradedVectorSpace, k: i64) -> Matrix {
        let cols = source.range_in(k);
        let rows = target.range_in(k + self.degree);
        let mut m = Matrix::zeros(rows.len(), cols.len());
        for (b, j) in cols.enumerate() {
            for (i, c) in self.images[j].iter() {
                if rows.contains(&i) {
                    m.set(i - rows.start, b, c.clone());
                }
            }
        }
        m
    }

    /// First basis vector whose image is not of degree `deg(v) + degree`.
    pub fn homogeneity_violation(&self, source: &GradedVectorSpace, target: &GradedVectorSpace) -> Option<usize> {
        (0..self.images.len()).find(|&j| {
            let want = source.degree(j) + self.degree;
            self.images[j].iter().any(|(i, _)| target.degree(i) != want)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_basis_sorted_by_degree() {
        let v = GradedVectorSpace::from_pairs(&[("b", 1), ("a", 0), ("c", 1)]).unwrap();
        assert_eq!(v.labels(), &["a", "b", "c"]);
        assert_eq!(v.range_in(1), 1..3);
        assert_eq!(v.range_in(5), 3..3);
        assert_eq!(v.euler_characteristic(), -1);
        assert!(GradedVectorSpace::from_pairs(&[("a", 0), ("a", 1)]).is_err());
    }

    #[test]
    fn blocks_and_composition() {
        let v = GradedVectorSpace::from_pairs(&[("a", 0), ("b", 1)]).unwrap();
        let d = GradedMap::new(1, 2, vec![SparseVec::unit(1), SparseVec::new()]).unwrap();
        assert!(d.compose(&d).is_zero());
        assert_eq!(d.block(&v, &v, 0), Matrix::from_ints(&[&[1]]));
        assert_eq!(d.homogeneity_violation(&v, &v), None);
    }
}
