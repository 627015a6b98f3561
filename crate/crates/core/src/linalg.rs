//! Dense exact linear algebra over ℚ.
//!
//! All elimination uses one pivot rule: leftmost nonzero column, topmost
//! nonzero entry below the current row, full reduction. Every basis,
//! complement and particular solution produced here depends only on the input
//! entries and their order.

use std::collections::BTreeMap;
use std::fmt;

use crate::rational::Rational;

pub type Vector = Vec<Rational>;

pub fn zero_vector(n: usize) -> Vector {
    vec![Rational::zero(); n]
}

pub fn unit_vector(n: usize, i: usize) -> Vector {
    let mut v = zero_vector(n);
    v[i] = Rational::one();
    v
}

pub fn is_zero_vector(v: &[Rational]) -> bool {
    v.iter().all(Rational::is_zero)
}

/// `acc += c * v`
pub fn axpy(acc: &mut [Rational], c: &Rational, v: &[Rational]) {
    if c.is_zero() {
        return;
    }
    for (a, x) in acc.iter_mut().zip(v) {
        if !x.is_zero() {
            *a += c * x;
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("vector is not in the subspace")]
    NotInSubspace,
}

#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    pub fn from_rows(rows: &[Vector]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged rows");
            for (j, x) in r.iter().enumerate() {
                m.data[i * cols + j] = x.clone();
            }
        }
        m
    }

    /// Matrix whose columns are the given vectors, each of length `rows`.
    pub fn from_columns(rows: usize, columns: &[Vector]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            assert_eq!(c.len(), rows, "column length");
            for (i, x) in c.iter().enumerate() {
                m.data[i * columns.len() + j] = x.clone();
            }
        }
        m
    }

    pub fn from_ints(rows: &[&[i64]]) -> Self {
        let rs: Vec<Vector> = rows.iter().map(|r| r.iter().map(|&x| Rational::from_int(x)).collect()).collect();
        if rs.is_empty() {
            return Self::zeros(0, 0);
        }
        Self::from_rows(&rs)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: Rational) {
        self.data[i * self.cols + j] = x;
    }

    pub fn add_to(&mut self, i: usize, j: usize, x: &Rational) {
        let e = &mut self.data[i * self.cols + j];
        *e += x;
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vector {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vector> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn row_vectors(&self) -> Vec<Vector> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Rational::is_zero)
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matrix product dimensions");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.add_to(i, j, &(a * b));
                    }
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[Rational]) -> Vector {
        assert_eq!(self.cols, v.len(), "matrix-vector dimensions");
        let mut out = zero_vector(self.rows);
        for (j, x) in v.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (i, o) in out.iter_mut().enumerate() {
                let a = self.get(i, j);
                if !a.is_zero() {
                    *o += a * x;
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, c: &Rational) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * c).collect() }
    }

    pub fn neg(&self) -> Matrix {
        self.scale(&Rational::from_int(-1))
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Matrix {
        let mut m = Matrix::zeros(rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                m.set(a, b, self.get(i, j).clone());
            }
        }
        m
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let pivots = m.rref_in_place();
        (m, pivots)
    }

    fn rref_in_place(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self.get(i, c).is_zero()) else {
                continue;
            };
            if p != r {
                for j in 0..self.cols {
                    self.data.swap(p * self.cols + j, r * self.cols + j);
                }
            }
            let inv = self.get(r, c).recip();
            if !inv.is_one() {
                for j in c..self.cols {
                    let x = self.get(r, j) * &inv;
                    self.set(r, j, x);
                }
            }
            let pivot_row: Vector = self.row(r).to_vec();
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let f = self.get(i, c).clone();
                if f.is_zero() {
                    continue;
                }
                for j in c..self.cols {
                    if !pivot_row[j].is_zero() {
                        let x = self.get(i, j) - &(&f * &pivot_row[j]);
                        self.set(i, j, x);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the null space, one vector per free column, in column order.
    pub fn kernel(&self) -> Vec<Vector> {
        let (r, pivots) = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|&j| !is_pivot[j]) {
            let mut v = zero_vector(self.cols);
            v[free] = Rational::one();
            for (row, &p) in pivots.iter().enumerate() {
                let x = r.get(row, free);
                if !x.is_zero() {
                    v[p] = -x;
                }
            }
            basis.push(v);
        }
        basis
    }

    /// Independent columns of the matrix (the pivot columns of its echelon form).
    pub fn image(&self) -> Vec<Vector> {
        let (_, pivots) = self.rref();
        pivots.iter().map(|&j| self.column(j)).collect()
    }

    pub fn inverse(&self) -> Option<Matrix> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut aug = Matrix::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, n + i, Rational::one());
        }
        let pivots = aug.rref_in_place();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        let mut inv = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv.set(i, j, aug.get(i, n + j).clone());
            }
        }
        Some(inv)
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let r: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "  [{}]", r.join(", "))?;
        }
        write!(f, "]")
    }
}

/// Some `x` with `Ax = b`, free variables set to zero; `None` when inconsistent.
pub fn solve_linear(a: &Matrix, b: &[Rational]) -> Result<Option<Vector>, LinalgError> {
    if a.rows() != b.len() {
        return Err(LinalgError::Dimension(format!("{} rows but right side of length {}", a.rows(), b.len())));
    }
    let n = a.cols();
    let mut aug = Matrix::zeros(a.rows(), n + 1);
    for i in 0..a.rows() {
        for j in 0..n {
            aug.set(i, j, a.get(i, j).clone());
        }
        aug.set(i, n, b[i].clone());
    }
    let pivots = aug.rref_in_place();
    if pivots.last() == Some(&n) {
        return Ok(None);
    }
    let mut x = zero_vector(n);
    for (row, &p) in pivots.iter().enumerate() {
        x[p] = aug.get(row, n).clone();
    }
    Ok(Some(x))
}

/// Reduced echelon basis of a subspace: rows normalized to 1 at their pivot
/// and zero at every other pivot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Echelon {
    ambient: usize,
    rows: Vec<Vector>,
    pivots: Vec<usize>,
}

impl Echelon {
    pub fn new(ambient: usize, spanning: &[Vector]) -> Self {
        if spanning.is_empty() {
            return Echelon { ambient, rows: Vec::new(), pivots: Vec::new() };
        }
        let (r, pivots) = Matrix::from_rows(spanning).rref();
        let rows = (0..pivots.len()).map(|i| r.row(i).to_vec()).collect();
        Echelon { ambient, rows, pivots }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vector] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Coefficients against the echelon rows and the remainder.
    pub fn reduce(&self, v: &[Rational]) -> (Vector, Vector) {
        let mut rem = v.to_vec();
        let mut coeffs = zero_vector(self.rows.len());
        for (k, (row, &p)) in self.rows.iter().zip(&self.pivots).enumerate() {
            let c = rem[p].clone();
            if c.is_zero() {
                continue;
            }
            axpy(&mut rem, &-&c, row);
            coeffs[k] = c;
        }
        (coeffs, rem)
    }

    pub fn contains(&self, v: &[Rational]) -> bool {
        is_zero_vector(&self.reduce(v).1)
    }
}

/// A linear subspace of ℚ^n with its cached echelon form.
#[derive(Clone, Debug)]
pub struct Subspace {
    echelon: Echelon,
}

impl Subspace {
    pub fn span(ambient: usize, vectors: &[Vector]) -> Self {
        for v in vectors {
            assert_eq!(v.len(), ambient, "vector outside ambient space");
        }
        Subspace { echelon: Echelon::new(ambient, vectors) }
    }

    pub fn zero(ambient: usize) -> Self {
        Self::span(ambient, &[])
    }

    pub fn full(ambient: usize) -> Self {
        let basis: Vec<Vector> = (0..ambient).map(|i| unit_vector(ambient, i)).collect();
        Self::span(ambient, &basis)
    }

    pub fn ambient(&self) -> usize {
        self.echelon.ambient
    }

    pub fn dim(&self) -> usize {
        self.echelon.rank()
    }

    pub fn basis(&self) -> &[Vector] {
        self.echelon.rows()
    }

    pub fn contains(&self, v: &[Rational]) -> bool {
        self.echelon.contains(v)
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        assert_eq!(self.ambient(), other.ambient());
        let mut all = self.basis().to_vec();
        all.extend_from_slice(other.basis());
        Subspace::span(self.ambient(), &all)
    }

    pub fn intersection(&self, other: &Subspace) -> Subspace {
        let n = self.ambient();
        assert_eq!(n, other.ambient());
        if self.dim() == 0 || other.dim() == 0 {
            return Subspace::zero(n);
        }
        // a·A = b·B  <=>  (a, -b) in kernel of [A; B]^T
        let mut cols = self.basis().to_vec();
        cols.extend(other.basis().iter().map(|v| v.iter().map(|x| -x).collect()));
        let m = Matrix::from_columns(n, &cols);
        let ker = m.kernel();
        let vecs: Vec<Vector> = ker
            .iter()
            .map(|k| {
                let mut v = zero_vector(n);
                for (c, b) in k.iter().zip(self.basis()) {
                    axpy(&mut v, c, b);
                }
                v
            })
            .collect();
        Subspace::span(n, &vecs)
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.basis().iter().all(|v| other.contains(v))
    }
}

/// A quotient `Z / (Z ∩ B)` with chosen representatives.
#[derive(Clone, Debug)]
pub struct Quotient {
    ambient: Subspace,
    killed: Echelon,
    representatives: Vec<Vector>,
    // echelon of the representatives reduced modulo `killed`, with the change of basis
    rep_echelon: Echelon,
    rep_transform: Vec<Vector>,
}

impl Quotient {
    pub fn dim(&self) -> usize {
        self.representatives.len()
    }

    pub fn representatives(&self) -> &[Vector] {
        &self.representatives
    }

    /// Coordinates of `z ∈ Z` against the representatives.
    pub fn coordinates(&self, z: &[Rational]) -> Result<Vector, LinalgError> {
        if z.len() != self.ambient.ambient() {
            return Err(LinalgError::Dimension("coordinate map input".into()));
        }
        if !self.ambient.contains(z) {
            return Err(LinalgError::NotInSubspace);
        }
        let (_, rem) = self.killed.reduce(z);
        let (a, rem2) = self.rep_echelon.reduce(&rem);
        debug_assert!(is_zero_vector(&rem2));
        let k = self.representatives.len();
        let mut c = zero_vector(k);
        for (aj, tj) in a.iter().zip(&self.rep_transform) {
            axpy(&mut c, aj, tj);
        }
        Ok(c)
    }

    /// Whether `z ∈ Z` lies in `Z ∩ B`.
    pub fn is_trivial(&self, z: &[Rational]) -> Result<bool, LinalgError> {
        Ok(is_zero_vector(&self.coordinates(z)?))
    }

    pub fn lift(&self, coords: &[Rational]) -> Vector {
        let mut v = zero_vector(self.ambient.ambient());
        for (c, r) in coords.iter().zip(&self.representatives) {
            axpy(&mut v, c, r);
        }
        v
    }
}

/// Basis of `Z/(Z∩B)`: representatives are taken greedily from the echelon
/// basis of `Z`, skipping vectors already in the span of `Z∩B` and earlier picks.
pub fn quotient_basis(z: &Subspace, b: &Subspace) -> Result<Quotient, LinalgError> {
    if z.ambient() != b.ambient() {
        return Err(LinalgError::Dimension("quotient of subspaces of different ambient spaces".into()));
    }
    let n = z.ambient();
    let inter = if b.is_subspace_of(z) { b.clone() } else { z.intersection(b) };
    let killed = Echelon::new(n, inter.basis());
    let mut span_rows = inter.basis().to_vec();
    let mut span = killed.clone();
    let mut reps = Vec::new();
    for v in z.basis() {
        if !span.contains(v) {
            reps.push(v.clone());
            span_rows.push(v.clone());
            span = Echelon::new(n, &span_rows);
        }
    }
    let reduced: Vec<Vector> = reps.iter().map(|r| killed.reduce(r).1).collect();
    let k = reps.len();
    let (rep_echelon, rep_transform) = echelon_with_transform(n, &reduced);
    debug_assert_eq!(rep_echelon.rank(), k);
    Ok(Quotient { ambient: z.clone(), killed, representatives: reps, rep_echelon, rep_transform })
}

/// Echelon form of independent rows together with the matrix expressing each
/// echelon row in terms of the inputs.
fn echelon_with_transform(n: usize, rows: &[Vector]) -> (Echelon, Vec<Vector>) {
    let k = rows.len();
    if k == 0 {
        return (Echelon::new(n, &[]), Vec::new());
    }
    let aug: Vec<Vector> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut v = r.clone();
            v.extend(unit_vector(k, i));
            v
        })
        .collect();
    let (m, pivots) = Matrix::from_rows(&aug).rref();
    let mut erows = Vec::new();
    let mut epiv = Vec::new();
    let mut transform = Vec::new();
    for (i, &p) in pivots.iter().enumerate() {
        if p >= n {
            break;
        }
        let row = m.row(i);
        erows.push(row[..n].to_vec());
        epiv.push(p);
        transform.push(row[n..].to_vec());
    }
    (Echelon { ambient: n, rows: erows, pivots: epiv }, transform)
}

/// Sparse vector over a flat basis: index → nonzero coefficient.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SparseVec(BTreeMap<usize, Rational>);

impl SparseVec {
    pub fn new() -> Self {
        SparseVec(BTreeMap::new())
    }

    pub fn unit(i: usize) -> Self {
        let mut v = Self::new();
        v.0.insert(i, Rational::one());
        v
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (usize, Rational)>) -> Self {
        let mut v = Self::new();
        for (i, c) in terms {
            v.add_term(i, &c);
        }
        v
    }

    pub fn from_dense(v: &[Rational]) -> Self {
        SparseVec(v.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, x)| (i, x.clone())).collect())
    }

    pub fn to_dense(&self, n: usize) -> Vector {
        let mut v = zero_vector(n);
        for (&i, c) in &self.0 {
            v[i] = c.clone();
        }
        v
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> Rational {
        self.0.get(&i).cloned().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Rational)> {
        self.0.iter().map(|(&i, c)| (i, c))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add_term(&mut self, i: usize, c: &Rational) {
        if c.is_zero() {
            return;
        }
        let e = self.0.entry(i).or_default();
        *e += c;
        if e.is_zero() {
            self.0.remove(&i);
        }
    }

    pub fn add_scaled(&mut self, c: &Rational, other: &SparseVec) {
        if c.is_zero() {
            return;
        }
        for (i, x) in other.iter() {
            self.add_term(i, &(c * x));
        }
    }

    pub fn scaled(&self, c: &Rational) -> SparseVec {
        if c.is_zero() {
            return SparseVec::new();
        }
        SparseVec(self.0.iter().map(|(&i, x)| (i, x * c)).collect())
    }

    pub fn sub(&self, other: &SparseVec) -> SparseVec {
        let mut v = self.clone();
        v.add_scaled(&Rational::from_int(-1), other);
        v
    }

    pub fn add(&self, other: &SparseVec) -> SparseVec {
        let mut v = self.clone();
        v.add_scaled(&Rational::one(), other);
        v
    }
}

impl fmt::Debug for SparseVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.0.iter()).finish()
    }
}

impl FromIterator<(usize, Rational)> for SparseVec {
    fn from_iter<I: IntoIterator<Item = (usize, Rational)>>(iter: I) -> Self {
        Self::from_terms(iter)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Rational {
        Rational::from_int(n)
    }

    fn v(xs: &[i64]) -> Vector {
        xs.iter().map(|&x| q(x)).collect()
    }

    #[test]
    fn solve_identity_system() {
        let a = Matrix::identity(2);
        assert_eq!(solve_linear(&a, &v(&[1, 2])).unwrap(), Some(v(&[1, 2])));
    }

    #[test]
    fn solve_inconsistent() {
        let a = Matrix::zeros(2, 2);
        assert_eq!(solve_linear(&a, &v(&[1, 0])).unwrap(), None);
    }

    #[test]
    fn solve_rank_deficient_picks_pivot_solution() {
        let a = Matrix::from_ints(&[&[2, 4], &[1, 2]]);
        let x = solve_linear(&a, &v(&[2, 1])).unwrap().unwrap();
        assert_eq!(x, v(&[1, 0]));
        assert_eq!(a.apply(&x), v(&[2, 1]));
    }

    #[test]
    fn solve_dimension_mismatch() {
        let a = Matrix::identity(2);
        assert!(solve_linear(&a, &v(&[1])).is_err());
    }

    #[test]
    fn quotient_examples() {
        let e = |i| unit_vector(3, i);
        let z = Subspace::span(3, &[e(0), e(1)]);
        let b = Subspace::span(3, &[e(1)]);
        let qt = quotient_basis(&z, &b).unwrap();
        assert_eq!(qt.dim(), 1);
        assert_eq!(qt.representatives()[0], e(0));
        assert_eq!(qt.coordinates(&v(&[3, 7, 0])).unwrap(), v(&[3]));
        assert_eq!(qt.coordinates(&e(2)), Err(LinalgError::NotInSubspace));

        let same = quotient_basis(&z, &z).unwrap();
        assert_eq!(same.dim(), 0);

        let z = Subspace::span(3, &[v(&[1, 1, 0]), v(&[0, 1, 1])]);
        let b = Subspace::span(3, &[v(&[1, 0, -1])]);
        let qt = quotient_basis(&z, &b).unwrap();
        assert_eq!(qt.dim(), 1);
        let c1 = qt.coordinates(&v(&[1, 1, 0])).unwrap();
        let c2 = qt.coordinates(&v(&[0, 1, 1])).unwrap();
        assert_eq!(c1, c2);
    }

    #[test]
    fn kernel_and_inverse() {
        let a = Matrix::from_ints(&[&[1, 2, 3], &[2, 4, 6]]);
        let k = a.kernel();
        assert_eq!(k.len(), 2);
        for x in &k {
            assert!(is_zero_vector(&a.apply(x)));
        }
        let m = Matrix::from_ints(&[&[2, 1], &[1, 1]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), Matrix::identity(2));
        assert!(Matrix::from_ints(&[&[1, 2], &[2, 4]]).inverse().is_none());
    }

    #[test]
    fn intersection_dimension() {
        let a = Subspace::span(3, &[v(&[1, 0, 0]), v(&[0, 1, 0])]);
        let b = Subspace::span(3, &[v(&[0, 1, 0]), v(&[0, 0, 1])]);
        let i = a.intersection(&b);
        assert_eq!(i.dim(), 1);
        assert!(i.contains(&v(&[0, 5, 0])));
    }
}
