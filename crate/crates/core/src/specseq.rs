//! Spectral sequences of finite filtered cochain complexes.
//!
//! A [`FilteredComplex`] has a flat basis in which every vector sits in one
//! total degree `n` and one column `p`; `F^p` is spanned by the basis vectors
//! of column `≥ p`. Pages are computed in closed form,
//! `E_r^p = Z_r^p / (Z_{r-1}^{p+1} + D Z_{r-1}^{p-r+1})`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{consistency, invalid, Error, Result};
use crate::linalg::{quotient_basis, solve_linear, unit_vector, zero_vector, Matrix, Quotient, SparseVec, Subspace, Vector};
use crate::rational::Rational;

/// A finite cochain complex with a finite decreasing column filtration.
#[derive(Clone, Debug)]
pub struct FilteredComplex {
    cells: Vec<(i64, usize)>,
    differential: Vec<SparseVec>,
    length: usize,
    by_degree: BTreeMap<i64, Vec<usize>>,
    local: Vec<usize>,
    matrices: BTreeMap<i64, Matrix>,
}

impl FilteredComplex {
    /// `cells[j] = (n, p)` places basis vector `j`; `differential[j]` is `D e_j`.
    pub fn new(cells: Vec<(i64, usize)>, differential: Vec<SparseVec>, length: usize) -> Result<Self> {
        let dim = cells.len();
        if differential.len() != dim {
            return invalid("differential must give one image per basis vector");
        }
        if let Some(j) = cells.iter().position(|&(_, p)| p >= length) {
            return invalid(format!("basis vector {j} lies outside the filtration length {length}"));
        }
        for (j, img) in differential.iter().enumerate() {
            let (n, p) = cells[j];
            for (i, _) in img.iter() {
                if i >= dim {
                    return invalid("differential image outside the complex");
                }
                if cells[i].0 != n + 1 {
                    return invalid(format!("differential of basis vector {j} is not of degree +1"));
                }
                if cells[i].1 < p {
                    return invalid(format!("differential of basis vector {j} leaves F^{p}"));
                }
            }
        }
        let mut by_degree: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        for (j, &(n, _)) in cells.iter().enumerate() {
            by_degree.entry(n).or_default().push(j);
        }
        for v in by_degree.values_mut() {
            v.sort_by_key(|&j| (cells[j].1, j));
        }
        let mut local = vec![0; dim];
        for v in by_degree.values() {
            for (a, &j) in v.iter().enumerate() {
                local[j] = a;
            }
        }
        let mut fc = FilteredComplex { cells, differential, length, by_degree, local, matrices: BTreeMap::new() };
        let degrees: Vec<i64> = fc.by_degree.keys().copied().collect();
        for n in degrees {
            let m = fc.build_matrix(n);
            fc.matrices.insert(n, m);
        }
        for (&n, m) in &fc.matrices {
            if let Some(next) = fc.matrices.get(&(n + 1)) {
                if !next.mul(m).is_zero() {
                    return Err(Error::Axiom { axiom: "D^2 = 0".into(), witness: format!("total degree {n}") });
                }
            }
        }
        Ok(fc)
    }

    fn build_matrix(&self, n: i64) -> Matrix {
        let src = self.basis_in(n);
        let tgt = self.basis_in(n + 1);
        let mut m = Matrix::zeros(tgt.len(), src.len());
        for (b, &j) in src.iter().enumerate() {
            for (i, c) in self.differential[j].iter() {
                m.set(self.local[i], b, c.clone());
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.cells.len()
    }

    pub fn length(&self) -> usize {
        self.length
    }

    /// `(n, p)` of a flat basis vector.
    pub fn cell(&self, j: usize) -> (i64, usize) {
        self.cells[j]
    }

    pub fn cells(&self) -> &[(i64, usize)] {
        &self.cells
    }

    pub fn differential(&self) -> &[SparseVec] {
        &self.differential
    }

    pub fn degrees(&self) -> impl Iterator<Item = i64> + '_ {
        self.by_degree.keys().copied()
    }

    /// Flat indices of degree `n`, in local order (by column, then flat index).
    pub fn basis_in(&self, n: i64) -> &[usize] {
        self.by_degree.get(&n).map_or(&[], Vec::as_slice)
    }

    pub fn dim_in(&self, n: i64) -> usize {
        self.basis_in(n).len()
    }

    /// Matrix of `D` from degree `n` to `n + 1` in local coordinates.
    pub fn matrix(&self, n: i64) -> Matrix {
        match self.matrices.get(&n) {
            Some(m) => m.clone(),
            None => Matrix::zeros(self.dim_in(n + 1), 0),
        }
    }

    fn d_local(&self, n: i64, v: &[Rational]) -> Vector {
        match self.matrices.get(&n) {
            Some(m) => m.apply(v),
            None => zero_vector(self.dim_in(n + 1)),
        }
    }

    pub fn apply(&self, v: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        for (j, c) in v.iter() {
            out.add_scaled(c, &self.differential[j]);
        }
        out
    }

    /// Local coordinates of a flat vector supported in degree `n`.
    pub fn to_local(&self, n: i64, v: &SparseVec) -> Result<Vector> {
        let mut out = zero_vector(self.dim_in(n));
        for (j, c) in v.iter() {
            if j >= self.dim() || self.cells[j].0 != n {
                return invalid(format!("vector is not homogeneous of total degree {n}"));
            }
            out[self.local[j]] = c.clone();
        }
        Ok(out)
    }

    pub fn to_flat(&self, n: i64, v: &[Rational]) -> SparseVec {
        let basis = self.basis_in(n);
        SparseVec::from_terms(v.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(a, c)| (basis[a], c.clone())))
    }

    /// Lowest column in the support of a local vector.
    fn min_column(&self, n: i64, v: &[Rational]) -> Option<usize> {
        let basis = self.basis_in(n);
        v.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(a, _)| self.cells[basis[a]].1).min()
    }

    /// `Z^p_r` in degree `n`: vectors of `F^p` whose differential lies in `F^{p+r}`.
    pub fn z_space(&self, r: i64, p: i64, n: i64) -> Subspace {
        let dim = self.dim_in(n);
        if p >= self.length as i64 {
            return Subspace::zero(dim);
        }
        let p_eff = p.max(0) as usize;
        let thr = (p + r).clamp(p_eff as i64, self.length as i64) as usize;
        self.z_space_eff(p_eff, thr, n)
    }

    fn z_space_eff(&self, p: usize, thr: usize, n: i64) -> Subspace {
        let basis = self.basis_in(n);
        let dim = basis.len();
        let cols: Vec<usize> = (0..dim).filter(|&a| self.cells[basis[a]].1 >= p).collect();
        if cols.is_empty() {
            return Subspace::zero(dim);
        }
        let tbasis = self.basis_in(n + 1);
        let rows: Vec<usize> = (0..tbasis.len()).filter(|&a| self.cells[tbasis[a]].1 < thr).collect();
        let embed = |v: &[Rational]| -> Vector {
            let mut out = zero_vector(dim);
            for (k, &a) in cols.iter().enumerate() {
                out[a] = v[k].clone();
            }
            out
        };
        if rows.is_empty() {
            let vs: Vec<Vector> = cols.iter().map(|&a| unit_vector(dim, a)).collect();
            return Subspace::span(dim, &vs);
        }
        let sub = self.matrix(n).submatrix(&rows, &cols);
        let ker: Vec<Vector> = sub.kernel().iter().map(|v| embed(v)).collect();
        Subspace::span(dim, &ker)
    }

    /// `F^p` in degree `n`.
    pub fn filtration_space(&self, p: i64, n: i64) -> Subspace {
        self.z_space(0, p, n)
    }

    /// Dimension of the cohomology of the total complex by degree.
    pub fn cohomology_dims(&self) -> BTreeMap<i64, usize> {
        let mut out = BTreeMap::new();
        for n in self.degrees() {
            let ker = self.dim_in(n) - self.matrix(n).rank();
            let im = self.matrix(n - 1).rank();
            let h = ker - im;
            if h > 0 {
                out.insert(n, h);
            }
        }
        out
    }

    /// The quotient `FC / F^{l}` together with the projection.
    pub fn truncated(&self, l: usize) -> Result<(FilteredComplex, FilteredMap)> {
        let keep: Vec<usize> = (0..self.dim()).filter(|&j| self.cells[j].1 < l).collect();
        let mut new_index = vec![None; self.dim()];
        for (k, &j) in keep.iter().enumerate() {
            new_index[j] = Some(k);
        }
        let project = |v: &SparseVec| -> SparseVec {
            SparseVec::from_terms(v.iter().filter_map(|(j, c)| new_index[j].map(|k| (k, c.clone()))))
        };
        let cells = keep.iter().map(|&j| self.cells[j]).collect();
        let diff = keep.iter().map(|&j| project(&self.differential[j])).collect();
        let fc = FilteredComplex::new(cells, diff, l.min(self.length).max(1))?;
        let images = (0..self.dim()).map(|j| project(&SparseVec::unit(j))).collect();
        Ok((fc, FilteredMap { images, degree_shift: 0, column_shift: 0, sign: 1 }))
    }
}

/// A linear map between filtered complexes, homogeneous of bidegree shift
/// `(column_shift, degree_shift)` and satisfying `φ D = sign · D φ`.
#[derive(Clone, Debug)]
pub struct FilteredMap {
    pub images: Vec<SparseVec>,
    pub degree_shift: i64,
    pub column_shift: i64,
    pub sign: i64,
}

impl FilteredMap {
    pub fn apply(&self, v: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        for (j, c) in v.iter() {
            out.add_scaled(c, &self.images[j]);
        }
        out
    }

    /// Checks sizes, homogeneity, filtration compatibility and the commutation rule.
    pub fn check(&self, source: &FilteredComplex, target: &FilteredComplex) -> Result<()> {
        if self.images.len() != source.dim() {
            return invalid("filtered map has the wrong number of images");
        }
        for (j, img) in self.images.iter().enumerate() {
            let (n, p) = source.cell(j);
            for (i, _) in img.iter() {
                if i >= target.dim() {
                    return invalid("filtered map image outside the target");
                }
                let (m, q) = target.cell(i);
                if m != n + self.degree_shift || (q as i64) < p as i64 + self.column_shift {
                    return consistency(format!("filtered map misplaces basis vector {j}"));
                }
            }
            let lhs = self.apply(&source.differential[j]);
            let rhs = target.apply(img).scaled(&Rational::from_int(self.sign));
            if lhs != rhs {
                return consistency(format!("filtered map does not commute with D on basis vector {j}"));
            }
        }
        Ok(())
    }
}

/// One cell `E_r^{p,q}`.
#[derive(Clone, Debug)]
pub struct PageCell {
    pub p: i64,
    pub q: i64,
    quotient: Quotient,
}

impl PageCell {
    pub fn dim(&self) -> usize {
        self.quotient.dim()
    }

    pub fn degree(&self) -> i64 {
        self.p + self.q
    }

    /// Representatives in local coordinates of total degree `p + q`.
    pub fn representatives(&self) -> &[Vector] {
        self.quotient.representatives()
    }

    /// Coordinates of a local vector of `Z_r^{p,q}`.
    pub fn coordinates(&self, z: &[Rational]) -> Result<Vector> {
        Ok(self.quotient.coordinates(z)?)
    }
}

/// The page `E_r` with its differentials `d_r: E_r^{p,q} → E_r^{p+r,q-r+1}`.
#[derive(Clone, Debug)]
pub struct SpectralPage {
    pub r: usize,
    cells: BTreeMap<(i64, i64), PageCell>,
    differentials: BTreeMap<(i64, i64), Matrix>,
}

impl SpectralPage {
    pub fn cell(&self, p: i64, q: i64) -> Option<&PageCell> {
        self.cells.get(&(p, q))
    }

    pub fn cells(&self) -> impl Iterator<Item = &PageCell> {
        self.cells.values()
    }

    pub fn dim(&self, p: i64, q: i64) -> usize {
        self.cells.get(&(p, q)).map_or(0, PageCell::dim)
    }

    /// Nonzero dimensions keyed by `(p, q)`.
    pub fn dims(&self) -> BTreeMap<(i64, i64), usize> {
        self.cells.iter().filter(|(_, c)| c.dim() > 0).map(|(&k, c)| (k, c.dim())).collect()
    }

    /// `d_r` out of `(p, q)`; `None` means the target cell is zero.
    pub fn differential(&self, p: i64, q: i64) -> Option<&Matrix> {
        self.differentials.get(&(p, q))
    }

    pub fn differential_rank(&self, p: i64, q: i64) -> usize {
        self.differential(p, q).map_or(0, Matrix::rank)
    }

    pub fn differentials_vanish(&self) -> bool {
        self.differentials.values().all(Matrix::is_zero)
    }
}

/// Where degeneration first fails.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub r: usize,
    pub p: i64,
    pub q: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DegenerationReport {
    pub from_page: usize,
    pub cell: Option<(i64, i64)>,
    pub degenerate: bool,
    pub violation: Option<Violation>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AbutmentRow {
    pub p: i64,
    pub q: i64,
    pub e_infinity: usize,
    pub graded_cohomology: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AbutmentReport {
    pub rows: Vec<AbutmentRow>,
    pub cohomology: BTreeMap<i64, usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComparisonRow {
    pub r: usize,
    pub p: i64,
    pub q: i64,
    pub source_dim: usize,
    pub target_dim: usize,
    pub rank: usize,
    pub injective_required: bool,
    pub bijective_required: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComparisonReport {
    pub columns: usize,
    pub rows: Vec<ComparisonRow>,
}

/// All pages `E_0, …, E_{r_max}` of a filtered complex.
#[derive(Clone, Debug)]
pub struct SpectralSequence {
    complex: FilteredComplex,
    pages: Vec<SpectralPage>,
}

impl SpectralSequence {
    /// Pages up to `length + 1`, beyond which every differential vanishes.
    pub fn new(fc: &FilteredComplex) -> Result<Self> {
        Self::compute(fc, fc.length() + 1)
    }

    pub fn compute(fc: &FilteredComplex, r_max: usize) -> Result<Self> {
        let mut zcache: BTreeMap<(usize, usize, i64), Subspace> = BTreeMap::new();
        let mut z = |r: i64, p: i64, n: i64| -> Subspace {
            let dim = fc.dim_in(n);
            if p >= fc.length as i64 {
                return Subspace::zero(dim);
            }
            let p_eff = p.max(0) as usize;
            let thr = (p + r).clamp(p_eff as i64, fc.length as i64) as usize;
            zcache.entry((p_eff, thr, n)).or_insert_with(|| fc.z_space_eff(p_eff, thr, n)).clone()
        };
        let mut positions: Vec<(i64, i64)> = fc.cells.iter().map(|&(n, p)| (p as i64, n)).collect();
        positions.sort_unstable();
        positions.dedup();
        let mut pages = Vec::with_capacity(r_max + 1);
        for r in 0..=r_max {
            let ri = r as i64;
            let mut cells = BTreeMap::new();
            for &(p, n) in &positions {
                let zs = z(ri, p, n);
                let mut b = z(ri - 1, p + 1, n);
                let src = z(ri - 1, p - ri + 1, n - 1);
                if src.dim() > 0 {
                    let imgs: Vec<Vector> = src.basis().iter().map(|v| fc.d_local(n - 1, v)).collect();
                    b = b.sum(&Subspace::span(fc.dim_in(n), &imgs));
                }
                let quotient = quotient_basis(&zs, &b)?;
                cells.insert((p, n - p), PageCell { p, q: n - p, quotient });
            }
            let mut differentials = BTreeMap::new();
            for (&(p, q), cell) in &cells {
                let Some(target) = cells.get(&(p + ri, q - ri + 1)) else { continue };
                let n = p + q;
                let mut m = Matrix::zeros(target.dim(), cell.dim());
                for (j, rep) in cell.representatives().iter().enumerate() {
                    let dz = fc.d_local(n, rep);
                    let c = target.coordinates(&dz).map_err(|_| {
                        Error::Consistency(format!("d_{r} of a representative at ({p}, {q}) leaves Z_{r}"))
                    })?;
                    for (i, x) in c.into_iter().enumerate() {
                        m.set(i, j, x);
                    }
                }
                differentials.insert((p, q), m);
            }
            pages.push(SpectralPage { r, cells, differentials });
        }
        Ok(SpectralSequence { complex: fc.clone(), pages })
    }

    pub fn complex(&self) -> &FilteredComplex {
        &self.complex
    }

    pub fn r_max(&self) -> usize {
        self.pages.len() - 1
    }

    pub fn page(&self, r: usize) -> &SpectralPage {
        &self.pages[r.min(self.pages.len() - 1)]
    }

    pub fn pages(&self) -> &[SpectralPage] {
        &self.pages
    }

    /// `E_∞`, the last computed page.
    pub fn limit(&self) -> &SpectralPage {
        self.pages.last().expect("at least one page")
    }

    /// Checks `d_r d_r = 0` and `dim E_{r+1} = dim ker d_r − rank(incoming d_r)` on every cell.
    pub fn check_invariants(&self) -> Result<()> {
        for w in self.pages.windows(2) {
            let (page, next) = (&w[0], &w[1]);
            let r = page.r as i64;
            for (&(p, q), m) in &page.differentials {
                if let Some(m2) = page.differential(p + r, q - r + 1) {
                    if !m2.mul(m).is_zero() {
                        return consistency(format!("d_{r} d_{r} != 0 at ({p}, {q})"));
                    }
                }
            }
            for (&(p, q), cell) in &page.cells {
                let ker = cell.dim() - page.differential_rank(p, q);
                let inc = page.differential_rank(p - r, q + r - 1);
                if next.dim(p, q) != ker - inc {
                    return consistency(format!("page recursion fails at r = {r}, ({p}, {q})"));
                }
            }
        }
        Ok(())
    }

    /// Whether `d_r` vanishes for `k ≤ r ≤ r_max`, everywhere or out of one cell.
    pub fn degenerates_at(&self, k: usize, cell: Option<(i64, i64)>) -> DegenerationReport {
        let mut violation = None;
        'pages: for page in self.pages.iter().skip(k) {
            for (&(p, q), m) in &page.differentials {
                if cell.is_some_and(|c| c != (p, q)) {
                    continue;
                }
                if !m.is_zero() {
                    violation = Some(Violation { r: page.r, p, q });
                    break 'pages;
                }
            }
        }
        DegenerationReport { from_page: k, cell, degenerate: violation.is_none(), violation }
    }

    /// Coordinates in `E_r^{p,q}` of a flat vector, which must lie in `Z_r^{p,q}`.
    pub fn class_of(&self, r: usize, p: i64, q: i64, z: &SparseVec) -> Result<Vector> {
        let n = p + q;
        let local = self.complex.to_local(n, z)?;
        let Some(cell) = self.page(r).cell(p, q) else {
            return if local.iter().all(Rational::is_zero) { Ok(Vec::new()) } else { invalid(format!("no cell ({p}, {q})")) };
        };
        cell.coordinates(&local).map_err(|_| Error::Precondition(format!("vector is not in Z_{r} at ({p}, {q})")))
    }

    /// Coordinates of `d_r[z]` in `E_r^{p+r, q-r+1}`.
    pub fn differential_of(&self, r: usize, p: i64, q: i64, z: &SparseVec) -> Result<Vector> {
        self.class_of(r, p, q, z)?;
        let ri = r as i64;
        let dz = self.complex.apply(z);
        match self.page(r).cell(p + ri, q - ri + 1) {
            None => Ok(Vec::new()),
            Some(_) => self.class_of(r, p + ri, q - ri + 1, &dz),
        }
    }

    /// Given `z ∈ Z_r^{p,q}` with `d_r[z] = 0`, returns `z' ∈ Z_{r+1}^{p,q}` with `[z'] = [z]` in `E_{r+1}`.
    pub fn lift_to_next(&self, r: usize, p: i64, q: i64, z: &SparseVec) -> Result<SparseVec> {
        let fc = &self.complex;
        let n = p + q;
        let ri = r as i64;
        let local = fc.to_local(n, z)?;
        if !fc.z_space(ri, p, n).contains(&local) {
            return Err(Error::Precondition(format!("vector is not in Z_{r} at ({p}, {q})")));
        }
        let thr = p + ri + 1;
        let dz = fc.d_local(n, &local);
        let tbasis = fc.basis_in(n + 1);
        let rows: Vec<usize> = (0..tbasis.len()).filter(|&a| (fc.cells[tbasis[a]].1 as i64) < thr).collect();
        if rows.iter().all(|&a| dz[a].is_zero()) {
            return Ok(z.clone());
        }
        let b = fc.z_space(ri - 1, p + 1, n);
        let cols: Vec<Vector> = b.basis().iter().map(|v| {
            let d = fc.d_local(n, v);
            rows.iter().map(|&a| d[a].clone()).collect()
        }).collect();
        let rhs: Vector = rows.iter().map(|&a| dz[a].clone()).collect();
        let sol = solve_linear(&Matrix::from_columns(rows.len(), &cols), &rhs)?
            .ok_or_else(|| Error::Precondition(format!("d_{r} of the class at ({p}, {q}) does not vanish")))?;
        let mut out = local;
        for (c, v) in sol.iter().zip(b.basis()) {
            crate::linalg::axpy(&mut out, &-c, v);
        }
        Ok(fc.to_flat(n, &out))
    }

    /// Compares `E_∞` with the graded pieces of the filtration on total cohomology.
    pub fn abutment_check(&self) -> Result<AbutmentReport> {
        let fc = &self.complex;
        let limit = self.limit();
        let mut rows = Vec::new();
        for n in fc.degrees() {
            let dim = fc.dim_in(n);
            let im = Subspace::span(dim, &fc.matrix(n - 1).image());
            let ker_f = |p: i64| -> usize {
                let z = fc.z_space(fc.length() as i64 + 1, p, n);
                z.sum(&im).dim()
            };
            for p in 0..fc.length() as i64 {
                let gr = ker_f(p) - ker_f(p + 1);
                let e = limit.dim(p, n - p);
                if gr != 0 || e != 0 {
                    rows.push(AbutmentRow { p, q: n - p, e_infinity: e, graded_cohomology: gr });
                }
                if gr != e {
                    return consistency(format!("E_inf^({p}, {}) has dimension {e} but gr H has {gr}", n - p));
                }
            }
        }
        Ok(AbutmentReport { rows, cohomology: fc.cohomology_dims() })
    }

    /// Compares pages with those of `FC / F^{l}`: injective for `p < l`,
    /// bijective for `p + r ≤ l`.
    pub fn quotient_compare(&self, l: usize) -> Result<ComparisonReport> {
        let (small, proj) = self.complex.truncated(l)?;
        let other = SpectralSequence::compute(&small, self.r_max())?;
        let mut rows = Vec::new();
        for r in 0..=self.r_max() {
            let maps = page_map(self, &other, &proj, r)?;
            for (&(p, q), m) in &maps {
                if p >= l as i64 {
                    continue;
                }
                let (sd, td) = (m.cols(), m.rows());
                let rank = m.rank();
                let bij = p + r as i64 <= l as i64;
                if rank != sd {
                    return consistency(format!("comparison map at r = {r}, ({p}, {q}) is not injective"));
                }
                if bij && rank != td {
                    return consistency(format!("comparison map at r = {r}, ({p}, {q}) is not surjective"));
                }
                rows.push(ComparisonRow {
                    r,
                    p,
                    q,
                    source_dim: sd,
                    target_dim: td,
                    rank,
                    injective_required: true,
                    bijective_required: bij,
                });
            }
        }
        Ok(ComparisonReport { columns: l, rows })
    }
}

/// The map `E_r(source) → E_r(target)` induced by a filtered map, per source cell.
pub fn page_map(
    source: &SpectralSequence,
    target: &SpectralSequence,
    map: &FilteredMap,
    r: usize,
) -> Result<BTreeMap<(i64, i64), Matrix>> {
    map.check(source.complex(), target.complex())?;
    let (sfc, tfc) = (source.complex(), target.complex());
    let mut out = BTreeMap::new();
    for cell in source.page(r).cells() {
        let (p, q) = (cell.p, cell.q);
        let n = p + q;
        let (tp, tn) = (p + map.column_shift, n + map.degree_shift);
        let tcell = target.page(r).cell(tp, tn - tp);
        let tdim = tcell.map_or(0, PageCell::dim);
        let mut m = Matrix::zeros(tdim, cell.dim());
        for (j, rep) in cell.representatives().iter().enumerate() {
            let img = map.apply(&sfc.to_flat(n, rep));
            let local = tfc.to_local(tn, &img)?;
            match tcell {
                Some(tc) => {
                    let c = tc.coordinates(&local).map_err(|_| {
                        Error::Consistency(format!("induced map sends Z_{r} at ({p}, {q}) outside Z_{r}"))
                    })?;
                    for (i, x) in c.into_iter().enumerate() {
                        m.set(i, j, x);
                    }
                }
                None => {
                    // no target cell: the image must at least stay in the filtration
                    if let Some(c) = tfc.min_column(tn, &local) {
                        if (c as i64) < tp {
                            return consistency("induced map leaves the filtration");
                        }
                    }
                }
            }
        }
        out.insert((p, q), m);
    }
    Ok(out)
}

/// Checks that induced page maps commute with `d_r`, up to the map's sign.
pub fn page_map_commutes(source: &SpectralSequence, target: &SpectralSequence, map: &FilteredMap, r: usize) -> Result<bool> {
    let maps = page_map(source, target, map, r)?;
    let ri = r as i64;
    let (sp, tp) = (source.page(r), target.page(r));
    for (&(p, q), m) in &maps {
        let tgt = (p + map.column_shift, q + map.degree_shift - map.column_shift);
        let lhs = match (tp.differential(tgt.0, tgt.1), m.rows()) {
            (Some(d), _) => Some(d.mul(m)),
            (None, _) => None,
        };
        let rhs = match (sp.differential(p, q), maps.get(&(p + ri, q - ri + 1))) {
            (Some(d), Some(m2)) => Some(m2.mul(d).scale(&Rational::from_int(map.sign))),
            _ => None,
        };
        let zero = |x: &Option<Matrix>| x.as_ref().is_none_or(Matrix::is_zero);
        match (&lhs, &rhs) {
            (Some(a), Some(b)) if a.rows() == b.rows() && a.cols() == b.cols() => {
                if a != b {
                    return Ok(false);
                }
            }
            _ => {
                if !zero(&lhs) || !zero(&rhs) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}
