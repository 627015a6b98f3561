//! Oracles and generators shared by the integration tests.
//!
//! The oracles deliberately avoid the library's linear algebra, sign and
//! power-basis code: they work on dense `BigRational` arrays and recompute
//! signs from inversion counts.

#![allow(dead_code)]

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use ce_formality::dgla::DgLieAlgebra;
use ce_formality::linalg::SparseVec;
use ce_formality::linf::LInfinityAlgebra;
use ce_formality::rational::Rational;
use ce_formality::specseq::FilteredComplex;

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn big(r: &Rational) -> Q {
    r.to_big()
}

pub fn dense(v: &SparseVec, n: usize) -> Vec<Q> {
    let mut out = vec![Q::zero(); n];
    for (i, c) in v.iter() {
        out[i] = big(c);
    }
    out
}

/// Rank by plain Gaussian elimination.
pub fn rank(mut rows: Vec<Vec<Q>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(piv) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, piv);
        let p = rows[r][c].clone();
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = &rows[i][c] / &p;
                for k in c..cols {
                    let t = &f * &rows[r][k];
                    rows[i][k] -= t;
                }
            }
        }
        r += 1;
    }
    r
}

fn parity(d: i64) -> bool {
    d.rem_euclid(2) == 1
}

fn sgn(odd: bool) -> Q {
    if odd {
        -Q::one()
    } else {
        Q::one()
    }
}

/// Degree-wise cohomology dimensions of a complex given by dense `d` (columns are images).
pub fn cohomology_dims(degrees: &[i64], d: &[Vec<Q>]) -> BTreeMap<i64, usize> {
    let mut out = BTreeMap::new();
    let mut ds: Vec<i64> = degrees.to_vec();
    ds.sort_unstable();
    ds.dedup();
    let block_rank = |n: i64| -> usize {
        let src: Vec<usize> = (0..degrees.len()).filter(|&j| degrees[j] == n).collect();
        let tgt: Vec<usize> = (0..degrees.len()).filter(|&i| degrees[i] == n + 1).collect();
        rank(tgt.iter().map(|&i| src.iter().map(|&j| d[j][i].clone()).collect()).collect())
    };
    for &n in &ds {
        let dim = degrees.iter().filter(|&&x| x == n).count();
        let h = dim - block_rank(n) - block_rank(n - 1);
        if h > 0 {
            out.insert(n, h);
        }
    }
    out
}

pub fn dgla_cohomology_dims(l: &DgLieAlgebra) -> BTreeMap<i64, usize> {
    let n = l.dim();
    let d: Vec<Vec<Q>> = (0..n).map(|j| dense(l.differential().image(j), n)).collect();
    cohomology_dims(l.space().degrees(), &d)
}

/// `dim Hom^q(Λ^p H, W)`: exterior on even degrees, symmetric on odd ones,
/// counted with a generating polynomial in (x, t).
pub fn hom_dims(h: &[i64], w: &BTreeMap<i64, usize>, p: usize) -> BTreeMap<i64, usize> {
    // poly[k] maps a total degree to the number of monomials of word length k
    let mut poly: Vec<BTreeMap<i64, usize>> = vec![BTreeMap::new(); p + 1];
    poly[0].insert(0, 1);
    for &d in h {
        let mut next = vec![BTreeMap::new(); p + 1];
        for k in 0..=p {
            for (&deg, &c) in &poly[k] {
                let max_power = if parity(d) { p - k } else { 1.min(p - k) };
                for m in 0..=max_power {
                    *next[k + m].entry(deg + m as i64 * d).or_insert(0) += c;
                }
            }
        }
        poly = next;
    }
    let mut out = BTreeMap::new();
    for (&deg, &c) in &poly[p] {
        for (&wd, &wc) in w {
            *out.entry(wd - deg).or_insert(0) += c * wc;
        }
    }
    out.retain(|_, v| *v > 0);
    out
}

/// Dense structure constants `c[i][j]` = `[x_i, x_j]` for all ordered pairs.
pub struct DenseDgla {
    pub degrees: Vec<i64>,
    pub d: Vec<Vec<Q>>,
    pub br: Vec<Vec<Vec<Q>>>,
}

impl DenseDgla {
    pub fn of(l: &DgLieAlgebra) -> Self {
        let n = l.dim();
        let degrees = l.space().degrees().to_vec();
        let d = (0..n).map(|j| dense(l.differential().image(j), n)).collect();
        let mut br = vec![vec![vec![Q::zero(); n]; n]; n];
        for (&(i, j), v) in l.bracket_table() {
            let v = dense(v, n);
            let s = sgn(parity(degrees[i]) && parity(degrees[j]));
            br[i][j] = v.clone();
            if i != j {
                br[j][i] = v.iter().map(|c| -(&s * c)).collect();
            }
        }
        DenseDgla { degrees, d, br }
    }

    fn n(&self) -> usize {
        self.degrees.len()
    }

    fn bracket(&self, x: &[Q], y: &[Q]) -> Vec<Q> {
        let n = self.n();
        let mut out = vec![Q::zero(); n];
        for i in 0..n {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if y[j].is_zero() {
                    continue;
                }
                let c = &x[i] * &y[j];
                for k in 0..n {
                    if !self.br[i][j][k].is_zero() {
                        out[k] += &c * &self.br[i][j][k];
                    }
                }
            }
        }
        out
    }

    fn apply_d(&self, x: &[Q]) -> Vec<Q> {
        let n = self.n();
        let mut out = vec![Q::zero(); n];
        for j in 0..n {
            if !x[j].is_zero() {
                for k in 0..n {
                    out[k] += &x[j] * &self.d[j][k];
                }
            }
        }
        out
    }

    fn unit(&self, i: usize) -> Vec<Q> {
        let mut v = vec![Q::zero(); self.n()];
        v[i] = Q::one();
        v
    }

    /// Name of the first violated axiom, if any.
    pub fn first_violation(&self) -> Option<&'static str> {
        let n = self.n();
        let zero = |v: &[Q]| v.iter().all(Zero::is_zero);
        for j in 0..n {
            for k in 0..n {
                if !self.d[j][k].is_zero() && self.degrees[k] != self.degrees[j] + 1 {
                    return Some("degree homogeneity");
                }
                for i in 0..n {
                    if !self.br[i][j][k].is_zero() && self.degrees[k] != self.degrees[i] + self.degrees[j] {
                        return Some("degree homogeneity");
                    }
                }
            }
        }
        for j in 0..n {
            if !zero(&self.apply_d(&self.apply_d(&self.unit(j)))) {
                return Some("d^2 = 0");
            }
        }
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let (ux, uy, uz) = (self.unit(x), self.unit(y), self.unit(z));
                    let lhs = self.bracket(&ux, &self.bracket(&uy, &uz));
                    let a = self.bracket(&self.bracket(&ux, &uy), &uz);
                    let b = self.bracket(&uy, &self.bracket(&ux, &uz));
                    let s = sgn(parity(self.degrees[x]) && parity(self.degrees[y]));
                    let r: Vec<Q> = (0..n).map(|k| &lhs[k] - &a[k] - &s * &b[k]).collect();
                    if !zero(&r) {
                        return Some("Jacobi");
                    }
                }
            }
        }
        for x in 0..n {
            for y in 0..n {
                let (ux, uy) = (self.unit(x), self.unit(y));
                let lhs = self.apply_d(&self.bracket(&ux, &uy));
                let a = self.bracket(&self.apply_d(&ux), &uy);
                let b = self.bracket(&ux, &self.apply_d(&uy));
                let s = sgn(parity(self.degrees[x]));
                let r: Vec<Q> = (0..n).map(|k| &lhs[k] - &a[k] - &s * &b[k]).collect();
                if !zero(&r) {
                    return Some("Leibniz");
                }
            }
        }
        None
    }
}

/// All permutations of `0..n`.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
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

/// Koszul sign of listing `degs` in the order `perm` (symmetric convention).
pub fn koszul(degs: &[i64], perm: &[usize]) -> Q {
    let mut odd = false;
    for a in 0..perm.len() {
        for b in a + 1..perm.len() {
            if perm[a] > perm[b] && parity(degs[perm[a]]) && parity(degs[perm[b]]) {
                odd = !odd;
            }
        }
    }
    sgn(odd)
}

fn factorial(n: usize) -> Q {
    (1..=n as i64).fold(Q::one(), |acc, k| acc * q(k))
}

/// Evaluates a graded-symmetric operation stored on sorted tuples at an arbitrary tuple.
pub fn eval_sym(v: &LInfinityAlgebra, arity: usize, tuple: &[usize]) -> Vec<Q> {
    let n = v.space().dim();
    let degs = v.space().degrees();
    let mut order: Vec<usize> = (0..tuple.len()).collect();
    order.sort_by_key(|&k| tuple[k]);
    let sorted: Vec<usize> = order.iter().map(|&k| tuple[k]).collect();
    if sorted.windows(2).any(|w| w[0] == w[1] && parity(degs[w[0]])) {
        return vec![Q::zero(); n];
    }
    let tdegs: Vec<i64> = tuple.iter().map(|&i| degs[i]).collect();
    let s = koszul(&tdegs, &order);
    match v.taylor().get(&arity).and_then(|m| m.values().get(&sorted)) {
        Some(val) => dense(val, n).into_iter().map(|c| &s * c).collect(),
        None => vec![Q::zero(); n],
    }
}

/// `Σ_{a+b=n+1} q_a ∘ q̂_b` at `tuple`, summed over all permutations.
pub fn linf_relation(v: &LInfinityAlgebra, tuple: &[usize]) -> Vec<Q> {
    let n = tuple.len();
    let dim = v.space().dim();
    let degs = v.space().degrees();
    let tdegs: Vec<i64> = tuple.iter().map(|&i| degs[i]).collect();
    let mut out = vec![Q::zero(); dim];
    for b in 1..=n {
        let a = n + 1 - b;
        if !v.taylor().contains_key(&a) || !v.taylor().contains_key(&b) {
            continue;
        }
        let w = factorial(b) * factorial(n - b);
        for perm in permutations(n) {
            let s = koszul(&tdegs, &perm) / &w;
            let inner: Vec<usize> = perm[..b].iter().map(|&k| tuple[k]).collect();
            let rest: Vec<usize> = perm[b..].iter().map(|&k| tuple[k]).collect();
            let x = eval_sym(v, b, &inner);
            for (k, c) in x.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let mut t = vec![k];
                t.extend(&rest);
                let y = eval_sym(v, a, &t);
                for m in 0..dim {
                    out[m] += &s * c * &y[m];
                }
            }
        }
    }
    out
}

/// Sorted tuples (with repetition) of length `n` over `0..dim`.
pub fn multisets(dim: usize, n: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, dim: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for i in start..dim {
            cur.push(i);
            go(i, dim, n, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, dim, n, &mut Vec::new(), &mut out);
    out
}

/// First arity at which the L∞ relations fail, or a degree violation.
pub fn linf_first_violation(v: &LInfinityAlgebra) -> Option<String> {
    let degs = v.space().degrees();
    for (&n, m) in v.taylor() {
        for (t, val) in m.values() {
            let deg: i64 = t.iter().map(|&i| degs[i]).sum::<i64>() + 1;
            if val.iter().any(|(k, _)| degs[k] != deg) {
                return Some(format!("degree of q_{n}"));
            }
        }
    }
    for n in 1..=v.weight() {
        for t in multisets(v.space().dim(), n) {
            if linf_relation(v, &t).iter().any(|c| !c.is_zero()) {
                return Some(format!("relation n = {n}"));
            }
        }
    }
    None
}

/// A random filtered complex of total dimension at most `max_dim`: a direct sum
/// of cycles and pairs `x ↦ y` conjugated by a filtration- and degree-preserving
/// unitriangular change of basis.
pub fn random_filtered_complex(rng: &mut ChaCha8Rng, max_dim: usize, length: usize) -> FilteredComplex {
    let mut cells: Vec<(i64, usize)> = Vec::new();
    let mut pairs: Vec<(usize, usize, i64)> = Vec::new();
    let target = rng.gen_range(1..=max_dim);
    while cells.len() < target {
        let n = rng.gen_range(-1..3);
        let p = rng.gen_range(0..length);
        if cells.len() + 2 <= target && rng.gen_bool(0.6) {
            let p2 = rng.gen_range(p..length);
            cells.push((n, p));
            cells.push((n + 1, p2));
            pairs.push((cells.len() - 2, cells.len() - 1, rng.gen_range(1..4)));
        } else {
            cells.push((n, p));
        }
    }
    let dim = cells.len();
    let mut d = vec![vec![Q::zero(); dim]; dim];
    for &(x, y, c) in &pairs {
        d[x][y] = q(c);
    }
    // order by column so that T is unitriangular; entries only from lower to higher columns
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by_key(|&j| (cells[j].1, j));
    let pos: Vec<usize> = {
        let mut p = vec![0; dim];
        for (k, &j) in order.iter().enumerate() {
            p[j] = k;
        }
        p
    };
    let mut t = vec![vec![Q::zero(); dim]; dim];
    for j in 0..dim {
        t[j][j] = Q::one();
        for i in 0..dim {
            if pos[i] > pos[j] && cells[i].0 == cells[j].0 && cells[i].1 >= cells[j].1 && rng.gen_bool(0.5) {
                t[j][i] = q(rng.gen_range(-2..3));
            }
        }
    }
    let tinv = invert_columns(&t, &order);
    // D' e_j = T D T^{-1} e_j, all maps stored as images of basis vectors
    let apply = |m: &Vec<Vec<Q>>, v: &[Q]| -> Vec<Q> {
        let mut out = vec![Q::zero(); dim];
        for j in 0..dim {
            if !v[j].is_zero() {
                for i in 0..dim {
                    out[i] += &v[j] * &m[j][i];
                }
            }
        }
        out
    };
    let differential = (0..dim)
        .map(|j| {
            let v = apply(&t, &apply(&d, &tinv[j]));
            SparseVec::from_terms(v.into_iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, c)| (i, Rational::from_big(c))))
        })
        .collect();
    FilteredComplex::new(cells, differential, length).expect("conjugated complex is filtered")
}

/// Inverse of a unitriangular map stored as images `t[j]`, by back substitution
/// from the highest position down.
fn invert_columns(t: &[Vec<Q>], order: &[usize]) -> Vec<Vec<Q>> {
    let dim = t.len();
    let mut inv = vec![vec![Q::zero(); dim]; dim];
    for &j in order.iter().rev() {
        // T^{-1} e_j = e_j − Σ_{i ≠ j} t[j][i] T^{-1} e_i
        let mut v = vec![Q::zero(); dim];
        v[j] = Q::one();
        for i in 0..dim {
            if i != j && !t[j][i].is_zero() {
                for k in 0..dim {
                    let c = &t[j][i] * &inv[i][k];
                    v[k] -= c;
                }
            }
        }
        inv[j] = v;
    }
    inv
}

/// `dim gr_p H^n` for every `(p, n)` from ranks alone:
/// `dim F^p H^n = dim(Z^n ∩ F^p) − dim(B^n ∩ F^p)`.
pub fn graded_cohomology(fc: &FilteredComplex) -> BTreeMap<(i64, i64), usize> {
    let dim = fc.dim();
    let d: Vec<Vec<Q>> = fc.differential().iter().map(|v| dense(v, dim)).collect();
    let cells = fc.cells();
    let ns: std::collections::BTreeSet<i64> = cells.iter().map(|c| c.0).collect();
    // rank of D restricted to sources `src`, projected to targets `tgt`
    let rk = |src: &[usize], tgt: &[usize]| -> usize { rank(tgt.iter().map(|&i| src.iter().map(|&j| d[j][i].clone()).collect()).collect()) };
    let mut out = BTreeMap::new();
    for &n in &ns {
        let f_dim = |p: i64| -> usize {
            let fp: Vec<usize> = (0..dim).filter(|&j| cells[j].0 == n && cells[j].1 as i64 >= p).collect();
            let all_next: Vec<usize> = (0..dim).filter(|&i| cells[i].0 == n + 1).collect();
            let z = fp.len() - rk(&fp, &all_next);
            let prev: Vec<usize> = (0..dim).filter(|&j| cells[j].0 == n - 1).collect();
            let here: Vec<usize> = (0..dim).filter(|&i| cells[i].0 == n).collect();
            let low: Vec<usize> = here.iter().copied().filter(|&i| (cells[i].1 as i64) < p).collect();
            let b = rk(&prev, &here) - rk(&prev, &low);
            z - b
        };
        for p in 0..fc.length() as i64 {
            let g = f_dim(p) - f_dim(p + 1);
            if g > 0 {
                out.insert((p, n - p), g);
            }
        }
    }
    out
}

pub fn is_positive(x: &Q) -> bool {
    x.is_positive()
}
