//! Sparse exact linear algebra over the rationals and over the fraction
//! field of `u`-polynomials.
//!
//! Ranks are computed by fraction-free elimination on integer rows with a
//! Markowitz-style pivot choice; kernels by echelon reduction over the
//! rationals.  For matrices with entries polynomial in `u`, the rank over
//! the fraction field is obtained by specializing `u` at several rational
//! sample points and taking the maximum; an exact elimination over actual
//! rational functions is kept around as an oracle for small sizes.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;

use crate::rat::{Rat, ScalarError, UWindow};

/// A sparse matrix over the exact rationals.  No duplicate positions and no
/// stored zero entries.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    entries: BTreeMap<(usize, usize), Rat>,
}

impl SparseMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        SparseMatrix { rows, cols, entries: BTreeMap::new() }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.set(i, i, Rat::one());
        }
        m
    }

    pub fn from_triplets(rows: usize, cols: usize, triplets: Vec<(usize, usize, Rat)>) -> Self {
        let mut m = Self::zero(rows, cols);
        for (r, c, v) in triplets {
            assert!(r < rows && c < cols, "entry ({r}, {c}) out of bounds");
            assert!(!m.entries.contains_key(&(r, c)), "duplicate entry ({r}, {c})");
            m.set(r, c, v);
        }
        m
    }

    pub fn from_dense(d: &[Vec<Rat>]) -> Self {
        let rows = d.len();
        let cols = d.first().map_or(0, |r| r.len());
        let mut m = Self::zero(rows, cols);
        for (i, row) in d.iter().enumerate() {
            assert_eq!(row.len(), cols, "ragged rows");
            for (j, v) in row.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, r: usize, c: usize) -> Rat {
        self.entries.get(&(r, c)).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rat) {
        assert!(r < self.rows && c < self.cols);
        if v.is_zero() {
            self.entries.remove(&(r, c));
        } else {
            self.entries.insert((r, c), v);
        }
    }

    pub fn add_to(&mut self, r: usize, c: usize, v: &Rat) {
        let cur = self.get(r, c);
        self.set(r, c, &cur + v);
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &Rat)> {
        self.entries.iter().map(|(&(r, c), v)| (r, c, v))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zero(self.cols, self.rows);
        for (r, c, v) in self.iter() {
            m.set(c, r, v.clone());
        }
        m
    }

    pub fn scale(&self, s: &Rat) -> Self {
        let mut m = Self::zero(self.rows, self.cols);
        for (r, c, v) in self.iter() {
            m.set(r, c, v * s);
        }
        m
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        let mut m = self.clone();
        for (r, c, v) in rhs.iter() {
            m.add_to(r, c, v);
        }
        m
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "shape mismatch in product");
        // Group rhs by row for the sparse product.
        let mut rhs_rows: Vec<Vec<(usize, &Rat)>> = vec![Vec::new(); rhs.rows];
        for (r, c, v) in rhs.iter() {
            rhs_rows[r].push((c, v));
        }
        let mut m = Self::zero(self.rows, rhs.cols);
        for (r, k, v) in self.iter() {
            for (c, w) in &rhs_rows[k] {
                m.add_to(r, *c, &(v * w));
            }
        }
        m
    }

    /// Matrix-vector product `m * v` with `v` a dense column.
    pub fn apply(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(v.len(), self.cols);
        let mut out = vec![Rat::zero(); self.rows];
        for (r, c, a) in self.iter() {
            if !v[c].is_zero() {
                out[r] += &(a * &v[c]);
            }
        }
        out
    }

    /// Exact rank over the rationals by fraction-free elimination.
    pub fn rank(&self) -> usize {
        rank_ff(self.integer_rows())
    }

    /// rows - rank.
    pub fn cokernel_dim(&self) -> usize {
        self.rows - self.rank()
    }

    /// cols - rank.
    pub fn kernel_dim(&self) -> usize {
        self.cols - self.rank()
    }

    /// Exact basis of the right kernel: every returned `v` satisfies
    /// `m * v = 0`, and there are `cols - rank` of them.
    pub fn kernel_basis(&self) -> Vec<Vec<Rat>> {
        // Reduced row echelon form over the rationals on sparse rows.
        let mut rows: Vec<BTreeMap<usize, Rat>> = Vec::new();
        {
            let mut by_row: BTreeMap<usize, BTreeMap<usize, Rat>> = BTreeMap::new();
            for (r, c, v) in self.iter() {
                by_row.entry(r).or_default().insert(c, v.clone());
            }
            rows.extend(by_row.into_values());
        }
        let mut pivots: Vec<(usize, BTreeMap<usize, Rat>)> = Vec::new();
        for mut row in rows {
            loop {
                // Reduce against existing pivots.
                let lead = match row.keys().next() {
                    Some(&c) => c,
                    None => break,
                };
                if let Some((_, prow)) = pivots.iter().find(|(p, _)| *p == lead) {
                    let f = row.get(&lead).cloned().unwrap();
                    row = row_axpy(&row, prow, &-&f);
                } else {
                    // Normalize and insert.
                    let inv = row.get(&lead).unwrap().recip();
                    for v in row.values_mut() {
                        *v = &*v * &inv;
                    }
                    pivots.push((lead, row));
                    break;
                }
            }
        }
        // Back-substitute to full reduction.
        pivots.sort_by_key(|(p, _)| *p);
        for i in (0..pivots.len()).rev() {
            let (_, prow) = pivots[i].clone();
            let p = pivots[i].0;
            for j in 0..i {
                if let Some(f) = pivots[j].1.get(&p).cloned() {
                    pivots[j].1 = row_axpy(&pivots[j].1, &prow, &-&f);
                }
            }
        }
        let pivot_cols: Vec<usize> = pivots.iter().map(|(p, _)| *p).collect();
        let free_cols: Vec<usize> =
            (0..self.cols).filter(|c| !pivot_cols.contains(c)).collect();
        let mut basis = Vec::with_capacity(free_cols.len());
        for &fc in &free_cols {
            let mut v = vec![Rat::zero(); self.cols];
            v[fc] = Rat::one();
            for (p, row) in &pivots {
                if let Some(c) = row.get(&fc) {
                    v[*p] = -c;
                }
            }
            basis.push(v);
        }
        basis
    }

    /// Clear denominators row by row, producing integer rows for the
    /// fraction-free eliminator.
    fn integer_rows(&self) -> Vec<Vec<(usize, BigInt)>> {
        let mut by_row: BTreeMap<usize, Vec<(usize, Rat)>> = BTreeMap::new();
        for (r, c, v) in self.iter() {
            by_row.entry(r).or_default().push((c, v.clone()));
        }
        by_row
            .into_values()
            .map(|row| {
                let mut lcm = BigInt::one();
                for (_, v) in &row {
                    lcm = lcm.lcm(v.denom());
                }
                row.into_iter()
                    .map(|(c, v)| (c, v.numer() * (&lcm / v.denom())))
                    .collect()
            })
            .collect()
    }
}

fn row_axpy(
    row: &BTreeMap<usize, Rat>,
    prow: &BTreeMap<usize, Rat>,
    f: &Rat,
) -> BTreeMap<usize, Rat> {
    let mut out = row.clone();
    for (c, v) in prow {
        let cur = out.remove(c).unwrap_or_else(Rat::zero);
        let nv = &cur + &(v * f);
        if !nv.is_zero() {
            out.insert(*c, nv);
        }
    }
    out
}

/// Fraction-free sparse elimination, rank only.  Pivots are chosen
/// Markowitz-style: sparsest eligible column first, then the sparsest row
/// holding it, breaking ties toward small pivot magnitude.
fn rank_ff(mut rows: Vec<Vec<(usize, BigInt)>>) -> usize {
    rows.retain(|r| !r.is_empty());
    let mut rank = 0;
    while !rows.is_empty() {
        // Column occupancy count.
        let mut col_count: BTreeMap<usize, usize> = BTreeMap::new();
        for row in &rows {
            for (c, _) in row {
                *col_count.entry(*c).or_insert(0) += 1;
            }
        }
        let (&pivot_col, _) = col_count
            .iter()
            .min_by_key(|(c, n)| (**n, **c))
            .expect("nonempty rows must occupy a column");
        // Sparsest row containing pivot_col; break ties by entry size.
        let mut best: Option<(usize, u64, usize)> = None;
        for (i, row) in rows.iter().enumerate() {
            if let Some((_, v)) = row.iter().find(|(c, _)| *c == pivot_col) {
                let key = (row.len(), v.magnitude().bits(), i);
                if best.map_or(true, |b| key < b) {
                    best = Some(key);
                }
            }
        }
        let pivot_row_idx = best.unwrap().2;
        let pivot_row = rows.swap_remove(pivot_row_idx);
        let pivot_val = pivot_row
            .iter()
            .find(|(c, _)| *c == pivot_col)
            .map(|(_, v)| v.clone())
            .unwrap();
        rank += 1;
        // Eliminate pivot_col from remaining rows: r' = p*r - q*pr, then
        // divide by gcd to keep growth bounded.
        for row in rows.iter_mut() {
            let q = match row.iter().find(|(c, _)| *c == pivot_col) {
                Some((_, v)) => v.clone(),
                None => continue,
            };
            let mut merged: BTreeMap<usize, BigInt> = BTreeMap::new();
            for (c, v) in row.iter() {
                merged.insert(*c, v * &pivot_val);
            }
            for (c, v) in &pivot_row {
                let cur = merged.remove(c).unwrap_or_else(BigInt::zero);
                let nv = cur - v * &q;
                if !nv.is_zero() {
                    merged.insert(*c, nv);
                }
            }
            merged.remove(&pivot_col);
            let mut g = BigInt::zero();
            for v in merged.values() {
                g = g.gcd(v);
                if g.is_one() {
                    break;
                }
            }
            *row = if g.is_one() || g.is_zero() {
                merged.into_iter().collect()
            } else {
                merged.into_iter().map(|(c, v)| (c, v / &g)).collect()
            };
        }
        rows.retain(|r| !r.is_empty());
    }
    rank
}

/// A sparse matrix whose entries are windowed Laurent polynomials in `u`.
#[derive(Clone, Debug)]
pub struct USparseMatrix {
    rows: usize,
    cols: usize,
    window: (i64, i64),
    entries: BTreeMap<(usize, usize), UWindow>,
}

impl USparseMatrix {
    pub fn zero(rows: usize, cols: usize, window: (i64, i64)) -> Self {
        USparseMatrix { rows, cols, window, entries: BTreeMap::new() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn set(&mut self, r: usize, c: usize, v: UWindow) {
        assert!(r < self.rows && c < self.cols);
        assert_eq!(v.window(), self.window, "window mismatch");
        if v.is_zero() {
            self.entries.remove(&(r, c));
        } else {
            self.entries.insert((r, c), v);
        }
    }

    pub fn add_to(&mut self, r: usize, c: usize, v: &UWindow) -> Result<(), ScalarError> {
        let cur = self
            .entries
            .remove(&(r, c))
            .unwrap_or_else(|| UWindow::zero(self.window.0, self.window.1));
        let nv = cur.add(v)?;
        if !nv.is_zero() {
            self.entries.insert((r, c), nv);
        }
        Ok(())
    }

    pub fn get(&self, r: usize, c: usize) -> UWindow {
        self.entries
            .get(&(r, c))
            .cloned()
            .unwrap_or_else(|| UWindow::zero(self.window.0, self.window.1))
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &UWindow)> {
        self.entries.iter().map(|(&(r, c), v)| (r, c, v))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Specialize `u` at a rational sample.
    pub fn eval(&self, at: &Rat) -> SparseMatrix {
        let mut m = SparseMatrix::zero(self.rows, self.cols);
        for (r, c, v) in self.iter() {
            m.set(r, c, v.eval(at));
        }
        m
    }

    /// Rank over the fraction field Q(u): specialize at `samples` distinct
    /// nonzero rationals of bounded height and take the maximum.
    /// Specialization can only drop rank, so the maximum is a lower bound
    /// that is generically exact.
    pub fn rank_fraction_field(&self, samples: usize, rng: &mut impl Rng) -> usize {
        let mut best = 0;
        let mut used: Vec<Rat> = Vec::new();
        let mut tries = 0;
        while used.len() < samples.max(1) && tries < 100 {
            tries += 1;
            let num = rng.gen_range(-97i64..=97);
            let den = rng.gen_range(1i64..=13);
            if num == 0 {
                continue;
            }
            let r = Rat::from_frac(num, den);
            if used.contains(&r) {
                continue;
            }
            used.push(r.clone());
            best = best.max(self.eval(&r).rank());
        }
        best
    }

    /// Exact rank over Q(u) by dense elimination with rational-function
    /// entries.  Retained as an oracle for small sizes.
    pub fn rank_exact(&self) -> usize {
        let mut dense: Vec<Vec<RatFn>> = vec![vec![RatFn::zero(); self.cols]; self.rows];
        for (r, c, v) in self.iter() {
            dense[r][c] = RatFn::from_uwindow(v);
        }
        let mut rank = 0;
        let mut row0 = 0;
        for col in 0..self.cols {
            let pivot = (row0..self.rows).find(|&r| !dense[r][col].is_zero());
            let Some(p) = pivot else { continue };
            dense.swap(row0, p);
            let inv = dense[row0][col].recip();
            for r in row0 + 1..self.rows {
                if dense[r][col].is_zero() {
                    continue;
                }
                let f = dense[r][col].mul(&inv);
                for c in col..self.cols {
                    let t = f.mul(&dense[row0][c]);
                    dense[r][c] = dense[r][c].sub(&t);
                }
            }
            rank += 1;
            row0 += 1;
            if row0 == self.rows {
                break;
            }
        }
        rank
    }
}

/// Univariate polynomial over the rationals, dense, used only inside the
/// exact Q(u) elimination oracle.
#[derive(Clone, Debug, PartialEq)]
struct RatPoly(Vec<Rat>);

impl RatPoly {
    fn zero() -> Self {
        RatPoly(Vec::new())
    }

    fn one() -> Self {
        RatPoly(vec![Rat::one()])
    }

    fn normalize(mut self) -> Self {
        while self.0.last().is_some_and(Rat::is_zero) {
            self.0.pop();
        }
        self
    }

    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn deg(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    fn mul(&self, rhs: &Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Rat::zero(); self.0.len() + rhs.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in rhs.0.iter().enumerate() {
                out[i + j] += &(a * b);
            }
        }
        RatPoly(out).normalize()
    }

    fn sub(&self, rhs: &Self) -> Self {
        let n = self.0.len().max(rhs.0.len());
        let mut out = vec![Rat::zero(); n];
        for (i, a) in self.0.iter().enumerate() {
            out[i] = a.clone();
        }
        for (i, b) in rhs.0.iter().enumerate() {
            out[i] = &out[i] - b;
        }
        RatPoly(out).normalize()
    }

    fn rem(&self, rhs: &Self) -> Self {
        assert!(!rhs.is_zero());
        let mut r = self.clone();
        while !r.is_zero() && r.deg() >= rhs.deg() {
            let shift = r.deg() - rhs.deg();
            let f = &r.0[r.deg()] / &rhs.0[rhs.deg()];
            let mut t = vec![Rat::zero(); shift];
            t.push(f);
            r = r.sub(&rhs.mul(&RatPoly(t).normalize()));
        }
        r
    }

    fn gcd(&self, rhs: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), rhs.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            return a;
        }
        // Monic normal form.
        let lead = a.0.last().unwrap().recip();
        RatPoly(a.0.iter().map(|c| c * &lead).collect()).normalize()
    }
}

/// A rational function in `u`; the exact scalar for the oracle eliminator.
#[derive(Clone, Debug)]
struct RatFn {
    num: RatPoly,
    den: RatPoly,
}

impl RatFn {
    fn zero() -> Self {
        RatFn { num: RatPoly::zero(), den: RatPoly::one() }
    }

    fn from_uwindow(w: &UWindow) -> Self {
        // Shift the window so all exponents are nonnegative.
        let min = w.min_exp().unwrap_or(0).min(0);
        let mut num = vec![Rat::zero(); 1];
        for (e, c) in w.terms() {
            let k = (e - min) as usize;
            if num.len() <= k {
                num.resize(k + 1, Rat::zero());
            }
            num[k] = c.clone();
        }
        let mut den = vec![Rat::zero(); (-min) as usize];
        den.push(Rat::one());
        RatFn { num: RatPoly(num).normalize(), den: RatPoly(den).normalize() }.reduce()
    }

    fn reduce(mut self) -> Self {
        if self.num.is_zero() {
            self.den = RatPoly::one();
            return self;
        }
        let g = self.num.gcd(&self.den);
        if !g.is_zero() && g.deg() > 0 {
            self.num = poly_div_exact(&self.num, &g);
            self.den = poly_div_exact(&self.den, &g);
        }
        self
    }

    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn recip(&self) -> Self {
        assert!(!self.is_zero());
        RatFn { num: self.den.clone(), den: self.num.clone() }
    }

    fn mul(&self, rhs: &Self) -> Self {
        RatFn { num: self.num.mul(&rhs.num), den: self.den.mul(&rhs.den) }.reduce()
    }

    fn sub(&self, rhs: &Self) -> Self {
        let num = self.num.mul(&rhs.den).sub(&rhs.num.mul(&self.den));
        let den = self.den.mul(&rhs.den);
        RatFn { num, den }.reduce()
    }
}

fn poly_div_exact(a: &RatPoly, b: &RatPoly) -> RatPoly {
    // Exact division; remainder must vanish.
    let mut r = a.clone();
    let mut q = vec![Rat::zero(); a.0.len().saturating_sub(b.0.len()) + 1];
    while !r.is_zero() && r.deg() >= b.deg() {
        let shift = r.deg() - b.deg();
        let f = &r.0[r.deg()] / &b.0[b.deg()];
        q[shift] = f.clone();
        let mut t = vec![Rat::zero(); shift];
        t.push(f);
        r = r.sub(&b.mul(&RatPoly(t).normalize()));
    }
    assert!(r.is_zero(), "non-exact polynomial division");
    RatPoly(q).normalize()
}

/// dim(im(m) ∩ V) where V is the coordinate subspace on the rows marked
/// `inside`:  rank(m) − rank(m restricted to the outside rows).
pub fn image_meet_coords_dim(m: &SparseMatrix, inside: &[bool]) -> usize {
    assert_eq!(inside.len(), m.rows());
    let mut outside = SparseMatrix::zero(m.rows(), m.cols());
    for (r, c, v) in m.iter() {
        if !inside[r] {
            outside.set(r, c, v.clone());
        }
    }
    m.rank() - outside.rank()
}

/// A subspace of Q^n presented by an echelonized basis of sparse columns.
#[derive(Clone, Debug)]
pub struct Subspace {
    ambient: usize,
    /// Echelon basis: each vector keyed by its pivot coordinate, fully
    /// reduced against the others.
    basis: Vec<(usize, Vec<Rat>)>,
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Subspace { ambient, basis: Vec::new() }
    }

    pub fn full(ambient: usize) -> Self {
        let mut s = Self::zero(ambient);
        for i in 0..ambient {
            let mut v = vec![Rat::zero(); ambient];
            v[i] = Rat::one();
            s.insert(v);
        }
        s
    }

    pub fn from_vectors(ambient: usize, vectors: impl IntoIterator<Item = Vec<Rat>>) -> Self {
        let mut s = Self::zero(ambient);
        for v in vectors {
            s.insert(v);
        }
        s
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Reduce `v` against the basis; returns the residue.
    fn reduce(&self, mut v: Vec<Rat>) -> Vec<Rat> {
        for (p, b) in &self.basis {
            if !v[*p].is_zero() {
                let f = v[*p].clone();
                for (x, y) in v.iter_mut().zip(b.iter()) {
                    *x = &*x - &(&f * y);
                }
            }
        }
        v
    }

    pub fn contains(&self, v: &[Rat]) -> bool {
        assert_eq!(v.len(), self.ambient);
        self.reduce(v.to_vec()).iter().all(Rat::is_zero)
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        other.basis.iter().all(|(_, b)| self.contains(b))
    }

    /// Insert a vector; returns true if it enlarged the space.
    pub fn insert(&mut self, v: Vec<Rat>) -> bool {
        assert_eq!(v.len(), self.ambient);
        let mut r = self.reduce(v);
        let pivot = match r.iter().position(|x| !x.is_zero()) {
            Some(p) => p,
            None => return false,
        };
        let inv = r[pivot].recip();
        for x in r.iter_mut() {
            *x = &*x * &inv;
        }
        // Back-reduce existing basis vectors against the new one.
        for (_, b) in self.basis.iter_mut() {
            if !b[pivot].is_zero() {
                let f = b[pivot].clone();
                for (x, y) in b.iter_mut().zip(r.iter()) {
                    *x = &*x - &(&f * y);
                }
            }
        }
        self.basis.push((pivot, r));
        self.basis.sort_by_key(|(p, _)| *p);
        true
    }

    pub fn basis_vectors(&self) -> Vec<Vec<Rat>> {
        self.basis.iter().map(|(_, b)| b.clone()).collect()
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        assert_eq!(self.ambient, other.ambient);
        let mut s = self.clone();
        for (_, b) in &other.basis {
            s.insert(b.clone());
        }
        s
    }

    /// Intersection via the kernel of the stacked coefficient matrix.
    pub fn intersect(&self, other: &Subspace) -> Subspace {
        assert_eq!(self.ambient, other.ambient);
        let a = self.basis_vectors();
        let b = other.basis_vectors();
        if a.is_empty() || b.is_empty() {
            return Subspace::zero(self.ambient);
        }
        // Solve x*A = y*B: kernel of the (ambient) x (|a|+|b|) matrix
        // [A^T | -B^T] applied to column (x, y).
        let mut m = SparseMatrix::zero(self.ambient, a.len() + b.len());
        for (j, v) in a.iter().enumerate() {
            for (i, x) in v.iter().enumerate() {
                if !x.is_zero() {
                    m.set(i, j, x.clone());
                }
            }
        }
        for (j, v) in b.iter().enumerate() {
            for (i, x) in v.iter().enumerate() {
                if !x.is_zero() {
                    m.set(i, a.len() + j, -x);
                }
            }
        }
        let ker = m.kernel_basis();
        let mut out = Subspace::zero(self.ambient);
        for k in ker {
            let mut v = vec![Rat::zero(); self.ambient];
            for (j, coef) in k[..a.len()].iter().enumerate() {
                if !coef.is_zero() {
                    for (i, x) in a[j].iter().enumerate() {
                        v[i] += &(coef * x);
                    }
                }
            }
            out.insert(v);
        }
        out
    }

    /// Image of this subspace under the matrix `m` (columns of `m` span the
    /// images of coordinate vectors).
    pub fn image_under(&self, m: &SparseMatrix) -> Subspace {
        assert_eq!(m.cols(), self.ambient);
        let mut out = Subspace::zero(m.rows());
        for (_, b) in &self.basis {
            out.insert(m.apply(b));
        }
        out
    }

    /// Preimage of `target` under `m`: all v with m*v in target.
    pub fn preimage_under(m: &SparseMatrix, target: &Subspace) -> Subspace {
        assert_eq!(m.rows(), target.ambient);
        let tb = target.basis_vectors();
        let mut stacked = SparseMatrix::zero(m.rows(), m.cols() + tb.len());
        for (r, c, v) in m.iter() {
            stacked.set(r, c, v.clone());
        }
        for (j, t) in tb.iter().enumerate() {
            for (i, x) in t.iter().enumerate() {
                if !x.is_zero() {
                    stacked.set(i, m.cols() + j, -x);
                }
            }
        }
        let ker = stacked.kernel_basis();
        let mut out = Subspace::zero(m.cols());
        for k in ker {
            out.insert(k[..m.cols()].to_vec());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn mat(d: &[&[i64]]) -> SparseMatrix {
        SparseMatrix::from_dense(
            &d.iter()
                .map(|r| r.iter().map(|&x| Rat::from_int(x)).collect())
                .collect::<Vec<_>>(),
        )
    }

    #[test]
    fn rank_basics() {
        assert_eq!(SparseMatrix::identity(3).rank(), 3);
        assert_eq!(SparseMatrix::zero(2, 2).rank(), 0);
        // Row reduction by hand: second row is twice the first.
        assert_eq!(mat(&[&[1, 2], &[2, 4]]).rank(), 1);
    }

    #[test]
    fn kernel_basics() {
        assert!(SparseMatrix::identity(4).kernel_basis().is_empty());
        assert_eq!(SparseMatrix::zero(2, 3).kernel_basis().len(), 3);
        let k = mat(&[&[1, 1]]).kernel_basis();
        assert_eq!(k.len(), 1);
        // Proportional to (1, -1).
        assert_eq!(&k[0][0] + &k[0][1], Rat::zero());
        assert!(!k[0][0].is_zero());
    }

    #[test]
    fn cokernel_basics() {
        assert_eq!(SparseMatrix::identity(3).cokernel_dim(), 0);
        assert_eq!(SparseMatrix::zero(3, 2).cokernel_dim(), 3);
        // 2x1 matrix [[2],[4]] has rank 1.
        assert_eq!(mat(&[&[2], &[4]]).cokernel_dim(), 1);
    }

    #[test]
    fn rank_nullity_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..60 {
            let rows = rng.gen_range(1..=40);
            let cols = rng.gen_range(1..=40);
            let mut m = SparseMatrix::zero(rows, cols);
            for r in 0..rows {
                for c in 0..cols {
                    if rng.gen_bool(0.2) {
                        m.set(r, c, Rat::from_frac(rng.gen_range(-9..=9), rng.gen_range(1..=4)));
                    }
                }
            }
            let rank = m.rank();
            let kernel = m.kernel_basis();
            assert_eq!(rank + kernel.len(), cols, "rank-nullity");
            for v in &kernel {
                assert!(m.apply(v).iter().all(Rat::is_zero), "kernel vector not annihilated");
            }
        }
    }

    #[test]
    fn rank_invariant_under_permutation_and_scaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let rows = rng.gen_range(2..=12);
            let cols = rng.gen_range(2..=12);
            let mut m = SparseMatrix::zero(rows, cols);
            for r in 0..rows {
                for c in 0..cols {
                    if rng.gen_bool(0.3) {
                        m.set(r, c, Rat::from_int(rng.gen_range(-5..=5)));
                    }
                }
            }
            let rank = m.rank();
            // Scale a row, swap two columns.
            let mut m2 = SparseMatrix::zero(rows, cols);
            let (c1, c2) = (rng.gen_range(0..cols), rng.gen_range(0..cols));
            let scale_row = rng.gen_range(0..rows);
            for (r, c, v) in m.iter() {
                let nc = if c == c1 { c2 } else if c == c2 { c1 } else { c };
                let nv = if r == scale_row { v * &Rat::from_frac(3, 7) } else { v.clone() };
                m2.set(r, nc, nv);
            }
            assert_eq!(m2.rank(), rank);
        }
    }

    #[test]
    fn u_rank_sampling_agrees_with_exact_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for trial in 0..40 {
            let n = rng.gen_range(1..=12);
            let m = rng.gen_range(1..=12);
            let mut mat = USparseMatrix::zero(n, m, (-2, 4));
            for r in 0..n {
                for c in 0..m {
                    if rng.gen_bool(0.35) {
                        let a = Rat::from_int(rng.gen_range(-4..=4i64));
                        let b = Rat::from_int(rng.gen_range(-4..=4i64));
                        let mut w = UWindow::constant(-2, 4, a).unwrap();
                        w = w.add(&UWindow::monomial(-2, 4, 1, b).unwrap()).unwrap();
                        mat.set(r, c, w);
                    }
                }
            }
            let exact = mat.rank_exact();
            let sampled = mat.rank_fraction_field(3, &mut rng);
            assert_eq!(exact, sampled, "trial {trial}");
        }
    }

    #[test]
    fn subspace_ops() {
        let e = |i: usize| {
            let mut v = vec![Rat::zero(); 3];
            v[i] = Rat::one();
            v
        };
        let a = Subspace::from_vectors(3, [e(0), e(1)]);
        let b = Subspace::from_vectors(3, [e(1), e(2)]);
        assert_eq!(a.dim(), 2);
        assert_eq!(a.sum(&b).dim(), 3);
        let i = a.intersect(&b);
        assert_eq!(i.dim(), 1);
        assert!(i.contains(&e(1)));
        assert!(a.contains_subspace(&i));
    }
}
