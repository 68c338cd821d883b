//! Bounded cochain complexes, filtered complexes, and the spectral-sequence
//! engine for decreasing filtrations.
//!
//! Complexes use the cochain convention: the differential raises degree by
//! one, and d ∘ d = 0 is validated at construction time — a complex that
//! fails this is never built.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::rat::Rat;
use crate::sparse::{SparseMatrix, Subspace};

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum ComplexError {
    #[error("differential shape mismatch in degree {0}")]
    ShapeMismatch(i64),
    #[error("d∘d ≠ 0 from degree {0}")]
    NotAComplex(i64),
    #[error("filtration level {level} not contained in level {0} at degree {degree}", .level - 1)]
    NotDecreasing { level: usize, degree: i64 },
    #[error("filtration level {level} not closed under the differential at degree {degree}")]
    NotSubcomplex { level: usize, degree: i64 },
    #[error("filtration level 0 must span the whole complex (degree {0})")]
    NotExhaustive(i64),
}

/// A finite-dimensional graded vector space: dimension per degree.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GradedVectorSpace {
    pub dims: BTreeMap<i64, usize>,
}

impl GradedVectorSpace {
    pub fn dim(&self, degree: i64) -> usize {
        self.dims.get(&degree).copied().unwrap_or(0)
    }

    pub fn total_dim(&self) -> usize {
        self.dims.values().sum()
    }
}

/// A bounded cochain complex of rational vector spaces.
#[derive(Debug, Clone)]
pub struct ChainComplex {
    lo: i64,
    dims: Vec<usize>,
    /// diffs[i]: C^{lo+i} → C^{lo+i+1}, a (dims[i+1] × dims[i]) matrix.
    diffs: Vec<SparseMatrix>,
}

impl ChainComplex {
    pub fn new(lo: i64, dims: Vec<usize>, diffs: Vec<SparseMatrix>) -> Result<Self, ComplexError> {
        assert_eq!(diffs.len() + 1, dims.len().max(1), "need one differential per adjacent pair");
        for (i, d) in diffs.iter().enumerate() {
            if d.rows() != dims[i + 1] || d.cols() != dims[i] {
                return Err(ComplexError::ShapeMismatch(lo + i as i64));
            }
        }
        for i in 0..diffs.len().saturating_sub(1) {
            if !diffs[i + 1].matmul(&diffs[i]).is_zero() {
                return Err(ComplexError::NotAComplex(lo + i as i64));
            }
        }
        Ok(ChainComplex { lo, dims, diffs })
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.dims.len() as i64 - 1
    }

    pub fn dim(&self, degree: i64) -> usize {
        let i = degree - self.lo;
        if i < 0 || i as usize >= self.dims.len() {
            0
        } else {
            self.dims[i as usize]
        }
    }

    pub fn space(&self) -> GradedVectorSpace {
        GradedVectorSpace {
            dims: self
                .dims
                .iter()
                .enumerate()
                .map(|(i, &d)| (self.lo + i as i64, d))
                .collect(),
        }
    }

    /// The differential out of `degree`; zero matrix outside the stored range.
    pub fn diff(&self, degree: i64) -> SparseMatrix {
        let i = degree - self.lo;
        if i < 0 || i as usize >= self.diffs.len() {
            SparseMatrix::zero(self.dim(degree + 1), self.dim(degree))
        } else {
            self.diffs[i as usize].clone()
        }
    }

    /// Exact cohomology dimensions: dim ker d_n − dim im d_{n−1} per degree.
    pub fn cohomology_dims(&self) -> BTreeMap<i64, usize> {
        let mut ranks: BTreeMap<i64, usize> = BTreeMap::new();
        for (i, d) in self.diffs.iter().enumerate() {
            ranks.insert(self.lo + i as i64, d.rank());
        }
        let mut out = BTreeMap::new();
        for (i, &dim) in self.dims.iter().enumerate() {
            let n = self.lo + i as i64;
            let rank_out = ranks.get(&n).copied().unwrap_or(0);
            let rank_in = ranks.get(&(n - 1)).copied().unwrap_or(0);
            out.insert(n, dim - rank_out - rank_in);
        }
        out
    }

    pub fn total_cohomology_dim(&self) -> usize {
        self.cohomology_dims().values().sum()
    }
}

/// A decreasing filtration F⁰ ⊇ F¹ ⊇ … ⊇ Fᵐ ⊇ 0 of a bounded complex by
/// subcomplexes, each level given by spanning vectors per degree.
#[derive(Debug, Clone)]
pub struct FilteredComplex {
    ambient: ChainComplex,
    /// levels[k][i] = subspace of C^{lo+i} spanned by level-k vectors.
    levels: Vec<Vec<Subspace>>,
}

impl FilteredComplex {
    /// Build and validate: level 0 spans everything, levels decrease, and
    /// each level is closed under the differential.
    pub fn new(
        ambient: ChainComplex,
        filtration: Vec<Vec<Vec<Vec<Rat>>>>,
    ) -> Result<Self, ComplexError> {
        let n_deg = ambient.dims.len();
        let mut levels = Vec::with_capacity(filtration.len());
        for (k, level) in filtration.into_iter().enumerate() {
            assert_eq!(level.len(), n_deg, "one span list per degree");
            let mut per_degree = Vec::with_capacity(n_deg);
            for (i, span) in level.into_iter().enumerate() {
                let sub = Subspace::from_vectors(ambient.dims[i], span);
                if k == 0 && sub.dim() != ambient.dims[i] {
                    return Err(ComplexError::NotExhaustive(ambient.lo + i as i64));
                }
                per_degree.push(sub);
            }
            levels.push(per_degree);
            if k > 0 {
                for i in 0..n_deg {
                    let prev: &Vec<Subspace> = &levels[k - 1];
                    if !prev[i].contains_subspace(&levels[k][i]) {
                        return Err(ComplexError::NotDecreasing {
                            level: k,
                            degree: ambient.lo + i as i64,
                        });
                    }
                }
            }
        }
        // Closure under d for every level.
        for (k, level) in levels.iter().enumerate() {
            for i in 0..n_deg.saturating_sub(1) {
                let d = &ambient.diffs[i];
                let image = level[i].image_under(d);
                if !level[i + 1].contains_subspace(&image) {
                    return Err(ComplexError::NotSubcomplex {
                        level: k,
                        degree: ambient.lo + i as i64,
                    });
                }
            }
        }
        Ok(FilteredComplex { ambient, levels })
    }

    pub fn ambient(&self) -> &ChainComplex {
        &self.ambient
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    /// Fᵖ in a given degree, with p clamped: p < 0 gives everything,
    /// p ≥ number of levels gives zero.
    fn level(&self, p: i64, degree: i64) -> Subspace {
        let i = degree - self.ambient.lo;
        if i < 0 || i as usize >= self.ambient.dims.len() {
            return Subspace::zero(0);
        }
        let i = i as usize;
        if p < 0 {
            Subspace::full(self.ambient.dims[i])
        } else if (p as usize) < self.levels.len() {
            self.levels[p as usize][i].clone()
        } else {
            Subspace::zero(self.ambient.dims[i])
        }
    }

    /// Zᵣ^{p,q} = Fᵖ C^{p+q} ∩ d⁻¹(F^{p+r} C^{p+q+1}).
    fn z_space(&self, r: i64, p: i64, q: i64) -> Subspace {
        let n = p + q;
        let fp = self.level(p, n);
        let d = self.ambient.diff(n);
        let target = self.level(p + r, n + 1);
        let pre = Subspace::preimage_under(&d, &target);
        fp.intersect(&pre)
    }

    /// The denominator of Eᵣ^{p,q}: Z_{r−1}^{p+1,q−1} + d Z_{r−1}^{p−r+1,q+r−2}.
    fn b_space(&self, r: i64, p: i64, q: i64) -> Subspace {
        let n = p + q;
        let z1 = self.z_space(r - 1, p + 1, q - 1);
        let z2 = self.z_space(r - 1, p - r + 1, q + r - 2);
        let d_prev = self.ambient.diff(n - 1);
        let img = z2.image_under(&d_prev);
        z1.sum(&img)
    }

    /// Compute spectral-sequence pages E₀ … E_{r_max}.  Each page carries
    /// its differentials, and page r+1 is verified against the homology of
    /// page r entry by entry.
    pub fn spectral_sequence(&self, r_max: usize) -> Vec<SpectralPage> {
        let lo = self.ambient.lo;
        let hi = self.ambient.hi();
        let m = self.levels.len() as i64;
        let mut pages = Vec::new();
        for r in 0..=r_max as i64 {
            let mut dims = BTreeMap::new();
            let mut reps: BTreeMap<(i64, i64), (Subspace, Vec<Vec<Rat>>, Subspace)> =
                BTreeMap::new();
            for p in 0..m {
                for n in lo..=hi {
                    let q = n - p;
                    let z = self.z_space(r, p, q);
                    let b = self.b_space(r, p, q);
                    let mut quotient_reps = Vec::new();
                    let mut accum = b.clone();
                    for v in z.basis_vectors() {
                        if accum.insert(v.clone()) {
                            quotient_reps.push(v);
                        }
                    }
                    let dim = quotient_reps.len();
                    if dim > 0 {
                        dims.insert((p, q), dim);
                    }
                    reps.insert((p, q), (z, quotient_reps, b));
                }
            }
            // Assemble d_r as matrices between nonzero entries.
            let mut differentials = BTreeMap::new();
            for (&(p, q), (_, quotient_reps, _)) in &reps {
                if quotient_reps.is_empty() {
                    continue;
                }
                let (tp, tq) = (p + r, q - r + 1);
                let Some((tz, treps, tb)) = reps.get(&(tp, tq)) else { continue };
                if treps.is_empty() {
                    continue;
                }
                let n = p + q;
                let d = self.ambient.diff(n);
                let mut mat = SparseMatrix::zero(treps.len(), quotient_reps.len());
                for (j, v) in quotient_reps.iter().enumerate() {
                    let dv = d.apply(v);
                    debug_assert!(tz.contains(&dv), "d_r image escapes Z_r at ({tp},{tq})");
                    let coords = express_in_quotient(&dv, treps, tb);
                    for (i, c) in coords.into_iter().enumerate() {
                        if !c.is_zero() {
                            mat.set(i, j, c);
                        }
                    }
                }
                if !mat.is_zero() {
                    differentials.insert((p, q), mat);
                }
            }
            let converged = differentials.is_empty();
            pages.push(SpectralPage { r: r as usize, dims, differentials, converged });
        }
        // Cross-check: each page beyond the first equals the homology of its
        // predecessor, entry by entry.
        for w in pages.windows(2) {
            let (prev, next) = (&w[0], &w[1]);
            for (&(p, q), &dim) in &next.dims {
                assert_eq!(
                    dim,
                    prev.homology_dim_at(p, q),
                    "page {} entry ({p},{q}) disagrees with homology of page {}",
                    next.r,
                    prev.r
                );
            }
            for (&(p, q), &dim) in &prev.dims {
                if !next.dims.contains_key(&(p, q)) {
                    assert_eq!(
                        prev.homology_dim_at(p, q),
                        0,
                        "vanished entry ({p},{q}) had nonzero homology on page {}",
                        prev.r
                    );
                }
                let _ = dim;
            }
        }
        pages
    }

    /// Σ_{p+q=n} dim E_last^{p,q} must equal dim Hⁿ(total) for every n.
    pub fn verify_convergence(&self, last: &SpectralPage) -> bool {
        let h = self.ambient.cohomology_dims();
        let mut per_n: BTreeMap<i64, usize> = BTreeMap::new();
        for (&(p, q), &d) in &last.dims {
            *per_n.entry(p + q).or_insert(0) += d;
        }
        for n in self.ambient.lo..=self.ambient.hi() {
            if per_n.get(&n).copied().unwrap_or(0) != h.get(&n).copied().unwrap_or(0) {
                return false;
            }
        }
        true
    }
}

/// Solve for the coordinates of `v` on the quotient basis `reps` modulo the
/// subspace `b`.  Panics if `v` is not in span(reps) + b; callers only pass
/// vectors that provably are.
fn express_in_quotient(v: &[Rat], reps: &[Vec<Rat>], b: &Subspace) -> Vec<Rat> {
    let ambient = v.len();
    let bb = b.basis_vectors();
    let cols = reps.len() + bb.len();
    let mut m = SparseMatrix::zero(ambient, cols + 1);
    for (j, r) in reps.iter().chain(bb.iter()).enumerate() {
        for (i, x) in r.iter().enumerate() {
            if !x.is_zero() {
                m.set(i, j, x.clone());
            }
        }
    }
    for (i, x) in v.iter().enumerate() {
        if !x.is_zero() {
            m.set(i, cols, x.clone());
        }
    }
    for k in m.kernel_basis() {
        if !k[cols].is_zero() {
            let inv = -&k[cols].recip();
            return (0..reps.len()).map(|j| &k[j] * &inv).collect();
        }
    }
    panic!("vector not expressible on the quotient basis");
}

/// One page of a spectral sequence: dimensions per (p, q) and the assembled
/// d_r differentials between nonzero entries.
#[derive(Debug, Clone)]
pub struct SpectralPage {
    pub r: usize,
    pub dims: BTreeMap<(i64, i64), usize>,
    pub differentials: BTreeMap<(i64, i64), SparseMatrix>,
    pub converged: bool,
}

impl SpectralPage {
    pub fn dim(&self, p: i64, q: i64) -> usize {
        self.dims.get(&(p, q)).copied().unwrap_or(0)
    }

    /// Homology of this page at (p, q): ker(d_r out) / im(d_r in).
    pub fn homology_dim_at(&self, p: i64, q: i64) -> usize {
        let r = self.r as i64;
        let dim = self.dim(p, q);
        let rank_out = self.differentials.get(&(p, q)).map_or(0, SparseMatrix::rank);
        let rank_in =
            self.differentials.get(&(p - r, q + r - 1)).map_or(0, SparseMatrix::rank);
        dim - rank_out - rank_in
    }

    pub fn to_json(&self) -> Value {
        json!({
            "page": self.r,
            "converged": self.converged,
            "entries": self.dims.iter().map(|(&(p, q), &dim)| json!({
                "p": p, "q": q, "dim": dim,
            })).collect::<Vec<_>>(),
        })
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("p,q,dim\n");
        for (&(p, q), &dim) in &self.dims {
            s.push_str(&format!("{p},{q},{dim}\n"));
        }
        s
    }
}
