//! Matrix factorizations of a potential over a truncated polynomial ring:
//! objects, the shift functor, 2-periodic hom complexes, and homotopy
//! cohomology with window stabilization.
//!
//! An object is (E₀, E₁, δ₀, δ₁) with δ₁δ₀ = f·id and δ₀δ₁ = f·id; both
//! composites are validated entrywise at construction.  Hom cohomology is
//! computed over monomial windows that widen along the operators, with
//! images intersected back into the reporting window; stability is the
//! agreement of the counts at D and D+2.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::dcrit::transplant;
use crate::poly::{AlgebraRef, Monomial, PolyElement, PolyError, TruncatedPolyAlgebra};
use crate::rat::Rat;
use crate::sparse::{image_meet_coords_dim, SparseMatrix};

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum MfError {
    #[error("ring or potential mismatch")]
    RingMismatch,
    #[error("matrix shape mismatch")]
    ShapeMismatch,
    #[error("δ·δ ≠ f·id first fails at ({side}, row {row}, col {col}): {found} vs {expected}")]
    NotAFactorization { side: &'static str, row: usize, col: usize, found: String, expected: String },
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// A polynomial matrix, stored dense at desk scale.
pub type PolyMatrix = Vec<Vec<PolyElement>>;

fn poly_matmul(a: &PolyMatrix, b: &PolyMatrix) -> Result<PolyMatrix, PolyError> {
    let rows = a.len();
    let inner = b.len();
    let cols = if inner > 0 { b[0].len() } else { 0 };
    let algebra = a[0][0].algebra().clone();
    let mut out = vec![vec![PolyElement::zero(&algebra); cols]; rows];
    for (i, arow) in a.iter().enumerate() {
        assert_eq!(arow.len(), inner);
        for (k, aik) in arow.iter().enumerate() {
            if aik.is_zero() {
                continue;
            }
            for (j, bkj) in b[k].iter().enumerate() {
                if !bkj.is_zero() {
                    out[i][j] = out[i][j].add(&aik.mul(bkj)?)?;
                }
            }
        }
    }
    Ok(out)
}

/// A matrix factorization (E₀, E₁, δ₀, δ₁) of `f` over an even truncated
/// polynomial ring.
#[derive(Clone)]
pub struct MatrixFactorization {
    ring: AlgebraRef,
    f: PolyElement,
    rank0: usize,
    rank1: usize,
    /// δ₀: E₀ → E₁, a rank1 × rank0 polynomial matrix.
    d0: PolyMatrix,
    /// δ₁: E₁ → E₀, a rank0 × rank1 polynomial matrix.
    d1: PolyMatrix,
}

impl MatrixFactorization {
    pub fn new(
        ring: AlgebraRef,
        f: PolyElement,
        d0: PolyMatrix,
        d1: PolyMatrix,
    ) -> Result<Self, MfError> {
        assert!(ring.is_all_even(), "matrix factorizations live over even rings");
        let rank1 = d0.len();
        let rank0 = if rank1 > 0 { d0[0].len() } else { d1.len() };
        if d1.len() != rank0 || d0.iter().any(|r| r.len() != rank0) {
            return Err(MfError::ShapeMismatch);
        }
        if d1.iter().any(|r| r.len() != rank1) {
            return Err(MfError::ShapeMismatch);
        }
        let mf = MatrixFactorization { ring, f, rank0, rank1, d0, d1 };
        mf.validate()?;
        Ok(mf)
    }

    /// The zero object.
    pub fn zero(ring: AlgebraRef, f: PolyElement) -> Self {
        MatrixFactorization { ring, f, rank0: 0, rank1: 0, d0: Vec::new(), d1: Vec::new() }
    }

    /// Rank-one factorization f = a·b: δ₀ = a, δ₁ = b.
    pub fn rank_one(
        ring: &AlgebraRef,
        a: &PolyElement,
        b: &PolyElement,
    ) -> Result<Self, MfError> {
        let f = a.mul(b)?;
        MatrixFactorization::new(ring.clone(), f, vec![vec![a.clone()]], vec![vec![b.clone()]])
    }

    pub fn ring(&self) -> &AlgebraRef {
        &self.ring
    }

    pub fn potential(&self) -> &PolyElement {
        &self.f
    }

    pub fn ranks(&self) -> (usize, usize) {
        (self.rank0, self.rank1)
    }

    /// Both composite conditions, exactly, with the first failing entry
    /// located in the error.
    pub fn validate(&self) -> Result<(), MfError> {
        let check = |prod: PolyMatrix, n: usize, side: &'static str| -> Result<(), MfError> {
            for (i, row) in prod.iter().enumerate() {
                for (j, entry) in row.iter().enumerate() {
                    let expected = if i == j { self.f.clone() } else { PolyElement::zero(&self.ring) };
                    if *entry != expected {
                        return Err(MfError::NotAFactorization {
                            side,
                            row: i,
                            col: j,
                            found: entry.to_string(),
                            expected: expected.to_string(),
                        });
                    }
                }
            }
            let _ = n;
            Ok(())
        };
        if self.rank0 > 0 && self.rank1 > 0 {
            check(poly_matmul(&self.d1, &self.d0)?, self.rank0, "δ1∘δ0")?;
            check(poly_matmul(&self.d0, &self.d1)?, self.rank1, "δ0∘δ1")?;
        }
        Ok(())
    }

    /// The shift E[1] = (E₁, E₀, −δ₁, −δ₀): ranks swap and both structure
    /// maps are negated, so shifting twice returns the original object.
    pub fn shift(&self) -> Self {
        MatrixFactorization {
            ring: self.ring.clone(),
            f: self.f.clone(),
            rank0: self.rank1,
            rank1: self.rank0,
            d0: self.d1.iter().map(|r| r.iter().map(PolyElement::neg).collect()).collect(),
            d1: self.d0.iter().map(|r| r.iter().map(PolyElement::neg).collect()).collect(),
        }
    }

    pub fn direct_sum(&self, other: &Self) -> Result<Self, MfError> {
        if *self.ring != *other.ring || self.f != other.f {
            return Err(MfError::RingMismatch);
        }
        let z = PolyElement::zero(&self.ring);
        let block = |a: &PolyMatrix,
                     b: &PolyMatrix,
                     rows_a: usize,
                     cols_a: usize,
                     rows_b: usize,
                     cols_b: usize| {
            let mut m = vec![vec![z.clone(); cols_a + cols_b]; rows_a + rows_b];
            for (i, row) in a.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    m[i][j] = v.clone();
                }
            }
            for (i, row) in b.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    m[rows_a + i][cols_a + j] = v.clone();
                }
            }
            m
        };
        Ok(MatrixFactorization {
            ring: self.ring.clone(),
            f: self.f.clone(),
            rank0: self.rank0 + other.rank0,
            rank1: self.rank1 + other.rank1,
            d0: block(&self.d0, &other.d0, self.rank1, self.rank0, other.rank1, other.rank0),
            d1: block(&self.d1, &other.d1, self.rank0, self.rank1, other.rank0, other.rank1),
        })
    }

    /// Tensor product of factorizations over disjoint variable sets; the
    /// potentials add.  Used for the Knörrer-type checks.
    pub fn tensor(&self, other: &Self) -> Result<Self, MfError> {
        // Joint ring on the union of the generators.
        let mut gens = self.ring.gens().to_vec();
        for g in other.ring.gens() {
            assert!(
                gens.iter().all(|h| h.name != g.name),
                "tensor factors must use disjoint variables"
            );
            gens.push(g.clone());
        }
        let trunc = self.ring.trunc() + other.ring.trunc();
        let ring = TruncatedPolyAlgebra::new(gens, trunc)?;
        let f = transplant(&self.f, &ring)?.add(&transplant(&other.f, &ring)?)?;
        let za = |m: &PolyMatrix| -> Result<PolyMatrix, MfError> {
            Ok(m.iter()
                .map(|r| r.iter().map(|e| transplant(e, &ring)).collect::<Result<Vec<_>, _>>())
                .collect::<Result<Vec<_>, _>>()?)
        };
        let (a0, a1) = (za(&self.d0)?, za(&self.d1)?);
        let (b0, b1) = (za(&other.d0)?, za(&other.d1)?);
        // (E⊗F)₀ = E₀F₀ ⊕ E₁F₁, (E⊗F)₁ = E₁F₀ ⊕ E₀F₁,
        // D = δ⊗1 + σ⊗γ with σ the sign of the E-grading.
        let z = PolyElement::zero(&ring);
        let (e0, e1) = (self.rank0, self.rank1);
        let (f0, f1) = (other.rank0, other.rank1);
        let n0 = e0 * f0 + e1 * f1;
        let n1 = e1 * f0 + e0 * f1;
        let mut d0 = vec![vec![z.clone(); n0]; n1];
        let mut d1 = vec![vec![z.clone(); n1]; n0];
        // Index helpers: block (E_i ⊗ F_j) with offsets.
        // Source 0: [E0F0 | E1F1]; target 1: [E1F0 | E0F1].
        for (bi, brow) in a0.iter().enumerate() {
            for (bj, v) in brow.iter().enumerate() {
                for k in 0..f0 {
                    // δ0⊗1 : E0F0 → E1F0.
                    d0[bi * f0 + k][bj * f0 + k] = v.clone();
                }
            }
        }
        for (bi, brow) in a1.iter().enumerate() {
            for (bj, v) in brow.iter().enumerate() {
                for k in 0..f1 {
                    // δ1⊗1 : E1F1 → E0F1.
                    d0[e1 * f0 + bi * f1 + k][e0 * f0 + bj * f1 + k] = v.clone();
                }
            }
        }
        for (bi, brow) in b0.iter().enumerate() {
            for (bj, v) in brow.iter().enumerate() {
                for k in 0..e0 {
                    // 1⊗γ0 on E0 (σ = +) : E0F0 → E0F1.
                    d0[e1 * f0 + k * f1 + bi][k * f0 + bj] = v.clone();
                }
            }
        }
        for (bi, brow) in b1.iter().enumerate() {
            for (bj, v) in brow.iter().enumerate() {
                for k in 0..e1 {
                    // σ⊗γ1 on E1 (σ = −) : E1F1 → E1F0.
                    d0[k * f0 + bi][e0 * f0 + k * f1 + bj] = v.neg();
                }
            }
        }
        // Source 1: [E1F0 | E0F1]; target 0: [E0F0 | E1F1].
        for (bi, brow) in a1.iter().enumerate() {
            for (bj, v) in brow.iter().enumerate() {
                for k in 0..f0 {
                    d1[bi * f0 + k][bj * f0 + k] = v.clone();
                }
            }
        }
        for (bi, brow) in a0.iter().enumerate() {
            for (bj, v) in brow.iter().enumerate() {
                for k in 0..f1 {
                    d1[e0 * f0 + bi * f1 + k][e1 * f0 + bj * f1 + k] = v.clone();
                }
            }
        }
        for (bi, brow) in b1.iter().enumerate() {
            for (bj, v) in brow.iter().enumerate() {
                for k in 0..e0 {
                    // 1⊗γ1 on E0 (σ = +) : E0F1 → E0F0.
                    d1[k * f0 + bi][e1 * f0 + k * f1 + bj] = v.clone();
                }
            }
        }
        for (bi, brow) in b0.iter().enumerate() {
            for (bj, v) in brow.iter().enumerate() {
                for k in 0..e1 {
                    // σ⊗γ0 on E1 (σ = −) : E1F0 → E1F1.
                    d1[e0 * f0 + k * f1 + bi][k * f0 + bj] = v.neg();
                }
            }
        }
        MatrixFactorization::new(ring, f, d0, d1)
    }

    /// Parse the JSON object format: ring, potential, ranks, and the two
    /// structure matrices with polynomial-expression entries.
    pub fn from_json(v: &Value) -> Result<Self, MfError> {
        let ring = TruncatedPolyAlgebra::from_json(&v["ring"])?;
        let f_src = v["f"].as_str().ok_or(MfError::ShapeMismatch)?;
        let f = PolyElement::parse(&ring, f_src)?;
        let parse_matrix = |m: &Value| -> Result<PolyMatrix, MfError> {
            m.as_array()
                .ok_or(MfError::ShapeMismatch)?
                .iter()
                .map(|row| {
                    row.as_array()
                        .ok_or(MfError::ShapeMismatch)?
                        .iter()
                        .map(|e| {
                            PolyElement::parse(&ring, e.as_str().unwrap_or("0"))
                                .map_err(MfError::from)
                        })
                        .collect()
                })
                .collect()
        };
        let d0 = parse_matrix(&v["d0"])?;
        let d1 = parse_matrix(&v["d1"])?;
        MatrixFactorization::new(ring, f, d0, d1)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "ring": self.ring.to_json(),
            "f": self.f.to_string(),
            "ranks": [self.rank0, self.rank1],
            "d0": self.d0.iter().map(|r| r.iter().map(|e| e.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "d1": self.d1.iter().map(|r| r.iter().map(|e| e.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }
}

/// The 2-periodic hom complex between factorizations of the same (R, f):
/// even part Hom(E₀,Q₀) ⊕ Hom(E₁,Q₁), odd part Hom(E₀,Q₁) ⊕ Hom(E₁,Q₀),
/// h₀(ψ) = λ∘ψ − ψ∘δ on the odd part, h₁(φ) = λ∘φ + φ∘δ on the even part.
pub struct MfHomComplex<'a> {
    source: &'a MatrixFactorization,
    target: &'a MatrixFactorization,
}

impl<'a> MfHomComplex<'a> {
    pub fn new(
        source: &'a MatrixFactorization,
        target: &'a MatrixFactorization,
    ) -> Result<Self, MfError> {
        if *source.ring != *target.ring || source.f != target.f {
            return Err(MfError::RingMismatch);
        }
        Ok(MfHomComplex { source, target })
    }

    /// Apply h to an even element (φ₀: E₀→Q₀, φ₁: E₁→Q₁):
    ///   (λ₀φ₀ + φ₁δ₀, λ₁φ₁ + φ₀δ₁).
    fn h_even(&self, phi0: &PolyMatrix, phi1: &PolyMatrix) -> Result<(PolyMatrix, PolyMatrix), MfError> {
        let a = poly_mat_add(
            &poly_matmul(&self.target.d0, phi0)?,
            &poly_matmul(phi1, &self.source.d0)?,
            false,
        )?;
        let b = poly_mat_add(
            &poly_matmul(&self.target.d1, phi1)?,
            &poly_matmul(phi0, &self.source.d1)?,
            false,
        )?;
        Ok((a, b))
    }

    /// Apply h to an odd element (ψ₀: E₀→Q₁, ψ₁: E₁→Q₀):
    ///   (λ₁ψ₀ − ψ₁δ₀, λ₀ψ₁ − ψ₀δ₁).
    fn h_odd(&self, psi0: &PolyMatrix, psi1: &PolyMatrix) -> Result<(PolyMatrix, PolyMatrix), MfError> {
        let a = poly_mat_add(
            &poly_matmul(&self.target.d1, psi0)?,
            &poly_matmul(psi1, &self.source.d0)?,
            true,
        )?;
        let b = poly_mat_add(
            &poly_matmul(&self.target.d0, psi1)?,
            &poly_matmul(psi0, &self.source.d1)?,
            true,
        )?;
        Ok((a, b))
    }
}

fn poly_mat_add(a: &PolyMatrix, b: &PolyMatrix, subtract: bool) -> Result<PolyMatrix, MfError> {
    let mut out = a.clone();
    for (i, row) in b.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            out[i][j] = if subtract { out[i][j].sub(v)? } else { out[i][j].add(v)? };
        }
    }
    Ok(out)
}

/// Hom-cohomology dims with a stabilization flag.
#[derive(Debug, Clone, PartialEq)]
pub struct MfHomReport {
    pub even: usize,
    pub odd: usize,
    pub window: usize,
    pub stable: bool,
}

impl MfHomReport {
    pub fn to_json(&self) -> Value {
        json!({ "even": self.even, "odd": self.odd, "window": self.window, "stable": self.stable })
    }
}

struct HomBasis {
    /// (matrix-block, row, col, monomial); block 0 is the first summand.
    elems: Vec<(usize, usize, usize, Monomial)>,
    index: BTreeMap<(usize, usize, usize, Monomial), usize>,
}

impl HomBasis {
    fn build(
        shapes: [(usize, usize); 2],
        monos: &[Monomial],
    ) -> Self {
        let mut elems = Vec::new();
        for (block, &(rows, cols)) in shapes.iter().enumerate() {
            for r in 0..rows {
                for c in 0..cols {
                    for m in monos {
                        elems.push((block, r, c, m.clone()));
                    }
                }
            }
        }
        let index = elems.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
        HomBasis { elems, index }
    }
}

/// Cohomology of the 2-periodic hom complex, computed on monomial windows:
/// kernels on coefficients of degree ≤ D with untruncated targets, images
/// from degree ≤ D+s intersected back into the D window, where s is the
/// largest degree in the structure maps.  Stability compares D with D+2.
pub fn mf_hom_cohomology(
    a: &MatrixFactorization,
    b: &MatrixFactorization,
    window: usize,
) -> Result<MfHomReport, MfError> {
    let (even, odd) = mf_hom_dims_at(a, b, window)?;
    let (even2, odd2) = mf_hom_dims_at(a, b, window + 2)?;
    Ok(MfHomReport { even, odd, window, stable: (even, odd) == (even2, odd2) })
}

fn mf_hom_dims_at(
    a: &MatrixFactorization,
    b: &MatrixFactorization,
    window: usize,
) -> Result<(usize, usize), MfError> {
    MfHomComplex::new(a, b)?;
    let growth = a
        .d0
        .iter()
        .chain(a.d1.iter())
        .chain(b.d0.iter())
        .chain(b.d1.iter())
        .flatten()
        .filter_map(PolyElement::max_degree)
        .max()
        .unwrap_or(0)
        .max(1);
    // Work in a ring wide enough that no product truncates.
    let ring = a.ring.with_truncation(window + 3 * growth + 1);
    let lift = |m: &PolyMatrix| -> Result<PolyMatrix, MfError> {
        Ok(m.iter()
            .map(|r| r.iter().map(|e| transplant(e, &ring)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?)
    };
    let a = MatrixFactorization {
        ring: ring.clone(),
        f: transplant(&a.f, &ring)?,
        rank0: a.rank0,
        rank1: a.rank1,
        d0: lift(&a.d0)?,
        d1: lift(&a.d1)?,
    };
    let b = MatrixFactorization {
        ring: ring.clone(),
        f: transplant(&b.f, &ring)?,
        rank0: b.rank0,
        rank1: b.rank1,
        d0: lift(&b.d0)?,
        d1: lift(&b.d1)?,
    };
    let hom = MfHomComplex { source: &a, target: &b };
    let even_shapes = [(b.rank0, a.rank0), (b.rank1, a.rank1)];
    let odd_shapes = [(b.rank1, a.rank0), (b.rank0, a.rank1)];
    if even_shapes.iter().all(|&(r, c)| r * c == 0) && odd_shapes.iter().all(|&(r, c)| r * c == 0)
    {
        return Ok((0, 0));
    }
    let gens: Vec<usize> = (0..ring.num_gens()).collect();
    let monos_mid = even_mono_window(&ring, &gens, window + growth);
    let monos_big = even_mono_window(&ring, &gens, window + 2 * growth);
    let even_mid = HomBasis::build(even_shapes, &monos_mid);
    let even_big = HomBasis::build(even_shapes, &monos_big);
    let odd_mid = HomBasis::build(odd_shapes, &monos_mid);
    let odd_big = HomBasis::build(odd_shapes, &monos_big);

    // Matrix of h on the mid window, represented on the big window.
    let apply = |even_side: bool, src: &HomBasis, dst: &HomBasis| -> Result<SparseMatrix, MfError> {
        let mut m = SparseMatrix::zero(dst.elems.len(), src.elems.len());
        let shapes = if even_side { even_shapes } else { odd_shapes };
        for (col, (block, r, c, mono)) in src.elems.iter().enumerate() {
            let z0 = vec![vec![PolyElement::zero(&ring); shapes[0].1]; shapes[0].0];
            let z1 = vec![vec![PolyElement::zero(&ring); shapes[1].1]; shapes[1].0];
            let (mut m0, mut m1) = (z0, z1);
            let target = if *block == 0 { &mut m0 } else { &mut m1 };
            target[*r][*c] = PolyElement::from_terms(&ring, [(mono.clone(), Rat::one())]);
            let (o0, o1) = if even_side {
                hom.h_even(&m0, &m1)?
            } else {
                hom.h_odd(&m0, &m1)?
            };
            for (blk, o) in [(0usize, &o0), (1, &o1)] {
                for (rr, row) in o.iter().enumerate() {
                    for (cc, e) in row.iter().enumerate() {
                        for (mm, coef) in e.terms() {
                            let key = (blk, rr, cc, mm.clone());
                            let row_idx = *dst
                                .index
                                .get(&key)
                                .expect("windowed image stays inside the big basis");
                            m.add_to(row_idx, col, coef);
                        }
                    }
                }
            }
        }
        Ok(m)
    };
    // h₁: even(mid) → odd(big); h₀: odd(mid) → even(big).
    let h1 = apply(true, &even_mid, &odd_big)?;
    let h0 = apply(false, &odd_mid, &even_big)?;

    let dims = |mid: &HomBasis,
                big: &HomBasis,
                out: &SparseMatrix,
                inc: &SparseMatrix|
     -> usize {
        // Kernel of the outgoing operator on the D window.
        let inside_cols: Vec<usize> = mid
            .elems
            .iter()
            .enumerate()
            .filter(|(_, (_, _, _, m))| ring.word_degree(m) <= window)
            .map(|(i, _)| i)
            .collect();
        let mut col_map = vec![None; mid.elems.len()];
        for (nc, &oc) in inside_cols.iter().enumerate() {
            col_map[oc] = Some(nc);
        }
        let mut restricted = SparseMatrix::zero(out.rows(), inside_cols.len());
        for (r, c, v) in out.iter() {
            if let Some(nc) = col_map[c] {
                restricted.set(r, nc, v.clone());
            }
        }
        let ker = inside_cols.len() - restricted.rank();
        // Incoming image met with the D window.
        let inside_rows: Vec<bool> = big
            .elems
            .iter()
            .map(|(_, _, _, m)| ring.word_degree(m) <= window)
            .collect();
        let im = image_meet_coords_dim(inc, &inside_rows);
        ker - im
    };
    let even_dim = dims(&even_mid, &even_big, &h1, &h0);
    let odd_dim = dims(&odd_mid, &odd_big, &h0, &h1);
    Ok((even_dim, odd_dim))
}

fn even_mono_window(ring: &AlgebraRef, gens: &[usize], bound: usize) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; ring.num_gens()];
    fn rec(gens: &[usize], slot: usize, rem: usize, cur: &mut Monomial, out: &mut Vec<Monomial>) {
        if slot == gens.len() {
            out.push(cur.clone());
            return;
        }
        for e in 0..=rem {
            cur[gens[slot]] = e as u32;
            rec(gens, slot + 1, rem - e, cur, out);
        }
        cur[gens[slot]] = 0;
    }
    rec(gens, 0, bound, &mut cur, &mut out);
    out
}

/// h₀∘h₁ = h₁∘h₀ = 0 exactly: the f-terms must cancel.  Verified on the
/// matrix-unit basis at a small window.
pub fn mf_check_h_squares_zero(
    a: &MatrixFactorization,
    b: &MatrixFactorization,
    window: usize,
) -> Result<bool, MfError> {
    let ring = a.ring.with_truncation(a.ring.trunc() + 4 * (window + 2));
    let lift_mf = |m: &MatrixFactorization| -> Result<MatrixFactorization, MfError> {
        let lift = |mm: &PolyMatrix| -> Result<PolyMatrix, MfError> {
            Ok(mm
                .iter()
                .map(|r| r.iter().map(|e| transplant(e, &ring)).collect::<Result<Vec<_>, _>>())
                .collect::<Result<Vec<_>, _>>()?)
        };
        Ok(MatrixFactorization {
            ring: ring.clone(),
            f: transplant(&m.f, &ring)?,
            rank0: m.rank0,
            rank1: m.rank1,
            d0: lift(&m.d0)?,
            d1: lift(&m.d1)?,
        })
    };
    let a = lift_mf(a)?;
    let b = lift_mf(b)?;
    let hom = MfHomComplex { source: &a, target: &b };
    let gens: Vec<usize> = (0..ring.num_gens()).collect();
    let monos = even_mono_window(&ring, &gens, window);
    // Even matrix units through h₁ then h₀.
    for block in 0..2 {
        let shapes = [(b.rank0, a.rank0), (b.rank1, a.rank1)];
        let (rows, cols) = shapes[block];
        for r in 0..rows {
            for c in 0..cols {
                for m in &monos {
                    let mut m0 = vec![vec![PolyElement::zero(&ring); shapes[0].1]; shapes[0].0];
                    let mut m1 = vec![vec![PolyElement::zero(&ring); shapes[1].1]; shapes[1].0];
                    let t = if block == 0 { &mut m0 } else { &mut m1 };
                    t[r][c] = PolyElement::from_terms(&ring, [(m.clone(), Rat::one())]);
                    let (o0, o1) = hom.h_even(&m0, &m1)?;
                    let (z0, z1) = hom.h_odd(&o0, &o1)?;
                    if z0.iter().flatten().any(|e| !e.is_zero())
                        || z1.iter().flatten().any(|e| !e.is_zero())
                    {
                        return Ok(false);
                    }
                }
            }
        }
    }
    // Odd matrix units through h₀ then h₁.
    for block in 0..2 {
        let shapes = [(b.rank1, a.rank0), (b.rank0, a.rank1)];
        let (rows, cols) = shapes[block];
        for r in 0..rows {
            for c in 0..cols {
                for m in &monos {
                    let mut m0 = vec![vec![PolyElement::zero(&ring); shapes[0].1]; shapes[0].0];
                    let mut m1 = vec![vec![PolyElement::zero(&ring); shapes[1].1]; shapes[1].0];
                    let t = if block == 0 { &mut m0 } else { &mut m1 };
                    t[r][c] = PolyElement::from_terms(&ring, [(m.clone(), Rat::one())]);
                    let (o0, o1) = hom.h_odd(&m0, &m1)?;
                    let (z0, z1) = hom.h_even(&o0, &o1)?;
                    if z0.iter().flatten().any(|e| !e.is_zero())
                        || z1.iter().flatten().any(|e| !e.is_zero())
                    {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xx_factorization(trunc: usize) -> MatrixFactorization {
        let ring = TruncatedPolyAlgebra::even(&["x"], trunc);
        let x = PolyElement::gen(&ring, "x").unwrap();
        MatrixFactorization::rank_one(&ring, &x, &x).unwrap()
    }

    #[test]
    fn validate_accepts_and_rejects() {
        let ring = TruncatedPolyAlgebra::even(&["x"], 12);
        let x = PolyElement::gen(&ring, "x").unwrap();
        let x2 = x.mul(&x).unwrap();
        assert!(MatrixFactorization::rank_one(&ring, &x, &x).is_ok());
        // δ₀ = x, δ₁ = x² is a factorization of x³, not of x²; force f = x².
        let err = match MatrixFactorization::new(
            ring.clone(),
            x2.clone(),
            vec![vec![x.clone()]],
            vec![vec![x2.clone()]],
        ) {
            Err(e) => e,
            Ok(_) => panic!("x·x² must not factor x²"),
        };
        assert!(matches!(err, MfError::NotAFactorization { .. }));
        // f = 0 with zero maps: the 2-periodic complex case.
        let z = PolyElement::zero(&ring);
        assert!(MatrixFactorization::new(
            ring.clone(),
            z.clone(),
            vec![vec![z.clone()]],
            vec![vec![z.clone()]],
        )
        .is_ok());
    }

    #[test]
    fn shift_swaps_and_negates() {
        let m = xx_factorization(12);
        let s = m.shift();
        assert_eq!(s.ranks(), (1, 1));
        assert_eq!(s.d0[0][0], m.d1[0][0].neg());
        assert_eq!(s.d1[0][0], m.d0[0][0].neg());
        // Shift twice: the original object on the nose.
        let ss = s.shift();
        assert_eq!(ss.d0[0][0], m.d0[0][0]);
        assert_eq!(ss.d1[0][0], m.d1[0][0]);
        // Shift of the zero object.
        let zero = MatrixFactorization::zero(m.ring.clone(), m.f.clone());
        assert_eq!(zero.shift().ranks(), (0, 0));
    }

    #[test]
    fn h_squares_to_zero() {
        let m = xx_factorization(10);
        assert!(mf_check_h_squares_zero(&m, &m, 3).unwrap());
    }

    #[test]
    fn end_of_xx_is_one_one() {
        let m = xx_factorization(16);
        let r = mf_hom_cohomology(&m, &m, 6).unwrap();
        assert_eq!((r.even, r.odd), (1, 1));
        assert!(r.stable);
        let r8 = mf_hom_cohomology(&m, &m, 8).unwrap();
        assert_eq!((r8.even, r8.odd), (1, 1));
        assert!(r8.stable);
    }

    #[test]
    fn hom_to_zero_object_vanishes() {
        let m = xx_factorization(12);
        let zero = MatrixFactorization::zero(m.ring.clone(), m.f.clone());
        let r = mf_hom_cohomology(&m, &zero, 6).unwrap();
        assert_eq!((r.even, r.odd), (0, 0));
    }

    #[test]
    fn trivial_factorization_is_contractible() {
        // (1, f): unit in one direction; End cohomology vanishes.
        let ring = TruncatedPolyAlgebra::even(&["x"], 16);
        let one = PolyElement::one(&ring);
        let f = PolyElement::parse(&ring, "x^2").unwrap();
        let m = MatrixFactorization::new(ring.clone(), f.clone(), vec![vec![one.clone()]], vec![vec![f.clone()]]).unwrap();
        let r = mf_hom_cohomology(&m, &m, 6).unwrap();
        assert_eq!((r.even, r.odd), (0, 0));
        assert!(r.stable);
    }

    #[test]
    fn shift_exchanges_parities() {
        let m = xx_factorization(16);
        let shifted = m.shift();
        let plain = mf_hom_cohomology(&m, &m, 6).unwrap();
        let to_shifted = mf_hom_cohomology(&m, &shifted, 6).unwrap();
        assert_eq!((plain.even, plain.odd), (to_shifted.odd, to_shifted.even));
    }

    #[test]
    fn direct_sum_is_additive() {
        let m = xx_factorization(16);
        let sum = m.direct_sum(&m).unwrap();
        let single = mf_hom_cohomology(&m, &m, 5).unwrap();
        let doubled = mf_hom_cohomology(&sum, &m, 5).unwrap();
        assert_eq!((doubled.even, doubled.odd), (2 * single.even, 2 * single.odd));
    }

    #[test]
    fn json_round_trip() {
        let m = xx_factorization(12);
        let v = m.to_json();
        let back = MatrixFactorization::from_json(&v).unwrap();
        assert_eq!(back.ranks(), (1, 1));
        assert_eq!(back.potential(), m.potential());
        let r = mf_hom_cohomology(&back, &back, 5).unwrap();
        assert_eq!((r.even, r.odd), (1, 1));
    }

    #[test]
    fn knoerrer_tensor_preserves_hom_cohomology() {
        // Tensoring with the rank-one (y, z) factorization of y·z in two
        // fresh variables is the Knörrer functor; it preserves the
        // hom-cohomology dimensions.
        let m = xx_factorization(12);
        let ring_yz = TruncatedPolyAlgebra::even(&["y", "z"], 12);
        let y = PolyElement::gen(&ring_yz, "y").unwrap();
        let z = PolyElement::gen(&ring_yz, "z").unwrap();
        let yz = MatrixFactorization::rank_one(&ring_yz, &y, &z).unwrap();
        let t = m.tensor(&yz).unwrap();
        assert_eq!(t.potential(), &PolyElement::parse(t.ring(), "x^2 + y*z").unwrap());
        let base = mf_hom_cohomology(&m, &m, 5).unwrap();
        let tensored = mf_hom_cohomology(&t, &t, 5).unwrap();
        assert_eq!((base.even, base.odd), (tensored.even, tensored.odd));
    }

    #[test]
    fn one_variable_suspension_doubles_end_over_q() {
        // Tensoring with (y, y) of y² is the one-variable suspension, not
        // the Knörrer equivalence: over Q the suspended object stays
        // irreducible while its endomorphisms double.
        let m = xx_factorization(12);
        let ring_y = TruncatedPolyAlgebra::even(&["y"], 12);
        let y = PolyElement::gen(&ring_y, "y").unwrap();
        let yy = MatrixFactorization::rank_one(&ring_y, &y, &y).unwrap();
        let t = m.tensor(&yy).unwrap();
        let base = mf_hom_cohomology(&m, &m, 5).unwrap();
        let tensored = mf_hom_cohomology(&t, &t, 5).unwrap();
        assert_eq!((tensored.even, tensored.odd), (2 * base.even, 2 * base.odd));
    }
}
