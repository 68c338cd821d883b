//! Cyclic L∞ data and Koszul models of derived critical loci.
//!
//! A cyclic structure is stored as the symmetric product tensors l_k
//! together with the pairing ν.  The potential is reconstructed from the
//! full contraction ν(l_k(u,…,u), u); the adjoint map Σ 1/k! l_k∨ is built
//! by a separate ν-contraction that never symmetrizes, so the gradient
//! identity df = Σ 1/k! l_k∨ is a genuine two-route comparison.
//!
//! Koszul complexes are assembled with per-degree monomial windows that
//! widen along the differential, so no product is ever truncated inside the
//! complex; reported dimensions then match the formal-completion picture
//! and stabilization under D → D+2 is meaningful.

use std::collections::BTreeMap;

use rand::Rng;
use serde_json::{json, Value};

use crate::complex::ChainComplex;
use crate::poly::{
    AlgebraRef, Generator, Monomial, Parity, PolyElement, PolyError, TruncatedPolyAlgebra,
};
use crate::rat::Rat;
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum DcritError {
    #[error("cyclicity violated at order {k}, entry {detail}: {lhs} vs {rhs}")]
    CyclicityViolation { k: usize, detail: String, lhs: Rat, rhs: Rat },
    #[error("normal products inconsistent: {0}")]
    InconsistentNormalProducts(String),
    #[error("pairing is degenerate")]
    DegeneratePairing,
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Exponent vectors of total degree `deg` over `n` slots.
pub fn exponent_vectors(n: usize, deg: usize) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; n];
    fn rec(n: usize, idx: usize, rem: usize, cur: &mut Monomial, out: &mut Vec<Monomial>) {
        if idx + 1 == n {
            cur[idx] = rem as u32;
            out.push(cur.clone());
            return;
        }
        for e in 0..=rem {
            cur[idx] = e as u32;
            rec(n, idx + 1, rem - e, cur, out);
        }
    }
    if n == 0 {
        return out;
    }
    rec(n, 0, deg, &mut cur, &mut out);
    out
}

pub fn multinomial(k: usize, alpha: &Monomial) -> Rat {
    let mut num = Rat::one();
    for i in 2..=k {
        num = &num * &Rat::from_int(i as i64);
    }
    let mut den = Rat::one();
    for &a in alpha {
        for i in 2..=a as usize {
            den = &den * &Rat::from_int(i as i64);
        }
    }
    &num / &den
}

/// Cyclic L∞ data: a rank-u space with pairing ν and symmetric products
/// l_k : Symᵏ(U) → U∨ for 2 ≤ k ≤ K, stored as coefficient tensors on the
/// monomial basis.
#[derive(Debug, Clone)]
pub struct CyclicLInfinity {
    dim_u: usize,
    /// ν[j][i] pairs the dual basis vector e_j∨ against e_i.
    nu: Vec<Vec<Rat>>,
    /// products[k][α] = coefficients of l_k(e^α) on the dual basis, |α| = k.
    products: BTreeMap<usize, BTreeMap<Monomial, Vec<Rat>>>,
}

impl CyclicLInfinity {
    pub fn new(
        dim_u: usize,
        nu: Vec<Vec<Rat>>,
        products: BTreeMap<usize, BTreeMap<Monomial, Vec<Rat>>>,
    ) -> Result<Self, DcritError> {
        let data = CyclicLInfinity { dim_u, nu, products };
        if data.nu_matrix().rank() != dim_u {
            return Err(DcritError::DegeneratePairing);
        }
        Ok(data)
    }

    pub fn dim_u(&self) -> usize {
        self.dim_u
    }

    pub fn max_order(&self) -> usize {
        self.products.keys().max().copied().unwrap_or(1)
    }

    fn nu_matrix(&self) -> SparseMatrix {
        let mut m = SparseMatrix::zero(self.dim_u, self.dim_u);
        for (j, row) in self.nu.iter().enumerate() {
            for (i, v) in row.iter().enumerate() {
                if !v.is_zero() {
                    m.set(j, i, v.clone());
                }
            }
        }
        m
    }

    /// The contracted tensor T(α, i) = ν(l_k(e^α), e_i).
    fn contracted(&self, k: usize, alpha: &Monomial, i: usize) -> Rat {
        let Some(tensor) = self.products.get(&k) else { return Rat::zero() };
        let Some(coeffs) = tensor.get(alpha) else { return Rat::zero() };
        let mut acc = Rat::zero();
        for (j, c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                acc += &(c * &self.nu[j][i]);
            }
        }
        acc
    }

    /// Coefficientwise cyclicity: moving one factor between the Sym-slot and
    /// the pairing slot never changes the contraction.
    pub fn check_cyclicity(&self) -> Result<(), DcritError> {
        for (&k, tensor) in &self.products {
            for alpha in tensor.keys() {
                for i in 0..self.dim_u {
                    for j in 0..self.dim_u {
                        if alpha[j] == 0 {
                            continue;
                        }
                        let mut moved = alpha.clone();
                        moved[j] -= 1;
                        moved[i] += 1;
                        let lhs = self.contracted(k, alpha, i);
                        let rhs = self.contracted(k, &moved, j);
                        if lhs != rhs {
                            return Err(DcritError::CyclicityViolation {
                                k,
                                detail: format!("alpha={alpha:?}, i={i}, j={j}"),
                                lhs,
                                rhs,
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// The coordinate algebra Sym(U∨) with variables x1…xu.
    pub fn coordinate_algebra(&self, trunc: usize) -> AlgebraRef {
        let names: Vec<String> = (1..=self.dim_u).map(|i| format!("x{i}")).collect();
        TruncatedPolyAlgebra::new(
            names
                .iter()
                .map(|n| Generator { name: n.clone(), degree: 0, parity: Parity::Even })
                .collect(),
            trunc,
        )
        .expect("fresh names")
    }

    /// The potential f = Σ_k 1/(k+1)! · ν(l_k(u,…,u), u), as a truncated
    /// polynomial.  Defined for arbitrary data (the evaluation symmetrizes
    /// by itself); cyclicity is what makes it compatible with the adjoint.
    fn potential_raw(&self, algebra: &AlgebraRef) -> PolyElement {
        let mut f = PolyElement::zero(algebra);
        for (&k, tensor) in &self.products {
            let scale = Rat::inv_factorial(k as u32 + 1);
            for alpha in tensor.keys() {
                let m = multinomial(k, alpha);
                for i in 0..self.dim_u {
                    let t = self.contracted(k, alpha, i);
                    if t.is_zero() {
                        continue;
                    }
                    let mut mono = alpha.clone();
                    mono[i] += 1;
                    f.add_term(mono, &(&m * &t) * &scale);
                }
            }
        }
        f
    }

    /// The potential, after validating cyclicity.
    pub fn potential(&self, trunc: usize) -> Result<PolyElement, DcritError> {
        self.check_cyclicity()?;
        Ok(self.potential_raw(&self.coordinate_algebra(trunc)))
    }

    /// The adjoint map l∨ = Σ_k 1/k! l_k∨ : U → Sym(U∨), one truncated
    /// polynomial per basis vector of U.  Pure ν-contraction, no
    /// symmetrization over the pairing slot.
    pub fn adjoint_map(&self, trunc: usize) -> Vec<PolyElement> {
        let algebra = self.coordinate_algebra(trunc);
        (0..self.dim_u)
            .map(|i| {
                let mut a = PolyElement::zero(&algebra);
                for (&k, tensor) in &self.products {
                    let scale = Rat::inv_factorial(k as u32);
                    for alpha in tensor.keys() {
                        let t = self.contracted(k, alpha, i);
                        if !t.is_zero() {
                            a.add_term(alpha.clone(), &(&multinomial(k, alpha) * &t) * &scale);
                        }
                    }
                }
                a
            })
            .collect()
    }

    /// A random cyclic instance: a fully symmetric contraction tensor is
    /// drawn first and the products are peeled off it against a diagonal
    /// pairing, so cyclicity holds by construction.
    pub fn random(dim_u: usize, k_max: usize, rng: &mut impl Rng) -> Self {
        let mut nu = vec![vec![Rat::zero(); dim_u]; dim_u];
        for (j, row) in nu.iter_mut().enumerate() {
            let mut d = 0;
            while d == 0 {
                d = rng.gen_range(-3i64..=3);
            }
            row[j] = Rat::from_int(d);
        }
        let mut products = BTreeMap::new();
        for k in 2..=k_max {
            // Symmetric tensor S on monomials of degree k+1.
            let mut sym: BTreeMap<Monomial, Rat> = BTreeMap::new();
            for beta in exponent_vectors(dim_u, k + 1) {
                if rng.gen_bool(0.7) {
                    sym.insert(beta, Rat::from_frac(rng.gen_range(-6..=6), rng.gen_range(1..=3)));
                }
            }
            let mut tensor: BTreeMap<Monomial, Vec<Rat>> = BTreeMap::new();
            for alpha in exponent_vectors(dim_u, k) {
                let mut coeffs = vec![Rat::zero(); dim_u];
                for (i, c) in coeffs.iter_mut().enumerate() {
                    let mut beta = alpha.clone();
                    beta[i] += 1;
                    let target = sym.get(&beta).cloned().unwrap_or_else(Rat::zero);
                    // T(α, i) = Σ_j l_k[α][j] ν[j][i] must equal S(α+e_i);
                    // with diagonal ν this solves immediately.
                    *c = &target / &nu[i][i];
                }
                if coeffs.iter().any(|c| !c.is_zero()) {
                    tensor.insert(alpha, coeffs);
                }
            }
            products.insert(k, tensor);
        }
        CyclicLInfinity { dim_u, nu, products }
    }

    /// Perturb one stored product coefficient; breaks cyclicity generically.
    pub fn perturbed(&self, rng: &mut impl Rng) -> Self {
        let mut out = self.clone();
        let ks: Vec<usize> = out.products.keys().copied().collect();
        let k = ks[rng.gen_range(0..ks.len())];
        let tensor = out.products.get_mut(&k).unwrap();
        if tensor.is_empty() {
            let alpha = exponent_vectors(self.dim_u, k)[0].clone();
            tensor.insert(alpha, {
                let mut v = vec![Rat::zero(); self.dim_u];
                v[0] = Rat::one();
                v
            });
        } else {
            let keys: Vec<Monomial> = tensor.keys().cloned().collect();
            let alpha = keys[rng.gen_range(0..keys.len())].clone();
            let coeffs = tensor.get_mut(&alpha).unwrap();
            let i = rng.gen_range(0..self.dim_u);
            coeffs[i] = &coeffs[i] + &Rat::one();
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "dim_u": self.dim_u,
            "nu": self.nu.iter().map(|r| r.iter().map(Rat::to_string).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "products": self.products.iter().map(|(k, t)| json!({
                "k": k,
                "entries": t.iter().map(|(alpha, c)| json!({
                    "alpha": alpha,
                    "coeffs": c.iter().map(Rat::to_string).collect::<Vec<_>>(),
                })).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, DcritError> {
        let dim_u = v["dim_u"].as_u64().unwrap_or(0) as usize;
        let parse_rat = |x: &Value| -> Rat {
            x.as_str().and_then(|s| s.parse().ok()).unwrap_or_else(Rat::zero)
        };
        let nu: Vec<Vec<Rat>> = v["nu"]
            .as_array()
            .map(|rows| {
                rows.iter()
                    .map(|r| r.as_array().map(|xs| xs.iter().map(parse_rat).collect()).unwrap_or_default())
                    .collect()
            })
            .unwrap_or_default();
        let mut products = BTreeMap::new();
        for p in v["products"].as_array().unwrap_or(&Vec::new()) {
            let k = p["k"].as_u64().unwrap_or(0) as usize;
            let mut tensor = BTreeMap::new();
            for e in p["entries"].as_array().unwrap_or(&Vec::new()) {
                let alpha: Monomial = e["alpha"]
                    .as_array()
                    .map(|xs| xs.iter().map(|x| x.as_u64().unwrap_or(0) as u32).collect())
                    .unwrap_or_default();
                let coeffs = e["coeffs"]
                    .as_array()
                    .map(|xs| xs.iter().map(parse_rat).collect())
                    .unwrap_or_default();
                tensor.insert(alpha, coeffs);
            }
            products.insert(k, tensor);
        }
        CyclicLInfinity::new(dim_u, nu, products)
    }
}

/// Report from the gradient-identity check df = Σ 1/k! l_k∨.
#[derive(Debug, Clone)]
pub struct GradientReport {
    pub holds: bool,
    pub max_deviation: Rat,
    /// (generator index, monomial, derivative coeff, adjoint coeff).
    pub first_discrepancy: Option<(usize, Monomial, Rat, Rat)>,
}

/// Check df = Σ 1/k! l_k∨ coefficientwise at the given truncation.  The
/// potential side differentiates the symmetrized contraction; the adjoint
/// side contracts without symmetrizing.  A false result is a report, not an
/// error.
pub fn verify_lemma_ax(data: &CyclicLInfinity, trunc: usize) -> GradientReport {
    let algebra = data.coordinate_algebra(trunc);
    let f = data.potential_raw(&algebra);
    let adjoint = data.adjoint_map(trunc);
    let mut max_dev = Rat::zero();
    let mut first = None;
    for i in 0..data.dim_u() {
        let df = f.partial_derivative(&format!("x{}", i + 1)).expect("own generator");
        let diff = df.sub(&adjoint[i]).expect("same algebra");
        for (m, c) in diff.terms() {
            if first.is_none() {
                first = Some((i, m.clone(), df.coeff(m), adjoint[i].coeff(m)));
            }
            if c.abs() > max_dev {
                max_dev = c.abs();
            }
        }
    }
    GradientReport { holds: first.is_none(), max_deviation: max_dev, first_discrepancy: first }
}

/// A Koszul dg-algebra presented by odd generators with polynomial
/// differential images, realized degreewise with widening monomial windows.
pub struct KoszulDga {
    pub algebra: AlgebraRef,
    pub odd_names: Vec<String>,
    pub even_names: Vec<String>,
    pub d_images: Vec<PolyElement>,
    pub base_window: usize,
    pub growth: usize,
    pub complex: ChainComplex,
    /// bases[p] = monomial basis of the degree −p piece.
    pub bases: Vec<Vec<Monomial>>,
}

impl KoszulDga {
    /// Build the complex Λ(odd) ⊗ Sym(even) with d(odd_i) = images[i],
    /// extended as an odd derivation.  The degree −p piece carries even
    /// monomials of degree ≤ D + (p_max − p + 1)·s where s is the largest
    /// image degree, so the differential never truncates and every window
    /// keeps one step of slack over the reporting bound D.
    pub fn new(
        odd_names: &[String],
        even_names: &[String],
        images: &[PolyElement],
        window: usize,
    ) -> Result<Self, DcritError> {
        assert_eq!(odd_names.len(), images.len());
        let growth = images.iter().filter_map(PolyElement::max_degree).max().unwrap_or(0);
        let p_max = odd_names.len();
        let trunc = window + (p_max + 2) * growth + p_max;
        let mut gens: Vec<Generator> = Vec::new();
        for n in odd_names {
            gens.push(Generator { name: n.clone(), degree: -1, parity: Parity::Odd });
        }
        for n in even_names {
            gens.push(Generator { name: n.clone(), degree: 0, parity: Parity::Even });
        }
        let algebra = TruncatedPolyAlgebra::new(gens, trunc)?;
        let images: Vec<PolyElement> = images
            .iter()
            .map(|im| transplant(im, &algebra))
            .collect::<Result<_, _>>()?;
        let odd_idx: Vec<usize> = odd_names
            .iter()
            .map(|n| algebra.gen_index(n))
            .collect::<Result<_, _>>()?;
        let even_idx: Vec<usize> = even_names
            .iter()
            .map(|n| algebra.gen_index(n))
            .collect::<Result<_, _>>()?;

        // Degreewise bases: odd subsets of size p times windowed even part.
        let mut bases: Vec<Vec<Monomial>> = Vec::with_capacity(p_max + 1);
        for p in 0..=p_max {
            let bound = window + (p_max - p + 1) * growth;
            let mut monos = Vec::new();
            for subset in subsets_of_size(&odd_idx, p) {
                for even in even_monomials(&algebra, &even_idx, bound) {
                    let mut m = even;
                    for &o in &subset {
                        m[o] = 1;
                    }
                    monos.push(m);
                }
            }
            monos.sort_by(|a, b| algebra.mono_cmp(a, b));
            bases.push(monos);
        }

        // Differential matrices C^{-p} → C^{-p+1}.
        let name_of =
            |i: usize| -> &str { &algebra.gens()[i].name };
        let mut diffs = Vec::with_capacity(p_max);
        for p in (1..=p_max).rev() {
            let src = &bases[p];
            let dst = &bases[p - 1];
            let index: BTreeMap<&Monomial, usize> =
                dst.iter().enumerate().map(|(i, m)| (m, i)).collect();
            let mut mat = SparseMatrix::zero(dst.len(), src.len());
            for (col, m) in src.iter().enumerate() {
                let elem = PolyElement::from_terms(&algebra, [(m.clone(), Rat::one())]);
                let mut image = PolyElement::zero(&algebra);
                for (slot, &o) in odd_idx.iter().enumerate() {
                    if m[o] == 0 {
                        continue;
                    }
                    let partial = elem.partial_derivative(name_of(o))?;
                    image = image.add(&images[slot].mul(&partial)?)?;
                }
                for (im, c) in image.terms() {
                    let row = *index
                        .get(im)
                        .expect("windowed image stays inside the next basis");
                    mat.add_to(row, col, c);
                }
            }
            diffs.push(mat);
        }
        let dims: Vec<usize> = (0..=p_max).rev().map(|p| bases[p].len()).collect();
        let complex = ChainComplex::new(-(p_max as i64), dims, diffs)
            .expect("Koszul differential squares to zero");
        Ok(KoszulDga {
            algebra,
            odd_names: odd_names.to_vec(),
            even_names: even_names.to_vec(),
            d_images: images,
            base_window: window,
            growth,
            complex,
            bases,
        })
    }

    /// Cohomology dimensions read through the reporting window: kernels are
    /// counted on monomials of even degree ≤ D, images are taken from the
    /// slack windows and intersected back into the D-window.  This matches
    /// the formal-completion answer whenever the window is large enough,
    /// which the D → D+2 stabilization comparison certifies.
    pub fn cohomology_dims(&self) -> BTreeMap<i64, usize> {
        let p_max = self.odd_names.len();
        let mut out = BTreeMap::new();
        for p in 0..=p_max {
            let inside: Vec<bool> = self.bases[p]
                .iter()
                .map(|m| self.algebra.word_degree(m) - p <= self.base_window)
                .collect();
            let inside_count = inside.iter().filter(|&&b| b).count();
            let deg = -(p as i64);
            // Kernel of d restricted to the D-window columns.
            let ker = {
                let full = self.complex.diff(deg);
                let mut col_map = vec![None; inside.len()];
                let mut next = 0;
                for (i, &b) in inside.iter().enumerate() {
                    if b {
                        col_map[i] = Some(next);
                        next += 1;
                    }
                }
                let mut restricted = SparseMatrix::zero(full.rows(), inside_count);
                for (r, c, v) in full.iter() {
                    if let Some(nc) = col_map[c] {
                        restricted.set(r, nc, v.clone());
                    }
                }
                inside_count - restricted.rank()
            };
            // Image from the slack window, met with the D-window.
            let im = crate::sparse::image_meet_coords_dim(&self.complex.diff(deg - 1), &inside);
            out.insert(deg, ker - im);
        }
        out
    }
}

fn subsets_of_size(items: &[usize], p: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(items: &[usize], p: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == p {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            cur.push(items[i]);
            rec(items, p, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(items, p, 0, &mut cur, &mut out);
    out
}

fn even_monomials(algebra: &AlgebraRef, even_idx: &[usize], bound: usize) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; algebra.num_gens()];
    fn rec(
        even_idx: &[usize],
        slot: usize,
        rem: usize,
        cur: &mut Monomial,
        out: &mut Vec<Monomial>,
    ) {
        if slot == even_idx.len() {
            out.push(cur.clone());
            return;
        }
        for e in 0..=rem {
            cur[even_idx[slot]] = e as u32;
            rec(even_idx, slot + 1, rem - e, cur, out);
        }
        cur[even_idx[slot]] = 0;
    }
    rec(even_idx, 0, bound, &mut cur, &mut out);
    out
}

/// Move an element into another algebra, matching generators by name.
/// Source generators missing from the target are fine as long as the
/// element does not use them.
pub fn transplant(e: &PolyElement, target: &AlgebraRef) -> Result<PolyElement, PolyError> {
    let src = e.algebra();
    let map: Vec<Option<usize>> =
        src.gens().iter().map(|g| target.gen_index(&g.name).ok()).collect();
    let mut out = PolyElement::zero(target);
    for (m, c) in e.terms() {
        let mut nm = vec![0u32; target.num_gens()];
        for (i, &ex) in m.iter().enumerate() {
            if ex == 0 {
                continue;
            }
            match map[i] {
                Some(j) => nm[j] = ex,
                None => {
                    return Err(PolyError::UnknownGenerator(src.gens()[i].name.clone()))
                }
            }
        }
        out.add_term(nm, c.clone());
    }
    Ok(out)
}

/// The Koszul model of the derived critical locus of `f`: odd generators
/// ξ_i in degree −1 mapping to ∂f/∂x_i.
pub fn dcrit_dga(f: &PolyElement, window: usize) -> Result<KoszulDga, DcritError> {
    let algebra = f.algebra();
    assert!(algebra.is_all_even(), "potential must live in an even polynomial ring");
    let even_names: Vec<String> = algebra.gens().iter().map(|g| g.name.clone()).collect();
    let odd_names: Vec<String> = even_names.iter().map(|n| format!("xi_{n}")).collect();
    let images: Vec<PolyElement> = even_names
        .iter()
        .map(|n| f.partial_derivative(n))
        .collect::<Result<_, _>>()?;
    KoszulDga::new(&odd_names, &even_names, &images, window)
}

/// Normal-direction data on top of a cyclic base: the three product
/// families of the Ext algebra on the total space, linear in the normal
/// slots.  `p1[k]` maps Sym^{k-1}(U) ⊗ W₁ → W₂, `p2[k]` maps
/// Sym^{k-1}(U) ⊗ W₂∨ → W₁∨, `p3[k]` maps Sym^{k-2}(U) ⊗ W₂∨ ⊗ W₁ → U∨.
#[derive(Debug, Clone)]
pub struct PlusModelData {
    pub base: CyclicLInfinity,
    pub w1: usize,
    pub w2: usize,
    /// p1[k][α][a][b], |α| = k−1.
    pub p1: BTreeMap<usize, BTreeMap<Monomial, Vec<Vec<Rat>>>>,
    /// p2[k][α][b][a], |α| = k−1.
    pub p2: BTreeMap<usize, BTreeMap<Monomial, Vec<Vec<Rat>>>>,
    /// p3[k][α][b][a][i], |α| = k−2.
    pub p3: BTreeMap<usize, BTreeMap<Monomial, Vec<Vec<Vec<Rat>>>>>,
}

impl PlusModelData {
    /// No normal directions: the plus model degenerates to dCrit(f).
    pub fn trivial(base: CyclicLInfinity) -> Self {
        PlusModelData {
            base,
            w1: 0,
            w2: 0,
            p1: BTreeMap::new(),
            p2: BTreeMap::new(),
            p3: BTreeMap::new(),
        }
    }

    /// Build the families from an explicit g = Σ G[α][a][b] x^α p_a q_b.
    pub fn from_g_tensor(
        base: CyclicLInfinity,
        w1: usize,
        w2: usize,
        g: &BTreeMap<Monomial, Vec<Vec<Rat>>>,
    ) -> Self {
        let mut p1: BTreeMap<usize, BTreeMap<Monomial, Vec<Vec<Rat>>>> = BTreeMap::new();
        let mut p2: BTreeMap<usize, BTreeMap<Monomial, Vec<Vec<Rat>>>> = BTreeMap::new();
        let mut p3: BTreeMap<usize, BTreeMap<Monomial, Vec<Vec<Vec<Rat>>>>> = BTreeMap::new();
        let dim_u = base.dim_u();
        for (alpha, gab) in g {
            let k = alpha.iter().sum::<u32>() as usize + 1;
            p1.entry(k).or_default().insert(alpha.clone(), gab.clone());
            let mut transposed = vec![vec![Rat::zero(); w1]; w2];
            for (a, row) in gab.iter().enumerate() {
                for (b, c) in row.iter().enumerate() {
                    transposed[b][a] = c.clone();
                }
            }
            p2.entry(k).or_default().insert(alpha.clone(), transposed);
            // x-derivatives: coefficient of x^{α−e_i} picks up α_i.
            for i in 0..dim_u {
                if alpha[i] == 0 {
                    continue;
                }
                let mut da = alpha.clone();
                da[i] -= 1;
                let kk = da.iter().sum::<u32>() as usize + 2;
                let entry = p3
                    .entry(kk)
                    .or_default()
                    .entry(da)
                    .or_insert_with(|| vec![vec![vec![Rat::zero(); dim_u]; w1]; w2]);
                for (a, row) in gab.iter().enumerate() {
                    for (b, c) in row.iter().enumerate() {
                        entry[b][a][i] =
                            &entry[b][a][i] + &(c * &Rat::from_int(alpha[i] as i64));
                    }
                }
            }
        }
        PlusModelData { base, w1, w2, p1, p2, p3 }
    }

    /// Cross-consistency: the three families must be the coefficient
    /// tensors of a single g linear in the two normal slots.
    pub fn check_consistency(&self) -> Result<(), DcritError> {
        // p2 must be the (a,b)-transpose of p1.
        for (k, tensor) in &self.p2 {
            for (alpha, tba) in tensor {
                for (b, row) in tba.iter().enumerate() {
                    for (a, c) in row.iter().enumerate() {
                        let g = self
                            .p1
                            .get(k)
                            .and_then(|t| t.get(alpha))
                            .map(|gab| gab[a][b].clone())
                            .unwrap_or_else(Rat::zero);
                        if *c != g {
                            return Err(DcritError::InconsistentNormalProducts(format!(
                                "p2 ≠ p1ᵀ at k={k}, alpha={alpha:?}, a={a}, b={b}"
                            )));
                        }
                    }
                }
            }
        }
        for (k, tensor) in &self.p1 {
            for (alpha, gab) in tensor {
                for (a, row) in gab.iter().enumerate() {
                    for (b, c) in row.iter().enumerate() {
                        let t = self
                            .p2
                            .get(k)
                            .and_then(|x| x.get(alpha))
                            .map(|tba| tba[b][a].clone())
                            .unwrap_or_else(Rat::zero);
                        if *c != t {
                            return Err(DcritError::InconsistentNormalProducts(format!(
                                "p1 ≠ p2ᵀ at k={k}, alpha={alpha:?}"
                            )));
                        }
                    }
                }
            }
        }
        // p3 must be the x-gradient of p1's generating function.
        let dim_u = self.base.dim_u();
        let mut expected: BTreeMap<(usize, Monomial, usize, usize, usize), Rat> = BTreeMap::new();
        for (_, tensor) in &self.p1 {
            for (alpha, gab) in tensor {
                for i in 0..dim_u {
                    if alpha[i] == 0 {
                        continue;
                    }
                    let mut da = alpha.clone();
                    da[i] -= 1;
                    let kk = da.iter().sum::<u32>() as usize + 2;
                    for (a, row) in gab.iter().enumerate() {
                        for (b, c) in row.iter().enumerate() {
                            if !c.is_zero() {
                                let key = (kk, da.clone(), b, a, i);
                                let v = expected.entry(key).or_insert_with(Rat::zero);
                                *v += &(c * &Rat::from_int(alpha[i] as i64));
                            }
                        }
                    }
                }
            }
        }
        let mut stated: BTreeMap<(usize, Monomial, usize, usize, usize), Rat> = BTreeMap::new();
        for (k, tensor) in &self.p3 {
            for (alpha, tb) in tensor {
                for (b, ta) in tb.iter().enumerate() {
                    for (a, ti) in ta.iter().enumerate() {
                        for (i, c) in ti.iter().enumerate() {
                            if !c.is_zero() {
                                stated.insert((*k, alpha.clone(), b, a, i), c.clone());
                            }
                        }
                    }
                }
            }
        }
        if expected != stated {
            let witness = expected
                .iter()
                .find(|(k, v)| stated.get(k) != Some(v))
                .map(|(k, _)| format!("{k:?}"))
                .or_else(|| {
                    stated
                        .iter()
                        .find(|(k, v)| expected.get(k) != Some(v))
                        .map(|(k, _)| format!("{k:?}"))
                })
                .unwrap_or_default();
            return Err(DcritError::InconsistentNormalProducts(format!(
                "p3 is not the x-gradient of p1 (first mismatch at {witness})"
            )));
        }
        Ok(())
    }

    fn names(&self) -> (Vec<String>, Vec<String>) {
        let dim_u = self.base.dim_u();
        let mut even: Vec<String> = (1..=dim_u).map(|i| format!("x{i}")).collect();
        even.extend((1..=self.w1).map(|a| format!("p{a}")));
        even.extend((1..=self.w2).map(|b| format!("q{b}")));
        let mut odd: Vec<String> = (1..=dim_u).map(|i| format!("xi{i}")).collect();
        odd.extend((1..=self.w2).map(|b| format!("eta{b}")));
        odd.extend((1..=self.w1).map(|a| format!("zeta{a}")));
        (odd, even)
    }

    /// g as a polynomial in Sym(U∨ ⊕ W₁∨ ⊕ W₂).
    pub fn g_poly(&self, algebra: &AlgebraRef) -> Result<PolyElement, DcritError> {
        let dim_u = self.base.dim_u();
        let mut g = PolyElement::zero(algebra);
        for (_, tensor) in &self.p1 {
            for (alpha, gab) in tensor {
                for (a, row) in gab.iter().enumerate() {
                    for (b, c) in row.iter().enumerate() {
                        if c.is_zero() {
                            continue;
                        }
                        let mut mono = vec![0u32; algebra.num_gens()];
                        for i in 0..dim_u {
                            mono[algebra.gen_index(&format!("x{}", i + 1))?] = alpha[i];
                        }
                        mono[algebra.gen_index(&format!("p{}", a + 1))?] += 1;
                        mono[algebra.gen_index(&format!("q{}", b + 1))?] += 1;
                        g.add_term(mono, c.clone());
                    }
                }
            }
        }
        Ok(g)
    }

    /// The potential W = f·g on U ⊕ W₂∨ ⊕ W₁ as a polynomial (f alone when
    /// there are no normal directions).
    pub fn total_potential(&self, trunc: usize) -> Result<PolyElement, DcritError> {
        let (_, even) = self.names();
        let names: Vec<&str> = even.iter().map(String::as_str).collect();
        let algebra = TruncatedPolyAlgebra::even(&names, trunc);
        let f = transplant(&self.base.potential(trunc)?, &algebra)?;
        if self.w1 == 0 && self.w2 == 0 {
            return Ok(f);
        }
        let g = self.g_poly(&algebra)?;
        Ok(f.mul(&g)?)
    }

    /// The A₊ dg-algebra: differential assembled from the product tensors
    /// (adjoint route for the f-part, family tensors for the g-part).
    pub fn build_plus_model(&self, window: usize) -> Result<KoszulDga, DcritError> {
        self.check_consistency()?;
        let (odd, even) = self.names();
        let dim_u = self.base.dim_u();
        // Generous coefficient bound for assembling the images.
        let deg_f = self.base.max_order() + 1;
        let deg_g = self.p1.keys().max().copied().unwrap_or(1) + 1;
        let bound = window + (odd.len() + 1) * (deg_f + deg_g) + 2;
        let names: Vec<&str> = even.iter().map(String::as_str).collect();
        let algebra = TruncatedPolyAlgebra::even(&names, bound);
        let adjoint: Vec<PolyElement> = self
            .base
            .adjoint_map(bound)
            .into_iter()
            .map(|a| transplant(&a, &algebra))
            .collect::<Result<_, _>>()?;
        let f = transplant(&self.base.potential_raw(&self.base.coordinate_algebra(bound)), &algebra)?;
        let trivial = self.w1 == 0 && self.w2 == 0;
        let g = if trivial { PolyElement::one(&algebra) } else { self.g_poly(&algebra)? };

        let mut images: Vec<PolyElement> = Vec::new();
        // dξ_i = l∨_i · g + f · ∂g/∂x_i (from the p3 family).
        for i in 0..dim_u {
            let mut dgi = PolyElement::zero(&algebra);
            for (_, tensor) in &self.p3 {
                for (alpha, tb) in tensor {
                    for (b, ta) in tb.iter().enumerate() {
                        for (a, ti) in ta.iter().enumerate() {
                            let c = &ti[i];
                            if c.is_zero() {
                                continue;
                            }
                            let mut mono = vec![0u32; algebra.num_gens()];
                            for (j, &e) in alpha.iter().enumerate() {
                                mono[algebra.gen_index(&format!("x{}", j + 1))?] = e;
                            }
                            mono[algebra.gen_index(&format!("p{}", a + 1))?] += 1;
                            mono[algebra.gen_index(&format!("q{}", b + 1))?] += 1;
                            dgi.add_term(mono, c.clone());
                        }
                    }
                }
            }
            images.push(adjoint[i].mul(&g)?.add(&f.mul(&dgi)?)?);
        }
        // dη_b = f · ∂g/∂q_b (from the p2 family).
        for b in 0..self.w2 {
            let mut dgq = PolyElement::zero(&algebra);
            for (_, tensor) in &self.p2 {
                for (alpha, tba) in tensor {
                    for (a, c) in tba[b].iter().enumerate() {
                        if c.is_zero() {
                            continue;
                        }
                        let mut mono = vec![0u32; algebra.num_gens()];
                        for (j, &e) in alpha.iter().enumerate() {
                            mono[algebra.gen_index(&format!("x{}", j + 1))?] = e;
                        }
                        mono[algebra.gen_index(&format!("p{}", a + 1))?] += 1;
                        dgq.add_term(mono, c.clone());
                    }
                }
            }
            images.push(f.mul(&dgq)?);
        }
        // dζ_a = f · ∂g/∂p_a (from the p1 family).
        for a in 0..self.w1 {
            let mut dgp = PolyElement::zero(&algebra);
            for (_, tensor) in &self.p1 {
                for (alpha, gab) in tensor {
                    for (b, c) in gab[a].iter().enumerate() {
                        if c.is_zero() {
                            continue;
                        }
                        let mut mono = vec![0u32; algebra.num_gens()];
                        for (j, &e) in alpha.iter().enumerate() {
                            mono[algebra.gen_index(&format!("x{}", j + 1))?] = e;
                        }
                        mono[algebra.gen_index(&format!("q{}", b + 1))?] += 1;
                        dgp.add_term(mono, c.clone());
                    }
                }
            }
            images.push(f.mul(&dgp)?);
        }
        KoszulDga::new(&odd, &even, &images, window)
    }

    /// Compare the plus model against dCrit(f·g) degree by degree.
    pub fn verify_lemma_fg(&self, window: usize) -> Result<PlusReport, DcritError> {
        let plus = self.build_plus_model(window)?;
        let w = self.total_potential(plus.algebra.trunc())?;
        let direct = dcrit_dga(&w, window)?;
        let a = plus.cohomology_dims();
        let b = direct.cohomology_dims();
        Ok(PlusReport { plus_dims: a.clone(), dcrit_dims: b.clone(), equal: a == b })
    }

    pub fn to_json(&self) -> Value {
        let g_entries: Vec<Value> = self
            .p1
            .values()
            .flat_map(|tensor| {
                tensor.iter().map(|(alpha, gab)| {
                    json!({
                        "alpha": alpha,
                        "coeffs": gab
                            .iter()
                            .map(|row| row.iter().map(Rat::to_string).collect::<Vec<_>>())
                            .collect::<Vec<_>>(),
                    })
                })
            })
            .collect();
        json!({
            "base": self.base.to_json(),
            "w1": self.w1,
            "w2": self.w2,
            "g": g_entries,
        })
    }

    /// Parse from the g-tensor presentation; the three product families are
    /// reassembled from it, so the stored data is consistent by
    /// construction and the consistency check is the read-back guard.
    pub fn from_json(v: &Value) -> Result<Self, DcritError> {
        let base = CyclicLInfinity::from_json(&v["base"])?;
        let w1 = v["w1"].as_u64().unwrap_or(0) as usize;
        let w2 = v["w2"].as_u64().unwrap_or(0) as usize;
        let mut g = BTreeMap::new();
        for e in v["g"].as_array().unwrap_or(&Vec::new()) {
            let alpha: Monomial = e["alpha"]
                .as_array()
                .map(|xs| xs.iter().map(|x| x.as_u64().unwrap_or(0) as u32).collect())
                .unwrap_or_default();
            let coeffs: Vec<Vec<Rat>> = e["coeffs"]
                .as_array()
                .map(|rows| {
                    rows.iter()
                        .map(|r| {
                            r.as_array()
                                .map(|xs| {
                                    xs.iter()
                                        .map(|x| {
                                            x.as_str()
                                                .and_then(|s| s.parse().ok())
                                                .unwrap_or_else(Rat::zero)
                                        })
                                        .collect()
                                })
                                .unwrap_or_default()
                        })
                        .collect()
                })
                .unwrap_or_default();
            g.insert(alpha, coeffs);
        }
        Ok(Self::from_g_tensor(base, w1, w2, &g))
    }

    pub fn random(dim_u: usize, w1: usize, w2: usize, k_max: usize, rng: &mut impl Rng) -> Self {
        let base = CyclicLInfinity::random(dim_u, k_max, rng);
        let mut g: BTreeMap<Monomial, Vec<Vec<Rat>>> = BTreeMap::new();
        for deg in 1..k_max.max(2) {
            for alpha in exponent_vectors(dim_u, deg) {
                if !rng.gen_bool(0.6) {
                    continue;
                }
                let mut gab = vec![vec![Rat::zero(); w2]; w1];
                let mut nonzero = false;
                for row in gab.iter_mut() {
                    for c in row.iter_mut() {
                        if rng.gen_bool(0.7) {
                            *c = Rat::from_int(rng.gen_range(-3..=3));
                            nonzero = nonzero || !c.is_zero();
                        }
                    }
                }
                if nonzero {
                    g.insert(alpha, gab);
                }
            }
        }
        Self::from_g_tensor(base, w1, w2, &g)
    }
}

/// Result of the plus-model comparison.
#[derive(Debug, Clone)]
pub struct PlusReport {
    pub plus_dims: BTreeMap<i64, usize>,
    pub dcrit_dims: BTreeMap<i64, usize>,
    pub equal: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn one_dim_cubic(c: i64) -> CyclicLInfinity {
        // u = 1, ν(e, e∨) = 1, l₂(e,e) = c·e∨.
        let mut products = BTreeMap::new();
        let mut t2 = BTreeMap::new();
        t2.insert(vec![2u32], vec![Rat::from_int(c)]);
        products.insert(2usize, t2);
        CyclicLInfinity::new(1, vec![vec![Rat::one()]], products).unwrap()
    }

    #[test]
    fn potential_of_zero_products() {
        let data = CyclicLInfinity::new(2, vec![
            vec![Rat::one(), Rat::zero()],
            vec![Rat::zero(), Rat::one()],
        ], BTreeMap::new())
        .unwrap();
        assert!(data.potential(8).unwrap().is_zero());
        assert!(data.adjoint_map(8).iter().all(PolyElement::is_zero));
    }

    #[test]
    fn one_dimensional_cubic_potential() {
        let data = one_dim_cubic(5);
        let f = data.potential(8).unwrap();
        let algebra = data.coordinate_algebra(8);
        // f = 5 x³/6.
        assert_eq!(f, PolyElement::parse(&algebra, "5/6 * x1^3").unwrap());
        // adjoint: e ↦ 5 x²/2.
        let adj = data.adjoint_map(8);
        assert_eq!(adj[0], PolyElement::parse(&algebra, "5/2 * x1^2").unwrap());
        let report = verify_lemma_ax(&data, 8);
        assert!(report.holds);
    }

    #[test]
    fn potential_matches_tuple_symmetrization_oracle() {
        // Independent oracle: expand ν(l_k(u,…,u), u) over all index
        // tuples instead of the multinomial bookkeeping, and compare
        // coefficient tensors.
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        for _ in 0..10 {
            let u = rng.gen_range(1..=2);
            let k_max = rng.gen_range(2..=3);
            let data = CyclicLInfinity::random(u, k_max, &mut rng);
            let algebra = data.coordinate_algebra(8);
            let f = data.potential(8).unwrap();
            let mut oracle = PolyElement::zero(&algebra);
            for k in 2..=k_max {
                let scale = Rat::inv_factorial(k as u32 + 1);
                let mut tuples = vec![vec![0usize; k]];
                for slot in 0..k {
                    let mut next = Vec::new();
                    for t in &tuples {
                        for i in 0..u {
                            let mut nt = t.clone();
                            nt[slot] = i;
                            next.push(nt);
                        }
                    }
                    tuples = next;
                }
                for t in &tuples {
                    let mut alpha = vec![0u32; u];
                    for &i in t {
                        alpha[i] += 1;
                    }
                    for j in 0..u {
                        let c = data.contracted(k, &alpha, j);
                        if c.is_zero() {
                            continue;
                        }
                        let mut mono = alpha.clone();
                        mono[j] += 1;
                        oracle.add_term(mono, &c * &scale);
                    }
                }
            }
            assert_eq!(f, oracle, "tuple-expansion oracle disagrees");
        }
    }

    #[test]
    fn adjoint_matches_transposition_oracle() {
        // Independent oracle for the adjoint: enumerate all k-tuples and
        // contract against each basis vector with the 1/k! factor.
        let mut rng = ChaCha8Rng::seed_from_u64(103);
        for _ in 0..10 {
            let u = rng.gen_range(1..=2);
            let k_max = rng.gen_range(2..=3);
            let data = CyclicLInfinity::random(u, k_max, &mut rng);
            let algebra = data.coordinate_algebra(8);
            let adjoint = data.adjoint_map(8);
            for i in 0..u {
                let mut oracle = PolyElement::zero(&algebra);
                for k in 2..=k_max {
                    let scale = Rat::inv_factorial(k as u32);
                    let mut tuples = vec![vec![0usize; k]];
                    for slot in 0..k {
                        let mut next = Vec::new();
                        for t in &tuples {
                            for j in 0..u {
                                let mut nt = t.clone();
                                nt[slot] = j;
                                next.push(nt);
                            }
                        }
                        tuples = next;
                    }
                    for t in &tuples {
                        let mut alpha = vec![0u32; u];
                        for &j in t {
                            alpha[j] += 1;
                        }
                        let c = data.contracted(k, &alpha, i);
                        if !c.is_zero() {
                            oracle.add_term(alpha, &c * &scale);
                        }
                    }
                }
                assert_eq!(adjoint[i], oracle, "transposition oracle disagrees at basis {i}");
            }
        }
    }

    #[test]
    fn plus_model_json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(104);
        let data = PlusModelData::random(1, 1, 1, 3, &mut rng);
        let v = data.to_json();
        let back = PlusModelData::from_json(&v).unwrap();
        back.check_consistency().unwrap();
        assert_eq!(data.p1, back.p1);
        assert_eq!(data.p2, back.p2);
        assert_eq!(data.p3, back.p3);
    }

    #[test]
    fn random_instances_satisfy_gradient_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for trial in 0..30 {
            let u = rng.gen_range(1..=3);
            let k = rng.gen_range(2..=4);
            let data = CyclicLInfinity::random(u, k, &mut rng);
            data.check_cyclicity().expect("random instances are cyclic by construction");
            let report = verify_lemma_ax(&data, 8);
            assert!(report.holds, "trial {trial}: deviation {}", report.max_deviation);
        }
    }

    #[test]
    fn broken_cyclicity_is_detected_and_located() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut found_violation = false;
        for _ in 0..20 {
            let data = CyclicLInfinity::random(2, 3, &mut rng).perturbed(&mut rng);
            if data.check_cyclicity().is_err() {
                found_violation = true;
                let report = verify_lemma_ax(&data, 8);
                assert!(!report.holds, "broken cyclicity must break the gradient identity");
                assert!(report.first_discrepancy.is_some());
                assert!(data.potential(8).is_err(), "potential must refuse non-cyclic data");
            }
        }
        assert!(found_violation);
    }

    #[test]
    fn dcrit_of_zero_potential() {
        let algebra = TruncatedPolyAlgebra::even(&["x", "y"], 4);
        let f = PolyElement::zero(&algebra);
        let dga = dcrit_dga(&f, 4).unwrap();
        let h = dga.cohomology_dims();
        let n = crate::poly::sym_basis_dim(2, 0)
            + crate::poly::sym_basis_dim(2, 1)
            + crate::poly::sym_basis_dim(2, 2)
            + crate::poly::sym_basis_dim(2, 3)
            + crate::poly::sym_basis_dim(2, 4);
        assert_eq!(h[&0], n);
        assert_eq!(h[&-1], 2 * n);
        assert_eq!(h[&-2], n);
    }

    #[test]
    fn dcrit_of_regular_quadratic() {
        let algebra = TruncatedPolyAlgebra::even(&["x", "y"], 6);
        let f = PolyElement::parse(&algebra, "1/2*x^2 + 1/2*y^2").unwrap();
        let dga = dcrit_dga(&f, 6).unwrap();
        let h = dga.cohomology_dims();
        assert_eq!(h[&0], 1, "critical locus is the reduced origin");
        assert_eq!(h[&-1], 0);
        assert_eq!(h[&-2], 0);
    }

    #[test]
    fn dcrit_of_cubic_in_one_variable() {
        let algebra = TruncatedPolyAlgebra::even(&["x"], 8);
        let f = PolyElement::parse(&algebra, "1/3*x^3").unwrap();
        let dga = dcrit_dga(&f, 8).unwrap();
        let h = dga.cohomology_dims();
        assert_eq!(h[&0], 2, "Q[x]/(x²) has dimension 2");
        assert_eq!(h[&-1], 0);
    }

    #[test]
    fn knoerrer_stability_at_desk_scale() {
        // Adding a nondegenerate quadratic in fresh variables leaves the
        // cohomology dimensions unchanged.
        let a1 = TruncatedPolyAlgebra::even(&["x"], 8);
        let f1 = PolyElement::parse(&a1, "1/3*x^3").unwrap();
        let h1 = dcrit_dga(&f1, 8).unwrap().cohomology_dims();
        let a2 = TruncatedPolyAlgebra::even(&["x", "z"], 8);
        let f2 = PolyElement::parse(&a2, "1/3*x^3 + 1/2*z^2").unwrap();
        let h2 = dcrit_dga(&f2, 8).unwrap().cohomology_dims();
        let nonzero1: Vec<usize> = h1.values().copied().filter(|&d| d > 0).collect();
        let nonzero2: Vec<usize> = h2.values().copied().filter(|&d| d > 0).collect();
        assert_eq!(nonzero1, nonzero2);
    }

    #[test]
    fn trivial_plus_model_reduces_to_dcrit() {
        let data = PlusModelData::trivial(one_dim_cubic(6));
        let plus = data.build_plus_model(6).unwrap();
        let f = data.base.potential(plus.algebra.trunc()).unwrap();
        let direct = dcrit_dga(&f, 6).unwrap();
        assert_eq!(plus.cohomology_dims(), direct.cohomology_dims());
    }

    #[test]
    fn plus_model_matches_dcrit_of_fg_one_dim() {
        // U one-dimensional, W₁ = W₂ = 1, g = x·p·q.
        let base = one_dim_cubic(6);
        let mut g = BTreeMap::new();
        g.insert(vec![1u32], vec![vec![Rat::one()]]);
        let data = PlusModelData::from_g_tensor(base, 1, 1, &g);
        data.check_consistency().unwrap();
        let report = data.verify_lemma_fg(4).unwrap();
        assert!(report.equal, "plus {:?} vs dcrit {:?}", report.plus_dims, report.dcrit_dims);
        // Same at a higher window.
        let report = data.verify_lemma_fg(6).unwrap();
        assert!(report.equal);
    }

    #[test]
    fn plus_model_differential_matches_hand_koszul() {
        // The assembled images must literally be the partials of W = f·g.
        let base = one_dim_cubic(6);
        let mut g = BTreeMap::new();
        g.insert(vec![1u32], vec![vec![Rat::one()]]);
        let data = PlusModelData::from_g_tensor(base, 1, 1, &g);
        let plus = data.build_plus_model(4).unwrap();
        let w = data.total_potential(plus.algebra.trunc()).unwrap();
        let w = transplant(&w, &plus.algebra).unwrap();
        for (odd, image) in plus.odd_names.iter().zip(&plus.d_images) {
            let var = match odd.as_str() {
                "xi1" => "x1",
                "eta1" => "q1",
                "zeta1" => "p1",
                other => panic!("unexpected generator {other}"),
            };
            assert_eq!(image, &w.partial_derivative(var).unwrap(), "d{odd}");
        }
    }

    #[test]
    fn inconsistent_normal_products_rejected() {
        let base = one_dim_cubic(6);
        let mut g = BTreeMap::new();
        g.insert(vec![1u32], vec![vec![Rat::one()]]);
        let mut data = PlusModelData::from_g_tensor(base, 1, 1, &g);
        // Corrupt p2.
        for (_, tensor) in data.p2.iter_mut() {
            for (_, tba) in tensor.iter_mut() {
                tba[0][0] = &tba[0][0] + &Rat::one();
            }
        }
        assert!(data.check_consistency().is_err());
        assert!(data.build_plus_model(4).is_err());
    }

    #[test]
    fn random_plus_models_have_square_zero_differential() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..5 {
            let data = PlusModelData::random(1, 1, 1, 3, &mut rng);
            // Construction runs the d² = 0 check inside ChainComplex::new.
            let report = data.verify_lemma_fg(3).unwrap();
            assert!(report.equal);
        }
    }
}
