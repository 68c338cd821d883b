//! Line-bundle cohomology on projective space and the Ext table of the
//! quintic–hyperplane complete intersection.
//!
//! Everything reduces to graded polynomial linear algebra: global sections
//! and top cohomology come from the binomial formulas, connecting maps are
//! explicit multiplication-by-q matrices, and the Koszul-resolution
//! spectral sequence is assembled from the twist cohomologies with a
//! positional check that no differential can connect two nonzero entries.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::dcrit::exponent_vectors;
use crate::poly::{binomial, AlgebraRef, Monomial, PolyElement, TruncatedPolyAlgebra};
use crate::rat::Rat;
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum ExtError {
    #[error("unexpected nonzero E2 entry at (p = {0}, q = {1}) of dimension {2}")]
    UnexpectedEntry(i64, i64, usize),
    #[error("Euler characteristic bookkeeping failed at twist {0}")]
    EulerMismatch(i64),
    #[error("degenerate quintic after {0} reseeds")]
    Degenerate(usize),
}

/// H^q(P^n, O(p)) for all q: binomials at the two ends, zero in between.
pub fn line_bundle_cohomology(n: usize, p: i64) -> BTreeMap<usize, usize> {
    let mut out = BTreeMap::new();
    if p >= 0 {
        out.insert(0, binomial((p + n as i64) as usize, n));
    }
    if p <= -(n as i64) - 1 {
        out.insert(n, binomial((-p - 1) as usize, n));
    }
    out
}

fn chi_line_bundle(n: usize, p: i64) -> i64 {
    let h = line_bundle_cohomology(n, p);
    h.iter().map(|(q, d)| if q % 2 == 0 { *d as i64 } else { -(*d as i64) }).sum()
}

/// The (5,1) complete intersection setup: a hyperplane inside P^n cut
/// further by a generic quintic, with the quintic drawn from a seeded
/// generator and re-drawn (with the event counted) if any multiplication
/// map fails to reach maximal rank.
pub struct ProjectiveSetup {
    ambient: usize,
    hyperplane: PolyElement,
    quintic: PolyElement,
    pub seed: u64,
    pub reseeds: usize,
}

impl ProjectiveSetup {
    pub fn new(ambient: usize, seed: u64) -> Result<Self, ExtError> {
        assert!(ambient >= 2);
        let full_names: Vec<String> = (0..=ambient).map(|i| format!("z{i}")).collect();
        let full_refs: Vec<&str> = full_names.iter().map(String::as_str).collect();
        let full_ring = TruncatedPolyAlgebra::even(&full_refs, 12);
        let reduced_names: Vec<&str> = full_refs[..ambient].to_vec();
        let reduced_ring = TruncatedPolyAlgebra::even(&reduced_names, 12);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // The hyperplane z_ambient = linear form in the others; reduction
        // eliminates the pivot variable.
        let mut hyperplane = PolyElement::gen(&full_ring, &full_names[ambient]).unwrap();
        for name in &full_names[..ambient] {
            let c = Rat::from_int(rng.gen_range(-3i64..=3));
            let mut term = PolyElement::gen(&full_ring, name).unwrap().scale(&c);
            term = term.neg();
            hyperplane = hyperplane.add(&term.neg()).unwrap();
        }
        let mut reseeds = 0;
        loop {
            let quintic = random_form(&reduced_ring, 5, &mut rng);
            let setup = ProjectiveSetup {
                ambient,
                hyperplane: hyperplane.clone(),
                quintic,
                seed,
                reseeds,
            };
            if setup.max_rank_ok() {
                return Ok(setup);
            }
            reseeds += 1;
            if reseeds > 8 {
                return Err(ExtError::Degenerate(reseeds));
            }
        }
    }

    pub fn hyperplane(&self) -> &PolyElement {
        &self.hyperplane
    }

    pub fn quintic(&self) -> &PolyElement {
        &self.quintic
    }

    /// Number of variables after reduction to the hyperplane: P^{ambient−1}.
    fn reduced_dim(&self) -> usize {
        self.ambient - 1
    }

    /// All maps used below must attain maximal rank.
    fn max_rank_ok(&self) -> bool {
        for p in [0i64, 1, 5, 6] {
            let m = self.mult_matrix(p - 5, p);
            if m.rank() != m.rows().min(m.cols()) {
                return false;
            }
        }
        true
    }

    /// The multiplication-by-q matrix from degree-a forms to degree-b forms
    /// on the reduced coordinate ring (b = a + 5); empty when a < 0.
    fn mult_matrix(&self, a: i64, b: i64) -> SparseMatrix {
        let vars = self.reduced_dim() + 1;
        let rows_m = if b < 0 { Vec::new() } else { exponent_vectors(vars, b as usize) };
        let cols_m = if a < 0 { Vec::new() } else { exponent_vectors(vars, a as usize) };
        let index: BTreeMap<&Monomial, usize> =
            rows_m.iter().enumerate().map(|(i, m)| (m, i)).collect();
        let mut out = SparseMatrix::zero(rows_m.len(), cols_m.len());
        for (c, mono) in cols_m.iter().enumerate() {
            for (qm, coef) in self.quintic.terms() {
                let sum: Monomial = mono.iter().zip(qm).map(|(x, y)| x + y).collect();
                if let Some(&r) = index.get(&sum) {
                    out.add_to(r, c, coef);
                }
            }
        }
        out
    }

    /// H^q(H, O_Z(p)) through the short exact sequences
    /// 0 → O_H(p−5) → O_H(p) → O_Z(p) → 0 on H = P^{ambient−1}:
    /// H⁰ is the cokernel of multiplication by q on global sections, H² the
    /// kernel of the dual map on top cohomology, and H¹ = 0 is verified by
    /// Euler-characteristic bookkeeping rather than assumed.
    pub fn ci_twist_cohomology(&self, p: i64) -> Result<BTreeMap<usize, usize>, ExtError> {
        let h = self.reduced_dim();
        let mut out = BTreeMap::new();
        // H⁰: coker(q·: S_{p−5} → S_p).
        let m0 = self.mult_matrix(p - 5, p);
        let h0 = m0.rows() - m0.rank();
        // H²: ker(H^h(O(p−5)) → H^h(O(p))).  By Serre duality the map is
        // the transpose of q·: S_{−p−1−h} → S_{−p−1−h+5}, whose row space
        // is dual to H^h(O(p−5)); the kernel has dimension rows − rank.
        let md = self.mult_matrix(-p - 1 - h as i64, -p - 1 - h as i64 + 5);
        let h_top_source = line_bundle_cohomology(h, p - 5).get(&h).copied().unwrap_or(0);
        debug_assert_eq!(md.rows(), h_top_source);
        let h2 = md.rows() - md.rank();
        if h0 > 0 {
            out.insert(0, h0);
        }
        if h2 > 0 {
            out.insert(h - 1, h2);
        }
        // Bookkeeping: χ(O_Z(p)) = χ(O_H(p)) − χ(O_H(p−5)); a hidden H¹
        // would break this.
        let chi_z = h0 as i64 - 0 + if (h - 1) % 2 == 0 { h2 as i64 } else { -(h2 as i64) };
        if chi_z != chi_line_bundle(h, p) - chi_line_bundle(h, p - 5) {
            return Err(ExtError::EulerMismatch(p));
        }
        Ok(out)
    }

    /// The E₂ table of the Koszul-resolution spectral sequence and the Ext
    /// dimensions it assembles to.
    pub fn ext_table(&self) -> Result<ExtTable, ExtError> {
        // Column p of the resolution 0 → O(−6) → O(−5) ⊕ O(−1) → O → 0
        // contributes the twists {0}, {1, 5}, {6}.
        let twists: [&[i64]; 3] = [&[0], &[1, 5], &[6]];
        let mut entries: BTreeMap<(i64, i64), usize> = BTreeMap::new();
        for (p_col, ts) in twists.iter().enumerate() {
            for &t in ts.iter() {
                for (q, d) in self.ci_twist_cohomology(t)? {
                    *entries.entry((p_col as i64, q as i64)).or_insert(0) += d;
                }
            }
        }
        entries.retain(|_, d| *d > 0);
        // The lemma's slot pattern: positionally, no d_r for r ≥ 2 can
        // connect two nonzero entries (d_r moves (p, q) to (p+r, q−r+1)).
        for (&(p, q), &d) in &entries {
            for r in 2..=3i64 {
                let target = (p + r, q - r + 1);
                if entries.contains_key(&target) {
                    return Err(ExtError::UnexpectedEntry(target.0, target.1, d));
                }
            }
        }
        let mut ext = [0usize; 4];
        for (&(p, q), &d) in &entries {
            let n = p + q;
            if !(0..4).contains(&n) {
                return Err(ExtError::UnexpectedEntry(p, q, d));
            }
            ext[n as usize] += d;
        }
        Ok(ExtTable { entries, ext })
    }
}

fn random_form(ring: &AlgebraRef, degree: usize, rng: &mut impl Rng) -> PolyElement {
    let mut f = PolyElement::zero(ring);
    for mono in exponent_vectors(ring.num_gens(), degree) {
        let c = Rat::from_int(rng.gen_range(-9i64..=9));
        f.add_term(mono, c);
    }
    f
}

/// The assembled E₂ table with the Ext dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtTable {
    pub entries: BTreeMap<(i64, i64), usize>,
    pub ext: [usize; 4],
}

impl ExtTable {
    pub fn to_json(&self) -> Value {
        json!({
            "e2": self.entries.iter().map(|(&(p, q), d)| json!({
                "p": p, "q": q, "dim": d,
            })).collect::<Vec<_>>(),
            "ext": self.ext,
        })
    }

    /// A small human-readable grid.
    pub fn to_grid(&self) -> String {
        let mut s = String::new();
        let qmax = self.entries.keys().map(|&(_, q)| q).max().unwrap_or(0);
        for q in (0..=qmax).rev() {
            s.push_str(&format!("q={q} |"));
            for p in 0..3 {
                let d = self.entries.get(&(p, q)).copied().unwrap_or(0);
                s.push_str(&format!(" {d:>4}"));
            }
            s.push('\n');
        }
        s.push_str("      ");
        for p in 0..3 {
            s.push_str(&format!(" p={p} "));
        }
        s.push('\n');
        s.push_str(&format!(
            "Ext: ({}, {}, {}, {})\n",
            self.ext[0], self.ext[1], self.ext[2], self.ext[3]
        ));
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_bundles_on_p3() {
        assert_eq!(line_bundle_cohomology(3, 0), BTreeMap::from([(0, 1)]));
        assert_eq!(line_bundle_cohomology(3, 5), BTreeMap::from([(0, 56)]));
        assert_eq!(line_bundle_cohomology(3, -4), BTreeMap::from([(3, 1)]));
        assert_eq!(line_bundle_cohomology(3, -1), BTreeMap::new());
        assert_eq!(line_bundle_cohomology(3, -5), BTreeMap::from([(3, 4)]));
    }

    #[test]
    fn twist_cohomology_of_the_intersection() {
        let setup = ProjectiveSetup::new(4, 1).unwrap();
        assert_eq!(
            setup.ci_twist_cohomology(0).unwrap(),
            BTreeMap::from([(0, 1), (2, 4)])
        );
        assert_eq!(setup.ci_twist_cohomology(1).unwrap(), BTreeMap::from([(0, 4), (2, 1)]));
        assert_eq!(setup.ci_twist_cohomology(5).unwrap(), BTreeMap::from([(0, 55)]));
        assert_eq!(setup.ci_twist_cohomology(6).unwrap(), BTreeMap::from([(0, 80)]));
    }

    #[test]
    fn ext_table_of_the_model() {
        let setup = ProjectiveSetup::new(4, 7).unwrap();
        let table = setup.ext_table().unwrap();
        let expected: BTreeMap<(i64, i64), usize> = BTreeMap::from([
            ((0, 0), 1),
            ((1, 0), 59),
            ((2, 0), 80),
            ((0, 2), 4),
            ((1, 2), 1),
        ]);
        assert_eq!(table.entries, expected, "the five slots of the lemma");
        assert_eq!(table.ext, [1, 59, 84, 1]);
        // The trace map makes Ext⁰ one-dimensional.
        assert_eq!(table.ext[0], 1);
        // Serre pattern on the listed slots.
        assert_eq!(table.ext[0], table.ext[3]);
    }

    #[test]
    fn seed_independence() {
        let mut seen = None;
        for seed in [2u64, 3, 5, 11, 13] {
            let setup = ProjectiveSetup::new(4, seed).unwrap();
            let table = setup.ext_table().unwrap();
            match &seen {
                None => seen = Some(table.ext),
                Some(prev) => assert_eq!(*prev, table.ext, "seed {seed}"),
            }
        }
    }

    #[test]
    fn euler_conservation_across_twists() {
        let setup = ProjectiveSetup::new(4, 1).unwrap();
        for p in -3..=8 {
            // ci_twist_cohomology errors internally if χ fails.
            setup.ci_twist_cohomology(p).unwrap();
        }
    }
}
