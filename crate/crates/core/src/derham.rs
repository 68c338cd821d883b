//! The twisted de Rham complex (Ω•((u)), −dW + u·d_DR), the HKR comparison
//! with curved Hochschild chains, the Gauss–Manin operator
//! ∇ = dᵗ − u⁻¹ dᵗ(W), and family dimension scans.
//!
//! Form windows widen along the differential so the twisted operator is
//! never truncated: kernels are counted on coefficients of degree ≤ D,
//! images come from the slack window and are met back into it.  Every
//! reported dimension carries a D vs D+2 stabilization flag.

use std::collections::BTreeMap;

use rand::Rng;
use serde_json::{json, Value};

use crate::hochschild::{HochschildWindow, Word};
use crate::poly::{AlgebraRef, KaehlerForm, Monomial, PolyElement, PolyError};
use crate::rat::{Rat, ScalarError, UWindow};
use crate::sparse::{image_meet_coords_dim, SparseMatrix};

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum DerhamError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error("potential family error: {0}")]
    Family(String),
}

/// A basis element of the windowed form space: (monomial, generator mask).
type FormKey = (Monomial, u64);

/// The twisted de Rham complex of a potential W over an even polynomial
/// ring, with per-degree coefficient windows.
pub struct TwistedDeRham {
    ring: AlgebraRef,
    w: PolyElement,
    window: usize,
    /// x-degree growth of −dW∧: deg W − 1 (at least 1 to make room).
    growth: usize,
    dirs: Vec<usize>,
}

impl TwistedDeRham {
    pub fn new(w: &PolyElement, window: usize) -> Result<Self, DerhamError> {
        let ring0 = w.algebra();
        assert!(ring0.is_all_even(), "potential must live in an even polynomial ring");
        let n = ring0.num_gens();
        let growth = w.max_degree().unwrap_or(0).saturating_sub(1).max(1);
        // Wide enough that no product in the operator tower truncates.
        let ring = ring0.with_truncation(window + (n + 3) * growth + 2);
        let w = crate::dcrit::transplant(w, &ring)?;
        let dirs: Vec<usize> = (0..n).collect();
        Ok(TwistedDeRham { ring, w, window, growth, dirs })
    }

    pub fn ring(&self) -> &AlgebraRef {
        &self.ring
    }

    pub fn potential(&self) -> &PolyElement {
        &self.w
    }

    /// The operator −dW ∧ ω + u·dω, exactly (no truncation): the result
    /// carries u-degrees 0 and 1.
    pub fn apply(&self, omega: &KaehlerForm) -> Result<BTreeMap<i64, KaehlerForm>, DerhamError> {
        let dw = KaehlerForm::d_of_poly(&self.w)?;
        let mut out = BTreeMap::new();
        let minus_dw = omega.wedge_one_form_left(&dw)?.neg();
        if !minus_dw.is_zero() {
            out.insert(0, minus_dw);
        }
        let du = omega.de_rham_d_dirs(&self.dirs)?;
        if !du.is_zero() {
            out.insert(1, du);
        }
        Ok(out)
    }

    /// (−dW + u·d)² must vanish identically: both cross terms cancel.
    pub fn check_square_zero(&self, degree: usize, sample_bound: usize) -> Result<bool, DerhamError> {
        for key in self.form_basis(degree, sample_bound) {
            let mut form = KaehlerForm::zero(&self.ring, degree)?;
            form.add_term(key.0.clone(), key.1, Rat::one());
            let first = self.apply(&form)?;
            let mut acc: BTreeMap<i64, KaehlerForm> = BTreeMap::new();
            for (p, f) in &first {
                for (q, g) in self.apply(f)? {
                    let e = acc
                        .entry(p + q)
                        .or_insert_with(|| KaehlerForm::zero(&self.ring, degree + 2).unwrap());
                    *e = e.add(&g)?;
                }
            }
            if acc.values().any(|f| !f.is_zero()) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn form_basis(&self, degree: usize, bound: usize) -> Vec<FormKey> {
        let n = self.ring.num_gens();
        let mut masks = Vec::new();
        for m in 0u64..(1 << n) {
            if m.count_ones() as usize == degree {
                masks.push(m);
            }
        }
        let mut out = Vec::new();
        for mono in even_monos(&self.ring, bound) {
            for &m in &masks {
                out.push((mono.clone(), m));
            }
        }
        out
    }

    /// Cohomology dimensions per form degree over Q(u), by sampled ranks:
    /// kernels on the D-window with untruncated targets, images from the
    /// slack window met back into it.
    pub fn cohomology(&self, u_samples: usize, rng: &mut impl Rng) -> Result<DerhamReport, DerhamError> {
        let dims = self.cohomology_at(self.window, u_samples, rng)?;
        let dims2 = self.cohomology_at(self.window + 2, u_samples, rng)?;
        Ok(DerhamReport { dims: dims.clone(), window: self.window, stable: dims == dims2 })
    }

    fn cohomology_at(
        &self,
        window: usize,
        u_samples: usize,
        rng: &mut impl Rng,
    ) -> Result<BTreeMap<usize, usize>, DerhamError> {
        let n = self.ring.num_gens();
        let s = self.growth;
        let mut samples = Vec::new();
        while samples.len() < u_samples.max(1) {
            let num = rng.gen_range(-47i64..=47);
            let den = rng.gen_range(1i64..=7);
            if num != 0 && !samples.contains(&Rat::from_frac(num, den)) {
                samples.push(Rat::from_frac(num, den));
            }
        }
        // Operator matrices at a sample: columns over `src` bound, rows over
        // `src bound + s`.
        let matrix = |degree: usize, bound: usize, at: &Rat| -> Result<SparseMatrix, DerhamError> {
            let cols = self.form_basis(degree, bound);
            let rows = self.form_basis(degree + 1, bound + s);
            let index: BTreeMap<&FormKey, usize> =
                rows.iter().enumerate().map(|(i, k)| (k, i)).collect();
            let mut m = SparseMatrix::zero(rows.len(), cols.len());
            for (c, key) in cols.iter().enumerate() {
                let mut form = KaehlerForm::zero(&self.ring, degree)?;
                form.add_term(key.0.clone(), key.1, Rat::one());
                for (p, f) in self.apply(&form)? {
                    let scale = if p == 0 { Rat::one() } else { at.clone() };
                    for (k, coef) in f.terms() {
                        let r = *index.get(k).expect("windowed image stays in the slack basis");
                        m.add_to(r, c, &(coef * &scale));
                    }
                }
            }
            Ok(m)
        };
        let mut out = BTreeMap::new();
        for degree in 0..=n {
            let mut best = 0usize;
            for at in &samples {
                // Kernel on the D window.
                let ker = {
                    let m = matrix(degree, window, at)?;
                    m.cols() - m.rank()
                };
                let im = if degree == 0 {
                    0
                } else {
                    let m = matrix(degree - 1, window + s, at)?;
                    let rows = self.form_basis(degree, window + 2 * s);
                    let inside: Vec<bool> = rows
                        .iter()
                        .map(|(mono, _)| self.ring.word_degree(mono) <= window)
                        .collect();
                    image_meet_coords_dim(&m, &inside)
                };
                // Generic value: smallest kernel, largest image — take the
                // minimum of ker − im across samples.
                let h = ker.saturating_sub(im);
                best = if best == 0 { h } else { best.min(h) };
            }
            out.insert(degree, best);
        }
        Ok(out)
    }
}

fn even_monos(ring: &AlgebraRef, bound: usize) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; ring.num_gens()];
    fn rec(n: usize, slot: usize, rem: usize, cur: &mut Monomial, out: &mut Vec<Monomial>) {
        if slot == n {
            out.push(cur.clone());
            return;
        }
        for e in 0..=rem {
            cur[slot] = e as u32;
            rec(n, slot + 1, rem - e, cur, out);
        }
        cur[slot] = 0;
    }
    rec(ring.num_gens(), 0, bound, &mut cur, &mut out);
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerhamReport {
    pub dims: BTreeMap<usize, usize>,
    pub window: usize,
    pub stable: bool,
}

impl DerhamReport {
    pub fn total(&self) -> usize {
        self.dims.values().sum()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "window": self.window,
            "stable": self.stable,
            "dims": self.dims.iter().map(|(d, v)| json!({"form_degree": d, "dim": v})).collect::<Vec<_>>(),
        })
    }
}

/// The HKR map ε(a₀, …, a_n) = (1/n!) a₀ da₁ ∧ … ∧ da_n from Hochschild
/// words of the one-variable curved model into forms.
pub struct HkrMap<'a> {
    pub hochschild: &'a HochschildWindow,
    pub derham: &'a TwistedDeRham,
}

impl HkrMap<'_> {
    /// ε of a basis word.  Words are (head | t₁, …, t_n) with basis
    /// elements x^k of the truncated power algebra; the head maps to x^k,
    /// each tail slot to d(x^k).
    pub fn apply(&self, word: &Word) -> Result<KaehlerForm, DerhamError> {
        let ring = self.derham.ring();
        let n = word.tail.len();
        let x = PolyElement::gen(ring, &ring.gens()[0].name)?;
        let head_poly = x.pow(word.head as u32)?;
        let mut form = KaehlerForm::from_poly(&head_poly)?;
        for &t in &word.tail {
            let dt = KaehlerForm::d_of_poly(&x.pow(t as u32)?)?;
            form = form.wedge_one_form_left(&dt)?;
            if form.is_zero() {
                return KaehlerForm::zero(ring, 0).map_err(Into::into);
            }
        }
        // Repeated dx factors vanish for one variable beyond degree 1, so
        // only n ≤ 1 survives; the factor 1/n! is kept for the record.
        Ok(form.scale(&Rat::inv_factorial(n as u32)))
    }

    /// Chain-map check on every interior word of length ≤ max_len:
    /// ε(b w) + u·ε(B w) = −dW ∧ ε(w) + u·d(ε(w)), exactly, per u-degree.
    /// Interior means the faithful band of the finite model: words whose
    /// total weight stays below the algebra depth, where no product is
    /// truncated.
    pub fn check_intertwining(&self, max_len: usize) -> Result<Option<Word>, DerhamError> {
        let depth = self.hochschild.algebra.dim() as u32;
        let words = self.hochschild.words_up_to(max_len, None);
        let mut checked = 0usize;
        for w in &words {
            if self.hochschild.word_weight(w).unwrap_or(0) >= depth {
                continue;
            }
            checked += 1;
            let mut lhs: BTreeMap<i64, KaehlerForm> = BTreeMap::new();
            for (v, c) in self.hochschild.apply_b(w) {
                let f = self.apply(&v)?.scale(&c);
                accumulate(&mut lhs, 0, &f)?;
            }
            for (v, c) in self.hochschild.apply_connes_b(w) {
                let f = self.apply(&v)?.scale(&c);
                accumulate(&mut lhs, 1, &f)?;
            }
            let rhs = self.derham.apply(&self.apply(w)?)?;
            let rhs: BTreeMap<i64, KaehlerForm> =
                rhs.into_iter().filter(|(_, f)| !f.is_zero()).collect();
            let lhs: BTreeMap<i64, KaehlerForm> =
                lhs.into_iter().filter(|(_, f)| !f.is_zero()).collect();
            if lhs != rhs {
                return Ok(Some(w.clone()));
            }
        }
        assert!(checked > 0, "empty interior");
        Ok(None)
    }
}

fn accumulate(
    acc: &mut BTreeMap<i64, KaehlerForm>,
    power: i64,
    f: &KaehlerForm,
) -> Result<(), DerhamError> {
    if f.is_zero() {
        return Ok(());
    }
    match acc.remove(&power) {
        None => {
            acc.insert(power, f.clone());
        }
        Some(prev) => {
            if prev.degree() == f.degree() {
                acc.insert(power, prev.add(f)?);
            } else {
                // Forms of distinct degrees never collide in one u-slot for
                // these complexes; keep the nonzero one.
                let keep = if prev.is_zero() { f.clone() } else { prev };
                acc.insert(power, keep);
            }
        }
    }
    Ok(())
}

/// A one-parameter polynomial family of potentials W(t) with a rational
/// sample grid.
pub struct PotentialFamily {
    /// Ring in the x-variables and the parameter.
    ring: AlgebraRef,
    parameter: String,
    w: PolyElement,
    pub grid: Vec<Rat>,
}

impl PotentialFamily {
    pub fn new(w: &PolyElement, parameter: &str, grid: Vec<Rat>) -> Result<Self, DerhamError> {
        let ring = w.algebra().clone();
        ring.gen_index(parameter)
            .map_err(|_| DerhamError::Family(format!("parameter `{parameter}` not in the ring")))?;
        if grid.is_empty() {
            return Err(DerhamError::Family("empty sample grid".into()));
        }
        Ok(PotentialFamily { ring, parameter: parameter.to_string(), w: w.clone(), grid })
    }

    pub fn potential(&self) -> &PolyElement {
        &self.w
    }

    pub fn parameter(&self) -> &str {
        &self.parameter
    }

    /// W at a grid point, as a polynomial in the x-variables only.
    pub fn specialize(&self, t: &Rat) -> Result<PolyElement, DerhamError> {
        Ok(self.w.substitute(&self.parameter, t)?)
    }

    /// The x-variable generator indices (everything except the parameter).
    fn x_dirs(&self) -> Vec<usize> {
        let t = self.ring.gen_index(&self.parameter).unwrap();
        (0..self.ring.num_gens()).filter(|&i| i != t).collect()
    }

    /// The Gauss–Manin operator ∇ = dᵗ − u⁻¹ dᵗ(W) and the twisted
    /// differential −dW + u·d_DR, both as exact operators on forms in the
    /// x-variables and the parameter, u tracked in a Laurent window.
    pub fn gm_operator(&self) -> GaussManin<'_> {
        GaussManin { family: self }
    }
}

/// The assembled Gauss–Manin data for a family.
pub struct GaussManin<'a> {
    family: &'a PotentialFamily,
}

/// Forms with windowed Laurent coefficients in u.
pub type UForm = BTreeMap<i64, KaehlerForm>;

impl GaussManin<'_> {
    fn ring(&self) -> &AlgebraRef {
        &self.family.ring
    }

    fn t_index(&self) -> usize {
        self.ring().gen_index(&self.family.parameter).unwrap()
    }

    /// ∇ω = dᵗω − u⁻¹ dᵗ(W) ∧ ω.
    pub fn nabla(&self, omega: &UForm) -> Result<UForm, DerhamError> {
        let dt_w = KaehlerForm::from_poly(&self.family.w)?
            .de_rham_d_dirs(&[self.t_index()])?;
        let mut out = UForm::new();
        for (p, f) in omega {
            let dt = f.de_rham_d_dirs(&[self.t_index()])?;
            add_uform(&mut out, *p, &dt)?;
            let tw = f.wedge_one_form_left(&dt_w)?.neg();
            add_uform(&mut out, p - 1, &tw)?;
        }
        Ok(out)
    }

    /// The twisted differential −d_x W ∧ ω + u·d_x ω.
    pub fn twisted(&self, omega: &UForm) -> Result<UForm, DerhamError> {
        let dirs = self.family.x_dirs();
        let dx_w = KaehlerForm::from_poly(&self.family.w)?.de_rham_d_dirs(&dirs)?;
        let mut out = UForm::new();
        for (p, f) in omega {
            let tw = f.wedge_one_form_left(&dx_w)?.neg();
            add_uform(&mut out, *p, &tw)?;
            let dx = f.de_rham_d_dirs(&dirs)?;
            add_uform(&mut out, p + 1, &dx)?;
        }
        Ok(out)
    }

    /// The four bracket pieces of [−dW + u·d, ∇], each reported as its own
    /// exact-zero verdict on a basis window, plus the total and ∇².
    pub fn flatness_check(&self, degree_bound: usize) -> Result<FlatnessReport, DerhamError> {
        let ring = self.ring();
        let n = ring.num_gens();
        let dirs = self.family.x_dirs();
        let t = self.t_index();
        let w = &self.family.w;
        let dx_w = KaehlerForm::from_poly(w)?.de_rham_d_dirs(&dirs)?;
        let dt_w = KaehlerForm::from_poly(w)?.de_rham_d_dirs(&[t])?;
        // Operators as closures on plain forms.
        let op_dxw = |f: &KaehlerForm| f.wedge_one_form_left(&dx_w);
        let op_dtw = |f: &KaehlerForm| f.wedge_one_form_left(&dt_w);
        let op_dx = |f: &KaehlerForm| f.de_rham_d_dirs(&dirs);
        let op_dt = |f: &KaehlerForm| f.de_rham_d_dirs(&[t]);
        let anticommute = |a: &dyn Fn(&KaehlerForm) -> Result<KaehlerForm, PolyError>,
                           b: &dyn Fn(&KaehlerForm) -> Result<KaehlerForm, PolyError>,
                           f: &KaehlerForm|
         -> Result<bool, DerhamError> {
            let ab = b(&a(f)?)?;
            let ba = a(&b(f)?)?;
            Ok(ab.add(&ba)?.is_zero())
        };
        let mut report = FlatnessReport {
            bracket_dw_dtw: true,
            bracket_ddr_dtw_plus_dw_dt: true,
            bracket_ddr_dt: true,
            total_commutator: true,
            nabla_squared: true,
        };
        for degree in 0..n {
            for key in basis_window(ring, degree, degree_bound) {
                let mut f = KaehlerForm::zero(ring, degree)?;
                f.add_term(key.0.clone(), key.1, Rat::one());
                // [dW∧, dᵗW∧] = 0: one-forms anticommute.
                if !anticommute(&|g| op_dxw(g), &|g| op_dtw(g), &f)? {
                    report.bracket_dw_dtw = false;
                }
                // [d_DR, dᵗW∧] + [dW∧, dᵗ] = 0: mixed partials agree.
                let mut acc = op_dtw(&op_dx(&f)?)?.add(&op_dx(&op_dtw(&f)?)?)?;
                acc = acc.add(&op_dt(&op_dxw(&f)?)?)?.add(&op_dxw(&op_dt(&f)?)?)?;
                if !acc.is_zero() {
                    report.bracket_ddr_dtw_plus_dw_dt = false;
                }
                // [d_DR, dᵗ] = 0: the two halves of the de Rham differential.
                if !anticommute(&|g| op_dx(g), &|g| op_dt(g), &f)? {
                    report.bracket_ddr_dt = false;
                }
                // Total graded commutator [−dW + u·d, ∇] on the u-window.
                let uf: UForm = BTreeMap::from([(0i64, f.clone())]);
                let mut total = self.twisted(&self.nabla(&uf)?)?;
                for (p, g) in self.nabla(&self.twisted(&uf)?)? {
                    add_uform(&mut total, p, &g)?;
                }
                if total.values().any(|g| !g.is_zero()) {
                    report.total_commutator = false;
                }
                // ∇² = 0.
                let nn = self.nabla(&self.nabla(&uf)?)?;
                if nn.values().any(|g| !g.is_zero()) {
                    report.nabla_squared = false;
                }
            }
        }
        Ok(report)
    }

    /// The assembled matrix of ∇ on a finite basis window, over a Laurent
    /// u-window; a window without room for the u⁻¹ shift overflows.
    pub fn matrix(
        &self,
        degree: usize,
        degree_bound: usize,
        u_window: (i64, i64),
    ) -> Result<crate::sparse::USparseMatrix, DerhamError> {
        let ring = self.ring();
        let cols = basis_window(ring, degree, degree_bound);
        let rows = basis_window(ring, degree + 1, degree_bound + self.family.w.max_degree().unwrap_or(1));
        let index: BTreeMap<&FormKey, usize> = rows.iter().enumerate().map(|(i, k)| (k, i)).collect();
        let mut m = crate::sparse::USparseMatrix::zero(rows.len(), cols.len(), u_window);
        for (c, key) in cols.iter().enumerate() {
            let mut f = KaehlerForm::zero(ring, degree)?;
            f.add_term(key.0.clone(), key.1, Rat::one());
            let out = self.nabla(&BTreeMap::from([(0i64, f)]))?;
            for (p, g) in out {
                for (k, coef) in g.terms() {
                    if let Some(&r) = index.get(k) {
                        let w = UWindow::monomial(u_window.0, u_window.1, p, coef.clone())?;
                        m.add_to(r, c, &w)?;
                    }
                }
            }
        }
        Ok(m)
    }

    /// Per-grid-point twisted cohomology totals with a constancy verdict.
    pub fn family_scan(
        &self,
        window: usize,
        u_samples: usize,
        rng: &mut impl Rng,
    ) -> Result<FamilyScan, DerhamError> {
        let dirs = self.family.x_dirs();
        let names: Vec<&str> = dirs
            .iter()
            .map(|&i| self.ring().gens()[i].name.as_str())
            .collect();
        let mut rows = Vec::new();
        for t in &self.family.grid {
            let wt = self.family.specialize(t)?;
            // Re-express in the x-only ring.
            let x_ring = crate::poly::TruncatedPolyAlgebra::even(&names, self.ring().trunc());
            let wt = crate::dcrit::transplant(&wt, &x_ring)?;
            let td = TwistedDeRham::new(&wt, window)?;
            let rep = td.cohomology(u_samples, rng)?;
            let (mut even, mut odd) = (0, 0);
            for (k, d) in &rep.dims {
                if k % 2 == 0 {
                    even += d;
                } else {
                    odd += d;
                }
            }
            rows.push(FamilyScanRow {
                t: t.clone(),
                even,
                odd,
                total: rep.total(),
                stable: rep.stable,
            });
        }
        let constant = rows.windows(2).all(|p| p[0].total == p[1].total)
            && rows.iter().all(|r| r.stable);
        Ok(FamilyScan { rows, constant })
    }
}

fn add_uform(acc: &mut UForm, power: i64, f: &KaehlerForm) -> Result<(), DerhamError> {
    if f.is_zero() {
        return Ok(());
    }
    match acc.remove(&power) {
        None => {
            acc.insert(power, f.clone());
        }
        Some(prev) => {
            let sum = prev.add(f)?;
            if !sum.is_zero() {
                acc.insert(power, sum);
            }
        }
    }
    Ok(())
}

fn basis_window(ring: &AlgebraRef, degree: usize, bound: usize) -> Vec<FormKey> {
    let n = ring.num_gens();
    let mut masks = Vec::new();
    for m in 0u64..(1 << n) {
        if m.count_ones() as usize == degree {
            masks.push(m);
        }
    }
    let mut out = Vec::new();
    for mono in even_monos(ring, bound) {
        for &m in &masks {
            out.push((mono.clone(), m));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlatnessReport {
    pub bracket_dw_dtw: bool,
    pub bracket_ddr_dtw_plus_dw_dt: bool,
    pub bracket_ddr_dt: bool,
    pub total_commutator: bool,
    pub nabla_squared: bool,
}

impl FlatnessReport {
    pub fn flat(&self) -> bool {
        self.total_commutator && self.nabla_squared
    }

    pub fn to_json(&self) -> Value {
        json!({
            "bracket_dw_dtw_zero": self.bracket_dw_dtw,
            "bracket_mixed_partials_zero": self.bracket_ddr_dtw_plus_dw_dt,
            "bracket_ddr_dt_zero": self.bracket_ddr_dt,
            "total_commutator_zero": self.total_commutator,
            "nabla_squared_zero": self.nabla_squared,
        })
    }
}

#[derive(Debug, Clone)]
pub struct FamilyScanRow {
    pub t: Rat,
    pub even: usize,
    pub odd: usize,
    pub total: usize,
    pub stable: bool,
}

#[derive(Debug, Clone)]
pub struct FamilyScan {
    pub rows: Vec<FamilyScanRow>,
    pub constant: bool,
}

impl FamilyScan {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,dim_even,dim_odd,stable\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{},{}\n", r.t, r.even, r.odd, r.stable));
        }
        s
    }

    pub fn to_json(&self) -> Value {
        json!({
            "constant": self.constant,
            "rows": self.rows.iter().map(|r| json!({
                "t": r.t.to_string(),
                "even": r.even,
                "odd": r.odd,
                "total": r.total,
                "stable": r.stable,
            })).collect::<Vec<_>>(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::TruncatedPolyAlgebra;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn twisted_operator_squares_to_zero() {
        let ring = TruncatedPolyAlgebra::even(&["x", "y"], 10);
        let w = PolyElement::parse(&ring, "x^3 - x*y^2").unwrap();
        let td = TwistedDeRham::new(&w, 4).unwrap();
        for degree in 0..2 {
            assert!(td.check_square_zero(degree, 4).unwrap());
        }
    }

    #[test]
    fn milnor_number_of_x2() {
        let ring = TruncatedPolyAlgebra::even(&["x"], 8);
        let w = PolyElement::parse(&ring, "x^2").unwrap();
        let td = TwistedDeRham::new(&w, 6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rep = td.cohomology(3, &mut rng).unwrap();
        assert_eq!(rep.dims[&0], 0);
        assert_eq!(rep.dims[&1], 1, "Jacobian ring of x² has dimension 1");
        assert!(rep.stable);
    }

    #[test]
    fn milnor_number_of_x3() {
        let ring = TruncatedPolyAlgebra::even(&["x"], 8);
        let w = PolyElement::parse(&ring, "x^3").unwrap();
        let td = TwistedDeRham::new(&w, 6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rep = td.cohomology(3, &mut rng).unwrap();
        assert_eq!(rep.total(), 2, "Jacobian ring of x³ has dimension 2");
        assert!(rep.stable);
    }

    #[test]
    fn zero_potential_reduces_to_de_rham() {
        // W = 0 in one variable: u·d_DR alone; H⁰ is the constants within
        // the window picture, higher cohomology vanishes.
        let ring = TruncatedPolyAlgebra::even(&["x"], 8);
        let w = PolyElement::zero(&ring);
        let td = TwistedDeRham::new(&w, 6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rep = td.cohomology(3, &mut rng).unwrap();
        assert_eq!(rep.dims[&0], 1);
        assert_eq!(rep.dims[&1], 0);
    }

    #[test]
    fn isolated_singularities_concentrate_in_top_degree() {
        // For an isolated singularity the stabilized cohomology sits in the
        // top form degree with total the Milnor number: μ(x²+y²) = 1 and
        // μ(x³−y²) = 2 (the cusp).
        let ring = TruncatedPolyAlgebra::even(&["x", "y"], 12);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for (src, mu) in [("x^2 + y^2", 1usize), ("x^3 - y^2", 2)] {
            let w = PolyElement::parse(&ring, src).unwrap();
            let td = TwistedDeRham::new(&w, 5).unwrap();
            let rep = td.cohomology(2, &mut rng).unwrap();
            assert!(rep.stable);
            assert_eq!(rep.dims[&0], 0, "{src}");
            assert_eq!(rep.dims[&1], 0, "{src}");
            assert_eq!(rep.dims[&2], mu, "{src}");
        }
    }

    #[test]
    fn hkr_values() {
        // ε(a₀) = a₀ and ε(1, x) = dx in the canonical pairing of the
        // one-variable curved model with its de Rham side.
        let ring = TruncatedPolyAlgebra::even(&["x"], 10);
        let w = PolyElement::parse(&ring, "x^2").unwrap();
        let td = TwistedDeRham::new(&w, 4).unwrap();
        let alg = crate::hochschild::CurvedAlgebra::curved_power(6, &[(2, -Rat::one())]).unwrap();
        let hw = HochschildWindow::new(alg, 6);
        let hkr = HkrMap { hochschild: &hw, derham: &td };
        let f = hkr.apply(&Word { head: 3, tail: vec![] }).unwrap();
        assert_eq!(f.degree(), 0);
        assert_eq!(f.terms().count(), 1);
        let dx = hkr.apply(&Word { head: 0, tail: vec![1] }).unwrap();
        assert_eq!(dx.degree(), 1);
        let (key, c) = dx.terms().next().unwrap();
        assert_eq!(key.1, 1);
        assert!(c.is_one());
    }

    #[test]
    fn hkr_intertwines_on_interior_words() {
        // ε(b + uB) = (−dW + u·d) ε on every interior word of length ≤ 4
        // for W = x², D = 6.
        let ring = TruncatedPolyAlgebra::even(&["x"], 12);
        let w = PolyElement::parse(&ring, "x^2").unwrap();
        let td = TwistedDeRham::new(&w, 6).unwrap();
        let alg = crate::hochschild::CurvedAlgebra::curved_power(6, &[(2, -Rat::one())]).unwrap();
        let hw = HochschildWindow::new(alg, 6);
        let hkr = HkrMap { hochschild: &hw, derham: &td };
        let witness = hkr.check_intertwining(4).unwrap();
        assert!(witness.is_none(), "intertwining fails at {witness:?}");
    }

    #[test]
    fn gm_operator_on_constant_family() {
        let ring = TruncatedPolyAlgebra::even(&["t", "x"], 10);
        let w = PolyElement::parse(&ring, "x^2").unwrap();
        let fam = PotentialFamily::new(&w, "t", vec![Rat::zero(), Rat::one()]).unwrap();
        let gm = fam.gm_operator();
        let rep = gm.flatness_check(3).unwrap();
        assert!(rep.flat());
        assert!(rep.bracket_dw_dtw && rep.bracket_ddr_dtw_plus_dw_dt && rep.bracket_ddr_dt);
    }

    #[test]
    fn gm_flatness_for_cubic_family() {
        let ring = TruncatedPolyAlgebra::even(&["t", "x"], 12);
        let w = PolyElement::parse(&ring, "x^3 - t*x").unwrap();
        let fam = PotentialFamily::new(&w, "t", vec![Rat::from_int(-1), Rat::zero()]).unwrap();
        let gm = fam.gm_operator();
        let rep = gm.flatness_check(4).unwrap();
        assert!(rep.flat(), "{rep:?}");
    }

    #[test]
    fn gm_matrix_needs_window_slack() {
        let ring = TruncatedPolyAlgebra::even(&["t", "x"], 10);
        let w = PolyElement::parse(&ring, "x^3 - t*x").unwrap();
        let fam = PotentialFamily::new(&w, "t", vec![Rat::zero()]).unwrap();
        let gm = fam.gm_operator();
        // No room for u⁻¹: overflow is an error, not a truncation.
        assert!(gm.matrix(0, 3, (0, 1)).is_err());
        let m = gm.matrix(0, 3, (-1, 1)).unwrap();
        assert!(!m.is_zero());
    }

    #[test]
    fn family_scan_of_cubic_is_constant() {
        let ring = TruncatedPolyAlgebra::even(&["t", "x"], 10);
        let w = PolyElement::parse(&ring, "x^3 - t*x").unwrap();
        let grid = vec![Rat::from_int(-1), Rat::zero(), Rat::from_int(1), Rat::from_int(2)];
        let fam = PotentialFamily::new(&w, "t", grid).unwrap();
        let gm = fam.gm_operator();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let scan = gm.family_scan(6, 3, &mut rng).unwrap();
        assert!(scan.constant, "{:?}", scan.rows);
        for row in &scan.rows {
            assert_eq!(row.total, 2, "Milnor number 2 at every t including t = 0");
        }
    }
}
