//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line with its measured runtime.  Run with
//! `cargo test --release --test acceptance -- --nocapture`.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crithom::dcrit::{dcrit_dga, verify_lemma_ax, CyclicLInfinity, PlusModelData};
use crithom::derham::{HkrMap, PotentialFamily, TwistedDeRham};
use crithom::extproj::ProjectiveSetup;
use crithom::hochschild::{CurvedAlgebra, HochschildWindow};
use crithom::mf::{mf_check_h_squares_zero, mf_hom_cohomology, MatrixFactorization};
use crithom::poly::{PolyElement, TruncatedPolyAlgebra};
use crithom::rat::Rat;
use crithom::scenario::{run, Scenario};

struct Criterion {
    name: &'static str,
    budget: Duration,
    started: Instant,
}

impl Criterion {
    fn new(name: &'static str, budget_secs: u64) -> Self {
        Criterion { name, budget: Duration::from_secs(budget_secs), started: Instant::now() }
    }

    fn finish(self, pass: bool) {
        let elapsed = self.started.elapsed();
        let verdict = if pass && elapsed <= self.budget { "PASS" } else { "FAIL" };
        println!(
            "criterion {:<44} {} ({:.2?} of {:?} budget)",
            self.name, verdict, elapsed, self.budget
        );
        assert!(pass, "{} failed", self.name);
        assert!(
            elapsed <= self.budget,
            "{} exceeded its runtime budget: {:.2?}",
            self.name,
            elapsed
        );
    }
}

#[test]
fn criterion_01_ext_table_of_the_intersection() {
    let c = Criterion::new("1 ext table of the quintic-hyperplane pair", 30);
    let setup = ProjectiveSetup::new(4, 1).expect("generic setup");
    let table = setup.ext_table().expect("the five-slot pattern");
    let slots: BTreeMap<(i64, i64), usize> = BTreeMap::from([
        ((0, 0), 1),
        ((1, 0), 59),
        ((2, 0), 80),
        ((0, 2), 4),
        ((1, 2), 1),
    ]);
    let pass = table.entries == slots && table.ext == [1, 59, 84, 1];
    c.finish(pass);
}

#[test]
fn criterion_02_gradient_identity() {
    let c = Criterion::new("2 gradient identity on random cyclic data", 60);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut pass = true;
    for _ in 0..100 {
        let u = rng.gen_range(1..=3);
        let k = rng.gen_range(2..=4);
        let data = CyclicLInfinity::random(u, k, &mut rng);
        data.check_cyclicity().expect("random data is cyclic by construction");
        let report = verify_lemma_ax(&data, 8);
        pass = pass && report.holds && report.max_deviation.is_zero();
    }
    // Negative controls: perturbations that break cyclicity must fail with
    // a located witness.
    let mut controls = 0;
    for _ in 0..20 {
        let data = CyclicLInfinity::random(2, 3, &mut rng).perturbed(&mut rng);
        if data.check_cyclicity().is_err() {
            controls += 1;
            let report = verify_lemma_ax(&data, 8);
            pass = pass && !report.holds && report.first_discrepancy.is_some();
        }
    }
    pass = pass && controls > 0;
    c.finish(pass);
}

#[test]
fn criterion_03_local_model_of_the_product_potential() {
    let c = Criterion::new("3 plus model vs dCrit of the product", 120);
    let mut pass = true;
    // The one-dimensional model instance.
    let mut products = BTreeMap::new();
    let mut t2 = BTreeMap::new();
    t2.insert(vec![2u32], vec![Rat::from_int(6)]);
    products.insert(2usize, t2);
    let base = CyclicLInfinity::new(1, vec![vec![Rat::one()]], products).unwrap();
    let mut g = BTreeMap::new();
    g.insert(vec![1u32], vec![vec![Rat::one()]]);
    let model = PlusModelData::from_g_tensor(base, 1, 1, &g);
    let low = model.verify_lemma_fg(3).unwrap();
    let high = model.verify_lemma_fg(5).unwrap();
    pass = pass && low.equal && high.equal;
    // Random small instances, each compared at the window and window + 2.
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for _ in 0..20 {
        let w1 = rng.gen_range(0..=1);
        let w2 = rng.gen_range(0..=1);
        let data = PlusModelData::random(1, w1, w2, 3, &mut rng);
        let low = data.verify_lemma_fg(3).unwrap();
        let high = data.verify_lemma_fg(5).unwrap();
        pass = pass && low.equal && high.equal;
    }
    c.finish(pass);
}

#[test]
fn criterion_04_matrix_factorization_sanity() {
    let c = Criterion::new("4 matrix factorization sanity", 30);
    let ring = TruncatedPolyAlgebra::even(&["x"], 40);
    let x = PolyElement::gen(&ring, "x").unwrap();
    let m = MatrixFactorization::rank_one(&ring, &x, &x).unwrap();
    let at6 = mf_hom_cohomology(&m, &m, 6).unwrap();
    let at8 = mf_hom_cohomology(&m, &m, 8).unwrap();
    let mut pass = (at6.even, at6.odd) == (1, 1)
        && (at8.even, at8.odd) == (1, 1)
        && at6.stable
        && at8.stable;
    pass = pass && mf_check_h_squares_zero(&m, &m, 3).unwrap();
    // Shift parity exchange.
    let shifted = m.shift();
    let cross = mf_hom_cohomology(&m, &shifted, 6).unwrap();
    pass = pass && (cross.even, cross.odd) == (at6.odd, at6.even);
    // Contractibility of the unit factorization (1, f).
    let one = PolyElement::one(&ring);
    let f = PolyElement::parse(&ring, "x^2").unwrap();
    let trivial =
        MatrixFactorization::new(ring.clone(), f.clone(), vec![vec![one]], vec![vec![f]]).unwrap();
    let contract = mf_hom_cohomology(&trivial, &trivial, 6).unwrap();
    pass = pass && (contract.even, contract.odd) == (0, 0) && contract.stable;
    c.finish(pass);
}

#[test]
fn criterion_05_mixed_complex_identities() {
    let c = Criterion::new("5 mixed complex identities", 120);
    let mut pass = true;
    // Q.
    let w = HochschildWindow::new(CurvedAlgebra::rationals(), 6);
    pass = pass && w.mixed_identity_check().all_hold();
    // Q[x]/x² with N_bar = 6.
    let w = HochschildWindow::new(CurvedAlgebra::curved_power(2, &[]).unwrap(), 6);
    pass = pass && w.mixed_identity_check().all_hold();
    // Curved (Q[x]/x⁶, h = x²) with N_bar = 6, exhaustive on the interior.
    let alg = CurvedAlgebra::curved_power(6, &[(2, Rat::one())]).unwrap();
    let w = HochschildWindow::new(alg, 6);
    let report = w.mixed_identity_check();
    pass = pass && report.all_hold() && report.words_checked > 1000;
    c.finish(pass);
}

#[test]
fn criterion_06_hp_matches_twisted_de_rham() {
    let c = Criterion::new("6 curved HP vs twisted de Rham", 180);
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let mut pass = true;
    for (w_src, depth, expected_total) in [("x^2", 14usize, 1usize), ("x^3", 16, 2)] {
        // Twisted de Rham side.
        let ring = TruncatedPolyAlgebra::even(&["x"], 40);
        let w = PolyElement::parse(&ring, w_src).unwrap();
        let td = TwistedDeRham::new(&w, 6).unwrap();
        let derham = td.cohomology(3, &mut rng).unwrap();
        pass = pass && derham.stable && derham.total() == expected_total;
        // Curved Hochschild side: (R_D, −W).
        let mut coeffs = Vec::new();
        for (m, coef) in w.terms() {
            coeffs.push((m[0] as usize, -coef));
        }
        let alg = CurvedAlgebra::curved_power(depth, &coeffs).unwrap();
        let hw = HochschildWindow::new(alg, 6);
        let hp = hw.hp_dims(None, 3, &mut rng);
        pass = pass && hp.stable && hp.total() == expected_total;
        pass = pass && hp.total() == derham.total();
    }
    // HKR chain-map identity, exact on interior words of length ≤ 4 for
    // W = x², D = 6.
    let ring = TruncatedPolyAlgebra::even(&["x"], 40);
    let w = PolyElement::parse(&ring, "x^2").unwrap();
    let td = TwistedDeRham::new(&w, 6).unwrap();
    let alg = CurvedAlgebra::curved_power(6, &[(2, -Rat::one())]).unwrap();
    let hw = HochschildWindow::new(alg, 6);
    let hkr = HkrMap { hochschild: &hw, derham: &td };
    pass = pass && hkr.check_intertwining(4).unwrap().is_none();
    c.finish(pass);
}

#[test]
fn criterion_07_gauss_manin_flatness() {
    let c = Criterion::new("7 Gauss-Manin flatness, zero residue", 60);
    let mut pass = true;
    let ring = TruncatedPolyAlgebra::even(&["t", "x"], 14);
    let w = PolyElement::parse(&ring, "x^3 - t*x").unwrap();
    let fam = PotentialFamily::new(&w, "t", vec![Rat::zero()]).unwrap();
    let report = fam.gm_operator().flatness_check(3).unwrap();
    pass = pass
        && report.flat()
        && report.bracket_dw_dtw
        && report.bracket_ddr_dtw_plus_dw_dt
        && report.bracket_ddr_dt;
    // Ten random cubic families in at most two variables.
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for i in 0..10 {
        let two_vars = i % 2 == 0;
        let names: Vec<&str> = if two_vars { vec!["t", "x", "y"] } else { vec!["t", "x"] };
        let ring = TruncatedPolyAlgebra::even(&names, 14);
        let mut w = PolyElement::zero(&ring);
        let vars = if two_vars { vec!["x", "y"] } else { vec!["x"] };
        for mono in poly_monomials(&ring, &vars, 3) {
            let t_deg = rng.gen_range(0..=1u32);
            let mut m = mono.clone();
            m[ring.gen_index("t").unwrap()] = t_deg;
            w.add_term(m, Rat::from_int(rng.gen_range(-4..=4)));
        }
        if w.is_zero() {
            continue;
        }
        let fam = PotentialFamily::new(&w, "t", vec![Rat::zero()]).unwrap();
        let report = fam.gm_operator().flatness_check(2).unwrap();
        pass = pass && report.flat();
    }
    c.finish(pass);
}

fn poly_monomials(
    ring: &crithom::poly::AlgebraRef,
    vars: &[&str],
    degree: usize,
) -> Vec<crithom::poly::Monomial> {
    let idx: Vec<usize> = vars.iter().map(|v| ring.gen_index(v).unwrap()).collect();
    let mut out = Vec::new();
    for alpha in crithom::dcrit::exponent_vectors(idx.len(), degree) {
        let mut m = vec![0u32; ring.num_gens()];
        for (slot, &e) in alpha.iter().enumerate() {
            m[idx[slot]] = e;
        }
        out.push(m);
    }
    out
}

#[test]
fn criterion_08_family_constancy() {
    let c = Criterion::new("8 family dimension constancy", 60);
    let ring = TruncatedPolyAlgebra::even(&["t", "x"], 14);
    let w = PolyElement::parse(&ring, "x^3 - t*x").unwrap();
    let grid = vec![Rat::from_int(-1), Rat::zero(), Rat::one(), Rat::from_int(2)];
    let fam = PotentialFamily::new(&w, "t", grid).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let scan = fam.gm_operator().family_scan(6, 3, &mut rng).unwrap();
    let mut pass = scan.constant;
    for row in &scan.rows {
        pass = pass && row.total == 2 && row.stable;
    }
    c.finish(pass);
}

#[test]
fn criterion_09_bar_and_spectral_machinery() {
    let c = Criterion::new("9 bar Tor and filtered spectral sequence", 120);
    let mut pass = true;
    // Tor over the dual numbers: 1 in every certified degree ≤ 4.  Oracle:
    // the 2-periodic minimal resolution … → A →^x A → Q tensors down to
    // zero maps, so every Tor is one-dimensional.
    {
        use crithom::bar::*;
        let algebra = FiniteAlgebra::truncated_power(2);
        let pair = AugmentedAlgebraModulePair {
            right: FiniteModule::augmentation(&algebra),
            left: FiniteModule::augmentation(&algebra),
            algebra,
        };
        let table = bar_tor_dims(&pair, 6, None);
        for n in 0..=4 {
            pass = pass && table.certified[&n] && table.dims[&n] == 1;
        }
        // Transversal lines: Tor concentrated in degree 0 with Tor₀ equal
        // to the direct tensor dimension.
        let algebra = FiniteAlgebra::truncated_plane(2);
        let x = algebra.names().iter().position(|n| n == "x").unwrap();
        let y = algebra.names().iter().position(|n| n == "y").unwrap();
        let pair = AugmentedAlgebraModulePair {
            right: FiniteModule::regular_mod_generator(&algebra, x, true),
            left: FiniteModule::regular_mod_generator(&algebra, y, false),
            algebra: algebra.clone(),
        };
        let table = bar_tor_dims(&pair, 6, algebra.top_weight());
        pass = pass && table.dims[&0] == 1 && table.dims[&0] == tensor_dim_direct(&pair);
        for n in 1..=4 {
            pass = pass && table.dims[&n] == 0;
        }
    }
    // The bar-filtration spectral sequence of the toy converges:
    // Σ dim E_∞ = dim H(total) on this and the two smaller presets.
    for preset in ["trivial", "cone", "bar-toy"] {
        let sc = Scenario::from_json(&json!({
            "command": "ss-demo",
            "payload": { "preset": preset },
        }))
        .unwrap();
        let (report, outcome) = run(&sc);
        pass = pass
            && outcome == crithom::scenario::Outcome::Pass
            && report["result"]["converged"] == json!(true);
    }
    c.finish(pass);
}

#[test]
fn criterion_10_deterministic_reports() {
    let c = Criterion::new("10 byte-identical reports", 60);
    let mut pass = true;
    for doc in [
        json!({ "command": "ext-basic", "seed": 5 }),
        json!({ "command": "gm-check", "payload": { "family": "x^3 - t*x" } }),
        json!({ "command": "hp", "payload": { "power": 8, "h": "-x^2" }, "bar_window": 4 }),
        json!({ "command": "bar-tor", "payload": { "preset": "transversal" } }),
    ] {
        let sc1 = Scenario::from_json(&doc).unwrap();
        let sc2 = Scenario::from_json(&doc).unwrap();
        let (a, _) = run(&sc1);
        let (b, _) = run(&sc2);
        pass = pass
            && serde_json::to_vec(&a).unwrap() == serde_json::to_vec(&b).unwrap();
    }
    c.finish(pass);
}
