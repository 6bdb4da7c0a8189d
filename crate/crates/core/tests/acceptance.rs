//! Acceptance criteria 1 to 9. Each test writes one `PASS`/`FAIL` line to
//! stderr (bypassing the test harness capture) before asserting.

use std::f64::consts::LN_2;
use std::io::Write;
use std::time::{Duration, Instant};

use cvdistill::cli::{
    oracle_check, random_mixed_case, scan_bipartitions, sweep_squeezing, trace_block, trial_rng, two_path_block,
    verify_bounds, Experiment, NetworkConfig, PartitionLabel, RunConfig,
};
use cvdistill::fock::FockArray;
use cvdistill::gaussian::WilliamsonDecomposition;
use cvdistill::networks::{chain_elements, grid_adjacency, ChainSpec};
use cvdistill::photon::relative_purity;
use cvdistill::{
    entanglement_increase, relative_purity_closed_form, BogoliubovRow, CircuitElement, GaussianState, PhotonOp,
    Subsystem, SymplecticMatrix,
};
use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;

const SEED: u64 = 20_240_601;

fn report(id: u32, name: &str, ok: bool, detail: String) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {id} [{name}]: {verdict} ({detail})");
    assert!(ok, "criterion {id} [{name}] failed: {detail}");
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[test]
fn criterion_1_purity_bound() {
    let start = Instant::now();
    let mut detail = Vec::new();
    let mut ok = true;
    for kind in [PhotonOp::Subtract, PhotonOp::Add] {
        let mut cfg = RunConfig::new(Experiment::VerifyBounds);
        cfg.trials = 10_000;
        cfg.seed = SEED;
        cfg.kind = kind;
        let s = verify_bounds(&cfg).unwrap();
        ok &= s.violations == 0 && s.min_ratio >= 0.5 - 1e-12;
        detail.push(format!("{kind}: min ratio {:.6}, violations {}", s.min_ratio, s.violations));
    }
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(60);
    report(1, "purity bound", ok, format!("{}; {elapsed:.2?}", detail.join("; ")));
}

#[test]
fn criterion_2_bound_saturation() {
    let mut worst: f64 = 0.0;
    let mut at_100 = 0.0;
    for n in [2.0, 10.0, 100.0] {
        let decomp = WilliamsonDecomposition {
            symplectic: SymplecticMatrix::identity(1),
            nu: vec![n],
            mean: DVector::zeros(2),
        };
        let row = BogoliubovRow { k: vec![c(0.0)], l: vec![c(1.0)], alpha_g: c(0.0) };
        let ratio = relative_purity_closed_form(&decomp, &row, PhotonOp::Subtract).unwrap();
        worst = worst.max((ratio - (n * n + 1.0) / (2.0 * n * n)).abs());
        if n == 100.0 {
            at_100 = ratio;
        }
    }
    let ok = worst <= 1e-12 && (at_100 - 0.50005).abs() <= 1e-12 && (at_100 - 0.5).abs() <= 1e-4;
    report(2, "bound saturation", ok, format!("max deviation {worst:.2e}, n=100 ratio {at_100:.8}"));
}

#[test]
fn criterion_3_entanglement_bound() {
    let start = Instant::now();
    let bound = LN_2 + 1e-9;
    let mut max_delta: f64 = 0.0;
    let mut rows = 0usize;

    let mut sweep = RunConfig::new(Experiment::SweepSqueezing);
    sweep.grid = cvdistill::cli::parse_grid("0:2:0.1").unwrap();
    sweep.alphas = vec![c(0.0), c(0.5)];
    let curve = sweep_squeezing(&sweep).unwrap();

    for &r in &sweep.grid {
        for &alpha in &sweep.alphas {
            if r == 0.0 && alpha.re == 0.0 {
                continue; // vacuum: subtraction undefined
            }
            let mut scan = RunConfig::new(Experiment::ScanBipartitions);
            scan.grid = vec![r];
            scan.alphas = vec![alpha];
            let table = scan_bipartitions(&scan).unwrap();
            assert_eq!(table.len(), 512);
            rows += table.len();
            max_delta = table.iter().map(|row| row.delta_e).fold(max_delta, f64::max);
        }
    }
    for alpha in [c(0.0), c(0.5)] {
        let mut scan = RunConfig::new(Experiment::ScanBipartitions);
        scan.network = NetworkConfig::Graph { adjacency: grid_adjacency(3, 3) };
        scan.g = 1;
        scan.grid = vec![10.0];
        scan.alphas = vec![alpha];
        let table = scan_bipartitions(&scan).unwrap();
        assert_eq!(table.len(), 256);
        rows += table.len();
        max_delta = table.iter().map(|row| row.delta_e).fold(max_delta, f64::max);
    }

    let g_curve = |alpha: f64, r: f64| {
        curve
            .iter()
            .find(|row| row.partition == PartitionLabel::G && row.alpha_g.re == alpha && (row.x - r).abs() < 1e-12)
            .and_then(|row| row.values)
            .map(|(_, _, d)| d)
            .unwrap()
    };
    let curve_max = curve.iter().filter_map(|row| row.values).map(|v| v.2).fold(0.0, f64::max);
    let rising = [0.0, 0.5].iter().all(|&a| g_curve(a, 0.1) < g_curve(a, 1.0));
    let elapsed = start.elapsed();
    let ok = max_delta <= bound && curve_max < LN_2 && rising && elapsed < Duration::from_secs(300);
    report(
        3,
        "entanglement bound",
        ok,
        format!("{rows} bipartitions, max dE {max_delta:.9}, sweep max {curve_max:.9}, rising {rising}; {elapsed:.2?}"),
    );
}

#[test]
fn criterion_4_bell_limit() {
    let spec = ChainSpec::new(3, 0.01, c(0.0));
    let elems = chain_elements(&spec).unwrap();
    let gs = GaussianState::vacuum(3).apply(&elems).unwrap();
    let sub = Subsystem::new(3, [0]).unwrap();
    let analytic = entanglement_increase(&gs, &sub, spec.g, PhotonOp::Subtract).unwrap().delta;
    let oracle = FockArray::from_circuit(3, 20, &elems, 1e-10).unwrap();
    let before = oracle.reduced_purity(&sub).unwrap();
    let after = oracle.annihilate(spec.g).unwrap().normalized().unwrap().reduced_purity(&sub).unwrap();
    let oracle_delta = before.ln() - after.ln();
    let err = (analytic - oracle_delta).abs() / oracle_delta.abs();
    let ok = analytic >= 0.99 * LN_2 && err <= 1e-6;
    report(4, "Bell-limit saturation", ok, format!("dE {analytic:.9} vs log 2 {LN_2:.9}, oracle rel err {err:.2e}"));
}

#[test]
fn criterion_5_two_path_agreement() {
    let block = two_path_block(SEED, 1_000).unwrap();
    let ok = block.samples == 1_000 && block.max_rel_err <= 1e-8;
    report(5, "two-path agreement", ok, format!("{} samples, max rel err {:.2e}", block.samples, block.max_rel_err));
}

#[test]
fn criterion_6_oracle_equivalence() {
    let start = Instant::now();
    let mut cfg = RunConfig::new(Experiment::OracleCheck);
    cfg.trials = 10;
    let s = oracle_check(&cfg).unwrap();
    let leak = s.cases.iter().filter_map(|c| c.leakage).fold(0.0, f64::max);
    let elapsed = start.elapsed();
    let ok = s.failures == 0 && s.max_rel_err <= 1e-6 && leak < 1e-10 && elapsed < Duration::from_secs(120);
    report(
        6,
        "oracle equivalence",
        ok,
        format!(
            "{} cases, {} failures, max rel err {:.2e}, max leakage {leak:.1e}; {elapsed:.2?}",
            s.cases.len(),
            s.failures,
            s.max_rel_err
        ),
    );
}

#[test]
fn criterion_7_trace_identities() {
    let block = trace_block(&[1.5, 2.0, 5.0]).unwrap();
    report(7, "thermal trace identities", block.max_rel_err <= 1e-8, format!("max rel err {:.2e}", block.max_rel_err));
}

#[test]
fn criterion_8_pure_fixpoint() {
    let mut worst: f64 = 0.0;
    for trial in 0..100u64 {
        let mut rng = trial_rng(SEED, trial);
        let m = rng.random_range(2..=4usize);
        let mut elems = Vec::new();
        for mode in 0..m {
            elems.push(CircuitElement::SingleModeSqueezer { mode, r: rng.random_range(-1.0..1.0) });
            let alpha = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            elems.push(CircuitElement::displace_mode(mode, alpha, m).unwrap());
        }
        let state = GaussianState::vacuum(m).apply(&elems).unwrap();
        let g = rng.random_range(0..m);
        let mask = rng.random_range(0..1u64 << m) | (1 << g);
        let sub = Subsystem::from_mask(m, mask).unwrap();
        for kind in [PhotonOp::Subtract, PhotonOp::Add] {
            worst = worst.max((relative_purity(&state, &sub, g, kind).unwrap() - 1.0).abs());
        }
    }
    report(8, "pure-state fixpoint", worst <= 1e-10, format!("100 product states, max |ratio - 1| {worst:.2e}"));
}

#[test]
fn criterion_9_williamson_round_trip() {
    let (mut recon, mut sympl): (f64, f64) = (0.0, 0.0);
    for trial in 0..1_000u64 {
        let (state, _) = random_mixed_case(&mut trial_rng(SEED ^ 0x9e37, trial));
        let d = state.williamson().unwrap();
        recon = recon.max(d.reconstruction_error(state.cov()));
        sympl = sympl.max(d.symplectic.symplecticity_error());
    }
    let ok = recon <= 1e-8 && sympl <= 1e-9;
    report(9, "Williamson round trip", ok, format!("max reconstruction {recon:.2e}, max symplecticity {sympl:.2e}"));
}
