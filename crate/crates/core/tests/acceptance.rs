//! Acceptance gate. Each test checks one criterion at its stated tolerance
//! and prints a single PASS/FAIL line; run with `--nocapture` to see them.

mod common;

use std::time::Instant;

use num_complex::Complex64;
use onebody::entropy::{self, EntropyFunction};
use onebody::flo::{apply_one_body_unitary, measure_occupation};
use onebody::fock::{ghz_like_state, random_pure_state, seeded_rng};
use onebody::linalg::{max_abs, CMat};
use onebody::majorization::{complement_spectrum, majorizes, union_spectra, DEFAULT_SLACK, DEFAULT_TRACE_TOL};
use onebody::modemap::{self, block_unitary, theta_map, TensorState};
use onebody::schmidt;
use onebody::spdm::{self, HermitianMatrix, SortedSpectrum};
use onebody::verify::{self, Suite, SuiteConfig, SuiteRun};
use rand::Rng;

fn report(id: u32, name: &str, ok: bool, detail: String) {
    println!("criterion {id:>2} [{name}]: {} ({detail})", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {id} [{name}] failed: {detail}");
}

fn suite(s: Suite, trials: usize) -> SuiteRun {
    let cfg = SuiteConfig { trials, base_seed: 0, slack: DEFAULT_SLACK, ..Default::default() };
    verify::run_suite(s, &cfg).expect("suite runs")
}

fn summary_detail(run: &SuiteRun) -> String {
    let s = &run.summary;
    format!(
        "{}/{} reports hold, {} skipped, worst margin {:?}",
        s.reports - s.failures - s.skipped,
        s.reports - s.skipped,
        s.skipped,
        s.worst_margin
    )
}

#[test]
fn criterion_01_occupation_measurement_majorization() {
    let start = Instant::now();
    let run = suite(Suite::Theorem1, 1000);
    let secs = start.elapsed().as_secs_f64();
    let mut shapes = std::collections::BTreeSet::new();
    for r in &run.reports {
        shapes.insert((r.trial.n, r.trial.big_n.unwrap()));
    }
    let covered = [4, 6, 8].iter().all(|&n| [2, 3, 4].iter().all(|&m| shapes.contains(&(n, m))));
    let ok = run.summary.reports == 1000 && run.summary.failures == 0 && covered && secs < 60.0;
    report(1, "theorem1", ok, format!("{}, {secs:.2}s, all (n, N) shapes: {covered}", summary_detail(&run)));
}

#[test]
fn criterion_02_generalized_measurement_majorization() {
    let run = suite(Suite::Corollary1, 500);
    let edge = run
        .reports
        .iter()
        .filter(|r| {
            let p = &r.trial.params["params"];
            let norm = |key: &str| {
                let a = &p[key];
                Complex64::new(a[0].as_f64().unwrap(), a[1].as_f64().unwrap()).norm()
            };
            (norm("alpha") - norm("beta")).abs() < 1e-12
        })
        .count();
    let ok = run.summary.reports == 500 && run.summary.failures == 0 && edge >= 50;
    report(2, "corollary1", ok, format!("{}, {edge} trials at |α| = |β|", summary_detail(&run)));
}

#[test]
fn criterion_03_ladder_measurement_extended_majorization() {
    let run = suite(Suite::Corollary2, 500);
    let worst = run.reports.iter().filter_map(|r| r.diagnostics.residual).fold(0.0, f64::max);
    let ok = run.summary.reports == 500 && run.summary.failures == 0 && worst <= 1e-10;
    report(3, "corollary2", ok, format!("{}, ladder∘ladder residual {worst:e}", summary_detail(&run)));
}

#[test]
fn criterion_04_isospectrality() {
    let mut rng = seeded_rng(404);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.random_range(2..=8);
        let big_n = rng.random_range(1..n);
        let s = random_pure_state(n, big_n, rng.random()).unwrap();
        let one = spdm::compute_spdm(&s).unwrap().spectrum().unwrap().nonzero();
        let rest = spdm::rho_n_minus_1_spectrum(&s).unwrap();
        worst = worst.max(one.max_abs_diff(&rest));
    }
    report(4, "isospectrality", worst <= 1e-9, format!("200 states, max elementwise gap {worst:e}"));
}

#[test]
fn criterion_05_schmidt_round_trip() {
    let mut rng = seeded_rng(505);
    let (mut worst_fid, mut worst_res): (f64, f64) = (1.0, 0.0);
    for _ in 0..100 {
        let n = rng.random_range(2..=8);
        let big_n = rng.random_range(1..n);
        let s = random_pure_state(n, big_n, rng.random()).unwrap();
        let sd = schmidt::schmidt_decompose(&schmidt::build_lambda(&s).unwrap()).unwrap();
        let back = schmidt::reconstruct_state(&sd).unwrap();
        worst_fid = worst_fid.min(back.fidelity(&s).unwrap());
        worst_res = worst_res.max(schmidt::natural_mode_check(&s, &sd).unwrap().max_residual());
    }
    let ok = worst_fid >= 1.0 - 1e-10 && worst_res <= 1e-9;
    report(5, "schmidt", ok, format!("min fidelity {worst_fid}, max natural-mode residual {worst_res:e}"));
}

#[test]
fn criterion_06_sd_preservation() {
    let run = suite(Suite::SdPreservation, 500);
    let ops: std::collections::BTreeSet<String> =
        run.reports.iter().map(|r| r.trial.params["op"].as_str().unwrap().to_string()).collect();
    let ok = run.summary.reports == 2000 && run.summary.failures == 0 && ops.len() == 4;
    report(6, "sd-preservation", ok, format!("{}, ops {ops:?}", summary_detail(&run)));
}

#[test]
fn criterion_07_maximal_states() {
    let mut worst_rho: f64 = 0.0;
    let mut worst_d: f64 = 0.0;
    let mut worst_s1: f64 = 0.0;
    for (n, big_n) in [(4, 2), (6, 2), (6, 3), (8, 4)] {
        let m = n / big_n;
        let g = ghz_like_state(n, big_n).unwrap();
        let rho = spdm::compute_spdm(&g).unwrap();
        let target = CMat::identity(n, n).scale(1.0 / m as f64);
        worst_rho = worst_rho.max(max_abs(&(rho.matrix() - target)));
        if m == 2 {
            let d = spdm::extended_dm(&rho);
            worst_d = worst_d.max(max_abs(&(d.matrix() - CMat::identity(2 * n, 2 * n).scale(0.5))));
            worst_s1 = worst_s1.max((entropy::one_body_entropy_s1(&rho).unwrap() - n as f64).abs());
        }
    }
    let ok = worst_rho <= 1e-12 && worst_d <= 1e-12 && worst_s1 <= 1e-10;
    report(7, "maximal", ok, format!("|ρ - 𝟙/m| {worst_rho:e}, |D - 𝟙/2| {worst_d:e}, |s1 - n| {worst_s1:e}"));
}

#[test]
fn criterion_08_nonfree_witness() {
    let input = verify::nonfree_witness_input().unwrap();
    let out = onebody::flo::measure_two_mode_joint(&input, 0, 2).unwrap();
    let m1 = out[1].pure().unwrap();
    let rank = schmidt::slater_rank_two_fermion(m1).unwrap();
    let e = entropy::one_body_entanglement(m1, &EntropyFunction::von_neumann()).unwrap();
    let r = verify::verify_nonfree_witness(DEFAULT_SLACK).unwrap();
    let ong_fails = !r.verdict.as_ref().unwrap().holds;
    let ok = rank == 2 && e > 0.5 && ong_fails && r.passed;
    report(8, "nonfree-witness", ok, format!("M1 rank {rank}, E = {e}, majorization check fails: {ong_fails}"));
}

#[test]
fn criterion_09_monotone_decrease() {
    let run = suite(Suite::Monotone, 500);
    let ok = run.summary.reports == 500 * 2 * 4 && run.summary.failures == 0;
    report(9, "monotone", ok, summary_detail(&run));
}

#[test]
fn criterion_10_mixed_states_via_purification() {
    let run = suite(Suite::Purification, 100);
    let ok = run.summary.reports == 100 && run.summary.failures == 0;
    report(10, "purification", ok, summary_detail(&run));
}

#[test]
fn criterion_11_theta_map() {
    let mut rng = seeded_rng(1111);
    let (mut block, mut mono, mut meas, mut nat): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for t in 0..200 {
        let dims = if t % 2 == 0 { vec![2, 2] } else { vec![2, 2, 2] };
        let ts = TensorState::random(&dims, &mut rng).unwrap();
        let f = theta_map(&ts).unwrap();
        let rho = spdm::compute_spdm(&f).unwrap();
        // block identity and vanishing cross blocks
        let part = ts.partition();
        let mut direct_sum = CMat::zeros(f.n_modes(), f.n_modes());
        for (i, b) in part.blocks().iter().enumerate() {
            let local = ts.local_density(i);
            for (a, &ka) in b.iter().enumerate() {
                for (c, &kc) in b.iter().enumerate() {
                    direct_sum[(ka, kc)] = local[(a, c)];
                }
            }
        }
        block = block.max(max_abs(&(rho.matrix() - direct_sum)));
        for e in [EntropyFunction::von_neumann(), EntropyFunction::linear()] {
            let lhs = modemap::multipartite_monotone(&ts, &e).unwrap();
            let rhs = entropy::one_body_entanglement(&f, &e).unwrap();
            mono = mono.max((lhs - rhs).abs());
        }
        for (i, off) in ts.offsets().into_iter().enumerate() {
            for (a, (p, post)) in ts.measure_local(i).unwrap().into_iter().enumerate() {
                let occ = &measure_occupation(&f, off + a).unwrap()[0];
                meas = meas.max((occ.probability - p).abs());
                if let Some(post) = post {
                    meas = meas.max(theta_map(&post).unwrap().max_diff(occ.pure().unwrap()).unwrap());
                }
            }
        }
        let i = t % dims.len();
        let u = onebody::linalg::haar_unitary(2, &mut rng);
        let lhs = theta_map(&ts.apply_local(i, &u).unwrap()).unwrap();
        let rhs = apply_one_body_unitary(&f, &block_unitary(&dims, i, &u).unwrap()).unwrap();
        nat = nat.max(1.0 - lhs.fidelity(&rhs).unwrap());
    }
    let ok = block <= 1e-10 && mono <= 1e-10 && meas <= 1e-10 && nat <= 1e-10;
    report(
        11,
        "theta",
        ok,
        format!("block {block:e}, monotone {mono:e}, local measurement {meas:e}, naturality {nat:e}"),
    );
}

#[test]
fn criterion_12_majorization_lemmas_and_lp_oracle() {
    let mut rng = seeded_rng(1212);
    let spec = |v: Vec<f64>| SortedSpectrum::new(v).unwrap();
    let holds = |y: &SortedSpectrum, x: &SortedSpectrum| majorizes(y, x, DEFAULT_SLACK, DEFAULT_TRACE_TOL).unwrap().holds;
    let mut lemma_failures = 0;
    for _ in 0..10_000 {
        let n = rng.random_range(1..=8);
        let (x, y) = common::random_majorized_pair(&mut rng, n);
        let (u, w) = common::random_majorized_pair(&mut rng, n);
        let (x, y, u, w) = (spec(x), spec(y), spec(u), spec(w));
        let base = holds(&y, &x) && holds(&w, &u);
        let complement = holds(&complement_spectrum(&y).unwrap(), &complement_spectrum(&x).unwrap());
        let union = holds(&union_spectra(&y, &w), &union_spectra(&x, &u));
        let extended = holds(
            &union_spectra(&y, &complement_spectrum(&y).unwrap()),
            &union_spectra(&x, &complement_spectrum(&x).unwrap()),
        );
        if !(base && complement && union && extended) {
            lemma_failures += 1;
        }
    }
    let mut disagreements = 0;
    let mut positives = 0;
    for t in 0..1000 {
        let n = rng.random_range(1..=4);
        let (x, y) = if t % 2 == 0 {
            common::random_majorized_pair(&mut rng, n)
        } else {
            common::random_equal_sum_pair(&mut rng, n)
        };
        let lp = common::majorized_by_lp(&x, &y);
        let thr = common::majorized_by_thresholds(&x, &y, 1e-12);
        let ours = holds(&spec(y), &spec(x));
        positives += usize::from(lp);
        if lp != ours || thr != ours {
            disagreements += 1;
        }
    }
    let ok = lemma_failures == 0 && disagreements == 0;
    report(
        12,
        "majorization",
        ok,
        format!("lemma failures {lemma_failures}/10000, oracle disagreements {disagreements}/1000 ({positives} majorized)"),
    );
}

#[test]
fn criterion_13_two_fermion_mode_relation() {
    let mut rng = seeded_rng(1313);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(2..=8);
        let s = random_pure_state(n, 2, rng.random()).unwrap();
        for f in [EntropyFunction::von_neumann(), EntropyFunction::linear()] {
            worst = worst.max(modemap::two_fermion_mode_relation(&s, &f).unwrap().residual);
        }
    }
    report(13, "two-fermion", worst <= 1e-9, format!("100 states, max |E(A,B) - E/2| {worst:e}"));
}

