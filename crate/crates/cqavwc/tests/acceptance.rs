//! Acceptance suite: one test per criterion, each printing a pass line with
//! its elapsed time (visible with `--nocapture`).
//!
//! ```bash
//! cargo test -p cqavwc --test acceptance -- --nocapture
//! ```

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use cqavwc::channel::{Caps, CqavwcChannel, Distribution};
use cqavwc::coding::{
    adversarial_error, pgm_decoder, run_secrecy_experiment, uniform_q_letters, ExperimentParams,
    WiretapCodebook,
};
use cqavwc::infoquant::{holevo_chi, lower_bound_csi, lower_bound_no_csi, ChiEnsemble, GridConfig};
use cqavwc::qmath::{
    random_density, trace_norm, von_neumann_entropy, CMatrix, DensityOperator,
};
use cqavwc::sweeps::{fannes_sweep, gentle_sweep, mass_sweep};
use cqavwc::symmetrize::{
    check_symmetrizable, random_symmetrizable_family, xor_family, StateFamily, TOL_SYM,
};
use cqavwc::typical::{iid_mass_checks, product_of_letters, product_projector, projector_mass_checks};

fn labels(ls: &[&str]) -> Vec<String> {
    ls.iter().map(|s| s.to_string()).collect()
}

fn uniform2() -> Distribution {
    Distribution::uniform(&labels(&["0", "1"])).unwrap()
}

fn budget(name: &str, started: Instant, limit_s: f64) {
    let elapsed = started.elapsed().as_secs_f64();
    println!("{name} pass ({elapsed:.2}s, budget {limit_s}s)");
    assert!(elapsed < limit_s, "{name} exceeded its runtime budget: {elapsed:.2}s >= {limit_s}s");
}

/// A1: entropy and Holevo identities.
#[test]
fn a1_entropy_and_chi_identities() {
    let started = Instant::now();
    for d in 2..=8usize {
        let s = von_neumann_entropy(&DensityOperator::maximally_mixed(d));
        assert!((s - (d as f64).log2()).abs() <= 1e-9, "S(I_{d}/{d}) = {s}");
    }
    let uniform = uniform2();
    let orthogonal = ChiEnsemble::new(
        uniform.clone(),
        vec![DensityOperator::basis_state(2, 0), DensityOperator::basis_state(2, 1)],
    )
    .unwrap();
    assert!((holevo_chi(&orthogonal).unwrap() - 1.0).abs() <= 1e-9);

    let mut rng = ChaCha12Rng::seed_from_u64(101);
    let rho = random_density(&mut rng, 2);
    let identical = ChiEnsemble::new(uniform, vec![rho.clone(), rho]).unwrap();
    assert!(holevo_chi(&identical).unwrap().abs() <= 1e-9);
    budget("A1", started, 1.0);
}

/// A2: gentle-measurement and entropy-continuity sweeps, 1000 instances at
/// dims 2 and 4, zero violations.
#[test]
fn a2_lemma_sweeps() {
    let started = Instant::now();
    for dim in [2usize, 4] {
        let gentle = gentle_sweep(1000, dim, 0).unwrap();
        assert_eq!(gentle.violations, 0, "gentle violations at dim {dim}");
        assert!(gentle.worst_margin >= -1e-9);
        let fannes = fannes_sweep(1000, dim, 0).unwrap();
        assert_eq!(fannes.violations, 0, "fannes violations at dim {dim}");
        assert!(fannes.applicable > 0, "no applicable pairs at dim {dim}");
    }
    budget("A2", started, 10.0);
}

/// A3: typical-projector captured mass against its floor (whenever positive),
/// plus the constant-free rank and sandwich bounds, over 100 random qubit
/// letters at n in {4,8,12} and alpha in {0.25,0.5,1.0} - zero violations.
#[test]
fn a3_typical_projector_mass() {
    let started = Instant::now();
    let report = mass_sweep(&[4, 8, 12], &[0.25, 0.5, 1.0], 100, 2, 0).unwrap();
    assert_eq!(report.instances, 900);
    assert!(report.mass_applicable > 0);
    assert_eq!(report.mass_violations, 0, "mass floor violated");
    assert_eq!(report.rank_violations, 0, "rank bound violated");
    assert_eq!(report.sandwich_violations, 0, "sandwich bound violated");

    // Cross-check the factored evaluation against a dense decomposition of
    // the materialized product state at n = 4.
    let mut rng = ChaCha12Rng::seed_from_u64(33);
    let caps = Caps::default();
    for _ in 0..10 {
        let letter = random_density(&mut rng, 2);
        for alpha in [0.25f64, 0.5, 1.0] {
            let fast = iid_mass_checks(&letter, 4, alpha).unwrap();
            let letters = vec![letter.clone(); 4];
            let state = product_of_letters(&letters, &caps).unwrap();
            let proj = product_projector(&letters, alpha, None, &caps).unwrap();
            let dense = projector_mass_checks(&state, &proj, 2, 2).unwrap();
            assert_eq!(dense.selected_count, fast.selected_count);
            assert!((dense.captured_mass - fast.captured_mass).abs() <= 1e-9);
        }
    }
    budget("A3", started, 60.0);
}

/// Analytic 2x2 Hermitian trace norm, the independent oracle path for A4.
fn herm2_trace_norm(m: &CMatrix) -> f64 {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = m[(0, 1)];
    let mean = 0.5 * (a + d);
    let radius = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    (mean + radius).abs() + (mean - radius).abs()
}

fn grid_oracle_feasible(family: &StateFamily, step: f64) -> bool {
    let cells = (1.0 / step).round() as usize;
    let r00 = family.op(0, 0).matrix();
    let r01 = family.op(0, 1).matrix();
    let r10 = family.op(1, 0).matrix();
    let r11 = family.op(1, 1).matrix();
    let mut best = f64::INFINITY;
    for i in 0..=cells {
        let u0 = i as f64 * step;
        let left = r10.scale(u0) + r11.scale(1.0 - u0);
        for j in 0..=cells {
            let u1 = j as f64 * step;
            let m = &left - (r00.scale(u1) + r01.scale(1.0 - u1));
            best = best.min(herm2_trace_norm(&m));
        }
    }
    let lipschitz = herm2_trace_norm(&(r10 - r11)) + herm2_trace_norm(&(r00 - r01));
    best <= 0.5 * step * lipschitz + TOL_SYM
}

/// A4: symmetrizability verdicts with certificates, checked against the
/// 0.01-step grid oracle on 200 random binary qubit families.
#[test]
fn a4_symmetrizability() {
    let started = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(404);

    let tau0 = random_density(&mut rng, 2);
    let tau1 = random_density(&mut rng, 2);
    let xor = xor_family(&tau0, &tau1).unwrap();
    let verdict = check_symmetrizable(&xor, TOL_SYM).unwrap();
    assert!(verdict.symmetrizable);
    assert!(verdict.residual <= 1e-7, "certificate residual {}", verdict.residual);
    assert!(verdict.certificate.is_some());

    let fixed = StateFamily::new(
        labels(&["0", "1"]),
        labels(&["0", "1"]),
        vec![
            vec![DensityOperator::basis_state(2, 0), DensityOperator::basis_state(2, 0)],
            vec![DensityOperator::basis_state(2, 1), DensityOperator::basis_state(2, 1)],
        ],
    )
    .unwrap();
    assert!(!check_symmetrizable(&fixed, TOL_SYM).unwrap().symmetrizable);

    let trials = 200;
    let mut agreements = 0;
    for trial in 0..trials {
        let family = if trial % 2 == 0 {
            StateFamily::new(
                labels(&["0", "1"]),
                labels(&["0", "1"]),
                vec![
                    vec![random_density(&mut rng, 2), random_density(&mut rng, 2)],
                    vec![random_density(&mut rng, 2), random_density(&mut rng, 2)],
                ],
            )
            .unwrap()
        } else {
            random_symmetrizable_family(&mut rng)
        };
        let verdict = check_symmetrizable(&family, TOL_SYM).unwrap();
        if verdict.symmetrizable == grid_oracle_feasible(&family, 0.01) {
            agreements += 1;
        }
    }
    let needed = (trials as f64 * 0.99).ceil() as usize;
    assert!(agreements >= needed, "only {agreements}/{trials} verdicts agree with the oracle");
    budget("A4", started, 120.0);
}

fn singleton_clean_channel() -> CqavwcChannel {
    let mixed = DensityOperator::maximally_mixed(2);
    CqavwcChannel::from_states(
        labels(&["0", "1"]),
        labels(&["t"]),
        vec![vec![DensityOperator::basis_state(2, 0)], vec![DensityOperator::basis_state(2, 1)]],
        vec![vec![mixed.clone()], vec![mixed]],
    )
    .unwrap()
}

fn flip_channel() -> CqavwcChannel {
    let zero = DensityOperator::basis_state(2, 0);
    let one = DensityOperator::basis_state(2, 1);
    let mixed = DensityOperator::maximally_mixed(2);
    CqavwcChannel::from_states(
        labels(&["0", "1"]),
        labels(&["0", "1"]),
        vec![vec![zero.clone(), one.clone()], vec![one, zero]],
        vec![vec![mixed.clone(), mixed.clone()], vec![mixed.clone(), mixed]],
    )
    .unwrap()
}

/// A5: secrecy-bound sanity: the clean channel delivers one bit, the
/// symmetrizable channel is gated to zero with an explanatory note, and the
/// CSI bound dominates the no-CSI bound on 50 random channels at n = 1.
#[test]
fn a5_bound_sanity() {
    let started = Instant::now();
    let grid = GridConfig::default();
    let caps = Caps::default();

    let clean = singleton_clean_channel();
    let report = lower_bound_no_csi(&clean, &grid, 1, &caps).unwrap();
    assert!((report.bound_value_bits - 1.0).abs() <= 1e-3, "bound {}", report.bound_value_bits);

    let flip = flip_channel();
    for gated in
        [lower_bound_no_csi(&flip, &grid, 1, &caps).unwrap(), lower_bound_csi(&flip, &grid, 1, &caps).unwrap()]
    {
        assert_eq!(gated.bound_value_bits, 0.0);
        assert!(
            gated.symmetrizability_note.contains("symmetrizable")
                && gated.symmetrizability_note.contains("capacity is 0"),
            "note: {}",
            gated.symmetrizability_note
        );
    }

    let mut rng = ChaCha12Rng::seed_from_u64(505);
    let mut violations = 0;
    for _ in 0..50 {
        let ch = CqavwcChannel::from_states(
            labels(&["0", "1"]),
            labels(&["0", "1"]),
            vec![
                vec![random_density(&mut rng, 2), random_density(&mut rng, 2)],
                vec![random_density(&mut rng, 2), random_density(&mut rng, 2)],
            ],
            vec![
                vec![random_density(&mut rng, 2), random_density(&mut rng, 2)],
                vec![random_density(&mut rng, 2), random_density(&mut rng, 2)],
            ],
        )
        .unwrap();
        let csi = lower_bound_csi(&ch, &grid, 1, &caps).unwrap();
        let nocsi = lower_bound_no_csi(&ch, &grid, 1, &caps).unwrap();
        if csi.bound_value_bits < nocsi.bound_value_bits - 1e-9 {
            violations += 1;
        }
    }
    assert_eq!(violations, 0, "CSI bound fell below the no-CSI bound");
    budget("A5", started, 120.0);
}

/// A6: the square-root measurement decodes orthogonal pure codewords exactly,
/// and the decoder constructor enforces POVM completeness within 1e-8 (any
/// violation anywhere in the suite is a constructor error).
#[test]
fn a6_pgm_exactness() {
    let started = Instant::now();
    let ch = singleton_clean_channel();
    let caps = Caps::default();
    let n = 4;
    let codewords =
        vec![vec![0, 0, 0, 0], vec![0, 1, 0, 1], vec![1, 0, 1, 0], vec![1, 1, 1, 1]];
    let cb = WiretapCodebook::from_codewords(labels(&["0", "1"]), n, 4, 1, codewords, 0).unwrap();
    let q = uniform_q_letters(&ch, n).unwrap();
    let dec = pgm_decoder(&ch, &cb, &uniform2(), &q, 1.0, &caps).unwrap();

    let (completeness, min_eig) = dec.verify().unwrap();
    assert!(completeness <= 1e-8, "completeness residual {completeness}");
    assert!(min_eig >= -1e-9, "negative element eigenvalue {min_eig}");

    let (max_error, _) = adversarial_error(&ch, &cb, &dec, &caps).unwrap();
    assert!(max_error <= 1e-9, "adversarial error {max_error}");
    budget("A6", started, 10.0);
}

fn two_jammer_channel() -> CqavwcChannel {
    let damp = |k: usize, eps: f64| {
        DensityOperator::mixture(&[
            (1.0 - eps, &DensityOperator::basis_state(2, k)),
            (eps, &DensityOperator::maximally_mixed(2)),
        ])
        .unwrap()
    };
    let plus =
        DensityOperator::pure_from_ket(&[cqavwc::qmath::cplx(1.0, 0.0), cqavwc::qmath::cplx(1.0, 0.0)])
            .unwrap();
    let minus =
        DensityOperator::pure_from_ket(&[cqavwc::qmath::cplx(1.0, 0.0), cqavwc::qmath::cplx(-1.0, 0.0)])
            .unwrap();
    let eve = |pure: &DensityOperator, eps: f64| {
        DensityOperator::mixture(&[(1.0 - eps, pure), (eps, &DensityOperator::maximally_mixed(2))])
            .unwrap()
    };
    CqavwcChannel::from_states(
        labels(&["0", "1"]),
        labels(&["0", "1"]),
        vec![vec![damp(0, 0.1), damp(0, 0.25)], vec![damp(1, 0.1), damp(1, 0.25)]],
        vec![vec![eve(&plus, 0.5), eve(&plus, 0.7)], vec![eve(&minus, 0.5), eve(&minus, 0.7)]],
    )
    .unwrap()
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = xs.len() / 2;
    if xs.len().is_multiple_of(2) {
        0.5 * (xs[mid - 1] + xs[mid])
    } else {
        xs[mid]
    }
}

/// A7: on a two-jammer qubit channel at n = 6, J = 2, the median covering gap
/// and median leakage over 50 seeds are nonincreasing across L in {1,2,4,8};
/// the covering gap is identically zero at J = 1.
#[test]
fn a7_covering_and_leakage_trend() {
    let started = Instant::now();
    cqavwc::init_thread_pool_from_env();
    let ch = two_jammer_channel();
    let p = uniform2();
    let seeds = 50u64;

    let mut gap_medians = Vec::new();
    let mut leak_medians = Vec::new();
    for l_count in [1usize, 2, 4, 8] {
        let mut gaps = Vec::new();
        let mut leaks = Vec::new();
        for seed in 0..seeds {
            let mut params = ExperimentParams::new(6, 2, l_count, seed);
            params.delta = 0.25;
            params.alpha = 0.5;
            let report = run_secrecy_experiment(&ch, &p, &params).unwrap();
            assert!(
                report.gentle_worst_margin >= -1e-9,
                "gentle bound violated at L={l_count}, seed {seed}: {}",
                report.gentle_worst_margin
            );
            assert!((0.0..=1.0).contains(&report.max_error));
            gaps.push(report.max_covering_gap());
            leaks.push(report.max_leakage_bits());
        }
        gap_medians.push(median(gaps));
        leak_medians.push(median(leaks));
    }
    println!("A7 medians over {seeds} seeds: gaps {gap_medians:?}, leakage {leak_medians:?}");
    for w in gap_medians.windows(2) {
        assert!(w[1] <= w[0] + 1e-12, "covering-gap medians increased: {gap_medians:?}");
    }
    for w in leak_medians.windows(2) {
        assert!(w[1] <= w[0] + 1e-12, "leakage medians increased: {leak_medians:?}");
    }

    // J = 1: the covering gap is identically zero at every state sequence.
    for seed in 0..5u64 {
        let mut params = ExperimentParams::new(6, 1, 4, seed);
        params.delta = 0.25;
        params.alpha = 0.5;
        let report = run_secrecy_experiment(&ch, &p, &params).unwrap();
        for row in &report.per_t {
            assert_eq!(row.covering_gap, 0.0, "nonzero gap at J=1, seed {seed}");
        }
    }
    budget("A7", started, 600.0);
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// A8: byte-identical stdout when any command is rerun with fixed inputs and
/// seed (one invocation per command).
#[test]
fn a8_cli_determinism() {
    let started = Instant::now();
    let path = fixture("two_jammer.json");
    let path = path.to_str().unwrap();
    let invocations: Vec<Vec<&str>> = vec![
        vec!["validate", path],
        vec!["symmetrize", path, "--mode", "joint"],
        vec!["bound", path, "--mode", "csi", "--n", "1"],
        vec![
            "simulate", path, "--n", "4", "--J", "2", "--L", "2", "--seed", "9", "--delta", "0.4",
        ],
        vec!["lemmas", "--trials", "100", "--dim", "2", "--seed", "2"],
    ];
    for args in invocations {
        let run = |args: &[&str]| {
            Command::new(env!("CARGO_BIN_EXE_cqavwc")).args(args).output().expect("binary runs")
        };
        let first = run(&args);
        let second = run(&args);
        assert!(!first.stdout.is_empty(), "no report for {args:?}");
        assert_eq!(first.stdout, second.stdout, "stdout differs for {args:?}");
        assert_eq!(first.status.code(), second.status.code(), "exit differs for {args:?}");
    }
    budget("A8", started, 120.0);
}

/// The trace-distance evaluation used by the trend experiment agrees with the
/// library's general route on random Hermitian differences; keeps the A4
/// oracle honest.
#[test]
fn analytic_trace_norm_matches_library() {
    let mut rng = ChaCha12Rng::seed_from_u64(77);
    for _ in 0..200 {
        let a = random_density(&mut rng, 2);
        let b = random_density(&mut rng, 2);
        let scale: f64 = rng.random_range(0.1..2.0);
        let diff = (a.matrix() - b.matrix()).scale(scale);
        let fast = herm2_trace_norm(&diff);
        let full = trace_norm(&diff).unwrap();
        assert!((fast - full).abs() <= 1e-10, "{fast} vs {full}");
    }
}
