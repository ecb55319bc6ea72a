//! End-to-end random wiretap code simulation: sample a codebook from the
//! restricted typical distribution, build the square-root decoder, then
//! measure adversarial error, leakage, and the covering gap. Sweeping the
//! randomization depth L shows the covering mechanism driving both secrecy
//! statistics down.
//!
//! ```bash
//! cargo run --release -p cqavwc --example wiretap_simulation
//! ```

use cqavwc::channel::{CqavwcChannel, Distribution};
use cqavwc::coding::{run_secrecy_experiment, ExperimentParams};
use cqavwc::qmath::{cplx, DensityOperator};

fn labels(ls: &[&str]) -> Vec<String> {
    ls.iter().map(|s| s.to_string()).collect()
}

fn two_jammer() -> CqavwcChannel {
    let damp = |k: usize, eps: f64| {
        DensityOperator::mixture(&[
            (1.0 - eps, &DensityOperator::basis_state(2, k)),
            (eps, &DensityOperator::maximally_mixed(2)),
        ])
        .unwrap()
    };
    let plus = DensityOperator::pure_from_ket(&[cplx(1.0, 0.0), cplx(1.0, 0.0)]).unwrap();
    let minus = DensityOperator::pure_from_ket(&[cplx(1.0, 0.0), cplx(-1.0, 0.0)]).unwrap();
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
    if xs.len().is_multiple_of(2) { 0.5 * (xs[mid - 1] + xs[mid]) } else { xs[mid] }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    cqavwc::init_thread_pool_from_env();
    let ch = two_jammer();
    let p = Distribution::uniform(ch.inputs())?;

    // One detailed run.
    let mut params = ExperimentParams::new(6, 2, 4, 0);
    params.delta = 0.25;
    params.alpha = 0.5;
    let report = run_secrecy_experiment(&ch, &p, &params)?;
    println!("single run (n=6, J=2, L=4, seed 0):");
    println!("  message rate        = {:.4} bits/letter", report.rate_message);
    println!("  max decoding error  = {:.4} at t^n = {}", report.max_error, report.argmax_t_seq);
    println!("  worst leakage       = {:.4} bits", report.max_leakage_bits());
    println!("  worst covering gap  = {:.4}", report.max_covering_gap());
    println!("  gentle margin       = {:+.4}", report.gentle_worst_margin);
    println!("  max sandwich damage = {:.4}", report.sandwich_distance_max);

    // Median over seeds as L grows: the randomization index is what hides
    // the message from the eavesdropper.
    let seeds = 20u64;
    println!("\nL-sweep, medians over {seeds} seeds (n=6, J=2):");
    println!("{:>4} {:>16} {:>16} {:>12}", "L", "covering gap", "leakage (bits)", "max error");
    for l_count in [1usize, 2, 4, 8] {
        let mut gaps = Vec::new();
        let mut leaks = Vec::new();
        let mut errs = Vec::new();
        for seed in 0..seeds {
            let mut p_run = ExperimentParams::new(6, 2, l_count, seed);
            p_run.delta = 0.25;
            p_run.alpha = 0.5;
            let r = run_secrecy_experiment(&ch, &p, &p_run)?;
            gaps.push(r.max_covering_gap());
            leaks.push(r.max_leakage_bits());
            errs.push(r.max_error);
        }
        println!(
            "{l_count:>4} {:>16.6} {:>16.6} {:>12.6}",
            median(gaps),
            median(leaks),
            median(errs)
        );
    }
    Ok(())
}
