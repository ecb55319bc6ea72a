//! Secrecy-rate lower bounds with and without channel state information at
//! the transmitter, on three small channels.
//!
//! ```bash
//! cargo run -p cqavwc --example secrecy_bounds
//! ```

use cqavwc::channel::{Caps, CqavwcChannel};
use cqavwc::infoquant::{lower_bound_csi, lower_bound_no_csi, BoundReport, GridConfig};
use cqavwc::qmath::{cplx, DensityOperator};

fn labels(ls: &[&str]) -> Vec<String> {
    ls.iter().map(|s| s.to_string()).collect()
}

fn show(name: &str, report: &BoundReport) {
    println!("{name} [{}]:", report.mode);
    println!("  bound          = {:.4} bits/letter (raw {:+.4})", report.bound_value_bits, report.raw_value_bits);
    println!("  legal term     = {:.4}", report.legal_term_bits);
    println!("  leakage (n'=1..{}) = {:?}", report.n_used, report.leakage_terms_bits);
    println!("  p* = {:?}", report.p_star.weights());
    println!("  q* = {:?}", report.q_star.weights());
    if let Some(t) = &report.t_star {
        println!("  t* = {t}");
    }
    println!("  note: {}", report.symmetrizability_note);
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = GridConfig::default();
    let caps = Caps::default();
    let mixed = DensityOperator::maximally_mixed(2);

    // Clean one-bit channel: orthogonal legal outputs, oblivious eavesdropper.
    let clean = CqavwcChannel::from_states(
        labels(&["0", "1"]),
        labels(&["t"]),
        vec![vec![DensityOperator::basis_state(2, 0)], vec![DensityOperator::basis_state(2, 1)]],
        vec![vec![mixed.clone()], vec![mixed.clone()]],
    )?;
    show("clean wiretap channel", &lower_bound_no_csi(&clean, &grid, 1, &caps)?);
    println!();

    // Jointly symmetrizable legal family: the zero-capacity gate fires.
    let zero = DensityOperator::basis_state(2, 0);
    let one = DensityOperator::basis_state(2, 1);
    let flip = CqavwcChannel::from_states(
        labels(&["0", "1"]),
        labels(&["0", "1"]),
        vec![vec![zero.clone(), one.clone()], vec![one.clone(), zero.clone()]],
        vec![vec![mixed.clone(), mixed.clone()], vec![mixed.clone(), mixed.clone()]],
    )?;
    show("state-flip channel", &lower_bound_no_csi(&flip, &grid, 1, &caps)?);
    println!();

    // Noisy wiretap channel with two jammer states: compare both scenarios
    // at leakage block lengths 1 and 2.
    let damp = |k: usize, eps: f64| {
        DensityOperator::mixture(&[
            (1.0 - eps, &DensityOperator::basis_state(2, k)),
            (eps, &DensityOperator::maximally_mixed(2)),
        ])
        .unwrap()
    };
    let plus = DensityOperator::pure_from_ket(&[cplx(1.0, 0.0), cplx(1.0, 0.0)])?;
    let minus = DensityOperator::pure_from_ket(&[cplx(1.0, 0.0), cplx(-1.0, 0.0)])?;
    let eve = |pure: &DensityOperator, eps: f64| {
        DensityOperator::mixture(&[(1.0 - eps, pure), (eps, &DensityOperator::maximally_mixed(2))])
            .unwrap()
    };
    let noisy = CqavwcChannel::from_states(
        labels(&["0", "1"]),
        labels(&["0", "1"]),
        vec![vec![damp(0, 0.1), damp(0, 0.25)], vec![damp(1, 0.1), damp(1, 0.25)]],
        vec![vec![eve(&plus, 0.5), eve(&plus, 0.7)], vec![eve(&minus, 0.5), eve(&minus, 0.7)]],
    )?;
    for n in [1, 2] {
        show(&format!("two-jammer channel, n={n}"), &lower_bound_no_csi(&noisy, &grid, n, &caps)?);
        println!();
    }
    show("two-jammer channel, n=1", &lower_bound_csi(&noisy, &grid, 1, &caps)?);
    Ok(())
}
