//! Writes the sample channel files used throughout the other examples and
//! the CLI walkthrough in the README.
//!
//! ```bash
//! cargo run -p cqavwc --example make_channels -- [output-dir]
//! ```

use cqavwc::channel::CqavwcChannel;
use cqavwc::cli::ChannelFile;
use cqavwc::qmath::{cplx, DensityOperator};

fn labels(ls: &[&str]) -> Vec<String> {
    ls.iter().map(|s| s.to_string()).collect()
}

/// Legal receiver sees `|x xor t>`: jointly symmetrizable, so both secrecy
/// bounds collapse to zero.
fn qubit_flip() -> CqavwcChannel {
    let zero = DensityOperator::basis_state(2, 0);
    let one = DensityOperator::basis_state(2, 1);
    let mixed = DensityOperator::maximally_mixed(2);
    CqavwcChannel::from_states(
        labels(&["0", "1"]),
        labels(&["0", "1"]),
        vec![vec![zero.clone(), one.clone()], vec![one.clone(), zero.clone()]],
        vec![vec![mixed.clone(), mixed.clone()], vec![mixed.clone(), mixed.clone()]],
    )
    .expect("valid channel")
}

/// Single jammer state, orthogonal pure legal outputs, constant eavesdropper
/// output: the clean one-bit secrecy channel.
fn clean_wiretap() -> CqavwcChannel {
    let mixed = DensityOperator::maximally_mixed(2);
    CqavwcChannel::from_states(
        labels(&["0", "1"]),
        labels(&["t"]),
        vec![vec![DensityOperator::basis_state(2, 0)], vec![DensityOperator::basis_state(2, 1)]],
        vec![vec![mixed.clone()], vec![mixed.clone()]],
    )
    .expect("valid channel")
}

/// Two jammer states; the legal link is a depolarized basis channel whose
/// noise level the jammer picks, and the eavesdropper sees heavily mixed
/// conjugate-basis states.
fn two_jammer() -> CqavwcChannel {
    let damp = |k: usize, eps: f64| {
        DensityOperator::mixture(&[
            (1.0 - eps, &DensityOperator::basis_state(2, k)),
            (eps, &DensityOperator::maximally_mixed(2)),
        ])
        .expect("valid state")
    };
    let plus = DensityOperator::pure_from_ket(&[cplx(1.0, 0.0), cplx(1.0, 0.0)]).unwrap();
    let minus = DensityOperator::pure_from_ket(&[cplx(1.0, 0.0), cplx(-1.0, 0.0)]).unwrap();
    let eve = |pure: &DensityOperator, eps: f64| {
        DensityOperator::mixture(&[(1.0 - eps, pure), (eps, &DensityOperator::maximally_mixed(2))])
            .expect("valid state")
    };
    CqavwcChannel::from_states(
        labels(&["0", "1"]),
        labels(&["0", "1"]),
        vec![vec![damp(0, 0.1), damp(0, 0.25)], vec![damp(1, 0.1), damp(1, 0.25)]],
        vec![vec![eve(&plus, 0.5), eve(&plus, 0.7)], vec![eve(&minus, 0.5), eve(&minus, 0.7)]],
    )
    .expect("valid channel")
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "channels".to_string());
    std::fs::create_dir_all(&dir)?;
    for (name, ch) in [
        ("qubit_flip", qubit_flip()),
        ("clean_wiretap", clean_wiretap()),
        ("two_jammer", two_jammer()),
    ] {
        let path = format!("{dir}/{name}.json");
        let file = ChannelFile::from_channel(&ch);
        std::fs::write(&path, serde_json::to_string_pretty(&file)?)?;
        println!("wrote {path}");
    }
    println!("\ntry:  cqavwc validate {dir}/two_jammer.json");
    println!("      cqavwc bound {dir}/clean_wiretap.json --mode no-csi");
    println!("      cqavwc simulate {dir}/two_jammer.json --n 4 --J 2 --L 2 --seeds 3");
    Ok(())
}
