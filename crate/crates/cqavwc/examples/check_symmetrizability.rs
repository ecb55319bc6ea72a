//! Symmetrizability verdicts with verifiable certificates.
//!
//! A family `{rho_{x,t}}` is symmetrizable when some stochastic kernel
//! `U(t|x)` makes `sum_t U(t|x) rho_{x',t}` symmetric in `(x, x')`; such a
//! channel has zero deterministic capacity.
//!
//! ```bash
//! cargo run -p cqavwc --example check_symmetrizability
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use cqavwc::qmath::{random_density, DensityOperator};
use cqavwc::symmetrize::{
    check_symmetrizable, random_symmetrizable_family, verify_symmetrizer, xor_family, StateFamily,
    TOL_SYM,
};

fn report(name: &str, family: &StateFamily) -> Result<(), Box<dyn std::error::Error>> {
    let verdict = check_symmetrizable(family, TOL_SYM)?;
    println!("{name}:");
    println!("  symmetrizable: {}", verdict.symmetrizable);
    println!("  residual:      {:.3e}", verdict.residual);
    if let Some(cert) = &verdict.certificate {
        for (x, row) in cert.rows() {
            let pretty: Vec<String> = row
                .support()
                .iter()
                .zip(row.weights())
                .map(|(t, w)| format!("U({t}|{x}) = {w:.4}"))
                .collect();
            println!("  {}", pretty.join(", "));
        }
        println!("  re-verified residual: {:.3e}", verify_symmetrizer(family, cert)?);
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha12Rng::seed_from_u64(2024);

    // rho_{x,t} = tau_{x xor t}: the delta kernel symmetrizes it exactly.
    let tau0 = random_density(&mut rng, 2);
    let tau1 = random_density(&mut rng, 2);
    report("xor family", &xor_family(&tau0, &tau1)?)?;

    // State-independent channel with distinct outputs: nothing to hide behind.
    let zero = DensityOperator::basis_state(2, 0);
    let one = DensityOperator::basis_state(2, 1);
    let fixed = StateFamily::new(
        vec!["0".into(), "1".into()],
        vec!["0".into(), "1".into()],
        vec![vec![zero.clone(), zero.clone()], vec![one.clone(), one.clone()]],
    )?;
    println!();
    report("t-independent orthogonal family", &fixed)?;

    // A family built to be exactly feasible at a random interior kernel.
    println!();
    report("random feasible family", &random_symmetrizable_family(&mut rng))?;
    Ok(())
}
