//! Entropy and Holevo-quantity basics on small states.
//!
//! ```bash
//! cargo run -p cqavwc --example entropy_and_holevo
//! ```

use cqavwc::channel::Distribution;
use cqavwc::infoquant::{holevo_chi, ChiEnsemble};
use cqavwc::qmath::{
    cplx, fannes_gap, gentle_damage, trace_norm, von_neumann_entropy, CMatrix, DensityOperator,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("== von Neumann entropy (bits) ==");
    for (name, rho) in [
        ("maximally mixed qubit", DensityOperator::maximally_mixed(2)),
        ("pure |0>", DensityOperator::basis_state(2, 0)),
        ("diag(3/4, 1/4)", DensityOperator::from_diagonal(&[0.75, 0.25])?),
        ("maximally mixed qutrit", DensityOperator::maximally_mixed(3)),
    ] {
        println!("  S({name}) = {:.6}", von_neumann_entropy(&rho));
    }

    println!("\n== trace norm ==");
    let zero = DensityOperator::basis_state(2, 0);
    let one = DensityOperator::basis_state(2, 1);
    println!(
        "  || |0><0| - |1><1| ||_1 = {:.6}",
        trace_norm(&(zero.matrix() - one.matrix()))?
    );

    println!("\n== Holevo chi ==");
    let uniform = Distribution::uniform(&["0".to_string(), "1".to_string()])?;
    let orthogonal = ChiEnsemble::new(uniform.clone(), vec![zero.clone(), one.clone()])?;
    println!("  chi(uniform; |0>, |1>)  = {:.6}", holevo_chi(&orthogonal)?);
    let plus = DensityOperator::pure_from_ket(&[cplx(1.0, 0.0), cplx(1.0, 0.0)])?;
    let tilted = ChiEnsemble::new(uniform, vec![zero.clone(), plus])?;
    println!("  chi(uniform; |0>, |+>)  = {:.6}", holevo_chi(&tilted)?);

    println!("\n== gentle measurement ==");
    let mixed = DensityOperator::maximally_mixed(2);
    let mut x = CMatrix::identity(2, 2);
    x[(1, 1)] = cplx(0.5, 0.0);
    let gd = gentle_damage(&mixed, &x)?;
    println!("  damage = {:.6}, bound sqrt(8 lambda) = {:.6}", gd.distance, gd.bound);

    println!("\n== entropy continuity ==");
    let near = DensityOperator::from_diagonal(&[0.55, 0.45])?;
    let fg = fannes_gap(&mixed, &near)?;
    println!(
        "  |S(x) - S(y)| = {:.6}, bound = {}",
        fg.entropy_gap,
        fg.bound.map(|b| format!("{b:.6}")).unwrap_or_else(|| "n/a (too far)".into())
    );
    Ok(())
}
