//! Spectral typical projectors: captured mass against its floor, the
//! constant-free rank bound, and the sandwich bound, across block lengths
//! and window widths.
//!
//! ```bash
//! cargo run -p cqavwc --example typical_projectors
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use cqavwc::channel::Caps;
use cqavwc::qmath::random_density;
use cqavwc::typical::{
    iid_mass_checks, product_of_letters, product_projector, projector_mass_checks,
    spectral_projector,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha12Rng::seed_from_u64(7);
    let letter = random_density(&mut rng, 2);
    println!("random qubit letter spectrum: {:?}\n", letter.spectrum()?);

    println!("{:>3} {:>6} {:>10} {:>10} {:>8} {:>12} {:>9}", "n", "alpha", "mass", "floor", "kept", "rank bound", "sandwich");
    for n in [4usize, 8, 12] {
        for alpha in [0.25f64, 0.5, 1.0] {
            let checks = iid_mass_checks(&letter, n, alpha)?;
            println!(
                "{n:>3} {alpha:>6} {:>10.6} {:>10.6} {:>8} {:>12.1} {:>9}",
                checks.captured_mass,
                checks.floor_plain.max(0.0),
                checks.selected_count,
                checks.rank_bound,
                if checks.sandwich_ok { "ok" } else { "VIOLATED" },
            );
        }
    }

    // The factored (per-letter) construction agrees with a dense
    // eigendecomposition of the materialized product state.
    let caps = Caps::default();
    let letters = vec![letter.clone(); 6];
    let state = product_of_letters(&letters, &caps)?;
    let dense = spectral_projector(&state, 6, 0.5, None)?;
    let fast = product_projector(&letters, 0.5, None, &caps)?;
    println!("\ndense path kept {} eigenvalues, factored path kept {}", dense.selected_count, fast.selected_count);

    let dense_checks = projector_mass_checks(&state, &dense, 2, 2)?;
    println!(
        "dense captured mass {:.9} vs factored {:.9}",
        dense_checks.captured_mass,
        iid_mass_checks(&letter, 6, 0.5)?.captured_mass
    );
    Ok(())
}
