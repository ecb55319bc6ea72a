//! Property sweeps over random instances: gentle-measurement damage within
//! its bound, entropy continuity within its bound, and the three typical
//! projector properties.
//!
//! ```bash
//! cargo run -p cqavwc --example lemma_sweeps
//! ```

use cqavwc::sweeps::lemma_sweeps;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for dim in [2usize, 4] {
        let report = lemma_sweeps(1000, dim, 0)?;
        println!("dim {dim}:");
        println!(
            "  gentle measurement: {} trials, {} violations, worst margin {:+.4e}",
            report.gentle.trials, report.gentle.violations, report.gentle.worst_margin
        );
        println!(
            "  entropy continuity: {} applicable of {}, {} violations, worst margin {:+.4e}",
            report.fannes.applicable,
            report.fannes.trials,
            report.fannes.violations,
            report.fannes.worst_margin
        );
        println!(
            "  projector mass: {} instances ({} with a live floor), {} mass / {} rank / {} sandwich violations, worst margin {:+.4e}",
            report.mass.instances,
            report.mass.mass_applicable,
            report.mass.mass_violations,
            report.mass.rank_violations,
            report.mass.sandwich_violations,
            report.mass.worst_mass_margin
        );
        println!("  total violations: {}\n", report.total_violations());
    }
    Ok(())
}
