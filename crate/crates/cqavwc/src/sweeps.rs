//! Seeded property sweeps over random instances: gentle-measurement damage,
//! entropy continuity, and typical-projector mass/rank/sandwich checks.
//! These back the `lemmas` command and the acceptance suite.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

use crate::error::Result;
use crate::qmath::{
    fannes_gap, gentle_damage, random_density, random_unit_interval_operator,
};
use crate::typical::iid_mass_checks;

/// Outcome of a gentle-measurement sweep.
#[derive(Debug, Clone, Serialize)]
pub struct GentleSweepReport {
    pub trials: usize,
    pub dim: usize,
    pub seed: u64,
    pub violations: usize,
    /// Smallest `bound - distance` observed.
    pub worst_margin: f64,
}

/// Random `(rho, X)` pairs with `0 <= X <= id`: the damage
/// `|| rho - sqrt(X) rho sqrt(X) ||_1` must stay below `sqrt(8 lambda)`.
pub fn gentle_sweep(trials: usize, dim: usize, seed: u64) -> Result<GentleSweepReport> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for _ in 0..trials {
        let rho = random_density(&mut rng, dim);
        let x = random_unit_interval_operator(&mut rng, dim);
        let gd = gentle_damage(&rho, &x)?;
        let margin = gd.bound - gd.distance;
        worst = worst.min(margin);
        if margin < -1e-9 {
            violations += 1;
        }
    }
    Ok(GentleSweepReport { trials, dim, seed, violations, worst_margin: worst })
}

/// Outcome of an entropy-continuity sweep.
#[derive(Debug, Clone, Serialize)]
pub struct FannesSweepReport {
    pub trials: usize,
    pub dim: usize,
    pub seed: u64,
    /// Pairs close enough for the bound to apply.
    pub applicable: usize,
    pub violations: usize,
    pub worst_margin: f64,
}

/// Random state pairs: whenever `mu = ||x - y||_1 < 1/e`, the entropy gap is
/// at most `mu log2 d - mu log2 mu`.
pub fn fannes_sweep(trials: usize, dim: usize, seed: u64) -> Result<FannesSweepReport> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed.wrapping_add(0x5eed));
    let mut applicable = 0;
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for _ in 0..trials {
        let x = random_density(&mut rng, dim);
        let y = random_density(&mut rng, dim);
        let fg = fannes_gap(&x, &y)?;
        if let Some(bound) = fg.bound {
            applicable += 1;
            let margin = bound - fg.entropy_gap;
            worst = worst.min(margin);
            if margin < -1e-9 {
                violations += 1;
            }
        }
    }
    Ok(FannesSweepReport { trials, dim, seed, applicable, violations, worst_margin: worst })
}

/// Outcome of a typical-projector mass sweep.
#[derive(Debug, Clone, Serialize)]
pub struct MassSweepReport {
    pub instances: usize,
    pub dim_letter: usize,
    pub seed: u64,
    /// Instances whose mass floor was positive (the vacuous ones are skipped).
    pub mass_applicable: usize,
    pub mass_violations: usize,
    pub worst_mass_margin: f64,
    pub rank_violations: usize,
    pub sandwich_violations: usize,
}

/// Random i.i.d. letter states across a grid of block lengths and window
/// widths; checks captured mass against its floor plus the constant-free rank
/// and sandwich bounds.
pub fn mass_sweep(
    ns: &[usize],
    alphas: &[f64],
    seeds: usize,
    dim_letter: usize,
    seed: u64,
) -> Result<MassSweepReport> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed.wrapping_add(0x7a55));
    let mut instances = 0;
    let mut mass_applicable = 0;
    let mut mass_violations = 0;
    let mut worst_mass = f64::INFINITY;
    let mut rank_violations = 0;
    let mut sandwich_violations = 0;
    for _ in 0..seeds {
        let letter = random_density(&mut rng, dim_letter);
        for &n in ns {
            for &alpha in alphas {
                let checks = iid_mass_checks(&letter, n, alpha)?;
                instances += 1;
                if checks.floor_plain > 0.0 {
                    mass_applicable += 1;
                    let margin = checks.captured_mass - checks.floor_plain;
                    worst_mass = worst_mass.min(margin);
                    if checks.mass_ok_plain == Some(false) {
                        mass_violations += 1;
                    }
                }
                if !checks.rank_ok {
                    rank_violations += 1;
                }
                if !checks.sandwich_ok {
                    sandwich_violations += 1;
                }
            }
        }
    }
    Ok(MassSweepReport {
        instances,
        dim_letter,
        seed,
        mass_applicable,
        mass_violations,
        worst_mass_margin: worst_mass,
        rank_violations,
        sandwich_violations,
    })
}

/// Combined report for the `lemmas` command.
#[derive(Debug, Clone, Serialize)]
pub struct LemmaSweepReport {
    pub gentle: GentleSweepReport,
    pub fannes: FannesSweepReport,
    pub mass: MassSweepReport,
}

impl LemmaSweepReport {
    pub fn total_violations(&self) -> usize {
        self.gentle.violations
            + self.fannes.violations
            + self.mass.mass_violations
            + self.mass.rank_violations
            + self.mass.sandwich_violations
    }
}

/// Runs all three sweeps with shared parameters. The mass sweep uses the
/// standard grid `n in {4, 8, 12}`, `alpha in {0.25, 0.5, 1.0}` with
/// `min(trials, 100)` letter states.
pub fn lemma_sweeps(trials: usize, dim: usize, seed: u64) -> Result<LemmaSweepReport> {
    Ok(LemmaSweepReport {
        gentle: gentle_sweep(trials, dim, seed)?,
        fannes: fannes_sweep(trials, dim, seed)?,
        mass: mass_sweep(&[4, 8, 12], &[0.25, 0.5, 1.0], trials.min(100), dim, seed)?,
    })
}
