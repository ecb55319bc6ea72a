//! Numerical toolkit for classical-quantum arbitrarily varying wiretap channels
//! (CQ-AVWCs): a channel family `{(rho_{x,t}, sigma_{x,t})}` with classical input
//! `x`, a quantum output for the legitimate receiver, a quantum output for an
//! eavesdropper, and a jammer-controlled state `t` that may change per letter.
//!
//! The crate covers, at desk scale (dimensions up to a few thousand):
//!
//! - [`qmath`] - complex Hermitian matrix arithmetic, von Neumann entropy,
//!   trace norm, and the gentle-measurement / Fannes continuity bounds.
//! - [`channel`] - the channel data model, state averaging, and n-letter
//!   product states.
//! - [`symmetrize`] - the symmetrizability decision problem with verifiable
//!   certificates (a linear feasibility problem over rows of distributions).
//! - [`infoquant`] - Holevo quantities and secrecy-rate lower bounds for the
//!   no-CSI and CSI-at-transmitter scenarios, with finite-n leakage proxies.
//! - [`typical`] - frequency-typical sets, the restricted sampling
//!   distribution, and spectral (entropy-window) typical projectors.
//! - [`coding`] - random wiretap codebooks, the square-root (pretty good
//!   measurement) decoder, adversarial error probability, covering-lemma
//!   statistics, and leakage measurement.
//! - [`sweeps`] - seeded property sweeps used by the `lemmas` command.
//! - [`cli`] - the batch commands behind the `cqavwc` binary.
//!
//! Everything is deterministic given its inputs and seeds; random sampling
//! uses counter-based substreams so results do not depend on scheduling.
//!
//! The `examples/` directory is the best starting point; each example is a
//! runnable walkthrough of one capability.

pub mod channel;
pub mod cli;
pub mod coding;
pub mod error;
pub mod infoquant;
pub mod qmath;
pub mod sweeps;
pub mod symmetrize;
pub mod typical;

pub use error::{Error, Result};

/// Configures the global rayon pool from the `CQAVWC_THREADS` environment
/// variable. A no-op if the pool was already built or the variable is unset.
pub fn init_thread_pool_from_env() {
    if let Ok(v) = std::env::var("CQAVWC_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}
