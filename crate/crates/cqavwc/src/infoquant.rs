//! Holevo quantities and the secrecy-rate lower bounds, with finite-n proxies
//! for the multi-letter leakage terms.
//!
//! The limiting leakage terms are not computable; they are replaced here by
//! declared finite-n evaluations and the whole n'-sequence is reported so the
//! approximation is visible. Simplex searches are a deterministic coarse grid
//! followed by coordinate-wise refinement; the min/max objectives mix concave
//! and convex parts, so no global-optimality claim is made.

use serde::Serialize;

use crate::channel::{index_sequences, Caps, CqavwcChannel, Distribution, Receiver};
use crate::error::{Error, Result};
use crate::qmath::{entropy_of_spectrum, CMatrix, DensityOperator};
use crate::symmetrize::{channel_symmetrizability, ChannelSymmetrizability, TOL_SYM};

/// A labeled ensemble `(P, {rho_x})`.
#[derive(Debug, Clone)]
pub struct ChiEnsemble {
    pub probs: Distribution,
    pub states: Vec<DensityOperator>,
}

impl ChiEnsemble {
    pub fn new(probs: Distribution, states: Vec<DensityOperator>) -> Result<Self> {
        if probs.len() != states.len() {
            return Err(Error::LengthMismatch(format!(
                "{} probabilities vs {} states",
                probs.len(),
                states.len()
            )));
        }
        let dim = states.first().map(|s| s.dim()).unwrap_or(0);
        if let Some(s) = states.iter().find(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch { left: dim, right: s.dim() });
        }
        Ok(Self { probs, states })
    }
}

/// Holevo quantity `S(sum_x P(x) rho_x) - sum_x P(x) S(rho_x)` in bits.
pub fn holevo_chi(ensemble: &ChiEnsemble) -> Result<f64> {
    let weights = ensemble.probs.weights();
    let dim = ensemble.states[0].dim();
    let mut avg = CMatrix::zeros(dim, dim);
    let mut mean_entropy = 0.0;
    for (w, rho) in weights.iter().zip(&ensemble.states) {
        if *w == 0.0 {
            continue;
        }
        avg += rho.matrix().scale(*w);
        mean_entropy += w * entropy_of_spectrum(&rho.spectrum()?);
    }
    let avg_entropy =
        entropy_of_spectrum(&DensityOperator::trusted(avg).spectrum()?);
    Ok((avg_entropy - mean_entropy).max(0.0))
}

/// Simplex-search configuration: deterministic coarse grid of resolution
/// `step`, then coordinate-wise refinement halving down to `final_step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridConfig {
    pub step: f64,
    pub final_step: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { step: 1.0 / 32.0, final_step: 1.0 / 1024.0 }
    }
}

impl GridConfig {
    fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step <= 1.0) || !self.final_step.is_finite() {
            return Err(Error::DegenerateInput(format!("bad grid step {}", self.step)));
        }
        if self.final_step <= 0.0 || self.final_step > self.step {
            return Err(Error::DegenerateInput(format!(
                "bad final step {} for step {}",
                self.final_step, self.step
            )));
        }
        Ok(())
    }
}

fn compositions(cells: usize, dim: usize) -> Vec<Vec<usize>> {
    fn rec(dim: usize, remaining: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if dim == 1 {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in 0..=remaining {
            prefix.push(k);
            rec(dim - 1, remaining - k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(dim, cells, &mut Vec::new(), &mut out);
    out
}

/// Deterministic grid + refinement search over the probability simplex.
/// Returns the best point and value; ties resolve to the earliest candidate.
fn search_simplex(
    dim: usize,
    grid: &GridConfig,
    minimize: bool,
    f: &mut impl FnMut(&[f64]) -> f64,
) -> (Vec<f64>, f64) {
    let better = |candidate: f64, incumbent: f64| {
        if minimize {
            candidate < incumbent - 1e-14
        } else {
            candidate > incumbent + 1e-14
        }
    };
    if dim == 1 {
        let w = vec![1.0];
        let v = f(&w);
        return (w, v);
    }
    let cells = (1.0 / grid.step).round().max(1.0) as usize;
    let mut best_w: Vec<f64> = Vec::new();
    let mut best_v = if minimize { f64::INFINITY } else { f64::NEG_INFINITY };
    for comp in compositions(cells, dim) {
        let w: Vec<f64> = comp.iter().map(|&c| c as f64 / cells as f64).collect();
        let v = f(&w);
        if best_w.is_empty() || better(v, best_v) {
            best_w = w;
            best_v = v;
        }
    }

    let mut h = grid.step / 2.0;
    while h >= grid.final_step {
        let mut improved = true;
        while improved {
            improved = false;
            let mut sweep_w: Option<Vec<f64>> = None;
            let mut sweep_v = best_v;
            for i in 0..dim {
                for j in 0..dim {
                    if i == j || best_w[j] < h - 1e-15 {
                        continue;
                    }
                    let mut cand = best_w.clone();
                    cand[i] += h;
                    cand[j] = (cand[j] - h).max(0.0);
                    let v = f(&cand);
                    if better(v, sweep_v) {
                        sweep_v = v;
                        sweep_w = Some(cand);
                    }
                }
            }
            if let Some(w) = sweep_w {
                best_w = w;
                best_v = sweep_v;
                improved = true;
            }
        }
        h /= 2.0;
    }
    (best_w, best_v)
}

/// `min_Q chi(P, {rho^Q_x})` over the state simplex. Returns the minimum and
/// the minimizing distribution found.
pub fn legal_term(
    ch: &CqavwcChannel,
    p: &Distribution,
    grid: &GridConfig,
) -> Result<(f64, Distribution)> {
    grid.validate()?;
    let pw = p.aligned_to(ch.inputs(), "input distribution")?;
    let mut eval = |qw: &[f64]| -> f64 { chi_legal_at(ch, &pw, qw).unwrap_or(f64::INFINITY) };
    let (qw, value) = search_simplex(ch.states().len(), grid, true, &mut eval);
    let q_star = Distribution::new(ch.states().to_vec(), qw)?;
    Ok((value, q_star))
}

fn chi_legal_at(ch: &CqavwcChannel, p_aligned: &[f64], q_aligned: &[f64]) -> Result<f64> {
    let dim = ch.dim(Receiver::Legal);
    let mut avg = CMatrix::zeros(dim, dim);
    let mut mean_entropy = 0.0;
    for (xi, &w) in p_aligned.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let state = ch.letter_state_average(Receiver::Legal, xi, q_aligned);
        mean_entropy += w * entropy_of_spectrum(&state.spectrum()?);
        avg += state.matrix().scale(w);
    }
    let avg_entropy = entropy_of_spectrum(&DensityOperator::trusted(avg).spectrum()?);
    Ok((avg_entropy - mean_entropy).max(0.0))
}

/// Exact brute-force evaluation of
/// `max_{t^n} (1/n) chi(P^n, {sigma_{x^n,t^n}})`:
/// every state sequence is enumerated and the eavesdropper ensemble over all
/// input sequences is built explicitly.
pub fn leakage_term_n(
    ch: &CqavwcChannel,
    p: &Distribution,
    n: usize,
    caps: &Caps,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::DegenerateInput("n must be positive".into()));
    }
    let pw = p.aligned_to(ch.inputs(), "input distribution")?;
    caps.check("state_sequences", ch.states().len(), n)?;
    caps.check("input_sequences", ch.inputs().len(), n)?;
    caps.check("dim", ch.dim(Receiver::Eve), n)?;

    // Letter entropies are cached; a product state's entropy is their sum.
    let letter_entropy = letter_entropies(ch, Receiver::Eve)?;

    let mut worst = 0.0f64;
    for t_seq in index_sequences(ch.states().len(), n) {
        worst = worst.max(chi_eve_at(ch, &pw, &t_seq, &letter_entropy)?);
    }
    Ok(worst / n as f64)
}

fn letter_entropies(ch: &CqavwcChannel, receiver: Receiver) -> Result<Vec<Vec<f64>>> {
    ch.inputs()
        .iter()
        .enumerate()
        .map(|(xi, _)| {
            (0..ch.states().len())
                .map(|ti| Ok(entropy_of_spectrum(&ch.state_at(receiver, xi, ti).spectrum()?)))
                .collect()
        })
        .collect()
}

/// `chi(P^n, {sigma_{x^n,t^n} : x^n})` for one fixed state sequence, in bits
/// (not divided by n).
fn chi_eve_at(
    ch: &CqavwcChannel,
    p_aligned: &[f64],
    t_seq: &[usize],
    letter_entropy: &[Vec<f64>],
) -> Result<f64> {
    let n = t_seq.len();
    let dim_letter = ch.dim(Receiver::Eve);
    let dim: usize = dim_letter.pow(n as u32);
    let mut avg = CMatrix::zeros(dim, dim);
    let mut mean_entropy = 0.0;
    for x_seq in index_sequences(ch.inputs().len(), n) {
        let weight: f64 = x_seq.iter().map(|&xi| p_aligned[xi]).product();
        if weight == 0.0 {
            continue;
        }
        let mut prod = ch.state_at(Receiver::Eve, x_seq[0], t_seq[0]).matrix().clone();
        for (xi, ti) in x_seq.iter().zip(t_seq).skip(1) {
            prod = prod.kronecker(ch.state_at(Receiver::Eve, *xi, *ti).matrix());
        }
        avg += prod.scale(weight);
        let seq_entropy: f64 =
            x_seq.iter().zip(t_seq).map(|(&xi, &ti)| letter_entropy[xi][ti]).sum();
        mean_entropy += weight * seq_entropy;
    }
    let avg_entropy = entropy_of_spectrum(&DensityOperator::trusted(avg).spectrum()?);
    Ok((avg_entropy - mean_entropy).max(0.0))
}

/// One evaluated secrecy-rate lower bound.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    /// `"no-csi"` or `"csi"`.
    pub mode: String,
    pub n_used: usize,
    pub p_star: Distribution,
    pub q_star: Distribution,
    /// Minimized legal-receiver Holevo quantity at `p_star`, bits.
    pub legal_term_bits: f64,
    /// Finite-n leakage proxies for n' = 1..n_used, bits.
    pub leakage_terms_bits: Vec<f64>,
    /// `legal - leakage[n_used-1]`, floored at zero.
    pub bound_value_bits: f64,
    /// The same difference before flooring.
    pub raw_value_bits: f64,
    /// For the CSI mode, the minimizing state sequence.
    pub t_star: Option<String>,
    /// Which symmetrizability checks were consulted and what they found.
    pub symmetrizability_note: String,
}

fn zero_rate_report(mode: &str, n_max: usize, ch: &CqavwcChannel, note: String) -> BoundReport {
    BoundReport {
        mode: mode.into(),
        n_used: n_max,
        p_star: Distribution::uniform(ch.inputs()).expect("nonempty alphabet"),
        q_star: Distribution::uniform(ch.states()).expect("nonempty state set"),
        legal_term_bits: 0.0,
        leakage_terms_bits: vec![0.0; n_max],
        bound_value_bits: 0.0,
        raw_value_bits: 0.0,
        t_star: None,
        symmetrizability_note: note,
    }
}

fn describe_gate(sym: &ChannelSymmetrizability) -> String {
    let fired: Vec<String> = sym
        .per_state
        .iter()
        .filter(|(_, v)| v.symmetrizable)
        .map(|(t, _)| format!("per-state check at t={t}"))
        .chain(sym.joint.symmetrizable.then(|| "joint-family check".to_string()))
        .collect();
    format!(
        "zero rate: legal family symmetrizable ({}); secrecy capacity is 0 for \
         symmetrizable channels; optimization skipped",
        fired.join(", ")
    )
}

/// Lower bound on the secrecy capacity without channel state information:
/// `max_P [ min_Q chi(P, {rho^Q_x}) - max_{t^n} (1/n) chi(P^n, {sigma_{x^n,t^n}}) ]`
/// evaluated at the finite block length `n_max`, with the whole leakage
/// n'-sequence reported. Symmetrizable legal families short-circuit to zero.
pub fn lower_bound_no_csi(
    ch: &CqavwcChannel,
    grid: &GridConfig,
    n_max: usize,
    caps: &Caps,
) -> Result<BoundReport> {
    grid.validate()?;
    if n_max == 0 {
        return Err(Error::DegenerateInput("n_max must be positive".into()));
    }
    let sym = channel_symmetrizability(ch, TOL_SYM)?;
    if sym.joint.symmetrizable || sym.any_per_state() {
        return Ok(zero_rate_report("no-csi", n_max, ch, describe_gate(&sym)));
    }

    let nx = ch.inputs().len();
    let mut objective = |pw: &[f64]| -> f64 {
        let p = match Distribution::new(ch.inputs().to_vec(), pw.to_vec()) {
            Ok(p) => p,
            Err(_) => return f64::NEG_INFINITY,
        };
        let legal = match legal_term(ch, &p, grid) {
            Ok((v, _)) => v,
            Err(_) => return f64::NEG_INFINITY,
        };
        let leak = match leakage_term_n(ch, &p, n_max, caps) {
            Ok(v) => v,
            Err(_) => return f64::NEG_INFINITY,
        };
        legal - leak
    };
    let (pw, raw) = search_simplex(nx, grid, false, &mut objective);
    if !raw.is_finite() {
        return Err(Error::DegenerateInput("objective never evaluated finitely".into()));
    }
    let p_star = Distribution::new(ch.inputs().to_vec(), pw)?;
    let (legal, q_star) = legal_term(ch, &p_star, grid)?;
    let mut leakage_terms = Vec::with_capacity(n_max);
    for np in 1..=n_max {
        leakage_terms.push(leakage_term_n(ch, &p_star, np, caps)?.max(0.0));
    }
    let raw_value = legal - leakage_terms[n_max - 1];
    Ok(BoundReport {
        mode: "no-csi".into(),
        n_used: n_max,
        p_star,
        q_star,
        legal_term_bits: legal,
        leakage_terms_bits: leakage_terms,
        bound_value_bits: raw_value.max(0.0),
        raw_value_bits: raw_value,
        t_star: None,
        symmetrizability_note: format!(
            "not symmetrizable (consulted per-state checks for every t and the joint \
             family; worst residuals: per-state {:.3e}, joint {:.3e})",
            sym.per_state.iter().map(|(_, v)| v.residual).fold(f64::INFINITY, f64::min),
            sym.joint.residual
        ),
    })
}

/// Lower bound with channel state information at the transmitter:
/// `min_{Q, t^n} max_P [ chi(P, {rho^Q_x}) - (1/n) chi(P^n, {sigma_{x^n,t^n}}) ]`
/// at the finite block length `n_max`. Gated on the joint symmetrizability
/// check.
pub fn lower_bound_csi(
    ch: &CqavwcChannel,
    grid: &GridConfig,
    n_max: usize,
    caps: &Caps,
) -> Result<BoundReport> {
    grid.validate()?;
    if n_max == 0 {
        return Err(Error::DegenerateInput("n_max must be positive".into()));
    }
    let sym = channel_symmetrizability(ch, TOL_SYM)?;
    if sym.joint.symmetrizable {
        return Ok(zero_rate_report("csi", n_max, ch, describe_gate(&sym)));
    }

    caps.check("state_sequences", ch.states().len(), n_max)?;
    caps.check("input_sequences", ch.inputs().len(), n_max)?;
    caps.check("dim", ch.dim(Receiver::Eve), n_max)?;

    let nx = ch.inputs().len();
    let letter_entropy = letter_entropies(ch, Receiver::Eve)?;
    let t_sequences: Vec<Vec<usize>> =
        index_sequences(ch.states().len(), n_max).collect();

    // Inner max over P for a fixed (Q, t^n).
    let inner_max = |qw: &[f64], t_seq: &[usize]| -> Result<(Vec<f64>, f64)> {
        let mut objective = |pw: &[f64]| -> f64 {
            let legal = chi_legal_at(ch, pw, qw).unwrap_or(f64::NEG_INFINITY);
            let leak = chi_eve_at(ch, pw, t_seq, &letter_entropy)
                .map(|v| v / n_max as f64)
                .unwrap_or(f64::INFINITY);
            legal - leak
        };
        let (pw, v) = search_simplex(nx, grid, false, &mut objective);
        Ok((pw, v))
    };

    // phi(Q) = min over t^n of the inner max.
    let phi = |qw: &[f64]| -> Result<(usize, f64)> {
        let mut best_t = 0usize;
        let mut best_v = f64::INFINITY;
        for (ti, t_seq) in t_sequences.iter().enumerate() {
            let (_, v) = inner_max(qw, t_seq)?;
            if v < best_v - 1e-14 {
                best_v = v;
                best_t = ti;
            }
        }
        Ok((best_t, best_v))
    };

    let mut eval_phi = |qw: &[f64]| -> f64 { phi(qw).map(|(_, v)| v).unwrap_or(f64::INFINITY) };
    let (qw_star, raw) = search_simplex(ch.states().len(), grid, true, &mut eval_phi);
    if !raw.is_finite() {
        return Err(Error::DegenerateInput("objective never evaluated finitely".into()));
    }
    let (t_star_idx, _) = phi(&qw_star)?;
    let t_star_seq = &t_sequences[t_star_idx];
    let (pw_star, _) = inner_max(&qw_star, t_star_seq)?;

    let p_star = Distribution::new(ch.inputs().to_vec(), pw_star.clone())?;
    let q_star = Distribution::new(ch.states().to_vec(), qw_star.clone())?;
    let legal = chi_legal_at(ch, &pw_star, &qw_star)?;

    // Leakage sequence at p_star: the minimum over t^(n') for each shorter
    // block, ending with the (1/n) chi at the minimizing t^n itself.
    let mut leakage_terms = Vec::with_capacity(n_max);
    for np in 1..n_max {
        let mut best = f64::INFINITY;
        for t_seq in index_sequences(ch.states().len(), np) {
            let v = chi_eve_at(ch, &pw_star, &t_seq, &letter_entropy)? / np as f64;
            best = best.min(v);
        }
        leakage_terms.push(best.max(0.0));
    }
    leakage_terms
        .push((chi_eve_at(ch, &pw_star, t_star_seq, &letter_entropy)? / n_max as f64).max(0.0));

    let raw_value = legal - leakage_terms[n_max - 1];
    let t_star_key: Vec<String> =
        t_star_seq.iter().map(|&ti| ch.states()[ti].clone()).collect();
    Ok(BoundReport {
        mode: "csi".into(),
        n_used: n_max,
        p_star,
        q_star,
        legal_term_bits: legal,
        leakage_terms_bits: leakage_terms,
        bound_value_bits: raw_value.max(0.0),
        raw_value_bits: raw_value,
        t_star: Some(t_star_key.join("|")),
        symmetrizability_note: format!(
            "joint family not symmetrizable (residual {:.3e}); finite-n proxy with the \
             outer minimization over (Q, t^n) taken at n={n_max} -- the interplay of \
             that minimization with growing n is not resolved here",
            sym.joint.residual
        ),
    })
}
