//! Random wiretap codes executed at desk scale: doubly indexed codebooks
//! sampled from the restricted typical distribution, the square-root (pretty
//! good measurement) decoder, error probability under adversarial state
//! sequences, sandwiched wiretapper states, the covering-lemma gap statistic,
//! and the leakage Holevo quantity.
//!
//! Codeword sampling uses counter-based substreams keyed by
//! `(seed, j, l)`, so parallel generation is order-independent and codebooks
//! for different `L` share their common prefix. Enumerations over state
//! sequences reduce in canonical lexicographic order, which keeps parallel
//! and serial runs bit-identical.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{index_sequences, Caps, CqavwcChannel, Distribution, Receiver, StateSequence};
use crate::error::{Error, Result};
use crate::infoquant::{holevo_chi, ChiEnsemble};
use crate::qmath::{
    gentle_damage, psd_power, trace_norm, trace_of_product, CMatrix, DensityOperator,
};
use crate::typical::{
    conditional_projector, product_projector, restricted_distribution, typical_set, LetterLaw,
    RestrictedDistribution, TypicalProjector,
};

/// A doubly indexed codebook: `J` messages, `L` randomization indices per
/// message, all codewords of length `n` over the input alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct WiretapCodebook {
    n: usize,
    j_count: usize,
    l_count: usize,
    seed: u64,
    alphabet: Vec<String>,
    /// Row-major: codeword for `(j, l)` sits at `j * l_count + l`.
    codewords: Vec<Vec<usize>>,
}

impl WiretapCodebook {
    /// Wraps explicit codewords (index sequences into `alphabet`).
    pub fn from_codewords(
        alphabet: Vec<String>,
        n: usize,
        j_count: usize,
        l_count: usize,
        codewords: Vec<Vec<usize>>,
        seed: u64,
    ) -> Result<Self> {
        if j_count * l_count == 0 {
            return Err(Error::DegenerateInput("J*L must be at least 1".into()));
        }
        if codewords.len() != j_count * l_count {
            return Err(Error::LengthMismatch(format!(
                "{} codewords vs J*L = {}",
                codewords.len(),
                j_count * l_count
            )));
        }
        if codewords.iter().any(|c| c.len() != n) {
            return Err(Error::LengthMismatch("codeword length differs from n".into()));
        }
        if codewords.iter().flatten().any(|&x| x >= alphabet.len()) {
            return Err(Error::UnknownLabel {
                label: "out-of-range index".into(),
                place: "codebook".into(),
            });
        }
        Ok(Self { n, j_count, l_count, seed, alphabet, codewords })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn j_count(&self) -> usize {
        self.j_count
    }

    pub fn l_count(&self) -> usize {
        self.l_count
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn codeword(&self, j: usize, l: usize) -> &[usize] {
        &self.codewords[j * self.l_count + l]
    }

    pub fn codeword_labels(&self, j: usize, l: usize) -> Vec<String> {
        self.codeword(j, l).iter().map(|&x| self.alphabet[x].clone()).collect()
    }

    pub fn codewords(&self) -> &[Vec<usize>] {
        &self.codewords
    }

    /// `log2(J) / n` bits per letter.
    pub fn rate_message(&self) -> f64 {
        (self.j_count as f64).log2() / self.n as f64
    }

    /// `log2(J L) / n` bits per letter.
    pub fn rate_total(&self) -> f64 {
        ((self.j_count * self.l_count) as f64).log2() / self.n as f64
    }
}

fn substream(seed: u64, j: usize, l: usize) -> ChaCha12Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(j as u64).to_le_bytes());
    key[16..24].copy_from_slice(&(l as u64).to_le_bytes());
    ChaCha12Rng::from_seed(key)
}

/// Draws `J*L` i.i.d. codewords from the restricted typical distribution.
/// The draw for `(j, l)` depends only on `(seed, j, l)`.
pub fn sample_codebook(
    rd: &RestrictedDistribution,
    j_count: usize,
    l_count: usize,
    seed: u64,
) -> Result<WiretapCodebook> {
    if j_count * l_count == 0 {
        return Err(Error::DegenerateInput("J*L must be at least 1".into()));
    }
    let mut codewords = Vec::with_capacity(j_count * l_count);
    for j in 0..j_count {
        for l in 0..l_count {
            let mut rng = substream(seed, j, l);
            codewords.push(rd.sample(&mut rng).to_vec());
        }
    }
    WiretapCodebook::from_codewords(
        rd.set().p().support().to_vec(),
        rd.set().n(),
        j_count,
        l_count,
        codewords,
        seed,
    )
}

/// A measurement with one element per `(j, l)` pair plus an explicit failure
/// outcome completing the resolution of identity.
#[derive(Debug, Clone)]
pub struct PovmDecoder {
    j_count: usize,
    l_count: usize,
    elements: Vec<CMatrix>,
    fail: CMatrix,
}

impl PovmDecoder {
    pub fn element(&self, j: usize, l: usize) -> &CMatrix {
        &self.elements[j * self.l_count + l]
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn fail_element(&self) -> &CMatrix {
        &self.fail
    }

    pub fn j_count(&self) -> usize {
        self.j_count
    }

    pub fn l_count(&self) -> usize {
        self.l_count
    }

    /// `(completeness residual, most negative element eigenvalue)`:
    /// the first is `|| sum D + fail - id ||_1`, the second scans every
    /// element and the failure outcome.
    pub fn verify(&self) -> Result<(f64, f64)> {
        let dim = self.fail.nrows();
        let mut sum = CMatrix::zeros(dim, dim);
        for e in &self.elements {
            sum += e;
        }
        sum += &self.fail;
        let residual = trace_norm(&(sum - CMatrix::identity(dim, dim)))?;
        let mut min_eig = f64::INFINITY;
        for e in self.elements.iter().chain(std::iter::once(&self.fail)) {
            let sym = (e + e.adjoint()).scale(0.5);
            let low =
                sym.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
            min_eig = min_eig.min(low);
        }
        Ok((residual, min_eig))
    }
}

/// Uniform per-letter averaging distributions over the jammer states.
pub fn uniform_q_letters(ch: &CqavwcChannel, n: usize) -> Result<Vec<Distribution>> {
    Ok(vec![Distribution::uniform(ch.states())?; n])
}

/// Square-root measurement built from sandwiched typical projectors: with
/// `T_c = Pi Pi_c Pi` and `S = sum_c T_c`, the element for codeword `c` is
/// `S^(-1/2) T_c S^(-1/2)`. `Pi` is the projector of the (p, q)-averaged
/// product state and `Pi_c` the conditional projector of codeword `c` under
/// the per-letter averaging `q_letters`; both live on the legal receiver.
pub fn pgm_decoder(
    ch: &CqavwcChannel,
    codebook: &WiretapCodebook,
    p: &Distribution,
    q_letters: &[Distribution],
    delta: f64,
    caps: &Caps,
) -> Result<PovmDecoder> {
    let n = codebook.n();
    if q_letters.len() != n {
        return Err(Error::LengthMismatch(format!(
            "{} per-letter distributions vs n = {n}",
            q_letters.len()
        )));
    }
    caps.check("dim", ch.dim(Receiver::Legal), n)?;
    let pw = p.aligned_to(ch.inputs(), "input distribution")?;

    // Total projector: per-letter states sum_x P(x) sum_t Q_i(t) rho_{x,t}.
    let avg_letters: Result<Vec<DensityOperator>> = q_letters
        .iter()
        .map(|q| {
            let qw = q.aligned_to(ch.states(), "per-letter distribution")?;
            let dim = ch.dim(Receiver::Legal);
            let mut m = CMatrix::zeros(dim, dim);
            for (xi, &w) in pw.iter().enumerate() {
                if w != 0.0 {
                    m += ch.letter_state_average(Receiver::Legal, xi, &qw).matrix().scale(w);
                }
            }
            Ok(DensityOperator::trusted(m))
        })
        .collect();
    let total = product_projector(&avg_letters?, delta, None, caps)?;

    // Sandwich each codeword's conditional projector.
    let mut sandwiches = Vec::with_capacity(codebook.codewords().len());
    let dim = total.projector.nrows();
    let mut sum = CMatrix::zeros(dim, dim);
    for j in 0..codebook.j_count() {
        for l in 0..codebook.l_count() {
            let labels = codebook.codeword_labels(j, l);
            let cond = conditional_projector(
                ch,
                Receiver::Legal,
                &labels,
                LetterLaw::PerLetter(q_letters),
                delta,
                caps,
            )?;
            let t = &total.projector * &cond.projector * &total.projector;
            sum += &t;
            sandwiches.push(t);
        }
    }

    let inv_sqrt = psd_power(&sum, -0.5).map_err(|e| match e {
        Error::NotPsd { min_eig } => Error::Decoder(format!(
            "sandwich sum operator indefinite (min eigenvalue {min_eig:.3e})"
        )),
        other => other,
    })?;

    let elements: Vec<CMatrix> =
        sandwiches.iter().map(|t| &inv_sqrt * t * &inv_sqrt).collect();
    let mut total_sum = CMatrix::zeros(dim, dim);
    for e in &elements {
        total_sum += e;
    }
    let fail = CMatrix::identity(dim, dim) - &total_sum;

    // The construction puts sum(D) on the sandwich support; anything beyond
    // identity or a negative element signals numerical trouble.
    let fail_sym = (&fail + fail.adjoint()).scale(0.5);
    let fail_min =
        fail_sym.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
    if fail_min < -1e-8 {
        return Err(Error::Decoder(format!(
            "element sum exceeds identity (fail eigenvalue {fail_min:.3e})"
        )));
    }
    for (idx, e) in elements.iter().enumerate() {
        let sym = (e + e.adjoint()).scale(0.5);
        let low = sym.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
        if low < -1e-9 {
            return Err(Error::Decoder(format!(
                "element {idx} not positive (min eigenvalue {low:.3e})"
            )));
        }
    }

    Ok(PovmDecoder {
        j_count: codebook.j_count(),
        l_count: codebook.l_count(),
        elements,
        fail,
    })
}

/// Average decoding error under the state sequence `t^n`: the transmitted
/// pair `(j, l)` counts as decoded when the outcome is `(j, l')` for any
/// `l'`; the failure outcome counts as an error.
pub fn error_probability(
    ch: &CqavwcChannel,
    codebook: &WiretapCodebook,
    decoder: &PovmDecoder,
    t_seq: &StateSequence,
    caps: &Caps,
) -> Result<f64> {
    if decoder.j_count() != codebook.j_count() || decoder.l_count() != codebook.l_count() {
        return Err(Error::LengthMismatch(format!(
            "decoder {}x{} vs codebook {}x{}",
            decoder.j_count(),
            decoder.l_count(),
            codebook.j_count(),
            codebook.l_count()
        )));
    }
    if t_seq.len() != codebook.n() {
        return Err(Error::LengthMismatch(format!(
            "t^n length {} vs codeword length {}",
            t_seq.len(),
            codebook.n()
        )));
    }
    let t_idx = ch.resolve_states(t_seq)?;
    let mut success = 0.0;
    for j in 0..codebook.j_count() {
        for l in 0..codebook.l_count() {
            let state =
                ch.product_state_by_idx(Receiver::Legal, codebook.codeword(j, l), &t_idx, caps)?;
            for lp in 0..codebook.l_count() {
                success += trace_of_product(state.matrix(), decoder.element(j, lp));
            }
        }
    }
    success /= (codebook.j_count() * codebook.l_count()) as f64;
    Ok((1.0 - success).clamp(0.0, 1.0))
}

/// Exact maximum of the decoding error over all state sequences, with the
/// lexicographically first maximizer reported.
pub fn adversarial_error(
    ch: &CqavwcChannel,
    codebook: &WiretapCodebook,
    decoder: &PovmDecoder,
    caps: &Caps,
) -> Result<(f64, StateSequence)> {
    let n = codebook.n();
    caps.check("state_sequences", ch.states().len(), n)?;
    let t_seqs: Vec<Vec<usize>> = index_sequences(ch.states().len(), n).collect();
    let errors: Result<Vec<f64>> = t_seqs
        .par_iter()
        .map(|t_idx| {
            let labels: Vec<String> = t_idx.iter().map(|&ti| ch.states()[ti].clone()).collect();
            let t_seq = StateSequence::new(labels)?;
            error_probability(ch, codebook, decoder, &t_seq, caps)
        })
        .collect();
    let errors = errors?;
    let mut best = 0usize;
    for (i, &e) in errors.iter().enumerate() {
        if e > errors[best] {
            best = i;
        }
    }
    let labels: Vec<String> = t_seqs[best].iter().map(|&ti| ch.states()[ti].clone()).collect();
    Ok((errors[best], StateSequence::new(labels)?))
}

/// Which receiver's statistics drive the sandwich projectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProjectorSource {
    /// Projectors from the eavesdropper states being covered (default).
    Eve,
    /// Projectors from the legal-receiver states, reproducing the literal
    /// double-sandwich construction.
    Legal,
}

impl ProjectorSource {
    fn receiver(self) -> Receiver {
        match self {
            ProjectorSource::Eve => Receiver::Eve,
            ProjectorSource::Legal => Receiver::Legal,
        }
    }
}

/// A doubly sandwiched (generally subnormalized) eavesdropper state.
#[derive(Debug, Clone)]
pub struct SandwichedState {
    pub matrix: CMatrix,
    /// `|| sandwiched - original ||_1`.
    pub distance_to_original: f64,
}

/// Per-state-sequence sandwich machinery. The outer projector depends only on
/// `t^n`, so it is built once and shared by every codeword.
struct SandwichContext<'a> {
    ch: &'a CqavwcChannel,
    t_idx: Vec<usize>,
    receiver: Receiver,
    alpha: f64,
    outer: TypicalProjector,
}

struct SandwichParts {
    conditional: CMatrix,
    sigma: DensityOperator,
    sandwiched: CMatrix,
}

impl<'a> SandwichContext<'a> {
    fn new(
        ch: &'a CqavwcChannel,
        p: &Distribution,
        t_seq: &StateSequence,
        alpha: f64,
        source: ProjectorSource,
        caps: &Caps,
    ) -> Result<Self> {
        let receiver = source.receiver();
        let pw = p.aligned_to(ch.inputs(), "input distribution")?;
        let t_idx = ch.resolve_states(t_seq)?;
        // Outer projector of the p-averaged product state, widened by sqrt(a).
        let avg_letters: Vec<DensityOperator> =
            t_idx.iter().map(|&ti| ch.letter_input_average(receiver, &pw, ti)).collect();
        let widened = alpha * (ch.inputs().len() as f64).sqrt();
        let outer = product_projector(&avg_letters, widened, None, caps)?;
        Ok(Self { ch, t_idx, receiver, alpha, outer })
    }

    fn conditional_spectrum(&self, x_idx: &[usize]) -> Result<crate::typical::ProductSpectrum> {
        let letters: Vec<DensityOperator> = x_idx
            .iter()
            .zip(&self.t_idx)
            .map(|(&xi, &ti)| self.ch.state_at(self.receiver, xi, ti).clone())
            .collect();
        crate::typical::ProductSpectrum::from_letters(&letters)
    }

    /// `Pi_outer Pi_cond sigma Pi_cond Pi_outer` without materializing the
    /// conditional projector: when it is sourced from the eavesdropper state
    /// itself the two commute, so the inner sandwich is just the truncated
    /// spectral form `V_kept L_kept V_kept^dag`.
    fn sigma_bar(&self, x_idx: &[usize], caps: &Caps) -> Result<CMatrix> {
        let n = x_idx.len();
        match self.receiver {
            Receiver::Eve => {
                let spec = self.conditional_spectrum(x_idx)?;
                let center = spec.entropy_bits() / n as f64;
                let window = crate::typical::window_edges(n, center, self.alpha);
                let kept = spec.kept_in_window(window);
                let dim = self.outer.projector.nrows();
                if kept.is_empty() {
                    return Ok(CMatrix::zeros(dim, dim));
                }
                let vectors = spec.eigenvector_matrix();
                let mut w = CMatrix::zeros(dim, kept.len());
                for (col, &k) in kept.iter().enumerate() {
                    w.set_column(col, &vectors.column(k as usize));
                }
                let w = &self.outer.projector * w;
                let mut scaled = w.clone();
                for (col, &k) in kept.iter().enumerate() {
                    let lam = crate::qmath::cplx(spec.eigenvalue(k), 0.0);
                    for r in 0..dim {
                        scaled[(r, col)] *= lam;
                    }
                }
                Ok(&scaled * w.adjoint())
            }
            Receiver::Legal => Ok(self.parts(x_idx, caps)?.sandwiched),
        }
    }

    /// Fully materialized pieces, for the gentle-measurement re-check and the
    /// public single-codeword entry point.
    fn parts(&self, x_idx: &[usize], caps: &Caps) -> Result<SandwichParts> {
        let letters: Vec<DensityOperator> = x_idx
            .iter()
            .zip(&self.t_idx)
            .map(|(&xi, &ti)| self.ch.state_at(self.receiver, xi, ti).clone())
            .collect();
        let conditional = product_projector(&letters, self.alpha, None, caps)?;
        let sigma = self.ch.product_state_by_idx(Receiver::Eve, x_idx, &self.t_idx, caps)?;
        let inner = &conditional.projector * sigma.matrix() * &conditional.projector;
        let sandwiched = &self.outer.projector * inner * &self.outer.projector;
        Ok(SandwichParts { conditional: conditional.projector, sigma, sandwiched })
    }
}

/// The doubly sandwiched eavesdropper state
/// `Pi_outer Pi_cond sigma Pi_cond Pi_outer`, together with its trace-norm
/// distance from the unsandwiched state.
pub fn sandwiched_eve_state(
    ch: &CqavwcChannel,
    p: &Distribution,
    x_seq: &[String],
    t_seq: &StateSequence,
    alpha: f64,
    source: ProjectorSource,
    caps: &Caps,
) -> Result<SandwichedState> {
    if x_seq.len() != t_seq.len() {
        return Err(Error::LengthMismatch(format!(
            "{} inputs vs {} states",
            x_seq.len(),
            t_seq.len()
        )));
    }
    let ctx = SandwichContext::new(ch, p, t_seq, alpha, source, caps)?;
    let x_idx = ch.resolve_inputs(x_seq)?;
    let parts = ctx.parts(&x_idx, caps)?;
    let distance = trace_norm(&(&parts.sandwiched - parts.sigma.matrix()))?;
    Ok(SandwichedState { matrix: parts.sandwiched, distance_to_original: distance })
}

fn sandwiched_for_codebook(
    ctx: &SandwichContext<'_>,
    codebook: &WiretapCodebook,
    caps: &Caps,
) -> Result<Vec<CMatrix>> {
    let mut cache: std::collections::BTreeMap<Vec<usize>, CMatrix> = Default::default();
    let mut out = Vec::with_capacity(codebook.codewords().len());
    for j in 0..codebook.j_count() {
        for l in 0..codebook.l_count() {
            let key = codebook.codeword(j, l).to_vec();
            let m = match cache.get(&key) {
                Some(m) => m.clone(),
                None => {
                    let m = ctx.sigma_bar(codebook.codeword(j, l), caps)?;
                    cache.insert(key, m.clone());
                    m
                }
            };
            out.push(m);
        }
    }
    Ok(out)
}

/// Covering-lemma gap: the worst message's distance between the grand average
/// of sandwiched states and its own randomization average,
/// `max_j' || (1/LJ) sum_{j,l} sb_{j,l} - (1/L) sum_l sb_{j',l} ||_1`.
pub fn covering_gap(
    ch: &CqavwcChannel,
    p: &Distribution,
    codebook: &WiretapCodebook,
    t_seq: &StateSequence,
    alpha: f64,
    source: ProjectorSource,
    caps: &Caps,
) -> Result<f64> {
    let ctx = SandwichContext::new(ch, p, t_seq, alpha, source, caps)?;
    let sandwiched = sandwiched_for_codebook(&ctx, codebook, caps)?;
    let dim = sandwiched[0].nrows();
    let l_count = codebook.l_count();
    let mut message_avgs = Vec::with_capacity(codebook.j_count());
    for j in 0..codebook.j_count() {
        let mut avg = CMatrix::zeros(dim, dim);
        for l in 0..l_count {
            avg += &sandwiched[j * l_count + l];
        }
        message_avgs.push(avg.scale(1.0 / l_count as f64));
    }
    let mut grand = CMatrix::zeros(dim, dim);
    for m in &message_avgs {
        grand += m;
    }
    let grand = grand.scale(1.0 / codebook.j_count() as f64);

    let mut worst = 0.0f64;
    for m in &message_avgs {
        worst = worst.max(trace_norm(&(&grand - m))?);
    }
    Ok(worst)
}

/// Leakage to the eavesdropper: the Holevo quantity of the uniform message
/// variable against the message-averaged (unsandwiched) eavesdropper states
/// `(1/L) sum_l sigma_{x_{j,l}, t^n}`.
pub fn leakage_chi(
    ch: &CqavwcChannel,
    codebook: &WiretapCodebook,
    t_seq: &StateSequence,
    caps: &Caps,
) -> Result<f64> {
    let t_idx = ch.resolve_states(t_seq)?;
    let dim_total: u128 = (ch.dim(Receiver::Eve) as u128).pow(codebook.n() as u32);
    if dim_total > caps.dim {
        return Err(Error::ResourceCap {
            what: "dim (eavesdropper block)".into(),
            needed: dim_total,
            cap: caps.dim,
        });
    }
    let dim = dim_total as usize;
    let mut message_states = Vec::with_capacity(codebook.j_count());
    for j in 0..codebook.j_count() {
        let mut avg = CMatrix::zeros(dim, dim);
        for l in 0..codebook.l_count() {
            let prod =
                ch.product_state_by_idx(Receiver::Eve, codebook.codeword(j, l), &t_idx, caps)?;
            avg += prod.matrix();
        }
        message_states.push(DensityOperator::trusted(avg.scale(1.0 / codebook.l_count() as f64)));
    }
    let support: Vec<String> = (0..codebook.j_count()).map(|j| format!("m{j}")).collect();
    let ensemble = ChiEnsemble::new(Distribution::uniform(&support)?, message_states)?;
    holevo_chi(&ensemble)
}

/// Parameters for one end-to-end secrecy experiment.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentParams {
    pub n: usize,
    pub j_count: usize,
    pub l_count: usize,
    pub seed: u64,
    pub alpha: f64,
    pub delta: f64,
    pub projector_source: ProjectorSource,
    #[serde(skip)]
    pub caps: Caps,
}

impl ExperimentParams {
    pub fn new(n: usize, j_count: usize, l_count: usize, seed: u64) -> Self {
        Self {
            n,
            j_count,
            l_count,
            seed,
            alpha: 0.5,
            delta: 0.25,
            projector_source: ProjectorSource::Eve,
            caps: Caps::default(),
        }
    }
}

/// Per-state-sequence results of an experiment.
#[derive(Debug, Clone, Serialize)]
pub struct StateSequenceRow {
    pub t_seq: String,
    pub error: f64,
    pub leakage_bits: f64,
    pub covering_gap: f64,
}

/// Everything measured in one seeded experiment.
#[derive(Debug, Clone, Serialize)]
pub struct SecrecyExperimentReport {
    pub n: usize,
    pub j_count: usize,
    pub l_count: usize,
    pub seed: u64,
    pub rate_message: f64,
    pub rate_total: f64,
    pub max_error: f64,
    pub argmax_t_seq: String,
    pub per_t: Vec<StateSequenceRow>,
    /// Worst (smallest) `bound - distance` among the gentle-measurement
    /// checks run at the adversarial state sequence.
    pub gentle_worst_margin: f64,
    /// Largest `|| sandwiched - original ||_1` observed there.
    pub sandwich_distance_max: f64,
}

impl SecrecyExperimentReport {
    pub fn max_leakage_bits(&self) -> f64 {
        self.per_t.iter().map(|r| r.leakage_bits).fold(0.0, f64::max)
    }

    pub fn max_covering_gap(&self) -> f64 {
        self.per_t.iter().map(|r| r.covering_gap).fold(0.0, f64::max)
    }
}

/// Builds the typical set, restricted distribution, codebook, and uniform-Q
/// square-root decoder, then sweeps every state sequence measuring error,
/// leakage, and covering gap. Gentle-measurement damage is re-checked at the
/// adversarial sequence.
pub fn run_secrecy_experiment(
    ch: &CqavwcChannel,
    p: &Distribution,
    params: &ExperimentParams,
) -> Result<SecrecyExperimentReport> {
    let caps = &params.caps;
    let ts = typical_set(p, params.n, params.delta, caps)
        .map_err(|e| e.at_stage("typical_set"))?;
    let rd = restricted_distribution(ts).map_err(|e| e.at_stage("restricted_distribution"))?;
    let codebook = sample_codebook(&rd, params.j_count, params.l_count, params.seed)
        .map_err(|e| e.at_stage("codebook"))?;
    let q_letters = uniform_q_letters(ch, params.n)?;
    let decoder = pgm_decoder(ch, &codebook, p, &q_letters, params.delta, caps)
        .map_err(|e| e.at_stage("decoder"))?;

    caps.check("state_sequences", ch.states().len(), params.n)
        .map_err(|e| e.at_stage("state_sequences"))?;
    let t_seqs: Vec<StateSequence> = index_sequences(ch.states().len(), params.n)
        .map(|t_idx| {
            StateSequence::new(t_idx.iter().map(|&ti| ch.states()[ti].clone()).collect())
        })
        .collect::<Result<_>>()?;

    let rows: Result<Vec<StateSequenceRow>> = t_seqs
        .par_iter()
        .map(|t_seq| {
            let error = error_probability(ch, &codebook, &decoder, t_seq, caps)
                .map_err(|e| e.at_stage("error_probability"))?;
            let leakage = leakage_chi(ch, &codebook, t_seq, caps)
                .map_err(|e| e.at_stage("leakage"))?;
            let gap = covering_gap(
                ch,
                p,
                &codebook,
                t_seq,
                params.alpha,
                params.projector_source,
                caps,
            )
            .map_err(|e| e.at_stage("covering_gap"))?;
            Ok(StateSequenceRow {
                t_seq: t_seq.key(),
                error,
                leakage_bits: leakage,
                covering_gap: gap,
            })
        })
        .collect();
    let rows = rows?;

    let mut argmax = 0usize;
    for (i, row) in rows.iter().enumerate() {
        if row.error > rows[argmax].error {
            argmax = i;
        }
    }

    // Gentle-measurement re-check at the adversarial sequence: with
    // X = Pi_c Pi_o Pi_c, the damage to sigma is at most sqrt(8 (1 - tr
    // sigma_bar)).
    let worst_t = &t_seqs[argmax];
    let ctx = SandwichContext::new(ch, p, worst_t, params.alpha, params.projector_source, caps)
        .map_err(|e| e.at_stage("gentle_check"))?;
    let mut gentle_worst = f64::INFINITY;
    let mut distance_max = 0.0f64;
    let mut seen: std::collections::BTreeSet<Vec<usize>> = Default::default();
    for j in 0..codebook.j_count() {
        for l in 0..codebook.l_count() {
            if !seen.insert(codebook.codeword(j, l).to_vec()) {
                continue;
            }
            let parts = ctx
                .parts(codebook.codeword(j, l), caps)
                .map_err(|e| e.at_stage("gentle_check"))?;
            let x = &parts.conditional * &ctx.outer.projector * &parts.conditional;
            let gd = gentle_damage(&parts.sigma, &x).map_err(|e| e.at_stage("gentle_check"))?;
            gentle_worst = gentle_worst.min(gd.bound - gd.distance);
            let dist = trace_norm(&(&parts.sandwiched - parts.sigma.matrix()))?;
            distance_max = distance_max.max(dist);
        }
    }

    Ok(SecrecyExperimentReport {
        n: params.n,
        j_count: params.j_count,
        l_count: params.l_count,
        seed: params.seed,
        rate_message: codebook.rate_message(),
        rate_total: codebook.rate_total(),
        max_error: rows[argmax].error,
        argmax_t_seq: rows[argmax].t_seq.clone(),
        per_t: rows,
        gentle_worst_margin: gentle_worst,
        sandwich_distance_max: distance_max,
    })
}
