//! Frequency-typical sets, the restricted sampling distribution, and spectral
//! (entropy-window) typical projectors with their mass/rank/sandwich reports.
//!
//! A spectral projector keeps the eigenvalues of an n-letter state that lie in
//! an exponential window around `2^(-n * center)`, where `center` is an
//! entropy rate in bits. The half-width parameter `alpha` is measured in
//! natural-log units: the window is
//! `[2^(-n*center) * exp(-n*alpha), 2^(-n*center) * exp(+n*alpha)]`.
//! On that scale a qubit letter spectrum has `Var(-ln l) <= 0.4393 < 1/2`,
//! which is what makes the captured-mass floor `1 - d/(4 n alpha^2)` hold
//! with its stated constant.

use rand::Rng;

use crate::channel::{index_sequences, Caps, CqavwcChannel, Distribution, Receiver, StateSequence};
use crate::error::{Error, Result};
use crate::qmath::{entropy_of_spectrum, CMatrix, DensityOperator, SpectralDecomposition};

/// All sequences whose empirical letter frequencies deviate from `p` by at
/// most `delta`, with zero-probability letters excluded entirely.
#[derive(Debug, Clone)]
pub struct TypicalSet {
    p: Distribution,
    n: usize,
    delta: f64,
    /// Letter-index sequences in lexicographic order.
    members: Vec<Vec<usize>>,
}

impl TypicalSet {
    pub fn p(&self) -> &Distribution {
        &self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn members(&self) -> &[Vec<usize>] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn member_labels(&self, index: usize) -> Vec<String> {
        self.members[index].iter().map(|&i| self.p.support()[i].clone()).collect()
    }
}

/// Exhaustively enumerates the delta-typical set of `p` at block length `n`.
pub fn typical_set(p: &Distribution, n: usize, delta: f64, caps: &Caps) -> Result<TypicalSet> {
    if n == 0 {
        return Err(Error::DegenerateInput("block length must be positive".into()));
    }
    if delta <= 0.0 {
        return Err(Error::DegenerateInput("delta must be positive".into()));
    }
    let a = p.len();
    caps.check("input_sequences", a, n)?;
    let weights = p.weights();
    let mut members = Vec::new();
    'seq: for seq in index_sequences(a, n) {
        let mut counts = vec![0usize; a];
        for &s in &seq {
            counts[s] += 1;
        }
        for (i, &c) in counts.iter().enumerate() {
            let freq = c as f64 / n as f64;
            if weights[i] == 0.0 {
                if c > 0 {
                    continue 'seq;
                }
            } else if (freq - weights[i]).abs() > delta {
                continue 'seq;
            }
        }
        members.push(seq);
    }
    Ok(TypicalSet { p: p.clone(), n, delta, members })
}

/// The product law conditioned on the typical set: weight proportional to
/// `P^n(x^n)` on members, zero elsewhere.
#[derive(Debug, Clone)]
pub struct RestrictedDistribution {
    set: TypicalSet,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
}

pub fn restricted_distribution(set: TypicalSet) -> Result<RestrictedDistribution> {
    if set.is_empty() {
        return Err(Error::DegenerateInput("typical set is empty".into()));
    }
    let p = set.p.weights();
    let raw: Vec<f64> = set
        .members
        .iter()
        .map(|seq| seq.iter().map(|&s| p[s]).product::<f64>())
        .collect();
    let total: f64 = raw.iter().sum();
    if total <= 0.0 {
        return Err(Error::DegenerateInput("typical set carries no mass".into()));
    }
    let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let mut cumulative = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in &weights {
        acc += w;
        cumulative.push(acc);
    }
    if let Some(last) = cumulative.last_mut() {
        *last = 1.0;
    }
    Ok(RestrictedDistribution { set, weights, cumulative })
}

impl RestrictedDistribution {
    pub fn set(&self) -> &TypicalSet {
        &self.set
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Inverse-CDF draw of one member sequence.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> &[usize] {
        let u: f64 = rng.random_range(0.0..1.0);
        let idx = self.cumulative.partition_point(|&c| c < u).min(self.weights.len() - 1);
        &self.set.members[idx]
    }
}

/// An orthogonal projector onto the eigenvalue window of an n-letter state,
/// with its selection metadata.
#[derive(Debug, Clone)]
pub struct TypicalProjector {
    pub projector: CMatrix,
    /// Inclusive eigenvalue window `(lower, upper)`.
    pub window: (f64, f64),
    pub selected_count: usize,
    /// Window-center entropy rate in bits per letter.
    pub center_entropy: f64,
    pub n: usize,
    pub alpha: f64,
}

/// Inclusive window `[2^(-n c) e^(-n a), 2^(-n c) e^(+n a)]`.
pub fn window_edges(n: usize, center_bits: f64, alpha: f64) -> (f64, f64) {
    let center = (-(n as f64) * center_bits).exp2();
    let spread = ((n as f64) * alpha).exp();
    (center / spread, center * spread)
}

/// Spectral projector of an arbitrary (dense) state. `center_bits` defaults
/// to `S(state)/n`.
pub fn spectral_projector(
    state: &DensityOperator,
    n: usize,
    alpha: f64,
    center_bits: Option<f64>,
) -> Result<TypicalProjector> {
    if alpha <= 0.0 {
        return Err(Error::DegenerateInput("alpha must be positive".into()));
    }
    let dec = state.decompose()?;
    let spectrum: Vec<f64> = dec.eigenvalues.iter().map(|l| l.clamp(0.0, 1.0)).collect();
    let center = center_bits.unwrap_or_else(|| entropy_of_spectrum(&spectrum) / n as f64);
    let window = window_edges(n, center, alpha);
    let kept: Vec<usize> = (0..spectrum.len())
        .filter(|&k| spectrum[k] >= window.0 && spectrum[k] <= window.1)
        .collect();
    let projector = projector_from_columns(&dec.eigenvectors, &kept);
    Ok(TypicalProjector {
        projector,
        window,
        selected_count: kept.len(),
        center_entropy: center,
        n,
        alpha,
    })
}

fn projector_from_columns(vectors: &CMatrix, kept: &[usize]) -> CMatrix {
    let d = vectors.nrows();
    if kept.is_empty() {
        return CMatrix::zeros(d, d);
    }
    let mut sel = CMatrix::zeros(d, kept.len());
    for (col, &k) in kept.iter().enumerate() {
        sel.set_column(col, &vectors.column(k));
    }
    &sel * sel.adjoint()
}

/// The spectral structure of a tensor product, kept in factored form: the
/// eigenvalues are products of per-letter eigenvalues and the eigenvector
/// matrix is the Kronecker product of the per-letter ones.
#[derive(Debug, Clone)]
pub struct ProductSpectrum {
    letters: Vec<SpectralDecomposition>,
    dims: Vec<usize>,
    dim: u128,
}

impl ProductSpectrum {
    pub fn from_letters(letters: &[DensityOperator]) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::DegenerateInput("no letters".into()));
        }
        let decs: Result<Vec<SpectralDecomposition>> =
            letters.iter().map(|l| l.decompose()).collect();
        let decs = decs?;
        let dims: Vec<usize> = decs.iter().map(|d| d.dim()).collect();
        let dim = dims.iter().map(|&d| d as u128).product();
        Ok(Self { letters: decs, dims, dim })
    }

    pub fn n(&self) -> usize {
        self.letters.len()
    }

    pub fn dim(&self) -> u128 {
        self.dim
    }

    /// Sum of per-letter entropies, in bits.
    pub fn entropy_bits(&self) -> f64 {
        self.letters.iter().map(|d| entropy_of_spectrum(&d.eigenvalues)).sum()
    }

    /// Eigenvalue of the flat index in Kronecker column order.
    pub fn eigenvalue(&self, flat: u128) -> f64 {
        let mut rest = flat;
        let mut value = 1.0;
        for (letter, &d) in self.letters.iter().zip(&self.dims).rev() {
            let k = (rest % d as u128) as usize;
            rest /= d as u128;
            value *= letter.eigenvalues[k].clamp(0.0, 1.0);
        }
        value
    }

    /// Flat indices whose eigenvalues lie in the inclusive window.
    pub fn kept_in_window(&self, window: (f64, f64)) -> Vec<u128> {
        (0..self.dim)
            .filter(|&k| {
                let l = self.eigenvalue(k);
                l >= window.0 && l <= window.1
            })
            .collect()
    }

    /// Kronecker product of the per-letter eigenvector matrices.
    pub fn eigenvector_matrix(&self) -> CMatrix {
        let mut v = self.letters[0].eigenvectors.clone();
        for letter in &self.letters[1..] {
            v = v.kronecker(&letter.eigenvectors);
        }
        v
    }
}

/// Materializes the product state `letter_1 (x) ... (x) letter_n`.
pub fn product_of_letters(letters: &[DensityOperator], caps: &Caps) -> Result<DensityOperator> {
    if letters.is_empty() {
        return Err(Error::DegenerateInput("no letters".into()));
    }
    let dim: u128 = letters.iter().map(|l| l.dim() as u128).product();
    if dim > caps.dim {
        return Err(Error::ResourceCap {
            what: "dim (product state)".into(),
            needed: dim,
            cap: caps.dim,
        });
    }
    let mut m = letters[0].matrix().clone();
    for l in &letters[1..] {
        m = m.kronecker(l.matrix());
    }
    Ok(DensityOperator::trusted(m))
}

/// Spectral projector of a product state, computed from per-letter
/// decompositions. Exact: the spectrum of a Kronecker product is the product
/// of the factor spectra. `center_bits` defaults to the mean letter entropy.
pub fn product_projector(
    letters: &[DensityOperator],
    alpha: f64,
    center_bits: Option<f64>,
    caps: &Caps,
) -> Result<TypicalProjector> {
    if alpha <= 0.0 {
        return Err(Error::DegenerateInput("alpha must be positive".into()));
    }
    let spectrum = ProductSpectrum::from_letters(letters)?;
    if spectrum.dim() > caps.dim {
        return Err(Error::ResourceCap {
            what: "dim (product projector)".into(),
            needed: spectrum.dim(),
            cap: caps.dim,
        });
    }
    let n = spectrum.n();
    let center = center_bits.unwrap_or_else(|| spectrum.entropy_bits() / n as f64);
    let window = window_edges(n, center, alpha);
    let kept128 = spectrum.kept_in_window(window);
    let kept: Vec<usize> = kept128.iter().map(|&k| k as usize).collect();
    let vectors = spectrum.eigenvector_matrix();
    let projector = projector_from_columns(&vectors, &kept);
    Ok(TypicalProjector {
        projector,
        window,
        selected_count: kept.len(),
        center_entropy: center,
        n,
        alpha,
    })
}

/// How the per-letter conditional states of a projector are formed.
#[derive(Debug, Clone, Copy)]
pub enum LetterLaw<'a> {
    /// A concrete state sequence `t^n`: letter i is `state_{x_i, t_i}`.
    Sequence(&'a StateSequence),
    /// Per-letter averaging distributions: letter i is `sum_t Q_i(t) state_{x_i,t}`.
    PerLetter(&'a [Distribution]),
}

/// Builds the per-letter conditional states for `x^n` under the given law.
pub fn conditional_letters(
    ch: &CqavwcChannel,
    receiver: Receiver,
    x_seq: &[String],
    law: LetterLaw<'_>,
) -> Result<Vec<DensityOperator>> {
    let x_idx = ch.resolve_inputs(x_seq)?;
    match law {
        LetterLaw::Sequence(t_seq) => {
            if t_seq.len() != x_seq.len() {
                return Err(Error::LengthMismatch(format!(
                    "{} inputs vs {} states",
                    x_seq.len(),
                    t_seq.len()
                )));
            }
            let t_idx = ch.resolve_states(t_seq)?;
            Ok(x_idx
                .iter()
                .zip(&t_idx)
                .map(|(&xi, &ti)| ch.state_at(receiver, xi, ti).clone())
                .collect())
        }
        LetterLaw::PerLetter(qs) => {
            if qs.len() != x_seq.len() {
                return Err(Error::LengthMismatch(format!(
                    "{} inputs vs {} per-letter distributions",
                    x_seq.len(),
                    qs.len()
                )));
            }
            x_idx
                .iter()
                .zip(qs)
                .map(|(&xi, q)| {
                    let qw = q.aligned_to(ch.states(), "per-letter distribution")?;
                    Ok(ch.letter_state_average(receiver, xi, &qw))
                })
                .collect()
        }
    }
}

/// Conditional typical projector of the n-letter state selected by `x^n` and
/// the letter law, centered at the per-sequence letter entropy rate.
pub fn conditional_projector(
    ch: &CqavwcChannel,
    receiver: Receiver,
    x_seq: &[String],
    law: LetterLaw<'_>,
    alpha: f64,
    caps: &Caps,
) -> Result<TypicalProjector> {
    let letters = conditional_letters(ch, receiver, x_seq, law)?;
    product_projector(&letters, alpha, None, caps)
}

/// Evaluation of the three projector properties, with margins.
#[derive(Debug, Clone, serde::Serialize)]
pub struct MassChecks {
    /// `tr(state * proj)`.
    pub captured_mass: f64,
    /// `1 - d/(4 n alpha^2)`, the floor for a projector built at width alpha.
    pub floor_plain: f64,
    /// `1 - a d/(4 n alpha^2)`, the floor for a projector built at width
    /// `alpha * sqrt(a)`.
    pub floor_widened: f64,
    /// `None` when the corresponding floor is not positive (vacuous).
    pub mass_ok_plain: Option<bool>,
    pub mass_ok_widened: Option<bool>,
    pub selected_count: usize,
    /// `1 / window.lower`: forced by mass <= 1 since every kept eigenvalue
    /// is at least the window floor.
    pub rank_bound: f64,
    pub rank_ok: bool,
    /// Largest eigenvalue of `proj * state * proj`.
    pub sandwich_max_eigenvalue: f64,
    /// The window's upper edge.
    pub sandwich_threshold: f64,
    pub sandwich_ok: bool,
    pub window: (f64, f64),
}

#[allow(clippy::too_many_arguments)]
fn assemble_checks(
    captured_mass: f64,
    selected_count: usize,
    sandwich_max: f64,
    window: (f64, f64),
    n: usize,
    alpha: f64,
    dim_letter: usize,
    alphabet_size: usize,
) -> MassChecks {
    let na2 = 4.0 * n as f64 * alpha * alpha;
    let floor_plain = 1.0 - dim_letter as f64 / na2;
    let floor_widened = 1.0 - alphabet_size as f64 * dim_letter as f64 / na2;
    let rank_bound = 1.0 / window.0;
    MassChecks {
        captured_mass,
        floor_plain,
        floor_widened,
        mass_ok_plain: (floor_plain > 0.0).then_some(captured_mass >= floor_plain),
        mass_ok_widened: (floor_widened > 0.0).then_some(captured_mass >= floor_widened),
        selected_count,
        rank_bound,
        rank_ok: selected_count as f64 <= rank_bound + 1e-9,
        sandwich_max_eigenvalue: sandwich_max,
        sandwich_threshold: window.1,
        sandwich_ok: sandwich_max <= window.1 + 1e-10,
        window,
    }
}

/// Evaluates the mass floor, the constant-free rank bound, and the PSD
/// sandwich bound for a projector built from `state`. The plain floor applies
/// when the projector was built at width `alpha`, the widened one when it was
/// built at `alpha * sqrt(alphabet_size)`.
pub fn projector_mass_checks(
    state: &DensityOperator,
    proj: &TypicalProjector,
    dim_letter: usize,
    alphabet_size: usize,
) -> Result<MassChecks> {
    if state.dim() != proj.projector.nrows() {
        return Err(Error::DimensionMismatch { left: state.dim(), right: proj.projector.nrows() });
    }
    let captured = crate::qmath::trace_of_product(state.matrix(), &proj.projector);
    let sandwiched = &proj.projector * state.matrix() * &proj.projector;
    let sym = (&sandwiched + sandwiched.adjoint()).scale(0.5);
    let max_eig =
        sym.symmetric_eigenvalues().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(assemble_checks(
        captured,
        proj.selected_count,
        max_eig,
        proj.window,
        proj.n,
        proj.alpha,
        dim_letter,
        alphabet_size,
    ))
}

/// Same checks for an i.i.d. product `letter^(x)n`, computed exactly from the
/// letter spectrum without materializing anything. The eigenvalue multiset is
/// walked by occupation counts, so the cost is polynomial in `n`.
pub fn iid_mass_checks(letter: &DensityOperator, n: usize, alpha: f64) -> Result<MassChecks> {
    if alpha <= 0.0 {
        return Err(Error::DegenerateInput("alpha must be positive".into()));
    }
    if n == 0 {
        return Err(Error::DegenerateInput("block length must be positive".into()));
    }
    let spectrum = letter.spectrum()?;
    let d = spectrum.len();
    let center = entropy_of_spectrum(&spectrum);
    let window = window_edges(n, center, alpha);

    // Walk occupation vectors (k_1..k_d) summing to n, with multinomial
    // multiplicity; the product eigenvalue is prod l_i^{k_i}.
    let mut captured = 0.0f64;
    let mut count: u128 = 0;
    let mut sandwich_max = 0.0f64;
    let mut occupation = vec![0usize; d];
    enumerate_occupations(d, &mut occupation, 0, n, &mut |occ| {
        let mut lam = 1.0f64;
        for (i, &k) in occ.iter().enumerate() {
            lam *= spectrum[i].powi(k as i32);
        }
        if lam >= window.0 && lam <= window.1 {
            let mult = multinomial(n, occ);
            captured += mult as f64 * lam;
            count += mult;
            sandwich_max = sandwich_max.max(lam);
        }
    });
    Ok(assemble_checks(
        captured,
        count.min(usize::MAX as u128) as usize,
        sandwich_max,
        window,
        n,
        alpha,
        d,
        d,
    ))
}

fn enumerate_occupations(
    d: usize,
    occupation: &mut Vec<usize>,
    slot: usize,
    remaining: usize,
    visit: &mut impl FnMut(&[usize]),
) {
    if slot == d - 1 {
        occupation[slot] = remaining;
        visit(occupation);
        return;
    }
    for k in 0..=remaining {
        occupation[slot] = k;
        enumerate_occupations(d, occupation, slot + 1, remaining - k, visit);
    }
}

fn multinomial(n: usize, occupation: &[usize]) -> u128 {
    let mut value: u128 = 1;
    let mut rest = n;
    for &k in occupation {
        value *= binomial(rest, k);
        rest -= k;
    }
    value
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut value: u128 = 1;
    for i in 0..k {
        value = value * (n - i) as u128 / (i + 1) as u128;
    }
    value
}
