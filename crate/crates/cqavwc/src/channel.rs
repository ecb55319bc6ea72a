//! The CQ-AVWC data model: a doubly indexed family of states
//! `{(rho_{x,t}, sigma_{x,t})}` over an input alphabet and a jammer state set,
//! plus state averaging and n-letter product states.
//!
//! Channels are immutable after validation; all operations are pure and safe
//! for concurrent shared reads.

use std::collections::BTreeMap;

use crate::error::{Error, Result, Violation};
use crate::qmath::{hermitian_deviation, CMatrix, DensityOperator, TOL_HERM, TOL_PSD, TOL_TRACE};

/// Which output of the channel pair an operation acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Receiver {
    Legal,
    Eve,
}

impl Receiver {
    pub fn name(self) -> &'static str {
        match self {
            Receiver::Legal => "legal",
            Receiver::Eve => "eve",
        }
    }
}

/// Enumeration guardrails. The multi-letter brute forces are exponential;
/// these make them fail loudly instead of thrashing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Caps {
    /// Max Hilbert-space dimension `dim^n` of any materialized operator.
    pub dim: u128,
    /// Max `|X|^n` input sequences enumerated.
    pub input_sequences: u128,
    /// Max `|Theta|^n` state sequences enumerated.
    pub state_sequences: u128,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { dim: 4096, input_sequences: 4096, state_sequences: 4096 }
    }
}

impl Caps {
    pub fn check(&self, what: &str, base: usize, n: usize) -> Result<()> {
        let cap = match what {
            "dim" => self.dim,
            "input_sequences" => self.input_sequences,
            "state_sequences" => self.state_sequences,
            _ => unreachable!("unknown cap {what}"),
        };
        let mut needed: u128 = 1;
        for _ in 0..n {
            needed = needed.saturating_mul(base as u128);
            if needed > cap {
                return Err(Error::ResourceCap {
                    what: format!("{what} ({base}^{n})"),
                    needed,
                    cap,
                });
            }
        }
        Ok(())
    }
}

/// A probability vector over an ordered finite label set.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Distribution {
    support: Vec<String>,
    weights: Vec<f64>,
}

impl Distribution {
    /// Weights must be nonnegative and sum to 1 within `1e-12`.
    pub fn new(support: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        if support.len() != weights.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} labels vs {} weights",
                support.len(),
                weights.len()
            )));
        }
        if support.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for label in &support {
            if !seen.insert(label.clone()) {
                return Err(Error::InvalidDistribution(format!("duplicate label `{label}`")));
            }
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidDistribution(format!("negative or non-finite weight {w}")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDistribution(format!("weights sum to {sum}")));
        }
        Ok(Self { support, weights })
    }

    pub fn uniform(support: &[String]) -> Result<Self> {
        let n = support.len();
        Self::new(support.to_vec(), vec![1.0 / n as f64; n])
    }

    pub fn point_mass(support: &[String], target: &str) -> Result<Self> {
        let weights: Vec<f64> =
            support.iter().map(|l| if l == target { 1.0 } else { 0.0 }).collect();
        if !support.iter().any(|l| l == target) {
            return Err(Error::UnknownLabel { label: target.into(), place: "point mass".into() });
        }
        Self::new(support.to_vec(), weights)
    }

    pub fn support(&self) -> &[String] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn weight_of(&self, label: &str) -> Option<f64> {
        self.support.iter().position(|l| l == label).map(|i| self.weights[i])
    }

    /// Weight vector reindexed to `labels` order; errors if the supports are
    /// not the same label set.
    pub fn aligned_to(&self, labels: &[String], place: &str) -> Result<Vec<f64>> {
        if self.support.len() != labels.len() {
            return Err(Error::InvalidDistribution(format!(
                "{place}: support size {} vs expected {}",
                self.support.len(),
                labels.len()
            )));
        }
        labels
            .iter()
            .map(|l| {
                self.weight_of(l).ok_or_else(|| Error::UnknownLabel {
                    label: l.clone(),
                    place: place.into(),
                })
            })
            .collect()
    }
}

/// A length-n sequence of jammer state labels `t^n`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct StateSequence {
    symbols: Vec<String>,
}

impl StateSequence {
    pub fn new(symbols: Vec<String>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::DegenerateInput("empty state sequence".into()));
        }
        Ok(Self { symbols })
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Canonical display form, `|`-joined.
    pub fn key(&self) -> String {
        self.symbols.join("|")
    }
}

impl std::fmt::Display for StateSequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.key())
    }
}

/// Unvalidated channel description, as parsed from a channel file or built
/// in code. `validate_channel` turns it into a [`CqavwcChannel`].
#[derive(Debug, Clone)]
pub struct RawChannel {
    pub inputs: Vec<String>,
    pub states: Vec<String>,
    pub dim_legal: usize,
    pub dim_eve: usize,
    /// Keyed by `(input, state)`.
    pub legal: BTreeMap<(String, String), CMatrix>,
    pub eve: BTreeMap<(String, String), CMatrix>,
}

/// A validated classical-quantum arbitrarily varying wiretap channel.
#[derive(Debug, Clone)]
pub struct CqavwcChannel {
    inputs: Vec<String>,
    states: Vec<String>,
    dim_legal: usize,
    dim_eve: usize,
    /// `[x][t]`, indexed in alphabet order.
    legal: Vec<Vec<DensityOperator>>,
    eve: Vec<Vec<DensityOperator>>,
}

fn matrix_violations(
    m: &CMatrix,
    expected_dim: usize,
    receiver: &str,
    x: &str,
    t: &str,
    out: &mut Vec<Violation>,
) {
    let mut push = |invariant: &str, detail: String| {
        out.push(Violation {
            receiver: receiver.into(),
            input: x.into(),
            state: t.into(),
            invariant: invariant.into(),
            detail,
        });
    };
    if m.nrows() != m.ncols() || m.nrows() != expected_dim {
        push("shape", format!("got {}x{}, expected {expected_dim}x{expected_dim}", m.nrows(), m.ncols()));
        return;
    }
    if !m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        push("finite", "non-finite entry".into());
        return;
    }
    let dev = hermitian_deviation(m);
    if dev > TOL_HERM {
        push("hermitian", format!("max deviation {dev:.3e}"));
    }
    let tr: nalgebra::Complex<f64> = m.diagonal().iter().sum();
    if (tr.re - 1.0).abs() > TOL_TRACE || tr.im.abs() > TOL_TRACE {
        push("unit_trace", format!("measured trace {}", tr.re));
    }
    if dev <= TOL_HERM {
        let sym = (m + m.adjoint()).scale(0.5);
        let min_eig =
            sym.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig < -TOL_PSD {
            push("positive_semidefinite", format!("min eigenvalue {min_eig:.3e}"));
        }
    }
}

/// Validates every invariant of a raw channel description, reporting all
/// violations rather than the first.
pub fn validate_channel(raw: &RawChannel) -> Result<CqavwcChannel> {
    let mut violations = Vec::new();
    let file_violation = |invariant: &str, detail: String| Violation {
        receiver: "file".into(),
        input: String::new(),
        state: String::new(),
        invariant: invariant.into(),
        detail,
    };

    if raw.inputs.is_empty() {
        violations.push(file_violation("alphabet", "empty input alphabet".into()));
    }
    if raw.states.is_empty() {
        violations.push(file_violation("alphabet", "empty state set".into()));
    }
    if raw.dim_legal == 0 || raw.dim_eve == 0 {
        violations.push(file_violation("dimension", "dimensions must be positive".into()));
    }
    for (kind, labels) in [("input", &raw.inputs), ("state", &raw.states)] {
        let mut seen = std::collections::BTreeSet::new();
        for l in labels.iter() {
            if l.contains('|') {
                violations
                    .push(file_violation("label", format!("{kind} label `{l}` contains '|'")));
            }
            if !seen.insert(l) {
                violations.push(file_violation("label", format!("duplicate {kind} label `{l}`")));
            }
        }
    }
    if !violations.is_empty() {
        return Err(Error::ChannelInvalid(violations));
    }

    let mut legal = Vec::with_capacity(raw.inputs.len());
    let mut eve = Vec::with_capacity(raw.inputs.len());
    for x in &raw.inputs {
        let mut legal_row = Vec::with_capacity(raw.states.len());
        let mut eve_row = Vec::with_capacity(raw.states.len());
        for t in &raw.states {
            let key = (x.clone(), t.clone());
            for (receiver, map, dim, row) in [
                ("legal", &raw.legal, raw.dim_legal, &mut legal_row),
                ("eve", &raw.eve, raw.dim_eve, &mut eve_row),
            ] {
                match map.get(&key) {
                    None => violations.push(Violation {
                        receiver: receiver.into(),
                        input: x.clone(),
                        state: t.clone(),
                        invariant: "present".into(),
                        detail: format!("missing entry for key `{x}|{t}`"),
                    }),
                    Some(m) => {
                        let before = violations.len();
                        matrix_violations(m, dim, receiver, x, t, &mut violations);
                        if violations.len() == before {
                            row.push(DensityOperator::trusted(m.clone()));
                        }
                    }
                }
            }
        }
        legal.push(legal_row);
        eve.push(eve_row);
    }
    if !violations.is_empty() {
        return Err(Error::ChannelInvalid(violations));
    }
    Ok(CqavwcChannel {
        inputs: raw.inputs.clone(),
        states: raw.states.clone(),
        dim_legal: raw.dim_legal,
        dim_eve: raw.dim_eve,
        legal,
        eve,
    })
}

impl CqavwcChannel {
    /// Builds and validates a channel from per-(x,t) states given in alphabet
    /// order: `legal[x][t]`, `eve[x][t]`.
    pub fn from_states(
        inputs: Vec<String>,
        states: Vec<String>,
        legal: Vec<Vec<DensityOperator>>,
        eve: Vec<Vec<DensityOperator>>,
    ) -> Result<Self> {
        let dim_legal = legal.first().and_then(|r| r.first()).map(|d| d.dim()).unwrap_or(0);
        let dim_eve = eve.first().and_then(|r| r.first()).map(|d| d.dim()).unwrap_or(0);
        let mut raw = RawChannel {
            inputs,
            states,
            dim_legal,
            dim_eve,
            legal: BTreeMap::new(),
            eve: BTreeMap::new(),
        };
        for (xi, x) in raw.inputs.iter().enumerate() {
            for (ti, t) in raw.states.iter().enumerate() {
                if let Some(m) = legal.get(xi).and_then(|r| r.get(ti)) {
                    raw.legal.insert((x.clone(), t.clone()), m.matrix().clone());
                }
                if let Some(m) = eve.get(xi).and_then(|r| r.get(ti)) {
                    raw.eve.insert((x.clone(), t.clone()), m.matrix().clone());
                }
            }
        }
        validate_channel(&raw)
    }

    pub fn inputs(&self) -> &[String] {
        &self.inputs
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn dim(&self, receiver: Receiver) -> usize {
        match receiver {
            Receiver::Legal => self.dim_legal,
            Receiver::Eve => self.dim_eve,
        }
    }

    pub fn state_at(&self, receiver: Receiver, x_idx: usize, t_idx: usize) -> &DensityOperator {
        match receiver {
            Receiver::Legal => &self.legal[x_idx][t_idx],
            Receiver::Eve => &self.eve[x_idx][t_idx],
        }
    }

    pub fn state_of(&self, receiver: Receiver, x: &str, t: &str) -> Result<&DensityOperator> {
        let xi = self.input_index(x)?;
        let ti = self.state_index(t)?;
        Ok(self.state_at(receiver, xi, ti))
    }

    pub fn input_index(&self, x: &str) -> Result<usize> {
        self.inputs.iter().position(|l| l == x).ok_or_else(|| Error::UnknownLabel {
            label: x.into(),
            place: "input alphabet".into(),
        })
    }

    pub fn state_index(&self, t: &str) -> Result<usize> {
        self.states.iter().position(|l| l == t).ok_or_else(|| Error::UnknownLabel {
            label: t.into(),
            place: "state set".into(),
        })
    }

    pub fn resolve_inputs(&self, labels: &[String]) -> Result<Vec<usize>> {
        labels.iter().map(|l| self.input_index(l)).collect()
    }

    pub fn resolve_states(&self, seq: &StateSequence) -> Result<Vec<usize>> {
        seq.symbols().iter().map(|l| self.state_index(l)).collect()
    }

    /// `rho^Q_x = sum_t Q(t) rho_{x,t}` for every input x, in alphabet order.
    pub fn averaged_legal_states(&self, q: &Distribution) -> Result<Vec<(String, DensityOperator)>> {
        let qw = q.aligned_to(&self.states, "state distribution")?;
        self.inputs
            .iter()
            .enumerate()
            .map(|(xi, x)| Ok((x.clone(), self.letter_state_average(Receiver::Legal, xi, &qw))))
            .collect()
    }

    /// `sum_t q[t] * state_{x,t}` with `q` already aligned to state order.
    pub fn letter_state_average(
        &self,
        receiver: Receiver,
        x_idx: usize,
        q_aligned: &[f64],
    ) -> DensityOperator {
        let d = self.dim(receiver);
        let mut m = CMatrix::zeros(d, d);
        for (ti, &w) in q_aligned.iter().enumerate() {
            if w != 0.0 {
                m += self.state_at(receiver, x_idx, ti).matrix().scale(w);
            }
        }
        DensityOperator::trusted(m)
    }

    /// `sum_x p[x] * state_{x,t}` with `p` aligned to input order.
    pub fn letter_input_average(
        &self,
        receiver: Receiver,
        p_aligned: &[f64],
        t_idx: usize,
    ) -> DensityOperator {
        let d = self.dim(receiver);
        let mut m = CMatrix::zeros(d, d);
        for (xi, &w) in p_aligned.iter().enumerate() {
            if w != 0.0 {
                m += self.state_at(receiver, xi, t_idx).matrix().scale(w);
            }
        }
        DensityOperator::trusted(m)
    }

    /// The n-letter product state `state_{x_1,t_1} (x) ... (x) state_{x_n,t_n}`.
    pub fn product_state(
        &self,
        receiver: Receiver,
        x_seq: &[String],
        t_seq: &StateSequence,
        caps: &Caps,
    ) -> Result<DensityOperator> {
        if x_seq.len() != t_seq.len() {
            return Err(Error::LengthMismatch(format!(
                "{} inputs vs {} states",
                x_seq.len(),
                t_seq.len()
            )));
        }
        let x_idx = self.resolve_inputs(x_seq)?;
        let t_idx = self.resolve_states(t_seq)?;
        self.product_state_by_idx(receiver, &x_idx, &t_idx, caps)
    }

    /// Index-level variant of [`CqavwcChannel::product_state`].
    pub fn product_state_by_idx(
        &self,
        receiver: Receiver,
        x_idx: &[usize],
        t_idx: &[usize],
        caps: &Caps,
    ) -> Result<DensityOperator> {
        if x_idx.len() != t_idx.len() {
            return Err(Error::LengthMismatch(format!(
                "{} inputs vs {} states",
                x_idx.len(),
                t_idx.len()
            )));
        }
        if x_idx.is_empty() {
            return Err(Error::DegenerateInput("empty sequence".into()));
        }
        caps.check("dim", self.dim(receiver), x_idx.len())?;
        let mut m = self.state_at(receiver, x_idx[0], t_idx[0]).matrix().clone();
        for (xi, ti) in x_idx.iter().zip(t_idx).skip(1) {
            m = m.kronecker(self.state_at(receiver, *xi, *ti).matrix());
        }
        Ok(DensityOperator::trusted(m))
    }
}

/// Enumerates all `base^n` index sequences in lexicographic order (first
/// symbol most significant).
pub fn index_sequences(base: usize, n: usize) -> impl Iterator<Item = Vec<usize>> {
    let total: u128 = (base as u128).pow(n as u32);
    (0..total).map(move |mut k| {
        let mut seq = vec![0usize; n];
        for slot in (0..n).rev() {
            seq[slot] = (k % base as u128) as usize;
            k /= base as u128;
        }
        seq
    })
}
