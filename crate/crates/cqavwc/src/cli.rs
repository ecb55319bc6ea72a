//! Batch commands behind the `cqavwc` binary: parse channel files, dispatch
//! the analysis commands, and emit machine-readable reports.
//!
//! A report is a single JSON document on standard output (the `--out` flag
//! redirects it to a file); sweep tables go to CSV. Reports never embed
//! wall-clock times, so a command rerun with the same inputs and seeds
//! produces byte-identical output.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::{validate_channel, Caps, CqavwcChannel, Distribution, RawChannel};
use crate::coding::{run_secrecy_experiment, ExperimentParams, SecrecyExperimentReport};
use crate::error::{Error, Result, Violation};
use crate::infoquant::{lower_bound_csi, lower_bound_no_csi, BoundReport, GridConfig};
use crate::qmath::{cplx, CMatrix};
use crate::sweeps::{lemma_sweeps, LemmaSweepReport};
use crate::symmetrize::{
    channel_symmetrizability, check_symmetrizable, StateFamily, SymmetrizabilityVerdict,
};

/// Matrix encoding in channel files: array of rows, each entry a
/// `[real, imaginary]` pair.
pub type MatrixData = Vec<Vec<[f64; 2]>>;

/// On-disk channel description. States are keyed by `"x|t"`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelFile {
    pub schema_version: u32,
    pub dim_legal: usize,
    pub dim_eve: usize,
    pub inputs: Vec<String>,
    pub states: Vec<String>,
    pub rho: BTreeMap<String, MatrixData>,
    pub sigma: BTreeMap<String, MatrixData>,
}

pub const SCHEMA_VERSION: u32 = 1;

fn matrix_from_data(key: &str, data: &MatrixData) -> Result<CMatrix> {
    let rows = data.len();
    if rows == 0 {
        return Err(Error::Parse(format!("matrix `{key}`: empty")));
    }
    let cols = data[0].len();
    if data.iter().any(|r| r.len() != cols) {
        return Err(Error::Parse(format!("matrix `{key}`: ragged rows")));
    }
    let mut m = CMatrix::zeros(rows, cols);
    for (i, row) in data.iter().enumerate() {
        for (j, entry) in row.iter().enumerate() {
            m[(i, j)] = cplx(entry[0], entry[1]);
        }
    }
    Ok(m)
}

fn matrix_to_data(m: &CMatrix) -> MatrixData {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

impl ChannelFile {
    /// Serializes a validated channel back into the file schema.
    pub fn from_channel(ch: &CqavwcChannel) -> Self {
        let mut rho = BTreeMap::new();
        let mut sigma = BTreeMap::new();
        for (xi, x) in ch.inputs().iter().enumerate() {
            for (ti, t) in ch.states().iter().enumerate() {
                let key = format!("{x}|{t}");
                rho.insert(
                    key.clone(),
                    matrix_to_data(ch.state_at(crate::channel::Receiver::Legal, xi, ti).matrix()),
                );
                sigma.insert(
                    key,
                    matrix_to_data(ch.state_at(crate::channel::Receiver::Eve, xi, ti).matrix()),
                );
            }
        }
        ChannelFile {
            schema_version: SCHEMA_VERSION,
            dim_legal: ch.dim(crate::channel::Receiver::Legal),
            dim_eve: ch.dim(crate::channel::Receiver::Eve),
            inputs: ch.inputs().to_vec(),
            states: ch.states().to_vec(),
            rho,
            sigma,
        }
    }

    pub fn to_raw(&self) -> Result<RawChannel> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let split_key = |map_name: &str, key: &str| -> Result<(String, String)> {
            let mut parts = key.splitn(2, '|');
            match (parts.next(), parts.next()) {
                (Some(x), Some(t)) if !x.is_empty() && !t.is_empty() => {
                    Ok((x.to_string(), t.to_string()))
                }
                _ => Err(Error::Parse(format!(
                    "{map_name} key `{key}` is not of the form `x|t`"
                ))),
            }
        };
        let mut legal = BTreeMap::new();
        for (key, data) in &self.rho {
            let (x, t) = split_key("rho", key)?;
            legal.insert((x, t), matrix_from_data(key, data)?);
        }
        let mut eve = BTreeMap::new();
        for (key, data) in &self.sigma {
            let (x, t) = split_key("sigma", key)?;
            eve.insert((x, t), matrix_from_data(key, data)?);
        }
        Ok(RawChannel {
            inputs: self.inputs.clone(),
            states: self.states.clone(),
            dim_legal: self.dim_legal,
            dim_eve: self.dim_eve,
            legal,
            eve,
        })
    }
}

/// Reads and JSON-parses a channel file (no semantic validation yet).
pub fn load_channel_file(path: &Path) -> Result<ChannelFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        Error::Parse(format!("{} (line {}, column {})", e, e.line(), e.column()))
    })
}

/// Loads, parses, and validates a channel file end to end.
pub fn load_channel(path: &Path) -> Result<CqavwcChannel> {
    let file = load_channel_file(path)?;
    validate_channel(&file.to_raw()?)
}

/// Envelope wrapped around every command's results.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport<T: Serialize> {
    pub command: String,
    pub tool_version: String,
    pub parameters: serde_json::Value,
    pub seeds: Vec<u64>,
    pub results: T,
}

impl<T: Serialize> RunReport<T> {
    fn new(command: &str, parameters: serde_json::Value, seeds: Vec<u64>, results: T) -> Self {
        RunReport {
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            parameters,
            seeds,
            results,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidatePayload {
    pub valid: bool,
    pub violations: Vec<Violation>,
    pub inputs: usize,
    pub states: usize,
}

/// Full invariant report for a channel file; `valid` mirrors the exit status.
pub fn cmd_validate(path: &Path) -> Result<RunReport<ValidatePayload>> {
    let file = load_channel_file(path)?;
    let raw = file.to_raw()?;
    let payload = match validate_channel(&raw) {
        Ok(ch) => ValidatePayload {
            valid: true,
            violations: Vec::new(),
            inputs: ch.inputs().len(),
            states: ch.states().len(),
        },
        Err(Error::ChannelInvalid(violations)) => ValidatePayload {
            valid: false,
            violations,
            inputs: raw.inputs.len(),
            states: raw.states.len(),
        },
        Err(other) => return Err(other),
    };
    Ok(RunReport::new(
        "validate",
        serde_json::json!({ "path": path.display().to_string() }),
        Vec::new(),
        payload,
    ))
}

/// Which symmetrizability reading to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SymmetrizeMode {
    Joint,
    PerState,
}

#[derive(Debug, Clone, Serialize)]
pub struct SymmetrizeRow {
    /// `"joint"` or `"t=<label>"`.
    pub scope: String,
    pub symmetrizable: bool,
    pub residual: f64,
    pub certificate: Option<crate::symmetrize::Symmetrizer>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SymmetrizePayload {
    pub mode: String,
    pub tol: f64,
    pub verdicts: Vec<SymmetrizeRow>,
}

fn verdict_row(scope: String, v: SymmetrizabilityVerdict) -> SymmetrizeRow {
    SymmetrizeRow {
        scope,
        symmetrizable: v.symmetrizable,
        residual: v.residual,
        certificate: v.certificate,
    }
}

/// Symmetrizability verdicts with certificates for the legal family.
pub fn cmd_symmetrize(
    path: &Path,
    mode: SymmetrizeMode,
    tol: f64,
) -> Result<RunReport<SymmetrizePayload>> {
    let ch = load_channel(path)?;
    let verdicts = match mode {
        SymmetrizeMode::Joint => {
            let family = StateFamily::from_channel(&ch, crate::channel::Receiver::Legal);
            vec![verdict_row("joint".into(), check_symmetrizable(&family, tol)?)]
        }
        SymmetrizeMode::PerState => {
            let report = channel_symmetrizability(&ch, tol)?;
            report
                .per_state
                .into_iter()
                .map(|(t, v)| verdict_row(format!("t={t}"), v))
                .collect()
        }
    };
    let payload = SymmetrizePayload {
        mode: match mode {
            SymmetrizeMode::Joint => "joint".into(),
            SymmetrizeMode::PerState => "per-t".into(),
        },
        tol,
        verdicts,
    };
    Ok(RunReport::new(
        "symmetrize",
        serde_json::json!({ "path": path.display().to_string(), "mode": payload.mode, "tol": tol }),
        Vec::new(),
        payload,
    ))
}

/// Which secrecy bound to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundMode {
    NoCsi,
    Csi,
}

/// Secrecy-rate lower bound evaluation.
pub fn cmd_bound(
    path: &Path,
    mode: BoundMode,
    n: usize,
    grid: GridConfig,
    caps: Caps,
) -> Result<RunReport<BoundReport>> {
    let ch = load_channel(path)?;
    let report = match mode {
        BoundMode::NoCsi => lower_bound_no_csi(&ch, &grid, n, &caps)?,
        BoundMode::Csi => lower_bound_csi(&ch, &grid, n, &caps)?,
    };
    Ok(RunReport::new(
        "bound",
        serde_json::json!({
            "path": path.display().to_string(),
            "mode": report.mode,
            "n": n,
            "grid_step": grid.step,
            "final_step": grid.final_step,
        }),
        Vec::new(),
        report,
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulatePayload {
    pub reports: Vec<SecrecyExperimentReport>,
}

/// Fixed CSV schema for simulation sweeps.
pub const CSV_HEADER: [&str; 7] = [
    "seed",
    "t_seq",
    "max_error",
    "leakage_bits",
    "covering_gap",
    "rate_message",
    "rate_total",
];

/// One CSV row per `(seed, t^n)`.
pub fn simulation_csv(reports: &[SecrecyExperimentReport]) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(CSV_HEADER).map_err(|e| Error::Parse(e.to_string()))?;
    for report in reports {
        for row in &report.per_t {
            writer
                .write_record(&[
                    report.seed.to_string(),
                    row.t_seq.clone(),
                    row.error.to_string(),
                    row.leakage_bits.to_string(),
                    row.covering_gap.to_string(),
                    report.rate_message.to_string(),
                    report.rate_total.to_string(),
                ])
                .map_err(|e| Error::Parse(e.to_string()))?;
        }
    }
    let bytes = writer.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

/// Runs one secrecy experiment per seed.
pub fn cmd_simulate(
    path: &Path,
    p: Option<&Distribution>,
    base: &ExperimentParams,
    seeds: &[u64],
) -> Result<RunReport<SimulatePayload>> {
    let ch = load_channel(path)?;
    let uniform;
    let p = match p {
        Some(p) => p,
        None => {
            uniform = Distribution::uniform(ch.inputs())?;
            &uniform
        }
    };
    let mut reports = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let params = ExperimentParams { seed, ..base.clone() };
        reports.push(run_secrecy_experiment(&ch, p, &params)?);
    }
    Ok(RunReport::new(
        "simulate",
        serde_json::json!({
            "path": path.display().to_string(),
            "n": base.n,
            "J": base.j_count,
            "L": base.l_count,
            "alpha": base.alpha,
            "delta": base.delta,
        }),
        seeds.to_vec(),
        SimulatePayload { reports },
    ))
}

/// Gentle-measurement, entropy-continuity, and projector-mass sweeps.
pub fn cmd_lemmas(trials: usize, dim: usize, seed: u64) -> Result<RunReport<LemmaSweepReport>> {
    let report = lemma_sweeps(trials, dim, seed)?;
    Ok(RunReport::new(
        "lemmas",
        serde_json::json!({ "trials": trials, "dim": dim }),
        vec![seed],
        report,
    ))
}

/// Process exit code for an error, per the documented convention:
/// 2 validation, 3 resource caps, 4 parse/read, 1 anything else.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Parse(_) | Error::Io(_) => 4,
        Error::ResourceCap { .. } => 3,
        Error::ChannelInvalid(_)
        | Error::NotHermitian { .. }
        | Error::BadTrace { .. }
        | Error::NotPsd { .. }
        | Error::NotSquare { .. }
        | Error::InvalidDistribution(_)
        | Error::UnknownLabel { .. } => 2,
        Error::Stage { source, .. } => exit_code_for(source),
        _ => 1,
    }
}
