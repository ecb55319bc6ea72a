use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cqavwc::channel::Caps;
use cqavwc::cli::{
    cmd_bound, cmd_lemmas, cmd_simulate, cmd_symmetrize, cmd_validate, exit_code_for,
    simulation_csv, BoundMode, SymmetrizeMode,
};
use cqavwc::coding::{ExperimentParams, ProjectorSource};
use cqavwc::error::Result;
use cqavwc::infoquant::GridConfig;

/// Classical-quantum arbitrarily varying wiretap channel toolkit.
#[derive(Parser)]
#[command(name = "cqavwc", version, about)]
struct Cli {
    /// Write the JSON report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Cap on materialized Hilbert-space dimension `dim^n`.
    #[arg(long, global = true, default_value_t = 4096)]
    cap_dim: u128,

    /// Cap on enumerated input sequences `|X|^n`.
    #[arg(long, global = true, default_value_t = 4096)]
    cap_input_seq: u128,

    /// Cap on enumerated state sequences `|Theta|^n`.
    #[arg(long, global = true, default_value_t = 4096)]
    cap_state_seq: u128,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SymmetrizeModeArg {
    Joint,
    #[value(name = "per-t")]
    PerT,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundModeArg {
    #[value(name = "no-csi")]
    NoCsi,
    Csi,
}

#[derive(Subcommand)]
enum Command {
    /// Check every channel-file invariant; exit 0 iff the file is valid.
    Validate { path: PathBuf },
    /// Decide symmetrizability of the legal family and print certificates.
    Symmetrize {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "joint")]
        mode: SymmetrizeModeArg,
        #[arg(long, default_value_t = cqavwc::symmetrize::TOL_SYM)]
        tol: f64,
    },
    /// Evaluate a secrecy-rate lower bound with finite-n leakage proxies.
    Bound {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "no-csi")]
        mode: BoundModeArg,
        /// Block length of the leakage proxy.
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 1.0 / 32.0)]
        grid_step: f64,
        #[arg(long, default_value_t = 1.0 / 1024.0)]
        final_step: f64,
    },
    /// Run seeded random-code secrecy experiments.
    Simulate(SimulateArgs),
    /// Sweep the gentle-measurement, entropy-continuity, and projector-mass
    /// properties on random instances; exit nonzero on any violation.
    Lemmas {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct SimulateArgs {
    path: PathBuf,
    /// Block length.
    #[arg(long, default_value_t = 4)]
    n: usize,
    /// Message count.
    #[arg(long = "J", default_value_t = 2)]
    j_count: usize,
    /// Randomization indices per message.
    #[arg(long = "L", default_value_t = 2)]
    l_count: usize,
    /// Run seeds 0..k.
    #[arg(long, conflicts_with = "seed")]
    seeds: Option<u64>,
    /// Run a single seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Spectral window half-width (natural-log scale).
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// Typicality tolerance, also the decoder window width.
    #[arg(long, default_value_t = 0.25)]
    delta: f64,
    /// Write the per-(seed, t^n) sweep table to this CSV file.
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn emit(out: &Option<PathBuf>, report_json: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, report_json.as_bytes())?,
        None => println!("{report_json}"),
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<i32> {
    let caps = Caps {
        dim: cli.cap_dim,
        input_sequences: cli.cap_input_seq,
        state_sequences: cli.cap_state_seq,
    };
    match &cli.command {
        Command::Validate { path } => {
            let report = cmd_validate(path)?;
            let ok = report.results.valid;
            emit(&cli.out, &report.to_json())?;
            Ok(if ok { 0 } else { 2 })
        }
        Command::Symmetrize { path, mode, tol } => {
            let mode = match mode {
                SymmetrizeModeArg::Joint => SymmetrizeMode::Joint,
                SymmetrizeModeArg::PerT => SymmetrizeMode::PerState,
            };
            let report = cmd_symmetrize(path, mode, *tol)?;
            emit(&cli.out, &report.to_json())?;
            Ok(0)
        }
        Command::Bound { path, mode, n, grid_step, final_step } => {
            let mode = match mode {
                BoundModeArg::NoCsi => BoundMode::NoCsi,
                BoundModeArg::Csi => BoundMode::Csi,
            };
            let grid = GridConfig { step: *grid_step, final_step: *final_step };
            let report = cmd_bound(path, mode, *n, grid, caps)?;
            emit(&cli.out, &report.to_json())?;
            Ok(0)
        }
        Command::Simulate(args) => {
            let seeds: Vec<u64> = match (args.seeds, args.seed) {
                (Some(k), None) => (0..k).collect(),
                (None, Some(s)) => vec![s],
                (None, None) => vec![0],
                (Some(_), Some(_)) => unreachable!("clap conflict"),
            };
            let base = ExperimentParams {
                n: args.n,
                j_count: args.j_count,
                l_count: args.l_count,
                seed: 0,
                alpha: args.alpha,
                delta: args.delta,
                projector_source: ProjectorSource::Eve,
                caps,
            };
            let report = cmd_simulate(&args.path, None, &base, &seeds)?;
            if let Some(csv_path) = &args.csv {
                std::fs::write(csv_path, simulation_csv(&report.results.reports)?)?;
            }
            emit(&cli.out, &report.to_json())?;
            Ok(0)
        }
        Command::Lemmas { trials, dim, seed } => {
            let report = cmd_lemmas(*trials, *dim, *seed)?;
            let violations = report.results.total_violations();
            emit(&cli.out, &report.to_json())?;
            Ok(if violations == 0 { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    cqavwc::init_thread_pool_from_env();
    let cli = Cli::parse();
    let started = Instant::now();
    let code = match run(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            let mut source = std::error::Error::source(&err);
            while let Some(cause) = source {
                eprintln!("  caused by: {cause}");
                source = cause.source();
            }
            exit_code_for(&err)
        }
    };
    eprintln!("# wall-clock seconds: {:.3}", started.elapsed().as_secs_f64());
    ExitCode::from(code as u8)
}
