//! Command-line front end over the library pipeline.
//!
//! Every subcommand first obtains a fitness matrix, either built from the
//! game class (`--mode exact|mc`, `--N`, `--seed`, `--workers`) or loaded
//! from a JSON/CSV file (`--input`), then runs one analysis on it. Output
//! goes to stdout or `--output`. Exit codes: 0 success, 1 runtime failure,
//! 2 usage error.

use crate::choice::PlayerType;
use crate::dynamics::{
    mutation_kernel, run_dynamics, sample_initial_states, DynamicsError, MutationKernel,
    PopulationState,
};
use crate::games::GameClassConfig;
use crate::metagame::{
    build_metagame_exact, build_metagame_mc, correlated_pref_metagame, find_regret_threshold,
    uncorrelated_pref_metagame, MetaGame, MetagameError,
};
use crate::stability::{
    ess_set_with_tolerance, stability_report, StabilityError, StabilityReport,
    DEFAULT_TIE_TOLERANCE,
};
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::ffi::OsString;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Metagame(#[from] MetagameError),
    #[error(transparent)]
    Stability(#[from] StabilityError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "metagames",
    version,
    about = "Fitness matrices over random 2x2 games, ESS reports, and population dynamics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build or load the fitness matrix and print it.
    Metagame(MetagameCmd),
    /// ESS and neutral-stability report for every type of the matrix.
    Stability(StabilityCmd),
    /// Four-preference matrix obtained by mixing the two epistemic attitudes.
    Derive(DeriveCmd),
    /// Smallest grid weight on the full-simplex attitude making the regret
    /// preference the unique ESS of the derived matrix.
    Threshold(ThresholdCmd),
    /// Iterate replicator(-mutator) dynamics on the matrix.
    Dynamics(DynamicsCmd),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BuildMode {
    /// Average over all (N+1)^4 payoff matrices.
    Exact,
    /// Average over seeded Monte Carlo draws.
    Mc,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Args)]
struct BuildArgs {
    /// Payoff entries are integers 0..=N.
    #[arg(long = "N", default_value_t = 10)]
    max_payoff: u32,
    #[arg(long, value_enum, default_value = "exact")]
    mode: BuildMode,
    /// Number of games drawn in mc mode.
    #[arg(long, default_value_t = 50_000)]
    sample_count: u64,
    /// Master seed; drives game draws and random initial states.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads for the matrix build.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Load the matrix from a JSON or CSV file instead of building it.
    #[arg(long)]
    input: Option<PathBuf>,
}

impl BuildArgs {
    fn matrix(&self) -> Result<MetaGame, CliError> {
        if let Some(path) = &self.input {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            let meta = if text.trim_start().starts_with('{') {
                MetaGame::from_json(&text)?
            } else {
                MetaGame::from_csv(&text)?
            };
            return Ok(meta);
        }
        let types = PlayerType::all();
        let meta = match self.mode {
            BuildMode::Exact => build_metagame_exact(&types, self.max_payoff, self.workers)?,
            BuildMode::Mc => {
                let config = GameClassConfig {
                    max_payoff: self.max_payoff,
                    sample_count: self.sample_count,
                    seed: self.seed,
                };
                build_metagame_mc(&types, &config, self.workers)?
            }
        };
        Ok(meta)
    }
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value = "json")]
    format: OutputFormat,
    /// Write here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct MetagameCmd {
    #[command(flatten)]
    build: BuildArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct StabilityCmd {
    #[command(flatten)]
    build: BuildArgs,
    /// Tie tolerance for the ESS comparisons.
    #[arg(long, default_value_t = DEFAULT_TIE_TOLERANCE)]
    eta: f64,
    /// Write here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
#[command(group(ArgGroup::new("mix").required(true)))]
struct DeriveCmd {
    #[command(flatten)]
    build: BuildArgs,
    /// Independent per-player probability of the full-simplex attitude.
    #[arg(long, group = "mix")]
    p: Option<f64>,
    /// Probability that the two players share the full-simplex attitude.
    #[arg(long, group = "mix")]
    q: Option<f64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct ThresholdCmd {
    #[command(flatten)]
    build: BuildArgs,
    /// Resolution of the scanned weight grid.
    #[arg(long, default_value_t = 0.001)]
    grid_step: f64,
    /// Write here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct DynamicsCmd {
    #[command(flatten)]
    build: BuildArgs,
    /// Mutation rate; 0 runs plain replicator dynamics.
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    /// Initial state: uniform | vertex:K | random | comma-separated weights.
    #[arg(long, default_value = "random")]
    init: String,
    /// Number of runs; more than one requires --init random.
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Stop once the L1 step size drops below this.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long, default_value_t = 1_000_000)]
    max_iter: u64,
    /// Keep every K-th iteration in trajectory output.
    #[arg(long, default_value_t = 1)]
    record_every: u64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Serialize)]
struct StabilityOutput {
    labels: Vec<String>,
    eta: f64,
    ess: Vec<String>,
    reports: Vec<StabilityReport>,
}

#[derive(Serialize)]
struct ThresholdOutput {
    grid_step: f64,
    threshold: f64,
    /// False when no grid point qualifies; threshold then exceeds 1.
    attained: bool,
}

#[derive(Serialize)]
struct RunSummary {
    labels: Vec<String>,
    state: Vec<f64>,
    converged: bool,
    iterations: u64,
}

/// Parses and runs one invocation; never exits the process.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Metagame(cmd) => {
            let meta = cmd.build.matrix()?;
            emit(
                &render_matrix(&meta, cmd.out.format),
                cmd.out.output.as_deref(),
            )
        }
        Command::Stability(cmd) => {
            let meta = cmd.build.matrix()?;
            let ess = ess_set_with_tolerance(meta.fitness(), cmd.eta)?;
            let reports = (0..meta.len())
                .map(|i| stability_report(meta.fitness(), i, cmd.eta))
                .collect::<Result<Vec<_>, _>>()?;
            let output = StabilityOutput {
                labels: meta.labels().to_vec(),
                eta: cmd.eta,
                ess: ess.into_iter().map(|i| meta.labels()[i].clone()).collect(),
                reports,
            };
            emit(&to_json(&output), cmd.output.as_deref())
        }
        Command::Derive(cmd) => {
            let meta = cmd.build.matrix()?;
            let derived = match (cmd.p, cmd.q) {
                (Some(p), None) => uncorrelated_pref_metagame(&meta, p)?,
                (None, Some(q)) => correlated_pref_metagame(&meta, q)?,
                _ => return Err(CliError::Usage("pass exactly one of --p or --q".into())),
            };
            emit(
                &render_matrix(&derived, cmd.out.format),
                cmd.out.output.as_deref(),
            )
        }
        Command::Threshold(cmd) => {
            let meta = cmd.build.matrix()?;
            let threshold = find_regret_threshold(&meta, cmd.grid_step)?;
            let output = ThresholdOutput {
                grid_step: cmd.grid_step,
                threshold,
                attained: threshold <= 1.0,
            };
            emit(&to_json(&output), cmd.output.as_deref())
        }
        Command::Dynamics(cmd) => run_dynamics_cmd(cmd),
    }
}

fn run_dynamics_cmd(cmd: DynamicsCmd) -> Result<(), CliError> {
    let meta = cmd.build.matrix()?;
    let kernel = if cmd.eps == 0.0 {
        None
    } else {
        Some(kernel_for(&meta, cmd.eps)?)
    };
    let starts = initial_states(&cmd.init, meta.len(), cmd.count, cmd.build.seed)?;
    let runs = starts
        .iter()
        .map(|x0| {
            run_dynamics(
                &meta,
                kernel.as_ref(),
                x0,
                cmd.tol,
                cmd.max_iter,
                cmd.record_every,
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    let text = match (cmd.out.format, runs.len()) {
        (OutputFormat::Csv, 1) => runs[0].to_csv(meta.labels()),
        (OutputFormat::Csv, _) => {
            return Err(CliError::Usage(
                "csv trajectory output supports a single run; use --format json".into(),
            ))
        }
        (OutputFormat::Json, 1) => to_json(&summary(&meta, &runs[0])),
        (OutputFormat::Json, _) => {
            let summaries: Vec<RunSummary> = runs.iter().map(|r| summary(&meta, r)).collect();
            to_json(&summaries)
        }
    };
    emit(&text, cmd.out.output.as_deref())
}

fn summary(meta: &MetaGame, run: &crate::dynamics::Trajectory) -> RunSummary {
    RunSummary {
        labels: meta.labels().to_vec(),
        state: run.final_state().frequencies().to_vec(),
        converged: run.converged(),
        iterations: run.iterations(),
    }
}

/// Mutation kernel over the matrix's own types; requires the labels to name
/// the eight canonical types.
fn kernel_for(meta: &MetaGame, eps: f64) -> Result<MutationKernel, CliError> {
    let types = meta
        .labels()
        .iter()
        .map(|label| label.parse::<PlayerType>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| {
            CliError::Usage(
                "mutation requires the eight-type matrix; a label is not of the form \
                 <pref>-<epistemic>"
                    .into(),
            )
        })?;
    Ok(mutation_kernel(&types, eps)?)
}

fn initial_states(
    init: &str,
    dim: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<PopulationState>, CliError> {
    if count == 0 {
        return Err(CliError::Usage("--count must be at least 1".into()));
    }
    if count > 1 && init != "random" {
        return Err(CliError::Usage(
            "--count above 1 requires --init random".into(),
        ));
    }
    if init == "random" {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        return Ok(sample_initial_states(&mut rng, count, dim)?);
    }
    let state = if init == "uniform" {
        PopulationState::uniform(dim)?
    } else if let Some(idx) = init.strip_prefix("vertex:") {
        let index: usize = idx
            .parse()
            .map_err(|_| CliError::Usage(format!("bad vertex index {idx:?}")))?;
        PopulationState::vertex(dim, index)?
    } else {
        explicit_state(init, dim)?
    };
    Ok(vec![state])
}

fn explicit_state(init: &str, dim: usize) -> Result<PopulationState, CliError> {
    let weights = init
        .split(',')
        .map(|piece| piece.trim().parse::<f64>())
        .collect::<Result<Vec<f64>, _>>()
        .map_err(|_| {
            CliError::Usage(format!(
                "--init must be uniform, vertex:K, random, or {dim} comma-separated numbers"
            ))
        })?;
    if weights.len() != dim {
        return Err(CliError::Usage(format!(
            "initial state has {} entries, matrix has {dim} types",
            weights.len()
        )));
    }
    let sum: f64 = weights.iter().sum();
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) || sum <= 0.0 {
        return Err(CliError::Usage(
            "initial weights must be non-negative with a positive sum".into(),
        ));
    }
    Ok(PopulationState::new(
        weights.iter().map(|w| w / sum).collect(),
    )?)
}

fn render_matrix(meta: &MetaGame, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => meta.to_json(),
        OutputFormat::Csv => meta.to_csv(),
    }
}

fn to_json<S: Serialize>(value: &S) -> String {
    serde_json::to_string_pretty(value).expect("output types serialize")
}

fn emit(text: &str, path: Option<&std::path::Path>) -> Result<(), CliError> {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match path {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_state_keywords() {
        let states = initial_states("uniform", 4, 1, 0).unwrap();
        assert_eq!(states[0].frequencies(), [0.25; 4]);
        let states = initial_states("vertex:2", 4, 1, 0).unwrap();
        assert_eq!(states[0].frequencies(), [0.0, 0.0, 1.0, 0.0]);
        let states = initial_states("random", 4, 3, 9).unwrap();
        assert_eq!(states.len(), 3);
        assert_eq!(states, initial_states("random", 4, 3, 9).unwrap());
        assert_ne!(states, initial_states("random", 4, 3, 10).unwrap());
    }

    #[test]
    fn initial_state_explicit_list_is_normalized() {
        let states = initial_states("1, 1, 2", 3, 1, 0).unwrap();
        assert_eq!(states[0].frequencies(), [0.25, 0.25, 0.5]);
    }

    #[test]
    fn initial_state_rejections() {
        assert!(matches!(
            initial_states("uniform", 4, 2, 0),
            Err(CliError::Usage(_))
        ));
        assert!(matches!(
            initial_states("uniform", 4, 0, 0),
            Err(CliError::Usage(_))
        ));
        assert!(matches!(
            initial_states("vertex:9", 4, 1, 0),
            Err(CliError::Dynamics(_))
        ));
        assert!(matches!(
            initial_states("vertex:x", 4, 1, 0),
            Err(CliError::Usage(_))
        ));
        assert!(matches!(
            initial_states("0.5,0.5", 3, 1, 0),
            Err(CliError::Usage(_))
        ));
        assert!(matches!(
            initial_states("0.5,abc,0.2", 3, 1, 0),
            Err(CliError::Usage(_))
        ));
        assert!(matches!(
            initial_states("-1,2,0", 3, 1, 0),
            Err(CliError::Usage(_))
        ));
    }

    #[test]
    fn kernel_requires_canonical_type_labels() {
        let meta = MetaGame::new(
            vec!["a".into(), "b".into()],
            vec![vec![1.0, 1.0], vec![1.0, 1.0]],
        )
        .unwrap();
        assert!(matches!(kernel_for(&meta, 0.1), Err(CliError::Usage(_))));
    }

    #[test]
    fn exit_codes_for_parse_outcomes() {
        assert_eq!(run_cli(["metagames", "--help"]), 0);
        assert_eq!(run_cli(["metagames", "no-such-command"]), 2);
        assert_eq!(run_cli(["metagames", "metagame", "--bogus"]), 2);
        assert_eq!(
            run_cli(["metagames", "metagame", "--input", "/no/such/file.json"]),
            1
        );
    }

    #[test]
    fn derive_requires_exactly_one_mixing_flag() {
        assert_eq!(run_cli(["metagames", "derive", "--N", "1"]), 2);
        assert_eq!(
            run_cli([
                "metagames",
                "derive",
                "--N",
                "1",
                "--p",
                "0.5",
                "--q",
                "0.5"
            ]),
            2
        );
    }
}
