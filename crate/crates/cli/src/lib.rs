//! Batch front end: loads JSON inputs, dispatches to `persuasion-core`, and
//! renders deterministic JSON or CSV reports.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use persuasion_core::campaign::{verify_theorem, write_campaign_csv, CampaignConfig};
use persuasion_core::model::{canonicalize, AmbiguousExperiment, GameSpec, Matrix, ReceiverStrategy, StatisticalExperiment};
use persuasion_core::obedience::{ambiguous_obedience, k_star, statistical_obedience};
use persuasion_core::sender::{
    ambiguous_sender_value, gain_search_with, optimal_statistical_value, write_trial_csv, GainSearchOptions,
};

pub const THREADS_ENV: &str = "PERSUASION_LAB_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    TheoremViolation(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::TheoremViolation(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

impl From<persuasion_core::Error> for CliError {
    fn from(e: persuasion_core::Error) -> Self {
        use persuasion_core::Error as E;
        match e {
            E::TheoremViolation(_) => CliError::TheoremViolation(e.to_string()),
            E::Internal(_) | E::Lp(_) => CliError::Internal(e.to_string()),
            E::NonCanonical(_) => CliError::Data(format!(
                "{e}; run `persuasion-lab canonicalize --experiment FILE --strategy FILE` first"
            )),
            _ => CliError::Data(e.to_string()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "persuasion-lab", version, about = "Maxmin persuasion games: solve, certify, verify")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal statistical experiment and its maxmin sender value.
    Solve(CommonArgs),
    /// Obedience certificate for an experiment file.
    CheckObedience(CommonArgs),
    /// Seeded campaign for the two-by-two no-gain construction.
    VerifyTheorem(CommonArgs),
    /// Randomized search for a sender gain from ambiguous experiments.
    SearchGain(CommonArgs),
    /// Push an experiment through a receiver strategy.
    Canonicalize(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Game JSON file.
    #[arg(long)]
    pub game: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Trial count for campaign commands.
    #[arg(long, default_value_t = 1000)]
    pub budget: u64,
    #[arg(long, default_value_t = 1e-3)]
    pub resolution: f64,
    /// Report path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Experiment JSON file: {"messages": [...], "generators": [kernel, ...]}.
    #[arg(long)]
    pub experiment: Option<PathBuf>,
    /// Receiver strategy JSON file: {"kernel": [[...]]}.
    #[arg(long)]
    pub strategy: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommandKind {
    Solve,
    CheckObedience,
    VerifyTheorem,
    SearchGain,
    Canonicalize,
}

/// Validated run description.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub game_path: Option<PathBuf>,
    pub seed: u64,
    pub budget: u64,
    pub resolution: f64,
    pub output_path: Option<PathBuf>,
    pub format: Format,
    pub experiment_path: Option<PathBuf>,
    pub strategy_path: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self, CliError> {
        let (command, args) = match cli.command {
            Command::Solve(a) => (CommandKind::Solve, a),
            Command::CheckObedience(a) => (CommandKind::CheckObedience, a),
            Command::VerifyTheorem(a) => (CommandKind::VerifyTheorem, a),
            Command::SearchGain(a) => (CommandKind::SearchGain, a),
            Command::Canonicalize(a) => (CommandKind::Canonicalize, a),
        };
        let config = RunConfig {
            command,
            game_path: args.game,
            seed: args.seed,
            budget: args.budget,
            resolution: args.resolution,
            output_path: args.out,
            format: args.format,
            experiment_path: args.experiment,
            strategy_path: args.strategy,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.resolution > 0.0 && self.resolution <= 0.5) {
            return Err(CliError::Usage(format!("--resolution {} is not in (0, 0.5]", self.resolution)));
        }
        let empty = |p: &Option<PathBuf>| p.as_ref().is_some_and(|p| p.as_os_str().is_empty());
        if [&self.game_path, &self.output_path, &self.experiment_path, &self.strategy_path]
            .into_iter()
            .any(empty)
        {
            return Err(CliError::Usage("file paths must be nonempty".into()));
        }
        let need = |flag: &str, p: &Option<PathBuf>| match p {
            Some(_) => Ok(()),
            None => Err(CliError::Usage(format!("{} needs --{flag}", self.command_name()))),
        };
        match self.command {
            CommandKind::Solve | CommandKind::SearchGain => need("game", &self.game_path)?,
            CommandKind::CheckObedience => {
                need("game", &self.game_path)?;
                need("experiment", &self.experiment_path)?;
            }
            CommandKind::Canonicalize => {
                need("game", &self.game_path)?;
                need("experiment", &self.experiment_path)?;
                need("strategy", &self.strategy_path)?;
            }
            CommandKind::VerifyTheorem => {}
        }
        let csv_ok = matches!(self.command, CommandKind::VerifyTheorem | CommandKind::SearchGain);
        if self.format == Format::Csv && !csv_ok {
            return Err(CliError::Usage(format!(
                "{} only writes json; csv is for verify-theorem and search-gain",
                self.command_name()
            )));
        }
        Ok(())
    }

    fn command_name(&self) -> &'static str {
        match self.command {
            CommandKind::Solve => "solve",
            CommandKind::CheckObedience => "check-obedience",
            CommandKind::VerifyTheorem => "verify-theorem",
            CommandKind::SearchGain => "search-gain",
            CommandKind::Canonicalize => "canonicalize",
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn in_file(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

/// Parses and validates a game file; errors name the offending field.
pub fn load_game(path: &Path) -> Result<GameSpec, CliError> {
    GameSpec::from_json_str(&read(path)?).map_err(|e| in_file(path, e))
}

/// On-disk form of a (possibly ambiguous) experiment.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    pub messages: Vec<String>,
    /// One `(state, message)` kernel per generator.
    pub generators: Vec<Matrix>,
}

impl ExperimentFile {
    pub fn from_experiment(set: &AmbiguousExperiment) -> Self {
        ExperimentFile {
            messages: set.messages().to_vec(),
            generators: set.generators().iter().map(|g| g.kernel().clone()).collect(),
        }
    }

    pub fn into_experiment(self) -> persuasion_core::Result<AmbiguousExperiment> {
        let generators = self
            .generators
            .into_iter()
            .map(|k| StatisticalExperiment::new(self.messages.clone(), k))
            .collect::<persuasion_core::Result<_>>()?;
        AmbiguousExperiment::new(generators)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyFile {
    /// `(message, action)` kernel.
    pub kernel: Matrix,
}

pub fn load_experiment(path: &Path) -> Result<AmbiguousExperiment, CliError> {
    let file: ExperimentFile = serde_json::from_str(&read(path)?).map_err(|e| in_file(path, e))?;
    file.into_experiment().map_err(|e| in_file(path, e))
}

pub fn load_strategy(path: &Path) -> Result<ReceiverStrategy, CliError> {
    let file: StrategyFile = serde_json::from_str(&read(path)?).map_err(|e| in_file(path, e))?;
    ReceiverStrategy::new(file.kernel).map_err(|e| in_file(path, e))
}

/// Report text plus the exit status it implies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub report: String,
    pub exit_code: u8,
}

fn json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn csv_text(write: impl FnOnce(&mut Vec<u8>) -> persuasion_core::Result<()>) -> Result<String, CliError> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    String::from_utf8(buf).map_err(|e| CliError::Internal(e.to_string()))
}

#[derive(Serialize)]
struct ObedienceReport {
    generators: usize,
    obedient: bool,
    /// Minimizing face of the receiver's payoff over (prior vertex, generator) pairs.
    k_star: persuasion_core::obedience::KStarFace,
    witness: Option<persuasion_core::obedience::ObedienceWitness>,
    /// Saddle-point verdict for each generator on its own.
    generator_obedient: Vec<bool>,
    sender_value: Option<f64>,
}

/// Runs the command and renders its report; writing it is left to [`emit`].
pub fn run(config: &RunConfig) -> Result<Outcome, CliError> {
    config.validate()?;
    let game = config.game_path.as_deref().map(load_game).transpose()?;
    let ok = |report| Ok(Outcome { report, exit_code: 0 });
    match config.command {
        CommandKind::Solve => {
            let game = game.expect("validated");
            ok(json(&optimal_statistical_value(&game, config.resolution)?)?)
        }
        CommandKind::CheckObedience => {
            let game = game.expect("validated");
            let set = load_experiment(config.experiment_path.as_deref().expect("validated"))?;
            set.require_canonical(&game)?;
            let witness = ambiguous_obedience(&set, &game)?;
            let generator_obedient = set
                .generators()
                .iter()
                .map(|g| statistical_obedience(g, &game).map(|w| w.is_some()))
                .collect::<persuasion_core::Result<_>>()?;
            ok(json(&ObedienceReport {
                generators: set.generators().len(),
                obedient: witness.is_some(),
                k_star: k_star(&set, &game)?,
                witness,
                generator_obedient,
                sender_value: ambiguous_sender_value(&set, &game)?,
            })?)
        }
        CommandKind::Canonicalize => {
            let game = game.expect("validated");
            let set = load_experiment(config.experiment_path.as_deref().expect("validated"))?;
            let tau = load_strategy(config.strategy_path.as_deref().expect("validated"))?;
            ok(json(&ExperimentFile::from_experiment(&canonicalize(&set, &tau, &game)?))?)
        }
        CommandKind::VerifyTheorem => {
            let mut campaign = CampaignConfig::new(config.budget, config.seed);
            campaign.game = game;
            let result = verify_theorem(&campaign)?;
            let report = match config.format {
                Format::Json => json(&result.report)?,
                Format::Csv => csv_text(|buf| write_campaign_csv(&result.records, buf))?,
            };
            let exit_code = if result.report.violations > 0 { 3 } else { 0 };
            Ok(Outcome { report, exit_code })
        }
        CommandKind::SearchGain => {
            let game = game.expect("validated");
            let options = GainSearchOptions {
                resolution: config.resolution,
                ..GainSearchOptions::default()
            };
            let result = gain_search_with(&game, config.budget, config.seed, &options)?;
            match config.format {
                Format::Json => ok(json(&result.report)?),
                Format::Csv => ok(csv_text(|buf| write_trial_csv(&result.records, buf))?),
            }
        }
    }
}

/// Writes the report to `--out` or standard output.
pub fn emit(config: &RunConfig, outcome: &Outcome) -> Result<(), CliError> {
    match &config.output_path {
        Some(path) => fs::write(path, &outcome.report).map_err(|e| in_file(path, e)),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(outcome.report.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Data(format!("stdout: {e}")))
        }
    }
}

/// Caps the global thread pool from the environment, if set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV}={raw} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Internal(e.to_string()))
}
