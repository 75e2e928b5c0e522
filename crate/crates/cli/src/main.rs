//! `qpq-lab`: command-line laboratory for private-query protocol
//! experiments, commitment attacks, and reduction demos.
//!
//! Exit codes: 0 success, 1 input error, 2 invariant violation detected
//! during a run.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{anyhow, Context};
use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use serde::Deserialize;
use serde_json::json;

use qpq_core::harness::{
    audit_requirements, run_experiment, DatabaseSource, ExperimentConfig, QuerySelection,
    RequirementList, RunMode, ScenarioSelection, StatsReport,
};
use qpq_core::nogo::{
    concealing_gap, delayed_choice_attack, ot_as_two_party, pair_index, spqpq_as_two_party,
    two_party_via_spqpq, CommitmentScheme, OtInstance,
};
use qpq_core::protocol::Database;
use qpq_core::quantum::{UnitaryOp, EPSILON_EQ};

#[derive(Parser)]
#[command(
    name = "qpq-lab",
    version,
    about = "Exact statevector laboratory for private queries and their no-go attacks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run private-query rounds against a Bob strategy and write a report.
    RunQpq {
        /// JSON config file mirroring the flags; explicit flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Database: a JSON file path or `builtin:appendix`.
        #[arg(long)]
        db: Option<String>,
        /// Bob's strategy: honest, intercept or appendix-attack.
        #[arg(long)]
        strategy: Option<String>,
        /// Queried record: an index or `all`.
        #[arg(long)]
        j: Option<String>,
        /// Scenario: a, b or random.
        #[arg(long)]
        scenario: Option<String>,
        /// Number of sampled trials (sampled mode only).
        #[arg(long)]
        trials: Option<u64>,
        /// Seed for the per-trial random substreams.
        #[arg(long)]
        seed: Option<u64>,
        /// exact (analytic Born probabilities) or sampled.
        #[arg(long)]
        mode: Option<String>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Open a commitment as either bit via the delayed-choice conversion.
    QbcAttack {
        /// Scheme: a JSON file path or `builtin:bell`.
        #[arg(long)]
        scheme: String,
        /// Bit committed to.
        #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
        commit: u8,
        /// Bit opened as.
        #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
        open: u8,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reduction adapters between databases, two-party functions and
    /// oblivious transfer.
    Reduce {
        /// Check database -> function -> database reconstruction.
        #[arg(long, requires = "db")]
        check_roundtrip: bool,
        /// Database JSON file (or `builtin:appendix`) for the round trip.
        #[arg(long)]
        db: Option<String>,
        /// Evaluate oblivious transfer as a two-party function: m0 m1 k.
        #[arg(long, num_args = 3, value_names = ["M0", "M1", "K"], conflicts_with = "check_roundtrip")]
        oot: Option<Vec<u64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Audit a stored exact-mode report against a requirement list.
    Audit {
        /// Report JSON written by run-qpq.
        #[arg(long)]
        report: PathBuf,
        /// Requirement list: pqpq or spqpq.
        #[arg(long)]
        list: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum AppError {
    /// Bad input: unknown flags, malformed files, invalid configs.
    Input(anyhow::Error),
    /// A runtime invariant was violated (broken unitarity, fidelity miss,
    /// failed round trip).
    Invariant(anyhow::Error),
}

impl From<qpq_core::Error> for AppError {
    fn from(e: qpq_core::Error) -> Self {
        if e.is_invariant_violation() {
            AppError::Invariant(anyhow!(e))
        } else {
            AppError::Input(anyhow!(e))
        }
    }
}

impl From<anyhow::Error> for AppError {
    fn from(e: anyhow::Error) -> Self {
        AppError::Input(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(AppError::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(AppError::Invariant(e)) => {
            eprintln!("invariant violation: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::RunQpq {
            config,
            db,
            strategy,
            j,
            scenario,
            trials,
            seed,
            mode,
            out,
        } => {
            let config = build_config(config, db, strategy, j, scenario, trials, seed, mode)?;
            let report = run_experiment(&config)?;
            emit(report.to_json_string(), out)?;
            Ok(())
        }
        Command::QbcAttack {
            scheme,
            commit,
            open,
            out,
        } => {
            let scheme = load_scheme(&scheme)?;
            let result = match delayed_choice_attack(&scheme, commit, open, EPSILON_EQ) {
                Ok(attack) => json!({
                    "schema_version": 1,
                    "command": "qbc-attack",
                    "commit": commit,
                    "open": open,
                    "committer_registers": scheme.committer_registers(),
                    "concealing_gap": attack.concealing_gap,
                    "status": "converted",
                    "opening_fidelity": attack.opening_fidelity,
                    "unitary": unitary_json(&attack.unitary),
                }),
                Err(qpq_core::Error::ReducedStatesDiffer { gap, tolerance }) => json!({
                    "schema_version": 1,
                    "command": "qbc-attack",
                    "commit": commit,
                    "open": open,
                    "committer_registers": scheme.committer_registers(),
                    "concealing_gap": gap,
                    "status": "not-concealing",
                    "tolerance": tolerance,
                }),
                Err(e) => return Err(e.into()),
            };
            debug_assert!(
                (result["concealing_gap"].as_f64().unwrap() - concealing_gap(&scheme)?).abs()
                    < 1e-12
            );
            emit(pretty(&result), out)?;
            Ok(())
        }
        Command::Reduce {
            check_roundtrip,
            db,
            oot,
            out,
        } => match (check_roundtrip, oot) {
            (true, None) => {
                let source = db.expect("clap enforces --db with --check-roundtrip");
                let database = load_database(&source)?;
                let function = spqpq_as_two_party(&database)?;
                let encoding = two_party_via_spqpq(&function)?;
                let roundtrip_ok = encoding.database == database
                    && encoding
                        .to_function()
                        .map(|f| f == function)
                        .unwrap_or(false);
                let result = json!({
                    "schema_version": 1,
                    "command": "reduce-roundtrip",
                    "roundtrip_ok": roundtrip_ok,
                    "function": serde_json::to_value(&function).map_err(qpq_core::Error::from)?,
                    "reconstructed": serde_json::to_value(&encoding.database)
                        .map_err(qpq_core::Error::from)?,
                });
                emit(pretty(&result), out)?;
                if roundtrip_ok {
                    Ok(())
                } else {
                    Err(AppError::Invariant(anyhow!(
                        "database round trip did not reconstruct the input"
                    )))
                }
            }
            (false, Some(values)) => {
                let (m0, m1, k) = (values[0], values[1], values[2]);
                if k > 1 {
                    return Err(AppError::Input(anyhow!("choice bit must be 0 or 1")));
                }
                let instance = OtInstance::new(m0, m1, k as u8)?;
                let alphabet = m0.max(m1) + 1;
                let (_, evaluation) = ot_as_two_party(&instance, alphabet)?;
                let result = json!({
                    "schema_version": 1,
                    "command": "reduce-oot",
                    "m0": m0,
                    "m1": m1,
                    "k": k,
                    "alphabet": alphabet,
                    "pair_index": pair_index(m0, m1, alphabet),
                    "evaluation": evaluation,
                });
                emit(pretty(&result), out)?;
                Ok(())
            }
            _ => Err(AppError::Input(anyhow!(
                "reduce needs exactly one of --check-roundtrip or --oot"
            ))),
        },
        Command::Audit { report, list, out } => {
            let text = std::fs::read_to_string(&report)
                .with_context(|| format!("reading report {}", report.display()))?;
            let report: StatsReport = serde_json::from_str(&text).map_err(qpq_core::Error::from)?;
            let which = RequirementList::from_str(&list)?;
            let verdicts = audit_requirements(&report, which)?;
            let result = json!({
                "schema_version": 1,
                "command": "audit",
                "list": list,
                "strategy": report.config.strategy,
                "verdicts": serde_json::to_value(&verdicts).map_err(qpq_core::Error::from)?,
            });
            emit(pretty(&result), out)?;
            Ok(())
        }
    }
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    db: Option<DatabaseSource>,
    strategy: Option<String>,
    j: Option<QuerySelection>,
    scenario: Option<ScenarioSelection>,
    trials: Option<u64>,
    seed: Option<u64>,
    mode: Option<RunMode>,
    parallel: Option<bool>,
}

#[allow(clippy::too_many_arguments)]
fn build_config(
    config: Option<PathBuf>,
    db: Option<String>,
    strategy: Option<String>,
    j: Option<String>,
    scenario: Option<String>,
    trials: Option<u64>,
    seed: Option<u64>,
    mode: Option<String>,
) -> Result<ExperimentConfig, AppError> {
    let file: ConfigFile = match config {
        Some(path) => {
            let text = std::fs::read_to_string(&path)
                .with_context(|| format!("reading config {}", path.display()))?;
            serde_json::from_str(&text).map_err(qpq_core::Error::from)?
        }
        None => ConfigFile::default(),
    };
    let defaults = ExperimentConfig::default();

    let query = match j {
        Some(word) if word == "all" => QuerySelection::All,
        Some(word) => QuerySelection::Fixed(
            word.parse::<usize>()
                .map_err(|_| anyhow!("--j must be an index or `all`, got `{word}`"))?,
        ),
        None => file.j.unwrap_or(defaults.query),
    };
    let scenario = match scenario.as_deref() {
        Some("a") => ScenarioSelection::Fixed(qpq_core::protocol::Scenario::PlainFirst),
        Some("b") => ScenarioSelection::Fixed(qpq_core::protocol::Scenario::SuperposedFirst),
        Some("random") => ScenarioSelection::Random,
        Some(other) => {
            return Err(AppError::Input(anyhow!(
                "--scenario must be a, b or random, got `{other}`"
            )))
        }
        None => file.scenario.unwrap_or(defaults.scenario),
    };
    let mode = match mode.as_deref() {
        Some("exact") => RunMode::Exact,
        Some("sampled") => RunMode::Sampled,
        Some(other) => {
            return Err(AppError::Input(anyhow!(
                "--mode must be exact or sampled, got `{other}`"
            )))
        }
        None => file.mode.unwrap_or(defaults.mode),
    };

    Ok(ExperimentConfig {
        db: db
            .map(DatabaseSource::Named)
            .or(file.db)
            .unwrap_or(defaults.db),
        strategy: strategy.or(file.strategy).unwrap_or(defaults.strategy),
        query,
        scenario,
        trials: trials.or(file.trials).unwrap_or(defaults.trials),
        seed: seed.or(file.seed).unwrap_or(defaults.seed),
        mode,
        parallel: file.parallel.unwrap_or(defaults.parallel),
    })
}

fn load_database(source: &str) -> Result<Database, AppError> {
    Ok(DatabaseSource::Named(source.to_string()).resolve()?)
}

fn load_scheme(source: &str) -> Result<CommitmentScheme, AppError> {
    if let Some(builtin) = source.strip_prefix("builtin:") {
        return match builtin {
            "bell" => Ok(CommitmentScheme::builtin_bell()),
            other => Err(AppError::Input(anyhow!("unknown builtin scheme `{other}`"))),
        };
    }
    let text =
        std::fs::read_to_string(source).with_context(|| format!("reading scheme {source}"))?;
    Ok(serde_json::from_str::<CommitmentScheme>(&text).map_err(qpq_core::Error::from)?)
}

fn unitary_json(unitary: &UnitaryOp) -> serde_json::Value {
    let m = unitary.matrix();
    let rows: Vec<Vec<(f64, f64)>> = (0..m.nrows())
        .map(|r| {
            (0..m.ncols())
                .map(|c| (m[(r, c)].re, m[(r, c)].im))
                .collect()
        })
        .collect();
    json!({
        "targets": unitary.targets(),
        "matrix": rows,
    })
}

fn pretty(value: &serde_json::Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("json serializes");
    text.push('\n');
    text
}

fn emit(text: String, out: Option<PathBuf>) -> Result<(), AppError> {
    match out {
        Some(path) => {
            std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        }
        None => print!("{text}"),
    }
    Ok(())
}
