//! Experiment configuration, loadable from JSON (the CLI mirrors every field
//! as a flag; flags override the file).

use serde::{Deserialize, Serialize};

use crate::adversary::{STRATEGY_APPENDIX_ATTACK, STRATEGY_HONEST, STRATEGY_INTERCEPT};
use crate::error::{Error, Result};
use crate::protocol::{Database, Scenario};

/// Where the database comes from: inline JSON, `builtin:appendix`, or a file
/// path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DatabaseSource {
    Inline(Database),
    Named(String),
}

impl DatabaseSource {
    pub fn resolve(&self) -> Result<Database> {
        match self {
            DatabaseSource::Inline(db) => Ok(db.clone()),
            DatabaseSource::Named(name) => {
                if let Some(builtin) = name.strip_prefix("builtin:") {
                    match builtin {
                        "appendix" => Ok(Database::builtin_appendix()),
                        other => Err(Error::InvalidConfig(format!(
                            "unknown builtin database `{other}`"
                        ))),
                    }
                } else {
                    let text = std::fs::read_to_string(name)?;
                    Ok(serde_json::from_str(&text)?)
                }
            }
        }
    }
}

/// Fixed query index or uniform over the queryable records.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuerySelection {
    All,
    Fixed(usize),
}

impl Serialize for QuerySelection {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            QuerySelection::All => s.serialize_str("all"),
            QuerySelection::Fixed(j) => s.serialize_u64(*j as u64),
        }
    }
}

impl<'de> Deserialize<'de> for QuerySelection {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Fixed(usize),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Fixed(j) => Ok(QuerySelection::Fixed(j)),
            Raw::Word(w) if w == "all" => Ok(QuerySelection::All),
            Raw::Word(w) => Err(serde::de::Error::custom(format!(
                "query selection must be an index or \"all\", got `{w}`"
            ))),
        }
    }
}

/// Fixed scenario or a fair coin per trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioSelection {
    Random,
    Fixed(Scenario),
}

impl Serialize for ScenarioSelection {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ScenarioSelection::Random => s.serialize_str("random"),
            ScenarioSelection::Fixed(scenario) => s.serialize_str(scenario.label()),
        }
    }
}

impl<'de> Deserialize<'de> for ScenarioSelection {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let word = String::deserialize(d)?;
        match word.as_str() {
            "random" => Ok(ScenarioSelection::Random),
            "a" => Ok(ScenarioSelection::Fixed(Scenario::PlainFirst)),
            "b" => Ok(ScenarioSelection::Fixed(Scenario::SuperposedFirst)),
            other => Err(serde::de::Error::custom(format!(
                "scenario must be a, b or random, got `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunMode {
    /// Analytic Born probabilities via branch enumeration; no sampling noise.
    Exact,
    /// Seeded Monte Carlo trials with per-trial substreams.
    Sampled,
}

fn default_parallel() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub db: DatabaseSource,
    pub strategy: String,
    #[serde(rename = "j")]
    pub query: QuerySelection,
    pub scenario: ScenarioSelection,
    pub trials: u64,
    pub seed: u64,
    pub mode: RunMode,
    /// Run sampled trials on a thread pool. Results are identical either way
    /// because every trial owns an independent substream.
    #[serde(default = "default_parallel")]
    pub parallel: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            db: DatabaseSource::Named("builtin:appendix".into()),
            strategy: STRATEGY_HONEST.into(),
            query: QuerySelection::All,
            scenario: ScenarioSelection::Random,
            trials: 1000,
            seed: 0,
            mode: RunMode::Exact,
            parallel: true,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        let known = [
            STRATEGY_HONEST,
            STRATEGY_INTERCEPT,
            STRATEGY_APPENDIX_ATTACK,
        ];
        if !known.contains(&self.strategy.as_str()) {
            return Err(Error::UnknownStrategy(self.strategy.clone()));
        }
        Ok(())
    }
}
