//! Report schema for experiment runs and requirement audits.
//!
//! Reports are plain data with ordered maps throughout, so serialization is
//! byte-deterministic for a fixed config.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, RunMode};
use crate::protocol::{Database, Scenario};
use crate::quantum::DensityMatrix;

pub const SCHEMA_VERSION: u32 = 1;

/// z for a 95% Wilson score interval.
pub const WILSON_Z95: f64 = 1.959963984540054;

/// Wilson score interval for `successes` out of `trials` at confidence
/// parameter `z`. Behaves correctly at rates 0 and 1.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    assert!(trials > 0, "wilson interval needs at least one trial");
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denominator = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denominator;
    let half = z / denominator * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Exact (Born) statistics of one (j, scenario) cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExactCell {
    pub pass_probability: f64,
    pub plain_check_probability: f64,
    /// Distribution of Alice's recovered answer label.
    pub answer_probabilities: BTreeMap<usize, f64>,
    /// Probability that Bob's index guess equals the queried j.
    pub bob_guess_success: f64,
    /// Success probability of a uniform guess over the queryable records.
    pub uniform_baseline: f64,
    /// Whether the pre-measurement state only populates query digits {0, j}.
    pub query_support_ok: bool,
    /// Born-averaged memory state after the round.
    pub bob_memory: DensityMatrix,
    /// Trace distance between `bob_memory` and (|0⟩⟨0|+|j⟩⟨j|)/2, reported
    /// for the memory-entangling attack strategy.
    pub memory_trace_distance_to_attack_prediction: Option<f64>,
}

/// Sampled statistics of one (j, scenario) cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampledCell {
    pub trials: u64,
    pub passes: u64,
    pub pass_rate: f64,
    pub wilson95: (f64, f64),
    pub plain_check_failures: u64,
    pub answer_counts: BTreeMap<usize, u64>,
    pub bob_guess_successes: u64,
    pub bob_guess_rate: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellReport {
    pub j: usize,
    pub scenario: Scenario,
    pub exact: ExactCell,
    pub sampled: Option<SampledCell>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AuditStatus {
    Pass,
    Fail,
    NotEvaluable,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditVerdict {
    pub item: u8,
    pub requirement: String,
    pub status: AuditStatus,
    /// The concrete metric backing the verdict.
    pub metric: String,
    pub value: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditSection {
    pub pqpq: Vec<AuditVerdict>,
    pub spqpq: Vec<AuditVerdict>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StatsReport {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub database: Database,
    pub mode: RunMode,
    pub cells: Vec<CellReport>,
    /// Requirement audits; present for exact-mode runs only.
    pub audits: Option<AuditSection>,
}

impl StatsReport {
    pub fn to_json_string(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    pub fn cell(&self, j: usize, scenario: Scenario) -> Option<&CellReport> {
        self.cells
            .iter()
            .find(|c| c.j == j && c.scenario == scenario)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_interval_behaves_at_extremes() {
        let (lo, hi) = wilson_interval(0, 50, WILSON_Z95);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.15);
        let (lo, hi) = wilson_interval(50, 50, WILSON_Z95);
        assert!(lo > 0.85 && lo < 1.0);
        assert_eq!(hi, 1.0);
    }

    #[test]
    fn wilson_interval_contains_point_estimate() {
        for successes in [0u64, 7, 25, 49, 50] {
            let (lo, hi) = wilson_interval(successes, 50, WILSON_Z95);
            let p = successes as f64 / 50.0;
            assert!(lo <= p && p <= hi, "{p} outside [{lo}, {hi}]");
        }
    }
}
