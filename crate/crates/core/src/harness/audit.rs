//! Requirement audits over exact-mode reports.
//!
//! Each list item maps to pass / fail / not-evaluable together with the
//! concrete metric used, so a verdict is always traceable to a number in the
//! report.

use serde::{Deserialize, Serialize};

use super::config::RunMode;
use super::report::{AuditStatus, AuditVerdict, StatsReport};
use crate::error::{Error, Result};
use crate::quantum::trace_distance;

/// Probability tolerance for audit comparisons.
pub const AUDIT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RequirementList {
    Pqpq,
    Spqpq,
}

impl std::str::FromStr for RequirementList {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pqpq" => Ok(RequirementList::Pqpq),
            "spqpq" => Ok(RequirementList::Spqpq),
            other => Err(Error::InvalidConfig(format!(
                "unknown requirement list `{other}` (expected pqpq or spqpq)"
            ))),
        }
    }
}

/// Audits a report against the requirement list. The report must come from
/// an exact-mode run; sampled estimates are not accepted as audit evidence.
pub fn audit_requirements(
    report: &StatsReport,
    which: RequirementList,
) -> Result<Vec<AuditVerdict>> {
    if report.mode != RunMode::Exact {
        return Err(Error::AuditNeedsExact);
    }
    if report.cells.is_empty() {
        return Err(Error::InvalidConfig("report has no cells to audit".into()));
    }
    match which {
        RequirementList::Pqpq => Ok(vec![
            audit_valid_answer(report),
            audit_data_privacy(report),
            audit_cheat_sensitivity(report),
        ]),
        RequirementList::Spqpq => Ok(vec![
            audit_valid_answer(report),
            audit_data_privacy(report),
            audit_receiver_blindness(report),
            audit_sender_blindness(report),
        ]),
    }
}

/// Item 1: Alice learns a legal answer for her record with certainty.
fn audit_valid_answer(report: &StatsReport) -> AuditVerdict {
    let mut min_legal_mass = 1.0f64;
    for cell in &report.cells {
        let legal_mass: f64 = cell
            .exact
            .answer_probabilities
            .iter()
            .filter(|(label, _)| report.database.is_legal_answer(cell.j, **label))
            .map(|(_, p)| p)
            .sum();
        min_legal_mass = min_legal_mass
            .min(legal_mass)
            .min(cell.exact.plain_check_probability);
    }
    AuditVerdict {
        item: 1,
        requirement: "Alice learns a valid answer for her record".into(),
        status: if min_legal_mass >= 1.0 - AUDIT_TOL {
            AuditStatus::Pass
        } else {
            AuditStatus::Fail
        },
        metric: "minimum probability mass on legal answers and passed plain checks across cells"
            .into(),
        value: Some(min_legal_mass),
    }
}

/// Item 2: data privacy — the round only ever touches records j and 0.
fn audit_data_privacy(report: &StatsReport) -> AuditVerdict {
    let all_supported = report.cells.iter().all(|c| c.exact.query_support_ok);
    AuditVerdict {
        item: 2,
        requirement: "Alice can learn at most the queried and the known record".into(),
        status: if all_supported {
            AuditStatus::Pass
        } else {
            AuditStatus::Fail
        },
        metric: "query-register support of the pre-measurement state restricted to {0, j}".into(),
        value: None,
    }
}

/// pQPQ item 3: reading j or the answer risks detection. Vacuously satisfied
/// when the strategy gains no query information; otherwise the detection
/// probability 1 - P must be positive.
fn audit_cheat_sensitivity(report: &StatsReport) -> AuditVerdict {
    let gain = report
        .cells
        .iter()
        .map(|c| c.exact.bob_guess_success - c.exact.uniform_baseline)
        .fold(f64::MIN, f64::max);
    if gain <= AUDIT_TOL {
        return AuditVerdict {
            item: 3,
            requirement: "information gain about j risks failing the test".into(),
            status: AuditStatus::Pass,
            metric: "no guess advantage over the uniform baseline; test trivially passed".into(),
            value: Some(gain.max(0.0)),
        };
    }
    let detection = report
        .cells
        .iter()
        .map(|c| 1.0 - c.exact.pass_probability)
        .fold(f64::MAX, f64::min)
        .max(0.0);
    AuditVerdict {
        item: 3,
        requirement: "information gain about j risks failing the test".into(),
        status: if detection > AUDIT_TOL {
            AuditStatus::Pass
        } else {
            AuditStatus::Fail
        },
        metric: format!(
            "guess advantage {gain:.6} with minimum detection probability 1 - P across cells"
        ),
        value: Some(detection),
    }
}

/// SpQPQ item 3: Bob learns nothing about j or the delivered answer. Metric:
/// Bob's guess advantage plus the maximal trace distance between his memory
/// states across different queried records (one chosen leakage proxy).
fn audit_receiver_blindness(report: &StatsReport) -> AuditVerdict {
    let gain = report
        .cells
        .iter()
        .map(|c| c.exact.bob_guess_success - c.exact.uniform_baseline)
        .fold(f64::MIN, f64::max)
        .max(0.0);
    let mut max_distance = 0.0f64;
    let mut compared = false;
    for a in &report.cells {
        for b in &report.cells {
            if a.scenario == b.scenario && a.j < b.j {
                compared = true;
                if let Ok(d) = trace_distance(&a.exact.bob_memory, &b.exact.bob_memory) {
                    max_distance = max_distance.max(d);
                }
            }
        }
    }
    if !compared && gain <= AUDIT_TOL {
        return AuditVerdict {
            item: 3,
            requirement: "Bob learns nothing about j or the delivered answer".into(),
            status: AuditStatus::NotEvaluable,
            metric: "memory-state comparison needs at least two queried records".into(),
            value: None,
        };
    }
    let leak = max_distance.max(gain);
    AuditVerdict {
        item: 3,
        requirement: "Bob learns nothing about j or the delivered answer".into(),
        status: if leak <= AUDIT_TOL {
            AuditStatus::Pass
        } else {
            AuditStatus::Fail
        },
        metric: "max of guess advantage and pairwise memory trace distance across records".into(),
        value: Some(leak),
    }
}

/// SpQPQ item 4: Alice learns nothing about which answer slot Bob used. Not
/// evaluable for deterministic databases; for probabilistic ones the
/// within-record labels are distinct by construction, so the delivered
/// answer itself identifies k.
fn audit_sender_blindness(report: &StatsReport) -> AuditVerdict {
    if report.database.is_deterministic() {
        return AuditVerdict {
            item: 4,
            requirement: "Alice learns nothing about Bob's answer choice k".into(),
            status: AuditStatus::NotEvaluable,
            metric: "deterministic database fixes k = 1".into(),
            value: None,
        };
    }
    AuditVerdict {
        item: 4,
        requirement: "Alice learns nothing about Bob's answer choice k".into(),
        status: AuditStatus::Fail,
        metric: "within-record answer labels are distinct, so the recovered answer identifies k"
            .into(),
        value: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{DatabaseSource, ExperimentConfig, RunMode};
    use crate::harness::runner::run_experiment;
    use crate::protocol::Database;

    fn report_for(strategy: &str, deterministic: bool) -> StatsReport {
        let db = if deterministic {
            Database::builtin_appendix().deterministic_restriction()
        } else {
            Database::builtin_appendix()
        };
        let config = ExperimentConfig {
            db: DatabaseSource::Inline(db),
            strategy: strategy.into(),
            ..ExperimentConfig::default()
        };
        run_experiment(&config).unwrap()
    }

    fn status_of(verdicts: &[AuditVerdict], item: u8) -> AuditStatus {
        verdicts.iter().find(|v| v.item == item).unwrap().status
    }

    #[test]
    fn honest_strategy_passes_the_full_pqpq_list() {
        let report = report_for("honest", true);
        let verdicts = audit_requirements(&report, RequirementList::Pqpq).unwrap();
        for item in 1..=3 {
            assert_eq!(status_of(&verdicts, item), AuditStatus::Pass);
        }
    }

    #[test]
    fn attack_violates_exactly_item_three() {
        let report = report_for("appendix-attack", false);
        let verdicts = audit_requirements(&report, RequirementList::Pqpq).unwrap();
        assert_eq!(status_of(&verdicts, 1), AuditStatus::Pass);
        assert_eq!(status_of(&verdicts, 2), AuditStatus::Pass);
        assert_eq!(status_of(&verdicts, 3), AuditStatus::Fail);
    }

    #[test]
    fn intercept_keeps_the_test_cheat_sensitive() {
        let report = report_for("intercept", true);
        let verdicts = audit_requirements(&report, RequirementList::Pqpq).unwrap();
        let item3 = verdicts.iter().find(|v| v.item == 3).unwrap();
        assert_eq!(item3.status, AuditStatus::Pass);
        assert!((item3.value.unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn spqpq_audit_flags_receiver_and_sender_leaks_of_the_attack() {
        let report = report_for("appendix-attack", false);
        let verdicts = audit_requirements(&report, RequirementList::Spqpq).unwrap();
        assert_eq!(status_of(&verdicts, 1), AuditStatus::Pass);
        assert_eq!(status_of(&verdicts, 2), AuditStatus::Pass);
        assert_eq!(status_of(&verdicts, 3), AuditStatus::Fail);
        assert_eq!(status_of(&verdicts, 4), AuditStatus::Fail);
    }

    #[test]
    fn spqpq_sender_item_is_not_evaluable_for_deterministic_databases() {
        let report = report_for("honest", true);
        let verdicts = audit_requirements(&report, RequirementList::Spqpq).unwrap();
        assert_eq!(status_of(&verdicts, 3), AuditStatus::Pass);
        assert_eq!(status_of(&verdicts, 4), AuditStatus::NotEvaluable);
    }

    #[test]
    fn sampled_reports_are_rejected() {
        let config = ExperimentConfig {
            db: DatabaseSource::Inline(Database::builtin_appendix().deterministic_restriction()),
            strategy: "honest".into(),
            mode: RunMode::Sampled,
            trials: 8,
            ..ExperimentConfig::default()
        };
        let report = run_experiment(&config).unwrap();
        assert!(matches!(
            audit_requirements(&report, RequirementList::Pqpq),
            Err(Error::AuditNeedsExact)
        ));
    }
}
