//! Seeded experiment runner, requirement auditor and JSON reporting.

pub mod audit;
pub mod config;
pub mod report;
pub mod rng;
pub mod runner;

pub use audit::{audit_requirements, RequirementList, AUDIT_TOL};
pub use config::{DatabaseSource, ExperimentConfig, QuerySelection, RunMode, ScenarioSelection};
pub use report::{
    wilson_interval, AuditSection, AuditStatus, AuditVerdict, CellReport, ExactCell, SampledCell,
    StatsReport, SCHEMA_VERSION, WILSON_Z95,
};
pub use rng::trial_rng;
pub use runner::{exact_cell, run_experiment};
