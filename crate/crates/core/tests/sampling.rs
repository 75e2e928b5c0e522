//! Statistical behavior of the sampled mode: Wilson intervals from sampled
//! runs must cover the exact Born probability at (at least) their nominal
//! rate, checked over many seeds as a meta-test.

mod common;

use qpq_core::harness::{
    run_experiment, DatabaseSource, ExperimentConfig, QuerySelection, RunMode, ScenarioSelection,
};
use qpq_core::protocol::{Database, Scenario};

/// The intercept strategy sits at exact pass probability 1/2 — the worst
/// case for interval coverage. Over 100 seeds of 100 trials each, the 95%
/// Wilson interval must contain 1/2 in at least 93 runs.
#[test]
fn wilson_intervals_cover_the_exact_probability() {
    let db = Database::builtin_appendix().deterministic_restriction();
    let mut covered = 0;
    for seed in 0..100u64 {
        let config = ExperimentConfig {
            db: DatabaseSource::Inline(db.clone()),
            strategy: "intercept".into(),
            query: QuerySelection::Fixed(1),
            scenario: ScenarioSelection::Fixed(Scenario::PlainFirst),
            trials: 100,
            seed,
            mode: RunMode::Sampled,
            parallel: true,
        };
        let report = run_experiment(&config).unwrap();
        let cell = report.cell(1, Scenario::PlainFirst).unwrap();
        let exact = cell.exact.pass_probability;
        assert!((exact - 0.5).abs() < 1e-12);
        let sampled = cell.sampled.as_ref().unwrap();
        let (lo, hi) = sampled.wilson95;
        if lo <= exact && exact <= hi {
            covered += 1;
        }
    }
    assert!(covered >= 93, "coverage {covered}/100 below the 93 floor");
}

/// Sampled answer frequencies of the memory-entangling attack approach the
/// exact half/half split.
#[test]
fn sampled_answer_frequencies_track_the_born_marginal() {
    let config = ExperimentConfig {
        strategy: "appendix-attack".into(),
        query: QuerySelection::Fixed(2),
        scenario: ScenarioSelection::Fixed(Scenario::SuperposedFirst),
        trials: 600,
        seed: 7,
        mode: RunMode::Sampled,
        ..ExperimentConfig::default()
    };
    let report = run_experiment(&config).unwrap();
    let cell = report.cell(2, Scenario::SuperposedFirst).unwrap();
    let sampled = cell.sampled.as_ref().unwrap();
    assert_eq!(sampled.passes, sampled.trials);
    let trials = sampled.trials as f64;
    for label in [4usize, 5] {
        let rate = *sampled.answer_counts.get(&label).unwrap() as f64 / trials;
        assert!((rate - 0.5).abs() < 0.08, "label {label} rate {rate}");
    }
    // guess rate tracks the exact 3/4 recovery probability
    let guess_rate = sampled.bob_guess_rate;
    assert!((guess_rate - 0.75).abs() < 0.08, "guess rate {guess_rate}");
}
