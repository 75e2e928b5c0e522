//! Shared generators for the integration suites.
//!
//! Each test binary compiles its own copy, so not every helper is used
//! everywhere.
#![allow(dead_code)]

use qpq_core::nogo::ENCODED_KNOWN_ANSWER;
use qpq_core::protocol::Database;
use qpq_core::quantum::RegisterLayout;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random deterministic database: n in 2..=max_n records, labels drawn from
/// 1..answer_dim with answer_dim in 2..=max_answer_dim.
pub fn random_deterministic_db(
    rng: &mut ChaCha8Rng,
    max_n: usize,
    max_answer_dim: usize,
) -> Database {
    let n = rng.gen_range(2..=max_n);
    let answer_dim = rng.gen_range(2..=max_answer_dim);
    let answers = (0..n).map(|_| vec![rng.gen_range(1..answer_dim)]).collect();
    Database::new(n, answer_dim, answers).expect("generated database is valid")
}

/// Random database where every queryable record has exactly one or two
/// answers (the shape accepted by the memory-entangling replies).
pub fn random_attackable_db(rng: &mut ChaCha8Rng, max_n: usize) -> Database {
    let n = rng.gen_range(2..=max_n);
    let answer_dim = rng.gen_range(4..=6);
    let mut answers = vec![vec![rng.gen_range(1..answer_dim)]];
    for _ in 1..n {
        let count = rng.gen_range(1..=2);
        let mut labels: Vec<usize> = (1..answer_dim).collect();
        labels.shuffle(rng);
        answers.push(labels.into_iter().take(count).collect());
    }
    Database::new(n, answer_dim, answers).expect("generated database is valid")
}

/// Random rectangular database in the canonical encoding form: known record
/// labelled `ENCODED_KNOWN_ANSWER`, every queryable record with the same
/// answer count, and answer_dim tight over the used labels. This is exactly
/// the family the database/function round trip is the identity on.
pub fn random_rectangular_db(rng: &mut ChaCha8Rng, max_n: usize, max_m: usize) -> Database {
    let n = rng.gen_range(2..=max_n);
    let m = rng.gen_range(1..=max_m);
    let mut answers = vec![vec![ENCODED_KNOWN_ANSWER]];
    let mut max_label = ENCODED_KNOWN_ANSWER;
    for _ in 1..n {
        let mut labels: Vec<usize> = (1..=9).collect();
        labels.shuffle(rng);
        let record: Vec<usize> = labels.into_iter().take(m).collect();
        max_label = max_label.max(*record.iter().max().expect("m >= 1"));
        answers.push(record);
    }
    Database::new(n, max_label + 1, answers).expect("generated database is valid")
}

/// Random small multi-register layout with total dimension <= ~64.
pub fn random_layout(rng: &mut ChaCha8Rng) -> RegisterLayout {
    let count = rng.gen_range(2..=3);
    let names = ["W", "X", "Y"];
    RegisterLayout::new((0..count).map(|i| (names[i], rng.gen_range(2..=4usize))))
        .expect("generated layout is valid")
}

/// A nonempty proper register subset of the layout, in layout order.
pub fn random_bipartition(rng: &mut ChaCha8Rng, layout: &RegisterLayout) -> Vec<String> {
    loop {
        let picked: Vec<String> = layout
            .registers()
            .filter(|_| rng.gen_bool(0.5))
            .map(|(name, _)| name.to_string())
            .collect();
        if !picked.is_empty() && picked.len() < layout.len() {
            return picked;
        }
    }
}
