//! Reduction adapters between private queries over probabilistic databases,
//! one-sided two-party function evaluation, and one-out-of-two oblivious
//! transfer — plus the receiver-side rotation attack that breaks one-sided
//! two-party computation whenever the sender learns nothing about the
//! receiver's input.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::database::Database;
use crate::quantum::{local_conversion_unitary, StateVector, UnitaryOp};

/// A finite two-party function f(j, k) with private inputs j (Alice) and k
/// (Bob). Domains are inclusive integer ranges; the table must be total.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TwoPartyFunctionJson", into = "TwoPartyFunctionJson")]
pub struct TwoPartyFunction {
    j_domain: (u64, u64),
    k_domain: (u64, u64),
    table: BTreeMap<u64, BTreeMap<u64, u64>>,
}

impl TwoPartyFunction {
    pub fn new(
        j_domain: (u64, u64),
        k_domain: (u64, u64),
        table: BTreeMap<u64, BTreeMap<u64, u64>>,
    ) -> Result<Self> {
        if j_domain.0 > j_domain.1 || k_domain.0 > k_domain.1 {
            return Err(Error::InvalidFunction("empty input domain".into()));
        }
        for j in j_domain.0..=j_domain.1 {
            let row = table
                .get(&j)
                .ok_or_else(|| Error::InvalidFunction(format!("missing row for j = {j}")))?;
            for k in k_domain.0..=k_domain.1 {
                if !row.contains_key(&k) {
                    return Err(Error::InvalidFunction(format!(
                        "missing entry for (j, k) = ({j}, {k})"
                    )));
                }
            }
            if row.len() != (k_domain.1 - k_domain.0 + 1) as usize {
                return Err(Error::InvalidFunction(format!(
                    "row {j} has entries outside the k domain"
                )));
            }
        }
        if table.len() != (j_domain.1 - j_domain.0 + 1) as usize {
            return Err(Error::InvalidFunction(
                "table has rows outside the j domain".into(),
            ));
        }
        Ok(Self {
            j_domain,
            k_domain,
            table,
        })
    }

    pub fn j_domain(&self) -> (u64, u64) {
        self.j_domain
    }

    pub fn k_domain(&self) -> (u64, u64) {
        self.k_domain
    }

    pub fn evaluate(&self, j: u64, k: u64) -> Result<u64> {
        self.table
            .get(&j)
            .and_then(|row| row.get(&k))
            .copied()
            .ok_or_else(|| Error::InvalidFunction(format!("({j}, {k}) outside the domain")))
    }
}

#[derive(Serialize, Deserialize)]
struct TwoPartyFunctionJson {
    j_domain: (u64, u64),
    k_domain: (u64, u64),
    table: BTreeMap<u64, BTreeMap<u64, u64>>,
}

impl TryFrom<TwoPartyFunctionJson> for TwoPartyFunction {
    type Error = Error;

    fn try_from(raw: TwoPartyFunctionJson) -> Result<Self> {
        TwoPartyFunction::new(raw.j_domain, raw.k_domain, raw.table)
    }
}

impl From<TwoPartyFunction> for TwoPartyFunctionJson {
    fn from(f: TwoPartyFunction) -> Self {
        TwoPartyFunctionJson {
            j_domain: f.j_domain,
            k_domain: f.k_domain,
            table: f.table,
        }
    }
}

/// Bob-side rotation attack on one-sided two-party computation: when Alice's
/// reduced states for two of Bob's inputs agree, a Bob-local unitary rotates
/// the k_from outcome into the k_to outcome.
#[derive(Debug, Clone)]
pub struct RotationAttack {
    pub unitary: UnitaryOp,
    /// |⟨target| U source⟩|²
    pub fidelity: f64,
}

pub fn rotation_attack(
    final_states: &BTreeMap<u64, StateVector>,
    alice_side: &[&str],
    k_from: u64,
    k_to: u64,
    epsilon_eq: f64,
) -> Result<RotationAttack> {
    let source = final_states
        .get(&k_from)
        .ok_or_else(|| Error::InvalidFunction(format!("no final state for k = {k_from}")))?;
    let target = final_states
        .get(&k_to)
        .ok_or_else(|| Error::InvalidFunction(format!("no final state for k = {k_to}")))?;
    let bob_side = source.layout().complement_of(alice_side)?;
    let bob_names: Vec<&str> = bob_side.iter().map(String::as_str).collect();
    let conversion = local_conversion_unitary(source, target, &bob_names, epsilon_eq)?;
    Ok(RotationAttack {
        unitary: conversion.unitary,
        fidelity: conversion.fidelity * conversion.fidelity,
    })
}

/// Views a rectangular probabilistic database as the two-party function
/// f(j, k) = A_j^k with j over the queryable records and k over the answer
/// slots (1-based). Ragged answer counts are rejected.
pub fn spqpq_as_two_party(db: &Database) -> Result<TwoPartyFunction> {
    let answers_per_query = db.answers_per_query()?;
    let mut table = BTreeMap::new();
    for j in 1..db.n() {
        let row: BTreeMap<u64, u64> = db
            .answers(j)?
            .iter()
            .enumerate()
            .map(|(i, &label)| ((i + 1) as u64, label as u64))
            .collect();
        table.insert(j as u64, row);
    }
    TwoPartyFunction::new(
        (1, (db.n() - 1) as u64),
        (1, answers_per_query as u64),
        table,
    )
}

/// A database view of a two-party function, together with the k-slots that
/// were merged when a record repeated an output label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpqpqEncoding {
    pub database: Database,
    /// For each record j and answer label, the (sorted) list of k values that
    /// produce this answer. Singleton lists everywhere means the function was
    /// rectangular with distinct outputs and the encoding is lossless.
    pub k_multiplicity: BTreeMap<u64, BTreeMap<u64, Vec<u64>>>,
}

impl SpqpqEncoding {
    /// Rebuilds the two-party function from the database plus multiplicity
    /// table (the exact inverse of [`two_party_via_spqpq`]).
    pub fn to_function(&self) -> Result<TwoPartyFunction> {
        let mut table: BTreeMap<u64, BTreeMap<u64, u64>> = BTreeMap::new();
        let mut k_min = u64::MAX;
        let mut k_max = 0;
        for (&j, labels) in &self.k_multiplicity {
            let row: &mut BTreeMap<u64, u64> = table.entry(j).or_default();
            for (&label, ks) in labels {
                for &k in ks {
                    k_min = k_min.min(k);
                    k_max = k_max.max(k);
                    row.insert(k, label);
                }
            }
        }
        TwoPartyFunction::new((1, (self.database.n() - 1) as u64), (k_min, k_max), table)
    }
}

/// The label given to the reserved known record when a function is encoded as
/// a database.
pub const ENCODED_KNOWN_ANSWER: usize = 1;

/// Encodes a two-party function as a private-query database: record j's
/// answer list is (f(j, k)) over k in order, deduplicated, with record 0
/// carrying the reserved known answer. Output labels must be nonzero because
/// label 0 is the blank answer. For functions obtained from a database via
/// [`spqpq_as_two_party`], this is an exact inverse.
pub fn two_party_via_spqpq(f: &TwoPartyFunction) -> Result<SpqpqEncoding> {
    let (j_lo, j_hi) = f.j_domain();
    if j_lo != 1 {
        return Err(Error::InvalidFunction(format!(
            "database encoding needs a 1-based j domain, got {j_lo}"
        )));
    }
    let (k_lo, k_hi) = f.k_domain();
    let n = (j_hi + 1) as usize;

    let mut answers: Vec<Vec<usize>> = vec![vec![ENCODED_KNOWN_ANSWER]];
    let mut k_multiplicity: BTreeMap<u64, BTreeMap<u64, Vec<u64>>> = BTreeMap::new();
    let mut max_label = ENCODED_KNOWN_ANSWER;
    for j in 1..=j_hi {
        let mut record = Vec::new();
        let labels = k_multiplicity.entry(j).or_default();
        for k in k_lo..=k_hi {
            let output = f.evaluate(j, k)?;
            if output == 0 {
                return Err(Error::BlankLabelCollision);
            }
            let label = output as usize;
            max_label = max_label.max(label);
            if !record.contains(&label) {
                record.push(label);
            }
            labels.entry(output).or_default().push(k);
        }
        answers.push(record);
    }

    let database = Database::new(n, max_label + 1, answers)?;
    Ok(SpqpqEncoding {
        database,
        k_multiplicity,
    })
}

/// One instance of one-out-of-two oblivious transfer: two messages and the
/// receiver's choice bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OtInstance {
    pub m0: u64,
    pub m1: u64,
    pub k: u8,
}

impl OtInstance {
    pub fn new(m0: u64, m1: u64, k: u8) -> Result<Self> {
        if k > 1 {
            return Err(Error::InvalidFunction(format!(
                "choice bit must be 0 or 1, got {k}"
            )));
        }
        Ok(Self { m0, m1, k })
    }

    pub fn chosen_message(&self) -> u64 {
        if self.k == 0 {
            self.m0
        } else {
            self.m1
        }
    }
}

/// 1-based index of a message pair inside the function's j domain.
pub fn pair_index(m0: u64, m1: u64, alphabet: u64) -> u64 {
    m0 * alphabet + m1 + 1
}

/// Views oblivious transfer as a two-party function: Alice inputs the message
/// pair (as a single index over `alphabet`² pairs), Bob inputs the choice bit,
/// and f(pair, k) = m_k. Returns the function together with its evaluation at
/// the instance's inputs.
pub fn ot_as_two_party(instance: &OtInstance, alphabet: u64) -> Result<(TwoPartyFunction, u64)> {
    if instance.m0 >= alphabet || instance.m1 >= alphabet {
        return Err(Error::InvalidFunction(format!(
            "messages ({}, {}) outside alphabet 0..{alphabet}",
            instance.m0, instance.m1
        )));
    }
    let mut table: BTreeMap<u64, BTreeMap<u64, u64>> = BTreeMap::new();
    for m0 in 0..alphabet {
        for m1 in 0..alphabet {
            let mut row = BTreeMap::new();
            row.insert(0, m0);
            row.insert(1, m1);
            table.insert(pair_index(m0, m1, alphabet), row);
        }
    }
    let f = TwoPartyFunction::new((1, alphabet * alphabet), (0, 1), table)?;
    let evaluation = f.evaluate(
        pair_index(instance.m0, instance.m1, alphabet),
        instance.k as u64,
    )?;
    Ok((f, evaluation))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::random::{random_purification_pair, random_spectrum};
    use crate::quantum::{RegisterLayout, EPSILON_EQ};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn builtin_database_maps_to_the_expected_table() {
        let db = Database::builtin_appendix();
        let f = spqpq_as_two_party(&db).unwrap();
        assert_eq!(f.j_domain(), (1, 2));
        assert_eq!(f.k_domain(), (1, 2));
        assert_eq!(f.evaluate(1, 1).unwrap(), 2);
        assert_eq!(f.evaluate(1, 2).unwrap(), 3);
        assert_eq!(f.evaluate(2, 1).unwrap(), 4);
        assert_eq!(f.evaluate(2, 2).unwrap(), 5);
    }

    #[test]
    fn deterministic_database_has_degenerate_k() {
        let db = Database::builtin_appendix().deterministic_restriction();
        let f = spqpq_as_two_party(&db).unwrap();
        assert_eq!(f.k_domain(), (1, 1));
        assert_eq!(f.evaluate(2, 1).unwrap(), 4);
    }

    #[test]
    fn ragged_databases_are_rejected() {
        let db = Database::new(3, 6, vec![vec![1], vec![2, 3], vec![4]]).unwrap();
        assert!(matches!(
            spqpq_as_two_party(&db),
            Err(Error::RaggedAnswers { .. })
        ));
    }

    #[test]
    fn encoding_round_trips_the_builtin_database() {
        let db = Database::builtin_appendix();
        let f = spqpq_as_two_party(&db).unwrap();
        let encoding = two_party_via_spqpq(&f).unwrap();
        assert_eq!(encoding.database, db);
        assert_eq!(encoding.to_function().unwrap(), f);
    }

    #[test]
    fn constant_function_deduplicates_with_multiplicities() {
        let mut table: BTreeMap<u64, BTreeMap<u64, u64>> = BTreeMap::new();
        for j in 1..=2u64 {
            table.insert(j, (1..=3).map(|k| (k, 7u64)).collect());
        }
        let f = TwoPartyFunction::new((1, 2), (1, 3), table).unwrap();
        let encoding = two_party_via_spqpq(&f).unwrap();
        assert_eq!(encoding.database.answers(1).unwrap(), &[7]);
        assert_eq!(encoding.k_multiplicity[&1][&7], vec![1, 2, 3]);
        assert_eq!(encoding.to_function().unwrap(), f);
    }

    #[test]
    fn distinct_two_by_two_table_becomes_two_answer_records() {
        let mut table: BTreeMap<u64, BTreeMap<u64, u64>> = BTreeMap::new();
        table.insert(1, [(1, 4u64), (2, 9u64)].into_iter().collect());
        table.insert(2, [(1, 6u64), (2, 2u64)].into_iter().collect());
        let f = TwoPartyFunction::new((1, 2), (1, 2), table).unwrap();
        let encoding = two_party_via_spqpq(&f).unwrap();
        assert_eq!(encoding.database.n(), 3);
        assert_eq!(encoding.database.answers(1).unwrap(), &[4, 9]);
        assert_eq!(encoding.database.answers(2).unwrap(), &[6, 2]);
        assert_eq!(encoding.to_function().unwrap(), f);
    }

    #[test]
    fn zero_outputs_collide_with_the_blank_label() {
        let mut table: BTreeMap<u64, BTreeMap<u64, u64>> = BTreeMap::new();
        table.insert(1, [(1, 0u64)].into_iter().collect());
        let f = TwoPartyFunction::new((1, 1), (1, 1), table).unwrap();
        assert!(matches!(
            two_party_via_spqpq(&f),
            Err(Error::BlankLabelCollision)
        ));
    }

    #[test]
    fn oblivious_transfer_selects_the_chosen_message() {
        let (_, picked) = ot_as_two_party(&OtInstance::new(5, 9, 0).unwrap(), 10).unwrap();
        assert_eq!(picked, 5);
        let (_, picked) = ot_as_two_party(&OtInstance::new(5, 9, 1).unwrap(), 10).unwrap();
        assert_eq!(picked, 9);
    }

    #[test]
    fn equal_messages_make_the_choice_irrelevant() {
        let (f, _) = ot_as_two_party(&OtInstance::new(3, 3, 0).unwrap(), 4).unwrap();
        let j = pair_index(3, 3, 4);
        assert_eq!(f.evaluate(j, 0).unwrap(), f.evaluate(j, 1).unwrap());
    }

    #[test]
    fn choice_bit_is_validated() {
        assert!(OtInstance::new(0, 1, 2).is_err());
    }

    #[test]
    fn rotation_attack_on_product_final_states() {
        // Bob holds the output register; Alice's side is a fixed product
        // factor, so her reduced states agree and Bob can rotate between
        // outputs.
        let layout = RegisterLayout::new([("ALICE", 2), ("BOB", 3)]).unwrap();
        let state = |out: usize| {
            StateVector::basis_state(layout.clone(), &[("ALICE", 1), ("BOB", out)]).unwrap()
        };
        let mut finals = BTreeMap::new();
        finals.insert(1u64, state(0));
        finals.insert(2u64, state(2));
        let attack = rotation_attack(&finals, &["ALICE"], 1, 2, EPSILON_EQ).unwrap();
        assert!(attack.fidelity > 1.0 - 1e-10);
        assert_eq!(attack.unitary.targets(), vec!["BOB"]);
    }

    #[test]
    fn rotation_attack_with_identical_states_is_trivial() {
        let layout = RegisterLayout::new([("ALICE", 2), ("BOB", 2)]).unwrap();
        let s = StateVector::basis_state(layout, &[("ALICE", 0), ("BOB", 1)]).unwrap();
        let mut finals = BTreeMap::new();
        finals.insert(1u64, s.clone());
        finals.insert(2u64, s);
        let attack = rotation_attack(&finals, &["ALICE"], 1, 2, EPSILON_EQ).unwrap();
        assert!(attack.fidelity > 1.0 - 1e-10);
    }

    #[test]
    fn rotation_attack_rejects_leaky_alice_states() {
        let layout = RegisterLayout::new([("ALICE", 2), ("BOB", 2)]).unwrap();
        let s0 = StateVector::basis_state(layout.clone(), &[("ALICE", 0), ("BOB", 0)]).unwrap();
        let s1 = StateVector::basis_state(layout, &[("ALICE", 1), ("BOB", 1)]).unwrap();
        let mut finals = BTreeMap::new();
        finals.insert(1u64, s0);
        finals.insert(2u64, s1);
        assert!(matches!(
            rotation_attack(&finals, &["ALICE"], 1, 2, EPSILON_EQ),
            Err(Error::ReducedStatesDiffer { .. })
        ));
    }

    #[test]
    fn rotation_attack_is_the_side_swapped_delayed_choice() {
        // The same purification pair drives both attacks: equal reduced
        // states on the kept side, conversion on the complement.
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let spectrum = random_spectrum(2, true, &mut rng);
        let (s_from, s_to) =
            random_purification_pair(("BOB", 3), ("ALICE", 2), &spectrum, &mut rng).unwrap();
        let mut finals = BTreeMap::new();
        finals.insert(1u64, s_from.clone());
        finals.insert(2u64, s_to.clone());
        let attack = rotation_attack(&finals, &["ALICE"], 1, 2, EPSILON_EQ).unwrap();
        assert!(attack.fidelity > 1.0 - 1e-8);

        let conversion =
            crate::quantum::local_conversion_unitary(&s_from, &s_to, &["BOB"], EPSILON_EQ).unwrap();
        assert!((attack.fidelity - conversion.fidelity * conversion.fidelity).abs() < 1e-10);
    }
}
