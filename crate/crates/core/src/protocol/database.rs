//! Answer databases: deterministic (one answer per record) or probabilistic
//! (several interchangeable correct answers per record).
//!
//! Record 0 is the reserved known record with a single fixed answer; queries
//! address records 1..n-1. Answer label 0 is the blank the reply oracle turns
//! into a real answer, so every legal label is nonzero.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Answer label reserved for the blank (unanswered) register content.
pub const BLANK_LABEL: usize = 0;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "DatabaseJson", into = "DatabaseJson")]
pub struct Database {
    n: usize,
    answer_dim: usize,
    answers: Vec<Vec<usize>>,
}

impl Database {
    pub fn new(n: usize, answer_dim: usize, answers: Vec<Vec<usize>>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDatabase(
                "need the known record plus at least one queryable record".into(),
            ));
        }
        if answers.len() != n {
            return Err(Error::InvalidDatabase(format!(
                "{} answer lists for {n} records",
                answers.len()
            )));
        }
        if answers[0].len() != 1 {
            return Err(Error::InvalidDatabase(
                "record 0 must have exactly one (known) answer".into(),
            ));
        }
        for (j, list) in answers.iter().enumerate() {
            if list.is_empty() {
                return Err(Error::InvalidDatabase(format!("record {j} has no answers")));
            }
            for (i, &label) in list.iter().enumerate() {
                if label == BLANK_LABEL {
                    return Err(Error::InvalidDatabase(format!(
                        "record {j} uses label 0, which is reserved for the blank answer"
                    )));
                }
                if label >= answer_dim {
                    return Err(Error::InvalidDatabase(format!(
                        "record {j} label {label} exceeds answer_dim {answer_dim}"
                    )));
                }
                if list[..i].contains(&label) {
                    return Err(Error::InvalidDatabase(format!(
                        "record {j} repeats label {label}"
                    )));
                }
            }
        }
        Ok(Self {
            n,
            answer_dim,
            answers,
        })
    }

    /// The three-record probabilistic database used as the canonical attack
    /// fixture: one known record plus two records with two answers each.
    /// Exposed on the CLI as `builtin:appendix`.
    pub fn builtin_appendix() -> Self {
        Database::new(3, 6, vec![vec![1], vec![2, 3], vec![4, 5]])
            .expect("builtin database is valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn answer_dim(&self) -> usize {
        self.answer_dim
    }

    pub fn answers(&self, j: usize) -> Result<&[usize]> {
        self.answers
            .get(j)
            .map(Vec::as_slice)
            .ok_or(Error::RecordOutOfRange { j, n: self.n })
    }

    /// The fixed answer of the reserved record 0.
    pub fn known_answer(&self) -> usize {
        self.answers[0][0]
    }

    pub fn is_deterministic(&self) -> bool {
        self.answers.iter().all(|list| list.len() == 1)
    }

    pub fn is_legal_answer(&self, j: usize, label: usize) -> bool {
        self.answers
            .get(j)
            .map(|list| list.contains(&label))
            .unwrap_or(false)
    }

    /// Common answer count of the queryable records 1..n-1, or an error if
    /// the counts are ragged.
    pub fn answers_per_query(&self) -> Result<usize> {
        let expected = self.answers[1].len();
        for (j, list) in self.answers.iter().enumerate().skip(1) {
            if list.len() != expected {
                return Err(Error::RaggedAnswers {
                    j,
                    got: list.len(),
                    expected,
                });
            }
        }
        Ok(expected)
    }

    /// Deterministic database keeping only the first answer of every record.
    pub fn deterministic_restriction(&self) -> Database {
        Database {
            n: self.n,
            answer_dim: self.answer_dim,
            answers: self.answers.iter().map(|list| vec![list[0]]).collect(),
        }
    }

    /// Validates that `j` is a queryable record index (1..n-1).
    pub fn check_query_index(&self, j: usize) -> Result<()> {
        if j == 0 {
            return Err(Error::ReservedRecord);
        }
        if j >= self.n {
            return Err(Error::RecordOutOfRange { j, n: self.n });
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct DatabaseJson {
    n: usize,
    answer_dim: usize,
    answers: BTreeMap<String, Vec<usize>>,
}

impl TryFrom<DatabaseJson> for Database {
    type Error = Error;

    fn try_from(raw: DatabaseJson) -> Result<Self> {
        let mut answers = vec![Vec::new(); raw.n];
        for (key, list) in raw.answers {
            let j: usize = key.parse().map_err(|_| {
                Error::InvalidDatabase(format!("record key `{key}` is not an index"))
            })?;
            if j >= raw.n {
                return Err(Error::InvalidDatabase(format!(
                    "record key {j} out of range for n = {}",
                    raw.n
                )));
            }
            answers[j] = list;
        }
        Database::new(raw.n, raw.answer_dim, answers)
    }
}

impl From<Database> for DatabaseJson {
    fn from(db: Database) -> Self {
        DatabaseJson {
            n: db.n,
            answer_dim: db.answer_dim,
            answers: db
                .answers
                .into_iter()
                .enumerate()
                .map(|(j, list)| (j.to_string(), list))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_fixture_shape() {
        let db = Database::builtin_appendix();
        assert_eq!(db.n(), 3);
        assert_eq!(db.answer_dim(), 6);
        assert_eq!(db.known_answer(), 1);
        assert_eq!(db.answers(1).unwrap(), &[2, 3]);
        assert_eq!(db.answers(2).unwrap(), &[4, 5]);
        assert!(!db.is_deterministic());
        assert_eq!(db.answers_per_query().unwrap(), 2);
    }

    #[test]
    fn rejects_multi_answer_known_record() {
        assert!(Database::new(2, 4, vec![vec![1, 2], vec![3]]).is_err());
    }

    #[test]
    fn rejects_blank_and_out_of_range_labels() {
        assert!(Database::new(2, 4, vec![vec![1], vec![0]]).is_err());
        assert!(Database::new(2, 4, vec![vec![1], vec![4]]).is_err());
        assert!(Database::new(2, 4, vec![vec![1], vec![2, 2]]).is_err());
    }

    #[test]
    fn query_index_validation() {
        let db = Database::builtin_appendix();
        assert!(matches!(
            db.check_query_index(0),
            Err(Error::ReservedRecord)
        ));
        assert!(matches!(
            db.check_query_index(3),
            Err(Error::RecordOutOfRange { .. })
        ));
        assert!(db.check_query_index(2).is_ok());
    }

    #[test]
    fn deterministic_restriction_keeps_first_answers() {
        let db = Database::builtin_appendix().deterministic_restriction();
        assert!(db.is_deterministic());
        assert_eq!(db.answers(1).unwrap(), &[2]);
        assert_eq!(db.answers(2).unwrap(), &[4]);
    }

    #[test]
    fn json_round_trip_matches_documented_shape() {
        let db = Database::builtin_appendix();
        let json = serde_json::to_value(&db).unwrap();
        assert_eq!(json["n"], 3);
        assert_eq!(json["answer_dim"], 6);
        assert_eq!(json["answers"]["1"], serde_json::json!([2, 3]));
        let back: Database = serde_json::from_value(json).unwrap();
        assert_eq!(back, db);
    }

    #[test]
    fn json_rejects_invalid_database() {
        let bad = r#"{"n":2,"answer_dim":4,"answers":{"0":[1],"1":[0]}}"#;
        assert!(serde_json::from_str::<Database>(bad).is_err());
    }
}
