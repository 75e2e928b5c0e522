//! Bob-side strategies: honest replies, the naive intercept-and-measure
//! attack that the cheat test catches, and the memory-entangling attack on
//! probabilistic databases that passes the test with certainty while keeping
//! query information in Bob's memory register.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::protocol::database::Database;
use crate::protocol::round::{qram_oracle, Slot, ANSWER_1, ANSWER_2, MEMORY, QUERY_1, QUERY_2};
use crate::quantum::{DensityMatrix, RegisterLayout, UnitaryOp, C64};

pub const STRATEGY_HONEST: &str = "honest";
pub const STRATEGY_INTERCEPT: &str = "intercept";
pub const STRATEGY_APPENDIX_ATTACK: &str = "appendix-attack";

/// A pair of reply unitaries plus optional measurements around them.
#[derive(Debug, Clone)]
pub struct BobStrategy {
    pub name: String,
    /// Reply to the first message; acts within (Q1, R1, B).
    pub first_reply: UnitaryOp,
    /// Reply to the second message; acts within (Q2, R2, B).
    pub second_reply: UnitaryOp,
    /// When set, Bob measures each incoming query register in the
    /// computational basis before replying and keeps the outcomes as a
    /// classical record (one n-dimensional memory register cannot hold both
    /// outcomes coherently).
    pub measures_incoming_queries: bool,
    /// When set, Bob reads his memory register out after the round.
    pub has_memory_readout: bool,
}

impl BobStrategy {
    /// Bob's best query-index guess from his classical pre-reply outcomes:
    /// the plain query always collapses to j, so any nonzero outcome is j.
    pub fn classical_guess(observed: &[usize], n: usize) -> Option<usize> {
        let _ = n;
        observed.iter().copied().find(|&o| o > 0)
    }
}

/// Honest Bob: the reply oracle on each slot, memory untouched.
pub fn honest_strategy(db: &Database) -> Result<BobStrategy> {
    Ok(BobStrategy {
        name: STRATEGY_HONEST.into(),
        first_reply: qram_oracle(db, Slot::First)?,
        second_reply: qram_oracle(db, Slot::Second)?,
        measures_incoming_queries: false,
        has_memory_readout: false,
    })
}

/// Intercepting Bob: honest replies, but both incoming queries are measured
/// first. Identifies j with certainty and fails the cheat test half the
/// time.
pub fn intercept_strategy(db: &Database) -> Result<BobStrategy> {
    Ok(BobStrategy {
        name: STRATEGY_INTERCEPT.into(),
        first_reply: qram_oracle(db, Slot::First)?,
        second_reply: qram_oracle(db, Slot::Second)?,
        measures_incoming_queries: true,
        has_memory_readout: false,
    })
}

fn check_attack_shape(db: &Database) -> Result<()> {
    for j in 0..db.n() {
        let count = db.answers(j)?.len();
        if count > 2 {
            return Err(Error::UnsupportedShape(format!(
                "record {j} has {count} answers; the memory-entangling replies need 1 or 2"
            )));
        }
    }
    Ok(())
}

fn basis_vector(dim: usize, index: usize) -> DVector<C64> {
    let mut v = DVector::zeros(dim);
    v[index] = C64::new(1.0, 0.0);
    v
}

/// Reply to the first query: answers the blank-memory query coherently,
/// writing one answer branch and a matching memory state
/// |±j⟩ = (|0⟩ ± |j⟩)/√2 per legal answer.
///
/// On basis inputs with blank answer register and blank memory:
/// |0,0,0⟩ → |0,A₀,0⟩ and |j,0,0⟩ → |j⟩ (|A_j¹⟩|+j⟩ + |A_j²⟩|−j⟩)/√2 for
/// two-answer records; single-answer records map |j,0,0⟩ → |j,A_j,0⟩.
/// Completed to a full unitary on the rest of the space.
pub fn attack_first_reply_unitary(db: &Database) -> Result<UnitaryOp> {
    check_attack_shape(db)?;
    let n = db.n();
    let ad = db.answer_dim();
    let dim = n * ad * n;
    let enc = |q: usize, r: usize, b: usize| (q * ad + r) * n + b;

    let mut inputs = Vec::new();
    let mut images = Vec::new();
    for q in 0..n {
        inputs.push(basis_vector(dim, enc(q, 0, 0)));
        let answers = db.answers(q)?;
        let image = match answers {
            [a] => basis_vector(dim, enc(q, *a, 0)),
            [a1, a2] => {
                // (|a1⟩(|0⟩+|q⟩) + |a2⟩(|0⟩−|q⟩)) / 2
                let mut v: DVector<C64> = DVector::zeros(dim);
                v[enc(q, *a1, 0)] = C64::from(0.5);
                v[enc(q, *a1, q)] = C64::from(0.5);
                v[enc(q, *a2, 0)] = C64::from(0.5);
                v[enc(q, *a2, q)] = C64::from(-0.5);
                v
            }
            _ => unreachable!("shape checked above"),
        };
        images.push(image);
    }
    UnitaryOp::from_partial_isometry([QUERY_1, ANSWER_1, MEMORY], dim, &inputs, &images)
}

/// Reply to the second query: reads the memory correlation back into the
/// answer register.
///
/// |0,0,γ⟩ → |0,A₀,γ⟩ for every memory state γ, and
/// |j,0,±j⟩ → |j,A_j^(±),±j⟩ for two-answer records; single-answer records
/// map |j,0,γ⟩ → |j,A_j,γ⟩. Completed to a full unitary.
pub fn attack_second_reply_unitary(db: &Database) -> Result<UnitaryOp> {
    check_attack_shape(db)?;
    let n = db.n();
    let ad = db.answer_dim();
    let dim = n * ad * n;
    let enc = |q: usize, r: usize, b: usize| (q * ad + r) * n + b;
    let sqrt_half = C64::from(std::f64::consts::FRAC_1_SQRT_2);

    let mut inputs = Vec::new();
    let mut images = Vec::new();
    for q in 0..n {
        let answers = db.answers(q)?;
        match answers {
            [a] => {
                for b in 0..n {
                    inputs.push(basis_vector(dim, enc(q, 0, b)));
                    images.push(basis_vector(dim, enc(q, *a, b)));
                }
            }
            [a1, a2] => {
                for (answer, sign) in [(*a1, 1.0), (*a2, -1.0)] {
                    let mut input: DVector<C64> = DVector::zeros(dim);
                    input[enc(q, 0, 0)] = sqrt_half;
                    input[enc(q, 0, q)] = sqrt_half * C64::from(sign);
                    inputs.push(input);
                    let mut image: DVector<C64> = DVector::zeros(dim);
                    image[enc(q, answer, 0)] = sqrt_half;
                    image[enc(q, answer, q)] = sqrt_half * C64::from(sign);
                    images.push(image);
                }
            }
            _ => unreachable!("shape checked above"),
        }
    }
    UnitaryOp::from_partial_isometry([QUERY_2, ANSWER_2, MEMORY], dim, &inputs, &images)
}

/// The full memory-entangling attack strategy (CLI name `appendix-attack`).
pub fn appendix_attack_strategy(db: &Database) -> Result<BobStrategy> {
    Ok(BobStrategy {
        name: STRATEGY_APPENDIX_ATTACK.into(),
        first_reply: attack_first_reply_unitary(db)?,
        second_reply: attack_second_reply_unitary(db)?,
        measures_incoming_queries: false,
        has_memory_readout: true,
    })
}

/// Strategy lookup by its CLI name.
pub fn strategy_by_name(name: &str, db: &Database) -> Result<BobStrategy> {
    match name {
        STRATEGY_HONEST => honest_strategy(db),
        STRATEGY_INTERCEPT => intercept_strategy(db),
        STRATEGY_APPENDIX_ATTACK => appendix_attack_strategy(db),
        other => Err(Error::UnknownStrategy(other.to_string())),
    }
}

/// The memory state the attack predicts when Alice queries j:
/// (|0⟩⟨0| + |j⟩⟨j|)/2.
pub fn attack_predicted_memory(j: usize, db: &Database) -> Result<DensityMatrix> {
    db.check_query_index(j)?;
    let n = db.n();
    let layout = RegisterLayout::new([(MEMORY, n)])?;
    let mut matrix: DMatrix<C64> = DMatrix::zeros(n, n);
    matrix[(0, 0)] = C64::from(0.5);
    matrix[(j, j)] = C64::from(0.5);
    DensityMatrix::new(layout, matrix)
}

/// The memory state |±j⟩ = (|0⟩ ± |j⟩)/√2 the attack holds conditioned on
/// which answer Alice recovered.
pub fn attack_conditional_memory(j: usize, sign: f64, db: &Database) -> Result<DensityMatrix> {
    db.check_query_index(j)?;
    let layout = RegisterLayout::new([(MEMORY, db.n())])?;
    let zero = crate::quantum::StateVector::basis_state(layout.clone(), &[(MEMORY, 0)])?;
    let jth = crate::quantum::StateVector::basis_state(layout, &[(MEMORY, j)])?;
    let c = C64::from(std::f64::consts::FRAC_1_SQRT_2);
    let state = crate::quantum::StateVector::superpose(&[(c, &zero), (c * C64::from(sign), &jth)])?;
    Ok(DensityMatrix::from_pure(&state))
}

/// Bob's query-index recovery from his memory register: computational
/// measurement on the memory; a nonzero outcome g is the guess, outcome 0
/// falls back to a uniform guess over 1..n-1.
pub fn bob_extract_query_index<R: Rng + ?Sized>(
    memory: &DensityMatrix,
    rng: &mut R,
) -> Result<usize> {
    let n = memory.dim();
    if n < 2 {
        return Err(Error::DimensionMismatch(
            "memory register needs dimension >= 2".into(),
        ));
    }
    let diagonal: Vec<f64> = (0..n)
        .map(|b| memory.matrix()[(b, b)].re.max(0.0))
        .collect();
    let total: f64 = diagonal.iter().sum();
    let draw = rng.gen::<f64>() * total;
    let mut cumulative = 0.0;
    let mut outcome = n - 1;
    for (b, p) in diagonal.iter().enumerate() {
        cumulative += p;
        if draw < cumulative {
            outcome = b;
            break;
        }
    }
    if outcome > 0 {
        Ok(outcome)
    } else {
        Ok(rng.gen_range(1..n))
    }
}

/// Exact success probability of [`bob_extract_query_index`] against the true
/// index: P(outcome = j) + P(outcome = 0)/(n-1).
pub fn bob_extract_success_probability(memory: &DensityMatrix, j: usize) -> Result<f64> {
    let n = memory.dim();
    if j == 0 || j >= n {
        return Err(Error::RecordOutOfRange { j, n });
    }
    let p_j = memory.matrix()[(j, j)].re.max(0.0);
    let p_0 = memory.matrix()[(0, 0)].re.max(0.0);
    Ok(p_j + p_0 / (n - 1) as f64)
}
