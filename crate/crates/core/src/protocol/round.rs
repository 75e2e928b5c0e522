//! One round of the private-query protocol as an explicit state machine.
//!
//! Alice prepares a plain query |j⟩ and a superposed query (|j⟩+|0⟩)/√2 and
//! sends them in scenario order; Bob replies to each through his strategy
//! unitaries; Alice recovers the answer from the plain slot by a
//! computational measurement and then projects the superposed slot onto the
//! expected entangled answer state. Every measurement step exists in two
//! forms: sampled (consuming a caller RNG) and exact branch enumeration.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::database::{Database, BLANK_LABEL};
use crate::adversary::BobStrategy;
use crate::error::{Error, Result};
use crate::quantum::{
    born_probabilities, collapse_computational, computational_distribution, measure_computational,
    outer_projector, DensityMatrix, RegisterLayout, StateVector, UnitaryOp, C64, STRUCTURAL_TOL,
};

pub const QUERY_1: &str = "Q1";
pub const ANSWER_1: &str = "R1";
pub const QUERY_2: &str = "Q2";
pub const ANSWER_2: &str = "R2";
pub const MEMORY: &str = "B";

/// Branches with joint probability below this are dropped during exact
/// enumeration.
pub(crate) const PROB_PRUNE: f64 = 1e-12;

/// Which message carries which query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scenario {
    /// Scenario a: the plain query goes first, the superposition second.
    #[serde(rename = "a")]
    PlainFirst,
    /// Scenario b: the superposition goes first, the plain query second.
    #[serde(rename = "b")]
    SuperposedFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    First,
    Second,
}

impl Slot {
    pub fn query_register(self) -> &'static str {
        match self {
            Slot::First => QUERY_1,
            Slot::Second => QUERY_2,
        }
    }

    pub fn answer_register(self) -> &'static str {
        match self {
            Slot::First => ANSWER_1,
            Slot::Second => ANSWER_2,
        }
    }
}

impl Scenario {
    pub fn plain_slot(self) -> Slot {
        match self {
            Scenario::PlainFirst => Slot::First,
            Scenario::SuperposedFirst => Slot::Second,
        }
    }

    pub fn superposed_slot(self) -> Slot {
        match self {
            Scenario::PlainFirst => Slot::Second,
            Scenario::SuperposedFirst => Slot::First,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Scenario::PlainFirst => "a",
            Scenario::SuperposedFirst => "b",
        }
    }

    pub fn both() -> [Scenario; 2] {
        [Scenario::PlainFirst, Scenario::SuperposedFirst]
    }
}

/// The five-register layout of one round: query/answer pairs for both
/// messages plus Bob's memory of dimension n.
pub fn protocol_layout(db: &Database) -> RegisterLayout {
    RegisterLayout::new([
        (QUERY_1, db.n()),
        (ANSWER_1, db.answer_dim()),
        (QUERY_2, db.n()),
        (ANSWER_2, db.answer_dim()),
        (MEMORY, db.n()),
    ])
    .expect("protocol layout is valid")
}

/// The entangled answer state (|j⟩|answer⟩ + |0⟩|A₀⟩)/√2 on the query/answer
/// pair of `slot`. This is both what honest Bob returns for the superposed
/// query and what Alice's test projects onto.
pub fn entangled_answer_state(
    j: usize,
    answer: usize,
    db: &Database,
    slot: Slot,
) -> Result<StateVector> {
    db.check_query_index(j)?;
    if !db.is_legal_answer(j, answer) {
        return Err(Error::IllegalAnswer { j, answer });
    }
    let layout = RegisterLayout::new([
        (slot.query_register(), db.n()),
        (slot.answer_register(), db.answer_dim()),
    ])?;
    let queried = StateVector::basis_state(
        layout.clone(),
        &[(slot.query_register(), j), (slot.answer_register(), answer)],
    )?;
    let known = StateVector::basis_state(
        layout,
        &[
            (slot.query_register(), 0),
            (slot.answer_register(), db.known_answer()),
        ],
    )?;
    let c = C64::from(std::f64::consts::FRAC_1_SQRT_2);
    StateVector::superpose(&[(c, &queried), (c, &known)])
}

/// Alice's two query messages in send order: the plain query |j⟩ and the
/// superposition (|j⟩+|0⟩)/√2, assigned to slots by the scenario.
pub fn alice_prepare(
    j: usize,
    scenario: Scenario,
    db: &Database,
) -> Result<(StateVector, StateVector)> {
    db.check_query_index(j)?;
    let message = |slot: Slot, superposed: bool| -> Result<StateVector> {
        let layout = RegisterLayout::new([(slot.query_register(), db.n())])?;
        let plain = StateVector::basis_state(layout.clone(), &[(slot.query_register(), j)])?;
        if !superposed {
            return Ok(plain);
        }
        let known = StateVector::basis_state(layout, &[(slot.query_register(), 0)])?;
        let c = C64::from(std::f64::consts::FRAC_1_SQRT_2);
        StateVector::superpose(&[(c, &plain), (c, &known)])
    };
    let first = message(Slot::First, scenario.superposed_slot() == Slot::First)?;
    let second = message(Slot::Second, scenario.superposed_slot() == Slot::Second)?;
    Ok((first, second))
}

/// Honest reply oracle |j⟩|blank⟩ → |j⟩|A_j⟩ on the query/answer pair of
/// `slot`, completed to a permutation unitary (0 ↔ A_j swap on each query
/// block). Requires a deterministic database.
pub fn qram_oracle(db: &Database, slot: Slot) -> Result<UnitaryOp> {
    if !db.is_deterministic() {
        return Err(Error::DeterministicRequired);
    }
    let n = db.n();
    let ad = db.answer_dim();
    let mut matrix: DMatrix<C64> = DMatrix::zeros(n * ad, n * ad);
    for q in 0..n {
        let answer = db.answers(q)?[0];
        for r_in in 0..ad {
            let r_out = if r_in == BLANK_LABEL {
                answer
            } else if r_in == answer {
                BLANK_LABEL
            } else {
                r_in
            };
            matrix[(q * ad + r_out, q * ad + r_in)] = C64::new(1.0, 0.0);
        }
    }
    UnitaryOp::new([slot.query_register(), slot.answer_register()], matrix)
}

/// Closed-form final state of an honest round (for conformance checks):
/// plain slot carries |j⟩|A_j⟩, superposed slot the entangled answer state,
/// memory stays blank.
pub fn honest_final_state(j: usize, db: &Database, scenario: Scenario) -> Result<StateVector> {
    if !db.is_deterministic() {
        return Err(Error::DeterministicRequired);
    }
    db.check_query_index(j)?;
    let answer = db.answers(j)?[0];
    let plain_slot = scenario.plain_slot();
    let plain = StateVector::basis_state(
        RegisterLayout::new([(plain_slot.query_register(), db.n())])?,
        &[(plain_slot.query_register(), j)],
    )?
    .tensor(&StateVector::basis_state(
        RegisterLayout::new([(plain_slot.answer_register(), db.answer_dim())])?,
        &[(plain_slot.answer_register(), answer)],
    )?)?;
    let entangled = entangled_answer_state(j, answer, db, scenario.superposed_slot())?;
    let memory =
        StateVector::basis_state(RegisterLayout::new([(MEMORY, db.n())])?, &[(MEMORY, 0)])?;
    let pair = match scenario {
        Scenario::PlainFirst => plain.tensor(&entangled)?,
        Scenario::SuperposedFirst => entangled.tensor(&plain)?,
    };
    pair.tensor(&memory)
}

/// Global state at the start of a round: Alice's two messages with blank
/// answer registers and blank memory.
pub fn initial_state(j: usize, scenario: Scenario, db: &Database) -> Result<StateVector> {
    let (first, second) = alice_prepare(j, scenario, db)?;
    let blank = |name: &str, dim: usize| -> Result<StateVector> {
        StateVector::basis_state(RegisterLayout::new([(name, dim)])?, &[(name, 0)])
    };
    first
        .tensor(&blank(ANSWER_1, db.answer_dim())?)?
        .tensor(&second)?
        .tensor(&blank(ANSWER_2, db.answer_dim())?)?
        .tensor(&blank(MEMORY, db.n())?)
}

/// Whether both query registers only carry amplitude on {0, j} — the
/// data-privacy support condition.
pub fn query_support_within(state: &StateVector, j: usize) -> Result<bool> {
    for register in [QUERY_1, QUERY_2] {
        let support = state.register_support(register, STRUCTURAL_TOL)?;
        if !support.iter().all(|&digit| digit == 0 || digit == j) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Alice's answer recovery: computational measurement of the plain-slot
/// answer register.
pub fn alice_recover_answer<R: Rng + ?Sized>(
    state: &StateVector,
    scenario: Scenario,
    rng: &mut R,
) -> Result<(usize, StateVector)> {
    let m = measure_computational(state, &[scenario.plain_slot().answer_register()], rng)?;
    Ok((m.outcome, m.post_state))
}

#[derive(Debug, Clone)]
pub struct CheatTestOutcome {
    pub passed: bool,
    /// Exact Born probability of passing, regardless of the sampled outcome.
    pub pass_probability: f64,
    pub post_state: StateVector,
}

fn cheat_test_projectors(
    j: usize,
    recovered_answer: usize,
    db: &Database,
    scenario: Scenario,
) -> Result<[DMatrix<C64>; 2]> {
    let phi = entangled_answer_state(j, recovered_answer, db, scenario.superposed_slot())?;
    let projector = outer_projector(&phi);
    let dim = projector.nrows();
    let complement = DMatrix::identity(dim, dim) - &projector;
    Ok([projector, complement])
}

/// Alice's cheat-sensitive test: projects the superposed slot onto the
/// entangled answer state for the recovered answer. An illegal recovered
/// answer is rejected outright (pass probability 0) without a projective
/// measurement, since there is no legal target state to test against.
pub fn alice_cheat_test<R: Rng + ?Sized>(
    state: &StateVector,
    j: usize,
    recovered_answer: usize,
    db: &Database,
    scenario: Scenario,
    rng: &mut R,
) -> Result<CheatTestOutcome> {
    if !db.is_legal_answer(j, recovered_answer) {
        return Ok(CheatTestOutcome {
            passed: false,
            pass_probability: 0.0,
            post_state: state.clone(),
        });
    }
    let projectors = cheat_test_projectors(j, recovered_answer, db, scenario)?;
    let slot = scenario.superposed_slot();
    let targets = [slot.query_register(), slot.answer_register()];
    let probabilities = born_probabilities(state, &projectors, &targets)?;
    let pass_probability = probabilities[0];
    let passed = rng.gen::<f64>() < pass_probability;
    let chosen = if passed { 0 } else { 1 };
    let projected = state.apply_matrix_on(&projectors[chosen], &targets)?;
    let norm = projected.norm();
    if norm < 1e-12 {
        return Err(Error::ZeroNorm);
    }
    let post_state = StateVector::new(state.layout().clone(), projected / C64::from(norm))?;
    Ok(CheatTestOutcome {
        passed,
        pass_probability,
        post_state,
    })
}

/// One executed round.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Transcript {
    pub j: usize,
    pub scenario: Scenario,
    /// Global state after both replies, before any of Alice's measurements.
    pub final_state: StateVector,
    pub recovered_answer: usize,
    pub plain_query_outcome: usize,
    /// Classical check of the plain slot: measured query equals j and the
    /// measured answer is legal. Reported separately from the projective
    /// test.
    pub plain_check_passed: bool,
    pub test_passed: bool,
    /// Exact Born probability of passing the test in the branch that was
    /// actually reached.
    pub test_pass_probability: f64,
    /// Reduced state of Bob's memory after the full round.
    pub bob_memory: DensityMatrix,
    /// Outcomes of Bob's pre-reply query measurements, when his strategy
    /// performs them (recorded classically).
    pub bob_observed: Vec<usize>,
}

fn validate_strategy(bob: &BobStrategy) -> Result<()> {
    let allowed_first = [QUERY_1, ANSWER_1, MEMORY];
    let allowed_second = [QUERY_2, ANSWER_2, MEMORY];
    for (unitary, allowed) in [
        (&bob.first_reply, allowed_first),
        (&bob.second_reply, allowed_second),
    ] {
        for target in unitary.targets() {
            if !allowed.contains(&target) {
                return Err(Error::StrategyRegisters(format!(
                    "`{target}` is outside the reply's register set {allowed:?}"
                )));
            }
        }
    }
    Ok(())
}

/// Runs one sampled round: prepare, Bob's first reply, Bob's second reply,
/// answer recovery, plain-slot check, cheat test.
///
/// Draw order on `rng`: Bob's Q1 measurement (if any), Bob's Q2 measurement
/// (if any), Alice's plain query register, Alice's plain answer register,
/// the projective test.
pub fn run_round<R: Rng + ?Sized>(
    j: usize,
    db: &Database,
    scenario: Scenario,
    bob: &BobStrategy,
    rng: &mut R,
) -> Result<Transcript> {
    db.check_query_index(j)?;
    validate_strategy(bob)?;
    let mut state = initial_state(j, scenario, db)?;
    let mut bob_observed = Vec::new();

    if bob.measures_incoming_queries {
        let m = measure_computational(&state, &[QUERY_1], rng)?;
        bob_observed.push(m.outcome);
        state = m.post_state;
    }
    state = state.apply_unitary(&bob.first_reply)?;
    if bob.measures_incoming_queries {
        let m = measure_computational(&state, &[QUERY_2], rng)?;
        bob_observed.push(m.outcome);
        state = m.post_state;
    }
    state = state.apply_unitary(&bob.second_reply)?;
    let final_state = state.clone();

    let plain = measure_computational(&state, &[scenario.plain_slot().query_register()], rng)?;
    let plain_query_outcome = plain.outcome;
    state = plain.post_state;
    let (recovered_answer, state) = alice_recover_answer(&state, scenario, rng)?;
    let plain_check_passed = plain_query_outcome == j && db.is_legal_answer(j, recovered_answer);

    let test = alice_cheat_test(&state, j, recovered_answer, db, scenario, rng)?;
    let bob_memory = test.post_state.partial_trace(&[MEMORY])?;

    Ok(Transcript {
        j,
        scenario,
        final_state,
        recovered_answer,
        plain_query_outcome,
        plain_check_passed,
        test_passed: test.passed,
        test_pass_probability: test.pass_probability,
        bob_memory,
        bob_observed,
    })
}

/// One leaf of the exact round enumeration: a choice of outcomes for every
/// measurement up to (not including) the projective test, with its joint
/// probability and the test statistics computed analytically.
#[derive(Debug, Clone)]
pub struct RoundBranch {
    pub probability: f64,
    pub bob_observed: Vec<usize>,
    /// Global state after both replies for this branch of Bob's outcomes.
    pub pre_measurement_state: StateVector,
    pub plain_query_outcome: usize,
    pub recovered_answer: usize,
    pub plain_check_passed: bool,
    pub pass_probability: f64,
    /// State after Alice's plain-slot measurements, before the test.
    pub post_answer_state: StateVector,
    /// Expected memory state over both test outcomes.
    pub bob_memory: DensityMatrix,
}

fn fork_measurement(
    state: &StateVector,
    targets: &[&str],
) -> Result<Vec<(f64, usize, StateVector)>> {
    let distribution = computational_distribution(state, targets)?;
    let mut branches = Vec::new();
    for (outcome, &p) in distribution.iter().enumerate() {
        if p < PROB_PRUNE {
            continue;
        }
        let (probability, post) = collapse_computational(state, targets, outcome)?;
        branches.push((probability, outcome, post));
    }
    Ok(branches)
}

/// Exact (no-RNG) enumeration of every measurement branch of one round.
/// Branch probabilities sum to 1 up to pruning.
pub fn enumerate_round(
    j: usize,
    db: &Database,
    scenario: Scenario,
    bob: &BobStrategy,
) -> Result<Vec<RoundBranch>> {
    db.check_query_index(j)?;
    validate_strategy(bob)?;
    let initial = initial_state(j, scenario, db)?;

    let mut evolved: Vec<(f64, StateVector, Vec<usize>)> = vec![(1.0, initial, Vec::new())];
    if bob.measures_incoming_queries {
        let mut next = Vec::new();
        for (p, state, observed) in &evolved {
            for (pq, outcome, post) in fork_measurement(state, &[QUERY_1])? {
                let mut observed = observed.clone();
                observed.push(outcome);
                next.push((p * pq, post, observed));
            }
        }
        evolved = next;
    }
    for (_, state, _) in &mut evolved {
        *state = state.apply_unitary(&bob.first_reply)?;
    }
    if bob.measures_incoming_queries {
        let mut next = Vec::new();
        for (p, state, observed) in &evolved {
            for (pq, outcome, post) in fork_measurement(state, &[QUERY_2])? {
                let mut observed = observed.clone();
                observed.push(outcome);
                next.push((p * pq, post, observed));
            }
        }
        evolved = next;
    }
    for (_, state, _) in &mut evolved {
        *state = state.apply_unitary(&bob.second_reply)?;
    }

    let superposed = scenario.superposed_slot();
    let test_targets = [superposed.query_register(), superposed.answer_register()];
    let memory_layout = RegisterLayout::new([(MEMORY, db.n())])?;

    let mut branches = Vec::new();
    for (p_bob, state, bob_observed) in evolved {
        let pre_measurement_state = state.clone();
        for (pq, plain_query_outcome, state_q) in
            fork_measurement(&state, &[scenario.plain_slot().query_register()])?
        {
            for (pr, recovered_answer, post_answer_state) in
                fork_measurement(&state_q, &[scenario.plain_slot().answer_register()])?
            {
                let probability = p_bob * pq * pr;
                if probability < PROB_PRUNE {
                    continue;
                }
                let plain_check_passed =
                    plain_query_outcome == j && db.is_legal_answer(j, recovered_answer);

                let (pass_probability, bob_memory) = if db.is_legal_answer(j, recovered_answer) {
                    let projectors = cheat_test_projectors(j, recovered_answer, db, scenario)?;
                    let probabilities =
                        born_probabilities(&post_answer_state, &projectors, &test_targets)?;
                    let mut expected: DMatrix<C64> = DMatrix::zeros(db.n(), db.n());
                    for (projector, &weight) in projectors.iter().zip(&probabilities) {
                        if weight < PROB_PRUNE {
                            continue;
                        }
                        let projected =
                            post_answer_state.apply_matrix_on(projector, &test_targets)?;
                        let norm = projected.norm();
                        let post = StateVector::new_unchecked(
                            post_answer_state.layout().clone(),
                            projected / C64::from(norm),
                        );
                        expected += post.partial_trace(&[MEMORY])?.matrix() * C64::from(weight);
                    }
                    (
                        probabilities[0],
                        DensityMatrix::new(memory_layout.clone(), expected)?,
                    )
                } else {
                    (0.0, post_answer_state.partial_trace(&[MEMORY])?)
                };

                branches.push(RoundBranch {
                    probability,
                    bob_observed: bob_observed.clone(),
                    pre_measurement_state: pre_measurement_state.clone(),
                    plain_query_outcome,
                    recovered_answer,
                    plain_check_passed,
                    pass_probability,
                    post_answer_state,
                    bob_memory,
                });
            }
        }
    }
    Ok(branches)
}

/// Born-averaged memory state over all branches of one round.
pub fn averaged_memory(branches: &[RoundBranch], db: &Database) -> Result<DensityMatrix> {
    let layout = RegisterLayout::new([(MEMORY, db.n())])?;
    let mut matrix: DMatrix<C64> = DMatrix::zeros(db.n(), db.n());
    let mut total = 0.0;
    for branch in branches {
        matrix += branch.bob_memory.matrix() * C64::from(branch.probability);
        total += branch.probability;
    }
    if total <= 0.0 {
        return Err(Error::ZeroNorm);
    }
    DensityMatrix::new(layout, matrix / C64::from(total))
}
