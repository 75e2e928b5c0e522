//! Constructive no-go machinery: the delayed-choice attack on purification-
//! level bit commitment, the rotation attack on one-sided two-party
//! computation, and the reduction adapters between private queries,
//! two-party function evaluation, and oblivious transfer.

pub mod commitment;
pub mod reductions;

pub use commitment::{
    concealing_gap, delayed_choice_attack, CommitmentScheme, DelayedChoiceAttack,
};
pub use reductions::{
    ot_as_two_party, pair_index, rotation_attack, spqpq_as_two_party, two_party_via_spqpq,
    OtInstance, RotationAttack, SpqpqEncoding, TwoPartyFunction, ENCODED_KNOWN_ANSWER,
};
