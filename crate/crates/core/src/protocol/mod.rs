//! The private-query protocol round: databases, Alice's preparation and
//! checks, Bob's reply interface, and sampled/exact execution.

pub mod database;
pub mod round;

pub use database::{Database, BLANK_LABEL};
pub use round::{
    alice_cheat_test, alice_prepare, alice_recover_answer, averaged_memory, entangled_answer_state,
    enumerate_round, honest_final_state, initial_state, protocol_layout, qram_oracle,
    query_support_within, run_round, CheatTestOutcome, RoundBranch, Scenario, Slot, Transcript,
    ANSWER_1, ANSWER_2, MEMORY, QUERY_1, QUERY_2,
};
