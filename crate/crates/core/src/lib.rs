//! An exact-simulation laboratory for quantum private queries (QPQ) and its
//! probabilistic variants.
//!
//! The crate simulates the protocol at the statevector level and makes its
//! security claims checkable as numbers:
//!
//! - [`quantum`]: dense state algebra over named registers — unitaries on
//!   subsystems, partial trace, Schmidt decomposition, projective
//!   measurement, trace distance, and the purification-conversion unitary.
//! - [`protocol`]: the QPQ round as an explicit state machine — Alice's two
//!   queries, Bob's reply interface, answer recovery and the cheat-sensitive
//!   test.
//! - [`adversary`]: cheating strategies for Bob — the intercept attack the
//!   test catches, and the memory-entangling attack on probabilistic
//!   databases that passes the test with certainty.
//! - [`nogo`]: a purification-level bit-commitment model with the
//!   delayed-choice attack, the unitary rotation attack on one-sided
//!   two-party computation, and the reduction adapters tying SPIR over
//!   probabilistic databases to two-party function evaluation and oblivious
//!   transfer.
//! - [`harness`]: seeded experiment runner (exact Born probabilities or
//!   sampled trials), requirement audits, and JSON reports.

pub mod adversary;
pub mod error;
pub mod harness;
pub mod nogo;
pub mod protocol;
pub mod quantum;

pub use error::{Error, Result};
