//! Purification-level bit commitment and the delayed-choice attack.
//!
//! A scheme is the pair of global pure states at the end of the commit phase
//! for b = 0 and b = 1, with a designated set of registers held by the
//! committer. Perfect concealment means the receiver-side reduced states
//! coincide — and then a committer-local unitary rotates either commitment
//! into the other, so the scheme cannot also be binding.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{
    local_conversion_unitary, trace_distance, RegisterLayout, StateVector, UnitaryOp, C64,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "CommitmentSchemeJson", into = "CommitmentSchemeJson")]
pub struct CommitmentScheme {
    layout: RegisterLayout,
    committer_registers: Vec<String>,
    psi0: StateVector,
    psi1: StateVector,
}

impl CommitmentScheme {
    pub fn new(
        committer_registers: Vec<String>,
        psi0: StateVector,
        psi1: StateVector,
    ) -> Result<Self> {
        if psi0.layout() != psi1.layout() {
            return Err(Error::LayoutMismatch);
        }
        let layout = psi0.layout().clone();
        let names: Vec<&str> = committer_registers.iter().map(String::as_str).collect();
        let positions = layout.positions_of(&names)?;
        if positions.is_empty() || positions.len() == layout.len() {
            return Err(Error::TrivialBipartition);
        }
        Ok(Self {
            layout,
            committer_registers,
            psi0,
            psi1,
        })
    }

    /// Bell-pair toy scheme: commit states (|00⟩+|11⟩)/√2 and (|01⟩+|10⟩)/√2
    /// with the committer holding the first qubit. Perfectly concealing, and
    /// the conversion unitary is X up to phase.
    pub fn builtin_bell() -> Self {
        let layout = RegisterLayout::new([("A", 2), ("C", 2)]).unwrap();
        let c = C64::from(std::f64::consts::FRAC_1_SQRT_2);
        let b = |a: usize, ch: usize| {
            StateVector::basis_state(layout.clone(), &[("A", a), ("C", ch)]).unwrap()
        };
        let psi0 = StateVector::superpose(&[(c, &b(0, 0)), (c, &b(1, 1))]).unwrap();
        let psi1 = StateVector::superpose(&[(c, &b(0, 1)), (c, &b(1, 0))]).unwrap();
        CommitmentScheme::new(vec!["A".into()], psi0, psi1).unwrap()
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn committer_registers(&self) -> Vec<&str> {
        self.committer_registers
            .iter()
            .map(String::as_str)
            .collect()
    }

    pub fn state_for(&self, bit: u8) -> &StateVector {
        if bit == 0 {
            &self.psi0
        } else {
            &self.psi1
        }
    }

    /// Receiver-side registers (everything outside the committer's machine).
    pub fn receiver_registers(&self) -> Vec<String> {
        let names: Vec<&str> = self.committer_registers();
        self.layout
            .complement_of(&names)
            .expect("validated at construction")
    }
}

/// Trace distance between the receiver-side reduced states of the two
/// commitments; 0 means perfectly concealing.
pub fn concealing_gap(scheme: &CommitmentScheme) -> Result<f64> {
    let receiver = scheme.receiver_registers();
    let names: Vec<&str> = receiver.iter().map(String::as_str).collect();
    let r0 = scheme.psi0.partial_trace(&names)?;
    let r1 = scheme.psi1.partial_trace(&names)?;
    trace_distance(&r0, &r1)
}

#[derive(Debug, Clone)]
pub struct DelayedChoiceAttack {
    /// Unitary on the committer's registers rotating the committed state
    /// into the opened state.
    pub unitary: UnitaryOp,
    /// |⟨open| U commit⟩|²; 1 within 1e-8 whenever the attack succeeds.
    pub opening_fidelity: f64,
    pub concealing_gap: f64,
}

/// Commits to `commit_as` and opens as `open_as` by rotating the committer's
/// side. Requires the scheme to be concealing within `epsilon_eq`, otherwise
/// reports the gap via [`Error::ReducedStatesDiffer`].
pub fn delayed_choice_attack(
    scheme: &CommitmentScheme,
    commit_as: u8,
    open_as: u8,
    epsilon_eq: f64,
) -> Result<DelayedChoiceAttack> {
    let gap = concealing_gap(scheme)?;
    if gap > epsilon_eq {
        return Err(Error::ReducedStatesDiffer {
            gap,
            tolerance: epsilon_eq,
        });
    }
    let committed = scheme.state_for(commit_as);
    let opened = scheme.state_for(open_as);
    let local: Vec<&str> = scheme.committer_registers();
    let conversion = local_conversion_unitary(committed, opened, &local, epsilon_eq)?;
    Ok(DelayedChoiceAttack {
        unitary: conversion.unitary,
        opening_fidelity: conversion.fidelity * conversion.fidelity,
        concealing_gap: gap,
    })
}

#[derive(Serialize, Deserialize)]
struct CommitmentSchemeJson {
    layout: RegisterLayout,
    committer_registers: Vec<String>,
    psi0: Vec<(f64, f64)>,
    psi1: Vec<(f64, f64)>,
}

impl TryFrom<CommitmentSchemeJson> for CommitmentScheme {
    type Error = Error;

    fn try_from(raw: CommitmentSchemeJson) -> Result<Self> {
        let to_state = |amps: &[(f64, f64)]| -> Result<StateVector> {
            let amplitudes = nalgebra::DVector::from_iterator(
                amps.len(),
                amps.iter().map(|(re, im)| C64::new(*re, *im)),
            );
            StateVector::new(raw.layout.clone(), amplitudes)
        };
        let psi0 = to_state(&raw.psi0)?;
        let psi1 = to_state(&raw.psi1)?;
        CommitmentScheme::new(raw.committer_registers, psi0, psi1)
    }
}

impl From<CommitmentScheme> for CommitmentSchemeJson {
    fn from(scheme: CommitmentScheme) -> Self {
        let to_amps =
            |state: &StateVector| state.amplitudes().iter().map(|a| (a.re, a.im)).collect();
        CommitmentSchemeJson {
            layout: scheme.layout.clone(),
            committer_registers: scheme.committer_registers.clone(),
            psi0: to_amps(&scheme.psi0),
            psi1: to_amps(&scheme.psi1),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::random::{random_purification_pair, random_spectrum};
    use crate::quantum::EPSILON_EQ;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bell_scheme_is_perfectly_concealing() {
        let scheme = CommitmentScheme::builtin_bell();
        assert!(concealing_gap(&scheme).unwrap() < 1e-12);
    }

    #[test]
    fn revealing_scheme_has_unit_gap() {
        let layout = RegisterLayout::new([("A", 2), ("C", 2)]).unwrap();
        let psi0 = StateVector::basis_state(layout.clone(), &[("A", 0), ("C", 0)]).unwrap();
        let psi1 = StateVector::basis_state(layout, &[("A", 1), ("C", 1)]).unwrap();
        let scheme = CommitmentScheme::new(vec!["A".into()], psi0, psi1).unwrap();
        assert!((concealing_gap(&scheme).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gap_is_symmetric_under_bit_swap() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let spectrum = random_spectrum(2, false, &mut rng);
        let (psi0, psi1) =
            random_purification_pair(("A", 3), ("C", 2), &spectrum, &mut rng).unwrap();
        let forward = CommitmentScheme::new(vec!["A".into()], psi0.clone(), psi1.clone()).unwrap();
        let backward = CommitmentScheme::new(vec!["A".into()], psi1, psi0).unwrap();
        let g0 = concealing_gap(&forward).unwrap();
        let g1 = concealing_gap(&backward).unwrap();
        assert!((g0 - g1).abs() < 1e-12);
        assert!((0.0..=1.0).contains(&g0));
    }

    #[test]
    fn bell_attack_flips_the_commitment_with_x() {
        let scheme = CommitmentScheme::builtin_bell();
        let attack = delayed_choice_attack(&scheme, 0, 1, EPSILON_EQ).unwrap();
        assert!(attack.opening_fidelity > 1.0 - 1e-10);
        let m = attack.unitary.matrix();
        assert!((m[(0, 1)].norm() - 1.0).abs() < 1e-10);
        assert!((m[(1, 0)].norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn same_bit_opening_succeeds_trivially() {
        let scheme = CommitmentScheme::builtin_bell();
        let attack = delayed_choice_attack(&scheme, 1, 1, EPSILON_EQ).unwrap();
        assert!(attack.opening_fidelity > 1.0 - 1e-10);
    }

    #[test]
    fn non_concealing_scheme_reports_gap() {
        let layout = RegisterLayout::new([("A", 2), ("C", 2)]).unwrap();
        let psi0 = StateVector::basis_state(layout.clone(), &[("A", 0), ("C", 0)]).unwrap();
        let psi1 = StateVector::basis_state(layout, &[("A", 1), ("C", 1)]).unwrap();
        let scheme = CommitmentScheme::new(vec!["A".into()], psi0, psi1).unwrap();
        match delayed_choice_attack(&scheme, 0, 1, EPSILON_EQ) {
            Err(Error::ReducedStatesDiffer { gap, .. }) => assert!(gap > 0.9),
            other => panic!("expected ReducedStatesDiffer, got {other:?}"),
        }
    }

    #[test]
    fn random_concealing_schemes_open_both_ways() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        for degenerate in [false, true] {
            let spectrum = random_spectrum(3, degenerate, &mut rng);
            let (psi0, psi1) =
                random_purification_pair(("A", 4), ("C", 3), &spectrum, &mut rng).unwrap();
            let scheme = CommitmentScheme::new(vec!["A".into()], psi0, psi1).unwrap();
            for (commit, open) in [(0u8, 1u8), (1, 0)] {
                let attack = delayed_choice_attack(&scheme, commit, open, EPSILON_EQ).unwrap();
                assert!(attack.opening_fidelity > 1.0 - 1e-8);
            }
        }
    }

    #[test]
    fn scheme_serde_round_trip() {
        let scheme = CommitmentScheme::builtin_bell();
        let json = serde_json::to_string(&scheme).unwrap();
        let back: CommitmentScheme = serde_json::from_str(&json).unwrap();
        assert!(concealing_gap(&back).unwrap() < 1e-12);
        assert_eq!(back.committer_registers(), vec!["A"]);
    }
}
