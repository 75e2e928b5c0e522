//! Projective and computational-basis measurements.
//!
//! Sampling always consumes a caller-provided random stream; the exact Born
//! probabilities are available separately so exact-mode consumers never touch
//! an RNG.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::density::hermiticity_defect;
use super::layout::SubsetIndexer;
use super::state::StateVector;
use super::{C64, STRUCTURAL_TOL};
use crate::error::{Error, Result};

/// Outcome of a sampled projective measurement.
#[derive(Debug, Clone)]
pub struct MeasurementOutcome {
    pub outcome: usize,
    /// Exact Born probability of the sampled outcome.
    pub probability: f64,
    pub post_state: StateVector,
}

/// Exact Born probabilities of a complete projector set on `targets`.
pub fn born_probabilities(
    state: &StateVector,
    projectors: &[DMatrix<C64>],
    targets: &[&str],
) -> Result<Vec<f64>> {
    let idx = SubsetIndexer::new(state.layout(), targets)?;
    validate_projectors(projectors, idx.target_dim)?;
    projectors
        .iter()
        .map(|p| {
            let projected = state.apply_matrix_on(p, targets)?;
            Ok(state.amplitudes().dotc(&projected).re.max(0.0))
        })
        .collect()
}

/// Samples one outcome of a complete projector set with Born probabilities
/// and collapses the state.
pub fn measure_projective<R: Rng + ?Sized>(
    state: &StateVector,
    projectors: &[DMatrix<C64>],
    targets: &[&str],
    rng: &mut R,
) -> Result<MeasurementOutcome> {
    let probabilities = born_probabilities(state, projectors, targets)?;
    let outcome = sample_index(&probabilities, rng);
    let projected = state.apply_matrix_on(&projectors[outcome], targets)?;
    let probability = probabilities[outcome];
    if probability < 1e-12 {
        return Err(Error::ZeroNorm);
    }
    let post = renormalize(state, projected)?;
    Ok(MeasurementOutcome {
        outcome,
        probability,
        post_state: post,
    })
}

/// Exact distribution of a computational-basis measurement on `targets`.
/// Outcome indices are big-endian over the target list.
pub fn computational_distribution(state: &StateVector, targets: &[&str]) -> Result<Vec<f64>> {
    let idx = SubsetIndexer::new(state.layout(), targets)?;
    let amps = state.amplitudes();
    let mut probabilities = vec![0.0f64; idx.target_dim];
    for t in 0..idx.target_dim {
        for r in 0..idx.rest_dim {
            probabilities[t] += amps[idx.global(t, r)].norm_sqr();
        }
    }
    Ok(probabilities)
}

/// Collapses onto one computational outcome of `targets`, returning its exact
/// probability and the renormalized post state. Errors if the outcome has
/// (near-)zero probability.
pub fn collapse_computational(
    state: &StateVector,
    targets: &[&str],
    outcome: usize,
) -> Result<(f64, StateVector)> {
    let idx = SubsetIndexer::new(state.layout(), targets)?;
    if outcome >= idx.target_dim {
        return Err(Error::DimensionMismatch(format!(
            "outcome {outcome} out of range for subspace dimension {}",
            idx.target_dim
        )));
    }
    let amps = state.amplitudes();
    let mut projected: DVector<C64> = DVector::zeros(amps.len());
    let mut probability = 0.0f64;
    for r in 0..idx.rest_dim {
        let g = idx.global(outcome, r);
        projected[g] = amps[g];
        probability += amps[g].norm_sqr();
    }
    if probability < 1e-12 {
        return Err(Error::ZeroNorm);
    }
    let post = renormalize(state, projected)?;
    Ok((probability, post))
}

/// Samples a computational-basis measurement on `targets`.
pub fn measure_computational<R: Rng + ?Sized>(
    state: &StateVector,
    targets: &[&str],
    rng: &mut R,
) -> Result<MeasurementOutcome> {
    let probabilities = computational_distribution(state, targets)?;
    let outcome = sample_index(&probabilities, rng);
    let (probability, post_state) = collapse_computational(state, targets, outcome)?;
    Ok(MeasurementOutcome {
        outcome,
        probability,
        post_state,
    })
}

/// The rank-one projector |ψ⟩⟨ψ| of a (sub-layout) state.
pub fn outer_projector(state: &StateVector) -> DMatrix<C64> {
    let amps = state.amplitudes();
    let dim = amps.len();
    DMatrix::from_fn(dim, dim, |r, c| amps[r] * amps[c].conj())
}

/// The full computational projector set on `targets` (one per basis index).
pub fn computational_projectors(state_layout_dim: usize) -> Vec<DMatrix<C64>> {
    (0..state_layout_dim)
        .map(|k| {
            let mut p = DMatrix::zeros(state_layout_dim, state_layout_dim);
            p[(k, k)] = C64::new(1.0, 0.0);
            p
        })
        .collect()
}

fn validate_projectors(projectors: &[DMatrix<C64>], dim: usize) -> Result<()> {
    if projectors.is_empty() {
        return Err(Error::InvalidProjectors("empty projector set".into()));
    }
    let mut sum: DMatrix<C64> = DMatrix::zeros(dim, dim);
    for (k, p) in projectors.iter().enumerate() {
        if p.nrows() != dim || p.ncols() != dim {
            return Err(Error::InvalidProjectors(format!(
                "projector {k} is {}x{}, expected {dim}x{dim}",
                p.nrows(),
                p.ncols()
            )));
        }
        let herm = hermiticity_defect(p);
        if herm > STRUCTURAL_TOL {
            return Err(Error::InvalidProjectors(format!(
                "projector {k} is not Hermitian (defect {herm:.3e})"
            )));
        }
        let idem = (p * p - p).iter().map(|x| x.norm()).fold(0.0, f64::max);
        if idem > STRUCTURAL_TOL {
            return Err(Error::InvalidProjectors(format!(
                "projector {k} is not idempotent (defect {idem:.3e})"
            )));
        }
        sum += p;
    }
    let completeness = (&sum - DMatrix::identity(dim, dim))
        .iter()
        .map(|x| x.norm())
        .fold(0.0, f64::max);
    if completeness > STRUCTURAL_TOL {
        return Err(Error::InvalidProjectors(format!(
            "projectors do not sum to the identity (defect {completeness:.3e})"
        )));
    }
    Ok(())
}

fn renormalize(reference: &StateVector, amplitudes: DVector<C64>) -> Result<StateVector> {
    let norm = amplitudes.norm();
    if norm < 1e-12 {
        return Err(Error::ZeroNorm);
    }
    Ok(StateVector::new_unchecked(
        reference.layout().clone(),
        amplitudes / C64::from(norm),
    ))
}

fn sample_index<R: Rng + ?Sized>(probabilities: &[f64], rng: &mut R) -> usize {
    let draw: f64 = rng.gen::<f64>() * probabilities.iter().sum::<f64>();
    let mut cumulative = 0.0;
    for (k, p) in probabilities.iter().enumerate() {
        cumulative += p;
        if draw < cumulative {
            return k;
        }
    }
    // Fall back to the last outcome with nonzero probability.
    probabilities
        .iter()
        .rposition(|p| *p > 0.0)
        .unwrap_or(probabilities.len() - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::RegisterLayout;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn basis_state_measures_deterministically() {
        let layout = RegisterLayout::new([("Q", 3), ("R", 5)]).unwrap();
        let s = StateVector::basis_state(layout, &[("Q", 1), ("R", 3)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = measure_computational(&s, &["R"], &mut rng).unwrap();
        assert_eq!(m.outcome, 3);
        assert!((m.probability - 1.0).abs() < 1e-12);
        assert!(m.post_state.matches_up_to_phase(&s, 1e-12).unwrap());
    }

    #[test]
    fn uniform_superposition_has_half_half_distribution() {
        let layout = RegisterLayout::new([("Q", 2)]).unwrap();
        let zero = StateVector::basis_state(layout.clone(), &[("Q", 0)]).unwrap();
        let one = StateVector::basis_state(layout, &[("Q", 1)]).unwrap();
        let c = C64::new(FRAC_1_SQRT_2, 0.0);
        let s = StateVector::superpose(&[(c, &zero), (c, &one)]).unwrap();
        let probs = computational_distribution(&s, &["Q"]).unwrap();
        assert!((probs[0] - 0.5).abs() < 1e-12);
        assert!((probs[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn eigenstate_passes_its_own_projector() {
        let layout = RegisterLayout::new([("Q", 2), ("R", 2)]).unwrap();
        let c = C64::new(FRAC_1_SQRT_2, 0.0);
        let a = StateVector::basis_state(layout.clone(), &[("Q", 0), ("R", 0)]).unwrap();
        let b = StateVector::basis_state(layout, &[("Q", 1), ("R", 1)]).unwrap();
        let phi = StateVector::superpose(&[(c, &a), (c, &b)]).unwrap();
        let p = outer_projector(&phi);
        let dim = p.nrows();
        let complement = DMatrix::identity(dim, dim) - &p;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let m = measure_projective(&phi, &[p, complement], &["Q", "R"], &mut rng).unwrap();
        assert_eq!(m.outcome, 0);
        assert!((m.probability - 1.0).abs() < 1e-12);
        assert!(m.post_state.matches_up_to_phase(&phi, 1e-12).unwrap());
    }

    #[test]
    fn incomplete_projector_sets_are_rejected() {
        let layout = RegisterLayout::new([("Q", 2)]).unwrap();
        let s = StateVector::basis_state(layout, &[("Q", 0)]).unwrap();
        let mut p = DMatrix::zeros(2, 2);
        p[(0, 0)] = C64::new(1.0, 0.0);
        assert!(matches!(
            born_probabilities(&s, &[p], &["Q"]),
            Err(Error::InvalidProjectors(_))
        ));
    }

    #[test]
    fn non_idempotent_projectors_are_rejected() {
        let layout = RegisterLayout::new([("Q", 2)]).unwrap();
        let s = StateVector::basis_state(layout, &[("Q", 0)]).unwrap();
        let half = DMatrix::from_diagonal_element(2, 2, C64::new(0.5, 0.0));
        assert!(matches!(
            born_probabilities(&s, &[half.clone(), half], &["Q"]),
            Err(Error::InvalidProjectors(_))
        ));
    }

    #[test]
    fn projective_and_computational_routes_agree() {
        let layout = RegisterLayout::new([("Q", 3), ("R", 2)]).unwrap();
        let a = StateVector::basis_state(layout.clone(), &[("Q", 0), ("R", 1)]).unwrap();
        let b = StateVector::basis_state(layout.clone(), &[("Q", 2), ("R", 0)]).unwrap();
        let s =
            StateVector::superpose(&[(C64::new(0.6, 0.0), &a), (C64::new(0.0, 0.8), &b)]).unwrap();
        let direct = computational_distribution(&s, &["Q"]).unwrap();
        let projectors = computational_projectors(3);
        let via_projectors = born_probabilities(&s, &projectors, &["Q"]).unwrap();
        for (d, p) in direct.iter().zip(via_projectors) {
            assert!((d - p).abs() < 1e-12);
        }
        let total: f64 = direct.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
