//! Purification conversion: a unitary on a local register set that maps one
//! pure state to another whenever their reduced states on the complement
//! agree. This is the primitive behind the delayed-choice and rotation
//! attacks.

use nalgebra::{DMatrix, DVector};

use super::density::trace_distance;
use super::eigen::singular_decomposition;
use super::state::StateVector;
use super::unitary::{complete_orthonormal, UnitaryOp};
use super::{C64, DERIVED_TOL};
use crate::error::{Error, Result};

/// Default budget for "the reduced states are equal".
pub const EPSILON_EQ: f64 = 1e-8;

/// Schmidt coefficients closer than this share one degenerate block.
const DEGENERACY_TOL: f64 = 1e-9;

/// A successful conversion: `unitary` acts on the local side only and
/// `fidelity` = |⟨target| U source⟩| is 1 within 1e-8.
#[derive(Debug, Clone)]
pub struct LocalConversion {
    pub unitary: UnitaryOp,
    pub fidelity: f64,
}

/// Builds a unitary on `local` with (U ⊗ I)|source⟩ = |target⟩ up to global
/// phase.
///
/// Preconditions: the reduced states on the complement of `local` agree
/// within trace distance `epsilon_eq` (otherwise
/// [`Error::ReducedStatesDiffer`] reports the gap).
///
/// Construction: Schmidt-decompose both states against (local | rest), pair
/// Schmidt vectors of equal coefficients, align bases inside degenerate
/// coefficient blocks by the unitary polar factor of the right-side overlap
/// matrix, and complete to a full unitary on the orthogonal complement.
pub fn local_conversion_unitary(
    source: &StateVector,
    target: &StateVector,
    local: &[&str],
    epsilon_eq: f64,
) -> Result<LocalConversion> {
    if source.layout() != target.layout() {
        return Err(Error::LayoutMismatch);
    }
    let layout = source.layout();
    let rest: Vec<String> = layout.complement_of(local)?;
    if local.is_empty() || rest.is_empty() {
        return Err(Error::TrivialBipartition);
    }
    let rest_names: Vec<&str> = rest.iter().map(String::as_str).collect();

    let reduced_source = source.partial_trace(&rest_names)?;
    let reduced_target = target.partial_trace(&rest_names)?;
    let gap = trace_distance(&reduced_source, &reduced_target)?;
    if gap > epsilon_eq {
        return Err(Error::ReducedStatesDiffer {
            gap,
            tolerance: epsilon_eq,
        });
    }

    let sd_source = source.schmidt_decompose(local)?;
    let sd_target = target.schmidt_decompose(local)?;
    let rank = sd_source.rank().min(sd_target.rank());
    let local_dim: usize = layout.sub_layout(local)?.total_dim();

    let mut inputs = Vec::with_capacity(rank);
    let mut images = Vec::with_capacity(rank);
    for block in degenerate_blocks(&sd_source.coefficients()[..rank]) {
        let size = block.len();
        let mut overlap = DMatrix::zeros(size, size);
        for (bi, &i) in block.iter().enumerate() {
            for (bk, &k) in block.iter().enumerate() {
                overlap[(bi, bk)] = sd_source.right_basis()[i].dotc(&sd_target.right_basis()[k]);
            }
        }
        let aligned = polar_unitary_factor(&overlap);
        for (bi, &i) in block.iter().enumerate() {
            inputs.push(sd_source.left_basis()[i].clone());
            let mut image: DVector<C64> = DVector::zeros(local_dim);
            for (bk, &k) in block.iter().enumerate() {
                image += &sd_target.left_basis()[k] * aligned[(bi, bk)];
            }
            images.push(image);
        }
    }

    let unitary = UnitaryOp::from_partial_isometry(
        local.iter().map(|s| s.to_string()),
        local_dim,
        &inputs,
        &images,
    )?;
    let converted = source.apply_unitary(&unitary)?;
    let fidelity = target.overlap_magnitude(&converted)?;
    if fidelity < 1.0 - DERIVED_TOL {
        return Err(Error::ConversionFidelity { fidelity });
    }
    Ok(LocalConversion { unitary, fidelity })
}

/// Groups indices of a nonincreasing coefficient list into blocks chained by
/// `DEGENERACY_TOL` adjacency.
fn degenerate_blocks(coefficients: &[f64]) -> Vec<Vec<usize>> {
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for (i, &c) in coefficients.iter().enumerate() {
        match blocks.last_mut() {
            Some(block)
                if (coefficients[*block.last().expect("nonempty block")] - c).abs()
                    <= DEGENERACY_TOL =>
            {
                block.push(i);
            }
            _ => blocks.push(vec![i]),
        }
    }
    blocks
}

/// Unitary factor Q = U V† of the polar decomposition M = QH. Singular
/// directions (σ ≈ 0) are completed by Gram-Schmidt, which picks one of the
/// equally valid polar factors.
fn polar_unitary_factor(matrix: &DMatrix<C64>) -> DMatrix<C64> {
    let dim = matrix.nrows();
    let (_, left, right) = singular_decomposition(matrix, 1e-12);
    let u_full = complete_orthonormal(dim, &left).expect("svd columns are orthonormal");
    let v_full = complete_orthonormal(dim, &right).expect("svd columns are orthonormal");
    u_full * v_full.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::RegisterLayout;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn two_qubit_layout() -> RegisterLayout {
        RegisterLayout::new([("A", 2), ("B", 2)]).unwrap()
    }

    fn bell(amps: [(usize, usize); 2], signs: [f64; 2]) -> StateVector {
        let layout = two_qubit_layout();
        let c0 = C64::new(signs[0] * FRAC_1_SQRT_2, 0.0);
        let c1 = C64::new(signs[1] * FRAC_1_SQRT_2, 0.0);
        let s0 = StateVector::basis_state(layout.clone(), &[("A", amps[0].0), ("B", amps[0].1)])
            .unwrap();
        let s1 = StateVector::basis_state(layout, &[("A", amps[1].0), ("B", amps[1].1)]).unwrap();
        StateVector::superpose(&[(c0, &s0), (c1, &s1)]).unwrap()
    }

    #[test]
    fn converts_between_bell_states_with_local_x() {
        let psi0 = bell([(0, 0), (1, 1)], [1.0, 1.0]);
        let psi1 = bell([(0, 1), (1, 0)], [1.0, 1.0]);
        let conversion = local_conversion_unitary(&psi0, &psi1, &["A"], EPSILON_EQ).unwrap();
        assert!(conversion.fidelity > 1.0 - 1e-10);
        // The conversion is X on A up to phase: off-diagonal magnitudes 1.
        let m = conversion.unitary.matrix();
        assert!((m[(0, 1)].norm() - 1.0).abs() < 1e-10);
        assert!((m[(1, 0)].norm() - 1.0).abs() < 1e-10);
        assert!(m[(0, 0)].norm() < 1e-10);
    }

    #[test]
    fn identical_states_convert_with_identity_class_unitary() {
        let psi = bell([(0, 0), (1, 1)], [1.0, 1.0]);
        let conversion = local_conversion_unitary(&psi, &psi, &["A"], EPSILON_EQ).unwrap();
        assert!(conversion.fidelity > 1.0 - 1e-10);
    }

    #[test]
    fn distinguishable_reduced_states_are_rejected_with_gap() {
        let layout = two_qubit_layout();
        let psi0 = StateVector::basis_state(layout.clone(), &[("A", 0), ("B", 0)]).unwrap();
        let psi1 = StateVector::basis_state(layout, &[("A", 1), ("B", 1)]).unwrap();
        match local_conversion_unitary(&psi0, &psi1, &["A"], EPSILON_EQ) {
            Err(Error::ReducedStatesDiffer { gap, .. }) => assert!((gap - 1.0).abs() < 1e-10),
            other => panic!("expected ReducedStatesDiffer, got {other:?}"),
        }
    }

    #[test]
    fn degenerate_block_grouping_chains_close_coefficients() {
        let blocks = degenerate_blocks(&[0.8, 0.8 - 5e-10, 0.5, 0.3, 0.3]);
        assert_eq!(blocks, vec![vec![0, 1], vec![2], vec![3, 4]]);
    }

    #[test]
    fn polar_factor_of_unitary_is_itself() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(0.0, 0.0),
                C64::new(0.0, 1.0),
                C64::new(0.0, -1.0),
                C64::new(0.0, 0.0),
            ],
        );
        let q = polar_unitary_factor(&m);
        assert!((q - m).iter().map(|x| x.norm()).fold(0.0, f64::max) < 1e-12);
    }
}
