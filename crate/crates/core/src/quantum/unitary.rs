//! Unitary operators on register subsets, with completion of partially
//! defined operators to full unitaries.

use nalgebra::{DMatrix, DVector};

use super::state::StateVector;
use super::{C64, STRUCTURAL_TOL};
use crate::error::{Error, Result};

/// Unitary acting on an ordered subset of registers; the matrix is indexed
/// big-endian over the target list.
#[derive(Debug, Clone)]
pub struct UnitaryOp {
    targets: Vec<String>,
    matrix: DMatrix<C64>,
}

impl UnitaryOp {
    /// Validates U†U = I within 1e-10.
    pub fn new<S: Into<String>>(
        targets: impl IntoIterator<Item = S>,
        matrix: DMatrix<C64>,
    ) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "unitary matrix must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let defect = unitarity_defect(&matrix);
        if defect > STRUCTURAL_TOL {
            return Err(Error::NotUnitary(defect));
        }
        Ok(Self {
            targets: targets.into_iter().map(Into::into).collect(),
            matrix,
        })
    }

    pub fn identity<S: Into<String>>(
        targets: impl IntoIterator<Item = S>,
        dim: usize,
    ) -> Result<Self> {
        Self::new(targets, DMatrix::identity(dim, dim))
    }

    /// Extends a partial isometry (orthonormal `inputs` mapped to orthonormal
    /// `images`) to a full unitary, filling the orthogonal complement by
    /// Gram-Schmidt. The result satisfies `U input_k = image_k` exactly on the
    /// defined subspace.
    pub fn from_partial_isometry<S: Into<String>>(
        targets: impl IntoIterator<Item = S>,
        dim: usize,
        inputs: &[DVector<C64>],
        images: &[DVector<C64>],
    ) -> Result<Self> {
        if inputs.len() != images.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} inputs vs {} images",
                inputs.len(),
                images.len()
            )));
        }
        if inputs.len() > dim {
            return Err(Error::DimensionMismatch(format!(
                "{} defined columns exceed dimension {dim}",
                inputs.len()
            )));
        }
        let input_full = complete_orthonormal(dim, inputs)?;
        let image_full = complete_orthonormal(dim, images)?;
        let matrix = image_full * input_full.adjoint();
        Self::new(targets, matrix)
    }

    pub fn targets(&self) -> Vec<&str> {
        self.targets.iter().map(String::as_str).collect()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn unitarity_defect(&self) -> f64 {
        unitarity_defect(&self.matrix)
    }
}

impl StateVector {
    /// Applies `u` on its target registers, identity elsewhere.
    pub fn apply_unitary(&self, u: &UnitaryOp) -> Result<StateVector> {
        let targets = u.targets();
        let amplitudes = self.apply_matrix_on(u.matrix(), &targets)?;
        StateVector::new(self.layout().clone(), amplitudes)
    }
}

/// Max absolute entry of U†U − I.
pub fn unitarity_defect(matrix: &DMatrix<C64>) -> f64 {
    let gram = matrix.adjoint() * matrix;
    let mut defect = 0.0f64;
    for i in 0..gram.nrows() {
        for k in 0..gram.ncols() {
            let expected = if i == k {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            };
            defect = defect.max((gram[(i, k)] - expected).norm());
        }
    }
    defect
}

/// Extends `given` orthonormal columns to a full orthonormal basis of C^dim.
/// Each round appends the canonical-residual candidate of largest norm, so the
/// construction cannot stall on near-span candidates.
pub(crate) fn complete_orthonormal(dim: usize, given: &[DVector<C64>]) -> Result<DMatrix<C64>> {
    for v in given {
        if v.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "column of length {} in dimension {dim}",
                v.len()
            )));
        }
    }
    let gram_defect = orthonormality_defect(given);
    if gram_defect > 1e-8 {
        return Err(Error::NotOrthonormal(gram_defect));
    }

    let mut columns: Vec<DVector<C64>> = given.to_vec();
    // Residuals of the canonical basis against the current column span.
    let mut residuals: Vec<DVector<C64>> = (0..dim)
        .map(|k| {
            let mut v: DVector<C64> = DVector::zeros(dim);
            v[k] = C64::new(1.0, 0.0);
            for c in &columns {
                let overlap = c.dotc(&v);
                v -= c * overlap;
            }
            v
        })
        .collect();

    while columns.len() < dim {
        let (best, _) = residuals
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| a.norm().total_cmp(&b.norm()))
            .expect("dim >= 1");
        let mut v = residuals[best].clone();
        // One re-orthogonalization pass keeps accumulated drift negligible.
        for c in &columns {
            let overlap = c.dotc(&v);
            v -= c * overlap;
        }
        let norm = v.norm();
        if norm < 1e-9 {
            return Err(Error::NotOrthonormal(norm));
        }
        let v = v / C64::from(norm);
        for r in residuals.iter_mut() {
            let overlap = v.dotc(&*r);
            *r -= &v * overlap;
        }
        columns.push(v);
    }

    Ok(DMatrix::from_columns(&columns))
}

fn orthonormality_defect(vectors: &[DVector<C64>]) -> f64 {
    let mut defect = 0.0f64;
    for (i, a) in vectors.iter().enumerate() {
        for (k, b) in vectors.iter().enumerate() {
            let expected = if i == k { 1.0 } else { 0.0 };
            defect = defect.max((a.dotc(b) - C64::from(expected)).norm());
        }
    }
    defect
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::RegisterLayout;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn pauli_x() -> DMatrix<C64> {
        DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(0.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
            ],
        )
    }

    #[test]
    fn identity_leaves_state_unchanged() {
        let layout = RegisterLayout::new([("A", 2), ("B", 3)]).unwrap();
        let s = StateVector::basis_state(layout, &[("A", 1), ("B", 2)]).unwrap();
        let u = UnitaryOp::identity(["B"], 3).unwrap();
        let t = s.apply_unitary(&u).unwrap();
        assert!(s.matches_up_to_phase(&t, 1e-12).unwrap());
    }

    #[test]
    fn x_flips_qubit() {
        let layout = RegisterLayout::new([("A", 2), ("B", 2)]).unwrap();
        let s = StateVector::basis_state(layout.clone(), &[("A", 0), ("B", 0)]).unwrap();
        let u = UnitaryOp::new(["A"], pauli_x()).unwrap();
        let t = s.apply_unitary(&u).unwrap();
        let expected = StateVector::basis_state(layout, &[("A", 1), ("B", 0)]).unwrap();
        assert!(t.matches_up_to_phase(&expected, 1e-12).unwrap());
        assert!((t.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_unitary() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(1.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(1.0, 0.0),
            ],
        );
        assert!(matches!(
            UnitaryOp::new(["A"], m),
            Err(Error::NotUnitary(_))
        ));
    }

    #[test]
    fn rejects_unknown_target_register() {
        let layout = RegisterLayout::new([("A", 2)]).unwrap();
        let s = StateVector::basis_state(layout, &[("A", 0)]).unwrap();
        let u = UnitaryOp::new(["Z"], pauli_x()).unwrap();
        assert!(matches!(
            s.apply_unitary(&u),
            Err(Error::UnknownRegister(_))
        ));
    }

    #[test]
    fn partial_isometry_completion_is_unitary_and_exact() {
        // Map |0⟩ to (|1⟩+|2⟩)/√2 in dimension 4 and complete the rest.
        let mut input: DVector<C64> = DVector::zeros(4);
        input[0] = C64::new(1.0, 0.0);
        let mut image: DVector<C64> = DVector::zeros(4);
        image[1] = C64::new(FRAC_1_SQRT_2, 0.0);
        image[2] = C64::new(FRAC_1_SQRT_2, 0.0);
        let u =
            UnitaryOp::from_partial_isometry(["A"], 4, &[input.clone()], &[image.clone()]).unwrap();
        assert!(u.unitarity_defect() < 1e-12);
        let mapped = u.matrix() * input;
        assert!((mapped - image).norm() < 1e-12);
    }

    #[test]
    fn completion_rejects_non_orthonormal_inputs() {
        let mut a: DVector<C64> = DVector::zeros(3);
        a[0] = C64::new(1.0, 0.0);
        let b = a.clone() * C64::from(0.9);
        assert!(matches!(
            complete_orthonormal(3, &[a, b]),
            Err(Error::NotOrthonormal(_))
        ));
    }
}
