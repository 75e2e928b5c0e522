//! Density matrices, partial traces and trace distance.

use nalgebra::DMatrix;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::eigen::{hermitian_eigenvalues, hermitian_trace_norm};
use super::layout::{RegisterLayout, SubsetIndexer};
use super::state::StateVector;
use super::{C64, STRUCTURAL_TOL};
use crate::error::{Error, Result};

/// Mixed state over a register layout. Invariants: Hermitian and unit trace
/// within 1e-10; positive semidefinite within 1e-10 (checked on demand via
/// [`DensityMatrix::min_eigenvalue`], since it needs an eigendecomposition).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    layout: RegisterLayout,
    matrix: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn new(layout: RegisterLayout, matrix: DMatrix<C64>) -> Result<Self> {
        let dim = layout.total_dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for a layout of total dimension {dim}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let hermitian_defect = hermiticity_defect(&matrix);
        if hermitian_defect > STRUCTURAL_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "not Hermitian (defect {hermitian_defect:.3e})"
            )));
        }
        let trace = matrix.trace();
        if (trace - C64::new(1.0, 0.0)).norm() > STRUCTURAL_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "trace is {trace} instead of 1"
            )));
        }
        Ok(Self { layout, matrix })
    }

    pub(crate) fn new_unchecked(layout: RegisterLayout, matrix: DMatrix<C64>) -> Self {
        debug_assert_eq!(matrix.nrows(), layout.total_dim());
        Self { layout, matrix }
    }

    pub fn from_pure(state: &StateVector) -> Self {
        let amps = state.amplitudes();
        let dim = amps.len();
        let matrix = DMatrix::from_fn(dim, dim, |r, c| amps[r] * amps[c].conj());
        Self {
            layout: state.layout().clone(),
            matrix,
        }
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// Eigenvalues of the (Hermitian) matrix, sorted nonincreasing.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().last().copied().unwrap_or(f64::INFINITY)
    }

    /// Reduced state on `keep` (output registers in the given order),
    /// tracing out everything else.
    pub fn partial_trace(&self, keep: &[&str]) -> Result<DensityMatrix> {
        if keep.is_empty() {
            return Err(Error::EmptyKeepSet);
        }
        let idx = SubsetIndexer::new(&self.layout, keep)?;
        let mut reduced = DMatrix::zeros(idx.target_dim, idx.target_dim);
        for i in 0..idx.target_dim {
            for k in 0..idx.target_dim {
                let mut acc = C64::new(0.0, 0.0);
                for e in 0..idx.rest_dim {
                    acc += self.matrix[(idx.global(i, e), idx.global(k, e))];
                }
                reduced[(i, k)] = acc;
            }
        }
        Ok(DensityMatrix::new_unchecked(
            self.layout.sub_layout(keep)?,
            reduced,
        ))
    }
}

impl StateVector {
    /// Reduced density matrix on `keep` (output registers in the given
    /// order), tracing out everything else.
    pub fn partial_trace(&self, keep: &[&str]) -> Result<DensityMatrix> {
        if keep.is_empty() {
            return Err(Error::EmptyKeepSet);
        }
        let idx = SubsetIndexer::new(self.layout(), keep)?;
        let amps = self.amplitudes();
        let mut reduced = DMatrix::zeros(idx.target_dim, idx.target_dim);
        for i in 0..idx.target_dim {
            for k in 0..idx.target_dim {
                let mut acc = C64::new(0.0, 0.0);
                for e in 0..idx.rest_dim {
                    acc += amps[idx.global(i, e)] * amps[idx.global(k, e)].conj();
                }
                reduced[(i, k)] = acc;
            }
        }
        Ok(DensityMatrix::new_unchecked(
            self.layout().sub_layout(keep)?,
            reduced,
        ))
    }
}

/// Trace distance ½‖a − b‖₁, via the eigenvalues of the Hermitian
/// difference.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.layout != b.layout {
        return Err(Error::DimensionMismatch(
            "trace distance needs matching layouts".into(),
        ));
    }
    let difference = &a.matrix - &b.matrix;
    let distance = 0.5 * hermitian_trace_norm(&difference);
    Ok(distance.clamp(0.0, 1.0))
}

pub(crate) fn hermiticity_defect(matrix: &DMatrix<C64>) -> f64 {
    let mut defect = 0.0f64;
    for r in 0..matrix.nrows() {
        for c in 0..matrix.ncols() {
            defect = defect.max((matrix[(r, c)] - matrix[(c, r)].conj()).norm());
        }
    }
    defect
}

#[derive(Serialize, Deserialize)]
struct DensityMatrixJson {
    layout: RegisterLayout,
    matrix: Vec<Vec<(f64, f64)>>,
}

impl Serialize for DensityMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let matrix = (0..self.matrix.nrows())
            .map(|r| {
                (0..self.matrix.ncols())
                    .map(|c| (self.matrix[(r, c)].re, self.matrix[(r, c)].im))
                    .collect()
            })
            .collect();
        DensityMatrixJson {
            layout: self.layout.clone(),
            matrix,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = DensityMatrixJson::deserialize(deserializer)?;
        let dim = raw.layout.total_dim();
        if raw.matrix.len() != dim || raw.matrix.iter().any(|row| row.len() != dim) {
            return Err(D::Error::custom("density matrix shape mismatch"));
        }
        let matrix = DMatrix::from_fn(dim, dim, |r, c| {
            C64::new(raw.matrix[r][c].0, raw.matrix[r][c].1)
        });
        DensityMatrix::new(raw.layout, matrix).map_err(D::Error::custom)
    }
}
