//! Pure states over named registers.

use nalgebra::{DMatrix, DVector};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::layout::{RegisterLayout, SubsetIndexer};
use super::{C64, STRUCTURAL_TOL};
use crate::error::{Error, Result};

/// Exact complex-amplitude pure state. Invariant: unit norm within 1e-10.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    layout: RegisterLayout,
    amplitudes: DVector<C64>,
}

impl StateVector {
    /// Wraps an amplitude vector, validating length and normalization.
    pub fn new(layout: RegisterLayout, amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() != layout.total_dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for a layout of total dimension {}",
                amplitudes.len(),
                layout.total_dim()
            )));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > STRUCTURAL_TOL {
            return Err(Error::NotNormalized((norm - 1.0).abs()));
        }
        Ok(Self { layout, amplitudes })
    }

    pub(crate) fn new_unchecked(layout: RegisterLayout, amplitudes: DVector<C64>) -> Self {
        debug_assert_eq!(amplitudes.len(), layout.total_dim());
        Self { layout, amplitudes }
    }

    /// Computational basis state for a full register assignment.
    pub fn basis_state(layout: RegisterLayout, assignment: &[(&str, usize)]) -> Result<Self> {
        let index = layout.index_of(assignment)?;
        let mut amplitudes = DVector::zeros(layout.total_dim());
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(Self { layout, amplitudes })
    }

    /// Normalized linear combination of same-layout states.
    /// Errors on mismatched layouts and on cancellation to (near) zero norm.
    pub fn superpose(terms: &[(C64, &StateVector)]) -> Result<Self> {
        let (_, first) = terms
            .first()
            .ok_or_else(|| Error::DimensionMismatch("superpose needs at least one term".into()))?;
        let layout = first.layout.clone();
        let mut amplitudes: DVector<C64> = DVector::zeros(layout.total_dim());
        for (coefficient, state) in terms {
            if state.layout != layout {
                return Err(Error::LayoutMismatch);
            }
            amplitudes += &state.amplitudes * *coefficient;
        }
        let norm = amplitudes.norm();
        if norm < 1e-12 {
            return Err(Error::ZeroNorm);
        }
        Ok(Self {
            layout,
            amplitudes: amplitudes / C64::from(norm),
        })
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amplitudes[index]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// Inner product ⟨self|other⟩.
    pub fn overlap(&self, other: &StateVector) -> Result<C64> {
        if self.layout != other.layout {
            return Err(Error::LayoutMismatch);
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// |⟨self|other⟩|; state equality modulo global phase compares this to 1.
    pub fn overlap_magnitude(&self, other: &StateVector) -> Result<f64> {
        Ok(self.overlap(other)?.norm())
    }

    /// Whether both states agree up to a global phase, as |⟨a|b⟩| ≥ 1 − tol.
    pub fn matches_up_to_phase(&self, other: &StateVector, tol: f64) -> Result<bool> {
        Ok(self.overlap_magnitude(other)? >= 1.0 - tol)
    }

    /// Tensor product; the result's layout is `self` then `other`.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let layout = self.layout.concat(&other.layout)?;
        let other_dim = other.layout.total_dim();
        let mut amplitudes = DVector::zeros(layout.total_dim());
        for (i, a) in self.amplitudes.iter().enumerate() {
            for (k, b) in other.amplitudes.iter().enumerate() {
                amplitudes[i * other_dim + k] = a * b;
            }
        }
        Ok(StateVector { layout, amplitudes })
    }

    /// Applies an arbitrary matrix on the given registers (identity elsewhere)
    /// without renormalizing. Used for unitaries and projectors alike.
    pub(crate) fn apply_matrix_on(
        &self,
        matrix: &DMatrix<C64>,
        targets: &[&str],
    ) -> Result<DVector<C64>> {
        let idx = SubsetIndexer::new(&self.layout, targets)?;
        if matrix.nrows() != idx.target_dim || matrix.ncols() != idx.target_dim {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix on a target subspace of dimension {}",
                matrix.nrows(),
                matrix.ncols(),
                idx.target_dim
            )));
        }
        let mut out = DVector::zeros(self.amplitudes.len());
        for r in 0..idx.rest_dim {
            for t_out in 0..idx.target_dim {
                let mut acc = C64::new(0.0, 0.0);
                for t_in in 0..idx.target_dim {
                    acc += matrix[(t_out, t_in)] * self.amplitudes[idx.global(t_in, r)];
                }
                out[idx.global(t_out, r)] = acc;
            }
        }
        Ok(out)
    }

    /// Basis digits of one register that carry amplitude above `tol`.
    pub fn register_support(&self, name: &str, tol: f64) -> Result<Vec<usize>> {
        let position = self.layout.position(name)?;
        let stride = self.layout.strides()[position];
        let dim = self.layout.dim_at(position);
        let mut present = vec![false; dim];
        for (i, a) in self.amplitudes.iter().enumerate() {
            if a.norm() > tol {
                present[(i / stride) % dim] = true;
            }
        }
        Ok(present
            .iter()
            .enumerate()
            .filter(|(_, p)| **p)
            .map(|(d, _)| d)
            .collect())
    }
}

#[derive(Serialize, Deserialize)]
struct StateVectorJson {
    layout: RegisterLayout,
    amplitudes: Vec<(f64, f64)>,
}

impl Serialize for StateVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        StateVectorJson {
            layout: self.layout.clone(),
            amplitudes: self.amplitudes.iter().map(|a| (a.re, a.im)).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for StateVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = StateVectorJson::deserialize(deserializer)?;
        let amplitudes = DVector::from_iterator(
            raw.amplitudes.len(),
            raw.amplitudes.iter().map(|(re, im)| C64::new(*re, *im)),
        );
        StateVector::new(raw.layout, amplitudes).map_err(D::Error::custom)
    }
}
