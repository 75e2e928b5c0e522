//! Exact finite-dimensional quantum state algebra: composite systems,
//! unitaries on subsystems, partial trace, Schmidt decomposition, projective
//! measurement, trace distance, and the purification-conversion unitary.
//!
//! Everything is a dense complex-amplitude representation over named qudit
//! registers. All values are immutable; the only non-pure operation is
//! sampling a measurement, which consumes a caller-provided random stream.

pub mod conversion;
pub mod density;
pub mod eigen;
pub mod layout;
pub mod measure;
pub mod random;
pub mod schmidt;
pub mod state;
pub mod unitary;

pub use conversion::{local_conversion_unitary, LocalConversion, EPSILON_EQ};
pub use density::{trace_distance, DensityMatrix};
pub use layout::RegisterLayout;
pub use measure::{
    born_probabilities, collapse_computational, computational_distribution, measure_computational,
    measure_projective, outer_projector, MeasurementOutcome,
};
pub use schmidt::SchmidtDecomposition;
pub use state::StateVector;
pub use unitary::UnitaryOp;

pub type C64 = num_complex::Complex64;

/// Tolerance for structural checks: unitarity, hermiticity, normalization.
pub const STRUCTURAL_TOL: f64 = 1e-10;

/// Tolerance for derived equalities: fidelities, reduced-state equality.
pub const DERIVED_TOL: f64 = 1e-8;
