//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown register `{0}`")]
    UnknownRegister(String),
    #[error("duplicate register `{0}`")]
    DuplicateRegister(String),
    #[error("register `{register}`: basis index {index} out of range for dimension {dim}")]
    IndexOutOfRange {
        register: String,
        index: usize,
        dim: usize,
    },
    #[error("invalid layout: {0}")]
    InvalidLayout(String),
    #[error("state layouts do not match")]
    LayoutMismatch,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("zero-norm state (cancelling superposition or zero-probability collapse)")]
    ZeroNorm,
    #[error("state norm deviates from 1 by {0:.3e}")]
    NotNormalized(f64),
    #[error("matrix is not unitary (max |U\u{2020}U - I| = {0:.3e})")]
    NotUnitary(f64),
    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),
    #[error("invalid projector set: {0}")]
    InvalidProjectors(String),
    #[error("keep-set must be a nonempty subset of the layout registers")]
    EmptyKeepSet,
    #[error("bipartition must be a nonempty proper subset of the layout registers")]
    TrivialBipartition,
    #[error("vectors are not orthonormal (max Gram defect {0:.3e})")]
    NotOrthonormal(f64),
    #[error(
        "reduced states differ by trace distance {gap:.3e} (tolerance {tolerance:.3e}); \
         no exact local conversion exists"
    )]
    ReducedStatesDiffer { gap: f64, tolerance: f64 },
    #[error("conversion unitary missed the target state (|overlap| = {fidelity})")]
    ConversionFidelity { fidelity: f64 },
    #[error("invalid database: {0}")]
    InvalidDatabase(String),
    #[error("record 0 is the reserved known record and cannot be queried")]
    ReservedRecord,
    #[error("record index {j} out of range 1..{n}")]
    RecordOutOfRange { j: usize, n: usize },
    #[error("label {answer} is not a legal answer for record {j}")]
    IllegalAnswer { j: usize, answer: usize },
    #[error("operation requires a deterministic database")]
    DeterministicRequired,
    #[error("unsupported database shape: {0}")]
    UnsupportedShape(String),
    #[error("strategy acts on unexpected registers: {0}")]
    StrategyRegisters(String),
    #[error("record {j} has {got} answers, expected {expected} (ragged answer counts)")]
    RaggedAnswers {
        j: usize,
        got: usize,
        expected: usize,
    },
    #[error("output label 0 collides with the reserved blank answer label")]
    BlankLabelCollision,
    #[error("invalid two-party function: {0}")]
    InvalidFunction(String),
    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
    #[error("unknown strategy `{0}` (expected honest, intercept or appendix-attack)")]
    UnknownStrategy(String),
    #[error("requirement audit needs an exact-born report")]
    AuditNeedsExact,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True when the error signals a broken runtime invariant rather than bad
    /// input. The CLI maps these to a distinct exit code.
    pub fn is_invariant_violation(&self) -> bool {
        matches!(
            self,
            Error::NotNormalized(_)
                | Error::NotUnitary(_)
                | Error::NotOrthonormal(_)
                | Error::ConversionFidelity { .. }
        )
    }
}
