use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhaseError {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is not Hermitian: max |M - M^dag| = {residual:.3e} exceeds {bound:.3e}")]
    NotHermitian { residual: f64, bound: f64 },

    #[error("matrix is not unitary: max |U^dag U - I| = {residual:.3e} exceeds {bound:.3e}")]
    NotUnitary { residual: f64, bound: f64 },

    #[error("state vector cannot be normalized (norm {norm:.3e})")]
    ZeroState { norm: f64 },

    #[error(
        "eigensolver did not converge after {sweeps} sweeps (off-diagonal residual {residual:.3e})"
    )]
    EigenNoConvergence { sweeps: usize, residual: f64 },

    #[error(
        "time stepping did not converge after {refinements} refinements \
         (last two residuals {previous:.3e}, {last:.3e}, tolerance {tol:.3e})"
    )]
    StepNoConvergence {
        refinements: usize,
        previous: f64,
        last: f64,
        tol: f64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported drive axis {0}; rotating models are driven along x or z")]
    UnsupportedAxis(char),

    #[error("unsupported system size: {0} qubits")]
    UnsupportedSize(usize),

    #[error("site {site} out of range for {n_qubits} qubits")]
    SiteOutOfRange { site: usize, n_qubits: usize },

    #[error("drive not compatible with period: ||[exp(-iAT), B]|| = {residual:.3e}")]
    DriveIncompatible { residual: f64 },

    #[error(
        "monodromy exp(-iAT) is not scalar on group {group} (residual {residual:.3e}); \
         the grouping tolerance is probably mis-set"
    )]
    NonScalarMonodromy { group: usize, residual: f64 },

    #[error("group has dimension {dimension}; use aa_holonomy for degenerate groups")]
    DegenerateGroup { dimension: usize },

    #[error("state is not an eigenvector of the group connection (residual {residual:.3e})")]
    NotConnectionEigenstate { residual: f64 },

    #[error("state does not lie in the group span (weight {weight:.6})")]
    OutsideGroup { weight: f64 },

    #[error("state is not cyclic: |<psi|U(T)|psi>| = {overlap:.9}")]
    NotCyclic { overlap: f64 },

    #[error("closed-form eigenvector degenerates (normalization {norm:.3e}); use numeric path")]
    DegenerateNormalization { norm: f64 },

    #[error("negative discriminant {value:.3e}; formula applied outside its domain")]
    NegativeDiscriminant { value: f64 },

    #[error("field direction undefined at h = omega = 0")]
    UndefinedDirection,

    #[error("adiabaticity metric undefined: spectrum is fully degenerate")]
    AllDegenerate,

    #[error("index {index} out of range (have {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("no group matches the reference span (best weight {weight:.6})")]
    NoMatchingGroup { weight: f64 },

    #[error("connection and dynamical matrices do not commute (||[A, E]|| = {norm:.3e})")]
    NonCommuting { norm: f64 },

    #[error("grid parse error: {0}")]
    Grid(String),

    #[error("output error: {0}")]
    Output(String),
}

pub type Result<T> = std::result::Result<T, PhaseError>;
