use alloc::boxed::Box;
use alloc::string::String;

use crate::linalg::CMat;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// Shapes or kinds of the inputs do not fit together.
    #[error("structural error: {0}")]
    Structural(String),

    /// A model failed one of its defining identities.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("{operation} is not defined for {kind} models")]
    WrongKind {
        operation: &'static str,
        kind: &'static str,
    },

    #[error("negative time")]
    NegativeTime,

    #[error("invalid tolerances: {0}")]
    InvalidTolerances(&'static str),

    #[error("not a projection: {0}")]
    NotProjection(String),

    #[error("operator is not positive semidefinite (min eigenvalue {min_eig:e})")]
    NotPositive { min_eig: f64 },

    #[error("operator is not hermitian (residual {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("limit not monotone, y undefined: projection is not sub-harmonic (residual {residual:e})")]
    NotSubharmonic { residual: f64 },

    #[error("reduction requires sub-harmonic corner (residual {residual:e})")]
    ReductionRequiresSubharmonic { residual: f64 },

    #[error("algebraic and order tests disagree: residual {residual:e}, order test min eigenvalue {order_min_eig:e}")]
    SubharmonicCrossCheck { residual: f64, order_min_eig: f64 },

    #[error("non-diagonalizable peripheral part")]
    NonDiagonalizablePeripheral,

    #[error("ergodic eigenvalue not found in the spectrum")]
    MissingErgodicEigenvalue,

    #[error("spectral limit and long-horizon evolution disagree by {disagreement:e}")]
    LimitCrossCheck {
        disagreement: f64,
        spectral: Box<CMat>,
        evolved: Box<CMat>,
    },

    #[error("injectivity certificates disagree: closure dimension {closure_dim} of {dim}, min eigenvalue of y {min_eig_y:e}")]
    InjectivityMismatch {
        closure_dim: usize,
        dim: usize,
        min_eig_y: f64,
    },

    #[error("y is injective (min eigenvalue {min_eig_y:e}) but ‖y − 1‖ = {distance:e}")]
    MetastableNotTransient { min_eig_y: f64, distance: f64 },

    #[error("projection is zero")]
    ZeroProjection,

    #[error("minimality not certified after {retries} reseedings")]
    MinimalityNotCertified { retries: usize },

    #[error("null recurrent projection contradicts finite-dimensional theory — numerical failure")]
    NullRecurrent,

    #[error("projection is not a minimal sub-harmonic projection")]
    NotRecurrent,

    #[error("projection is not the support of an invariant state")]
    NotInvariantSupport,

    #[error("spectral and dynamic ergodicity checks disagree (spectral verdict {spectral}, worst distance {distance:e})")]
    ErgodicityMismatch { spectral: bool, distance: f64 },

    #[error("commutant dimension {commutant_dim} disagrees with harmonic projection search (rank {harmonic_rank} of {dim})")]
    IrreducibilityMismatch {
        commutant_dim: usize,
        harmonic_rank: usize,
        dim: usize,
    },

    #[error("Picard scheme is continuous-time only (model kind {kind})")]
    PicardContinuousOnly { kind: &'static str },

    #[error("Picard iteration did not converge: last gap {gap:e} after {iterations} iterations")]
    PicardNonConvergence { gap: f64, iterations: usize },

    #[error("classical oracle disagrees with resolution: {0}")]
    OracleMismatch(String),

    #[error("internal error: {0}")]
    Internal(String),
}
