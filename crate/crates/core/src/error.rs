use thiserror::Error;

use crate::holoexpr::ExprError;

/// Errors raised by the algebra, synthesis and verification layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] ExprError),

    #[error("seed expression failed at z = {x} + {y}i: {source}")]
    SeedEval {
        x: f64,
        y: f64,
        #[source]
        source: ExprError,
    },

    #[error("quaternion is not invertible (|H(q,q)| = {norm:e})")]
    NotInvertible { norm: f64 },

    #[error("not an element of Spin(3,1): |H(p,p) - 1| = {deviation:e}")]
    NotASpinElement { deviation: f64 },

    #[error("imaginary residue {residue:e} exceeds the reality tolerance")]
    ImaginaryResidue { residue: f64 },

    #[error("invalid grid domain: {0}")]
    InvalidDomain(String),

    #[error("osculating space degenerate at grid point ({i}, {j}): |f1^2 - f2^2| = {value:e}")]
    DegenerateOsculating { i: usize, j: usize, value: f64 },

    #[error("frame fields dependent at grid point ({i}, {j}): det = {det:e}")]
    DependentFrame { i: usize, j: usize, det: f64 },

    #[error("renormalization failed at grid point ({i}, {j}): |norm| = {norm:e}")]
    RenormalizationFailure { i: usize, j: usize, norm: f64 },

    #[error("1-form not closed: max loop residual {max_residual:e} exceeds budget {budget:e}")]
    ClosednessFailure { max_residual: f64, budget: f64 },

    #[error("square-root branch conflict at grid point ({i}, {j}): {reason}")]
    BranchConflict { i: usize, j: usize, reason: String },

    #[error("matrix is not unimodular: |det - 1| = {deviation:e}")]
    NotUnimodular { deviation: f64 },

    #[error("seed invalid at grid point ({i}, {j}): {reason}")]
    SeedInvalid { i: usize, j: usize, reason: String },

    #[error("connection not off-diagonal: max diagonal {max_diagonal:e} exceeds budget {budget:e}")]
    NonOffDiagonal { max_diagonal: f64, budget: f64 },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("induced metric not Lorentzian at grid point ({i}, {j}): EG - F^2 = {det:e}")]
    SignatureError { i: usize, j: usize, det: f64 },

    #[error("field shape mismatch: {0}")]
    ShapeMismatch(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
