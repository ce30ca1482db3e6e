use std::fmt;
use std::path::Path;

use thiserror::Error;

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Code {
    Io = 1,
    /// Bad config, expression, patch file, format or projection.
    Input = 2,
    /// A hypothesis of the construction does not hold for the seed.
    Hypothesis = 3,
    /// A residual budget, closedness or renormalization failure.
    Budget = 4,
}

#[derive(Debug, Error)]
#[error("{message}")]
pub struct CliError {
    pub code: Code,
    pub message: String,
}

impl CliError {
    pub fn new(code: Code, message: impl fmt::Display) -> Self {
        Self {
            code,
            message: message.to_string(),
        }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        Self::new(Code::Io, format!("{}: {err}", path.display()))
    }

    /// Prefixes the message with where it came from.
    pub fn context(mut self, what: impl fmt::Display) -> Self {
        self.message = format!("{what}: {}", self.message);
        self
    }
}

pub fn classify(e: &spinorsurf::Error) -> Code {
    use spinorsurf::Error as E;
    match e {
        E::Expr(_) | E::InvalidDomain(_) | E::ShapeMismatch(_) => Code::Input,
        E::SeedEval { .. }
        | E::DegenerateOsculating { .. }
        | E::DependentFrame { .. }
        | E::SeedInvalid { .. }
        | E::BranchConflict { .. }
        | E::PreconditionViolated(_) => Code::Hypothesis,
        E::NotInvertible { .. }
        | E::NotASpinElement { .. }
        | E::ImaginaryResidue { .. }
        | E::RenormalizationFailure { .. }
        | E::ClosednessFailure { .. }
        | E::NotUnimodular { .. }
        | E::NonOffDiagonal { .. }
        | E::SignatureError { .. } => Code::Budget,
    }
}

impl From<spinorsurf::Error> for CliError {
    fn from(e: spinorsurf::Error) -> Self {
        Self::new(classify(&e), e)
    }
}

pub type CliResult<T> = Result<T, CliError>;
