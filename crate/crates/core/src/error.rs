use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Argument lies on (or within 1e-14 of) a pole of the function.
    #[error("pole: {0}")]
    Pole(String),

    /// Argument outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A series, product or quadrature did not reach its tolerance within
    /// the allowed work.
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// Two contour poles coincide, so the simple-pole residue formula does
    /// not apply.
    #[error("degenerate poles: {0}")]
    Degeneracy(String),

    /// A finite result was expected but the computation overflowed.
    #[error("overflow: {0}")]
    Overflow(String),
}

impl Error {
    /// Process exit status used by the command-line front-end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Convergence(_) | Error::Overflow(_) => 2,
            Error::Pole(_) | Error::Domain(_) | Error::Degeneracy(_) => 1,
        }
    }
}
