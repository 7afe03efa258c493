//! Recasting of ODE systems with non-polynomial right-hand sides into
//! generalized Lotka-Volterra (GLV) form and their Lotka-Volterra normal form.
//!
//! The pipeline is: a [`embed::GeneralSystem`] (polynomial in the state and a
//! family of functions closed under differentiation) is translated to the
//! positive orthant, given auxiliary variables `y = f^q x^p`, written as a
//! [`qp::QpSystem`] and embedded into an [`qp::LvSystem`]. [`sim`] integrates
//! the stages and checks that the trajectories agree.

pub mod algebra;
pub mod embed;
pub mod examples;
pub mod expr;
pub mod io;
pub mod qp;
pub mod sim;

use thiserror::Error;

pub use algebra::{AlgebraError, Rational, RationalMatrix};
pub use embed::EmbedError;
pub use io::FormatError;
pub use qp::ModelError;
pub use sim::SimError;

/// Broad failure classes, mapped to process exit codes by the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Domain,
    Io,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Validation => 1,
            ErrorKind::Domain => 2,
            ErrorKind::Io => 3,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorKind::Validation => "validation",
            ErrorKind::Domain => "domain",
            ErrorKind::Io => "io",
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Io { .. } => ErrorKind::Io,
            Error::Format(FormatError::Embed(e)) | Error::Embed(e) => embed_kind(e),
            Error::Format(FormatError::Model(e)) | Error::Model(e) => model_kind(e),
            Error::Format(_) | Error::Algebra(_) => ErrorKind::Validation,
            Error::Sim(e) => match e {
                SimError::Domain(_) | SimError::OffManifold(_) => ErrorKind::Domain,
                SimError::Embed(e) => embed_kind(e),
                SimError::Model(e) => model_kind(e),
                SimError::Dimension(_) | SimError::Config(_) => ErrorKind::Validation,
            },
        }
    }
}

fn embed_kind(e: &EmbedError) -> ErrorKind {
    match e {
        EmbedError::Domain(_) => ErrorKind::Domain,
        EmbedError::Model(m) => model_kind(m),
        _ => ErrorKind::Validation,
    }
}

fn model_kind(e: &ModelError) -> ErrorKind {
    match e {
        ModelError::NonPositive { .. } => ErrorKind::Domain,
        _ => ErrorKind::Validation,
    }
}
