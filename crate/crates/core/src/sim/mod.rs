//! Numeric evaluation, integration and trajectory-level verification.

mod diffeo;
mod field;
mod rk4;
mod verify;

pub use diffeo::{diffeo_forward, diffeo_inverse, QuasimonomialMap, MANIFOLD_TOL};
pub use field::{GeneralField, GlvField, LvField, VectorField};
pub use rk4::{integrate, IntegratorConfig, Trajectory};
pub use verify::{verify_equivalence, verify_recast, VerifyReport, REL_FLOOR};

use thiserror::Error;

use crate::embed::EmbedError;
use crate::qp::ModelError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("state is off the image manifold: {0}")]
    OffManifold(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid integrator configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Model(#[from] ModelError),
}
