//! Finitely supported measures, random-walk densities, harmonic functions and
//! finite surrogates of compact G-spaces.

mod gspace;
mod harmonic;
mod sparse;
mod unitary;
mod walk;

use thiserror::Error;

use crate::group::GroupError;

pub use gspace::*;
pub use harmonic::*;
pub use sparse::*;
pub use unitary::*;
pub use walk::*;

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("atom {atom} has invalid weight {weight}")]
    InvalidWeight { atom: String, weight: f64 },
    #[error("total mass {mass} is not 1")]
    NotProbability { mass: f64 },
    #[error("measures or sets live on different groups")]
    DescriptorMismatch,
    #[error("support exceeded the cap of {cap} atoms")]
    SupportExplosion { cap: usize },
    #[error("prune tolerance {0} outside [0, 1e-6]")]
    InvalidPruneTolerance(f64),
    #[error("power must be at least 1")]
    ZeroPower,
    #[error("measure is not symmetric")]
    NotSymmetric,
    #[error("cylinder prefix must be a nonempty reduced word over the generators")]
    InvalidCylinder,
    #[error("cannot parse {0:?}")]
    Parse(String),
    #[error("invalid G-space: {0}")]
    InvalidSpace(String),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("representation is not unitary (defect {defect:e})")]
    NotUnitary { defect: f64 },
    #[error("invalid representation: {0}")]
    InvalidRepresentation(String),
    #[error(transparent)]
    Group(#[from] GroupError),
}
