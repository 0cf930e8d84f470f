//! Quadrature checks of the balance identities over the ray structure of a
//! front: ray-Jacobian integration, the weak sandpile mass balance, the
//! subdifferential inequality, fixed-time and space-time molding balances,
//! and a probe of the local Lipschitz constant of the nearest-point map.

mod balance;
mod probe;
mod report;
mod test_function;

pub use balance::{
    integrate_by_rays, integrate_by_rays_with, mass_balance_residual, molding_balance_residual,
    spacetime_balance_residual, subdifferential_gap, Competitor, RayQuadrature, SpaceTimeReport,
    MASS_BALANCE_REL_TOL, MIN_SPACETIME_STATES, MOLDING_BALANCE_REL_TOL, SPACETIME_REL_TOL,
    SUBDIFFERENTIAL_REL_TOL,
};
pub use probe::{
    fan_project, projection_lipschitz_probe, projection_lipschitz_probe_with, FanPoint,
    ProjectionProbe, PROBE_DIRECTIONS, RIDGE_MARGIN,
};
pub use report::ResidualReport;
pub use test_function::{Monomial, ScalarField, SpaceTimeTest, TestFunction, TimeBump, MAX_DEGREE};

use thiserror::Error;

use crate::geometry::{GeometryError, Point2};
use crate::transport::TransportError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerificationError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error("state has rays without velocities")]
    MissingVelocity,
    #[error("need at least {min} stored states, got {states}")]
    InsufficientResolution { states: usize, min: usize },
    #[error("point is too close to the ridge (margin {margin:e} ≤ {required:e})")]
    RidgeProximity { margin: f64, required: f64 },
    #[error("no ray of the front reaches {x:?}")]
    Unprojectable { x: Point2 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
