//! Simulation and numerical verification of nonlocal geometric curvature
//! motions in the plane: collapsing sandpiles (single and two interacting
//! cones) and compression molding.
//!
//! Fronts are tracked as convex marker polylines. Each marker carries a
//! distance ray (foot, inner normal, curvature, ray length) from which the
//! flow laws and the mass transport densities along rays are evaluated.
//! The [`verification`] module checks the associated balance identities by
//! quadrature over the ray structure.

pub mod evolution;
pub mod geometry;
pub mod quadrature;
pub mod transport;
pub mod verification;

pub use evolution::{EvolutionState, Model, Scenario, Trajectory};
pub use geometry::{ConvexFront, Point2, RaySample};
pub use transport::{CurvatureVector, DensityProfile};
