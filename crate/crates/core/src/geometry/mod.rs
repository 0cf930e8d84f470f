//! Marker-polyline fronts and the distance geometry built on them: signed
//! distance, nearest points, discrete curvature, distance rays, dilation,
//! intersection and the exterior-ball condition.

mod clip;
mod condition;
mod dilation;
mod front;
mod io;
mod point;
mod rays;
pub mod shapes;

pub use condition::Condition1Report;
pub use dilation::DilatedFront;
pub use front::{ConvexFront, MIN_MARKERS, REL_TOL_CONVEX, REL_TOL_GEOM};
pub use io::{read_front_csv, write_front_csv};
pub use point::{closest_on_segment, Point2};
pub use rays::RaySample;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("front needs at least {min} markers, got {got}")]
    TooFewMarkers { got: usize, min: usize },
    #[error("marker {index} is not finite")]
    NonFinite { index: usize },
    #[error("degenerate front: coincident markers near index {index}")]
    DegenerateFront { index: usize },
    #[error("front is not counterclockwise (signed area {area})")]
    NotCounterclockwise { area: f64 },
    #[error("front is not convex at marker {index} (edge cross product {cross:e})")]
    NotConvex { index: usize, cross: f64 },
    #[error("front is not simple (total turning {turning})")]
    NotSimple { turning: f64 },
    #[error("invalid ray: {reason}")]
    InvalidRay { reason: String },
    #[error("point is not on the front (signed distance {distance:e})")]
    NotOnFront { distance: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("front CSV: {0}")]
    Csv(String),
}
