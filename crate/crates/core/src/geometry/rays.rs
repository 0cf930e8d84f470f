use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::front::ConvexFront;
use super::point::Point2;
use super::GeometryError;

/// Normals whose slope against the boundary falls below this are tangent.
const MIN_RAY_SLOPE: f64 = 1e-9;
/// Edges whose slope differs from the ray slope by less than this never bind.
const PARALLEL_EPS: f64 = 1e-12;

/// One distance ray of a front, rooted at a marker.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RaySample {
    /// Foot point on the front.
    pub foot: Point2,
    /// Unit direction of the ray into the body.
    pub inner_normal: Point2,
    /// Discrete curvature of the front at the foot.
    pub kappa: f64,
    /// Length of the distance ray.
    pub gamma: f64,
    /// Ray length inside the intersection of two bodies (two-body mode).
    pub delta: Option<f64>,
    /// Outer normal velocity, filled in by the flow laws.
    pub velocity: Option<f64>,
    /// Arclength position of the foot along the front.
    pub arclength: f64,
}

impl ConvexFront {
    /// Rate at which the signed distance grows when leaving `y` along `n`,
    /// i.e. the smallest `n·ν` over the edges through `y`.
    fn ray_slope(&self, y: Point2, n: Point2) -> Result<f64, GeometryError> {
        let dist = self.signed_distance(y);
        let tol = self.tol_geom();
        if dist.abs() > tol {
            return Err(GeometryError::NotOnFront { distance: dist });
        }
        if (n.norm() - 1.0).abs() > 1e-9 {
            return Err(GeometryError::InvalidRay {
                reason: format!("direction has length {}", n.norm()),
            });
        }
        let mut slope = f64::INFINITY;
        for j in 0..self.len() {
            let (q, _) = super::point::closest_on_segment(y, self.marker(j), self.marker(j + 1));
            if q.dist(y) <= tol {
                slope = slope.min(n.dot(self.edge_inner_normal(j)));
            }
        }
        if !slope.is_finite() {
            return Err(GeometryError::NotOnFront { distance: dist });
        }
        if slope <= MIN_RAY_SLOPE {
            return Err(GeometryError::InvalidRay {
                reason: format!("direction is not inner-pointing (slope {slope:.3e})"),
            });
        }
        Ok(slope)
    }

    /// Length of the distance ray leaving the boundary point `y` along the
    /// inner unit direction `n`.
    ///
    /// Along the ray the signed distance grows linearly with the slope `c`
    /// set by the edges through `y` (`c = 1` on an edge interior, the cosine
    /// of half the turning angle at a marker). The ray ends where that linear
    /// growth first stops. For convex fronts each edge line contributes an
    /// explicit bound, so the supremum is computed in closed form; nonconvex
    /// inputs use [`ConvexFront::ray_length_gamma_bisect`].
    pub fn ray_length_gamma(&self, y: Point2, n: Point2) -> Result<f64, GeometryError> {
        if !self.is_convex() {
            return self.ray_length_gamma_bisect(y, n);
        }
        let slope = self.ray_slope(y, n)?;
        Ok(self.gamma_closed_form(y, n, slope))
    }

    /// Supremum of the linear-growth interval for a convex front, given the
    /// slope at the foot.
    fn gamma_closed_form(&self, y: Point2, n: Point2, slope: f64) -> f64 {
        let mut gamma = f64::INFINITY;
        for j in 0..self.len() {
            let nu = self.edge_inner_normal(j);
            let closing = slope - n.dot(nu);
            if closing > PARALLEL_EPS {
                let height = (y - self.marker(j)).dot(nu).max(0.0);
                gamma = gamma.min(height / closing);
            }
        }
        gamma.min(self.diameter())
    }

    /// Ray length at marker `i` along `n`. Same value as
    /// [`ConvexFront::ray_length_gamma`] at the marker, but the slope comes
    /// straight from the two adjacent edges.
    pub fn ray_length_at_marker(&self, i: usize, n: Point2) -> Result<f64, GeometryError> {
        if !self.is_convex() {
            return self.ray_length_gamma_bisect(self.marker(i), n);
        }
        let slope = n
            .dot(self.edge_inner_normal(self.prev(i)))
            .min(n.dot(self.edge_inner_normal(i % self.len())));
        if slope <= MIN_RAY_SLOPE {
            return Err(GeometryError::InvalidRay {
                reason: format!("direction is not inner-pointing (slope {slope:.3e})"),
            });
        }
        Ok(self.gamma_closed_form(self.marker(i), n, slope))
    }

    /// Bisection on the monotone predicate `d(y + s n) ≥ c·s − tol` over the
    /// bracket `[0, diam]`, refined to `1e-9 · diam`.
    pub fn ray_length_gamma_bisect(&self, y: Point2, n: Point2) -> Result<f64, GeometryError> {
        let slope = self.ray_slope(y, n)?;
        let tol = self.tol_geom();
        let holds = |s: f64| self.signed_distance(y + n * s) >= slope * s - tol;
        let (mut lo, mut hi) = (0.0, self.diameter());
        if holds(hi) {
            return Ok(hi);
        }
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if holds(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// One ray per marker: vertex-bisector normal, circumcircle curvature and
    /// ray length. Velocities are left unset.
    pub fn sample_rays(&self) -> Result<Vec<RaySample>, GeometryError> {
        (0..self.len())
            .into_par_iter()
            .map(|i| {
                let foot = self.marker(i);
                let inner_normal = self.vertex_inner_normal(i)?;
                Ok(RaySample {
                    foot,
                    inner_normal,
                    kappa: self.curvature_at(i)?,
                    gamma: self.ray_length_at_marker(i, inner_normal)?,
                    delta: None,
                    velocity: None,
                    arclength: self.arclength(i),
                })
            })
            .collect()
    }
}
