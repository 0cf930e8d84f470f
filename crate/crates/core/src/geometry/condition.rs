use serde::{Deserialize, Serialize};

use super::front::ConvexFront;
use super::point::Point2;

/// Outcome of probing the exterior-ball (lower curvature bound) condition.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Condition1Report {
    pub radius: f64,
    pub holds: bool,
    /// Exterior grid points that were probed.
    pub probes: usize,
    pub violations: usize,
    /// Largest shortfall `2r - dist(y + 2r u, body)` seen (≤ 0 when the condition holds).
    pub worst_deficit: f64,
    pub worst_point: Option<Point2>,
}

/// Grid resolution as a fraction of the diameter.
const GRID_DIVISIONS: usize = 200;
/// Margin around the bounding box, as a fraction of the diameter.
const GRID_MARGIN: f64 = 0.25;

impl ConvexFront {
    /// Probes the exterior of the body on a bounding-box grid. For every
    /// exterior grid point `x` with nearest boundary point `y`, the exterior
    /// ray from `y` through `x` must stay at distance `s` from the body up to
    /// `s = 2r`.
    pub fn check_condition_1(&self, r: f64) -> Condition1Report {
        let diam = self.diameter();
        let h = diam / GRID_DIVISIONS as f64;
        let tol = self.tol_geom().max(1e-12 * 2.0 * r);
        let (lo, hi) = self.bbox();
        let lo = Point2::new(lo.x - GRID_MARGIN * diam, lo.y - GRID_MARGIN * diam);
        let hi = Point2::new(hi.x + GRID_MARGIN * diam, hi.y + GRID_MARGIN * diam);
        let nx = ((hi.x - lo.x) / h).ceil() as usize + 1;
        let ny = ((hi.y - lo.y) / h).ceil() as usize + 1;
        let mut report = Condition1Report {
            radius: r,
            holds: true,
            probes: 0,
            violations: 0,
            worst_deficit: f64::NEG_INFINITY,
            worst_point: None,
        };
        for iy in 0..ny {
            for ix in 0..nx {
                let x = Point2::new(lo.x + ix as f64 * h, lo.y + iy as f64 * h);
                if self.contains(x) {
                    continue;
                }
                let (d, edge, t) = self.nearest_on_polyline(x);
                if d <= 1e3 * tol {
                    continue;
                }
                let y = self.marker(edge).lerp(self.marker(edge + 1), t);
                let u = (x - y) * (1.0 / d);
                let probe = y + u * (2.0 * r);
                let outside = (-self.signed_distance(probe)).max(0.0);
                let deficit = 2.0 * r - outside;
                report.probes += 1;
                if deficit > report.worst_deficit {
                    report.worst_deficit = deficit;
                    report.worst_point = Some(x);
                }
                if deficit > tol {
                    report.violations += 1;
                    report.holds = false;
                }
            }
        }
        report
    }
}
