use serde::{Deserialize, Serialize};

use super::VerificationError;
use crate::geometry::{ConvexFront, Point2, RaySample};

/// Probe directions on the circle around the probed point.
pub const PROBE_DIRECTIONS: usize = 32;
/// The probed point must lie this many probe radii below its ray end.
pub const RIDGE_MARGIN: f64 = 10.0;

/// Position of a point in the fan of marker rays.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FanPoint {
    /// Cell between the rays of markers `cell` and `cell + 1`.
    pub cell: usize,
    pub lambda: f64,
    /// Distance parameter along the interpolated ray.
    pub s: f64,
    /// Interpolated ray length.
    pub gamma: f64,
    /// Projection onto the front.
    pub foot: Point2,
}

/// Projects `x` onto the front along the ray fan.
///
/// Inside the cell of markers `i, i+1` points are written as
/// `(1 − λ)(y_i + s n_i) + λ(y_{i+1} + s n_{i+1})`, which is the piecewise
/// linear interpolation of the nearest-point map of the underlying smooth
/// curve. Unlike the exact polygon projection it does not jump at vertex
/// bisectors. Among the cells that contain `x` below their ray ends, the one
/// with the smallest `s` wins.
pub fn fan_project(front: &ConvexFront, rays: &[RaySample], x: Point2) -> Option<FanPoint> {
    let n = rays.len();
    let eps = 1e-12;
    let mut best: Option<FanPoint> = None;
    for i in 0..n {
        let (r0, r1) = (&rays[i], &rays[(i + 1) % n]);
        let a = r0.foot;
        let b = r1.foot - r0.foot;
        let c = r0.inner_normal;
        let d = r1.inner_normal - r0.inner_normal;
        let rel = x - a;
        let q2 = -c.cross(d);
        let q1 = rel.cross(d) - c.cross(b);
        let q0 = rel.cross(b);
        for s in quadratic_roots(q2, q1, q0) {
            if s < -eps * front.diameter() {
                continue;
            }
            let s = s.max(0.0);
            let dir = b + d * s;
            let len2 = dir.norm_sq();
            if len2 == 0.0 {
                continue;
            }
            let lambda = (rel - c * s).dot(dir) / len2;
            if !(-1e-9..=1.0 + 1e-9).contains(&lambda) {
                continue;
            }
            let lambda = lambda.clamp(0.0, 1.0);
            let gamma = (1.0 - lambda) * r0.gamma + lambda * r1.gamma;
            if s > gamma * (1.0 + 1e-9) {
                continue;
            }
            if best.map_or(true, |p| s < p.s) {
                best = Some(FanPoint {
                    cell: i,
                    lambda,
                    s,
                    gamma,
                    foot: r0.foot.lerp(r1.foot, lambda),
                });
            }
        }
    }
    best
}

fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 {
        return vec![];
    }
    if a.abs() <= 1e-14 * scale {
        return if b != 0.0 { vec![-c / b] } else { vec![] };
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return vec![];
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let mut roots = vec![q / a];
    if q != 0.0 {
        roots.push(c / q);
    }
    roots
}

/// Local Lipschitz constant of the projection onto the front near `x`,
/// and the bound `1 + |x − y| / |x − v|` with `v` the upper end of the ray.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionProbe {
    pub x: Point2,
    pub foot: Point2,
    pub ratio: f64,
    pub bound: f64,
    pub ratio_over_bound: f64,
}

/// Largest `|y − y₁| / |x − x₁|` over probes `x₁` on the circle of radius
/// `h` around `x`.
pub fn projection_lipschitz_probe(
    front: &ConvexFront,
    x: Point2,
    h: f64,
) -> Result<ProjectionProbe, VerificationError> {
    let rays = front.sample_rays()?;
    projection_lipschitz_probe_with(front, &rays, x, h)
}

/// [`projection_lipschitz_probe`] over already sampled rays.
pub fn projection_lipschitz_probe_with(
    front: &ConvexFront,
    rays: &[RaySample],
    x: Point2,
    h: f64,
) -> Result<ProjectionProbe, VerificationError> {
    if !(h > 0.0) {
        return Err(VerificationError::InvalidInput(format!("probe radius must be positive, got {h}")));
    }
    if !(front.signed_distance(x) > 0.0) {
        return Err(VerificationError::InvalidInput(format!("{x:?} is not interior")));
    }
    let centre = fan_project(front, rays, x).ok_or(VerificationError::Unprojectable { x })?;
    let margin = centre.gamma - centre.s;
    if margin <= RIDGE_MARGIN * h {
        return Err(VerificationError::RidgeProximity {
            margin,
            required: RIDGE_MARGIN * h,
        });
    }
    let mut ratio: f64 = 0.0;
    for k in 0..PROBE_DIRECTIONS {
        let x1 = x + Point2::polar(std::f64::consts::TAU * k as f64 / PROBE_DIRECTIONS as f64) * h;
        let p = fan_project(front, rays, x1).ok_or(VerificationError::Unprojectable { x: x1 })?;
        ratio = ratio.max(p.foot.dist(centre.foot) / x1.dist(x));
    }
    let bound = 1.0 + centre.s / margin;
    Ok(ProjectionProbe {
        x,
        foot: centre.foot,
        ratio,
        bound,
        ratio_over_bound: ratio / bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::shapes;

    #[test]
    fn disk_radial_projection() {
        let f = shapes::disk(Point2::new(0.0, 0.0), 1.0, 256).unwrap();
        for rho in [0.05, 0.5, 0.99] {
            let p = projection_lipschitz_probe(&f, Point2::new(rho, 0.0), 1e-4).unwrap();
            assert!((p.ratio_over_bound - 1.0).abs() <= 0.05, "{rho}: {p:?}");
            assert!((p.bound - 1.0 / rho).abs() <= 1e-6 / rho, "{rho}: {p:?}");
        }
    }

    #[test]
    fn ridge_points_are_rejected() {
        let f = shapes::disk(Point2::new(0.0, 0.0), 1.0, 128).unwrap();
        let err = projection_lipschitz_probe(&f, Point2::new(1e-4, 0.0), 1e-4).unwrap_err();
        assert!(matches!(err, VerificationError::RidgeProximity { .. }));
    }

    #[test]
    fn fan_projection_on_flat_edge_is_orthogonal() {
        let f = shapes::rounded_square(Point2::new(0.0, 0.0), 2.0, 0.2, 256).unwrap();
        let rays = f.sample_rays().unwrap();
        let p = fan_project(&f, &rays, Point2::new(0.1, -0.7)).unwrap();
        assert!((p.foot.x - 0.1).abs() < 1e-12 && (p.foot.y + 1.0).abs() < 1e-12, "{p:?}");
        assert!((p.s - 0.3).abs() < 1e-12);
    }
}
