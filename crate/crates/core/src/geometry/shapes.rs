//! Marker fronts for the standard initial shapes.

use std::f64::consts::TAU;

use super::front::ConvexFront;
use super::point::Point2;
use super::GeometryError;

/// Regular `n`-gon inscribed in the circle of radius `radius`, first marker
/// at angle zero.
pub fn disk(center: Point2, radius: f64, n: usize) -> Result<ConvexFront, GeometryError> {
    positive("radius", radius)?;
    ConvexFront::new(
        (0..n)
            .map(|k| center + Point2::polar(TAU * k as f64 / n as f64) * radius)
            .collect(),
    )
}

/// Ellipse with semi-axes `a` (along x) and `b`, sampled uniformly in the
/// angular parameter.
pub fn ellipse(center: Point2, a: f64, b: f64, n: usize) -> Result<ConvexFront, GeometryError> {
    positive("semi-axis a", a)?;
    positive("semi-axis b", b)?;
    ConvexFront::new(
        (0..n)
            .map(|k| {
                let th = TAU * k as f64 / n as f64;
                center + Point2::new(a * th.cos(), b * th.sin())
            })
            .collect(),
    )
}

/// Axis-aligned square of side `side` centered at `center` with corners
/// rounded by arcs of radius `fillet`.
pub fn rounded_square(
    center: Point2,
    side: f64,
    fillet: f64,
    n: usize,
) -> Result<ConvexFront, GeometryError> {
    positive("side", side)?;
    let h = 0.5 * side;
    let corners = [
        Point2::new(h, -h),
        Point2::new(h, h),
        Point2::new(-h, h),
        Point2::new(-h, -h),
    ]
    .map(|c| c + center);
    rounded_polygon(&corners, fillet, n)
}

/// Markers every arc receives at least, counting both tangent points.
const MIN_ARC_MARKERS: usize = 5;

/// Convex polygon given by counterclockwise `corners`, each corner replaced
/// by a tangent circular arc of radius `fillet` (`0` keeps sharp corners).
///
/// Arcs get markers in proportion to their length but never fewer than
/// [`MIN_ARC_MARKERS`]; the straight pieces share the rest, evenly spaced.
pub fn rounded_polygon(
    corners: &[Point2],
    fillet: f64,
    n: usize,
) -> Result<ConvexFront, GeometryError> {
    let m = corners.len();
    if m < 3 {
        return Err(GeometryError::InvalidParameter(format!(
            "a polygon needs at least 3 corners, got {m}"
        )));
    }
    if !(fillet >= 0.0 && fillet.is_finite()) {
        return Err(GeometryError::InvalidParameter(format!(
            "fillet radius must be nonnegative, got {fillet}"
        )));
    }
    struct Arc {
        center: Point2,
        start_angle: f64,
        sweep: f64,
        start: Point2,
        end: Point2,
    }
    let mut arcs = Vec::with_capacity(m);
    for k in 0..m {
        let prev = corners[(k + m - 1) % m];
        let c = corners[k];
        let next = corners[(k + 1) % m];
        let d_in = (c - prev).normalized().ok_or(GeometryError::DegenerateFront { index: k })?;
        let d_out = (next - c).normalized().ok_or(GeometryError::DegenerateFront { index: k })?;
        let sweep = d_in.cross(d_out).atan2(d_in.dot(d_out));
        if !(sweep > 0.0) {
            return Err(GeometryError::NotConvex {
                index: k,
                cross: d_in.cross(d_out),
            });
        }
        let tangent = fillet * (0.5 * sweep).tan();
        let start = c - d_in * tangent;
        let center = start + d_in.perp() * fillet;
        let rel = start - center;
        arcs.push(Arc {
            center,
            start_angle: rel.y.atan2(rel.x),
            sweep,
            start,
            end: c + d_out * tangent,
        });
    }
    let straight: Vec<f64> = (0..m).map(|k| arcs[k].end.dist(arcs[(k + 1) % m].start)).collect();
    if straight.iter().any(|&l| l < -1e-12) {
        return Err(GeometryError::InvalidParameter("fillet too large for the polygon".into()));
    }
    let arc_len: Vec<f64> = arcs.iter().map(|a| a.sweep * fillet).collect();
    let perimeter: f64 = straight.iter().sum::<f64>() + arc_len.iter().sum::<f64>();

    // Markers per arc, including both tangent points (a sharp corner is one marker).
    let arc_pts: Vec<usize> = arc_len
        .iter()
        .map(|&l| {
            if fillet == 0.0 {
                1
            } else {
                ((n as f64 * l / perimeter).round() as usize + 1).max(MIN_ARC_MARKERS)
            }
        })
        .collect();
    let used: usize = arc_pts.iter().sum();
    if used + m > n {
        return Err(GeometryError::TooFewMarkers {
            got: n,
            min: used + m,
        });
    }
    let edge_pts = apportion(n - used, &straight);

    let mut out = Vec::with_capacity(n);
    for k in 0..m {
        let arc = &arcs[k];
        let count = arc_pts[k];
        if count == 1 {
            out.push(corners[k]);
        } else {
            for j in 0..count {
                let th = arc.start_angle + arc.sweep * j as f64 / (count - 1) as f64;
                out.push(arc.center + Point2::polar(th) * fillet);
            }
        }
        let from = if count == 1 { corners[k] } else { arc.end };
        let to = if arc_pts[(k + 1) % m] == 1 {
            corners[(k + 1) % m]
        } else {
            arcs[(k + 1) % m].start
        };
        let pieces = edge_pts[k] + 1;
        for j in 1..pieces {
            out.push(from.lerp(to, j as f64 / pieces as f64));
        }
    }
    ConvexFront::new(out)
}

/// Splits `total` markers across pieces proportionally to `weights`
/// (largest remainders first).
fn apportion(total: usize, weights: &[f64]) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    let raw: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    let mut out: Vec<usize> = raw.iter().map(|r| r.floor() as usize).collect();
    let mut left = total - out.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| (raw[b] - raw[b].floor()).total_cmp(&(raw[a] - raw[a].floor())));
    for &k in order.iter().cycle() {
        if left == 0 {
            break;
        }
        out[k] += 1;
        left -= 1;
    }
    out
}

fn positive(name: &str, v: f64) -> Result<(), GeometryError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(GeometryError::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}
