use super::front::{ConvexFront, MIN_MARKERS};
use super::point::Point2;

impl ConvexFront {
    /// Intersection of two convex fronts by successive half-plane clipping.
    /// Returns `None` when the interiors are disjoint.
    pub fn intersect(&self, other: &ConvexFront) -> Option<ConvexFront> {
        let (alo, ahi) = self.bbox();
        let (blo, bhi) = other.bbox();
        if alo.x > bhi.x || blo.x > ahi.x || alo.y > bhi.y || blo.y > ahi.y {
            return None;
        }
        let scale = self.diameter().max(other.diameter());
        let mut poly: Vec<Point2> = self.markers().to_vec();
        for j in 0..other.len() {
            if poly.is_empty() {
                return None;
            }
            let a = other.marker(j);
            let nu = other.edge_inner_normal(j);
            poly = clip_half_plane(&poly, a, nu, 1e-14 * scale);
        }
        let merge = 1e-12 * scale;
        let mut pts: Vec<Point2> = Vec::with_capacity(poly.len());
        for p in poly {
            if pts.last().map_or(true, |q: &Point2| q.dist(p) > merge) {
                pts.push(p);
            }
        }
        while pts.len() > 1 && pts[0].dist(pts[pts.len() - 1]) <= merge {
            pts.pop();
        }
        if pts.len() < 3 {
            return None;
        }
        let area = 0.5
            * (0..pts.len())
                .map(|i| pts[i].cross(pts[(i + 1) % pts.len()]))
                .sum::<f64>();
        if area <= 1e-12 * scale * scale {
            return None;
        }
        while pts.len() < MIN_MARKERS {
            pts = split_longest_edge(pts);
        }
        ConvexFront::new(pts).ok()
    }
}

/// Keeps the part of `poly` where `(p - a)·nu >= 0`; points within `eps`
/// of the line count as on it.
fn clip_half_plane(poly: &[Point2], a: Point2, nu: Point2, eps: f64) -> Vec<Point2> {
    let side = |p: Point2| {
        let s = (p - a).dot(nu);
        if s.abs() <= eps {
            0.0
        } else {
            s
        }
    };
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 2);
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let (sp, sq) = (side(p), side(q));
        if sp >= 0.0 {
            out.push(p);
        }
        if (sp > 0.0 && sq < 0.0) || (sp < 0.0 && sq > 0.0) {
            let t = (sp / (sp - sq)).clamp(0.0, 1.0);
            out.push(p.lerp(q, t));
        }
    }
    out
}

fn split_longest_edge(pts: Vec<Point2>) -> Vec<Point2> {
    let n = pts.len();
    let k = (0..n)
        .max_by(|&i, &j| {
            pts[i]
                .dist(pts[(i + 1) % n])
                .total_cmp(&pts[j].dist(pts[(j + 1) % n]))
        })
        .unwrap_or(0);
    let mut out = Vec::with_capacity(n + 1);
    for (i, &p) in pts.iter().enumerate() {
        out.push(p);
        if i == k {
            out.push(p.lerp(pts[(i + 1) % n], 0.5));
        }
    }
    out
}
