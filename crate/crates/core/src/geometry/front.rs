use super::point::{closest_on_segment, Point2};
use super::GeometryError;

/// Smallest marker count accepted for a front.
pub const MIN_MARKERS: usize = 8;

/// Relative tolerance for distance comparisons (scaled by the diameter).
pub const REL_TOL_GEOM: f64 = 1e-9;
/// Relative tolerance for the convexity test (scaled by the squared diameter).
pub const REL_TOL_CONVEX: f64 = 1e-12;

/// Closed counterclockwise marker polyline bounding a convex body.
///
/// The last marker connects back to the first. Construction through
/// [`ConvexFront::new`] enforces orientation, convexity and simplicity;
/// [`ConvexFront::new_unchecked`] skips the convexity test and exists for
/// diagnostic inputs only.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexFront {
    markers: Vec<Point2>,
    /// `cum[i]` is the arclength from marker 0 to marker i; `cum[n]` is the perimeter.
    cum: Vec<f64>,
    diam: f64,
    convex: bool,
}

impl ConvexFront {
    pub fn new(markers: Vec<Point2>) -> Result<Self, GeometryError> {
        let front = Self::build(markers)?;
        front.validate_convex()?;
        Ok(Self {
            convex: true,
            ..front
        })
    }

    /// Accepts any simple counterclockwise polyline. Operations that rely
    /// on convexity fall back to slower general-purpose paths.
    pub fn new_unchecked(markers: Vec<Point2>) -> Result<Self, GeometryError> {
        let front = Self::build(markers)?;
        let area = front.signed_area();
        if !(area > 0.0) {
            return Err(GeometryError::NotCounterclockwise { area });
        }
        Ok(front)
    }

    fn build(markers: Vec<Point2>) -> Result<Self, GeometryError> {
        let n = markers.len();
        if n < MIN_MARKERS {
            return Err(GeometryError::TooFewMarkers {
                got: n,
                min: MIN_MARKERS,
            });
        }
        if let Some(index) = markers.iter().position(|p| !p.is_finite()) {
            return Err(GeometryError::NonFinite { index });
        }
        let mut diam: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                diam = diam.max(markers[i].dist(markers[j]));
            }
        }
        let mut cum = Vec::with_capacity(n + 1);
        cum.push(0.0);
        let mut acc = 0.0;
        for i in 0..n {
            let len = markers[i].dist(markers[(i + 1) % n]);
            if len <= 1e-14 * diam {
                return Err(GeometryError::DegenerateFront { index: i });
            }
            acc += len;
            cum.push(acc);
        }
        Ok(Self {
            markers,
            cum,
            diam,
            convex: false,
        })
    }

    fn validate_convex(&self) -> Result<(), GeometryError> {
        let area = self.signed_area();
        if !(area > 0.0) {
            return Err(GeometryError::NotCounterclockwise { area });
        }
        let tol = self.tol_convex();
        let mut turning = 0.0;
        for i in 0..self.len() {
            let e0 = self.edge(self.prev(i));
            let e1 = self.edge(i);
            let cross = e0.cross(e1);
            if cross < -tol {
                return Err(GeometryError::NotConvex { index: i, cross });
            }
            turning += cross.atan2(e0.dot(e1));
        }
        if (turning - std::f64::consts::TAU).abs() > 1e-6 {
            return Err(GeometryError::NotSimple { turning });
        }
        Ok(())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.markers.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.markers.is_empty()
    }

    /// Whether the convexity invariant was verified at construction.
    #[inline]
    pub fn is_convex(&self) -> bool {
        self.convex
    }

    #[inline]
    pub fn markers(&self) -> &[Point2] {
        &self.markers
    }

    pub fn into_markers(self) -> Vec<Point2> {
        self.markers
    }

    /// Marker with cyclic indexing.
    #[inline]
    pub fn marker(&self, i: usize) -> Point2 {
        self.markers[i % self.len()]
    }

    #[inline]
    pub fn prev(&self, i: usize) -> usize {
        (i + self.len() - 1) % self.len()
    }

    #[inline]
    pub fn next(&self, i: usize) -> usize {
        (i + 1) % self.len()
    }

    /// Edge vector from marker `i` to marker `i + 1`.
    #[inline]
    pub fn edge(&self, i: usize) -> Point2 {
        self.marker(i + 1) - self.marker(i)
    }

    #[inline]
    pub fn edge_len(&self, i: usize) -> f64 {
        self.cum[i + 1] - self.cum[i]
    }

    /// Inward unit normal of edge `i` (left of the edge for a ccw front).
    #[inline]
    pub fn edge_inner_normal(&self, i: usize) -> Point2 {
        self.edge(i).perp() * (1.0 / self.edge_len(i))
    }

    /// Arclength position of marker `i`.
    #[inline]
    pub fn arclength(&self, i: usize) -> f64 {
        self.cum[i]
    }

    #[inline]
    pub fn perimeter(&self) -> f64 {
        self.cum[self.len()]
    }

    #[inline]
    pub fn diameter(&self) -> f64 {
        self.diam
    }

    /// Distance tolerance `1e-9 · diam`.
    #[inline]
    pub fn tol_geom(&self) -> f64 {
        REL_TOL_GEOM * self.diam
    }

    /// Cross-product tolerance `1e-12 · diam²`.
    #[inline]
    pub fn tol_convex(&self) -> f64 {
        REL_TOL_CONVEX * self.diam * self.diam
    }

    /// Shoelace area (positive for counterclockwise fronts).
    pub fn signed_area(&self) -> f64 {
        let n = self.len();
        let mut a = 0.0;
        for i in 0..n {
            a += self.markers[i].cross(self.markers[(i + 1) % n]);
        }
        0.5 * a
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn centroid(&self) -> Point2 {
        let n = self.len();
        let (mut cx, mut cy, mut a) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let p = self.markers[i];
            let q = self.markers[(i + 1) % n];
            let w = p.cross(q);
            a += w;
            cx += (p.x + q.x) * w;
            cy += (p.y + q.y) * w;
        }
        Point2::new(cx / (3.0 * a), cy / (3.0 * a))
    }

    /// Axis-aligned bounding box as `(min, max)`.
    pub fn bbox(&self) -> (Point2, Point2) {
        let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.markers {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        (lo, hi)
    }

    /// Smallest spacing between consecutive markers.
    pub fn min_spacing(&self) -> f64 {
        (0..self.len())
            .map(|i| self.edge_len(i))
            .fold(f64::INFINITY, f64::min)
    }

    /// Crossing-number containment test (works for nonconvex polylines).
    pub fn contains(&self, p: Point2) -> bool {
        let n = self.len();
        let mut inside = false;
        let mut j = n - 1;
        for i in 0..n {
            let a = self.markers[i];
            let b = self.markers[j];
            if (a.y > p.y) != (b.y > p.y) {
                let x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x_cross {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }

    /// Unsigned distance to the polyline, with the nearest edge index and the
    /// parameter of the nearest point on that edge.
    pub fn nearest_on_polyline(&self, p: Point2) -> (f64, usize, f64) {
        let mut best = (f64::INFINITY, 0, 0.0);
        for i in 0..self.len() {
            let (q, t) = closest_on_segment(p, self.marker(i), self.marker(i + 1));
            let d = p.dist(q);
            if d < best.0 {
                best = (d, i, t);
            }
        }
        best
    }

    /// Signed distance: positive inside, negative outside, exact minimum
    /// over all edges.
    pub fn signed_distance(&self, p: Point2) -> f64 {
        let (d, _, _) = self.nearest_on_polyline(p);
        if self.contains(p) {
            d
        } else {
            -d
        }
    }

    /// All boundary points whose distance to `p` is within `tol` of the
    /// minimum, sorted by arclength. The first entry is the designated
    /// representative.
    pub fn nearest_points(&self, p: Point2, tol: f64) -> Vec<Point2> {
        let n = self.len();
        let mut cands: Vec<(f64, f64, Point2)> = Vec::with_capacity(n);
        let mut dmin = f64::INFINITY;
        for i in 0..n {
            let a = self.marker(i);
            let (q, t) = closest_on_segment(p, a, self.marker(i + 1));
            let d = p.dist(q);
            dmin = dmin.min(d);
            let mut s = self.cum[i] + t * self.edge_len(i);
            if s >= self.perimeter() {
                s -= self.perimeter();
            }
            cands.push((d, s, q));
        }
        let mut out: Vec<(f64, Point2)> = cands
            .into_iter()
            .filter(|(d, _, _)| *d <= dmin + tol)
            .map(|(_, s, q)| (s, q))
            .collect();
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        // Shared vertices are reported by both adjacent edges.
        let mut dedup: Vec<(f64, Point2)> = Vec::with_capacity(out.len());
        for (s, q) in out {
            if dedup.iter().all(|(_, r)| r.dist(q) > tol) {
                dedup.push((s, q));
            }
        }
        dedup.into_iter().map(|(_, q)| q).collect()
    }

    /// Curvature of the circle through markers `i-1`, `i`, `i+1`; positive
    /// for a left (convex) turn, zero for collinear markers.
    pub fn curvature_at(&self, i: usize) -> Result<f64, GeometryError> {
        let i = i % self.len();
        let a = self.marker(self.prev(i));
        let b = self.marker(i);
        let c = self.marker(i + 1);
        let ab = a.dist(b);
        let bc = b.dist(c);
        let ac = a.dist(c);
        let floor = 1e-14 * self.diam.max(f64::MIN_POSITIVE);
        if ab <= floor || bc <= floor || ac <= floor {
            return Err(GeometryError::DegenerateFront { index: i });
        }
        let cross = (b - a).cross(c - b);
        Ok(2.0 * cross / (ab * bc * ac))
    }

    /// Inward unit normal at marker `i`: bisector of the adjacent edge normals.
    pub fn vertex_inner_normal(&self, i: usize) -> Result<Point2, GeometryError> {
        let i = i % self.len();
        (self.edge_inner_normal(self.prev(i)) + self.edge_inner_normal(i))
            .normalized()
            .ok_or(GeometryError::DegenerateFront { index: i })
    }

    /// Markers resampled at `count` equal arclength stations along the
    /// polyline, starting at marker 0.
    pub fn resample_equal_arclength(&self, count: usize) -> Vec<Point2> {
        let per = self.perimeter();
        let step = per / count as f64;
        let mut out = Vec::with_capacity(count);
        let mut edge = 0;
        for k in 0..count {
            let s = k as f64 * step;
            while edge + 1 < self.len() && self.cum[edge + 1] <= s {
                edge += 1;
            }
            let t = ((s - self.cum[edge]) / self.edge_len(edge)).clamp(0.0, 1.0);
            out.push(self.marker(edge).lerp(self.marker(edge + 1), t));
        }
        out
    }

    /// Hausdorff distance between the two marker polylines, evaluated at the
    /// markers of each (exact for nested convex fronts).
    pub fn hausdorff(&self, other: &ConvexFront) -> f64 {
        let one = self
            .markers
            .iter()
            .map(|&p| other.nearest_on_polyline(p).0)
            .fold(0.0, f64::max);
        let two = other
            .markers
            .iter()
            .map(|&p| self.nearest_on_polyline(p).0)
            .fold(0.0, f64::max);
        one.max(two)
    }

    /// Affine copy translated by `offset`.
    pub fn translated(&self, offset: Point2) -> Self {
        Self {
            markers: self.markers.iter().map(|&p| p + offset).collect(),
            cum: self.cum.clone(),
            diam: self.diam,
            convex: self.convex,
        }
    }

    /// Copy scaled about the origin by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            markers: self.markers.iter().map(|&p| p * factor).collect(),
            cum: self.cum.iter().map(|c| c * factor).collect(),
            diam: self.diam * factor,
            convex: self.convex,
        }
    }
}
