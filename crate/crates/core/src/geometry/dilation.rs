use super::front::ConvexFront;
use super::point::Point2;
use super::GeometryError;

/// The `r`-neighborhood of a front: edges pushed outward by `r` and every
/// marker bridged by a circular arc.
#[derive(Clone, Debug)]
pub struct DilatedFront {
    pub base: ConvexFront,
    pub radius: f64,
    pub offset_markers: Vec<Point2>,
}

impl DilatedFront {
    /// The offset polyline as a front of its own.
    pub fn front(&self) -> Result<ConvexFront, GeometryError> {
        ConvexFront::new(self.offset_markers.clone())
    }
}

impl ConvexFront {
    /// Minkowski sum with the disk of radius `r`. Every arc is replaced by
    /// the polygon circumscribed about it, with tangents at the midpoints of
    /// equal sub-arcs no wider than the mean turning per marker of the base
    /// front.
    ///
    /// Circumscribing keeps every line of the result tangent to a circle of
    /// radius `r` around a base marker, so interior distances grow by exactly
    /// `r` and the ridge is preserved. Inscribed chords would pull some lines
    /// inward by their sagitta, which moves the ridge of nearly circular
    /// fronts by O(r).
    pub fn dilate(&self, r: f64) -> Result<DilatedFront, GeometryError> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(GeometryError::InvalidParameter(format!(
                "dilation radius must be positive, got {r}"
            )));
        }
        let n = self.len();
        let step = std::f64::consts::TAU / n as f64;
        let merge = 1e-12 * (self.diameter() + 2.0 * r);
        let mut out: Vec<Point2> = Vec::with_capacity(2 * n);
        let mut normals: Vec<Point2> = Vec::new();
        for i in 0..n {
            let v = self.marker(i);
            let from = -self.edge_inner_normal(self.prev(i));
            let to = -self.edge_inner_normal(i);
            let sweep = from.cross(to).atan2(from.dot(to)).max(0.0);
            let pieces = if sweep <= 1e-12 {
                0
            } else {
                ((sweep / step) - 1e-9).ceil().max(1.0) as usize
            };
            let base_angle = from.y.atan2(from.x);
            normals.clear();
            normals.push(from);
            normals.extend(
                (0..pieces).map(|k| Point2::polar(base_angle + sweep * (k as f64 + 0.5) / pieces as f64)),
            );
            normals.push(to);
            for w in normals.windows(2) {
                // Intersection of the tangents to the circle around `v` with
                // outward normals `w[0]` and `w[1]`.
                let p = v + (w[0] + w[1]) * (r / (1.0 + w[0].dot(w[1])));
                if out.last().map_or(true, |q| q.dist(p) > merge) {
                    out.push(p);
                }
            }
        }
        while out.len() > 1 && out[0].dist(out[out.len() - 1]) <= merge {
            out.pop();
        }
        Ok(DilatedFront {
            base: self.clone(),
            radius: r,
            offset_markers: out,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::shapes;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn rejects_nonpositive_radius() {
        let d = shapes::disk(Point2::ORIGIN, 1.0, 16).unwrap();
        assert!(d.dilate(0.0).is_err());
        assert!(d.dilate(-1.0).is_err());
    }

    #[test]
    fn offset_markers_sit_just_beyond_r() {
        // Corners of a circumscribed arc lie between the arc and its
        // circumradius `r / cos(β/2)`, with `β` at most the mean turning.
        let f = shapes::rounded_square(Point2::new(0.5, 0.5), 2.0, 0.2, 128).unwrap();
        let outer = 1.0 / (PI / 128.0).cos();
        for r in [0.05, 0.5, 3.0] {
            let dil = f.dilate(r).unwrap();
            for &p in &dil.offset_markers {
                let d = -f.signed_distance(p);
                assert!(d >= r - f.tol_geom() && d <= r * outer + f.tol_geom(), "{p:?}: {d}");
            }
        }
    }

    #[test]
    fn disk_dilates_to_larger_disk() {
        let n = 256;
        let (big_r, r) = (1.0, 0.5);
        let dil = shapes::disk(Point2::ORIGIN, big_r, n).unwrap().dilate(r).unwrap().front().unwrap();
        let target = shapes::disk(Point2::ORIGIN, big_r + r, n).unwrap();
        let sagitta = (big_r + r) * (1.0 - (PI / n as f64).cos());
        assert!(dil.hausdorff(&target) <= 2.0 * sagitta, "{}", dil.hausdorff(&target));
    }

    #[test]
    fn square_area_follows_steiner() {
        let sq = shapes::rounded_square(Point2::ORIGIN, 2.0, 0.0, 64).unwrap();
        let r = 0.5;
        let dil = sq.dilate(r).unwrap().front().unwrap();
        // Each quarter arc gets `m` tangents at sub-arc midpoints; the
        // circumscribed corner has area r² Σ tan(β/2) over its angle steps.
        let m = ((FRAC_PI_2 / (2.0 * PI / 64.0)) - 1e-9).ceil();
        let beta = FRAC_PI_2 / m;
        let corner = r * r * (2.0 * (0.25 * beta).tan() + (m - 1.0) * (0.5 * beta).tan());
        let exact = 4.0 + 8.0 * r + 4.0 * corner;
        assert!((dil.area() - exact).abs() <= 1e-12, "{} vs {exact}", dil.area());
        let steiner = 4.0 + 4.0 * (2.0 * r) + PI * r * r;
        let excess = PI * r * r * beta * beta / 12.0;
        assert!(dil.area() >= steiner && dil.area() - steiner <= excess, "{}", dil.area());
    }

    #[test]
    fn interior_distances_shift_by_r() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for base in [
            shapes::disk(Point2::ORIGIN, 1.0, 256).unwrap(),
            shapes::rounded_square(Point2::ORIGIN, 2.0, 0.25, 256).unwrap(),
        ] {
            for r in [0.1, 0.5, 2.0] {
                let dil = base.dilate(r).unwrap().front().unwrap();
                let mut hits = 0;
                while hits < 100 {
                    let x = Point2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    let d = base.signed_distance(x);
                    if d <= 0.0 {
                        continue;
                    }
                    hits += 1;
                    let dr = dil.signed_distance(x);
                    assert!((dr - d - r).abs() <= 1e-12 * (1.0 + r), "x={x:?} r={r}: {dr} vs {}", d + r);
                }
            }
        }
    }

    #[test]
    fn ray_ends_are_shared() {
        for base in [
            shapes::disk(Point2::ORIGIN, 1.0, 512).unwrap(),
            shapes::rounded_square(Point2::ORIGIN, 2.0, 0.0, 64).unwrap(),
        ] {
            for r in [0.1, 0.7, 2.0] {
                let dil = base.dilate(r).unwrap().front().unwrap();
                let tol_gamma = 1e-9 * dil.diameter();
                for i in 0..base.len() {
                    let y = base.marker(i).lerp(base.marker(i + 1), 0.5);
                    let nu = base.edge_inner_normal(i);
                    let g = base.ray_length_gamma(y, nu).unwrap();
                    let gr = dil.ray_length_gamma(y - nu * r, nu).unwrap();
                    assert!((gr - g - r).abs() <= 2.0 * tol_gamma, "edge {i}: {gr} vs {}", g + r);
                }
            }
        }
    }

    #[test]
    fn curvature_transfers() {
        let n = 512;
        let big_r = 1.0;
        let base = shapes::disk(Point2::ORIGIN, big_r, n).unwrap();
        let kappa = 1.0 / big_r;
        for r in [0.05, 0.5, 2.0] {
            let dil = base.dilate(r).unwrap().front().unwrap();
            let want = kappa / (1.0 + kappa * r);
            for i in 0..dil.len() {
                let k = dil.curvature_at(i).unwrap();
                assert!((k / want - 1.0).abs() <= 5e-3, "r={r} i={i}: {k} vs {want}");
            }
        }
    }
}
