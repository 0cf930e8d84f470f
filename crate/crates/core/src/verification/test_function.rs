use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{ConvexFront, Point2};

/// A scalar field on the plane.
pub trait ScalarField: Sync {
    fn value(&self, p: Point2) -> f64;
}

impl<F: Fn(Point2) -> f64 + Sync> ScalarField for F {
    fn value(&self, p: Point2) -> f64 {
        self(p)
    }
}

/// Monomial `c · x^i · y^j`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub i: u32,
    pub j: u32,
    pub c: f64,
}

/// Largest total degree of a polynomial test function.
pub const MAX_DEGREE: u32 = 3;

/// Smooth or 1-Lipschitz test functions with analytic gradients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    Polynomial { terms: Vec<Monomial> },
    /// `exp(−|x − center|² / width²)`.
    Gaussian { center: Point2, width: f64 },
    /// `max_k (height_k − |x − apex_k|)`, 1-Lipschitz.
    ConeMax { cones: Vec<(f64, Point2)> },
}

impl TestFunction {
    pub fn constant(c: f64) -> Self {
        Self::Polynomial {
            terms: vec![Monomial { i: 0, j: 0, c }],
        }
    }

    /// Polynomial from `(i, j, c)` triples. Panics above [`MAX_DEGREE`].
    pub fn polynomial(terms: &[(u32, u32, f64)]) -> Self {
        assert!(
            terms.iter().all(|&(i, j, _)| i + j <= MAX_DEGREE),
            "polynomial test functions have degree at most {MAX_DEGREE}"
        );
        Self::Polynomial {
            terms: terms.iter().map(|&(i, j, c)| Monomial { i, j, c }).collect(),
        }
    }

    pub fn gaussian(center: Point2, width: f64) -> Self {
        assert!(width > 0.0, "gaussian width must be positive");
        Self::Gaussian { center, width }
    }

    pub fn cone(apex: Point2, height: f64) -> Self {
        Self::ConeMax {
            cones: vec![(height, apex)],
        }
    }

    /// Random cubic with coefficients in `[-1, 1]`.
    pub fn random_polynomial<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut terms = Vec::new();
        for deg in 0..=MAX_DEGREE {
            for i in 0..=deg {
                terms.push(Monomial {
                    i,
                    j: deg - i,
                    c: rng.gen_range(-1.0..=1.0),
                });
            }
        }
        Self::Polynomial { terms }
    }

    /// Random gaussian centred in the bounding box of `front`, width between
    /// a tenth and a half of its diameter.
    pub fn random_gaussian<R: Rng + ?Sized>(rng: &mut R, front: &ConvexFront) -> Self {
        let (lo, hi) = front.bbox();
        let d = front.diameter();
        Self::Gaussian {
            center: Point2::new(rng.gen_range(lo.x..=hi.x), rng.gen_range(lo.y..=hi.y)),
            width: rng.gen_range(0.1 * d..=0.5 * d),
        }
    }

    /// Random maximum of one to four cones with apexes within one diameter
    /// of the body and heights in `[-diam, diam]`.
    pub fn random_cone_max<R: Rng + ?Sized>(rng: &mut R, front: &ConvexFront) -> Self {
        let (lo, hi) = front.bbox();
        let d = front.diameter();
        let count = rng.gen_range(1..=4);
        Self::ConeMax {
            cones: (0..count)
                .map(|_| {
                    let apex = Point2::new(
                        rng.gen_range(lo.x - d..=hi.x + d),
                        rng.gen_range(lo.y - d..=hi.y + d),
                    );
                    (rng.gen_range(-d..=d), apex)
                })
                .collect(),
        }
    }

    pub fn value(&self, p: Point2) -> f64 {
        match self {
            Self::Polynomial { terms } => terms
                .iter()
                .map(|m| m.c * p.x.powi(m.i as i32) * p.y.powi(m.j as i32))
                .sum(),
            Self::Gaussian { center, width } => (-(p - *center).norm_sq() / (width * width)).exp(),
            Self::ConeMax { cones } => cones
                .iter()
                .map(|&(h, a)| h - p.dist(a))
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Gradient. For `ConeMax` this is the gradient of the active cone, which
    /// is undefined on the kinks and at the apexes.
    pub fn gradient(&self, p: Point2) -> Point2 {
        match self {
            Self::Polynomial { terms } => terms.iter().fold(Point2::new(0.0, 0.0), |g, m| {
                let dx = if m.i == 0 {
                    0.0
                } else {
                    m.c * m.i as f64 * p.x.powi(m.i as i32 - 1) * p.y.powi(m.j as i32)
                };
                let dy = if m.j == 0 {
                    0.0
                } else {
                    m.c * m.j as f64 * p.x.powi(m.i as i32) * p.y.powi(m.j as i32 - 1)
                };
                g + Point2::new(dx, dy)
            }),
            Self::Gaussian { center, width } => {
                let w2 = width * width;
                (p - *center) * (-2.0 / w2 * self.value(p))
            }
            Self::ConeMax { cones } => {
                let (_, apex) = cones
                    .iter()
                    .map(|&(h, a)| (h - p.dist(a), a))
                    .fold((f64::NEG_INFINITY, p), |best, c| if c.0 > best.0 { c } else { best });
                (apex - p).normalized().unwrap_or(Point2::new(0.0, 0.0))
            }
        }
    }

    /// Gap between the two largest cone values at `p` (infinite for smooth
    /// kinds and single cones). Small values flag the kink set.
    pub fn kink_gap(&self, p: Point2) -> f64 {
        let Self::ConeMax { cones } = self else {
            return f64::INFINITY;
        };
        let mut top = [f64::NEG_INFINITY; 2];
        for &(h, a) in cones {
            let v = h - p.dist(a);
            if v > top[0] {
                top = [v, top[0]];
            } else if v > top[1] {
                top[1] = v;
            }
        }
        let apex = cones.iter().map(|&(_, a)| p.dist(a)).fold(f64::INFINITY, f64::min);
        (top[0] - top[1]).min(apex)
    }
}

impl ScalarField for TestFunction {
    fn value(&self, p: Point2) -> f64 {
        TestFunction::value(self, p)
    }
}

/// Smooth temporal cutoff `sin⁴(π(t − t0)/(t1 − t0))` on `[t0, t1]`, zero
/// outside. It vanishes with three derivatives at both ends, so the
/// trapezoid rule in time converges fast.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeBump {
    pub t0: f64,
    pub t1: f64,
}

impl TimeBump {
    pub fn new(t0: f64, t1: f64) -> Self {
        assert!(t1 > t0, "time bump needs t0 < t1");
        Self { t0, t1 }
    }

    pub fn value(&self, t: f64) -> f64 {
        if t <= self.t0 || t >= self.t1 {
            return 0.0;
        }
        (std::f64::consts::PI * (t - self.t0) / (self.t1 - self.t0)).sin().powi(4)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        if t <= self.t0 || t >= self.t1 {
            return 0.0;
        }
        let k = std::f64::consts::PI / (self.t1 - self.t0);
        let th = k * (t - self.t0);
        4.0 * k * th.sin().powi(3) * th.cos()
    }
}

/// Space-time test function `φ(x, t) = spatial(x) · bump(t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeTest {
    pub spatial: TestFunction,
    pub bump: TimeBump,
}
