//! Velocity laws and mass transport densities along a single distance ray.
//!
//! A ray is described by the principal curvatures `κ` of the front at its
//! foot and its length `γ`. Along the ray the distance coordinate `s` runs
//! over `[0, γ]` and the area element carries the weight
//! `P(s) = ∏ (1 − κᵢ s)`.
//!
//! Sandpile: `V = F(κ, γ) / t` with `F` the `P`-weighted mean of `s` over the
//! ray, and the density solves `a' = a Σ κᵢ/(1 − κᵢ s) − s/t + V` with
//! `a(0) = a(γ) = 0`. Compression molding: `V = γ (1 − κγ/2)` and
//! `a' = a κ/(1 − κ s) − 1` with `a(0) = V`, `a(γ) = 0`.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature::GaussLegendre;

/// Allowed excess of `κγ` over 1 before a ray is rejected. Rays within the
/// allowance are clamped to `γ = 1/κ`.
pub const TOL_KG: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransportError {
    #[error("inadmissible ray: κγ = {kappa_gamma} exceeds 1 + {TOL_KG}")]
    InadmissibleRay { kappa_gamma: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("ODE oracle inconsistent: terminal density {residual:e} (velocity does not match the ray)")]
    OracleInconsistency { residual: f64 },
    #[error("density CSV: {0}")]
    Csv(String),
}

/// Principal curvatures `κ₁ … κ_{n−1}` at a boundary point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureVector(Vec<f64>);

impl CurvatureVector {
    pub fn new(kappas: Vec<f64>) -> Result<Self, TransportError> {
        if kappas.is_empty() {
            return Err(TransportError::InvalidParameter(
                "curvature vector needs at least one entry".into(),
            ));
        }
        if kappas.iter().any(|k| !k.is_finite()) {
            return Err(TransportError::InvalidParameter(format!(
                "curvatures must be finite, got {kappas:?}"
            )));
        }
        Ok(Self(kappas))
    }

    /// Curvature of a planar curve (`n = 2`).
    pub fn planar(kappa: f64) -> Self {
        Self(vec![kappa])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Ambient dimension `n`.
    pub fn dimension(&self) -> usize {
        self.0.len() + 1
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Area weight `∏ (1 − κᵢ s)` along the ray.
    pub fn weight(&self, s: f64) -> f64 {
        self.0.iter().map(|k| 1.0 - k * s).product()
    }

    /// `Σ κᵢ / (1 − κᵢ s)`, minus the Laplacian of the distance function.
    pub fn mean_curvature_sum(&self, s: f64) -> f64 {
        self.0.iter().map(|k| k / (1.0 - k * s)).sum()
    }

    /// Quadrature rule exact for the polynomial integrands of this dimension.
    fn rule(&self) -> GaussLegendre {
        GaussLegendre::new(self.dimension() + 2)
    }
}

/// Ray length after the admissibility check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Admissible {
    pub gamma: f64,
    /// `κγ` exceeded 1 by at most [`TOL_KG`] and `γ` was reduced to `1/κ`.
    pub clamped: bool,
}

/// Checks `κᵢγ ≤ 1` for all `i`, clamping small violations.
pub fn admissible_gamma(kappa: &CurvatureVector, gamma: f64) -> Result<Admissible, TransportError> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(TransportError::InvalidParameter(format!(
            "ray length must be nonnegative, got {gamma}"
        )));
    }
    let kmax = kappa.max();
    let kg = kmax * gamma;
    if kg <= 1.0 {
        return Ok(Admissible {
            gamma,
            clamped: false,
        });
    }
    if kg <= 1.0 + TOL_KG {
        return Ok(Admissible {
            gamma: 1.0 / kmax,
            clamped: true,
        });
    }
    Err(TransportError::InadmissibleRay { kappa_gamma: kg })
}

/// Weighted mean of `s` over `[0, γ]`: the sandpile speed factor.
pub fn f_sandpile(kappa: &CurvatureVector, gamma: f64) -> Result<f64, TransportError> {
    f_twocone(kappa, gamma, 0.0)
}

/// Weighted mean of `s` over `[δ, γ]`; equals `γ` when `δ = γ`.
pub fn f_twocone(kappa: &CurvatureVector, gamma: f64, delta: f64) -> Result<f64, TransportError> {
    let gamma = admissible_gamma(kappa, gamma)?.gamma;
    if !(delta >= 0.0) || delta > gamma * (1.0 + 1e-12) {
        return Err(TransportError::InvalidParameter(format!(
            "need 0 ≤ δ ≤ γ, got δ = {delta}, γ = {gamma}"
        )));
    }
    let delta = delta.min(gamma);
    if gamma - delta <= f64::EPSILON * gamma {
        return Ok(gamma);
    }
    if kappa.as_slice().iter().all(|&k| k == 0.0) {
        return Ok(0.5 * (delta + gamma));
    }
    let rule = kappa.rule();
    let (mut num, mut den) = (0.0, 0.0);
    for (s, w) in rule.points(delta, gamma) {
        let p = kappa.weight(s);
        num += w * s * p;
        den += w * p;
    }
    Ok((num / den).clamp(delta, gamma))
}

fn check_time(t: f64) -> Result<(), TransportError> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(TransportError::InvalidParameter(format!("time must be positive, got {t}")))
    }
}

/// Sandpile outer normal velocity `F(κ, γ) / t`.
pub fn velocity_sandpile(kappa: &CurvatureVector, gamma: f64, t: f64) -> Result<f64, TransportError> {
    check_time(t)?;
    Ok(f_sandpile(kappa, gamma)? / t)
}

/// Two-cone velocity `F(κ, γ, δ) / t`.
pub fn velocity_twocone(
    kappa: &CurvatureVector,
    gamma: f64,
    delta: f64,
    t: f64,
) -> Result<f64, TransportError> {
    check_time(t)?;
    Ok(f_twocone(kappa, gamma, delta)? / t)
}

/// Compression-molding law `V = γ (1 − κγ/2)`.
pub fn velocity_molding(kappa: f64, gamma: f64) -> Result<f64, TransportError> {
    let gamma = admissible_gamma(&CurvatureVector::planar(kappa), gamma)?.gamma;
    Ok(gamma * (1.0 - 0.5 * kappa * gamma))
}

fn check_station(s: f64, gamma: f64) -> Result<f64, TransportError> {
    if s >= 0.0 && s <= gamma * (1.0 + 1e-12) {
        Ok(s.min(gamma))
    } else {
        Err(TransportError::InvalidParameter(format!(
            "ray coordinate s = {s} outside [0, {gamma}]"
        )))
    }
}

/// Sandpile mass transport density at distance `s` along the ray:
/// `a(s) = (1/t) P(s)⁻¹ ∫₀ˢ P(ξ) (F − ξ) dξ`.
pub fn density_sandpile(
    kappa: &CurvatureVector,
    gamma: f64,
    t: f64,
    s: f64,
) -> Result<f64, TransportError> {
    check_time(t)?;
    let gamma = admissible_gamma(kappa, gamma)?.gamma;
    let s = check_station(s, gamma)?;
    if s == 0.0 || s == gamma {
        return Ok(0.0);
    }
    if kappa.as_slice().iter().all(|&k| k == 0.0) {
        return Ok(0.5 * s * (gamma - s) / t);
    }
    let f = f_sandpile(kappa, gamma)?;
    let rule = kappa.rule();
    let integrand = |xi: f64| kappa.weight(xi) * (f - xi);
    // The full-ray integral vanishes; integrate over the shorter side so the
    // small values near the ridge are not lost to cancellation.
    let partial = if s <= 0.5 * gamma {
        rule.integrate(0.0, s, integrand)
    } else {
        -rule.integrate(s, gamma, integrand)
    };
    Ok(partial / (t * kappa.weight(s)))
}

/// Compression-molding density `a(s) = ((γ − s)/2)(1 + (1 − κγ)/(1 − κs))`.
pub fn density_molding(kappa: f64, gamma: f64, s: f64) -> Result<f64, TransportError> {
    let gamma = admissible_gamma(&CurvatureVector::planar(kappa), gamma)?.gamma;
    let s = check_station(s, gamma)?;
    if s == gamma {
        return Ok(0.0);
    }
    Ok(0.5 * (gamma - s) * (1.0 + (1.0 - kappa * gamma) / (1.0 - kappa * s)))
}

/// Which ray ODE a profile belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum RayModel {
    Sandpile { t: f64 },
    Molding,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensitySample {
    pub s: f64,
    pub a: f64,
}

/// Density sampled along one ray.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityProfile {
    pub gamma: f64,
    /// Time for sandpile profiles, absent for molding.
    pub t: Option<f64>,
    /// Outer normal velocity of the ray's foot.
    pub velocity: f64,
    pub samples: Vec<DensitySample>,
}

impl DensityProfile {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), TransportError> {
        let mut w = csv::Writer::from_writer(out);
        let err = |e: csv::Error| TransportError::Csv(e.to_string());
        w.write_record(["s", "a"]).map_err(err)?;
        for p in &self.samples {
            w.write_record([format!("{:.16e}", p.s), format!("{:.16e}", p.a)])
                .map_err(err)?;
        }
        w.flush().map_err(|e| TransportError::Csv(e.to_string()))
    }
}

fn stations(gamma: f64, count: usize) -> Vec<f64> {
    let count = count.max(2);
    (0..count)
        .map(|k| gamma * k as f64 / (count - 1) as f64)
        .collect()
}

/// Closed-form density sampled at `count` equally spaced stations.
pub fn sample_density(
    model: RayModel,
    kappa: f64,
    gamma: f64,
    count: usize,
) -> Result<DensityProfile, TransportError> {
    let kv = CurvatureVector::planar(kappa);
    let gamma = admissible_gamma(&kv, gamma)?.gamma;
    let (t, velocity) = match model {
        RayModel::Sandpile { t } => (Some(t), velocity_sandpile(&kv, gamma, t)?),
        RayModel::Molding => (None, velocity_molding(kappa, gamma)?),
    };
    let samples = stations(gamma, count)
        .into_iter()
        .map(|s| {
            let a = match model {
                RayModel::Sandpile { t } => density_sandpile(&kv, gamma, t, s)?,
                RayModel::Molding => density_molding(kappa, gamma, s)?,
            };
            Ok(DensitySample { s, a })
        })
        .collect::<Result<_, TransportError>>()?;
    Ok(DensityProfile {
        gamma,
        t,
        velocity,
        samples,
    })
}

/// Local error target of the adaptive RK4 oracle.
const ORACLE_LOCAL_TOL: f64 = 1e-10;
/// Terminal density above which the supplied velocity is rejected.
const ORACLE_MAX_RESIDUAL: f64 = 1e-6;
/// Floor on the area weight when dividing out at the ridge (`κγ → 1`).
const ORACLE_WEIGHT_FLOOR: f64 = 1e-6;

/// Integrates the ray ODE from the foot with adaptive RK4, starting from the
/// foot boundary condition and the supplied `velocity`, and samples the
/// result at `count` stations.
///
/// The ODE is stepped in divergence form `(P a)' = P · (V − s/t)` (sandpile)
/// or `(P a)' = −P` (molding), which is the same equation multiplied by its
/// integrating factor and stays regular where `P → 0` at the ridge. The
/// terminal value `a(γ)` must vanish; otherwise the velocity does not belong
/// to this ray.
pub fn density_ode_oracle(
    model: RayModel,
    kappa: f64,
    gamma: f64,
    velocity: f64,
    count: usize,
) -> Result<DensityProfile, TransportError> {
    let kv = CurvatureVector::planar(kappa);
    let gamma = admissible_gamma(&kv, gamma)?.gamma;
    if gamma == 0.0 {
        return Err(TransportError::InvalidParameter("ray has zero length".into()));
    }
    let (t, b0) = match model {
        RayModel::Sandpile { t } => {
            check_time(t)?;
            (Some(t), 0.0)
        }
        RayModel::Molding => (None, velocity),
    };
    let rhs = |s: f64, _b: f64| -> f64 {
        let p = kv.weight(s);
        match model {
            RayModel::Sandpile { t } => p * (velocity - s / t),
            RayModel::Molding => -p,
        }
    };
    let grid = stations(gamma, count);
    let mut samples = Vec::with_capacity(grid.len());
    let mut b = b0;
    let mut h = gamma / 64.0;
    samples.push(DensitySample { s: 0.0, a: b0 });
    for w in grid.windows(2) {
        b = rk4_adaptive(&rhs, w[0], w[1], b, &mut h);
        let p = kv.weight(w[1]).max(ORACLE_WEIGHT_FLOOR);
        samples.push(DensitySample { s: w[1], a: b / p });
    }
    let residual = samples.last().map_or(0.0, |p| p.a.abs());
    if residual > ORACLE_MAX_RESIDUAL {
        return Err(TransportError::OracleInconsistency { residual });
    }
    Ok(DensityProfile {
        gamma,
        t,
        velocity,
        samples,
    })
}

/// Step-doubling RK4 from `s0` to `s1`; `h` carries the step size between calls.
fn rk4_adaptive<F: Fn(f64, f64) -> f64>(f: &F, s0: f64, s1: f64, y0: f64, h: &mut f64) -> f64 {
    let step = |s: f64, y: f64, h: f64| {
        let k1 = f(s, y);
        let k2 = f(s + 0.5 * h, y + 0.5 * h * k1);
        let k3 = f(s + 0.5 * h, y + 0.5 * h * k2);
        let k4 = f(s + h, y + h * k3);
        y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    };
    let (mut s, mut y) = (s0, y0);
    while s < s1 {
        let hh = h.min(s1 - s);
        let full = step(s, y, hh);
        let half = step(s + 0.5 * hh, step(s, y, 0.5 * hh), 0.5 * hh);
        let err = (half - full).abs() / 15.0;
        if err <= ORACLE_LOCAL_TOL * (1.0 + half.abs()) || hh < 1e-14 * (1.0 + s1.abs()) {
            s += hh;
            y = half + (half - full) / 15.0;
            if err < 0.1 * ORACLE_LOCAL_TOL {
                *h = (2.0 * hh).max(*h);
            }
        } else {
            *h = 0.5 * hh;
        }
    }
    y
}

/// Oracle run with the velocity given by the model's own law.
pub fn density_ode_oracle_law(
    model: RayModel,
    kappa: f64,
    gamma: f64,
    count: usize,
) -> Result<DensityProfile, TransportError> {
    let kv = CurvatureVector::planar(kappa);
    let v = match model {
        RayModel::Sandpile { t } => velocity_sandpile(&kv, gamma, t)?,
        RayModel::Molding => velocity_molding(kappa, gamma)?,
    };
    density_ode_oracle(model, kappa, gamma, v, count)
}

/// Fitted constants of the density bounds on one profile.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DensityBounds {
    /// Smallest `C₁` with `a ≤ C₁ min(s, γ − s)` at interior samples.
    pub c_endpoint: f64,
    /// Largest difference quotient `|Δa/Δs|`.
    pub c_slope: f64,
    /// Molding only: smallest `C₃` with `|a − V| ≤ C₃ s`.
    pub c_velocity: Option<f64>,
    pub min_density: f64,
    pub nonnegative: bool,
    pub boundary_ok: bool,
}

/// Fits the bound constants. Only nonnegativity and the boundary values are
/// flagged; the constants themselves are reported.
pub fn density_bounds_check(profile: &DensityProfile) -> DensityBounds {
    let g = profile.gamma;
    let samples = &profile.samples;
    let mut c_endpoint: f64 = 0.0;
    let mut c_velocity: f64 = 0.0;
    let mut min_density = f64::INFINITY;
    for p in samples {
        min_density = min_density.min(p.a);
        let m = p.s.min(g - p.s);
        if m > 0.0 {
            c_endpoint = c_endpoint.max(p.a / m);
        }
        if p.s > 0.0 {
            c_velocity = c_velocity.max((p.a - profile.velocity).abs() / p.s);
        }
    }
    let c_slope = samples
        .windows(2)
        .filter(|w| w[1].s > w[0].s)
        .map(|w| ((w[1].a - w[0].a) / (w[1].s - w[0].s)).abs())
        .fold(0.0, f64::max);
    let first = samples.first().map_or(0.0, |p| p.a);
    let last = samples.last().map_or(0.0, |p| p.a);
    let molding = profile.t.is_none();
    let boundary_ok = if molding {
        last.abs() <= 1e-9 && (first - profile.velocity).abs() <= 1e-9
    } else {
        first.abs() <= 1e-9 && last.abs() <= 1e-9
    };
    DensityBounds {
        c_endpoint,
        c_slope,
        c_velocity: molding.then_some(c_velocity),
        min_density,
        nonnegative: min_density >= -1e-12,
        boundary_ok,
    }
}
