use rayon::prelude::*;

use super::report::ResidualReport;
use super::test_function::{ScalarField, SpaceTimeTest, TestFunction};
use super::VerificationError;
use crate::evolution::{EvolutionState, Model, Trajectory};
use crate::geometry::{ConvexFront, Point2, RaySample};
use crate::quadrature::GaussLegendre;
use crate::transport::{density_molding, density_sandpile, CurvatureVector};

pub const MASS_BALANCE_REL_TOL: f64 = 1e-5;
pub const SUBDIFFERENTIAL_REL_TOL: f64 = 1e-8;
pub const MOLDING_BALANCE_REL_TOL: f64 = 1e-4;
pub const SPACETIME_REL_TOL: f64 = 1e-4;
/// Fewest stored states a space-time residual accepts.
pub const MIN_SPACETIME_STATES: usize = 16;

/// One ray with its boundary weight, ready for quadrature.
#[derive(Clone, Copy, Debug)]
struct RayFrame {
    foot: Point2,
    normal: Point2,
    kappa: f64,
    /// Ray length clamped to `1/κ`, so the Jacobian `1 − κs` stays nonnegative.
    gamma: f64,
    /// Arclength trapezoid weight of the foot.
    weight: f64,
    velocity: Option<f64>,
}

impl RayFrame {
    fn point(&self, s: f64) -> Point2 {
        self.foot + self.normal * s
    }

    fn velocity(&self) -> Result<f64, VerificationError> {
        self.velocity.ok_or(VerificationError::MissingVelocity)
    }
}

fn frames(front: &ConvexFront, rays: &[RaySample]) -> Result<Vec<RayFrame>, VerificationError> {
    if rays.len() != front.len() {
        return Err(VerificationError::InvalidInput(format!(
            "{} rays for a front with {} markers",
            rays.len(),
            front.len()
        )));
    }
    Ok(rays
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let gamma = if r.kappa > 0.0 && r.kappa * r.gamma > 1.0 {
                1.0 / r.kappa
            } else {
                r.gamma
            };
            RayFrame {
                foot: r.foot,
                normal: r.inner_normal,
                kappa: r.kappa,
                gamma,
                weight: 0.5 * (front.edge_len(front.prev(i)) + front.edge_len(i)),
                velocity: r.velocity,
            }
        })
        .collect())
}

/// A ray-quadrature value with the difference to the coarser rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayQuadrature {
    pub value: f64,
    pub error_estimate: f64,
}

/// `Σ_feet w ∫₀^γ f(ray, s, x)(1 − κs) ds` with the 16-node rule, and the
/// same with 12 nodes for the error estimate. Per-ray values are summed in
/// marker order so results are reproducible bit for bit.
fn ray_sum<F>(frames: &[RayFrame], f: F) -> Result<RayQuadrature, VerificationError>
where
    F: Fn(&RayFrame, f64, Point2) -> Result<f64, VerificationError> + Sync,
{
    let on = |rule: &GaussLegendre| -> Result<f64, VerificationError> {
        let per_ray = frames
            .par_iter()
            .map(|fr| {
                let mut acc = 0.0;
                for (s, w) in rule.points(0.0, fr.gamma) {
                    acc += w * f(fr, s, fr.point(s))? * (1.0 - fr.kappa * s);
                }
                Ok(fr.weight * acc)
            })
            .collect::<Result<Vec<f64>, VerificationError>>()?;
        Ok(per_ray.iter().sum())
    };
    let fine = on(GaussLegendre::sixteen())?;
    let coarse = on(GaussLegendre::twelve())?;
    Ok(RayQuadrature {
        value: fine,
        error_estimate: (fine - coarse).abs(),
    })
}

/// `Σ_feet w g(ray)`: arclength trapezoid over the boundary.
fn boundary_sum<G>(frames: &[RayFrame], g: G) -> Result<f64, VerificationError>
where
    G: Fn(&RayFrame) -> Result<f64, VerificationError>,
{
    frames.iter().map(|fr| Ok(fr.weight * g(fr)?)).sum()
}

/// `∫_Ω f` through the ray parametrization `x = y + s n(y)` with Jacobian
/// `1 − κ(y)s`: arclength trapezoid over the feet, 16-point Gauss–Legendre
/// along each ray.
pub fn integrate_by_rays(front: &ConvexFront, f: &dyn ScalarField) -> Result<f64, VerificationError> {
    let rays = front.sample_rays()?;
    Ok(integrate_by_rays_with(front, &rays, f)?.value)
}

/// [`integrate_by_rays`] over already sampled rays, with an error estimate.
pub fn integrate_by_rays_with(
    front: &ConvexFront,
    rays: &[RaySample],
    f: &dyn ScalarField,
) -> Result<RayQuadrature, VerificationError> {
    ray_sum(&frames(front, rays)?, |_, _, x| Ok(f.value(x)))
}

fn single_front(state: &EvolutionState) -> Result<Vec<RayFrame>, VerificationError> {
    if state.fronts.len() != 1 {
        return Err(VerificationError::InvalidInput(format!(
            "balance identities take one body, got {}",
            state.fronts.len()
        )));
    }
    frames(&state.fronts[0], &state.rays[0])
}

fn sandpile_frames(state: &EvolutionState) -> Result<Vec<RayFrame>, VerificationError> {
    if !(state.t > 0.0) {
        return Err(VerificationError::InvalidInput(format!(
            "sandpile identities need t > 0, got {}",
            state.t
        )));
    }
    single_front(state)
}

fn sandpile_density(fr: &RayFrame, t: f64, s: f64) -> Result<f64, VerificationError> {
    Ok(density_sandpile(&CurvatureVector::planar(fr.kappa), fr.gamma, t, s)?)
}

/// Weak mass balance `∫ a Dw·Dφ = ∫ (w/t − w_t) φ` at a sandpile state.
///
/// Along the ray of `y`, `w = s`, `Dw = n(y)` and `w_t = V(y)`; the value
/// is left minus right side.
pub fn mass_balance_residual(
    state: &EvolutionState,
    phi: &TestFunction,
) -> Result<ResidualReport, VerificationError> {
    let frames = sandpile_frames(state)?;
    let t = state.t;
    let lhs = ray_sum(&frames, |fr, s, x| {
        Ok(sandpile_density(fr, t, s)? * phi.gradient(x).dot(fr.normal))
    })?;
    let rhs = ray_sum(&frames, |fr, s, x| Ok((s / t - fr.velocity()?) * phi.value(x)))?;
    Ok(ResidualReport::two_sided(
        "mass_balance",
        t,
        lhs.value - rhs.value,
        lhs.value.abs() + rhs.value.abs() + 1.0,
        0.0,
        MASS_BALANCE_REL_TOL,
        lhs.error_estimate + rhs.error_estimate,
    ))
}

/// The competitor `v` in the subdifferential inequality.
#[derive(Clone, Copy)]
pub enum Competitor<'a> {
    /// The state's own distance function, `v = w`.
    Distance,
    /// Any 1-Lipschitz field.
    Field(&'a dyn ScalarField),
}

/// `∫ (w/t − w_t)(w − v)`, which must be nonnegative for every 1-Lipschitz
/// `v` when `w` is the Monge potential.
pub fn subdifferential_gap(
    state: &EvolutionState,
    v: Competitor<'_>,
) -> Result<ResidualReport, VerificationError> {
    let frames = sandpile_frames(state)?;
    let t = state.t;
    let v_at = |s: f64, x: Point2| match v {
        Competitor::Distance => s,
        Competitor::Field(f) => f.value(x),
    };
    let own = ray_sum(&frames, |fr, s, _| Ok((s / t - fr.velocity()?) * s))?;
    let other = ray_sum(&frames, |fr, s, x| Ok((s / t - fr.velocity()?) * v_at(s, x)))?;
    let gap = ray_sum(&frames, |fr, s, x| {
        Ok((s / t - fr.velocity()?) * (s - v_at(s, x)))
    })?;
    Ok(ResidualReport::lower_bound(
        "subdifferential_gap",
        t,
        gap.value,
        own.value.abs() + other.value.abs() + 1.0,
        0.0,
        SUBDIFFERENTIAL_REL_TOL,
        gap.error_estimate,
    ))
}

fn molding_frames(state: &EvolutionState) -> Result<Vec<RayFrame>, VerificationError> {
    single_front(state)
}

fn molding_density(fr: &RayFrame, s: f64) -> Result<f64, VerificationError> {
    Ok(density_molding(fr.kappa, fr.gamma, s)?)
}

/// The three fixed-time integrals of a molding state.
#[derive(Clone, Copy, Debug)]
struct MoldingTerms {
    /// `∫_Ω φ`.
    volume: RayQuadrature,
    /// `∫_∂Ω φ V`.
    boundary: f64,
    /// `∫_Ω a Du·Dφ`.
    bulk: RayQuadrature,
}

fn molding_terms(frames: &[RayFrame], phi: &TestFunction) -> Result<MoldingTerms, VerificationError> {
    Ok(MoldingTerms {
        volume: ray_sum(frames, |_, _, x| Ok(phi.value(x)))?,
        boundary: boundary_sum(frames, |fr| Ok(phi.value(fr.foot) * fr.velocity()?))?,
        bulk: ray_sum(frames, |fr, s, x| {
            Ok(molding_density(fr, s)? * phi.gradient(x).dot(fr.normal))
        })?,
    })
}

/// Fixed-time molding balance `∫_Ω φ = ∫_∂Ω φ V + ∫_Ω a Du·Dφ`.
pub fn molding_balance_residual(
    state: &EvolutionState,
    phi: &TestFunction,
) -> Result<ResidualReport, VerificationError> {
    let m = molding_terms(&molding_frames(state)?, phi)?;
    Ok(ResidualReport::two_sided(
        "molding_balance",
        state.t,
        m.volume.value - m.boundary - m.bulk.value,
        m.volume.value.abs() + m.boundary.abs() + m.bulk.value.abs() + 1.0,
        0.0,
        MOLDING_BALANCE_REL_TOL,
        m.volume.error_estimate + m.bulk.error_estimate,
    ))
}

/// Residuals of the space-time molding identities.
#[derive(Clone, Debug)]
pub struct SpaceTimeReport {
    /// `∫∫_{∂Ω_t} φ V + ∫∫_{Ω_t} ∂_t φ`.
    pub kinematic: ResidualReport,
    /// `∫∫_{Ω_t} (φ + ∂_t φ) − a Du·Dφ`.
    pub balance: ResidualReport,
}

/// Time integrals by the trapezoid rule over the stored states.
pub fn spacetime_balance_residual(
    traj: &Trajectory,
    phi: &SpaceTimeTest,
) -> Result<SpaceTimeReport, VerificationError> {
    if traj.model != Model::Molding {
        return Err(VerificationError::InvalidInput(format!(
            "space-time balance needs a molding trajectory, got {}",
            traj.model.name()
        )));
    }
    let count = traj.states.len();
    if count < MIN_SPACETIME_STATES {
        return Err(VerificationError::InsufficientResolution {
            states: count,
            min: MIN_SPACETIME_STATES,
        });
    }
    let mut rows = Vec::with_capacity(count);
    for state in &traj.states {
        let m = molding_terms(&molding_frames(state)?, &phi.spatial)?;
        let b = phi.bump.value(state.t);
        let db = phi.bump.derivative(state.t);
        rows.push((state.t, b, db, m));
    }
    let trapezoid = |g: &dyn Fn(f64, f64, &MoldingTerms) -> f64| -> f64 {
        rows.windows(2)
            .map(|w| {
                let (t0, b0, d0, m0) = &w[0];
                let (t1, b1, d1, m1) = &w[1];
                0.5 * (t1 - t0) * (g(*b0, *d0, m0) + g(*b1, *d1, m1))
            })
            .sum()
    };
    let flux = trapezoid(&|b, _, m| b * m.boundary);
    let sweep = trapezoid(&|_, d, m| d * m.volume.value);
    let source = trapezoid(&|b, _, m| b * (m.volume.value - m.bulk.value));
    let quad = trapezoid(&|b, d, m| {
        b.abs() * (m.volume.error_estimate + m.bulk.error_estimate) + d.abs() * m.volume.error_estimate
    });
    let t_end = traj.states.last().map_or(0.0, |s| s.t);
    Ok(SpaceTimeReport {
        kinematic: ResidualReport::two_sided(
            "kinematic",
            t_end,
            flux + sweep,
            flux.abs() + sweep.abs() + 1.0,
            0.0,
            SPACETIME_REL_TOL,
            quad,
        ),
        balance: ResidualReport::two_sided(
            "spacetime_balance",
            t_end,
            source + sweep,
            source.abs() + sweep.abs() + 1.0,
            0.0,
            SPACETIME_REL_TOL,
            quad,
        ),
    })
}
