//! Time integration of convex fronts under the three flow laws.
//!
//! Markers move along their outward vertex normals with the outer normal
//! velocity of their ray. A step is the explicit midpoint rule: velocities
//! are re-evaluated on the half-step fronts (ray lengths are nonlocal, so the
//! whole geometry is rebuilt there), then the fronts are advanced from the
//! start of the step and remeshed to equal arclength.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{ConvexFront, GeometryError, RaySample};
use crate::transport::{
    admissible_gamma, velocity_molding, velocity_sandpile, velocity_twocone, CurvatureVector,
    TransportError, TOL_KG,
};

/// Floor on the speed used in the CFL bound.
pub const VELOCITY_FLOOR: f64 = 1e-12;
pub const DEFAULT_CFL: f64 = 0.25;
/// Safety number of the diffusive step bound. The stiffest marker mode has
/// rate `4·|∂V/∂κ|/h²`; this keeps `rate · dt ≤ 1.6`, inside the real-axis
/// stability interval `[-2, 0]` of the midpoint rule.
pub const DIFFUSIVE_NUMBER: f64 = 0.4;
/// Smallest marker count a scenario may use.
pub const MIN_SCENARIO_MARKERS: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    /// Single collapsing sandpile cone.
    #[serde(rename = "sandpile_1")]
    Sandpile1,
    /// Two interacting sandpile cones.
    #[serde(rename = "sandpile_2")]
    Sandpile2,
    /// Compression molding.
    Molding,
}

impl Model {
    pub fn is_sandpile(self) -> bool {
        matches!(self, Model::Sandpile1 | Model::Sandpile2)
    }

    pub fn name(self) -> &'static str {
        match self {
            Model::Sandpile1 => "sandpile_1",
            Model::Sandpile2 => "sandpile_2",
            Model::Molding => "molding",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvolutionError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error("convexity lost at t = {t}: {source}")]
    ConvexityLoss { t: f64, source: GeometryError },
    #[error("time step {dt} violates the CFL limit {limit}")]
    Cfl { dt: f64, limit: f64 },
    #[error("front {front} stopped expanding at t = {t} (marker {excess:e} inside the previous front)")]
    NotExpanding { t: f64, front: usize, excess: f64 },
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Fronts at one instant with their rays.
#[derive(Clone, Debug)]
pub struct EvolutionState {
    pub t: f64,
    pub fronts: Vec<ConvexFront>,
    /// One ray per marker, per front.
    pub rays: Vec<Vec<RaySample>>,
    /// Rays whose `κγ` was clamped to 1 when the velocities were filled.
    pub clamped: usize,
    /// Clamped rays whose `κγ` exceeded `1 + TOL_KG`. Remeshing turns thin
    /// fillets into polygon corners, where the discrete curvature and ray
    /// length no longer satisfy `κγ ≤ 1`.
    pub clamped_beyond_tol: usize,
    /// Largest `κγ` before clamping.
    pub max_kappa_gamma: f64,
}

impl EvolutionState {
    /// Samples the rays of every front; velocities stay unset.
    pub fn new(t: f64, fronts: Vec<ConvexFront>) -> Result<Self, EvolutionError> {
        if fronts.is_empty() || fronts.len() > 2 {
            return Err(EvolutionError::InvalidParameter(format!(
                "a state holds one or two fronts, got {}",
                fronts.len()
            )));
        }
        let rays = fronts
            .iter()
            .map(ConvexFront::sample_rays)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            t,
            fronts,
            rays,
            clamped: 0,
            clamped_beyond_tol: 0,
            max_kappa_gamma: 0.0,
        })
    }

    /// Builds the state and fills the velocities for `model`.
    pub fn with_velocities(t: f64, fronts: Vec<ConvexFront>, model: Model) -> Result<Self, EvolutionError> {
        fill_velocities(Self::new(t, fronts)?, model)
    }

    pub fn max_speed(&self) -> f64 {
        self.rays
            .iter()
            .flatten()
            .filter_map(|r| r.velocity)
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min_spacing(&self) -> f64 {
        self.fronts
            .iter()
            .map(ConvexFront::min_spacing)
            .fold(f64::INFINITY, f64::min)
    }

    /// Smallest sine of the turning angle over all markers.
    pub fn convexity_margin(&self) -> f64 {
        self.fronts
            .iter()
            .flat_map(|f| {
                (0..f.len()).map(move |i| {
                    let e0 = f.edge(f.prev(i));
                    let e1 = f.edge(i);
                    e0.cross(e1) / (e0.norm() * e1.norm())
                })
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest `|∂V/∂κ|` over the rays, bounded by `γ²/2` (molding) or
    /// `γ²/(2t)` (sandpile).
    pub fn curvature_sensitivity(&self, model: Model) -> f64 {
        let g2 = self
            .rays
            .iter()
            .flatten()
            .fold(0.0, |m: f64, r| m.max(r.gamma * r.gamma));
        if model.is_sandpile() {
            0.5 * g2 / self.t
        } else {
            0.5 * g2
        }
    }

    /// Largest stable time step: per front, the transport bound
    /// `c · min_spacing / max|V|` and the diffusive bound
    /// `DIFFUSIVE_NUMBER · min_spacing² / max|∂V/∂κ|`, minimized over fronts.
    ///
    /// The second one is needed because the velocity sees the curvature of
    /// a three-marker stencil, which makes the marker update parabolic.
    /// Taking the bounds front by front keeps a distant second body from
    /// changing the steps of the first unless its own bound is tighter.
    pub fn cfl_limit(&self, cfl: f64, model: Model) -> f64 {
        self.fronts
            .iter()
            .zip(&self.rays)
            .map(|(f, rays)| {
                let h = f.min_spacing();
                let vmax = rays.iter().filter_map(|r| r.velocity).fold(0.0, |m: f64, v| m.max(v.abs()));
                let g2 = rays.iter().fold(0.0, |m: f64, r| m.max(r.gamma * r.gamma));
                let sens = if model.is_sandpile() { 0.5 * g2 / self.t } else { 0.5 * g2 };
                let transport = cfl * h / vmax.max(VELOCITY_FLOOR);
                let diffusive = DIFFUSIVE_NUMBER * h * h / sens.max(VELOCITY_FLOOR);
                transport.min(diffusive)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Sets the outer normal velocity of every ray.
///
/// Rays with `κγ > 1` are clamped to `γ = 1/κ` and counted; the transport
/// functions alone would reject violations beyond [`TOL_KG`].
///
/// In two-body mode a foot of one front that lies in the closure of the
/// other body is on the boundary of the intersection; its `δ` is the length
/// of the same inner ray measured in the intersection. Feet outside get
/// `δ = 0`, which reduces the law to the single-cone one.
pub fn fill_velocities(mut state: EvolutionState, model: Model) -> Result<EvolutionState, EvolutionError> {
    let t = state.t;
    let mut clamped = 0;
    let mut beyond = 0;
    let mut max_kg: f64 = 0.0;
    match model {
        Model::Sandpile1 | Model::Molding => {
            if state.fronts.len() != 1 {
                return Err(EvolutionError::InvalidParameter(format!(
                    "{} needs exactly one front",
                    model.name()
                )));
            }
        }
        Model::Sandpile2 => {
            if state.fronts.len() != 2 {
                return Err(EvolutionError::InvalidParameter(
                    "sandpile_2 needs exactly two fronts".into(),
                ));
            }
        }
    }
    let overlap = if model == Model::Sandpile2 {
        state.fronts[0].intersect(&state.fronts[1])
    } else {
        None
    };
    for k in 0..state.fronts.len() {
        let other = (model == Model::Sandpile2).then(|| &state.fronts[1 - k]);
        for ray in state.rays[k].iter_mut() {
            let kv = CurvatureVector::planar(ray.kappa);
            let kg = ray.kappa * ray.gamma;
            max_kg = max_kg.max(kg);
            let gamma = if kg > 1.0 + TOL_KG {
                beyond += 1;
                clamped += 1;
                1.0 / ray.kappa
            } else {
                ray.gamma
            };
            let adm = admissible_gamma(&kv, gamma)?;
            clamped += adm.clamped as usize;
            let v = match model {
                Model::Sandpile1 => velocity_sandpile(&kv, adm.gamma, t)?,
                Model::Molding => velocity_molding(ray.kappa, adm.gamma)?,
                Model::Sandpile2 => {
                    let delta = match (&overlap, other) {
                        (Some(ix), Some(o)) if o.signed_distance(ray.foot) >= -o.tol_geom() => {
                            // Feet on a corner of the intersection have no inner ray there.
                            ix.ray_length_gamma(ray.foot, ray.inner_normal)
                                .unwrap_or(0.0)
                                .min(adm.gamma)
                        }
                        _ => 0.0,
                    };
                    ray.delta = Some(delta);
                    velocity_twocone(&kv, adm.gamma, delta, t)?
                }
            };
            ray.velocity = Some(v);
        }
    }
    state.clamped = clamped;
    state.clamped_beyond_tol = beyond;
    state.max_kappa_gamma = max_kg;
    Ok(state)
}

/// Displaces every marker by `dt · V` along the outward normal of `rays`.
fn advect(front: &ConvexFront, rays: &[RaySample], dt: f64) -> Vec<crate::geometry::Point2> {
    front
        .markers()
        .iter()
        .zip(rays)
        .map(|(&p, r)| p - r.inner_normal * (dt * r.velocity.unwrap_or(0.0)))
        .collect()
}

fn rebuild(markers: Vec<crate::geometry::Point2>, t: f64) -> Result<ConvexFront, EvolutionError> {
    ConvexFront::new(markers).map_err(|source| EvolutionError::ConvexityLoss { t, source })
}

/// Per-step diagnostics.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StepDiagnostics {
    /// Time at the end of the step.
    pub t: f64,
    pub dt: f64,
    /// Largest speed over both midpoint stages.
    pub max_velocity: f64,
    pub min_spacing: f64,
    pub convexity_margin: f64,
    pub clamped: usize,
    pub clamped_beyond_tol: usize,
    pub max_kappa_gamma: f64,
}

/// One midpoint step of length `dt`. The incoming state must carry
/// velocities; the returned state does too.
pub fn step(
    state: &EvolutionState,
    dt: f64,
    model: Model,
    cfl: f64,
) -> Result<(EvolutionState, StepDiagnostics), EvolutionError> {
    if dt < 0.0 || !dt.is_finite() {
        return Err(EvolutionError::InvalidParameter(format!("time step must be nonnegative, got {dt}")));
    }
    if state.rays.iter().flatten().any(|r| r.velocity.is_none()) {
        return Err(EvolutionError::InvalidParameter("velocities are not filled".into()));
    }
    let diag = |s: &EvolutionState, vmax: f64| StepDiagnostics {
        t: s.t,
        dt,
        max_velocity: vmax,
        min_spacing: s.min_spacing(),
        convexity_margin: s.convexity_margin(),
        clamped: s.clamped,
        clamped_beyond_tol: s.clamped_beyond_tol,
        max_kappa_gamma: s.max_kappa_gamma,
    };
    if dt == 0.0 {
        return Ok((state.clone(), diag(state, state.max_speed())));
    }
    let limit = state.cfl_limit(cfl, model);
    if dt > limit * (1.0 + 1e-9) {
        return Err(EvolutionError::Cfl { dt, limit });
    }
    let t_half = state.t + 0.5 * dt;
    let half_fronts = state
        .fronts
        .iter()
        .zip(&state.rays)
        .map(|(f, r)| rebuild(advect(f, r, 0.5 * dt), t_half))
        .collect::<Result<Vec<_>, _>>()?;
    let half = EvolutionState::with_velocities(t_half, half_fronts, model)?;

    let t_new = state.t + dt;
    let mut fronts = Vec::with_capacity(state.fronts.len());
    for (k, front) in state.fronts.iter().enumerate() {
        let moved: Vec<_> = front
            .markers()
            .iter()
            .zip(&half.rays[k])
            .map(|(&p, r)| p - r.inner_normal * (dt * r.velocity.unwrap_or(0.0)))
            .collect();
        let moved = rebuild(moved, t_new)?;
        fronts.push(rebuild(moved.resample_equal_arclength(front.len()), t_new)?);
    }
    let next = EvolutionState::with_velocities(t_new, fronts, model)?;
    let vmax = state.max_speed().max(half.max_speed());
    let d = diag(&next, vmax);
    Ok((next, d))
}

/// Model, initial data and numerical parameters of a run.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub model: Model,
    pub fronts: Vec<ConvexFront>,
    pub t_start: f64,
    pub t_end: f64,
    /// Marker count `N` of every front.
    pub markers: usize,
    pub cfl: f64,
    /// Number of equal time intervals between stored states; the trajectory
    /// holds `frames + 1` states.
    pub frames: usize,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), EvolutionError> {
        let bad = |m: String| Err(EvolutionError::InvalidScenario(m));
        if self.model.is_sandpile() && !(self.t_start > 0.0) {
            return bad("sandpile requires t_start > 0".into());
        }
        if !(self.t_start >= 0.0) || !(self.t_end > self.t_start) || !self.t_end.is_finite() {
            return bad(format!(
                "need 0 ≤ t_start < t_end, got [{}, {}]",
                self.t_start, self.t_end
            ));
        }
        if self.markers < MIN_SCENARIO_MARKERS {
            return bad(format!(
                "marker count must be at least {MIN_SCENARIO_MARKERS}, got {}",
                self.markers
            ));
        }
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return bad(format!("CFL number must lie in (0, 1), got {}", self.cfl));
        }
        if self.frames == 0 {
            return bad("need at least one frame".into());
        }
        let expected = if self.model == Model::Sandpile2 { 2 } else { 1 };
        if self.fronts.len() != expected {
            return bad(format!(
                "{} needs {expected} front(s), got {}",
                self.model.name(),
                self.fronts.len()
            ));
        }
        if let Some(f) = self.fronts.iter().find(|f| f.len() != self.markers) {
            return bad(format!("front has {} markers, expected {}", f.len(), self.markers));
        }
        Ok(())
    }
}

/// Time-ordered stored states of a run.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub model: Model,
    pub states: Vec<EvolutionState>,
    pub diagnostics: Vec<StepDiagnostics>,
}

/// A trajectory together with the error that stopped it, if any.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub trajectory: Trajectory,
    pub error: Option<EvolutionError>,
}

/// Integrates the scenario from `t_start` to `t_end`, storing `frames + 1`
/// equally spaced states. Each frame is split into equal substeps that obey
/// the CFL bound. Every stored front must contain the previous one.
pub fn run(scenario: &Scenario) -> RunOutcome {
    let mut trajectory = Trajectory {
        model: scenario.model,
        states: Vec::new(),
        diagnostics: Vec::new(),
    };
    let error = run_into(scenario, &mut trajectory).err();
    RunOutcome { trajectory, error }
}

fn run_into(scenario: &Scenario, traj: &mut Trajectory) -> Result<(), EvolutionError> {
    scenario.validate()?;
    let model = scenario.model;
    let mut state = EvolutionState::with_velocities(scenario.t_start, scenario.fronts.clone(), model)?;
    traj.states.push(state.clone());
    let span = scenario.t_end - scenario.t_start;
    for frame in 1..=scenario.frames {
        let target = if frame == scenario.frames {
            scenario.t_end
        } else {
            scenario.t_start + span * frame as f64 / scenario.frames as f64
        };
        while state.t < target {
            let remaining = target - state.t;
            let limit = state.cfl_limit(scenario.cfl, model);
            let substeps = (remaining / limit - 1e-9).ceil().max(1.0);
            let dt = if substeps <= 1.0 { remaining } else { remaining / substeps };
            let (mut next, d) = step(&state, dt, model, scenario.cfl)?;
            if substeps <= 1.0 {
                next.t = target;
            }
            traj.diagnostics.push(d);
            state = next;
        }
        check_expansion(traj.states.last().expect("initial state stored"), &state)?;
        traj.states.push(state.clone());
    }
    Ok(())
}

/// Every marker of `next` must lie outside or on the matching front of `prev`.
pub fn check_expansion(prev: &EvolutionState, next: &EvolutionState) -> Result<(), EvolutionError> {
    for (k, (old, new)) in prev.fronts.iter().zip(&next.fronts).enumerate() {
        let tol = old.tol_geom();
        let excess = new
            .markers()
            .iter()
            .map(|&p| old.signed_distance(p))
            .fold(f64::NEG_INFINITY, f64::max);
        if excess > tol {
            return Err(EvolutionError::NotExpanding {
                t: next.t,
                front: k,
                excess,
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{shapes, Point2};

    fn mean_radius(f: &ConvexFront, c: Point2) -> (f64, f64) {
        let r: Vec<f64> = f.markers().iter().map(|p| p.dist(c)).collect();
        let mean = r.iter().sum::<f64>() / r.len() as f64;
        let var = r.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / r.len() as f64;
        (mean, var.sqrt())
    }

    fn disk_scenario(model: Model, t_start: f64, t_end: f64, n: usize, frames: usize) -> Scenario {
        Scenario {
            model,
            fronts: vec![shapes::disk(Point2::new(0.0, 0.0), 1.0, n).unwrap()],
            t_start,
            t_end,
            markers: n,
            cfl: DEFAULT_CFL,
            frames,
        }
    }

    #[test]
    fn disk_velocities() {
        let f = shapes::disk(Point2::new(0.0, 0.0), 1.0, 256).unwrap();
        let s = EvolutionState::with_velocities(2.0, vec![f.clone()], Model::Sandpile1).unwrap();
        for r in &s.rays[0] {
            let v = r.velocity.unwrap();
            assert!((v - 1.0 / 6.0).abs() <= 1e-3 / 6.0, "{v}");
        }
        let s = EvolutionState::with_velocities(0.0, vec![f], Model::Molding).unwrap();
        for r in &s.rays[0] {
            assert!((r.velocity.unwrap() - 0.5).abs() <= 5e-4);
        }
    }

    #[test]
    fn zero_step_is_identity() {
        let s = EvolutionState::with_velocities(
            1.0,
            vec![shapes::disk(Point2::new(0.0, 0.0), 1.0, 64).unwrap()],
            Model::Sandpile1,
        )
        .unwrap();
        let (next, _) = step(&s, 0.0, Model::Sandpile1, DEFAULT_CFL).unwrap();
        assert_eq!(next.t, s.t);
        assert_eq!(next.fronts, s.fronts);
        assert_eq!(next.rays, s.rays);
    }

    #[test]
    fn cfl_violation_is_rejected() {
        let s = EvolutionState::with_velocities(
            1.0,
            vec![shapes::disk(Point2::new(0.0, 0.0), 1.0, 64).unwrap()],
            Model::Molding,
        )
        .unwrap();
        let err = step(&s, 10.0 * s.cfl_limit(DEFAULT_CFL, Model::Molding), Model::Molding, DEFAULT_CFL).unwrap_err();
        assert!(matches!(err, EvolutionError::Cfl { .. }));
    }

    #[test]
    fn sandpile_disk_cube_root_law() {
        let out = run(&disk_scenario(Model::Sandpile1, 1.0, 2.0, 256, 10));
        assert!(out.error.is_none(), "{:?}", out.error);
        for s in &out.trajectory.states {
            let (r, sd) = mean_radius(&s.fronts[0], Point2::new(0.0, 0.0));
            let want = s.t.cbrt();
            assert!((r / want - 1.0).abs() <= 2e-3, "t={} r={r} want={want}", s.t);
            assert!(sd / r <= 1e-4);
        }
        let last = out.trajectory.states.last().unwrap();
        let (r, _) = mean_radius(&last.fronts[0], Point2::new(0.0, 0.0));
        eprintln!("sandpile final rel err {:e}", r / 2f64.cbrt() - 1.0);
        assert!((r / 2f64.cbrt() - 1.0).abs() <= 1e-3);
    }

    #[test]
    fn molding_disk_exponential_law() {
        let out = run(&disk_scenario(Model::Molding, 0.0, 1.0, 256, 10));
        assert!(out.error.is_none(), "{:?}", out.error);
        let last = out.trajectory.states.last().unwrap();
        let (r, _) = mean_radius(&last.fronts[0], Point2::new(0.0, 0.0));
        eprintln!("molding final rel err {:e}", r / 0.5f64.exp() - 1.0);
        assert!((r / 0.5f64.exp() - 1.0).abs() <= 1e-3);
    }

    #[test]
    fn sandpile_rejects_zero_start() {
        let err = disk_scenario(Model::Sandpile1, 0.0, 1.0, 64, 2).validate().unwrap_err();
        assert!(err.to_string().contains("sandpile requires t_start > 0"));
    }

    #[test]
    fn molding_square_stays_convex_and_grows() {
        let f = shapes::rounded_square(Point2::new(0.0, 0.0), 2.0, 0.05, 128).unwrap();
        let out = run(&Scenario {
            model: Model::Molding,
            fronts: vec![f],
            t_start: 0.0,
            t_end: 0.3,
            markers: 128,
            cfl: DEFAULT_CFL,
            frames: 6,
        });
        assert!(out.error.is_none(), "{:?}", out.error);
        let areas: Vec<f64> = out.trajectory.states.iter().map(|s| s.fronts[0].area()).collect();
        assert!(areas.windows(2).all(|w| w[1] > w[0]), "{areas:?}");
    }

    fn two_disk_scenario(sep: f64, t_end: f64, frames: usize) -> Scenario {
        let n = 128;
        Scenario {
            model: Model::Sandpile2,
            fronts: vec![
                shapes::disk(Point2::new(-0.5 * sep, 0.0), 1.0, n).unwrap(),
                shapes::disk(Point2::new(0.5 * sep, 0.0), 1.0, n).unwrap(),
            ],
            t_start: 1.0,
            t_end,
            markers: n,
            cfl: DEFAULT_CFL,
            frames,
        }
    }

    #[test]
    fn distant_pair_reduces_to_single_cone() {
        let pair = run(&two_disk_scenario(100.0, 1.2, 4));
        assert!(pair.error.is_none(), "{:?}", pair.error);
        let mut single = two_disk_scenario(100.0, 1.2, 4);
        single.model = Model::Sandpile1;
        single.fronts.truncate(1);
        let single = run(&single);
        assert!(single.error.is_none());
        for (a, b) in pair.trajectory.states.iter().zip(&single.trajectory.states) {
            assert_eq!(a.t, b.t);
            for (p, q) in a.fronts[0].markers().iter().zip(b.fronts[0].markers()) {
                assert!(p.dist(*q) <= 1e-9);
            }
            assert!(a.rays[0].iter().all(|r| r.delta == Some(0.0)));
        }
    }

    #[test]
    fn overlapping_pair_stays_convex_and_expands() {
        let out = run(&two_disk_scenario(1.6, 1.5, 5));
        assert!(out.error.is_none(), "{:?}", out.error);
        let states = &out.trajectory.states;
        assert_eq!(states.len(), 6);
        for w in states.windows(2) {
            check_expansion(&w[0], &w[1]).unwrap();
        }
        // Far-side feet see no overlap and move like a lone disk.
        let s = &states[0];
        let far = s.rays[0]
            .iter()
            .min_by(|a, b| a.foot.x.total_cmp(&b.foot.x))
            .unwrap();
        assert_eq!(far.delta, Some(0.0));
        assert!((far.velocity.unwrap() - 1.0 / 3.0).abs() <= 5e-3);
        assert!(s.rays[0].iter().any(|r| r.delta.unwrap() > 0.0));
    }
}
