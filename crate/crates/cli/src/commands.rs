use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use sandmold_core::evolution::{self, EvolutionState, Model};
use sandmold_core::geometry::Point2;
use sandmold_core::transport::{self, CurvatureVector, DensityProfile, DensitySample};
use sandmold_core::verification::{
    mass_balance_residual, molding_balance_residual, projection_lipschitz_probe_with, spacetime_balance_residual,
    subdifferential_gap, Competitor, ResidualReport, SpaceTimeTest, TestFunction, TimeBump, VerificationError,
};
use sandmold_core::Trajectory;

use crate::config::{Config, Identity};
use crate::trajectory::{load_trajectory, write_json, write_trajectory, RunStatus, Summary};
use crate::CliError;

pub const REPORTS_FILE: &str = "reports.json";
/// Probe ratios may exceed the Lipschitz bound by this fraction.
pub const PROJECTION_SLACK: f64 = 0.05;
/// Probe radius relative to the body's diameter.
pub const PROBE_RADIUS: f64 = 1e-4;
/// Interior points drawn before a projection probe gives up.
const PROBE_ATTEMPTS: usize = 1000;

fn run_status(summary: &Summary) -> Result<(), CliError> {
    let msg = || summary.error.clone().unwrap_or_default();
    match summary.status {
        RunStatus::Ok => Ok(()),
        RunStatus::ConvexityLoss => Err(CliError::Convexity(msg())),
        RunStatus::NumericalFailure => Err(CliError::Numerical(msg())),
    }
}

/// Integrates the configured scenario and writes the trajectory to `out`.
/// A run stopped by an error still writes the states reached.
pub fn cmd_run(config: &Config, out: &Path) -> Result<Summary, CliError> {
    let outcome = evolution::run(&config.scenario()?);
    let summary = write_trajectory(out, config, &outcome)?;
    run_status(&summary)?;
    Ok(summary)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOutput {
    pub model: Model,
    pub seed: u64,
    pub pass: bool,
    pub checked: usize,
    pub failed: usize,
    pub reports: Vec<ResidualReport>,
}

fn numerical(e: VerificationError) -> CliError {
    CliError::Numerical(e.to_string())
}

/// Checks the configured identities on the trajectory stored in `dir` and
/// writes `reports.json` to `out`. Fails unless every report passes.
pub fn cmd_verify(dir: &Path, seed: Option<u64>, out: &Path) -> Result<VerifyOutput, CliError> {
    let loaded = load_trajectory(dir)?;
    let config = &loaded.summary.config;
    let seed = seed.unwrap_or(config.verify.seed);
    let reports = verify_states(config, loaded.summary.model, &loaded.states, seed)?;
    let failed = reports.iter().filter(|r| !r.pass).count();
    let output = VerifyOutput {
        model: loaded.summary.model,
        seed,
        pass: failed == 0,
        checked: reports.len(),
        failed,
        reports,
    };
    std::fs::create_dir_all(out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    write_json(&out.join(REPORTS_FILE), &output)?;
    run_status(&loaded.summary)?;
    if failed > 0 {
        return Err(CliError::Numerical(format!("{failed} of {} residual reports failed", output.checked)));
    }
    Ok(output)
}

pub fn verify_states(
    config: &Config,
    model: Model,
    states: &[EvolutionState],
    seed: u64,
) -> Result<Vec<ResidualReport>, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = config.verify.test_functions;
    let mut reports = Vec::new();
    for id in config.identities() {
        match id {
            Identity::MassBalance => {
                for s in states {
                    for _ in 0..n {
                        let fs = [
                            TestFunction::random_polynomial(&mut rng),
                            TestFunction::random_gaussian(&mut rng, &s.fronts[0]),
                        ];
                        for f in &fs {
                            reports.push(mass_balance_residual(s, f).map_err(numerical)?);
                        }
                    }
                }
            }
            Identity::SubdifferentialGap => {
                for s in states {
                    reports.push(subdifferential_gap(s, Competitor::Distance).map_err(numerical)?);
                    for _ in 0..n {
                        let f = TestFunction::random_cone_max(&mut rng, &s.fronts[0]);
                        reports.push(subdifferential_gap(s, Competitor::Field(&f)).map_err(numerical)?);
                    }
                }
            }
            Identity::Projection => {
                for s in states {
                    for _ in 0..n {
                        reports.push(projection_report(s, &mut rng)?);
                    }
                }
            }
            Identity::MoldingBalance => {
                for s in states {
                    for _ in 0..n {
                        let fs = [
                            TestFunction::random_polynomial(&mut rng),
                            TestFunction::random_gaussian(&mut rng, &s.fronts[0]),
                        ];
                        for f in &fs {
                            reports.push(molding_balance_residual(s, f).map_err(numerical)?);
                        }
                    }
                }
            }
            Identity::Spacetime => {
                let traj = Trajectory {
                    model,
                    states: states.to_vec(),
                    diagnostics: Vec::new(),
                };
                let last = &states[states.len() - 1].fronts[0];
                for _ in 0..n {
                    let phi = SpaceTimeTest {
                        spatial: TestFunction::random_gaussian(&mut rng, last),
                        bump: TimeBump::new(states[0].t, states[states.len() - 1].t),
                    };
                    let r = spacetime_balance_residual(&traj, &phi).map_err(numerical)?;
                    reports.push(r.kinematic);
                    reports.push(r.balance);
                }
            }
            Identity::Expansion => {
                for w in states.windows(2) {
                    for (old, new) in w[0].fronts.iter().zip(&w[1].fronts) {
                        let excess = new
                            .markers()
                            .iter()
                            .map(|&p| old.signed_distance(p))
                            .fold(f64::NEG_INFINITY, f64::max);
                        reports.push(ResidualReport::lower_bound(
                            "expansion",
                            w[1].t,
                            -excess,
                            1.0,
                            old.tol_geom(),
                            0.0,
                            0.0,
                        ));
                    }
                }
            }
        }
    }
    Ok(reports)
}

/// Probes the nearest-point map at a random interior point away from the
/// ridge. The residual is `ratio/bound − 1`.
fn projection_report(state: &EvolutionState, rng: &mut ChaCha8Rng) -> Result<ResidualReport, CliError> {
    let front = &state.fronts[0];
    let (lo, hi) = front.bbox();
    let h = PROBE_RADIUS * front.diameter();
    for _ in 0..PROBE_ATTEMPTS {
        let x = Point2::new(rng.gen_range(lo.x..=hi.x), rng.gen_range(lo.y..=hi.y));
        if front.signed_distance(x) <= 0.0 {
            continue;
        }
        match projection_lipschitz_probe_with(front, &state.rays[0], x, h) {
            Ok(p) => {
                let value = p.ratio_over_bound - 1.0;
                return Ok(ResidualReport {
                    identity: "projection".into(),
                    t: state.t,
                    value,
                    scale: 1.0,
                    tolerance: PROJECTION_SLACK,
                    pass: value <= PROJECTION_SLACK,
                    quadrature_error: 0.0,
                });
            }
            Err(VerificationError::RidgeProximity { .. }) => continue,
            Err(e) => return Err(numerical(e)),
        }
    }
    Err(CliError::Numerical(format!(
        "no interior point away from the ridge after {PROBE_ATTEMPTS} draws at t = {}",
        state.t
    )))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProbeModel {
    Sandpile,
    Twocone,
    Molding,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeArgs {
    pub model: ProbeModel,
    pub kappa: Vec<f64>,
    pub gamma: f64,
    pub delta: f64,
    pub t: f64,
    /// Stations at which `a` is printed.
    pub s: Vec<f64>,
    /// Equally spaced stations of the density profile (0 for none).
    pub count: usize,
}

pub struct ProbeOutput {
    /// `F=…`, `V=…` and `a=…` lines.
    pub text: String,
    pub profile: Option<DensityProfile>,
}

/// Evaluates the speed factor, velocity and density of one ray.
pub fn cmd_probe(args: &ProbeArgs) -> Result<ProbeOutput, CliError> {
    let usage = |m: String| CliError::Usage(m);
    let transport_err = |e: transport::TransportError| CliError::Numerical(e.to_string());
    let kv = CurvatureVector::new(args.kappa.clone()).map_err(|e| usage(e.to_string()))?;
    let mut text = String::new();
    let density: Box<dyn Fn(f64) -> Result<f64, transport::TransportError>> = match args.model {
        ProbeModel::Sandpile => {
            let f = transport::f_sandpile(&kv, args.gamma).map_err(transport_err)?;
            let v = transport::velocity_sandpile(&kv, args.gamma, args.t).map_err(transport_err)?;
            writeln!(text, "F={f}\nV={v}").unwrap();
            let (kv, g, t) = (kv.clone(), args.gamma, args.t);
            Box::new(move |s| transport::density_sandpile(&kv, g, t, s))
        }
        ProbeModel::Twocone => {
            let f = transport::f_twocone(&kv, args.gamma, args.delta).map_err(transport_err)?;
            let v = transport::velocity_twocone(&kv, args.gamma, args.delta, args.t).map_err(transport_err)?;
            writeln!(text, "F={f}\nV={v}").unwrap();
            if !args.s.is_empty() || args.count > 0 {
                return Err(usage("the two-cone law has no density profile".into()));
            }
            return Ok(ProbeOutput { text, profile: None });
        }
        ProbeModel::Molding => {
            let &[k] = args.kappa.as_slice() else {
                return Err(usage("molding takes a single curvature".into()));
            };
            let v = transport::velocity_molding(k, args.gamma).map_err(transport_err)?;
            writeln!(text, "V={v}").unwrap();
            let g = args.gamma;
            Box::new(move |s| transport::density_molding(k, g, s))
        }
    };
    for &s in &args.s {
        writeln!(text, "a={}", density(s).map_err(transport_err)?).unwrap();
    }
    let profile = if args.count == 0 {
        None
    } else {
        let gamma = transport::admissible_gamma(&kv, args.gamma).map_err(transport_err)?.gamma;
        let count = args.count.max(2);
        let samples = (0..count)
            .map(|k| {
                let s = gamma * k as f64 / (count - 1) as f64;
                Ok(DensitySample { s, a: density(s)? })
            })
            .collect::<Result<Vec<_>, transport::TransportError>>()
            .map_err(transport_err)?;
        let (t, velocity) = match args.model {
            ProbeModel::Molding => (None, density(0.0).map_err(transport_err)?),
            _ => (Some(args.t), transport::velocity_sandpile(&kv, args.gamma, args.t).map_err(transport_err)?),
        };
        Some(DensityProfile { gamma, t, velocity, samples })
    };
    Ok(ProbeOutput { text, profile })
}
