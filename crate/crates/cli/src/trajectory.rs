//! Trajectory directories: `summary.json`, one marker CSV per front and
//! stored state, and `steps.csv` with the per-step diagnostics.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use sandmold_core::evolution::{EvolutionError, EvolutionState, Model, RunOutcome, StepDiagnostics};
use sandmold_core::geometry::{read_front_csv, write_front_csv};

use crate::config::Config;
use crate::CliError;

pub const SUMMARY_FILE: &str = "summary.json";
pub const STEPS_FILE: &str = "steps.csv";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    ConvexityLoss,
    NumericalFailure,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub model: Model,
    pub status: RunStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Times of the stored states.
    pub times: Vec<f64>,
    pub fronts: usize,
    pub markers: usize,
    pub steps: usize,
    pub max_velocity: f64,
    pub min_spacing: f64,
    pub min_convexity_margin: f64,
    pub clamped: usize,
    pub clamped_beyond_tol: usize,
    pub max_kappa_gamma: f64,
    pub config: Config,
}

impl Summary {
    pub fn new(config: &Config, outcome: &RunOutcome) -> Self {
        let traj = &outcome.trajectory;
        let d = &traj.diagnostics;
        let fold = |f: fn(&StepDiagnostics) -> f64, init: f64, pick: fn(f64, f64) -> f64| {
            d.iter().map(f).fold(init, pick)
        };
        let (status, error) = match &outcome.error {
            None => (RunStatus::Ok, None),
            Some(e @ EvolutionError::ConvexityLoss { .. }) => (RunStatus::ConvexityLoss, Some(e.to_string())),
            Some(e) => (RunStatus::NumericalFailure, Some(e.to_string())),
        };
        Self {
            model: traj.model,
            status,
            error,
            times: traj.states.iter().map(|s| s.t).collect(),
            fronts: traj.states.first().map_or(0, |s| s.fronts.len()),
            markers: config.numerics.markers,
            steps: d.len(),
            max_velocity: fold(|x| x.max_velocity, 0.0, f64::max),
            min_spacing: fold(|x| x.min_spacing, f64::INFINITY, f64::min),
            min_convexity_margin: fold(|x| x.convexity_margin, f64::INFINITY, f64::min),
            clamped: d.iter().map(|x| x.clamped).sum(),
            clamped_beyond_tol: d.iter().map(|x| x.clamped_beyond_tol).sum(),
            max_kappa_gamma: fold(|x| x.max_kappa_gamma, 0.0, f64::max),
            config: config.clone(),
        }
    }
}

pub fn state_file(dir: &Path, state: usize, front: usize) -> PathBuf {
    dir.join(format!("state_{state:04}_front_{front}.csv"))
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

pub fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| io_err(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| io_err(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Writes every stored state, the step diagnostics and the summary.
pub fn write_trajectory(dir: &Path, config: &Config, outcome: &RunOutcome) -> Result<Summary, CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let traj = &outcome.trajectory;
    for (k, state) in traj.states.iter().enumerate() {
        for (j, front) in state.fronts.iter().enumerate() {
            let path = state_file(dir, k, j);
            write_front_csv(front, create(&path)?).map_err(|e| io_err(&path, e))?;
        }
    }
    let path = dir.join(STEPS_FILE);
    let mut w = create(&path)?;
    let mut rows = String::from("t,dt,max_velocity,min_spacing,convexity_margin,clamped,clamped_beyond_tol,max_kappa_gamma\n");
    for d in &traj.diagnostics {
        rows.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{},{:.16e}\n",
            d.t, d.dt, d.max_velocity, d.min_spacing, d.convexity_margin, d.clamped, d.clamped_beyond_tol, d.max_kappa_gamma
        ));
    }
    w.write_all(rows.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| io_err(&path, e))?;
    let summary = Summary::new(config, outcome);
    write_json(&dir.join(SUMMARY_FILE), &summary)?;
    Ok(summary)
}

/// Stored states of a trajectory directory with recomputed rays.
pub struct Loaded {
    pub summary: Summary,
    pub states: Vec<EvolutionState>,
}

pub fn load_trajectory(dir: &Path) -> Result<Loaded, CliError> {
    let path = dir.join(SUMMARY_FILE);
    if !path.is_file() || !state_file(dir, 0, 0).is_file() {
        return Err(CliError::Usage(format!("{}: no states found", dir.display())));
    }
    let file = File::open(&path).map_err(|e| io_err(&path, e))?;
    let summary: Summary = serde_json::from_reader(BufReader::new(file)).map_err(|e| io_err(&path, e))?;
    if summary.times.is_empty() {
        return Err(CliError::Usage(format!("{}: no states found", dir.display())));
    }
    let mut states = Vec::with_capacity(summary.times.len());
    for (k, &t) in summary.times.iter().enumerate() {
        let mut fronts = Vec::with_capacity(summary.fronts);
        for j in 0..summary.fronts {
            let path = state_file(dir, k, j);
            let file = File::open(&path).map_err(|e| io_err(&path, e))?;
            fronts.push(read_front_csv(BufReader::new(file)).map_err(|e| io_err(&path, e))?);
        }
        let state = EvolutionState::with_velocities(t, fronts, summary.model)
            .map_err(|e| CliError::Numerical(format!("state {k} (t = {t}): {e}")))?;
        states.push(state);
    }
    Ok(Loaded { summary, states })
}
