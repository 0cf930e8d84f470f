//! Scenario configuration files.
//!
//! ```toml
//! [model]
//! kind = "sandpile_1"          # sandpile_1 | sandpile_2 | molding
//!
//! [geometry]
//! shape = "disk"               # disk | rounded_square | ellipse | two_disks
//! radius = 1.0
//!
//! [time]
//! t_start = 1.0                # default 1 for sandpiles, 0 for molding
//! t_end = 2.0                  # default t_start + 1
//! frames = 10
//!
//! [numerics]
//! markers = 256
//! cfl = 0.25
//!
//! [verify]
//! test_functions = 3
//! seed = 0
//!
//! [output]
//! dir = "out"
//! ```

use serde::{Deserialize, Serialize};

use sandmold_core::evolution::{Model, Scenario, DEFAULT_CFL, MIN_SCENARIO_MARKERS};
use sandmold_core::verification::MIN_SPACETIME_STATES;
use sandmold_core::geometry::{shapes, ConvexFront, Point2};

use crate::CliError;

pub const DEFAULT_MARKERS: usize = 256;
pub const DEFAULT_FRAMES: usize = 10;
pub const DEFAULT_TEST_FUNCTIONS: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub model: ModelSection,
    pub geometry: GeometrySection,
    #[serde(default)]
    pub time: TimeSection,
    #[serde(default)]
    pub numerics: NumericsSection,
    #[serde(default)]
    pub verify: VerifySection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: Model,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Disk,
    RoundedSquare,
    Ellipse,
    TwoDisks,
}

/// Shape parameters. Only the keys of the chosen shape may be set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    pub shape: Shape,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<[f64; 2]>,
    /// Disk radius.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fillet: Option<f64>,
    /// Ellipse semi-axes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    /// Two disks: radii and distance between the centers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub separation: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    /// Stored-state stride: the run keeps `frames + 1` equally spaced states.
    #[serde(default = "default_frames")]
    pub frames: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsSection {
    #[serde(default = "default_markers")]
    pub markers: usize,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    /// Identities to check; empty means every identity of the model.
    #[serde(default)]
    pub identities: Vec<Identity>,
    /// Random test functions of each kind per stored state.
    #[serde(default = "default_test_functions")]
    pub test_functions: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Identity {
    MassBalance,
    SubdifferentialGap,
    MoldingBalance,
    Spacetime,
    Projection,
    Expansion,
}

impl Identity {
    pub fn applies_to(self, model: Model) -> bool {
        match self {
            Identity::MassBalance | Identity::SubdifferentialGap | Identity::Projection => model == Model::Sandpile1,
            Identity::MoldingBalance | Identity::Spacetime => model == Model::Molding,
            Identity::Expansion => true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: String,
    /// Plot every `frame_stride`-th stored state.
    #[serde(default = "default_one")]
    pub frame_stride: usize,
    /// Stroke width in units of the plotted body's diameter.
    #[serde(default = "default_stroke")]
    pub stroke_width: f64,
}

fn default_frames() -> usize {
    DEFAULT_FRAMES
}
fn default_markers() -> usize {
    DEFAULT_MARKERS
}
fn default_cfl() -> f64 {
    DEFAULT_CFL
}
fn default_test_functions() -> usize {
    DEFAULT_TEST_FUNCTIONS
}
fn default_dir() -> String {
    "out".into()
}
fn default_one() -> usize {
    1
}
fn default_stroke() -> f64 {
    0.004
}

impl Default for TimeSection {
    fn default() -> Self {
        Self {
            t_start: None,
            t_end: None,
            frames: DEFAULT_FRAMES,
        }
    }
}

impl Default for NumericsSection {
    fn default() -> Self {
        Self {
            markers: DEFAULT_MARKERS,
            cfl: DEFAULT_CFL,
        }
    }
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            identities: Vec::new(),
            test_functions: DEFAULT_TEST_FUNCTIONS,
            seed: 0,
        }
    }
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            frame_stride: 1,
            stroke_width: default_stroke(),
        }
    }
}

fn semantic(key: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{key}: {msg}"))
}

fn positive(key: &str, v: Option<f64>) -> Result<f64, CliError> {
    match v {
        None => Err(semantic(key, "missing")),
        Some(x) if x > 0.0 && x.is_finite() => Ok(x),
        Some(x) => Err(semantic(key, format_args!("must be positive, got {x}"))),
    }
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<Config, CliError> {
    let config: Config = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

impl Config {
    pub fn t_start(&self) -> f64 {
        self.time.t_start.unwrap_or(if self.model.kind.is_sandpile() { 1.0 } else { 0.0 })
    }

    pub fn t_end(&self) -> f64 {
        self.time.t_end.unwrap_or(self.t_start() + 1.0)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let kind = self.model.kind;
        let t0 = self.t_start();
        if !t0.is_finite() {
            return Err(semantic("time.t_start", "must be finite"));
        }
        if kind.is_sandpile() && !(t0 > 0.0) {
            return Err(semantic("time.t_start", "sandpile requires t_start > 0"));
        }
        if !(t0 >= 0.0) {
            return Err(semantic("time.t_start", format_args!("must be nonnegative, got {t0}")));
        }
        let t1 = self.t_end();
        if !(t1 > t0 && t1.is_finite()) {
            return Err(semantic("time.t_end", format_args!("must exceed t_start = {t0}, got {t1}")));
        }
        if self.time.frames == 0 {
            return Err(semantic("time.frames", "must be positive"));
        }
        if self.numerics.markers < MIN_SCENARIO_MARKERS {
            return Err(semantic(
                "numerics.markers",
                format_args!("must be at least {MIN_SCENARIO_MARKERS}, got {}", self.numerics.markers),
            ));
        }
        let cfl = self.numerics.cfl;
        if !(cfl > 0.0 && cfl < 1.0) {
            return Err(semantic("numerics.cfl", format_args!("must lie in (0, 1), got {cfl}")));
        }
        if self.output.frame_stride == 0 {
            return Err(semantic("output.frame_stride", "must be positive"));
        }
        positive("output.stroke_width", Some(self.output.stroke_width))?;
        if let Some(id) = self.verify.identities.iter().find(|id| !id.applies_to(kind)) {
            return Err(semantic(
                "verify.identities",
                format_args!("{id:?} does not apply to {}", kind.name()),
            ));
        }
        if self.verify.identities.contains(&Identity::Spacetime) && self.time.frames + 1 < MIN_SPACETIME_STATES {
            return Err(semantic(
                "time.frames",
                format_args!("the space-time balance needs at least {} frames", MIN_SPACETIME_STATES - 1),
            ));
        }
        let two = self.geometry.shape == Shape::TwoDisks;
        if two != (kind == Model::Sandpile2) {
            return Err(semantic(
                "geometry.shape",
                "two_disks goes with sandpile_2 and only with it",
            ));
        }
        self.check_shape_keys()?;
        self.initial_fronts().map(|_| ())
    }

    fn check_shape_keys(&self) -> Result<(), CliError> {
        let g = &self.geometry;
        let allowed: &[&str] = match g.shape {
            Shape::Disk => &["radius"],
            Shape::RoundedSquare => &["side", "fillet"],
            Shape::Ellipse => &["a", "b"],
            Shape::TwoDisks => &["radii", "separation"],
        };
        let set = [
            ("radius", g.radius.is_some()),
            ("side", g.side.is_some()),
            ("fillet", g.fillet.is_some()),
            ("a", g.a.is_some()),
            ("b", g.b.is_some()),
            ("radii", g.radii.is_some()),
            ("separation", g.separation.is_some()),
        ];
        match set.iter().find(|(k, on)| *on && !allowed.contains(k)) {
            Some((k, _)) => Err(semantic(
                &format!("geometry.{k}"),
                format_args!("not a parameter of {:?}", g.shape),
            )),
            None => Ok(()),
        }
    }

    /// Initial fronts with `numerics.markers` markers each.
    pub fn initial_fronts(&self) -> Result<Vec<ConvexFront>, CliError> {
        let g = &self.geometry;
        let n = self.numerics.markers;
        let c = g.center.map_or(Point2::new(0.0, 0.0), |[x, y]| Point2::new(x, y));
        let built = match g.shape {
            Shape::Disk => vec![shapes::disk(c, positive("geometry.radius", g.radius)?, n)],
            Shape::RoundedSquare => {
                let side = positive("geometry.side", g.side)?;
                let fillet = g.fillet.ok_or_else(|| semantic("geometry.fillet", "missing"))?;
                if !(fillet >= 0.0 && fillet <= 0.5 * side) {
                    return Err(semantic("geometry.fillet", format_args!("must lie in [0, side/2], got {fillet}")));
                }
                vec![shapes::rounded_square(c, side, fillet, n)]
            }
            Shape::Ellipse => vec![shapes::ellipse(
                c,
                positive("geometry.a", g.a)?,
                positive("geometry.b", g.b)?,
                n,
            )],
            Shape::TwoDisks => {
                let [r1, r2] = g.radii.ok_or_else(|| semantic("geometry.radii", "missing"))?;
                positive("geometry.radii", Some(r1))?;
                positive("geometry.radii", Some(r2))?;
                let d = positive("geometry.separation", g.separation)?;
                let half = Point2::new(0.5 * d, 0.0);
                vec![shapes::disk(c - half, r1, n), shapes::disk(c + half, r2, n)]
            }
        };
        built
            .into_iter()
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| semantic("geometry", e))
    }

    pub fn scenario(&self) -> Result<Scenario, CliError> {
        Ok(Scenario {
            model: self.model.kind,
            fronts: self.initial_fronts()?,
            t_start: self.t_start(),
            t_end: self.t_end(),
            markers: self.numerics.markers,
            cfl: self.numerics.cfl,
            frames: self.time.frames,
        })
    }

    /// Identities checked by `verify`.
    pub fn identities(&self) -> Vec<Identity> {
        if !self.verify.identities.is_empty() {
            return self.verify.identities.clone();
        }
        [
            Identity::MassBalance,
            Identity::SubdifferentialGap,
            Identity::Projection,
            Identity::MoldingBalance,
            Identity::Spacetime,
            Identity::Expansion,
        ]
        .into_iter()
        .filter(|id| id.applies_to(self.model.kind))
        .filter(|&id| id != Identity::Spacetime || self.time.frames + 1 >= MIN_SPACETIME_STATES)
        .collect()
    }
}
