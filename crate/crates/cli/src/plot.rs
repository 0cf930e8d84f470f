//! SVG 1.1 plots of a stored trajectory.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sandmold_core::evolution::Model;
use sandmold_core::geometry::Point2;
use sandmold_core::transport::{sample_density, RayModel};

use crate::config::Shape;
use crate::trajectory::load_trajectory;
use crate::CliError;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;
/// Rays drawn in the density plot.
const DENSITY_RAYS: usize = 8;
const DENSITY_STATIONS: usize = 65;

/// Blue at `u = 0` to red at `u = 1`.
fn color(u: f64) -> String {
    let u = u.clamp(0.0, 1.0);
    let r = (40.0 + 200.0 * u).round();
    let b = (240.0 - 200.0 * u).round();
    format!("rgb({r},60,{b})")
}

fn header(w: f64, h: f64, view: (f64, f64, f64, f64)) -> String {
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"{} {} {} {}\">\n",
        view.0, view.1, view.2, view.3
    )
}

fn polyline(points: &[(f64, f64)], stroke: &str, width: f64, closed: bool) -> String {
    let mut d = String::new();
    for (x, y) in points {
        write!(d, "{x:.6},{y:.6} ").unwrap();
    }
    let tag = if closed { "polygon" } else { "polyline" };
    format!(
        "<{tag} points=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"{width}\"/>\n",
        d.trim_end()
    )
}

/// Axis box with tick labels mapping data ranges onto the plot area.
struct Axes {
    x: (f64, f64),
    y: (f64, f64),
}

impl Axes {
    fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        let pad = |(lo, hi): (f64, f64)| if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
        Self { x: pad(x), y: pad(y) }
    }

    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let u = (x - self.x.0) / (self.x.1 - self.x.0);
        let v = (y - self.y.0) / (self.y.1 - self.y.0);
        (MARGIN + u * (WIDTH - 2.0 * MARGIN), HEIGHT - MARGIN - v * (HEIGHT - 2.0 * MARGIN))
    }

    fn frame(&self, xlabel: &str, ylabel: &str) -> String {
        let mut s = format!(
            "<rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
            WIDTH - 2.0 * MARGIN,
            HEIGHT - 2.0 * MARGIN
        );
        for k in 0..=4 {
            let f = k as f64 / 4.0;
            let xv = self.x.0 + f * (self.x.1 - self.x.0);
            let yv = self.y.0 + f * (self.y.1 - self.y.0);
            let (px, _) = self.map(xv, self.y.0);
            let (_, py) = self.map(self.x.0, yv);
            writeln!(
                s,
                "<text x=\"{px:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"middle\">{xv:.3}</text>",
                HEIGHT - MARGIN + 16.0
            )
            .unwrap();
            writeln!(
                s,
                "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"end\">{yv:.3}</text>",
                MARGIN - 6.0,
                py + 4.0
            )
            .unwrap();
        }
        writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\">{xlabel}</text>",
            WIDTH / 2.0,
            HEIGHT - 12.0
        )
        .unwrap();
        writeln!(
            s,
            "<text x=\"14\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 14 {})\">{ylabel}</text>",
            HEIGHT / 2.0,
            HEIGHT / 2.0
        )
        .unwrap();
        s
    }
}

fn write(path: &Path, body: String) -> Result<PathBuf, CliError> {
    fs::write(path, body).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(path.to_path_buf())
}

/// Writes `fronts.svg`, `radius.svg` and (single-body models) `density.svg`
/// into `out`. Returns the files written.
pub fn cmd_plot(dir: &Path, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let loaded = load_trajectory(dir)?;
    let summary = &loaded.summary;
    let states = &loaded.states;
    let opts = &summary.config.output;
    fs::create_dir_all(out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    let mut written = Vec::new();

    // Fronts, colored by time. The y axis points up.
    let last = states.last().expect("load_trajectory returns states");
    let (mut lo, mut hi) = (Point2::new(f64::INFINITY, f64::INFINITY), Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
    for s in [&states[0], last] {
        for f in &s.fronts {
            let (a, b) = f.bbox();
            lo = Point2::new(lo.x.min(a.x), lo.y.min(a.y));
            hi = Point2::new(hi.x.max(b.x), hi.y.max(b.y));
        }
    }
    let span = (hi.x - lo.x).max(hi.y - lo.y);
    let pad = 0.05 * span;
    let view = (lo.x - pad, -hi.y - pad, hi.x - lo.x + 2.0 * pad, hi.y - lo.y + 2.0 * pad);
    let mut svg = header(WIDTH, WIDTH * view.3 / view.2, view);
    let (t0, t1) = (states[0].t, last.t);
    for (k, s) in states.iter().enumerate() {
        if k % opts.frame_stride != 0 && k + 1 != states.len() {
            continue;
        }
        let u = if t1 > t0 { (s.t - t0) / (t1 - t0) } else { 0.0 };
        for f in &s.fronts {
            let pts: Vec<_> = f.markers().iter().map(|p| (p.x, -p.y)).collect();
            svg.push_str(&polyline(&pts, &color(u), opts.stroke_width * span, true));
        }
    }
    svg.push_str("</svg>\n");
    written.push(write(&out.join("fronts.svg"), svg)?);

    // Equivalent radius sqrt(area/π) of the first body against time.
    let radius: Vec<(f64, f64)> = states
        .iter()
        .map(|s| (s.t, (s.fronts[0].area() / std::f64::consts::PI).sqrt()))
        .collect();
    let exact = analytic_radius(summary.model, summary.config.geometry.shape, radius[0]);
    let mut ys: Vec<f64> = radius.iter().map(|r| r.1).collect();
    if let Some(g) = &exact {
        ys.extend(radius.iter().map(|r| g(r.0)));
    }
    let ylo = ys.iter().copied().fold(f64::INFINITY, f64::min);
    let yhi = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let axes = Axes::new((t0, t1), (ylo, yhi));
    let mut svg = header(WIDTH, HEIGHT, (0.0, 0.0, WIDTH, HEIGHT));
    svg.push_str(&axes.frame("t", "equivalent radius"));
    if let Some(g) = &exact {
        let fine: Vec<_> = (0..=200)
            .map(|k| {
                let t = t0 + (t1 - t0) * k as f64 / 200.0;
                axes.map(t, g(t))
            })
            .collect();
        svg.push_str(&polyline(&fine, "gray", 1.0, false).replace("/>", " stroke-dasharray=\"6,4\"/>"));
    }
    let pts: Vec<_> = radius.iter().map(|&(t, r)| axes.map(t, r)).collect();
    svg.push_str(&polyline(&pts, &color(1.0), 1.5, false));
    for (x, y) in &pts {
        writeln!(svg, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"2.5\" fill=\"{}\"/>", color(1.0)).unwrap();
    }
    svg.push_str("</svg>\n");
    written.push(write(&out.join("radius.svg"), svg)?);

    // Density profiles along a few rays of the final state.
    let ray_model = match summary.model {
        Model::Sandpile1 => Some(RayModel::Sandpile { t: last.t }),
        Model::Molding => Some(RayModel::Molding),
        Model::Sandpile2 => None,
    };
    if let Some(model) = ray_model {
        let rays = &last.rays[0];
        let step = (rays.len() / DENSITY_RAYS).max(1);
        let profiles = rays
            .iter()
            .step_by(step)
            .map(|r| sample_density(model, r.kappa, r.gamma, DENSITY_STATIONS))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Numerical(e.to_string()))?;
        let smax = profiles.iter().map(|p| p.gamma).fold(0.0, f64::max);
        let amax = profiles
            .iter()
            .flat_map(|p| p.samples.iter().map(|x| x.a))
            .fold(0.0, f64::max);
        let axes = Axes::new((0.0, smax), (0.0, amax));
        let mut svg = header(WIDTH, HEIGHT, (0.0, 0.0, WIDTH, HEIGHT));
        svg.push_str(&axes.frame("s", "a(s)"));
        let count = profiles.len().max(2) - 1;
        for (k, p) in profiles.iter().enumerate() {
            let pts: Vec<_> = p.samples.iter().map(|x| axes.map(x.s, x.a)).collect();
            svg.push_str(&polyline(&pts, &color(k as f64 / count as f64), 1.2, false));
        }
        svg.push_str("</svg>\n");
        written.push(write(&out.join("density.svg"), svg)?);
    }
    Ok(written)
}

/// Radius of an evolving disk: `R(t) = R₀ (t/t₀)^{1/3}` for the sandpile
/// (`V = R/(3t)`), `R₀ e^{(t − t₀)/2}` for molding (`V = R/2`).
fn analytic_radius(model: Model, shape: Shape, (t0, r0): (f64, f64)) -> Option<Box<dyn Fn(f64) -> f64>> {
    match (model, shape) {
        (Model::Sandpile1, Shape::Disk) => Some(Box::new(move |t| r0 * (t / t0).cbrt())),
        (Model::Molding, Shape::Disk) => Some(Box::new(move |t| r0 * (0.5 * (t - t0)).exp())),
        _ => None,
    }
}
