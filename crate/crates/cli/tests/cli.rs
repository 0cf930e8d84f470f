use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn sandmold(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sandmold"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_owned()
}

const SANDPILE_DISK: &str = r#"
[model]
kind = "sandpile_1"

[geometry]
shape = "disk"
radius = 1.0

[time]
t_start = 1.0
t_end = 1.5
frames = 3

[numerics]
markers = 64
"#;

const MOLDING_DISK: &str = r#"
[model]
kind = "molding"

[geometry]
shape = "disk"
radius = 1.0

[time]
t_end = 1.0
frames = 15

[numerics]
markers = 64

[verify]
test_functions = 2
seed = 5
"#;

#[test]
fn probe_prints_flat_ray() {
    let o = sandmold(&["probe", "--model", "sandpile", "--kappa", "0.0", "--gamma", "1.0", "--t", "1.0", "--s", "0.5"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(String::from_utf8(o.stdout).unwrap(), "F=0.5\nV=0.5\na=0.125\n");
}

#[test]
fn probe_writes_density_csv() {
    let tmp = TempDir::new().unwrap();
    let out = path(tmp.path(), "probe");
    let o = sandmold(&["probe", "--model", "molding", "--kappa", "1", "--count", "5", "--out", &out]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(tmp.path().join("probe/density.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "s,a");
    assert_eq!(lines.len(), 6);
    // a(0) = V = 1/2 and a(γ) = 0 on the unit disk.
    assert_eq!(lines[1], "0.0000000000000000e0,5.0000000000000000e-1");
    assert!(lines[5].ends_with(",0.0000000000000000e0"), "{}", lines[5]);
}

#[test]
fn run_writes_states_deterministically() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "disk.toml", SANDPILE_DISK);
    for name in ["a", "b"] {
        let o = sandmold(&["run", "--config", &cfg, "--out", &path(tmp.path(), name)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let a = tmp.path().join("a");
    let mut names: Vec<_> = fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "state_0000_front_0.csv",
            "state_0001_front_0.csv",
            "state_0002_front_0.csv",
            "state_0003_front_0.csv",
            "steps.csv",
            "summary.json",
        ]
    );
    for n in &names {
        assert_eq!(
            fs::read(a.join(n)).unwrap(),
            fs::read(tmp.path().join("b").join(n)).unwrap(),
            "{n} differs between runs"
        );
    }
    let csv = fs::read_to_string(a.join("state_0003_front_0.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,y"));
    let first = lines.next().unwrap();
    let x = first.split(',').next().unwrap();
    assert_eq!(x.split('e').next().unwrap().len(), 18, "17 significant digits: {x}");
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(a.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["status"], "ok");
    assert_eq!(summary["times"].as_array().unwrap().len(), 4);
    assert_eq!(summary["config"]["numerics"]["cfl"], 0.25);
    // The disk radius grows like t^{1/3}.
    let r: f64 = x.parse::<f64>().unwrap().hypot(first.split(',').nth(1).unwrap().parse().unwrap());
    assert!((r - 1.5f64.cbrt()).abs() < 1e-3, "radius {r}");
}

#[test]
fn verify_molding_disk_passes_and_is_reproducible() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "mold.toml", MOLDING_DISK);
    let run_dir = path(tmp.path(), "run");
    let o = sandmold(&["verify", "--config", &cfg, "--out", &run_dir]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let first = fs::read(tmp.path().join("run/reports.json")).unwrap();
    let reports: serde_json::Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(reports["pass"], true);
    assert_eq!(reports["seed"], 5);
    let identities: Vec<&str> = reports["reports"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["identity"].as_str().unwrap())
        .collect();
    for id in ["molding_balance", "kinematic", "spacetime_balance", "expansion"] {
        assert!(identities.contains(&id), "missing {id}");
    }

    // Reload the written trajectory and verify again.
    let again = path(tmp.path(), "again");
    let o = sandmold(&["verify", &run_dir, "--out", &again]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(first, fs::read(tmp.path().join("again/reports.json")).unwrap());

    let other = path(tmp.path(), "other");
    let o = sandmold(&["verify", &run_dir, "--out", &other, "--seed", "6"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_ne!(first, fs::read(tmp.path().join("other/reports.json")).unwrap());
}

#[test]
fn verify_sandpile_disk_passes() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "disk.toml", SANDPILE_DISK);
    let o = sandmold(&["verify", "--config", &cfg, "--out", &path(tmp.path(), "run")]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let reports: serde_json::Value =
        serde_json::from_slice(&fs::read(tmp.path().join("run/reports.json")).unwrap()).unwrap();
    let identities: Vec<&str> = reports["reports"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["identity"].as_str().unwrap())
        .collect();
    for id in ["mass_balance", "subdifferential_gap", "projection", "expansion"] {
        assert!(identities.contains(&id), "missing {id}");
    }
}

#[test]
fn two_cone_run_expands() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "two.toml",
        "[model]\nkind = \"sandpile_2\"\n[geometry]\nshape = \"two_disks\"\nradii = [1.0, 0.8]\nseparation = 1.6\n\
         [time]\nt_end = 1.4\nframes = 4\n[numerics]\nmarkers = 64\n",
    );
    let o = sandmold(&["verify", "--config", &cfg, "--out", &path(tmp.path(), "run")]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(tmp.path().join("run/state_0004_front_1.csv").is_file());
    let o = sandmold(&["plot", &path(tmp.path(), "run")]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(!tmp.path().join("run/density.svg").exists());
}

#[test]
fn sharp_square_loses_convexity() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "square.toml",
        "[model]\nkind = \"sandpile_1\"\n[geometry]\nshape = \"rounded_square\"\nside = 2.0\nfillet = 0.0\n\
         [time]\nframes = 2\n[numerics]\nmarkers = 64\n",
    );
    let out = path(tmp.path(), "run");
    let o = sandmold(&["run", "--config", &cfg, "--out", &out]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stderr(&o).contains("convexity"));
    let summary: serde_json::Value =
        serde_json::from_slice(&fs::read(tmp.path().join("run/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["status"], "convexity_loss");
    assert!(tmp.path().join("run/state_0000_front_0.csv").is_file());
}

#[test]
fn plot_writes_svg() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "disk.toml", SANDPILE_DISK);
    let run = path(tmp.path(), "run");
    assert_eq!(code(&sandmold(&["run", "--config", &cfg, "--out", &run])), 0);
    let o = sandmold(&["plot", &run, "--out", &path(tmp.path(), "svg")]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for name in ["fronts.svg", "radius.svg", "density.svg"] {
        let svg = fs::read_to_string(tmp.path().join("svg").join(name)).unwrap();
        assert!(svg.starts_with("<?xml"), "{name}");
        assert!(svg.contains("version=\"1.1\""), "{name}");
        assert!(svg.trim_end().ends_with("</svg>"), "{name}");
    }
    let fronts = fs::read_to_string(tmp.path().join("svg/fronts.svg")).unwrap();
    assert_eq!(fronts.matches("<polygon").count(), 4);
    // Disk runs carry the analytic radius as a dashed overlay.
    assert!(fs::read_to_string(tmp.path().join("svg/radius.svg")).unwrap().contains("stroke-dasharray"));
}

#[test]
fn plot_of_empty_dir_fails() {
    let tmp = TempDir::new().unwrap();
    let o = sandmold(&["plot", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("no states found"), "{}", stderr(&o));
}

#[test]
fn config_errors_are_usage_errors() {
    let tmp = TempDir::new().unwrap();
    let unknown = write_config(tmp.path(), "unknown.toml", &format!("{SANDPILE_DISK}fo = 1\n"));
    let o = sandmold(&["run", "--config", &unknown, "--out", &path(tmp.path(), "x")]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("line 16"), "{}", stderr(&o));

    let zero = write_config(tmp.path(), "zero.toml", &SANDPILE_DISK.replace("t_start = 1.0", "t_start = 0.0"));
    let o = sandmold(&["run", "--config", &zero]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("sandpile requires t_start > 0"), "{}", stderr(&o));

    assert_eq!(code(&sandmold(&["run"])), 1);
    assert_eq!(code(&sandmold(&["frobnicate"])), 1);
    assert_eq!(code(&sandmold(&["--help"])), 0);
}
