use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sandmold_cli::{cmd_plot, cmd_probe, cmd_run, cmd_verify, load_config, CliError, Config, ProbeArgs, ProbeModel};

/// Sandpile and compression-molding front evolution with balance checks.
///
/// Configuration files are TOML with sections [model], [geometry], [time],
/// [numerics], [verify] and [output]. Defaults: markers = 256, cfl = 0.25,
/// frames = 10, t_start = 1 (sandpile) or 0 (molding), t_end = t_start + 1,
/// test_functions = 3, seed = 0, output dir = "out".
///
/// Exit codes: 0 ok, 1 usage, 2 numerical failure, 3 convexity loss.
#[derive(Parser)]
#[command(name = "sandmold", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (overrides [output] dir).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Verification seed (overrides [verify] seed).
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a scenario; writes marker CSVs, steps.csv and summary.json.
    Run(Common),
    /// Check the balance identities on a trajectory; writes reports.json.
    ///
    /// With --config the scenario is run first into the output directory.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Trajectory directory written by `run`.
        #[arg(value_name = "TRAJ_DIR", conflicts_with = "config")]
        traj: Option<PathBuf>,
    },
    /// Print F, V and densities of a single ray.
    Probe {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "sandpile")]
        model: ProbeKind,
        /// Principal curvatures at the foot, comma separated.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, default_value = "0")]
        kappa: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        /// Ray length inside the other body (two-cone law).
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        /// Stations where the density is printed, comma separated.
        #[arg(long, value_delimiter = ',')]
        s: Vec<f64>,
        /// Write an `s,a` profile with this many stations (to --out/density.csv, or stdout).
        #[arg(long, default_value_t = 0)]
        count: usize,
    },
    /// Draw fronts, radius against time and density profiles as SVG.
    Plot {
        #[command(flatten)]
        common: Common,
        /// Trajectory directory written by `run`.
        #[arg(value_name = "TRAJ_DIR", conflicts_with = "config")]
        traj: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ProbeKind {
    Sandpile,
    Twocone,
    Molding,
}

fn config_and_out(common: &Common) -> Result<(Config, PathBuf), CliError> {
    let path = common
        .config
        .as_deref()
        .ok_or_else(|| CliError::Usage("--config is required".into()))?;
    let mut config = load_config(path)?;
    if let Some(seed) = common.seed {
        config.verify.seed = seed;
    }
    let out = common.out.clone().unwrap_or_else(|| PathBuf::from(&config.output.dir));
    Ok((config, out))
}

/// Trajectory directory from a positional argument or by running `--config`.
fn trajectory_dir(common: &Common, traj: Option<&Path>) -> Result<PathBuf, CliError> {
    match traj {
        Some(dir) => Ok(dir.to_path_buf()),
        None if common.config.is_some() => {
            let (config, out) = config_and_out(common)?;
            cmd_run(&config, &out)?;
            Ok(out)
        }
        None => Err(CliError::Usage("give a trajectory directory or --config".into())),
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(common) => {
            let (config, out) = config_and_out(&common)?;
            let s = cmd_run(&config, &out)?;
            println!(
                "{}: {} states, {} steps, t = {} to {}, written to {}",
                s.model.name(),
                s.times.len(),
                s.steps,
                s.times[0],
                s.times[s.times.len() - 1],
                out.display()
            );
        }
        Command::Verify { common, traj } => {
            let dir = trajectory_dir(&common, traj.as_deref())?;
            let out = common.out.clone().unwrap_or_else(|| dir.clone());
            let v = cmd_verify(&dir, common.seed, &out)?;
            println!("{} residual reports pass, written to {}", v.checked, out.display());
        }
        Command::Probe {
            common,
            model,
            kappa,
            gamma,
            delta,
            t,
            s,
            count,
        } => {
            let model = match model {
                ProbeKind::Sandpile => ProbeModel::Sandpile,
                ProbeKind::Twocone => ProbeModel::Twocone,
                ProbeKind::Molding => ProbeModel::Molding,
            };
            let args = ProbeArgs {
                model,
                kappa,
                gamma,
                delta,
                t,
                s,
                count,
            };
            let p = cmd_probe(&args)?;
            print!("{}", p.text);
            if let Some(profile) = p.profile {
                let err = |e: sandmold_core::transport::TransportError| CliError::Io(e.to_string());
                match &common.out {
                    Some(dir) => {
                        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
                        let path = dir.join("density.csv");
                        profile.write_csv(sandmold_cli::trajectory::create(&path)?).map_err(err)?;
                    }
                    None => profile.write_csv(std::io::stdout().lock()).map_err(err)?,
                }
            }
        }
        Command::Plot { common, traj } => {
            let dir = match traj {
                Some(dir) => dir,
                None => config_and_out(&common)?.1,
            };
            let out = common.out.clone().unwrap_or_else(|| dir.clone());
            for path in cmd_plot(&dir, &out)? {
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
