//! Command-line front end. [`dispatch`] parses arguments, loads the
//! optional TOML configuration, applies flag overrides and runs one
//! subcommand.
//!
//! Exit codes: 0 on success, 1 for usage or validation errors, 2 when a
//! physics computation or a verification fails.

pub mod commands;
pub mod config;
pub mod error;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book_cli {}

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use iontrap_mbqc::electron_dynamics::Stepper;

use crate::commands::{Artifact, Outcome};
use crate::config::{load_config, parse_duration, Format, RunConfig};
use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "iontrap-mbqc", version, about = "Cluster-state ion-trap architecture toolkit")]
pub struct Cli {
    /// TOML run configuration; every key is optional (see `config`).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Random seed for measurement sampling [default: 0].
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write all artifacts into DIR instead of printing the main one.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Args, Default)]
pub struct LatticeArgs {
    /// Hexagonal cell rows [default: 8].
    #[arg(long)]
    pub rows: Option<usize>,
    /// Hexagonal cell columns [default: 8].
    #[arg(long)]
    pub cols: Option<usize>,
    /// Site spacing [default: 1.0].
    #[arg(long)]
    pub d: Option<f64>,
    /// Sublattice scaling; the cluster has 2n² layers [default: 1].
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the trap array and its layer decomposition (lattice.json).
    Lattice(LatticeArgs),
    /// Six-round CPHASE schedule (schedule.json, schedule.csv).
    Schedule {
        #[command(flatten)]
        lattice: LatticeArgs,
        /// Close the last layer onto the first [default: true].
        #[arg(long)]
        periodic: Option<bool>,
        /// Main artifact format [default: json].
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Gate time per round, s [default: 1e-5].
        #[arg(long)]
        t_gate: Option<f64>,
        /// Shuttle time per round, s [default: 1e-4].
        #[arg(long)]
        t_shuttle: Option<f64>,
    },
    /// Check that a schedule file builds its target cluster (exit 2 if not).
    Verify {
        #[arg(long, value_name = "PATH")]
        schedule: Option<PathBuf>,
    },
    /// Run a measurement pattern file (mbqc.json).
    Mbqc {
        #[arg(long, value_name = "PATH")]
        pattern: Option<PathBuf>,
    },
    /// Ionization rates, resonances and rotation irradiances
    /// (ionize_sweep.csv, ionize_report.json).
    Ionize {
        /// Sweep start, W/cm² [default: 1e7].
        #[arg(long)]
        i_min: Option<f64>,
        /// Sweep end, W/cm² [default: 1e11].
        #[arg(long)]
        i_max: Option<f64>,
        /// Sweep points [default: 41].
        #[arg(long)]
        points: Option<usize>,
        /// Irradiance of the rate report, W/cm² [default: 1e9].
        #[arg(long)]
        irradiance: Option<f64>,
        /// Shortest wavelength of the resonance window, nm [default: 380].
        #[arg(long)]
        lambda_min: Option<f64>,
        /// Longest wavelength of the resonance window, nm [default: 410].
        #[arg(long)]
        lambda_max: Option<f64>,
        /// Largest photon number [default: 4].
        #[arg(long)]
        max_photons: Option<u32>,
        /// Detuning cut, cm⁻¹ [default: 100].
        #[arg(long)]
        detuning_cut: Option<f64>,
        /// Level table JSON [default: bundled ⁴⁰Ca⁺].
        #[arg(long, value_name = "PATH")]
        levels: Option<PathBuf>,
    },
    /// Propagate the photoelectron (electron_trace.csv,
    /// electron_summary.json, snapshots/).
    Electron {
        /// End time, s [default: 3e-9].
        #[arg(long)]
        t_final: Option<f64>,
        /// Initial width, m [default: 1.6e-8].
        #[arg(long)]
        sigma0: Option<f64>,
        /// Initial velocity, m/s [default: 7000].
        #[arg(long)]
        v0: Option<f64>,
        /// Propagation scheme [default: comoving].
        #[arg(long, value_parser = parse_stepper)]
        stepper: Option<Stepper>,
        /// Use the RF-driven saddle instead of the static one.
        #[arg(long)]
        driven: bool,
        /// Time step, s [default: 1e-13].
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Operation count, time budget and storage error (resources.json).
    Resources {
        /// Key length [default: 640].
        #[arg(long)]
        bits: Option<u64>,
        /// Wall-clock target such as `5months` or `5min`.
        #[arg(long, value_parser = check_duration)]
        wallclock: Option<String>,
        /// Qubits measured in sequence [default: 10000].
        #[arg(long)]
        qubits: Option<u64>,
        /// Measurement time, s [default: 3e-9].
        #[arg(long)]
        t_meas: Option<f64>,
        /// Coherence time, s [default: 10].
        #[arg(long)]
        t_coh: Option<f64>,
    },
    /// Print the effective configuration as TOML.
    Config,
}

fn parse_stepper(s: &str) -> std::result::Result<Stepper, String> {
    match s {
        "comoving" => Ok(Stepper::Comoving),
        "lab" => Ok(Stepper::Lab),
        _ => Err(format!("expected `comoving` or `lab`, got {s:?}")),
    }
}

fn check_duration(s: &str) -> std::result::Result<String, String> {
    parse_duration(s).map(|_| s.to_string())
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn apply_lattice(cfg: &mut RunConfig, a: LatticeArgs) {
    set(&mut cfg.lattice.rows, a.rows);
    set(&mut cfg.lattice.cols, a.cols);
    set(&mut cfg.lattice.d, a.d);
    set(&mut cfg.lattice.n, a.n);
}

fn command_from_name(name: &str) -> Result<Command> {
    let cmd = Cli::try_parse_from(["iontrap-mbqc", name]).map_err(|_| CliError::Usage(format!("unknown command {name:?} in config")))?;
    cmd.command.ok_or_else(|| CliError::Usage(format!("unknown command {name:?} in config")))
}

/// Applies overrides and runs the command.
fn execute(cli: Cli) -> Result<(Outcome, Option<PathBuf>)> {
    let mut cfg = match &cli.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    set(&mut cfg.seed, cli.seed);
    if cli.out.is_some() {
        cfg.output.dir = cli.out.clone();
    }
    let command = match cli.command {
        Some(c) => c,
        None => match cfg.command.clone() {
            Some(name) => command_from_name(&name)?,
            None => return Err(CliError::Usage("no subcommand given; see --help".into())),
        },
    };
    let run: fn(&RunConfig) -> Result<Outcome> = match command {
        Command::Lattice(a) => {
            apply_lattice(&mut cfg, a);
            commands::lattice
        }
        Command::Schedule { lattice, periodic, format, t_gate, t_shuttle } => {
            apply_lattice(&mut cfg, lattice);
            set(&mut cfg.lattice.periodic, periodic);
            set(&mut cfg.schedule.format, format);
            set(&mut cfg.schedule.t_gate, t_gate);
            set(&mut cfg.schedule.t_shuttle, t_shuttle);
            commands::schedule
        }
        Command::Verify { schedule } => {
            if schedule.is_some() {
                cfg.verify.schedule = schedule;
            }
            commands::verify
        }
        Command::Mbqc { pattern } => {
            if pattern.is_some() {
                cfg.mbqc.pattern = pattern;
            }
            commands::mbqc
        }
        Command::Ionize { i_min, i_max, points, irradiance, lambda_min, lambda_max, max_photons, detuning_cut, levels } => {
            let c = &mut cfg.ionize;
            set(&mut c.i_min, i_min);
            set(&mut c.i_max, i_max);
            set(&mut c.points, points);
            set(&mut c.i_report, irradiance);
            set(&mut c.window_nm[0], lambda_min);
            set(&mut c.window_nm[1], lambda_max);
            set(&mut c.max_photons, max_photons);
            set(&mut c.detuning_cut_cm, detuning_cut);
            if levels.is_some() {
                c.levels = levels;
            }
            commands::ionize
        }
        Command::Electron { t_final, sigma0, v0, stepper, driven, dt } => {
            let e = &mut cfg.electron;
            set(&mut e.t_final, t_final);
            set(&mut e.sigma0, sigma0);
            set(&mut e.v0, v0);
            set(&mut e.trap.stepper, stepper);
            set(&mut e.trap.dt, dt);
            if driven {
                e.trap.static_mode = false;
            }
            commands::electron
        }
        Command::Resources { bits, wallclock, qubits, t_meas, t_coh } => {
            let r = &mut cfg.resources;
            set(&mut r.bits, bits);
            set(&mut r.wall_clock, wallclock);
            set(&mut r.n_qubits, qubits);
            set(&mut r.model.t_meas, t_meas);
            set(&mut r.model.t_coh, t_coh);
            commands::resources
        }
        Command::Config => commands::config,
    };
    cfg.validate()?;
    Ok((run(&cfg)?, cfg.output.dir.clone()))
}

fn write_artifacts(dir: &Path, artifacts: &[Artifact], stdout: &mut dyn Write) -> Result<()> {
    for a in artifacts {
        let path = dir.join(&a.name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        std::fs::write(&path, &a.contents).map_err(|e| CliError::io(&path, e))?;
        writeln!(stdout, "{}", path.display()).map_err(|e| CliError::io("<stdout>", e))?;
    }
    Ok(())
}

/// As [`dispatch`], writing to the given streams.
pub fn dispatch_to<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                1
            } else {
                let _ = write!(stdout, "{text}");
                0
            };
        }
    };
    let result = execute(cli).and_then(|(outcome, dir)| {
        match &dir {
            Some(dir) => write_artifacts(dir, &outcome.artifacts, stdout)?,
            None => {
                if let Some(main) = outcome.artifacts.first() {
                    stdout.write_all(main.contents.as_bytes()).map_err(|e| CliError::io("<stdout>", e))?;
                }
            }
        }
        outcome.failure.map_or(Ok(()), Err)
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

/// Runs the command line `argv` (program name first) and returns the exit
/// code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    dispatch_to(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
