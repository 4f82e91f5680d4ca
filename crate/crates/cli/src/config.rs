//! TOML run configuration. Every block and key is optional; missing values
//! take the defaults below and unknown keys are rejected.

use std::path::{Path, PathBuf};

use iontrap_mbqc::electron_dynamics::{TrapConfig, CA40_ION_MASS, DEFAULT_SIGMA0, DEFAULT_T_FINAL, DEFAULT_V0};
use iontrap_mbqc::ionization::{Calibration, RabiReference, DEFAULT_DETUNING_CUT_CM};
use iontrap_mbqc::resources::TimingModel;
use iontrap_mbqc::scheduler::{DEFAULT_GATE_TIME, DEFAULT_SHUTTLE_TIME};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Subcommand to run when none is given on the command line.
    pub command: Option<String>,
    pub seed: u64,
    pub output: OutputConfig,
    pub lattice: LatticeConfig,
    pub schedule: ScheduleConfig,
    pub verify: VerifyConfig,
    pub mbqc: MbqcConfig,
    pub ionize: IonizeConfig,
    pub electron: ElectronConfig,
    pub resources: ResourcesConfig,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Directory for artifacts; without it the main artifact goes to stdout.
    pub dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeConfig {
    pub rows: usize,
    pub cols: usize,
    /// Site spacing, arbitrary length unit.
    pub d: f64,
    pub n: usize,
    pub periodic: bool,
}

impl Default for LatticeConfig {
    fn default() -> Self {
        Self { rows: 8, cols: 8, d: 1.0, n: 1, periodic: true }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleConfig {
    /// s.
    pub t_gate: f64,
    /// s.
    pub t_shuttle: f64,
    pub format: Format,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self { t_gate: DEFAULT_GATE_TIME, t_shuttle: DEFAULT_SHUTTLE_TIME, format: Format::Json }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    /// Schedule JSON as written by `schedule`.
    pub schedule: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MbqcConfig {
    /// Pattern JSON file.
    pub pattern: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IonizeConfig {
    /// W/cm².
    pub i_min: f64,
    pub i_max: f64,
    pub points: usize,
    /// Irradiance of the single-point rate report, W/cm².
    pub i_report: f64,
    pub window_nm: [f64; 2],
    pub max_photons: u32,
    pub detuning_cut_cm: f64,
    /// Level table JSON; the bundled ⁴⁰Ca⁺ table when absent.
    pub levels: Option<PathBuf>,
    pub calibration: Calibration,
    pub rabi: RabiReference,
    /// Quadrupole π-pulse length, s.
    pub t_quadrupole: f64,
    /// Raman π-pulse length, s.
    pub t_raman: f64,
    pub raman_detuning_linewidths: f64,
}

impl Default for IonizeConfig {
    fn default() -> Self {
        Self {
            i_min: 1e7,
            i_max: 1e11,
            points: 41,
            i_report: 1e9,
            window_nm: [380.0, 410.0],
            max_photons: 4,
            detuning_cut_cm: DEFAULT_DETUNING_CUT_CM,
            levels: None,
            calibration: Calibration::bundled(),
            rabi: RabiReference::calcium(),
            t_quadrupole: 2e-9,
            t_raman: 1e-9,
            raman_detuning_linewidths: 1e4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ElectronConfig {
    /// Initial packet width, m.
    pub sigma0: f64,
    /// Initial velocity along x, m/s.
    pub v0: f64,
    /// s.
    pub t_final: f64,
    /// Times at which lab-grid densities are written, s.
    pub snapshot_times: Vec<f64>,
    pub trap: TrapConfig,
    pub mathieu: MathieuConfig,
}

impl Default for ElectronConfig {
    fn default() -> Self {
        Self {
            sigma0: DEFAULT_SIGMA0,
            v0: DEFAULT_V0,
            t_final: DEFAULT_T_FINAL,
            snapshot_times: vec![1e-9, 2e-9, 3e-9],
            trap: TrapConfig::default(),
            mathieu: MathieuConfig::default(),
        }
    }
}

/// Ion trap drive for the stability report; the frequency is the trap's
/// `omega_rf`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MathieuConfig {
    /// V.
    pub v_rf: f64,
    /// m.
    pub r0: f64,
    pub a: f64,
    /// kg.
    pub ion_mass: f64,
    /// Multiples of `e`.
    pub ion_charge: f64,
}

impl Default for MathieuConfig {
    fn default() -> Self {
        Self { v_rf: 300.0, r0: 0.5e-3, a: 0.0, ion_mass: CA40_ION_MASS, ion_charge: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResourcesConfig {
    pub bits: u64,
    /// Human-readable duration such as `5months` or `5min`; a month is
    /// 30.44 days.
    pub wall_clock: String,
    pub n_qubits: u64,
    pub model: TimingModel,
}

impl Default for ResourcesConfig {
    fn default() -> Self {
        Self { bits: 640, wall_clock: "5months".into(), n_qubits: 10_000, model: TimingModel::default() }
    }
}

impl ResourcesConfig {
    pub fn wall_clock_seconds(&self) -> Result<f64> {
        parse_duration(&self.wall_clock).map_err(|e| CliError::Config(format!("resources.wall_clock: {e}")))
    }
}

pub fn parse_duration(text: &str) -> std::result::Result<f64, String> {
    humantime::parse_duration(text).map(|d| d.as_secs_f64()).map_err(|e| format!("cannot parse {text:?}: {e}"))
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(CliError::Config(format!("{field} must be positive, got {v}")))
    }
}

fn nonnegative(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(CliError::Config(format!("{field} must be nonnegative, got {v}")))
    }
}

fn prefixed(block: &str, r: iontrap_mbqc::Result<()>) -> Result<()> {
    r.map_err(|e| {
        let msg = match e {
            iontrap_mbqc::Error::Validation(m)
            | iontrap_mbqc::Error::InvalidArgument(m)
            | iontrap_mbqc::Error::Configuration(m) => m,
            other => other.to_string(),
        };
        CliError::Config(format!("{block}.{msg}"))
    })
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let l = &self.lattice;
        if l.rows == 0 || l.cols == 0 {
            return Err(CliError::Config(format!("lattice.rows and lattice.cols must be at least 1, got {}×{}", l.rows, l.cols)));
        }
        if l.n == 0 {
            return Err(CliError::Config("lattice.n must be at least 1".into()));
        }
        positive("lattice.d", l.d)?;
        nonnegative("schedule.t_gate", self.schedule.t_gate)?;
        nonnegative("schedule.t_shuttle", self.schedule.t_shuttle)?;

        let i = &self.ionize;
        positive("ionize.i_min", i.i_min)?;
        positive("ionize.i_max", i.i_max)?;
        if i.i_max < i.i_min {
            return Err(CliError::Config("ionize.i_max must not be below ionize.i_min".into()));
        }
        if i.points == 0 {
            return Err(CliError::Config("ionize.points must be at least 1".into()));
        }
        nonnegative("ionize.i_report", i.i_report)?;
        positive("ionize.window_nm[0]", i.window_nm[0])?;
        positive("ionize.window_nm[1]", i.window_nm[1])?;
        if i.window_nm[1] < i.window_nm[0] {
            return Err(CliError::Config("ionize.window_nm must be increasing".into()));
        }
        if i.max_photons == 0 {
            return Err(CliError::Config("ionize.max_photons must be at least 1".into()));
        }
        nonnegative("ionize.detuning_cut_cm", i.detuning_cut_cm)?;
        prefixed("ionize.rabi", i.rabi.validate())?;
        positive("ionize.t_quadrupole", i.t_quadrupole)?;
        positive("ionize.t_raman", i.t_raman)?;
        positive("ionize.raman_detuning_linewidths", i.raman_detuning_linewidths)?;

        let e = &self.electron;
        positive("electron.sigma0", e.sigma0)?;
        if !e.v0.is_finite() {
            return Err(CliError::Config(format!("electron.v0 must be finite, got {}", e.v0)));
        }
        positive("electron.t_final", e.t_final)?;
        for (k, &t) in e.snapshot_times.iter().enumerate() {
            nonnegative(&format!("electron.snapshot_times[{k}]"), t)?;
        }
        prefixed("electron.trap", e.trap.validate())?;
        let m = &e.mathieu;
        positive("electron.mathieu.r0", m.r0)?;
        positive("electron.mathieu.ion_mass", m.ion_mass)?;
        if !(m.v_rf.is_finite() && m.a.is_finite() && m.ion_charge.is_finite()) {
            return Err(CliError::Config("electron.mathieu values must be finite".into()));
        }

        let r = &self.resources;
        if r.bits == 0 {
            return Err(CliError::Config("resources.bits must be at least 1".into()));
        }
        positive("resources.wall_clock", r.wall_clock_seconds()?)?;
        prefixed("resources.model", r.model.validate())?;
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string() + &location(text, &e)))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Canonical TOML with every default spelled out.
    pub fn dump(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }
}

fn location(text: &str, e: &toml::de::Error) -> String {
    match e.span() {
        Some(span) => {
            let line = text[..span.start.min(text.len())].matches('\n').count() + 1;
            format!(" (line {line})")
        }
        None => String::new(),
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    RunConfig::from_toml(&text)
}
