use iontrap_mbqc::electron_dynamics::{
    electron_timescale, first_zone_boundary, mathieu_q, mathieu_stable, propagate_with_snapshots, q_ratio,
    MathieuParams, Timescale, Wavepacket, ELECTRON_MASS,
};
use iontrap_mbqc::graphstate::new_plus_state;
use iontrap_mbqc::ionization::{
    discrimination_ratio, find_resonances, quadrupole_irradiance, raman_irradiance, rate_d, rate_s, sweep,
    sweep_csv, LevelTable, ResonanceScan,
};
use iontrap_mbqc::lattice::{build_hex_array, decompose_sublattices, LayerAssignment};
use iontrap_mbqc::mbqc::{run_pattern, PatternDocument, PatternReport, PATTERN_SCHEMA_VERSION};
use iontrap_mbqc::resources::ResourceReport;
use iontrap_mbqc::scheduler::{build_schedule, LatticeParams, ScheduleReport};
use iontrap_mbqc::EdgeSet;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{Format, LatticeConfig, RunConfig};
use crate::error::{CliError, Result};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// One output file; the first artifact of a command is its main one.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

impl Artifact {
    fn new(name: impl Into<String>, contents: String) -> Self {
        Self { name: name.into(), contents }
    }

    fn json<T: Serialize>(name: impl Into<String>, value: &T) -> Result<Self> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Usage(e.to_string()))?;
        text.push('\n');
        Ok(Self::new(name, text))
    }
}

/// Artifacts plus an optional failure raised after they were produced.
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub failure: Option<CliError>,
}

impl From<Vec<Artifact>> for Outcome {
    fn from(artifacts: Vec<Artifact>) -> Self {
        Self { artifacts, failure: None }
    }
}

fn read(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn assignment(l: &LatticeConfig) -> Result<LayerAssignment> {
    let array = build_hex_array(l.rows, l.cols, l.d)?;
    Ok(decompose_sublattices(&array, l.n)?)
}

pub fn lattice(cfg: &RunConfig) -> Result<Outcome> {
    let asg = assignment(&cfg.lattice)?;
    Ok(vec![Artifact::json("lattice.json", &asg.report())?].into())
}

pub fn schedule(cfg: &RunConfig) -> Result<Outcome> {
    let l = &cfg.lattice;
    let asg = assignment(l)?;
    let s = build_schedule(&asg, l.periodic)?.with_timing(cfg.schedule.t_gate, cfg.schedule.t_shuttle)?;
    let params = LatticeParams { rows: l.rows, cols: l.cols, d: l.d, n: l.n, periodic: l.periodic };
    let json = Artifact::json("schedule.json", &ScheduleReport::new(&s, params, asg.len()))?;
    let csv = Artifact::new("schedule.csv", s.summary_csv());
    Ok(match cfg.schedule.format {
        Format::Json => vec![json, csv],
        Format::Csv => vec![csv, json],
    }
    .into())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub verified: bool,
    /// Every round is a matching and no edge is scheduled twice.
    pub well_formed: bool,
    pub site_count: usize,
    pub target_edges: usize,
    pub scheduled_edges: usize,
    pub missing_edges: Vec<[usize; 2]>,
    pub extra_edges: Vec<[usize; 2]>,
}

fn difference(a: &EdgeSet, b: &EdgeSet) -> Vec<[usize; 2]> {
    a.iter().filter(|&(x, y)| !b.contains(x, y)).map(|(x, y)| [x, y]).collect()
}

pub fn verify(cfg: &RunConfig) -> Result<Outcome> {
    let path = cfg
        .verify
        .schedule
        .as_ref()
        .ok_or_else(|| CliError::Usage("verify needs a schedule file (--schedule PATH)".into()))?;
    let report: ScheduleReport = serde_json::from_str(&read(path)?)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let p = &report.lattice;
    let asg = decompose_sublattices(&build_hex_array(p.rows, p.cols, p.d)?, p.n)?;
    if asg.len() != report.site_count {
        return Err(CliError::Config(format!(
            "schedule declares {} sites but its lattice has {}",
            report.site_count,
            asg.len()
        )));
    }
    let schedule = report.to_schedule()?;
    let target = asg.cluster_edges(p.periodic);
    let scheduled = schedule.all_edges();
    for (a, b) in scheduled.iter() {
        if b >= asg.len() {
            return Err(CliError::Config(format!("scheduled pair ({a}, {b}) references a missing site")));
        }
    }
    let verified = if asg.is_empty() {
        scheduled.is_empty()
    } else {
        let mut tableau = new_plus_state(asg.len())?;
        for round in &schedule.rounds {
            tableau.apply_edges(&round.pairs)?;
        }
        tableau.verify_cluster(&target)
    };
    let well_formed = schedule.is_well_formed();
    let out = VerifyReport {
        schema_version: REPORT_SCHEMA_VERSION,
        verified: verified && well_formed,
        well_formed,
        site_count: asg.len(),
        target_edges: target.len(),
        scheduled_edges: scheduled.len(),
        missing_edges: difference(&target, &scheduled),
        extra_edges: difference(&scheduled, &target),
    };
    let failure = (!out.verified).then(|| {
        CliError::Verification(format!(
            "{} missing and {} extra edges, well formed: {}",
            out.missing_edges.len(),
            out.extra_edges.len(),
            well_formed
        ))
    });
    Ok(Outcome { artifacts: vec![Artifact::json("verify.json", &out)?], failure })
}

pub fn mbqc(cfg: &RunConfig) -> Result<Outcome> {
    let path = cfg
        .mbqc
        .pattern
        .as_ref()
        .ok_or_else(|| CliError::Usage("mbqc needs a pattern file (--pattern PATH)".into()))?;
    let doc: PatternDocument = serde_json::from_str(&read(path)?)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if let Some(v) = doc.schema_version {
        if v != PATTERN_SCHEMA_VERSION {
            return Err(CliError::Config(format!("unsupported pattern schema_version {v}")));
        }
    }
    let input = doc.input.as_ref().map(|i| i.to_state());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let result = run_pattern(&doc.edges, input.as_ref(), &doc.pattern, &mut rng)?;
    Ok(vec![Artifact::json("mbqc.json", &PatternReport::new(&result))?].into())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IonizeReport {
    pub schema_version: u32,
    pub irradiance_w_cm2: f64,
    pub rate_s: f64,
    pub rate_d: f64,
    pub ratio: f64,
    pub scan: ResonanceScan,
    pub quadrupole_irradiance_w_cm2: f64,
    pub raman_irradiance_w_cm2: f64,
}

pub fn ionize(cfg: &RunConfig) -> Result<Outcome> {
    let c = &cfg.ionize;
    let table = match &c.levels {
        Some(path) => LevelTable::from_json(&read(path)?)?,
        None => LevelTable::bundled(),
    };
    let rows = sweep(&c.calibration, c.i_min, c.i_max, c.points)?;
    let s = c.calibration.s_state.at(c.i_report);
    let d = c.calibration.d_state.at(c.i_report);
    let (rs, rd) = (rate_s(&s)?, rate_d(c.i_report, &d.j_channels)?);
    let report = IonizeReport {
        schema_version: REPORT_SCHEMA_VERSION,
        irradiance_w_cm2: c.i_report,
        rate_s: rs,
        rate_d: rd,
        ratio: discrimination_ratio(&s, &d)?,
        scan: find_resonances(&table, (c.window_nm[0], c.window_nm[1]), c.max_photons, c.detuning_cut_cm)?,
        quadrupole_irradiance_w_cm2: quadrupole_irradiance(&c.rabi, c.t_quadrupole)?,
        raman_irradiance_w_cm2: raman_irradiance(&c.rabi, c.raman_detuning_linewidths, c.t_raman)?,
    };
    Ok(vec![Artifact::new("ionize_sweep.csv", sweep_csv(&rows)), Artifact::json("ionize_report.json", &report)?].into())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MathieuReport {
    pub q_ion: f64,
    pub q_electron: f64,
    pub ion_stable: bool,
    pub electron_stable: bool,
    /// `q_electron / q_ion`.
    pub q_ratio: f64,
    pub first_zone_boundary: Option<f64>,
    pub timescale: Timescale,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElectronSummary {
    pub schema_version: u32,
    pub sigma0: f64,
    pub v0: f64,
    pub t_final: f64,
    pub captured: Vec<f64>,
    pub total_captured: f64,
    pub remaining_norm: f64,
    pub snapshots: Vec<String>,
    pub mathieu: MathieuReport,
}

fn mathieu_report(cfg: &RunConfig) -> Result<MathieuReport> {
    let m = &cfg.electron.mathieu;
    let omega_rf = cfg.electron.trap.omega_rf;
    let ion = MathieuParams { a: m.a, charge: m.ion_charge, mass: m.ion_mass, v_rf: m.v_rf, r0: m.r0, omega_rf };
    let electron = MathieuParams { charge: -1.0, mass: ELECTRON_MASS, ..ion };
    let (q_ion, q_electron) = (mathieu_q(&ion)?, mathieu_q(&electron)?);
    Ok(MathieuReport {
        q_ion,
        q_electron,
        ion_stable: mathieu_stable(m.a, q_ion),
        electron_stable: mathieu_stable(m.a, q_electron),
        q_ratio: q_ratio(&electron, &ion)?.standard,
        first_zone_boundary: first_zone_boundary(m.a),
        timescale: electron_timescale(omega_rf, m.ion_mass)?,
    })
}

pub fn electron(cfg: &RunConfig) -> Result<Outcome> {
    let e = &cfg.electron;
    let wp = Wavepacket::gaussian(&e.trap, e.sigma0, e.v0)?;
    let run = propagate_with_snapshots(wp, &e.trap, e.t_final, &e.snapshot_times)?;
    let last = run.trace.last().expect("trace has the initial sample");
    let mut artifacts = vec![Artifact::new("electron_trace.csv", run.trace.to_csv())];
    let mut names = Vec::new();
    for (k, snap) in run.snapshots.iter().enumerate() {
        let name = format!("snapshots/snapshot_{k:03}.json");
        artifacts.push(Artifact::new(name.clone(), serde_json::to_string(snap).map_err(|e| CliError::Usage(e.to_string()))? + "\n"));
        names.push(name);
    }
    let summary = ElectronSummary {
        schema_version: REPORT_SCHEMA_VERSION,
        sigma0: e.sigma0,
        v0: e.v0,
        t_final: last.t,
        captured: last.captured.clone(),
        total_captured: last.total_captured,
        remaining_norm: last.remaining_norm,
        snapshots: names,
        mathieu: mathieu_report(cfg)?,
    };
    artifacts.insert(1, Artifact::json("electron_summary.json", &summary)?);
    Ok(artifacts.into())
}

pub fn resources(cfg: &RunConfig) -> Result<Outcome> {
    let r = &cfg.resources;
    let report = ResourceReport::new(&r.model, r.bits, r.wall_clock_seconds()?, r.n_qubits)?;
    Ok(vec![Artifact::json("resources.json", &report)?].into())
}

pub fn config(cfg: &RunConfig) -> Result<Outcome> {
    Ok(vec![Artifact::new("config.toml", cfg.dump()?)].into())
}
