//! Multiphoton-ionization readout: effective-operator rates, S/D
//! discrimination, resonance search and rotation-pulse irradiances.
//!
//! Rates are evaluated in atomic units. Irradiance enters through
//! [`AU_IRRADIANCE_W_CM2`] and rates leave through [`AU_TIME_S`]:
//!
//! ```text
//! N_S = Σ_λ 4π I⁴ J_λ² + 4π I² K²/L²
//! N_D = Σ_λ 4π I⁴ J_λ²
//! ```
//!
//! The amplitudes `J`, `K`, `L` are calibration inputs. The bundled set
//! ([`Calibration::bundled`]) puts `N_S(10⁹ W/cm²)` near `10^9.5 s⁻¹` with
//! `J_S/J_D = 40` on every channel.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Atomic unit of irradiance.
pub const AU_IRRADIANCE_W_CM2: f64 = 3.50945e16;
/// Atomic unit of time.
pub const AU_TIME_S: f64 = 2.4188843265857e-17;
/// Wavenumbers per electronvolt.
pub const CM_PER_EV: f64 = 8065.544;
/// `hc` in eV·nm.
pub const HC_EV_NM: f64 = 1239.84198;

pub const DEFAULT_DETUNING_CUT_CM: f64 = 100.0;

const LEVELS_JSON: &str = include_str!("../data/ca_ii_levels.json");
const CALIBRATION_JSON: &str = include_str!("../data/ionization_calibration.json");

pub fn photon_energy_ev(wavelength_nm: f64) -> f64 {
    HC_EV_NM / wavelength_nm
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub name: String,
    pub energy_ev: f64,
    /// `Γ/2π`; `None` where no value is bundled.
    pub linewidth_hz: Option<f64>,
    pub term: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelTable {
    pub species: String,
    pub levels: Vec<Level>,
    pub ionization_threshold_ev: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLevel {
    name: String,
    energy_cm: f64,
    linewidth_hz: Option<f64>,
    term: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTable {
    species: String,
    ionization_threshold_ev: f64,
    levels: Vec<RawLevel>,
}

impl LevelTable {
    pub fn new(species: impl Into<String>, levels: Vec<Level>, ionization_threshold_ev: f64) -> Result<Self> {
        let table = Self { species: species.into(), levels, ionization_threshold_ev };
        table.validate()?;
        Ok(table)
    }

    /// Table in the bundled file format, energies in cm⁻¹.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawTable = serde_json::from_str(text).map_err(|e| Error::Configuration(e.to_string()))?;
        let levels = raw
            .levels
            .into_iter()
            .map(|l| Level { name: l.name, energy_ev: l.energy_cm / CM_PER_EV, linewidth_hz: l.linewidth_hz, term: l.term })
            .collect();
        Self::new(raw.species, levels, raw.ionization_threshold_ev)
    }

    /// Ca⁺ levels up to 6P, NIST wavenumbers.
    pub fn bundled() -> Self {
        Self::from_json(LEVELS_JSON).expect("bundled level table is valid")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ionization_threshold_ev.is_finite() && self.ionization_threshold_ev > 0.0) {
            return Err(Error::Validation("ionization threshold must be positive".into()));
        }
        let mut names = BTreeSet::new();
        for l in &self.levels {
            if !names.insert(l.name.as_str()) {
                return Err(Error::Validation(format!("duplicate level name {}", l.name)));
            }
            if !(l.energy_ev.is_finite() && l.energy_ev >= 0.0 && l.energy_ev <= self.ionization_threshold_ev) {
                return Err(Error::Validation(format!(
                    "level {} at {} eV lies outside [0, threshold]",
                    l.name, l.energy_ev
                )));
            }
            if l.linewidth_hz.is_some_and(|g| !(g.is_finite() && g > 0.0)) {
                return Err(Error::Validation(format!("level {} has a nonpositive linewidth", l.name)));
            }
        }
        Ok(())
    }

    pub fn level(&self, name: &str) -> Option<&Level> {
        self.levels.iter().find(|l| l.name == name)
    }
}

/// Effective amplitudes for one initial state, atomic units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Amplitudes {
    pub j_channels: BTreeMap<String, f64>,
    #[serde(default)]
    pub k: f64,
    #[serde(default = "unit")]
    pub l: f64,
}

fn unit() -> f64 {
    1.0
}

impl Amplitudes {
    pub fn at(&self, irradiance_w_cm2: f64) -> RateInputs {
        RateInputs { irradiance_w_cm2, j_channels: self.j_channels.clone(), k: self.k, l: self.l }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Calibration {
    pub s_state: Amplitudes,
    pub d_state: Amplitudes,
}

impl Calibration {
    pub fn bundled() -> Self {
        serde_json::from_str(CALIBRATION_JSON).expect("bundled calibration is valid")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateInputs {
    pub irradiance_w_cm2: f64,
    pub j_channels: BTreeMap<String, f64>,
    pub k: f64,
    pub l: f64,
}

impl RateInputs {
    pub fn validate(&self) -> Result<()> {
        if !(self.irradiance_w_cm2.is_finite() && self.irradiance_w_cm2 >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "irradiance must be finite and nonnegative, got {}",
                self.irradiance_w_cm2
            )));
        }
        if let Some((name, _)) = self.j_channels.iter().find(|(_, j)| !j.is_finite()) {
            return Err(Error::InvalidArgument(format!("channel {name} amplitude is not finite")));
        }
        if !(self.k.is_finite() && self.l.is_finite()) {
            return Err(Error::InvalidArgument("resonant operators must be finite".into()));
        }
        if self.k != 0.0 && self.l == 0.0 {
            return Err(Error::SingularResonance);
        }
        Ok(())
    }

    pub fn irradiance_au(&self) -> f64 {
        self.irradiance_w_cm2 / AU_IRRADIANCE_W_CM2
    }
}

/// `Σ_λ 4π I⁴ J_λ²`, everything in atomic units.
pub fn nonresonant_rate_au<'a>(irradiance_au: f64, j_channels: impl IntoIterator<Item = &'a f64>) -> f64 {
    let i4 = irradiance_au.powi(4);
    j_channels.into_iter().map(|j| 4.0 * std::f64::consts::PI * i4 * j * j).sum()
}

/// `4π I² K²/L²` in atomic units; zero when `K = 0`.
pub fn resonant_rate_au(irradiance_au: f64, k: f64, l: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else {
        4.0 * std::f64::consts::PI * irradiance_au * irradiance_au * (k / l).powi(2)
    }
}

/// S-state ionization rate in s⁻¹.
pub fn rate_s(inputs: &RateInputs) -> Result<f64> {
    inputs.validate()?;
    let i = inputs.irradiance_au();
    Ok((nonresonant_rate_au(i, inputs.j_channels.values()) + resonant_rate_au(i, inputs.k, inputs.l)) / AU_TIME_S)
}

/// D-state (nonresonant) ionization rate in s⁻¹.
pub fn rate_d(irradiance_w_cm2: f64, j_channels: &BTreeMap<String, f64>) -> Result<f64> {
    let inputs = RateInputs { irradiance_w_cm2, j_channels: j_channels.clone(), k: 0.0, l: 1.0 };
    rate_s(&inputs)
}

/// `rate_s(s) / rate_d(d)` at a common irradiance.
pub fn discrimination_ratio(s_inputs: &RateInputs, d_inputs: &RateInputs) -> Result<f64> {
    if s_inputs.irradiance_w_cm2 != d_inputs.irradiance_w_cm2 {
        return Err(Error::InvalidArgument("S and D rates must be compared at the same irradiance".into()));
    }
    let s = rate_s(s_inputs)?;
    let d = rate_d(d_inputs.irradiance_w_cm2, &d_inputs.j_channels)?;
    if d == 0.0 {
        return Err(Error::UndefinedRatio);
    }
    Ok(s / d)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Resonance {
    pub level: String,
    pub photons: u32,
    /// Smallest `|m·E_photon − E_level|` over the window, cm⁻¹.
    pub detuning_cm: f64,
    /// Window wavelength where that minimum is reached.
    pub wavelength_nm: f64,
    /// Wavelength of exact resonance, possibly outside the window.
    pub exact_wavelength_nm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonanceScan {
    pub window_nm: [f64; 2],
    pub max_photons: u32,
    pub detuning_cut_cm: f64,
    pub resonances: Vec<Resonance>,
    /// Longest wavelength at which `max_photons` photons reach the threshold.
    pub threshold_wavelength_nm: f64,
    /// `max_photons` photons ionize at every wavelength of the window.
    pub ionizes_whole_window: bool,
    /// `max_photons` photons ionize at the short-wavelength edge.
    pub ionizes_somewhere: bool,
}

/// All `(level, m ≤ max_photons)` pairs whose detuning over `[λ_min, λ_max]`
/// falls below `detuning_cut_cm`. The ground level is skipped.
pub fn find_resonances(
    table: &LevelTable,
    window_nm: (f64, f64),
    max_photons: u32,
    detuning_cut_cm: f64,
) -> Result<ResonanceScan> {
    if table.levels.is_empty() {
        return Err(Error::Validation("level table is empty".into()));
    }
    table.validate()?;
    if max_photons == 0 {
        return Err(Error::InvalidArgument("max_photons must be at least 1".into()));
    }
    let (lo, hi) = window_nm;
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
        return Err(Error::InvalidArgument(format!("invalid wavelength window [{lo}, {hi}] nm")));
    }
    if !(detuning_cut_cm.is_finite() && detuning_cut_cm >= 0.0) {
        return Err(Error::InvalidArgument("detuning cut must be nonnegative".into()));
    }
    let mut resonances = Vec::new();
    for level in table.levels.iter().filter(|l| l.energy_ev > 0.0) {
        for m in 1..=max_photons {
            let exact = m as f64 * HC_EV_NM / level.energy_ev;
            let wavelength_nm = exact.clamp(lo, hi);
            let detuning_cm = (m as f64 * photon_energy_ev(wavelength_nm) - level.energy_ev).abs() * CM_PER_EV;
            if detuning_cm <= detuning_cut_cm {
                resonances.push(Resonance {
                    level: level.name.clone(),
                    photons: m,
                    detuning_cm,
                    wavelength_nm,
                    exact_wavelength_nm: exact,
                });
            }
        }
    }
    resonances.sort_by(|a, b| {
        a.photons
            .cmp(&b.photons)
            .then(a.exact_wavelength_nm.total_cmp(&b.exact_wavelength_nm))
            .then(a.level.cmp(&b.level))
    });
    let threshold_wavelength_nm = max_photons as f64 * HC_EV_NM / table.ionization_threshold_ev;
    Ok(ResonanceScan {
        window_nm: [lo, hi],
        max_photons,
        detuning_cut_cm,
        resonances,
        threshold_wavelength_nm,
        ionizes_whole_window: max_photons as f64 * photon_energy_ev(hi) > table.ionization_threshold_ev,
        ionizes_somewhere: max_photons as f64 * photon_energy_ev(lo) > table.ionization_threshold_ev,
    })
}

/// Reference quantities for single-qubit rotations on the S–D qubit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RabiReference {
    /// Quadrupole Rabi frequency `Ω/2π`.
    pub omega_ref_hz: f64,
    pub irradiance_ref_w_cm2: f64,
    /// Dipole linewidth `Γ` of the intermediate P level, rad/s.
    pub gamma_rad_s: f64,
    pub i_sat_w_cm2: f64,
}

impl RabiReference {
    /// 35.5 kHz at 6 W/cm² on the quadrupole line; 397 nm dipole line with
    /// `Γ = 2π · 21 MHz` and `I_sat = 47 mW/cm²`.
    pub fn calcium() -> Self {
        Self {
            omega_ref_hz: 35.5e3,
            irradiance_ref_w_cm2: 6.0,
            gamma_rad_s: 2.0 * std::f64::consts::PI * 21.0e6,
            i_sat_w_cm2: 0.047,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("omega_ref_hz", self.omega_ref_hz),
            ("irradiance_ref_w_cm2", self.irradiance_ref_w_cm2),
            ("gamma_rad_s", self.gamma_rad_s),
            ("i_sat_w_cm2", self.i_sat_w_cm2),
        ];
        match fields.iter().find(|(_, v)| !(v.is_finite() && *v > 0.0)) {
            Some((name, v)) => Err(Error::InvalidArgument(format!("{name} must be positive, got {v}"))),
            None => Ok(()),
        }
    }
}

fn check_pulse(t_pulse: f64) -> Result<()> {
    if t_pulse.is_finite() && t_pulse > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("pulse time must be positive, got {t_pulse}")))
    }
}

/// Irradiance for a quadrupole π pulse of length `t_pulse`:
/// `I_ref · (Ω_needed/Ω_ref)²` with `Ω_needed/2π = 1/(2t)`.
pub fn quadrupole_irradiance(reference: &RabiReference, t_pulse: f64) -> Result<f64> {
    reference.validate()?;
    check_pulse(t_pulse)?;
    let needed = 0.5 / t_pulse;
    Ok(reference.irradiance_ref_w_cm2 * (needed / reference.omega_ref_hz).powi(2))
}

/// Irradiance for a Raman π pulse detuned `detuning_linewidths · Γ` from
/// the P level. With `Ω = Γ√(I/2I_sat)` and `Ω_R = Ω²/2Δ`, the condition
/// `Ω_R t = π` gives `I = 4π I_sat Δ / (Γ² t)`.
pub fn raman_irradiance(reference: &RabiReference, detuning_linewidths: f64, t_pulse: f64) -> Result<f64> {
    reference.validate()?;
    check_pulse(t_pulse)?;
    if !(detuning_linewidths.is_finite() && detuning_linewidths > 0.0) {
        return Err(Error::InvalidArgument(format!("detuning must be positive, got {detuning_linewidths}")));
    }
    let delta = detuning_linewidths * reference.gamma_rad_s;
    Ok(4.0 * std::f64::consts::PI * reference.i_sat_w_cm2 * delta / (reference.gamma_rad_s.powi(2) * t_pulse))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub irradiance_w_cm2: f64,
    pub rate_s: f64,
    pub rate_d: f64,
    pub ratio: f64,
}

/// `points` log-spaced irradiances from `i_min` to `i_max` inclusive.
pub fn sweep(calibration: &Calibration, i_min: f64, i_max: f64, points: usize) -> Result<Vec<SweepRow>> {
    if !(i_min > 0.0 && i_max >= i_min && i_max.is_finite()) || points == 0 {
        return Err(Error::InvalidArgument("sweep needs 0 < i_min ≤ i_max and at least one point".into()));
    }
    let (a, b) = (i_min.log10(), i_max.log10());
    (0..points)
        .map(|k| {
            let t = if points == 1 { 0.0 } else { k as f64 / (points - 1) as f64 };
            let i = 10f64.powf(a + t * (b - a));
            let s = calibration.s_state.at(i);
            let d = calibration.d_state.at(i);
            Ok(SweepRow {
                irradiance_w_cm2: i,
                rate_s: rate_s(&s)?,
                rate_d: rate_d(i, &d.j_channels)?,
                ratio: discrimination_ratio(&s, &d)?,
            })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("I,rate_S,rate_D,ratio\n");
    for r in rows {
        out.push_str(&format!("{:e},{:e},{:e},{:e}\n", r.irradiance_w_cm2, r.rate_s, r.rate_d, r.ratio));
    }
    out
}
