//! Photoelectron guiding in the trap's saddle potential.
//!
//! The electron sees `V = (m_e ω_e²/2)(y² − x²) · c(t)` with `c = 1` in
//! static mode and `c = cos(ω_rf t)` when driven: anti-trapped along x,
//! trapped along y. Detectors are slabs `|x − x_c| ≤ w/2` spanning the full
//! y range. Inside a slab `|ψ|²` decays at a rate that rises quadratically
//! from zero at the slab edges to a plateau ([`DetectorModel`]); the
//! removed probability is the detector's count. A smooth ramp absorbs
//! without reflection once it spans many wavelengths, whereas masking the
//! slab to zero every step reflects a slow packet almost completely.
//!
//! # Steppers
//!
//! [`Stepper::Comoving`] (the default) propagates in a frame that follows
//! the packet's centre and scales with its width. The potential is
//! quadratic, so with `ü = −κ(t) u` per axis (`κ_x = −ω_e² c`,
//! `κ_y = +ω_e² c`) and fundamental solutions `u(0) = 1, u̇(0) = 0` and
//! `w(0) = 0, ẇ(0) = 1`,
//!
//! ```text
//! ψ(x, t) = L^{-1/2} e^{iS(x,t)} φ((x − X)/L, τ)
//! L² = u² + Ω₀² w²,   Ω₀ = ħ / (2 m_e σ₀²),   X = v₀ w,   dτ/dt = 1/L²
//! ```
//!
//! is exact, and `φ` obeys a harmonic oscillator of frequency `Ω₀` in `τ`
//! for which the initial Gaussian is stationary. `φ` is advanced with a
//! Strang split-operator FFT step; detector and boundary masks act on
//! `|ψ|²` through the lab position `X + Lξ` of each grid column. This keeps
//! the 16 nm packet resolved while its lab-frame size grows to hundreds of
//! micrometres, which a fixed grid over the 80 μm domain cannot do.
//!
//! [`Stepper::Lab`] is a plain split-operator FFT on the lab grid. It only
//! accepts configurations whose grid resolves the packet and serves as an
//! independent check of the co-moving stepper.

mod comoving;
mod fft2;
mod lab;
mod mathieu;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use mathieu::{
    electron_timescale, first_zone_boundary, mathieu_q, mathieu_stable, mathieu_trace, q_ratio, MathieuParams,
    QRatio, Timescale, QUOTED_TIMESCALE_S,
};

pub const HBAR: f64 = 1.054571817e-34;
pub const ELECTRON_MASS: f64 = 9.1093837015e-31;
pub const ELEMENTARY_CHARGE: f64 = 1.602176634e-19;
pub const ATOMIC_MASS_UNIT: f64 = 1.66053906660e-27;
/// ⁴⁰Ca⁺: neutral atomic mass minus one electron.
pub const CA40_ION_MASS: f64 = 39.962590863 * ATOMIC_MASS_UNIT - ELECTRON_MASS;

pub const DEFAULT_OMEGA_E: f64 = 2.0e9;
pub const DEFAULT_SIGMA0: f64 = 16.0e-9;
pub const DEFAULT_V0: f64 = 7.0e3;
pub const DEFAULT_T_FINAL: f64 = 3.0e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Detector {
    pub center_x: f64,
    pub width: f64,
}

impl Detector {
    pub fn contains(&self, x: f64) -> bool {
        (x - self.center_x).abs() <= 0.5 * self.width
    }

    /// Absorption rate at `x`, s⁻¹.
    pub fn rate(&self, x: f64, model: &DetectorModel) -> f64 {
        let depth = 0.5 * self.width - (x - self.center_x).abs();
        if depth < 0.0 {
            return 0.0;
        }
        let ramp = model.ramp_fraction * self.width;
        let r = if ramp > 0.0 { (depth / ramp).min(1.0) } else { 1.0 };
        model.rate * r * r
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorModel {
    /// Plateau absorption rate, s⁻¹.
    pub rate: f64,
    /// Ramp length as a fraction of the slab width.
    pub ramp_fraction: f64,
}

impl Default for DetectorModel {
    fn default() -> Self {
        Self { rate: 2.0e12, ramp_fraction: 0.25 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub extent_x: f64,
    pub extent_y: f64,
    pub points_x: usize,
    pub points_y: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { extent_x: 80e-6, extent_y: 40e-6, points_x: 512, points_y: 256 }
    }
}

/// Boundary layer of the lab domain. Inside it `|ψ|²` decays at rate
/// `strength · r²`, `r` the depth fraction; beyond the domain everything is
/// removed. Disabling also switches off the
/// co-moving window's edge layer, which makes the run strictly unitary.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AbsorberConfig {
    pub enabled: bool,
    pub width_fraction: f64,
    /// s⁻¹.
    pub strength: f64,
}

impl Default for AbsorberConfig {
    fn default() -> Self {
        Self { enabled: true, width_fraction: 0.1, strength: 2.0e12 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stepper {
    #[default]
    Comoving,
    Lab,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrapConfig {
    /// rad/s.
    pub omega_e: f64,
    /// rad/s.
    pub omega_rf: f64,
    pub static_mode: bool,
    pub detectors: Vec<Detector>,
    pub detector_model: DetectorModel,
    pub grid: GridConfig,
    pub dt: f64,
    pub absorber: AbsorberConfig,
    pub stepper: Stepper,
    /// Half width of the co-moving window in units of σ₀.
    pub frame_half_width: f64,
    /// Trace sampling interval, s.
    pub sample_interval: f64,
}

impl Default for TrapConfig {
    fn default() -> Self {
        Self {
            omega_e: DEFAULT_OMEGA_E,
            omega_rf: 2.0 * std::f64::consts::PI * 25.0e6,
            static_mode: true,
            detectors: vec![Detector { center_x: 30e-6, width: 20e-6 }, Detector { center_x: -30e-6, width: 20e-6 }],
            detector_model: DetectorModel::default(),
            grid: GridConfig::default(),
            dt: 1.0e-13,
            absorber: AbsorberConfig::default(),
            stepper: Stepper::Comoving,
            frame_half_width: 8.0,
            sample_interval: 1.0e-11,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Validation(format!("{name} must be positive, got {v}")))
    }
}

/// Largest oscillator phase advanced per Strang sub-step.
const MAX_SUBSTEP_PHASE: f64 = 2.0e-3;
/// Largest `ω · dt` for the frame integrator.
const MAX_FRAME_PHASE: f64 = 0.05;

impl TrapConfig {
    /// Static checks that do not depend on the packet.
    pub fn validate(&self) -> Result<()> {
        if !(self.omega_e.is_finite() && self.omega_e >= 0.0) {
            return Err(Error::Validation(format!("omega_e must be nonnegative, got {}", self.omega_e)));
        }
        if !self.static_mode {
            positive("omega_rf", self.omega_rf)?;
        }
        positive("dt", self.dt)?;
        positive("sample_interval", self.sample_interval)?;
        positive("grid.extent_x", self.grid.extent_x)?;
        positive("grid.extent_y", self.grid.extent_y)?;
        for (name, n) in [("grid.points_x", self.grid.points_x), ("grid.points_y", self.grid.points_y)] {
            if n < 4 || !n.is_power_of_two() {
                return Err(Error::Validation(format!("{name} must be a power of two ≥ 4, got {n}")));
            }
        }
        let a = &self.absorber;
        if !(0.0..0.5).contains(&a.width_fraction) {
            return Err(Error::Validation(format!(
                "absorber.width_fraction must lie in [0, 0.5), got {}",
                a.width_fraction
            )));
        }
        if !(a.strength.is_finite() && a.strength >= 0.0) {
            return Err(Error::Validation(format!("absorber.strength must be nonnegative, got {}", a.strength)));
        }
        if self.stepper == Stepper::Comoving && !(self.frame_half_width.is_finite() && self.frame_half_width >= 4.0) {
            return Err(Error::Validation(format!(
                "frame_half_width must be at least 4 σ₀, got {}",
                self.frame_half_width
            )));
        }
        let m = &self.detector_model;
        if !(m.rate.is_finite() && m.rate >= 0.0) {
            return Err(Error::Validation(format!("detector_model.rate must be nonnegative, got {}", m.rate)));
        }
        if !(0.0..=0.5).contains(&m.ramp_fraction) {
            return Err(Error::Validation(format!(
                "detector_model.ramp_fraction must lie in [0, 0.5], got {}",
                m.ramp_fraction
            )));
        }
        let half = 0.5 * self.grid.extent_x;
        for (k, d) in self.detectors.iter().enumerate() {
            positive(&format!("detectors[{k}].width"), d.width)?;
            if !d.center_x.is_finite() || (d.center_x.abs() + 0.5 * d.width) > half * (1.0 + 1e-12) {
                return Err(Error::Validation(format!("detector {k} extends outside the grid")));
            }
            for (j, e) in self.detectors[..k].iter().enumerate() {
                if (d.center_x - e.center_x).abs() < 0.5 * (d.width + e.width) {
                    return Err(Error::Validation(format!("detectors {j} and {k} overlap")));
                }
            }
        }
        let fastest = self.omega_e.max(if self.static_mode { 0.0 } else { self.omega_rf });
        if fastest * self.dt > MAX_FRAME_PHASE {
            return Err(Error::Configuration(format!(
                "dt = {} s is too coarse for frequency {fastest} rad/s",
                self.dt
            )));
        }
        Ok(())
    }

    /// Drive factor `c(t)`.
    pub fn drive(&self, t: f64) -> f64 {
        if self.static_mode {
            1.0
        } else {
            (self.omega_rf * t).cos()
        }
    }

    /// Per-step survival factor of `|ψ|²` in the lab boundary layer at `pos`
    /// along an axis of total length `extent`.
    fn boundary_factor(&self, pos: f64, extent: f64, dt: f64) -> f64 {
        if !self.absorber.enabled {
            return 1.0;
        }
        let half = 0.5 * extent;
        let layer = self.absorber.width_fraction * extent;
        let a = pos.abs();
        if a >= half {
            0.0
        } else if layer > 0.0 && a > half - layer {
            let r = (a - (half - layer)) / layer;
            (-self.absorber.strength * dt * r * r).exp()
        } else {
            1.0
        }
    }
}

/// `(m_e ω_e²/2)(y² − x²) · c(t)` in joules.
pub fn saddle_potential(config: &TrapConfig, x: f64, y: f64, t: f64) -> f64 {
    0.5 * ELECTRON_MASS * config.omega_e.powi(2) * (y * y - x * x) * config.drive(t)
}

/// `sinh(z)/z`, with a series near zero.
fn sinhc(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        1.0 + z * z / 6.0 + z.powi(4) / 120.0
    } else {
        z.sinh() / z
    }
}

/// Classical motion along the anti-trapped axis from the origin:
/// `x = (v₀/ω_e) sinh(ω_e t)`, `v = v₀ cosh(ω_e t)`.
pub fn classical_trajectory(config: &TrapConfig, v0: f64, t: f64) -> Result<(f64, f64)> {
    if !config.static_mode {
        return Err(Error::InvalidArgument("classical_trajectory requires static mode".into()));
    }
    let z = config.omega_e * t;
    Ok((v0 * t * sinhc(z), v0 * z.cosh()))
}

/// Frame state along one axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisFrame {
    pub u: f64,
    pub du: f64,
    pub w: f64,
    pub dw: f64,
    /// `Ω₀ τ`, unwrapped.
    pub theta: f64,
    angle: f64,
}

impl AxisFrame {
    fn initial() -> Self {
        Self { u: 1.0, du: 0.0, w: 0.0, dw: 1.0, theta: 0.0, angle: 0.0 }
    }

    /// Scale factor `L`.
    pub fn scale(&self, omega0: f64) -> f64 {
        (self.u * self.u + (omega0 * self.w).powi(2)).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Frame {
    /// Lab grid `x_i = −extent_x/2 + i·dx`.
    Lab { dx: f64, dy: f64 },
    /// Grid over `s = ξ/σ₀ ∈ [−W, W)`.
    Comoving { half_width: f64, x: AxisFrame, y: AxisFrame },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Wavepacket {
    /// Row-major, x contiguous: index `iy · nx + ix`. Discrete norm
    /// `Σ|a|²` is the remaining probability.
    pub amplitudes: Vec<Complex64>,
    pub nx: usize,
    pub ny: usize,
    pub sigma0: f64,
    pub v0: f64,
    pub t: f64,
    pub frame: Frame,
    pub captured: Vec<f64>,
    /// Co-moving only: survival of sub-column points since the column was
    /// last treated as uniform, and the column weight that implies.
    survival: Vec<f64>,
    expected_weight: Vec<f64>,
    /// Relative weight each column gained or lost to the flow of `φ` since
    /// its survival was last reset.
    inflow: Vec<f64>,
}

impl Wavepacket {
    /// Isotropic Gaussian of width `σ₀` at the origin moving along +x.
    pub fn gaussian(config: &TrapConfig, sigma0: f64, v0: f64) -> Result<Self> {
        config.validate()?;
        positive("sigma0", sigma0)?;
        if !v0.is_finite() {
            return Err(Error::Validation("v0 must be finite".into()));
        }
        let (nx, ny) = (config.grid.points_x, config.grid.points_y);
        let (frame, amplitudes) = match config.stepper {
            Stepper::Comoving => {
                let w = config.frame_half_width;
                let (sx, sy) = (axis_points(nx, -w, 2.0 * w / nx as f64), axis_points(ny, -w, 2.0 * w / ny as f64));
                let amps = outer(&sy, &sx, |y, x| Complex64::new((-(x * x + y * y) / 4.0).exp(), 0.0));
                (Frame::Comoving { half_width: w, x: AxisFrame::initial(), y: AxisFrame::initial() }, amps)
            }
            Stepper::Lab => {
                let (dx, dy) = (config.grid.extent_x / nx as f64, config.grid.extent_y / ny as f64);
                lab::check_resolution(config, sigma0, v0)?;
                let k0 = ELECTRON_MASS * v0 / HBAR;
                let xs = axis_points(nx, -0.5 * config.grid.extent_x, dx);
                let ys = axis_points(ny, -0.5 * config.grid.extent_y, dy);
                let amps = outer(&ys, &xs, |y, x| {
                    Complex64::from_polar((-(x * x + y * y) / (4.0 * sigma0 * sigma0)).exp(), k0 * x)
                });
                (Frame::Lab { dx, dy }, amps)
            }
        };
        let mut wp = Self {
            amplitudes,
            nx,
            ny,
            sigma0,
            v0,
            t: 0.0,
            frame,
            captured: vec![0.0; config.detectors.len()],
            survival: match config.stepper {
                Stepper::Comoving => vec![1.0; nx * comoving::SUBPOINTS],
                Stepper::Lab => Vec::new(),
            },
            expected_weight: vec![0.0; nx],
            inflow: vec![0.0; nx],
        };
        let n = wp.norm().sqrt();
        wp.amplitudes.iter_mut().for_each(|a| *a /= n);
        Ok(wp)
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `ħ / (2 m_e σ₀²)`.
    pub fn omega0(&self) -> f64 {
        HBAR / (2.0 * ELECTRON_MASS * self.sigma0 * self.sigma0)
    }

    /// Lab coordinates of the grid columns and rows.
    pub fn lab_axes(&self, config: &TrapConfig) -> (Vec<f64>, Vec<f64>) {
        match &self.frame {
            Frame::Lab { dx, dy } => (
                axis_points(self.nx, -0.5 * config.grid.extent_x, *dx),
                axis_points(self.ny, -0.5 * config.grid.extent_y, *dy),
            ),
            Frame::Comoving { half_width, x, y } => {
                let om = self.omega0();
                let (lx, ly) = (x.scale(om) * self.sigma0, y.scale(om) * self.sigma0);
                let cx = self.v0 * x.w;
                let sx = axis_points(self.nx, -half_width, 2.0 * half_width / self.nx as f64);
                let sy = axis_points(self.ny, -half_width, 2.0 * half_width / self.ny as f64);
                (sx.iter().map(|s| cx + lx * s).collect(), sy.iter().map(|s| ly * s).collect())
            }
        }
    }

    /// Mean and standard deviation along each axis of the remaining
    /// probability, lab coordinates.
    pub fn moments(&self, config: &TrapConfig) -> Moments {
        let (xs, ys) = self.lab_axes(config);
        let mut col = vec![0.0; self.nx];
        let mut row = vec![0.0; self.ny];
        for (iy, r) in self.amplitudes.chunks_exact(self.nx).enumerate() {
            for (ix, a) in r.iter().enumerate() {
                let p = a.norm_sqr();
                col[ix] += p;
                row[iy] += p;
            }
        }
        let stats = |w: &[f64], pos: &[f64]| {
            let total: f64 = w.iter().sum();
            if total <= 0.0 {
                return (0.0, 0.0);
            }
            let mean = w.iter().zip(pos).map(|(w, p)| w * p).sum::<f64>() / total;
            let var = w.iter().zip(pos).map(|(w, p)| w * (p - mean).powi(2)).sum::<f64>() / total;
            (mean, var.max(0.0).sqrt())
        };
        let (mean_x, sigma_x) = stats(&col, &xs);
        let (mean_y, sigma_y) = stats(&row, &ys);
        Moments { mean_x, mean_y, sigma_x, sigma_y }
    }

    /// `|ψ|²` binned onto the configured lab grid, probability per m².
    pub fn lab_density(&self, config: &TrapConfig) -> Vec<f64> {
        let g = &config.grid;
        let (dx, dy) = (g.extent_x / g.points_x as f64, g.extent_y / g.points_y as f64);
        let (xs, ys) = self.lab_axes(config);
        let mut out = vec![0.0; g.points_x * g.points_y];
        let bin = |v: f64, extent: f64, d: f64, n: usize| {
            let k = ((v + 0.5 * extent) / d + 0.5).floor();
            (k >= 0.0 && (k as usize) < n).then_some(k as usize)
        };
        for (iy, r) in self.amplitudes.chunks_exact(self.nx).enumerate() {
            let Some(by) = bin(ys[iy], g.extent_y, dy, g.points_y) else { continue };
            for (ix, a) in r.iter().enumerate() {
                if let Some(bx) = bin(xs[ix], g.extent_x, dx, g.points_x) {
                    out[by * g.points_x + bx] += a.norm_sqr();
                }
            }
        }
        out.iter_mut().for_each(|p| *p /= dx * dy);
        out
    }
}

pub(crate) fn axis_points(n: usize, start: f64, d: f64) -> Vec<f64> {
    (0..n).map(|i| start + i as f64 * d).collect()
}

fn outer<F: Fn(f64, f64) -> Complex64>(ys: &[f64], xs: &[f64], f: F) -> Vec<Complex64> {
    ys.iter().flat_map(|&y| xs.iter().map(move |&x| (x, y))).map(|(x, y)| f(y, x)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean_x: f64,
    pub mean_y: f64,
    pub sigma_x: f64,
    pub sigma_y: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub t: f64,
    pub captured: Vec<f64>,
    pub total_captured: f64,
    pub remaining_norm: f64,
    pub moments: Moments,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyTrace {
    pub samples: Vec<TraceSample>,
}

impl EfficiencyTrace {
    pub fn last(&self) -> Option<&TraceSample> {
        self.samples.last()
    }

    /// `t_ns, p_detector_1, …, p_total, norm_remaining`.
    pub fn to_csv(&self) -> String {
        let detectors = self.samples.first().map_or(0, |s| s.captured.len());
        let mut out = String::from("t_ns");
        for k in 1..=detectors {
            out.push_str(&format!(",p_detector_{k}"));
        }
        out.push_str(",p_total,norm_remaining\n");
        for s in &self.samples {
            out.push_str(&format!("{:.6}", s.t * 1e9));
            for p in &s.captured {
                out.push_str(&format!(",{p:.9e}"));
            }
            out.push_str(&format!(",{:.9e},{:.9e}\n", s.total_captured, s.remaining_norm));
        }
        out
    }
}

pub const SNAPSHOT_SCHEMA_VERSION: u32 = 1;

/// `|ψ|²` on the lab grid, row-major with x contiguous.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub schema_version: u32,
    pub t: f64,
    pub nx: usize,
    pub ny: usize,
    pub extent_x: f64,
    pub extent_y: f64,
    pub density: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Propagation {
    pub trace: EfficiencyTrace,
    pub state: Wavepacket,
    pub snapshots: Vec<Snapshot>,
}

fn sample(wp: &Wavepacket, config: &TrapConfig) -> TraceSample {
    TraceSample {
        t: wp.t,
        captured: wp.captured.clone(),
        total_captured: wp.captured.iter().sum(),
        remaining_norm: wp.norm(),
        moments: wp.moments(config),
    }
}

/// Advances `wp` to absolute time `t_final`.
pub fn propagate(wp: Wavepacket, config: &TrapConfig, t_final: f64) -> Result<(EfficiencyTrace, Wavepacket)> {
    let run = propagate_with_snapshots(wp, config, t_final, &[])?;
    Ok((run.trace, run.state))
}

/// As [`propagate`], also recording lab-grid densities at the first step
/// on or after each requested time.
pub fn propagate_with_snapshots(
    mut wp: Wavepacket,
    config: &TrapConfig,
    t_final: f64,
    snapshot_times: &[f64],
) -> Result<Propagation> {
    config.validate()?;
    if !(t_final.is_finite() && t_final > wp.t) {
        return Err(Error::InvalidArgument(format!("t_final must exceed the packet time {}", wp.t)));
    }
    if wp.captured.len() != config.detectors.len() {
        return Err(Error::Validation("packet was prepared for a different detector set".into()));
    }
    let frame_matches = matches!(
        (&wp.frame, config.stepper),
        (Frame::Lab { .. }, Stepper::Lab) | (Frame::Comoving { .. }, Stepper::Comoving)
    );
    if !frame_matches || (wp.nx, wp.ny) != (config.grid.points_x, config.grid.points_y) {
        return Err(Error::Configuration("packet grid does not match the configured stepper".into()));
    }
    let span = t_final - wp.t;
    let steps = ((span / config.dt) - 1e-9).ceil().max(1.0) as usize;
    let dt = span / steps as f64;
    let every = ((config.sample_interval / dt).round() as usize).max(1);
    let mut pending: Vec<f64> = snapshot_times.to_vec();
    pending.sort_by(f64::total_cmp);
    pending.reverse();

    let mut engine: Box<dyn Engine> = match config.stepper {
        Stepper::Comoving => Box::new(comoving::ComovingEngine::new(&wp, config)),
        Stepper::Lab => Box::new(lab::LabEngine::new(&wp, config)),
    };
    let mut trace = EfficiencyTrace { samples: vec![sample(&wp, config)] };
    let mut snapshots = Vec::new();
    let t0 = wp.t;
    for k in 1..=steps {
        engine.step(&mut wp, config, dt);
        wp.t = t0 + k as f64 * dt;
        engine.apply_masks(&mut wp, config, dt);
        if k % every == 0 || k == steps {
            trace.samples.push(sample(&wp, config));
        }
        while pending.last().is_some_and(|&ts| ts <= wp.t + 0.5 * dt) {
            pending.pop();
            snapshots.push(Snapshot {
                schema_version: SNAPSHOT_SCHEMA_VERSION,
                t: wp.t,
                nx: config.grid.points_x,
                ny: config.grid.points_y,
                extent_x: config.grid.extent_x,
                extent_y: config.grid.extent_y,
                density: wp.lab_density(config),
            });
        }
    }
    Ok(Propagation { trace, state: wp, snapshots })
}

trait Engine {
    /// Unitary evolution from `wp.t` to `wp.t + dt`.
    fn step(&mut self, wp: &mut Wavepacket, config: &TrapConfig, dt: f64);
    /// Detector capture and boundary absorption at the new time.
    fn apply_masks(&mut self, wp: &mut Wavepacket, config: &TrapConfig, dt: f64);
}
