use num_complex::Complex64;

use super::fft2::{wavenumbers, Fft2};
use super::{axis_points, Engine, TrapConfig, Wavepacket, ELECTRON_MASS, HBAR};
use crate::error::{Error, Result};

/// Rejects grids that cannot represent the packet: spacing above σ₀/2,
/// Nyquist below the largest expected wavenumber, or a potential phase
/// above one radian per step at the domain corner.
pub(super) fn check_resolution(config: &TrapConfig, sigma0: f64, v0: f64) -> Result<()> {
    let g = &config.grid;
    let (dx, dy) = (g.extent_x / g.points_x as f64, g.extent_y / g.points_y as f64);
    if dx.max(dy) > 0.5 * sigma0 {
        return Err(Error::Configuration(format!(
            "lab grid spacing {:.3e} m does not resolve σ₀ = {sigma0:.3e} m",
            dx.max(dy)
        )));
    }
    // x is anti-trapped, so speed grows with distance; a static trap
    // confines y and its momentum stays within the initial spread
    let spread = 3.0 / sigma0;
    let kx = ELECTRON_MASS * (v0.abs() + config.omega_e * 0.5 * g.extent_x) / HBAR + spread;
    let ky = if config.static_mode { spread } else { ELECTRON_MASS * config.omega_e * 0.5 * g.extent_y / HBAR + spread };
    let k_max = kx.max(ky);
    if kx * dx > 0.8 * std::f64::consts::PI || ky * dy > 0.8 * std::f64::consts::PI {
        return Err(Error::Configuration(format!(
            "expected wavenumber {k_max:.3e} m⁻¹ exceeds the lab grid Nyquist limit"
        )));
    }
    let r2 = 0.25 * (g.extent_x.powi(2) + g.extent_y.powi(2));
    let phase = 0.5 * ELECTRON_MASS * config.omega_e.powi(2) * r2 * config.dt / HBAR;
    if phase > 1.0 {
        return Err(Error::Configuration(format!("potential phase {phase:.2} rad per step is too large; reduce dt")));
    }
    Ok(())
}

pub(super) struct LabEngine {
    fft: Fft2,
    xs: Vec<f64>,
    ys: Vec<f64>,
    kx: Vec<f64>,
    ky: Vec<f64>,
    kinetic: Option<(f64, Vec<Complex64>, Vec<Complex64>)>,
}

impl LabEngine {
    pub(super) fn new(wp: &Wavepacket, config: &TrapConfig) -> Self {
        let g = &config.grid;
        let (dx, dy) = (g.extent_x / wp.nx as f64, g.extent_y / wp.ny as f64);
        Self {
            fft: Fft2::new(wp.nx, wp.ny),
            xs: axis_points(wp.nx, -0.5 * g.extent_x, dx),
            ys: axis_points(wp.ny, -0.5 * g.extent_y, dy),
            kx: wavenumbers(wp.nx, dx),
            ky: wavenumbers(wp.ny, dy),
            kinetic: None,
        }
    }
}

impl Engine for LabEngine {
    fn step(&mut self, wp: &mut Wavepacket, config: &TrapConfig, dt: f64) {
        if self.kinetic.as_ref().is_none_or(|(h, _, _)| *h != dt) {
            let c = HBAR * dt / (2.0 * ELECTRON_MASS);
            let table = |k: &[f64]| k.iter().map(|&k| Complex64::from_polar(1.0, -c * k * k)).collect();
            self.kinetic = Some((dt, table(&self.kx), table(&self.ky)));
        }
        // half potential step at the midpoint drive value
        let c = 0.25 * ELECTRON_MASS * config.omega_e.powi(2) * config.drive(wp.t + 0.5 * dt) * dt / HBAR;
        let px: Vec<Complex64> = self.xs.iter().map(|&x| Complex64::from_polar(1.0, c * x * x)).collect();
        let py: Vec<Complex64> = self.ys.iter().map(|&y| Complex64::from_polar(1.0, -c * y * y)).collect();
        let nx = wp.nx;
        let apply = |field: &mut [Complex64]| {
            for (row, fy) in field.chunks_exact_mut(nx).zip(&py) {
                for (a, fx) in row.iter_mut().zip(&px) {
                    *a *= fx * fy;
                }
            }
        };
        apply(&mut wp.amplitudes);
        let (_, kx, ky) = self.kinetic.as_ref().expect("set above");
        self.fft.apply_separable(&mut wp.amplitudes, kx, ky);
        apply(&mut wp.amplitudes);
    }

    fn apply_masks(&mut self, wp: &mut Wavepacket, config: &TrapConfig, dt: f64) {
        let nx = wp.nx;
        let model = &config.detector_model;
        // (detector, share of |ψ|² it absorbs this step)
        let hits: Vec<Option<(usize, f64)>> = self
            .xs
            .iter()
            .map(|&x| {
                config.detectors.iter().enumerate().find(|(_, d)| d.contains(x)).map(|(k, d)| (k, -(-d.rate(x, model) * dt).exp_m1()))
            })
            .collect();
        let bx: Vec<f64> = self
            .xs
            .iter()
            .zip(&hits)
            .map(|(&x, h)| {
                let kept = h.map_or(1.0, |(_, r)| 1.0 - r);
                (kept * config.boundary_factor(x, config.grid.extent_x, dt)).sqrt()
            })
            .collect();
        let by: Vec<f64> =
            self.ys.iter().map(|&y| config.boundary_factor(y, config.grid.extent_y, dt).sqrt()).collect();
        for (row, fy) in wp.amplitudes.chunks_exact_mut(nx).zip(&by) {
            for ((a, fx), h) in row.iter_mut().zip(&bx).zip(&hits) {
                if let Some((d, r)) = h {
                    wp.captured[*d] += r * a.norm_sqr();
                }
                *a *= fx * fy;
            }
        }
    }
}
