use num_complex::Complex64;

use super::fft2::{wavenumbers, Fft2};
use super::{axis_points, AxisFrame, Engine, Frame, TrapConfig, Wavepacket, MAX_SUBSTEP_PHASE};

/// Outer fraction of the window that is damped, and the per-step damping at
/// the very edge.
const WINDOW_EDGE_FRACTION: f64 = 0.1;
const WINDOW_DAMPING: f64 = 0.05;
/// Largest `ω · h` of one frame integrator step.
const FRAME_RK_PHASE: f64 = 1e-3;
/// Lab sample points per column for the absorption rates.
pub(super) const SUBPOINTS: usize = 8;
/// Accumulated relative flow into or out of a column after which its
/// sub-column survival is forgotten and the column is uniform again.
const SURVIVAL_RESET: f64 = 1e-3;

pub(super) struct ComovingEngine {
    fft: Fft2,
    sx: Vec<f64>,
    sy: Vec<f64>,
    kx: Vec<f64>,
    ky: Vec<f64>,
    window_x: Vec<f64>,
    window_y: Vec<f64>,
}

fn window_factors(s: &[f64], half_width: f64, enabled: bool) -> Vec<f64> {
    let inner = (1.0 - WINDOW_EDGE_FRACTION) * half_width;
    s.iter()
        .map(|&v| {
            let a = v.abs();
            if !enabled || a <= inner {
                1.0
            } else {
                let r = (a - inner) / (half_width - inner);
                (-WINDOW_DAMPING * r * r).exp()
            }
        })
        .collect()
}

impl ComovingEngine {
    pub(super) fn new(wp: &Wavepacket, config: &TrapConfig) -> Self {
        let Frame::Comoving { half_width, .. } = wp.frame else { unreachable!("frame checked by caller") };
        let (dsx, dsy) = (2.0 * half_width / wp.nx as f64, 2.0 * half_width / wp.ny as f64);
        let sx = axis_points(wp.nx, -half_width, dsx);
        let sy = axis_points(wp.ny, -half_width, dsy);
        let enabled = config.absorber.enabled;
        Self {
            fft: Fft2::new(wp.nx, wp.ny),
            window_x: window_factors(&sx, half_width, enabled),
            window_y: window_factors(&sy, half_width, enabled),
            kx: wavenumbers(wp.nx, dsx),
            ky: wavenumbers(wp.ny, dsy),
            sx,
            sy,
        }
    }
}

/// RK4 for `ü = −κ(t) u` applied to both fundamental solutions.
fn advance_axis(f: &mut AxisFrame, kappa: impl Fn(f64) -> f64, t: f64, dt: f64, rate: f64) {
    let n = ((rate * dt / FRAME_RK_PHASE).ceil() as usize).max(1);
    let h = dt / n as f64;
    let deriv = |t: f64, s: [f64; 4]| {
        let k = kappa(t);
        [s[1], -k * s[0], s[3], -k * s[2]]
    };
    let mut s = [f.u, f.du, f.w, f.dw];
    for i in 0..n {
        let t0 = t + i as f64 * h;
        let k1 = deriv(t0, s);
        let k2 = deriv(t0 + 0.5 * h, std::array::from_fn(|j| s[j] + 0.5 * h * k1[j]));
        let k3 = deriv(t0 + 0.5 * h, std::array::from_fn(|j| s[j] + 0.5 * h * k2[j]));
        let k4 = deriv(t0 + h, std::array::from_fn(|j| s[j] + h * k3[j]));
        s = std::array::from_fn(|j| s[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]));
    }
    [f.u, f.du, f.w, f.dw] = s;
}

/// Advances the unwrapped oscillator phase and returns its increment.
fn advance_phase(f: &mut AxisFrame, omega0: f64) -> f64 {
    let angle = (omega0 * f.w).atan2(f.u);
    let mut d = angle - f.angle;
    d -= std::f64::consts::TAU * (d / std::f64::consts::TAU).round();
    f.angle = angle;
    f.theta += d;
    d
}

fn phases(values: &[f64], coefficient: f64) -> Vec<Complex64> {
    values.iter().map(|&v| Complex64::from_polar(1.0, -coefficient * v * v)).collect()
}

fn scale_separable(field: &mut [Complex64], nx: usize, fx: &[Complex64], fy: &[Complex64]) {
    for (row, py) in field.chunks_exact_mut(nx).zip(fy) {
        for (a, px) in row.iter_mut().zip(fx) {
            *a *= px * py;
        }
    }
}

impl Engine for ComovingEngine {
    fn step(&mut self, wp: &mut Wavepacket, config: &TrapConfig, dt: f64) {
        let omega0 = wp.omega0();
        let Frame::Comoving { x, y, .. } = &mut wp.frame else { unreachable!("frame checked by caller") };
        let w2 = config.omega_e * config.omega_e;
        let rate = config.omega_e.max(if config.static_mode { 0.0 } else { config.omega_rf });
        advance_axis(x, |t| -w2 * config.drive(t), wp.t, dt, rate);
        advance_axis(y, |t| w2 * config.drive(t), wp.t, dt, rate);
        let (dx, dy) = (advance_phase(x, omega0), advance_phase(y, omega0));

        // i ∂_θ φ = (−∂_s² + s²/4) φ per axis
        let n = ((dx.abs().max(dy.abs()) / MAX_SUBSTEP_PHASE).ceil() as usize).max(1);
        let (hx, hy) = (dx / n as f64, dy / n as f64);
        let half_x = phases(&self.sx, hx / 8.0);
        let half_y = phases(&self.sy, hy / 8.0);
        let full_x = phases(&self.sx, hx / 4.0);
        let full_y = phases(&self.sy, hy / 4.0);
        let kin_x = phases(&self.kx, hx);
        let kin_y = phases(&self.ky, hy);
        scale_separable(&mut wp.amplitudes, wp.nx, &half_x, &half_y);
        for i in 0..n {
            self.fft.apply_separable(&mut wp.amplitudes, &kin_x, &kin_y);
            if i + 1 < n {
                scale_separable(&mut wp.amplitudes, wp.nx, &full_x, &full_y);
            }
        }
        scale_separable(&mut wp.amplitudes, wp.nx, &half_x, &half_y);
    }

    /// Each column stands for a lab strip of width `L σ₀ Δs`, which grows
    /// far wider than the detector ramps. Absorption is therefore tracked at
    /// several lab points per strip: while `φ` is frozen each point keeps its
    /// own survival, so a strip straddling a slab edge loses only the part
    /// the slab has swept over. Once enough weight has flowed in or out the
    /// column is treated as uniform again.
    fn apply_masks(&mut self, wp: &mut Wavepacket, config: &TrapConfig, dt: f64) {
        let (xs, ys) = wp.lab_axes(config);
        let strip = if wp.nx > 1 { xs[1] - xs[0] } else { 0.0 };
        let nx = wp.nx;
        let model = &config.detector_model;
        let mut weight = vec![0.0; nx];
        for row in wp.amplitudes.chunks_exact(nx) {
            for (w, a) in weight.iter_mut().zip(row) {
                *w += a.norm_sqr();
            }
        }

        let mut col_scale = vec![1.0; nx];
        for i in 0..nx {
            let expected = wp.expected_weight[i];
            if expected > 0.0 {
                wp.inflow[i] += (weight[i] - expected) / expected;
            }
            let survival = &mut wp.survival[i * SUBPOINTS..(i + 1) * SUBPOINTS];
            if expected <= 0.0 || wp.inflow[i].abs() > SURVIVAL_RESET {
                survival.fill(1.0);
                wp.inflow[i] = 0.0;
            }
            if weight[i] <= 0.0 {
                continue;
            }
            let before: f64 = survival.iter().sum();
            if before <= 0.0 {
                col_scale[i] = 0.0;
                continue;
            }
            let mut after = 0.0;
            for (m, s) in survival.iter_mut().enumerate() {
                let x = xs[i] + strip * ((m as f64 + 0.5) / SUBPOINTS as f64 - 0.5);
                let mut kept = config.boundary_factor(x, config.grid.extent_x, dt);
                if let Some((k, d)) = config.detectors.iter().enumerate().find(|(_, d)| d.contains(x)) {
                    let absorbed = -(-d.rate(x, model) * dt).exp_m1();
                    wp.captured[k] += weight[i] * *s * absorbed / before;
                    kept *= 1.0 - absorbed;
                }
                *s *= kept;
                after += *s;
            }
            col_scale[i] = (after / before).sqrt();
        }

        let bx: Vec<f64> = self.window_x.iter().zip(&col_scale).map(|(w, c)| c * w).collect();
        let by: Vec<f64> = ys
            .iter()
            .zip(&self.window_y)
            .map(|(&y, w)| w * config.boundary_factor(y, config.grid.extent_y, dt).sqrt())
            .collect();
        wp.expected_weight.fill(0.0);
        for (row, fy) in wp.amplitudes.chunks_exact_mut(nx).zip(&by) {
            for ((a, fx), w) in row.iter_mut().zip(&bx).zip(wp.expected_weight.iter_mut()) {
                *a *= fx * fy;
                *w += a.norm_sqr();
            }
        }
    }
}
