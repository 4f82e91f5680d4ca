use serde::{Deserialize, Serialize};

use super::{ELECTRON_MASS, ELEMENTARY_CHARGE};
use crate::error::{Error, Result};

/// Inputs of `ẍ + (a − 2q cos 2τ) x = 0`, `τ = ω_rf t / 2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MathieuParams {
    pub a: f64,
    /// Multiples of `e`.
    pub charge: f64,
    /// kg.
    pub mass: f64,
    /// V.
    pub v_rf: f64,
    /// m.
    pub r0: f64,
    /// rad/s.
    pub omega_rf: f64,
}

/// `q = 2 Q e V / (m r₀² ω²)`.
pub fn mathieu_q(p: &MathieuParams) -> Result<f64> {
    for (name, v) in [("mass", p.mass), ("r0", p.r0), ("omega_rf", p.omega_rf)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
        }
    }
    Ok(2.0 * p.charge * ELEMENTARY_CHARGE * p.v_rf / (p.mass * p.r0 * p.r0 * p.omega_rf * p.omega_rf))
}

/// `q(a) / q(b)` under the standard `Q/m` scaling and under a `√(Q/m)`
/// reading.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QRatio {
    pub standard: f64,
    pub sqrt_reading: f64,
}

pub fn q_ratio(a: &MathieuParams, b: &MathieuParams) -> Result<QRatio> {
    let standard = mathieu_q(a)? / mathieu_q(b)?;
    Ok(QRatio { standard, sqrt_reading: standard.abs().sqrt() })
}

/// Trace of the monodromy matrix over one period `π`.
pub fn mathieu_trace(a: f64, q: f64) -> f64 {
    let n = (400.0 * (a.abs() + 2.0 * q.abs()).sqrt().max(1.0)).ceil() as usize;
    let h = std::f64::consts::PI / n as f64;
    let deriv = |t: f64, s: [f64; 4]| {
        let k = a - 2.0 * q * (2.0 * t).cos();
        [s[1], -k * s[0], s[3], -k * s[2]]
    };
    let mut s = [1.0, 0.0, 0.0, 1.0];
    for i in 0..n {
        let t = i as f64 * h;
        let k1 = deriv(t, s);
        let k2 = deriv(t + 0.5 * h, std::array::from_fn(|j| s[j] + 0.5 * h * k1[j]));
        let k3 = deriv(t + 0.5 * h, std::array::from_fn(|j| s[j] + 0.5 * h * k2[j]));
        let k4 = deriv(t + h, std::array::from_fn(|j| s[j] + h * k3[j]));
        s = std::array::from_fn(|j| s[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]));
    }
    s[0] + s[3]
}

/// Bounded solutions iff `|tr M| ≤ 2`; overflow counts as unstable.
pub fn mathieu_stable(a: f64, q: f64) -> bool {
    let tr = mathieu_trace(a, q);
    tr.is_finite() && tr.abs() <= 2.0 + 1e-9
}

/// Smallest `q > 0` at which the motion turns unstable for fixed `a`, or
/// `None` when it is unstable already near `q = 0` or stays stable up to
/// `q = 10`.
pub fn first_zone_boundary(a: f64) -> Option<f64> {
    let step = 0.01;
    if !mathieu_stable(a, step) {
        return None;
    }
    let mut lo = step;
    let hi = loop {
        let next = lo + step;
        if next > 10.0 {
            return None;
        }
        if !mathieu_stable(a, next) {
            break next;
        }
        lo = next;
    };
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if mathieu_stable(a, mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

pub const QUOTED_TIMESCALE_S: f64 = 0.5e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timescale {
    /// `(1/ω_rf) √(m_e/m_ion)`.
    pub formula_s: f64,
    /// Reference value quoted for the same setting.
    pub quoted_s: f64,
}

pub fn electron_timescale(omega_rf: f64, m_ion: f64) -> Result<Timescale> {
    if !(omega_rf.is_finite() && omega_rf > 0.0 && m_ion.is_finite() && m_ion > 0.0) {
        return Err(Error::InvalidArgument("omega_rf and m_ion must be positive".into()));
    }
    Ok(Timescale { formula_s: (ELECTRON_MASS / m_ion).sqrt() / omega_rf, quoted_s: QUOTED_TIMESCALE_S })
}
