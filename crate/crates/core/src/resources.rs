//! Operation counts, per-operation time budgets and storage-error estimates
//! for factoring with a measurement-based machine.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const OPS_PER_BITCUBE: u64 = 32;
pub const DAY_SECONDS: f64 = 86_400.0;
/// Calendar-average month of 30.44 days.
pub const MONTH_SECONDS: f64 = 30.44 * DAY_SECONDS;
pub const RESOURCE_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimingModel {
    pub ops_per_bitcube: u64,
    pub month_seconds: f64,
    /// Time per measurement, s.
    pub t_meas: f64,
    /// Storage coherence time, s.
    pub t_coh: f64,
}

impl Default for TimingModel {
    fn default() -> Self {
        Self { ops_per_bitcube: OPS_PER_BITCUBE, month_seconds: MONTH_SECONDS, t_meas: 3e-9, t_coh: 10.0 }
    }
}

impl TimingModel {
    pub fn validate(&self) -> Result<()> {
        if self.ops_per_bitcube == 0 {
            return Err(Error::Validation("ops_per_bitcube must be positive".into()));
        }
        for (name, v) in [("month_seconds", self.month_seconds), ("t_meas", self.t_meas), ("t_coh", self.t_coh)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Validation(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn op_count(&self, bits: u64) -> Result<u128> {
        if bits == 0 {
            return Err(Error::InvalidArgument("bits must be at least 1".into()));
        }
        let b = u128::from(bits);
        b.checked_mul(b)
            .and_then(|v| v.checked_mul(b))
            .and_then(|v| v.checked_mul(u128::from(self.ops_per_bitcube)))
            .ok_or_else(|| Error::InvalidArgument(format!("operation count for {bits} bits overflows")))
    }

    pub fn required_op_time(&self, bits: u64, wall_clock: f64) -> Result<f64> {
        if !(wall_clock.is_finite() && wall_clock > 0.0) {
            return Err(Error::InvalidArgument(format!("wall clock must be positive, got {wall_clock}")));
        }
        Ok(wall_clock / self.op_count(bits)? as f64)
    }

    pub fn storage_error(&self, n_qubits: u64) -> Result<f64> {
        storage_error(n_qubits, self.t_meas, self.t_coh)
    }
}

/// `32 · bits³`, exact.
pub fn shor_op_count(bits: u64) -> Result<u128> {
    TimingModel::default().op_count(bits)
}

/// Seconds available per operation to finish within `wall_clock` seconds.
pub fn required_op_time(bits: u64, wall_clock: f64) -> Result<f64> {
    TimingModel::default().required_op_time(bits, wall_clock)
}

/// Exposure of the last qubit while `n_qubits` are measured one after
/// another: `n · t_meas / T_coh`.
pub fn storage_error(n_qubits: u64, t_meas: f64, t_coh: f64) -> Result<f64> {
    if !(t_coh.is_finite() && t_coh > 0.0) {
        return Err(Error::InvalidArgument(format!("T_coh must be positive, got {t_coh}")));
    }
    if !(t_meas.is_finite() && t_meas >= 0.0) {
        return Err(Error::InvalidArgument(format!("t_meas must be nonnegative, got {t_meas}")));
    }
    Ok(n_qubits as f64 * t_meas / t_coh)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub schema_version: u32,
    pub bits: u64,
    pub op_count: u128,
    pub wall_clock_s: f64,
    pub required_op_time_s: f64,
    pub n_qubits: u64,
    pub t_meas_s: f64,
    pub t_coh_s: f64,
    pub storage_error: f64,
}

impl ResourceReport {
    pub fn new(model: &TimingModel, bits: u64, wall_clock: f64, n_qubits: u64) -> Result<Self> {
        model.validate()?;
        Ok(Self {
            schema_version: RESOURCE_SCHEMA_VERSION,
            bits,
            op_count: model.op_count(bits)?,
            wall_clock_s: wall_clock,
            required_op_time_s: model.required_op_time(bits, wall_clock)?,
            n_qubits,
            t_meas_s: model.t_meas,
            t_coh_s: model.t_coh,
            storage_error: model.storage_error(n_qubits)?,
        })
    }
}
