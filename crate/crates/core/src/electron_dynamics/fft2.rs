use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Batched 2D FFT on a row-major `ny × nx` field (x contiguous).
pub(crate) struct Fft2 {
    nx: usize,
    ny: usize,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    transposed: Vec<Complex64>,
}

impl Fft2 {
    pub(crate) fn new(nx: usize, ny: usize) -> Self {
        let mut planner = FftPlanner::new();
        let fwd_x = planner.plan_fft_forward(nx);
        let inv_x = planner.plan_fft_inverse(nx);
        let fwd_y = planner.plan_fft_forward(ny);
        let inv_y = planner.plan_fft_inverse(ny);
        let scratch_len = [&fwd_x, &inv_x, &fwd_y, &inv_y]
            .iter()
            .map(|f| f.get_inplace_scratch_len())
            .max()
            .unwrap_or(0);
        Self {
            nx,
            ny,
            fwd_x,
            inv_x,
            fwd_y,
            inv_y,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
            transposed: vec![Complex64::new(0.0, 0.0); nx * ny],
        }
    }

    fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
        const B: usize = 16;
        for r0 in (0..rows).step_by(B) {
            for c0 in (0..cols).step_by(B) {
                for r in r0..(r0 + B).min(rows) {
                    for c in c0..(c0 + B).min(cols) {
                        dst[c * rows + r] = src[r * cols + c];
                    }
                }
            }
        }
    }

    /// Forward transform, then `kinetic[iy * nx + ix]`-style multiplication
    /// by `kx[ix] * ky[iy]`, then the normalized inverse transform.
    pub(crate) fn apply_separable(&mut self, field: &mut [Complex64], kx: &[Complex64], ky: &[Complex64]) {
        let (nx, ny) = (self.nx, self.ny);
        self.fwd_x.process_with_scratch(field, &mut self.scratch);
        for row in field.chunks_exact_mut(nx) {
            for (a, f) in row.iter_mut().zip(kx) {
                *a *= f;
            }
        }
        self.inv_x.process_with_scratch(field, &mut self.scratch);

        Self::transpose(field, &mut self.transposed, ny, nx);
        self.fwd_y.process_with_scratch(&mut self.transposed, &mut self.scratch);
        for col in self.transposed.chunks_exact_mut(ny) {
            for (a, f) in col.iter_mut().zip(ky) {
                *a *= f;
            }
        }
        self.inv_y.process_with_scratch(&mut self.transposed, &mut self.scratch);
        Self::transpose(&self.transposed, field, nx, ny);

        let norm = 1.0 / (nx * ny) as f64;
        field.iter_mut().for_each(|a| *a *= norm);
    }
}

/// Angular wavenumbers of an `n`-point grid with spacing `d`, FFT order.
pub(crate) fn wavenumbers(n: usize, d: f64) -> Vec<f64> {
    let scale = 2.0 * std::f64::consts::PI / (n as f64 * d);
    (0..n)
        .map(|j| {
            let m = if j < n.div_ceil(2) { j as f64 } else { j as f64 - n as f64 };
            m * scale
        })
        .collect()
}
