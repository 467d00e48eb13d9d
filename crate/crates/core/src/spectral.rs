//! Periodic 2D Fourier transforms and spectral derivative operators.
//!
//! All transforms run single-threaded on a fixed plan, so repeated
//! evaluation of the same input is bit-for-bit reproducible.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::field::Grid;

/// Forward/inverse complex FFT pair over a `ny x nx` row-major lattice.
pub struct Spectral2d {
    nx: usize,
    ny: usize,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
    kx: Vec<f64>,
    ky: Vec<f64>,
    // first-derivative multipliers with the Nyquist entry zeroed
    dkx: Vec<f64>,
    dky: Vec<f64>,
    keep_x: Vec<bool>,
    keep_y: Vec<bool>,
    scratch: Vec<Complex64>,
}

/// Integer wave index of FFT bin `i` for an even transform length `n`.
fn wave_index(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

impl Spectral2d {
    pub fn new(grid: &Grid) -> Self {
        let (nx, ny) = (grid.nx(), grid.ny());
        let mut planner = FftPlanner::new();
        let fwd_x = planner.plan_fft_forward(nx);
        let inv_x = planner.plan_fft_inverse(nx);
        let fwd_y = planner.plan_fft_forward(ny);
        let inv_y = planner.plan_fft_inverse(ny);

        let base_x = 2.0 * std::f64::consts::PI / grid.lx();
        let base_y = 2.0 * std::f64::consts::PI / grid.ly();
        let kx: Vec<f64> = (0..nx).map(|i| base_x * wave_index(i, nx) as f64).collect();
        let ky: Vec<f64> = (0..ny).map(|j| base_y * wave_index(j, ny) as f64).collect();
        let mut dkx = kx.clone();
        dkx[nx / 2] = 0.0;
        let mut dky = ky.clone();
        dky[ny / 2] = 0.0;

        // 2/3 rule: retain |m| < n/3 so quadratic products alias only into discarded bins
        let keep_x = (0..nx)
            .map(|i| (wave_index(i, nx).unsigned_abs() as f64) < nx as f64 / 3.0)
            .collect();
        let keep_y = (0..ny)
            .map(|j| (wave_index(j, ny).unsigned_abs() as f64) < ny as f64 / 3.0)
            .collect();

        Self {
            nx,
            ny,
            fwd_x,
            inv_x,
            fwd_y,
            inv_y,
            kx,
            ky,
            dkx,
            dky,
            keep_x,
            keep_y,
            scratch: vec![Complex64::new(0.0, 0.0); nx * ny],
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Physical wavenumbers along x, in FFT bin order.
    pub fn kx(&self) -> &[f64] {
        &self.kx
    }

    pub fn ky(&self) -> &[f64] {
        &self.ky
    }

    /// |k|^2 at bin (i, j).
    #[inline]
    pub fn k2(&self, i: usize, j: usize) -> f64 {
        self.kx[i] * self.kx[i] + self.ky[j] * self.ky[j]
    }

    fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
        for r in 0..rows {
            for c in 0..cols {
                dst[c * rows + r] = src[r * cols + c];
            }
        }
    }

    fn transform(&mut self, data: &mut [Complex64], forward: bool) {
        assert_eq!(data.len(), self.len(), "spectral buffer size mismatch");
        let (row_fft, col_fft) = if forward {
            (self.fwd_x.clone(), self.fwd_y.clone())
        } else {
            (self.inv_x.clone(), self.inv_y.clone())
        };
        // rows are contiguous: rustfft processes every nx-chunk in one call
        row_fft.process(data);
        Self::transpose(data, &mut self.scratch, self.ny, self.nx);
        col_fft.process(&mut self.scratch);
        Self::transpose(&self.scratch, data, self.nx, self.ny);
    }

    /// Unnormalised forward transform of a real nodal array.
    pub fn forward(&mut self, real: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = real.iter().map(|&r| Complex64::new(r, 0.0)).collect();
        self.transform(&mut buf, true);
        buf
    }

    /// Inverse transform (normalised), keeping the real part.
    pub fn inverse(&mut self, spec: &[Complex64]) -> Vec<f64> {
        let mut buf = spec.to_vec();
        self.transform(&mut buf, false);
        let scale = 1.0 / self.len() as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }

    /// Multiply by `i k_x` (Nyquist column dropped).
    pub fn ddx(&self, spec: &[Complex64]) -> Vec<Complex64> {
        let nx = self.nx;
        spec.iter()
            .enumerate()
            .map(|(idx, c)| c * Complex64::new(0.0, self.dkx[idx % nx]))
            .collect()
    }

    /// Multiply by `i k_y` (Nyquist row dropped).
    pub fn ddy(&self, spec: &[Complex64]) -> Vec<Complex64> {
        let nx = self.nx;
        spec.iter()
            .enumerate()
            .map(|(idx, c)| c * Complex64::new(0.0, self.dky[idx / nx]))
            .collect()
    }

    /// Zero every bin outside the 2/3-rule retained band.
    pub fn dealias(&self, spec: &mut [Complex64]) {
        let nx = self.nx;
        for (idx, c) in spec.iter_mut().enumerate() {
            if !(self.keep_x[idx % nx] && self.keep_y[idx / nx]) {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// Nodal x-derivative of a real periodic array.
    pub fn derivative_x(&mut self, real: &[f64]) -> Vec<f64> {
        let spec = self.forward(real);
        self.inverse(&self.ddx(&spec))
    }

    pub fn derivative_y(&mut self, real: &[f64]) -> Vec<f64> {
        let spec = self.forward(real);
        self.inverse(&self.ddy(&spec))
    }
}
