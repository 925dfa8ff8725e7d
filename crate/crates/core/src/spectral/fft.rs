use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::Grid;

type PlanPair = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

fn plans(n: usize) -> PlanPair {
    static CACHE: OnceLock<Mutex<HashMap<usize, PlanPair>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
        })
        .clone()
}

/// Plain unnormalised complex FFT of length `n`, shared plans.
#[derive(Clone)]
pub struct Fft1d {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Fft1d {
    pub fn new(n: usize) -> Self {
        let (fwd, inv) = plans(n);
        Self { fwd, inv }
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        self.fwd.process(buf);
    }

    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.inv.process(buf);
    }
}

/// Spatial Fourier transform on a [`Grid`].
///
/// Forward: `u_hat(xi_k) = dx * sum_j u_j exp(-i xi_k x_j)`, a Riemann sum for
/// the integral transform. Inverse: `u_j = 1/(2L) * sum_k u_hat_k exp(i xi_k x_j)`.
/// Parseval then reads `sum |u_j|^2 dx = 1/(2L) * sum |u_hat_k|^2`.
#[derive(Clone)]
pub struct Transform {
    grid: Grid,
    fft: Fft1d,
    // exp(i xi_k L) = (-1)^k, from x_0 = -L
    sign: Vec<f64>,
}

impl Transform {
    pub fn new(grid: Grid) -> Self {
        let sign = (0..grid.nx())
            .map(|j| if grid.mode(j).rem_euclid(2) == 0 { 1.0 } else { -1.0 })
            .collect();
        Self {
            grid,
            fft: Fft1d::new(grid.nx()),
            sign,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn forward_in_place(&self, buf: &mut [Complex64]) {
        self.fft.forward(buf);
        let dx = self.grid.dx();
        for (z, s) in buf.iter_mut().zip(&self.sign) {
            *z *= dx * s;
        }
    }

    pub fn inverse_in_place(&self, buf: &mut [Complex64]) {
        let w = 1.0 / self.grid.length();
        for (z, s) in buf.iter_mut().zip(&self.sign) {
            *z *= w * s;
        }
        self.fft.inverse(buf);
    }

    pub fn forward(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut buf = values.to_vec();
        self.forward_in_place(&mut buf);
        buf
    }

    pub fn forward_real(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.forward_in_place(&mut buf);
        buf
    }

    pub fn inverse(&self, spectrum: &[Complex64]) -> Vec<Complex64> {
        let mut buf = spectrum.to_vec();
        self.inverse_in_place(&mut buf);
        buf
    }

    /// Parseval weight of the spectral sum, `1/(2L)`.
    pub fn parseval_weight(&self) -> f64 {
        1.0 / self.grid.length()
    }
}

/// Zero every mode outside the 2/3-rule band, Nyquist included.
pub fn dealias(grid: &Grid, spectrum: &mut [Complex64]) {
    for (j, z) in spectrum.iter_mut().enumerate() {
        if !grid.keeps_mode(j) {
            *z = Complex64::new(0.0, 0.0);
        }
    }
}

pub fn zero_nyquist(grid: &Grid, spectrum: &mut [Complex64]) {
    spectrum[grid.nyquist_slot()] = Complex64::new(0.0, 0.0);
}

/// Replace a spectrum by its Hermitian part, `(z_k + conj(z_-k)) / 2`.
pub fn hermitian_part(grid: &Grid, spectrum: &mut [Complex64]) {
    let n = grid.nx();
    spectrum[0].im = 0.0;
    spectrum[n / 2].im = 0.0;
    for j in 1..n / 2 {
        let a = spectrum[j];
        let b = spectrum[n - j];
        let s = 0.5 * (a + b.conj());
        spectrum[j] = s;
        spectrum[n - j] = s.conj();
    }
}
