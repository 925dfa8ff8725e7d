use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Periodic box `[-L, L)` sampled at `nx` equispaced points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    nx: usize,
    half_length: f64,
}

impl Grid {
    pub fn new(nx: usize, half_length: f64) -> Result<Self> {
        if nx < 8 || !nx.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "nx must be a power of two >= 8, got {nx}"
            )));
        }
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half-length must be positive and finite, got {half_length}"
            )));
        }
        Ok(Self { nx, half_length })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    /// Half-length `L` of the box.
    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    /// Full period `2L`.
    pub fn length(&self) -> f64 {
        2.0 * self.half_length
    }

    pub fn dx(&self) -> f64 {
        self.length() / self.nx as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        -self.half_length + j as f64 * self.dx()
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.nx).map(|j| self.x(j)).collect()
    }

    /// Signed mode number of FFT slot `j`, in `-nx/2..nx/2`.
    pub fn mode(&self, j: usize) -> i64 {
        let n = self.nx as i64;
        let j = j as i64;
        if j < n / 2 {
            j
        } else {
            j - n
        }
    }

    /// FFT slot holding signed mode `k`.
    pub fn slot(&self, k: i64) -> usize {
        k.rem_euclid(self.nx as i64) as usize
    }

    /// Frequency `xi = pi k / L` of FFT slot `j`.
    pub fn xi(&self, j: usize) -> f64 {
        PI * self.mode(j) as f64 / self.half_length
    }

    /// Frequency lattice in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.nx).map(|j| self.xi(j)).collect()
    }

    pub fn frequency_spacing(&self) -> f64 {
        PI / self.half_length
    }

    pub fn nyquist_slot(&self) -> usize {
        self.nx / 2
    }

    /// Largest resolved |xi| (the Nyquist frequency).
    pub fn max_wavenumber(&self) -> f64 {
        PI * (self.nx / 2) as f64 / self.half_length
    }

    /// Largest mode number kept by the 2/3 rule.
    pub fn dealias_cutoff(&self) -> i64 {
        ((self.nx - 1) / 3) as i64
    }

    pub fn keeps_mode(&self, j: usize) -> bool {
        self.mode(j).abs() <= self.dealias_cutoff()
    }
}
