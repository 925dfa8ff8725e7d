use std::sync::OnceLock;

use num_complex::Complex64;

use super::fft::{hermitian_part, Transform};
use super::grid::Grid;
use crate::error::{Error, Result};

/// Common view of a state component in physical and spectral form.
pub trait SpectralField: Clone + Sized {
    /// Whether physical samples are constrained to be real.
    const IS_REAL: bool;

    fn grid(&self) -> &Grid;

    /// Spectral coefficients in FFT order.
    fn spectrum(&self) -> &[Complex64];

    /// Physical samples widened to complex.
    fn complex_values(&self) -> Vec<Complex64>;

    /// Re-synthesises a field of the same kind from spectral coefficients.
    fn from_spectrum(grid: Grid, spectrum: Vec<Complex64>) -> Self;

    fn is_finite(&self) -> bool;
}

/// Complex field `u`, physical samples with a lazily computed spectrum.
#[derive(Debug, Clone)]
pub struct ComplexField {
    grid: Grid,
    values: Vec<Complex64>,
    spectrum: OnceLock<Vec<Complex64>>,
}

impl ComplexField {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.nx() {
            return Err(Error::InvalidInput(format!(
                "expected {} samples, got {}",
                grid.nx(),
                values.len()
            )));
        }
        Ok(Self {
            grid,
            values,
            spectrum: OnceLock::new(),
        })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::new(grid, vec![Complex64::new(0.0, 0.0); grid.nx()]).unwrap()
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.positions().into_iter().map(f).collect();
        Self::new(grid, values).unwrap()
    }

    /// `exp(i xi_k x)` for signed lattice mode `k`.
    pub fn plane_wave(grid: Grid, mode: i64) -> Self {
        let xi = std::f64::consts::PI * mode as f64 / grid.half_length();
        Self::from_fn(grid, |x| Complex64::from_polar(1.0, xi * x))
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(self.grid, self.values.iter().map(|z| z * c).collect()).unwrap()
    }

    /// `|u(-L)| / max |u|`; zero fields report 0.
    pub fn boundary_ratio(&self) -> f64 {
        boundary_ratio(self.values.iter().map(|z| z.norm()))
    }
}

impl SpectralField for ComplexField {
    const IS_REAL: bool = false;

    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn spectrum(&self) -> &[Complex64] {
        self.spectrum
            .get_or_init(|| Transform::new(self.grid).forward(&self.values))
    }

    fn complex_values(&self) -> Vec<Complex64> {
        self.values.clone()
    }

    fn from_spectrum(grid: Grid, spectrum: Vec<Complex64>) -> Self {
        let values = Transform::new(grid).inverse(&spectrum);
        let cell = OnceLock::new();
        let _ = cell.set(spectrum);
        Self {
            grid,
            values,
            spectrum: cell,
        }
    }

    fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Real field `v` with Hermitian spectrum.
#[derive(Debug, Clone)]
pub struct RealField {
    grid: Grid,
    values: Vec<f64>,
    spectrum: OnceLock<Vec<Complex64>>,
}

impl RealField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.nx() {
            return Err(Error::InvalidInput(format!(
                "expected {} samples, got {}",
                grid.nx(),
                values.len()
            )));
        }
        Ok(Self {
            grid,
            values,
            spectrum: OnceLock::new(),
        })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::new(grid, vec![0.0; grid.nx()]).unwrap()
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.positions().into_iter().map(f).collect();
        Self::new(grid, values).unwrap()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::new(self.grid, self.values.iter().map(|x| x * c).collect()).unwrap()
    }

    pub fn boundary_ratio(&self) -> f64 {
        boundary_ratio(self.values.iter().map(|x| x.abs()))
    }

    /// Largest imaginary part produced by synthesising `spectrum` without projection.
    pub fn imaginary_residue(grid: Grid, spectrum: &[Complex64]) -> f64 {
        Transform::new(grid)
            .inverse(spectrum)
            .iter()
            .map(|z| z.im.abs())
            .fold(0.0, f64::max)
    }
}

impl SpectralField for RealField {
    const IS_REAL: bool = true;

    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn spectrum(&self) -> &[Complex64] {
        self.spectrum
            .get_or_init(|| Transform::new(self.grid).forward_real(&self.values))
    }

    fn complex_values(&self) -> Vec<Complex64> {
        self.values.iter().map(|&x| Complex64::new(x, 0.0)).collect()
    }

    fn from_spectrum(grid: Grid, mut spectrum: Vec<Complex64>) -> Self {
        hermitian_part(&grid, &mut spectrum);
        let values = Transform::new(grid)
            .inverse(&spectrum)
            .into_iter()
            .map(|z| z.re)
            .collect();
        let cell = OnceLock::new();
        let _ = cell.set(spectrum);
        Self {
            grid,
            values,
            spectrum: cell,
        }
    }

    fn is_finite(&self) -> bool {
        self.values.iter().all(|x| x.is_finite())
    }
}

fn boundary_ratio(mut magnitudes: impl Iterator<Item = f64>) -> f64 {
    let first = magnitudes.next().unwrap_or(0.0);
    let peak = magnitudes.fold(first, f64::max);
    if peak == 0.0 {
        0.0
    } else {
        first / peak
    }
}
