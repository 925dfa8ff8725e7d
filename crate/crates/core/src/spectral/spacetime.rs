use num_complex::Complex64;

use super::fft::{Fft1d, Transform};
use super::grid::Grid;
use super::norms::bracket;
use super::window::psi;
use crate::error::{Error, Result};

/// Zero-padding factor applied to the time axis before the temporal transform.
pub const TIME_PADDING: usize = 4;

/// Dispersion symbol `phi(xi)` of the group `exp(-i t phi(-i d/dx))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dispersion {
    /// `phi = xi^2`, the group `S(t)`.
    Schrodinger,
    /// `phi = -xi^2`, the conjugate space `X^-`.
    SchrodingerConjugate,
    /// `phi = -xi^3`, the group `W(t)`.
    Airy,
}

impl Dispersion {
    pub fn symbol(self, xi: f64) -> f64 {
        match self {
            Dispersion::Schrodinger => xi * xi,
            Dispersion::SchrodingerConjugate => -xi * xi,
            Dispersion::Airy => -xi * xi * xi,
        }
    }

    /// Odd symbols map real data to real data.
    pub fn preserves_real(self) -> bool {
        matches!(self, Dispersion::Airy)
    }
}

/// Indices of an `X_{s,b}(phi)` norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormSpec {
    pub s: f64,
    pub b: f64,
    pub dispersion: Dispersion,
}

impl NormSpec {
    pub fn new(s: f64, b: f64, dispersion: Dispersion) -> Self {
        Self { s, b, dispersion }
    }
}

/// A field sampled on `grid x {t0 + n dt : n < nt}`, stored time-major.
#[derive(Debug, Clone)]
pub struct SpaceTimeField {
    grid: Grid,
    t0: f64,
    dt: f64,
    nt: usize,
    values: Vec<Complex64>,
    window: Option<f64>,
}

impl SpaceTimeField {
    pub fn new(grid: Grid, t0: f64, dt: f64, nt: usize, values: Vec<Complex64>) -> Result<Self> {
        if nt < 8 || !nt.is_power_of_two() {
            return Err(Error::Resolution(format!(
                "nt must be a power of two >= 8, got {nt}"
            )));
        }
        if !(dt.is_finite() && dt > 0.0 && t0.is_finite()) {
            return Err(Error::InvalidInput(format!("bad time lattice t0={t0} dt={dt}")));
        }
        if values.len() != nt * grid.nx() {
            return Err(Error::InvalidInput(format!(
                "expected {} samples, got {}",
                nt * grid.nx(),
                values.len()
            )));
        }
        Ok(Self {
            grid,
            t0,
            dt,
            nt,
            values,
            window: None,
        })
    }

    pub fn zeros(grid: Grid, t0: f64, dt: f64, nt: usize) -> Result<Self> {
        Self::new(grid, t0, dt, nt, vec![Complex64::new(0.0, 0.0); nt * grid.nx()])
    }

    pub fn from_fn(
        grid: Grid,
        t0: f64,
        dt: f64,
        nt: usize,
        f: impl Fn(f64, f64) -> Complex64,
    ) -> Result<Self> {
        let xs = grid.positions();
        let mut values = Vec::with_capacity(nt * grid.nx());
        for n in 0..nt {
            let t = t0 + n as f64 * dt;
            values.extend(xs.iter().map(|&x| f(x, t)));
        }
        Self::new(grid, t0, dt, nt, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn time(&self, n: usize) -> f64 {
        self.t0 + n as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.nt).map(|n| self.time(n)).collect()
    }

    /// Scale `delta` of the last window applied, if any.
    pub fn window(&self) -> Option<f64> {
        self.window
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn slice(&self, n: usize) -> &[Complex64] {
        let nx = self.grid.nx();
        &self.values[n * nx..(n + 1) * nx]
    }

    pub fn slice_mut(&mut self, n: usize) -> &mut [Complex64] {
        let nx = self.grid.nx();
        &mut self.values[n * nx..(n + 1) * nx]
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|z| *z = f(*z));
        out
    }

    /// Same lattice, new samples.
    pub fn with_values(&self, values: Vec<Complex64>) -> Result<Self> {
        let mut out = Self::new(self.grid, self.t0, self.dt, self.nt, values)?;
        out.window = self.window;
        Ok(out)
    }

    /// Marks the field as windowed at scale `delta` without touching samples.
    pub fn with_window_tag(mut self, delta: Option<f64>) -> Self {
        self.window = delta;
        self
    }

    pub fn same_lattice(&self, other: &Self) -> bool {
        self.grid == other.grid
            && self.nt == other.nt
            && self.t0 == other.t0
            && self.dt == other.dt
    }

    /// Trapezoid quadrature of `|F|^2` over the space-time lattice.
    pub fn l2_norm(&self) -> f64 {
        let w = self.grid.dx() * self.dt;
        (self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * w).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Spatial spectra of every time slice, time-major.
    pub fn spatial_spectra(&self) -> Vec<Complex64> {
        let tr = Transform::new(self.grid);
        let mut out = self.values.clone();
        for chunk in out.chunks_mut(self.grid.nx()) {
            tr.forward_in_place(chunk);
        }
        out
    }

    /// Inverse of [`spatial_spectra`](Self::spatial_spectra).
    pub fn from_spatial_spectra(
        grid: Grid,
        t0: f64,
        dt: f64,
        nt: usize,
        mut spectra: Vec<Complex64>,
    ) -> Result<Self> {
        let tr = Transform::new(grid);
        for chunk in spectra.chunks_mut(grid.nx()) {
            tr.inverse_in_place(chunk);
        }
        Self::new(grid, t0, dt, nt, spectra)
    }

    /// Space-time spectrum `F_hat(xi_k, tau_m)` on the zero-padded time lattice,
    /// laid out `[k][m]`, together with the padded length.
    ///
    /// `tau_m = 2 pi m / (P dt)` in FFT order; Parseval weight is
    /// `1 / (2L P dt)`.
    pub fn spacetime_spectrum(&self, padding: usize) -> (Vec<Complex64>, usize) {
        let nx = self.grid.nx();
        let p = (self.nt * padding.max(1)).next_power_of_two();
        let spectra = self.spatial_spectra();
        let fft = Fft1d::new(p);
        let mut out = vec![Complex64::new(0.0, 0.0); nx * p];
        for k in 0..nx {
            let row = &mut out[k * p..(k + 1) * p];
            for n in 0..self.nt {
                row[n] = spectra[n * nx + k] * self.dt;
            }
            fft.forward(row);
            for (m, z) in row.iter_mut().enumerate() {
                let tau = tau_of(m, p, self.dt);
                *z *= Complex64::from_polar(1.0, -tau * self.t0);
            }
        }
        (out, p)
    }
}

fn tau_of(m: usize, p: usize, dt: f64) -> f64 {
    let signed = if m < p / 2 { m as i64 } else { m as i64 - p as i64 };
    2.0 * std::f64::consts::PI * signed as f64 / (p as f64 * dt)
}

/// Multiplies samples by `psi(t / delta)`.
pub fn apply_window(field: &SpaceTimeField, delta: f64) -> Result<SpaceTimeField> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::Window(format!("scale must be positive, got {delta}")));
    }
    let first = field.time(0);
    let end = field.time(field.nt - 1) + field.dt;
    let slack = 1e-9 * field.dt;
    if first > -2.0 * delta + slack || end < 2.0 * delta - slack {
        return Err(Error::Window(format!(
            "support [-{0}, {0}] exceeds lattice [{first}, {end})",
            2.0 * delta
        )));
    }
    let mut out = field.clone();
    let nx = field.grid.nx();
    for n in 0..field.nt {
        let w = psi(field.time(n) / delta);
        for z in &mut out.values[n * nx..(n + 1) * nx] {
            *z *= w;
        }
    }
    out.window = Some(delta);
    Ok(out)
}

/// Discrete `X_{s,b}(phi)` norm.
///
/// Each spatial mode is demodulated by `exp(i phi(xi_k) t)` before its
/// zero-padded time transform, so the transform variable is the modulation
/// `sigma = tau + phi(xi)` itself and large `phi` never aliases.
pub fn xsb_norm(field: &SpaceTimeField, spec: &NormSpec) -> Result<f64> {
    if field.nt < 8 {
        return Err(Error::Resolution(format!("nt = {} < 8", field.nt)));
    }
    let grid = field.grid;
    let nx = grid.nx();
    let nt = field.nt;
    let p = (nt * TIME_PADDING).next_power_of_two();
    let spectra = field.spatial_spectra();
    let fft = Fft1d::new(p);
    let sigma_weights: Vec<f64> = (0..p)
        .map(|m| bracket(tau_of(m, p, field.dt)).powf(2.0 * spec.b))
        .collect();
    let per_mode: Vec<f64> = (0..nx)
        .map(|k| {
            let xi = grid.xi(k);
            let phi = spec.dispersion.symbol(xi);
            let mut row = vec![Complex64::new(0.0, 0.0); p];
            let mut any = false;
            for n in 0..nt {
                let z = spectra[n * nx + k];
                if z != Complex64::new(0.0, 0.0) {
                    any = true;
                }
                row[n] = z * Complex64::from_polar(field.dt, phi * field.time(n));
            }
            if !any {
                return 0.0;
            }
            fft.forward(&mut row);
            let sum: f64 = row
                .iter()
                .zip(&sigma_weights)
                .map(|(z, w)| w * z.norm_sqr())
                .sum();
            bracket(xi).powf(2.0 * spec.s) * sum
        })
        .collect();
    let total: f64 = per_mode.iter().sum();
    Ok((total / (grid.length() * p as f64 * field.dt)).sqrt())
}
