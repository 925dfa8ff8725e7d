use num_complex::Complex64;

use super::field::SpectralField;
use crate::error::{Error, Result};

/// Japanese bracket `(1 + x^2)^{1/2}`.
pub fn bracket(x: f64) -> f64 {
    x.hypot(1.0)
}

/// `(1/(2L) sum_k <xi_k>^{2s} |f_hat_k|^2)^{1/2}`.
pub fn sobolev_norm<F: SpectralField>(f: &F, s: f64) -> Result<f64> {
    if !f.is_finite() {
        return Err(Error::InvalidInput("field has non-finite samples".into()));
    }
    let grid = f.grid();
    let sum: f64 = f
        .spectrum()
        .iter()
        .enumerate()
        .map(|(j, z)| {
            let w = if s == 0.0 { 1.0 } else { bracket(grid.xi(j)).powf(2.0 * s) };
            w * z.norm_sqr()
        })
        .sum();
    Ok((sum / grid.length()).sqrt())
}

/// Trapezoid quadrature of `|f|^2` over the period.
pub fn l2_norm<F: SpectralField>(f: &F) -> f64 {
    let dx = f.grid().dx();
    (f.complex_values().iter().map(Complex64::norm_sqr).sum::<f64>() * dx).sqrt()
}

/// Trapezoid quadrature of `|f|^p`.
pub fn lp_norm_pow(values: &[f64], dx: f64, p: f64) -> f64 {
    values.iter().map(|x| x.abs().powf(p)).sum::<f64>() * dx
}

/// Spectral derivative `i xi f_hat`, Nyquist removed.
pub fn derivative<F: SpectralField>(f: &F) -> F {
    let grid = *f.grid();
    let mut spec: Vec<_> = f
        .spectrum()
        .iter()
        .enumerate()
        .map(|(j, z)| z * Complex64::new(0.0, grid.xi(j)))
        .collect();
    spec[grid.nyquist_slot()] = Complex64::new(0.0, 0.0);
    F::from_spectrum(grid, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{ComplexField, Grid, RealField};

    #[test]
    fn zero_and_plane_wave() {
        let grid = Grid::new(64, 3.0).unwrap();
        assert_eq!(sobolev_norm(&ComplexField::zeros(grid), 0.7).unwrap(), 0.0);
        for &(k, s) in &[(0i64, 0.0), (2, 1.0), (-5, 0.5), (7, -1.25)] {
            let f = ComplexField::plane_wave(grid, k);
            let xi = std::f64::consts::PI * k as f64 / 3.0;
            let expect = 6.0 * bracket(xi).powf(2.0 * s);
            let got = sobolev_norm(&f, s).unwrap().powi(2);
            assert!((got - expect).abs() <= 1e-12 * expect, "k={k} s={s}");
        }
    }

    #[test]
    fn rejects_non_finite() {
        let grid = Grid::new(16, 1.0).unwrap();
        let mut vals = vec![0.0; 16];
        vals[3] = f64::NAN;
        let v = RealField::new(grid, vals).unwrap();
        assert!(sobolev_norm(&v, 0.0).is_err());
    }

    #[test]
    fn derivative_of_sine() {
        let grid = Grid::new(64, std::f64::consts::PI).unwrap();
        let v = RealField::from_fn(grid, |x| (3.0 * x).sin());
        let d = derivative(&v);
        for (x, dv) in grid.positions().iter().zip(d.values()) {
            assert!((dv - 3.0 * (3.0 * x).cos()).abs() < 1e-12);
        }
    }
}
