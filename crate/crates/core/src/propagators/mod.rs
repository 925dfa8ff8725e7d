//! Linear groups `S(t)`, `W(t)` and the nonlinear time stepper.
//!
//! The stepper is integrating-factor RK4 (Lawson form): the linear flow is
//! removed exactly in Fourier space and classical RK4 is applied to the
//! nonlinear terms
//!
//! ```text
//! N_u = -i F[alpha u v + beta |u|^2 u]
//! N_v = i xi F[gamma |u|^2 - v^2 / 2]
//! ```

mod snapshot;
mod solver;

pub use snapshot::{read_state_binary, read_state_csv, write_state_binary, write_state_csv};
pub use solver::{
    evolve, step, EvolveError, Observer, Solver, Trajectory, BLOW_UP_THRESHOLD, STIFFNESS_WARNING,
};

use num_complex::Complex64;

use crate::error::{param, Error, Result};
use crate::spectral::{zero_nyquist, ComplexField, Dispersion, RealField, SpectralField};

/// Coupling constants and the Sobolev indices of the data classes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub s: f64,
    pub l: f64,
}

impl SystemParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, s: f64, l: f64) -> Result<Self> {
        let p = Self {
            alpha,
            beta,
            gamma,
            s,
            l,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn couplings(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        Self::new(alpha, beta, gamma, 0.0, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("s", self.s),
            ("l", self.l),
        ] {
            if !v.is_finite() {
                return Err(param(name, "must be finite"));
            }
        }
        Ok(())
    }

    /// Sign hypothesis of the I-method argument.
    pub fn require_i_method(&self) -> Result<()> {
        if self.alpha * self.gamma > 0.0 {
            Ok(())
        } else {
            Err(param("alpha", "I-method experiments need alpha * gamma > 0"))
        }
    }
}

/// `(u, v)` at time `t`.
#[derive(Debug, Clone)]
pub struct SystemState {
    pub u: ComplexField,
    pub v: RealField,
    pub t: f64,
}

impl SystemState {
    pub fn new(u: ComplexField, v: RealField, t: f64) -> Result<Self> {
        if u.grid() != v.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { u, v, t })
    }

    pub fn grid(&self) -> &crate::spectral::Grid {
        self.u.grid()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    /// Apply the 2/3 rule to every nonlinear product.
    pub dealias: bool,
    /// Observer and snapshot stride, in steps.
    pub record_every: usize,
}

impl SolverConfig {
    pub fn new(dt: f64, dealias: bool, record_every: usize) -> Result<Self> {
        let cfg = Self {
            dt,
            dealias,
            record_every,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(param("dt", format!("must be positive and finite, got {}", self.dt)));
        }
        if self.record_every == 0 {
            return Err(param("record_every", "must be at least 1"));
        }
        Ok(())
    }
}

/// `U_phi(t) f`: multiplication by `exp(-i t phi(xi))`, Nyquist removed.
///
/// Real fields only admit odd symbols.
pub fn linear_propagate<F: SpectralField>(f: &F, t: f64, dispersion: Dispersion) -> Result<F> {
    let grid = *f.grid();
    let spec = f.spectrum();
    let mut out: Vec<Complex64> = spec
        .iter()
        .enumerate()
        .map(|(j, z)| z * Complex64::from_polar(1.0, -t * dispersion.symbol(grid.xi(j))))
        .collect();
    zero_nyquist(&grid, &mut out);
    if F::IS_REAL && !dispersion.preserves_real() {
        return Err(Error::InvalidInput(
            "even dispersion does not preserve real fields".into(),
        ));
    }
    let g = F::from_spectrum(grid, out);
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{l2_norm, Grid};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(grid: Grid, seed: u64) -> ComplexField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = (0..grid.nx())
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        // odd spectrum support only, so the Nyquist slot is empty
        let f = ComplexField::new(grid, v).unwrap();
        let mut s = f.spectrum().to_vec();
        s[grid.nyquist_slot()] = Complex64::new(0.0, 0.0);
        ComplexField::from_spectrum(grid, s)
    }

    #[test]
    fn identity_at_zero_time() {
        let grid = Grid::new(32, 2.0).unwrap();
        let f = random_field(grid, 1);
        let g = linear_propagate(&f, 0.0, Dispersion::Schrodinger).unwrap();
        for (a, b) in f.values().iter().zip(g.values()) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn unitary_and_group_law() {
        let grid = Grid::new(64, 3.0).unwrap();
        let f = random_field(grid, 2);
        for d in [Dispersion::Schrodinger, Dispersion::Airy] {
            let a = linear_propagate(&f, 0.37, d).unwrap();
            assert!((l2_norm(&a) - l2_norm(&f)).abs() <= 1e-12 * l2_norm(&f));
            let ab = linear_propagate(&a, -1.1, d).unwrap();
            let direct = linear_propagate(&f, 0.37 - 1.1, d).unwrap();
            for (x, y) in ab.values().iter().zip(direct.values()) {
                assert!((x - y).norm() <= 1e-12 * l2_norm(&f));
            }
        }
    }

    #[test]
    fn plane_wave_phases() {
        let grid = Grid::new(32, std::f64::consts::PI).unwrap();
        let k = 3.0;
        let f = ComplexField::plane_wave(grid, 3);
        let t = 0.4;
        let s = linear_propagate(&f, t, Dispersion::Schrodinger).unwrap();
        let w = linear_propagate(&f, t, Dispersion::Airy).unwrap();
        for (j, x) in grid.positions().iter().enumerate() {
            let es = Complex64::from_polar(1.0, k * x - k * k * t);
            let ew = Complex64::from_polar(1.0, k * x + k * k * k * t);
            assert!((s.values()[j] - es).norm() < 1e-12);
            assert!((w.values()[j] - ew).norm() < 1e-12);
        }
    }

    #[test]
    fn real_fields_stay_real_under_airy() {
        let grid = Grid::new(32, 2.0).unwrap();
        let v = RealField::from_fn(grid, |x| (-x * x).exp());
        assert!(linear_propagate(&v, 0.5, Dispersion::Airy).is_ok());
        assert!(linear_propagate(&v, 0.5, Dispersion::Schrodinger).is_err());
    }

    #[test]
    fn i_method_sign_check() {
        assert!(SystemParams::couplings(1.0, 0.0, 2.0).unwrap().require_i_method().is_ok());
        assert!(SystemParams::couplings(-1.0, 0.0, 2.0).unwrap().require_i_method().is_err());
        assert!(SystemParams::couplings(f64::NAN, 0.0, 2.0).is_err());
    }
}
