//! Initial data built from a [`DataConfig`].

use num_complex::Complex64;
use skdv_core::propagators::SystemState;
use skdv_core::spectral::{dealias, ComplexField, Grid, RealField, SpectralField};

use crate::config::{DataConfig, Profile};

fn shape(profile: Profile, x: f64, w: f64) -> f64 {
    let y = x / w;
    match profile {
        Profile::Gaussian => (-0.5 * y * y).exp(),
        Profile::Sech => 1.0 / y.cosh(),
        Profile::Kink => (-y.abs() - 0.25 * y * y).exp(),
        Profile::Zero => 0.0,
    }
}

fn project<F: SpectralField>(f: F) -> F {
    let mut spec = f.spectrum().to_vec();
    dealias(f.grid(), &mut spec);
    F::from_spectrum(*f.grid(), spec)
}

/// `u = scale * a_u * shape(x)`, `v = scale * a_v * shape(x - shift)`.
pub fn initial_fields(grid: Grid, d: &DataConfig) -> (ComplexField, RealField) {
    let amp = Complex64::new(d.u_amp.0, d.u_amp.1) * d.scale;
    let u = ComplexField::from_fn(grid, |x| amp * shape(d.profile, x, d.width));
    let v = RealField::from_fn(grid, |x| d.scale * d.v_amp * shape(d.profile, x - d.v_shift, d.width));
    if d.project {
        (project(u), project(v))
    } else {
        (u, v)
    }
}

pub fn initial_state(grid: Grid, d: &DataConfig) -> SystemState {
    let (u, v) = initial_fields(grid, d);
    SystemState::new(u, v, 0.0).expect("fields share the grid")
}
