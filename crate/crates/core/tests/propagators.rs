use num_complex::Complex64;
use skdv_core::invariants::mass;
use skdv_core::propagators::{evolve, Observer, SolverConfig, SystemParams, SystemState};
use skdv_core::spectral::{ComplexField, Grid, RealField};
use std::f64::consts::PI;

fn run(state: &SystemState, t: f64, dt: f64, p: &SystemParams) -> SystemState {
    let cfg = SolverConfig::new(dt, true, usize::MAX).unwrap();
    evolve(state, t, &cfg, p, &[]).unwrap().last().clone()
}

#[test]
fn nls_plane_wave_matches_exact_phase() {
    // i u_t + u_xx = beta |u|^2 u with u = A exp(i(kx - wt)), w = k^2 + beta A^2
    let grid = Grid::new(64, PI).unwrap();
    let (amp, k, beta) = (0.7, 3.0, 1.5);
    let p = SystemParams::couplings(0.0, beta, 0.0).unwrap();
    let u = ComplexField::from_fn(grid, |x| Complex64::from_polar(amp, k * x));
    let state = SystemState::new(u, RealField::zeros(grid), 0.0).unwrap();
    let t = 0.8;
    let end = run(&state, t, 1e-3, &p);
    let w = k * k + beta * amp * amp;
    let err = grid
        .positions()
        .iter()
        .zip(end.u.values())
        .map(|(x, z)| (z - Complex64::from_polar(amp, k * x - w * t)).norm())
        .fold(0.0, f64::max);
    assert!(err < 1e-10, "plane-wave error {err:e}");
    assert!(end.v.values().iter().all(|v| v.abs() < 1e-14));
}

#[test]
fn kdv_soliton_translates() {
    // v_t + v_xxx + v v_x = 0: v = 3c sech^2(sqrt(c)(x - ct)/2)
    let grid = Grid::new(512, 16.0 * PI).unwrap();
    let c: f64 = 1.0;
    let soliton = |x: f64, t: f64| 3.0 * c / (0.5 * c.sqrt() * (x - c * t)).cosh().powi(2);
    let p = SystemParams::couplings(0.0, 0.0, 0.0).unwrap();
    let v = RealField::from_fn(grid, |x| soliton(x, 0.0));
    let state = SystemState::new(ComplexField::zeros(grid), v, 0.0).unwrap();
    let t = 1.0;
    let end = run(&state, t, 1e-3, &p);
    let err = grid
        .positions()
        .iter()
        .zip(end.v.values())
        .map(|(x, v)| (v - soliton(*x, t)).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-7, "soliton error {err:e}");
}

#[test]
fn linear_flow_is_exact() {
    // the KdV nonlinearity has no coupling constant, so v is kept tiny
    let grid = Grid::new(128, 2.0 * PI).unwrap();
    let p = SystemParams::couplings(0.0, 0.0, 0.0).unwrap();
    let u = ComplexField::from_fn(grid, |x| Complex64::new((-x * x).exp(), 0.0));
    let v = RealField::from_fn(grid, |x| 1e-6 * (-(x - 1.0).powi(2)).exp());
    let state = SystemState::new(u.clone(), v.clone(), 0.0).unwrap();
    let end = run(&state, 0.37, 0.01, &p);
    let free_u = skdv_core::propagators::linear_propagate(
        &u,
        0.37,
        skdv_core::spectral::Dispersion::Schrodinger,
    )
    .unwrap();
    let free_v =
        skdv_core::propagators::linear_propagate(&v, 0.37, skdv_core::spectral::Dispersion::Airy)
            .unwrap();
    for (a, b) in end.u.values().iter().zip(free_u.values()) {
        assert!((a - b).norm() < 1e-12);
    }
    for (a, b) in end.v.values().iter().zip(free_v.values()) {
        assert!((a - b).abs() < 1e-13);
    }
}

#[test]
fn coupled_flow_conserves_mass_and_records() {
    let grid = Grid::new(256, 8.0 * PI).unwrap();
    let p = SystemParams::couplings(1.0, 1.0, 1.0).unwrap();
    let u = ComplexField::from_fn(grid, |x| Complex64::new((-x * x / 4.0).exp(), 0.3 * x * (-x * x / 4.0).exp()));
    let v = RealField::from_fn(grid, |x| 0.5 * (-(x + 2.0).powi(2) / 2.0).exp());
    let state = SystemState::new(u, v, 0.0).unwrap();
    let m0 = mass(&state.u);
    let cfg = SolverConfig::new(2e-3, true, 50).unwrap();
    let obs = [Observer::new("mass", |s: &SystemState| mass(&s.u))];
    let traj = evolve(&state, 1.0, &cfg, &p, &obs).unwrap();
    assert_eq!(traj.times.len(), 11);
    assert!((traj.times[10] - 1.0).abs() < 1e-12);
    for m in traj.log("mass").unwrap() {
        assert!(((m - m0) / m0).abs() < 1e-10);
    }
    assert!(traj.max_imag_residue < 1e-12);
}

#[test]
fn partial_final_step_lands_on_horizon() {
    let grid = Grid::new(64, 4.0 * PI).unwrap();
    let p = SystemParams::couplings(1.0, 0.0, 1.0).unwrap();
    let u = ComplexField::from_fn(grid, |x| Complex64::new(0.2 * (-x * x).exp(), 0.0));
    let state = SystemState::new(u, RealField::zeros(grid), 0.0).unwrap();
    let cfg = SolverConfig::new(0.03, true, 1).unwrap();
    let traj = evolve(&state, 0.1, &cfg, &p, &[]).unwrap();
    assert_eq!(traj.times.len(), 5);
    assert!((traj.last().t - 0.1).abs() < 1e-15);
}

#[test]
fn blow_up_is_reported_with_partial_trajectory() {
    // focusing cubic term, huge amplitude and a coarse step
    let grid = Grid::new(64, 4.0 * PI).unwrap();
    let p = SystemParams::couplings(0.0, -1e3, 0.0).unwrap();
    let u = ComplexField::from_fn(grid, |x| Complex64::new(50.0 * (-x * x).exp(), 0.0));
    let state = SystemState::new(u, RealField::zeros(grid), 0.0).unwrap();
    let cfg = SolverConfig::new(0.05, true, 1).unwrap();
    let err = evolve(&state, 5.0, &cfg, &p, &[]).unwrap_err();
    assert!(matches!(err.error, skdv_core::Error::BlowUp { .. }));
    assert!(!err.partial.times.is_empty());
}
