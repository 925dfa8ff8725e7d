use num_complex::Complex64;

use super::{SolverConfig, SystemParams, SystemState};
use crate::error::{Error, Result};
use crate::spectral::{hermitian_part, ComplexField, Grid, RealField, SpectralField, Transform};

/// Samples above this magnitude abort the run.
pub const BLOW_UP_THRESHOLD: f64 = 1e12;

/// `dt * max|xi|^3` beyond which a stability warning is logged.
pub const STIFFNESS_WARNING: f64 = 50.0;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

struct Factors {
    u_half: Vec<Complex64>,
    u_full: Vec<Complex64>,
    v_half: Vec<Complex64>,
    v_full: Vec<Complex64>,
}

impl Factors {
    fn new(xi: &[f64], h: f64) -> Self {
        let phase = |f: &dyn Fn(f64) -> f64, scale: f64| -> Vec<Complex64> {
            xi.iter().map(|&k| Complex64::from_polar(1.0, scale * f(k))).collect()
        };
        let sq = |k: f64| -k * k;
        let cube = |k: f64| k * k * k;
        Self {
            u_half: phase(&sq, 0.5 * h),
            u_full: phase(&sq, h),
            v_half: phase(&cube, 0.5 * h),
            v_full: phase(&cube, h),
        }
    }
}

/// Integrating-factor RK4 stepper with precomputed propagator factors.
pub struct Solver {
    grid: Grid,
    transform: Transform,
    params: SystemParams,
    cfg: SolverConfig,
    xi: Vec<f64>,
    keep: Vec<bool>,
    factors: Factors,
}

impl Solver {
    pub fn new(grid: Grid, cfg: SolverConfig, params: SystemParams) -> Result<Self> {
        cfg.validate()?;
        params.validate()?;
        let stiffness = cfg.dt * grid.max_wavenumber().powi(3);
        if stiffness > STIFFNESS_WARNING {
            log::warn!(
                "dt * max|xi|^3 = {stiffness:.1} exceeds {STIFFNESS_WARNING}; \
                 the nonlinear sub-flow may be under-resolved"
            );
        }
        let xi = grid.wavenumbers();
        let keep = (0..grid.nx())
            .map(|j| {
                if cfg.dealias {
                    grid.keeps_mode(j)
                } else {
                    j != grid.nyquist_slot()
                }
            })
            .collect();
        let factors = Factors::new(&xi, cfg.dt);
        Ok(Self {
            grid,
            transform: Transform::new(grid),
            params,
            cfg,
            xi,
            keep,
            factors,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    /// Nonlinear right-hand sides in Fourier space.
    fn nonlinear(
        &self,
        u_hat: &[Complex64],
        v_hat: &[Complex64],
        t: f64,
    ) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        let p = &self.params;
        let mut u = u_hat.to_vec();
        self.transform.inverse_in_place(&mut u);
        let mut v = v_hat.to_vec();
        self.transform.inverse_in_place(&mut v);
        let mut fu = Vec::with_capacity(u.len());
        let mut fv = Vec::with_capacity(u.len());
        for (uj, vj) in u.iter().zip(&v) {
            let (ur, vr) = (*uj, vj.re);
            if !(ur.re.is_finite() && ur.im.is_finite() && vr.is_finite())
                || ur.norm() > BLOW_UP_THRESHOLD
                || vr.abs() > BLOW_UP_THRESHOLD
            {
                return Err(Error::BlowUp {
                    time: t,
                    reason: format!("sample |u| = {:e}, |v| = {:e}", ur.norm(), vr.abs()),
                });
            }
            let m = ur.norm_sqr();
            fu.push(ur * (p.alpha * vr + p.beta * m));
            fv.push(Complex64::new(p.gamma * m - 0.5 * vr * vr, 0.0));
        }
        self.transform.forward_in_place(&mut fu);
        self.transform.forward_in_place(&mut fv);
        for j in 0..fu.len() {
            if self.keep[j] {
                fu[j] = Complex64::new(fu[j].im, -fu[j].re);
                fv[j] *= Complex64::new(0.0, self.xi[j]);
            } else {
                fu[j] = ZERO;
                fv[j] = ZERO;
            }
        }
        Ok((fu, fv))
    }

    fn rk4(
        &self,
        u: &[Complex64],
        v: &[Complex64],
        t: f64,
        h: f64,
        f: &Factors,
    ) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        let n = u.len();
        let hh = 0.5 * h;
        let (k1u, k1v) = self.nonlinear(u, v, t)?;
        let a_u: Vec<_> = (0..n).map(|j| f.u_half[j] * (u[j] + hh * k1u[j])).collect();
        let a_v: Vec<_> = (0..n).map(|j| f.v_half[j] * (v[j] + hh * k1v[j])).collect();
        let (k2u, k2v) = self.nonlinear(&a_u, &a_v, t + hh)?;
        let b_u: Vec<_> = (0..n).map(|j| f.u_half[j] * u[j] + hh * k2u[j]).collect();
        let b_v: Vec<_> = (0..n).map(|j| f.v_half[j] * v[j] + hh * k2v[j]).collect();
        let (k3u, k3v) = self.nonlinear(&b_u, &b_v, t + hh)?;
        let c_u: Vec<_> = (0..n)
            .map(|j| f.u_full[j] * u[j] + h * f.u_half[j] * k3u[j])
            .collect();
        let c_v: Vec<_> = (0..n)
            .map(|j| f.v_full[j] * v[j] + h * f.v_half[j] * k3v[j])
            .collect();
        let (k4u, k4v) = self.nonlinear(&c_u, &c_v, t + h)?;
        let w = h / 6.0;
        let new_u: Vec<_> = (0..n)
            .map(|j| {
                f.u_full[j] * (u[j] + w * k1u[j])
                    + w * (2.0 * f.u_half[j] * (k2u[j] + k3u[j]) + k4u[j])
            })
            .collect();
        let new_v: Vec<_> = (0..n)
            .map(|j| {
                f.v_full[j] * (v[j] + w * k1v[j])
                    + w * (2.0 * f.v_half[j] * (k2v[j] + k3v[j]) + k4v[j])
            })
            .collect();
        if new_u.iter().chain(&new_v).any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::BlowUp {
                time: t + h,
                reason: "non-finite spectrum".into(),
            });
        }
        Ok((new_u, new_v))
    }

    /// One step of size `h` on spectral data; returns the Hermitian defect of
    /// `v_hat` (a bound on `max |Im v|`) observed before projection.
    pub fn advance_spectral(
        &self,
        u: &mut Vec<Complex64>,
        v: &mut Vec<Complex64>,
        t: f64,
        h: f64,
    ) -> Result<f64> {
        let (nu, mut nv) = if h == self.cfg.dt {
            self.rk4(u, v, t, h, &self.factors)?
        } else {
            self.rk4(u, v, t, h, &Factors::new(&self.xi, h))?
        };
        let defect = hermitian_defect(&self.grid, &nv);
        hermitian_part(&self.grid, &mut nv);
        *u = nu;
        *v = nv;
        Ok(defect)
    }

    pub fn step_state(&self, state: &SystemState) -> Result<SystemState> {
        self.step_by(state, self.cfg.dt).map(|(s, _)| s)
    }

    fn step_by(&self, state: &SystemState, h: f64) -> Result<(SystemState, f64)> {
        if state.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        let (mut u, mut v) = self.initial_spectra(state);
        let defect = self.advance_spectral(&mut u, &mut v, state.t, h)?;
        Ok((self.materialise(u, v, state.t + h), defect))
    }

    fn initial_spectra(&self, state: &SystemState) -> (Vec<Complex64>, Vec<Complex64>) {
        let mut u = state.u.spectrum().to_vec();
        let mut v = state.v.spectrum().to_vec();
        let nyq = self.grid.nyquist_slot();
        u[nyq] = ZERO;
        v[nyq] = ZERO;
        (u, v)
    }

    fn materialise(&self, u: Vec<Complex64>, v: Vec<Complex64>, t: f64) -> SystemState {
        SystemState {
            u: ComplexField::from_spectrum(self.grid, u),
            v: RealField::from_spectrum(self.grid, v),
            t,
        }
    }

    /// Runs to `state.t + horizon`, recording every `record_every` steps and at the end.
    pub fn evolve(
        &self,
        state: &SystemState,
        horizon: f64,
        observers: &[Observer],
    ) -> std::result::Result<Trajectory, EvolveError> {
        let mut traj = Trajectory::new(observers);
        traj.record(state.clone(), observers);
        if horizon <= 0.0 {
            return Ok(traj);
        }
        let dt = self.cfg.dt;
        let mut full = (horizon / dt).floor() as usize;
        let mut rest = horizon - full as f64 * dt;
        if rest <= 1e-9 * dt {
            rest = 0.0;
        } else if dt - rest <= 1e-9 * dt {
            full += 1;
            rest = 0.0;
        }
        let (mut u, mut v) = self.initial_spectra(state);
        let mut t = state.t;
        let total = full + usize::from(rest > 0.0);
        for n in 0..total {
            let h = if n < full { dt } else { rest };
            match self.advance_spectral(&mut u, &mut v, t, h) {
                Ok(defect) => traj.max_imag_residue = traj.max_imag_residue.max(defect),
                Err(error) => return Err(EvolveError { error, partial: Box::new(traj) }),
            }
            t = if n + 1 == total { state.t + horizon } else { state.t + (n + 1) as f64 * dt };
            if (n + 1) % self.cfg.record_every == 0 || n + 1 == total {
                traj.record(self.materialise(u.clone(), v.clone(), t), observers);
            }
        }
        Ok(traj)
    }
}

fn hermitian_defect(grid: &Grid, v: &[Complex64]) -> f64 {
    let n = grid.nx();
    let mut sum = v[0].im.abs() + v[n / 2].im.abs();
    for j in 1..n / 2 {
        sum += (v[j] - v[n - j].conj()).norm();
    }
    sum / grid.length()
}

/// A named scalar functional sampled along a trajectory.
pub struct Observer {
    pub name: String,
    func: Box<dyn Fn(&SystemState) -> f64 + Send + Sync>,
}

impl Observer {
    pub fn new(name: impl Into<String>, f: impl Fn(&SystemState) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            func: Box::new(f),
        }
    }

    pub fn observe(&self, state: &SystemState) -> f64 {
        (self.func)(state)
    }
}

impl std::fmt::Debug for Observer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Observer").field("name", &self.name).finish()
    }
}

/// Recorded snapshots and observer logs.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SystemState>,
    pub observer_names: Vec<String>,
    /// `logs[i][r]` is observer `i` at record `r`.
    pub logs: Vec<Vec<f64>>,
    /// Largest imaginary residue of `v` seen before projection.
    pub max_imag_residue: f64,
}

impl Trajectory {
    fn new(observers: &[Observer]) -> Self {
        Self {
            observer_names: observers.iter().map(|o| o.name.clone()).collect(),
            logs: vec![Vec::new(); observers.len()],
            ..Default::default()
        }
    }

    fn record(&mut self, state: SystemState, observers: &[Observer]) {
        for (log, obs) in self.logs.iter_mut().zip(observers) {
            log.push(obs.observe(&state));
        }
        self.times.push(state.t);
        self.states.push(state);
    }

    pub fn last(&self) -> &SystemState {
        self.states.last().expect("trajectory always holds the initial state")
    }

    pub fn log(&self, name: &str) -> Option<&[f64]> {
        self.observer_names
            .iter()
            .position(|n| n == name)
            .map(|i| self.logs[i].as_slice())
    }
}

/// A failed run together with everything recorded before the failure.
#[derive(Debug)]
pub struct EvolveError {
    pub error: Error,
    pub partial: Box<Trajectory>,
}

impl std::fmt::Display for EvolveError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (after {} records)", self.error, self.partial.times.len())
    }
}

impl std::error::Error for EvolveError {}

/// One step of size `cfg.dt`.
pub fn step(state: &SystemState, cfg: &SolverConfig, params: &SystemParams) -> Result<SystemState> {
    Solver::new(*state.grid(), *cfg, *params)?.step_state(state)
}

pub fn evolve(
    state: &SystemState,
    horizon: f64,
    cfg: &SolverConfig,
    params: &SystemParams,
    observers: &[Observer],
) -> std::result::Result<Trajectory, EvolveError> {
    let solver = Solver::new(*state.grid(), *cfg, *params).map_err(|error| EvolveError {
        error,
        partial: Box::default(),
    })?;
    solver.evolve(state, horizon, observers)
}
