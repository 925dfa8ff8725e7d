//! Mass, momentum and energy functionals of the smoothed solution `(Iu, Iv)`.
//!
//! ```text
//! M_I = |Iu|_{L^2}
//! L_I = alpha |Iv|^2 + 2 gamma int Im(Iu conj(Iu_x))
//! E_I = alpha gamma int Iv |Iu|^2 + gamma |Iu_x|^2 + alpha/2 |Iv_x|^2
//!       - alpha/6 int (Iv)^3 + beta gamma / 2 int Q
//! ```
//!
//! with `Q = |Iu|^4` ([`EnergyVariant::U4`], the conserved form) or
//! `Q = (Iv)^4` ([`EnergyVariant::V4`]). The cubic term is the signed
//! integral of `(Iv)^3`. Products are formed in physical space from the
//! 2/3-rule truncations of `Iu` and `Iv`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::propagators::{evolve, SolverConfig, SystemParams, SystemState, Trajectory};
use crate::spectral::{
    apply_multiplier, dealias, derivative, l2_norm, sobolev_norm, ComplexField, MultiplierSpec,
    RealField, SpectralField,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnergyVariant {
    /// Quartic term `(beta gamma / 2) |Iv|_{L^4}^4`.
    V4,
    /// Quartic term `(beta gamma / 2) |Iu|_{L^4}^4`.
    #[default]
    U4,
}

/// `|u|_{L^2}` by trapezoid quadrature.
pub fn mass(u: &ComplexField) -> f64 {
    l2_norm(u)
}

fn truncate<F: SpectralField>(f: &F) -> F {
    let mut spec = f.spectrum().to_vec();
    dealias(f.grid(), &mut spec);
    F::from_spectrum(*f.grid(), spec)
}

fn smoothed(u: &ComplexField, v: &RealField, m: &MultiplierSpec) -> Result<(ComplexField, RealField)> {
    if u.grid() != v.grid() {
        return Err(Error::GridMismatch);
    }
    Ok((
        truncate(&apply_multiplier(u, m)),
        truncate(&apply_multiplier(v, m)),
    ))
}

fn l_of(iu: &ComplexField, iv: &RealField, p: &SystemParams) -> f64 {
    let dx = iu.grid().dx();
    let iux = derivative(iu);
    let v2: f64 = iv.values().iter().map(|x| x * x).sum();
    let mom: f64 = iu
        .values()
        .iter()
        .zip(iux.values())
        .map(|(a, b)| (a * b.conj()).im)
        .sum();
    (p.alpha * v2 + 2.0 * p.gamma * mom) * dx
}

fn e_of(iu: &ComplexField, iv: &RealField, p: &SystemParams, variant: EnergyVariant) -> f64 {
    let dx = iu.grid().dx();
    let iux = derivative(iu);
    let ivx = derivative(iv);
    let mut acc = 0.0;
    for j in 0..iu.grid().nx() {
        let a2 = iu.values()[j].norm_sqr();
        let w = iv.values()[j];
        let quartic = match variant {
            EnergyVariant::U4 => a2 * a2,
            EnergyVariant::V4 => w.powi(4),
        };
        acc += p.alpha * p.gamma * w * a2
            + p.gamma * iux.values()[j].norm_sqr()
            + 0.5 * p.alpha * ivx.values()[j].powi(2)
            - p.alpha / 6.0 * w.powi(3)
            + 0.5 * p.beta * p.gamma * quartic;
    }
    acc * dx
}

pub fn functional_l(u: &ComplexField, v: &RealField, p: &SystemParams, m: &MultiplierSpec) -> Result<f64> {
    let (iu, iv) = smoothed(u, v, m)?;
    Ok(l_of(&iu, &iv, p))
}

pub fn functional_e(
    u: &ComplexField,
    v: &RealField,
    p: &SystemParams,
    m: &MultiplierSpec,
    variant: EnergyVariant,
) -> Result<f64> {
    let (iu, iv) = smoothed(u, v, m)?;
    Ok(e_of(&iu, &iv, p, variant))
}

/// `(|Iu|_{H^1}^2 + |Iv|_{H^1}^2, |E_I| + |L_I|^{5/3} + M_I^8 + 1)`.
pub fn interp_bound_check(
    u: &ComplexField,
    v: &RealField,
    p: &SystemParams,
    m: &MultiplierSpec,
) -> Result<(f64, f64)> {
    let (iu, iv) = smoothed(u, v, m)?;
    let lhs = sobolev_norm(&iu, 1.0)?.powi(2) + sobolev_norm(&iv, 1.0)?.powi(2);
    let e = e_of(&iu, &iv, p, EnergyVariant::default());
    let l = l_of(&iu, &iv, p);
    let rhs = e.abs() + l.abs().powf(5.0 / 3.0) + mass(&iu).powi(8) + 1.0;
    Ok((lhs, rhs))
}

/// `M_I, L_I, E_I` and their drifts along one trajectory, for one cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalReport {
    pub t: Vec<f64>,
    pub m: Vec<f64>,
    pub l: Vec<f64>,
    pub e: Vec<f64>,
    pub drift_l: Vec<f64>,
    pub drift_e: Vec<f64>,
    pub cutoff: f64,
}

impl FunctionalReport {
    pub fn from_trajectory(
        traj: &Trajectory,
        p: &SystemParams,
        m: &MultiplierSpec,
        variant: EnergyVariant,
    ) -> Result<Self> {
        let rows = traj
            .states
            .iter()
            .map(|st| {
                let (iu, iv) = smoothed(&st.u, &st.v, m)?;
                Ok((mass(&iu), l_of(&iu, &iv, p), e_of(&iu, &iv, p, variant)))
            })
            .collect::<Result<Vec<_>>>()?;
        let (l0, e0) = rows.first().map_or((0.0, 0.0), |r| (r.1, r.2));
        Ok(Self {
            t: traj.times.clone(),
            m: rows.iter().map(|r| r.0).collect(),
            l: rows.iter().map(|r| r.1).collect(),
            e: rows.iter().map(|r| r.2).collect(),
            drift_l: rows.iter().map(|r| (r.1 - l0).abs()).collect(),
            drift_e: rows.iter().map(|r| (r.2 - e0).abs()).collect(),
            cutoff: m.cutoff(),
        })
    }

    pub fn max_drift_l(&self) -> f64 {
        self.drift_l.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_drift_e(&self) -> f64 {
        self.drift_e.iter().copied().fold(0.0, f64::max)
    }

    /// Largest drift relative to the initial value.
    pub fn relative_drift_l(&self) -> f64 {
        self.max_drift_l() / self.l[0].abs().max(f64::MIN_POSITIVE)
    }

    pub fn relative_drift_e(&self) -> f64 {
        self.max_drift_e() / self.e[0].abs().max(f64::MIN_POSITIVE)
    }
}

/// Evolves `data` to time `delta` once and evaluates the drifts for every cutoff.
pub fn almost_conservation_run(
    data: &SystemState,
    p: &SystemParams,
    cutoffs: &[MultiplierSpec],
    delta: f64,
    cfg: &SolverConfig,
    variant: EnergyVariant,
) -> Result<(Trajectory, Vec<FunctionalReport>)> {
    p.require_i_method()?;
    let traj = evolve(data, delta, cfg, p, &[]).map_err(|e| e.error)?;
    let reports = cutoffs
        .par_iter()
        .map(|m| FunctionalReport::from_trajectory(&traj, p, m, variant))
        .collect::<Result<Vec<_>>>()?;
    Ok((traj, reports))
}
