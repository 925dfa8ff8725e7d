use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::kernel::duhamel_kernel;
use crate::error::{param, Error, Result};
use crate::fit::{fit_loglog, FitResult};
use crate::propagators::SystemParams;
use crate::quadrature::GaussLegendre;
use crate::spectral::bracket;

pub const DEFAULT_EPS0: f64 = 1e-2;

/// Times at which the `C_t H^l` supremum is sampled.
pub const SUP_TIME_GRID: [f64; 9] = [0.0, 0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875, 1.0];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `{xi : |xi - center| <= half_width}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyInterval {
    pub center: f64,
    pub half_width: f64,
}

impl FrequencyInterval {
    pub fn new(center: f64, half_width: f64) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite() && center.is_finite()) {
            return Err(param("half_width", format!("must be positive, got {half_width}")));
        }
        Ok(Self { center, half_width })
    }

    pub fn lo(&self) -> f64 {
        self.center - self.half_width
    }

    pub fn hi(&self) -> f64 {
        self.center + self.half_width
    }

    pub fn measure(&self) -> f64 {
        2.0 * self.half_width
    }

    pub fn contains(&self, xi: f64) -> bool {
        (xi - self.center).abs() <= self.half_width
    }
}

/// `[Upsilon, Upsilon_1, Upsilon_2]` for frequency `N`.
pub fn upsilon_boxes(big_n: f64) -> Result<[FrequencyInterval; 3]> {
    Ok([
        FrequencyInterval::new(big_n - 0.5, 1.0 / (100.0 * big_n * big_n))?,
        FrequencyInterval::new(big_n - 0.5 * big_n * big_n - 0.375, 1.0 / big_n)?,
        FrequencyInterval::new(0.5 * (big_n * big_n - 0.25), 1.0 / (200.0 * big_n))?,
    ])
}

/// `Q_1 = xi (xi^2 + xi - 2 xi_2)` at `xi = c + p`, `xi_2 = (c^2 + c)/2 + q`.
///
/// Written in the offsets, so no large terms cancel.
pub fn resonance_q1(c: f64, p: f64, q: f64) -> f64 {
    (c + p) * (2.0 * c * p + p * p + p - 2.0 * q)
}

/// Gauss-Legendre node counts for the outer (`xi`) and inner (`xi_2`) integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadPoints {
    pub xi: usize,
    pub xi2: usize,
}

impl Default for QuadPoints {
    fn default() -> Self {
        Self { xi: 64, xi2: 128 }
    }
}

impl QuadPoints {
    pub fn doubled(self) -> Self {
        Self {
            xi: 2 * self.xi,
            xi2: 2 * self.xi2,
        }
    }
}

/// Parameters of the norm-inflation construction at one frequency `N`.
///
/// `u0_hat` is `eps0 N^{1/2 - 2s}` on `Upsilon_1` and `Upsilon_2`;
/// `v0_hat` is `eps0 N^{n/2}` on `Lambda`, and also on `-Lambda` when
/// `v_symmetric` is set (real `v0`).
#[derive(Debug, Clone, PartialEq)]
pub struct InflationConfig {
    pub n_target: f64,
    pub big_n: f64,
    pub k: u64,
    pub eps0: f64,
    pub n: u32,
    pub s: f64,
    pub l: f64,
    pub upsilon: FrequencyInterval,
    pub upsilon1: FrequencyInterval,
    pub upsilon2: FrequencyInterval,
    pub lambda: FrequencyInterval,
    pub quad: QuadPoints,
    pub v_symmetric: bool,
}

impl InflationConfig {
    /// Snaps `n_target` to the nearest `N` with `(N - 1/2)^3 = 2 pi k`.
    pub fn new(n_target: f64, eps0: f64, n: u32, s: f64, l: f64, quad: QuadPoints) -> Result<Self> {
        if !(n_target.is_finite() && n_target >= 4.0) {
            return Err(param("N", format!("must be >= 4, got {n_target}")));
        }
        if !(eps0.is_finite() && eps0 > 0.0) {
            return Err(param("eps0", "must be positive"));
        }
        if n == 0 {
            return Err(param("n", "must be a positive integer"));
        }
        if !(s.is_finite() && l.is_finite()) {
            return Err(param("s", "indices must be finite"));
        }
        if quad.xi < 2 || quad.xi2 < 2 {
            return Err(param("quad_points", "need at least 2 nodes per axis"));
        }
        let k = ((n_target - 0.5).powi(3) / (2.0 * PI)).round().max(1.0) as u64;
        let c = (2.0 * PI * k as f64).cbrt();
        let big_n = c + 0.5;
        let [upsilon, upsilon1, upsilon2] = upsilon_boxes(big_n)?;
        let cfg = Self {
            n_target,
            big_n,
            k,
            eps0,
            n,
            s,
            l,
            upsilon,
            upsilon1,
            upsilon2,
            lambda: FrequencyInterval::new(1.0, big_n.powi(-(n as i32)))?,
            quad,
            v_symmetric: false,
        };
        cfg.check_invariants()?;
        Ok(cfg)
    }

    /// Phase periodicity and the support inclusion `Upsilon - Upsilon_2 ⊂ Upsilon_1`.
    pub fn check_invariants(&self) -> Result<()> {
        let c = self.big_n - 0.5;
        let periods = c.powi(3) / (2.0 * PI);
        if ((periods - self.k as f64) / self.k as f64).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "(N - 1/2)^3 / 2pi = {periods} is not the integer {}",
                self.k
            )));
        }
        let offset = (self.upsilon.center - self.upsilon2.center - self.upsilon1.center).abs();
        if offset + self.upsilon.half_width + self.upsilon2.half_width > self.upsilon1.half_width {
            return Err(Error::InvalidInput(
                "Upsilon - Upsilon_2 is not contained in Upsilon_1".into(),
            ));
        }
        Ok(())
    }

    pub fn u_amplitude(&self) -> f64 {
        self.eps0 * self.big_n.powf(0.5 - 2.0 * self.s)
    }

    pub fn v_amplitude(&self) -> f64 {
        self.eps0 * self.big_n.powf(0.5 * self.n as f64)
    }

    /// [`resonance_q1`] about the centres of `Upsilon` and `Upsilon_2`.
    pub fn q1_offsets(&self, p: f64, q: f64) -> f64 {
        resonance_q1(self.upsilon.center, p, q)
    }

    /// `Q_2(xi, xi_2) = 3 xi (xi - xi_2) xi_2` at `xi = 2 + r`, `xi_2 = 1 + a`.
    pub fn q2_offsets(r: f64, a: f64) -> f64 {
        3.0 * (2.0 + r) * (1.0 + r - a) * (1.0 + a)
    }

    /// `exp(i t xi^3)` at `xi = c + p`, with `c^3 = 2 pi k` taken exactly.
    fn cubic_phase(&self, p: f64, t: f64) -> Complex64 {
        let c = self.upsilon.center;
        let frac = (t * self.k as f64).fract();
        let rest = t * p * (3.0 * c * c + 3.0 * c * p + p * p);
        Complex64::from_polar(1.0, 2.0 * PI * frac + rest)
    }

    /// `F[A_2](c + p, t)` from the `Upsilon_1 x Upsilon_2` interaction.
    pub fn nls_term(&self, p: f64, t: f64, gamma: f64, rule: &GaussLegendre) -> Complex64 {
        let (w1, w2) = (self.upsilon1.half_width, self.upsilon2.half_width);
        let lo = (-w2).max(p - w1);
        let hi = w2.min(p + w1);
        if lo >= hi {
            return ZERO;
        }
        let integral = rule.integrate(lo, hi, |q| duhamel_kernel(self.q1_offsets(p, q), t));
        let xi = self.upsilon.center + p;
        let a = self.u_amplitude();
        Complex64::new(0.0, xi) * self.cubic_phase(p, t) * integral * (gamma * a * a)
    }

    /// `F[A_2](2 + r, t)` from the `Lambda x Lambda` self-interaction.
    pub fn kdv_term(&self, r: f64, t: f64, rule: &GaussLegendre) -> Complex64 {
        let h = self.lambda.half_width;
        let lo = (-h).max(r - h);
        let hi = h.min(r + h);
        if lo >= hi {
            return ZERO;
        }
        let integral = rule.integrate(lo, hi, |a| duhamel_kernel(Self::q2_offsets(r, a), t));
        let xi = 2.0 + r;
        let b = self.v_amplitude();
        Complex64::new(0.0, xi) * Complex64::from_polar(1.0, t * xi.powi(3)) * integral * (-0.5 * b * b)
    }

    /// `F[A_2](r, t)` from the `Lambda x (-Lambda)` interaction, both orderings.
    pub fn kdv_cross_term(&self, r: f64, t: f64, rule: &GaussLegendre) -> Complex64 {
        let h = self.lambda.half_width;
        let lo = (-h).max(r - h);
        let hi = h.min(r + h);
        if lo >= hi {
            return ZERO;
        }
        let q = |a: f64| 3.0 * r * (r - 1.0 - a) * (1.0 + a);
        let integral = rule.integrate(lo, hi, |a| duhamel_kernel(q(a), t));
        let b = self.v_amplitude();
        Complex64::new(0.0, r) * Complex64::from_polar(1.0, t * r.powi(3)) * integral * (-b * b)
    }

    /// `(||<xi>^l F[A_2]_nls||_{L^2(Upsilon)}, ||<xi>^l F[A_2]_kdv||_{L^2})` at time `t`.
    pub fn norms_at(&self, t: f64, gamma: f64, outer: &GaussLegendre, inner: &GaussLegendre) -> (f64, f64) {
        let c = self.upsilon.center;
        let w = self.upsilon.half_width;
        let nls: f64 = outer
            .on(-w, w)
            .map(|(p, wt)| wt * bracket(c + p).powf(2.0 * self.l) * self.nls_term(p, t, gamma, inner).norm_sqr())
            .sum();
        let h = 2.0 * self.lambda.half_width;
        let kdv: f64 = [(-h, 0.0), (0.0, h)]
            .iter()
            .flat_map(|&(a, b)| outer.on(a, b))
            .map(|(r, wt)| wt * bracket(2.0 + r).powf(2.0 * self.l) * self.kdv_term(r, t, inner).norm_sqr())
            .sum();
        if !self.v_symmetric {
            return (nls.sqrt(), kdv.sqrt());
        }
        let cross: f64 = [(-h, 0.0), (0.0, h)]
            .iter()
            .flat_map(|&(a, b)| outer.on(a, b))
            .map(|(r, wt)| wt * bracket(r).powf(2.0 * self.l) * self.kdv_cross_term(r, t, inner).norm_sqr())
            .sum();
        (nls.sqrt(), (2.0 * kdv + cross).sqrt())
    }
}

/// `F[A_2](xi, t)` for the data of `cfg`; zero off `(Upsilon_1 + Upsilon_2) ∪ (Lambda + Lambda)`
/// (and its mirror and `Lambda - Lambda` when `v_symmetric`).
pub fn second_iterate_hat(xi: f64, t: f64, cfg: &InflationConfig, p: &SystemParams) -> Complex64 {
    let inner = GaussLegendre::new(cfg.quad.xi2);
    let mut out = ZERO;
    let dp = xi - cfg.upsilon.center;
    if dp.abs() <= cfg.upsilon1.half_width + cfg.upsilon2.half_width {
        out += cfg.nls_term(dp, t, p.gamma, &inner);
    }
    let r = xi - 2.0;
    let h2 = 2.0 * cfg.lambda.half_width;
    if r.abs() <= h2 {
        out += cfg.kdv_term(r, t, &inner);
    }
    if cfg.v_symmetric {
        // -Lambda x -Lambda: Q_2 flips sign and K(-Q, t) = conj K(Q, t)
        let mirror = -xi - 2.0;
        if mirror.abs() <= h2 {
            out += cfg.kdv_term(mirror, t, &inner).conj();
        }
        if xi.abs() <= h2 {
            out += cfg.kdv_cross_term(xi, t, &inner);
        }
    }
    out
}

/// Extremes of the phase factor `exp(i xi^3) exp(-i t' Q_1)` over `Upsilon x Upsilon_2 x [0,1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseDiagnostics {
    pub min_real_part: f64,
    pub max_abs_q1: f64,
    pub max_cubic_offset: f64,
}

pub fn phase_coherence(cfg: &InflationConfig) -> PhaseDiagnostics {
    let outer = GaussLegendre::new(cfg.quad.xi);
    let inner = GaussLegendre::new(cfg.quad.xi2);
    let w = cfg.upsilon.half_width;
    let w2 = cfg.upsilon2.half_width;
    let ps: Vec<f64> = [-w, w].into_iter().chain(outer.on(-w, w).map(|n| n.0)).collect();
    let qs: Vec<f64> = [-w2, w2].into_iter().chain(inner.on(-w2, w2).map(|n| n.0)).collect();
    let ts: Vec<f64> = (0..=32).map(|j| j as f64 / 32.0).collect();
    let c = cfg.upsilon.center;
    let mut out = PhaseDiagnostics {
        min_real_part: f64::INFINITY,
        max_abs_q1: 0.0,
        max_cubic_offset: 0.0,
    };
    for &p in &ps {
        let cubic = cfg.cubic_phase(p, 1.0);
        out.max_cubic_offset = out
            .max_cubic_offset
            .max((p * (3.0 * c * c + 3.0 * c * p + p * p)).abs());
        for &q in &qs {
            let q1 = cfg.q1_offsets(p, q);
            out.max_abs_q1 = out.max_abs_q1.max(q1.abs());
            for &t in &ts {
                let z = cubic * Complex64::from_polar(1.0, -t * q1);
                out.min_real_part = out.min_real_part.min(z.re);
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct InflationRow {
    pub n_target: f64,
    pub big_n: f64,
    pub k: u64,
    /// Supremum over [`SUP_TIME_GRID`] of `sqrt(G_nls^2 + G_kdv^2)`.
    pub g_total: f64,
    pub g_nls: f64,
    pub g_kdv: f64,
    /// `G_total` at `t = 1`.
    pub g_at_one: f64,
    /// Slope of the rows up to and including this one, once three exist.
    pub slope_so_far: Option<f64>,
    pub phase: PhaseDiagnostics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InflationReport {
    pub s: f64,
    pub l: f64,
    pub eps0: f64,
    pub n: u32,
    pub quad: QuadPoints,
    pub rows: Vec<InflationRow>,
    pub fit: FitResult,
    pub nls_fit: FitResult,
    pub kdv_fit: FitResult,
}

impl InflationReport {
    pub fn min_phase_real_part(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.phase.min_real_part)
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn inflation_experiment(
    s: f64,
    l: f64,
    n_list: &[f64],
    eps0: f64,
    n: u32,
    quad: QuadPoints,
    params: &SystemParams,
) -> Result<InflationReport> {
    if n_list.len() < 3 {
        return Err(Error::Fit(format!("need >= 3 values of N, got {}", n_list.len())));
    }
    let cfgs = n_list
        .iter()
        .map(|&nt| InflationConfig::new(nt, eps0, n, s, l, quad))
        .collect::<Result<Vec<_>>>()?;
    let outer = GaussLegendre::new(quad.xi);
    let inner = GaussLegendre::new(quad.xi2);
    let gamma = params.gamma;
    let mut rows: Vec<InflationRow> = cfgs
        .par_iter()
        .map(|cfg| {
            let samples: Vec<(f64, f64)> = SUP_TIME_GRID
                .iter()
                .map(|&t| cfg.norms_at(t, gamma, &outer, &inner))
                .collect();
            let total = |(a, b): (f64, f64)| a.hypot(b);
            InflationRow {
                n_target: cfg.n_target,
                big_n: cfg.big_n,
                k: cfg.k,
                g_total: samples.iter().map(|&x| total(x)).fold(0.0, f64::max),
                g_nls: samples.iter().map(|x| x.0).fold(0.0, f64::max),
                g_kdv: samples.iter().map(|x| x.1).fold(0.0, f64::max),
                g_at_one: total(samples[SUP_TIME_GRID.len() - 1]),
                slope_so_far: None,
                phase: phase_coherence(cfg),
            }
        })
        .collect();
    for i in 2..rows.len() {
        let pts: Vec<_> = rows[..=i].iter().map(|r| (r.big_n, r.g_total)).collect();
        rows[i].slope_so_far = fit_loglog(&pts).ok().map(|f| f.slope);
    }
    let fit_of = |f: fn(&InflationRow) -> f64| {
        fit_loglog(&rows.iter().map(|r| (r.big_n, f(r))).collect::<Vec<_>>())
    };
    Ok(InflationReport {
        s,
        l,
        eps0,
        n,
        quad,
        fit: fit_of(|r| r.g_total)?,
        nls_fit: fit_of(|r| r.g_nls)?,
        kdv_fit: fit_of(|r| r.g_kdv)?,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: f64) -> InflationConfig {
        InflationConfig::new(n, DEFAULT_EPS0, 6, 0.0, 1.0, QuadPoints::default()).unwrap()
    }

    #[test]
    fn snapping_is_exact() {
        for n in [8.0, 32.0, 100.0, 512.0] {
            let c = cfg(n);
            let periods = (c.big_n - 0.5).powi(3) / (2.0 * PI);
            assert!(((periods - c.k as f64) / c.k as f64).abs() < 1e-12);
            assert!((c.big_n - n).abs() < 0.5);
        }
    }

    #[test]
    fn offset_resonance_function_matches_direct_form() {
        let c = cfg(8.0);
        for &(p, q) in &[(0.0, 0.0), (1e-4, -2e-4), (-0.05, 3e-4), (0.1, 0.0)] {
            let xi = c.upsilon.center + p;
            let xi2 = c.upsilon2.center + q;
            let direct = xi * (xi * xi + xi - 2.0 * xi2);
            assert!((c.q1_offsets(p, q) - direct).abs() < 1e-9 * (1.0 + direct.abs()));
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(InflationConfig::new(2.0, 1e-2, 6, 0.0, 1.0, QuadPoints::default()).is_err());
        assert!(InflationConfig::new(32.0, 0.0, 6, 0.0, 1.0, QuadPoints::default()).is_err());
        assert!(InflationConfig::new(32.0, 1e-2, 0, 0.0, 1.0, QuadPoints::default()).is_err());
        let p = SystemParams::couplings(1.0, 0.0, 1.0).unwrap();
        let err = inflation_experiment(0.0, 1.0, &[32.0, 64.0], 1e-2, 6, QuadPoints::default(), &p);
        assert!(matches!(err, Err(Error::Fit(_))));
    }

    #[test]
    fn vanishes_off_support() {
        let c = cfg(16.0);
        let p = SystemParams::couplings(1.0, 0.0, 1.0).unwrap();
        for xi in [0.0, 1.0, 3.0, c.upsilon.center + 0.2, -c.upsilon.center] {
            assert_eq!(second_iterate_hat(xi, 1.0, &c, &p), ZERO);
        }
        assert_eq!(second_iterate_hat(c.upsilon.center, 0.0, &c, &p), ZERO);
        assert!(second_iterate_hat(c.upsilon.center, 1.0, &c, &p).norm() > 0.0);
    }
}
