use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fit::{fit_loglog, FitResult};
use crate::propagators::{SystemParams, BLOW_UP_THRESHOLD};
use crate::spectral::{
    hermitian_part, psi, sobolev_norm, zero_nyquist, ComplexField, Grid, RealField,
    SpaceTimeField, SpectralField, Transform,
};

/// Fewest lattice intervals allowed on `[0, delta]`.
pub const MIN_POINTS_PER_DELTA: usize = 16;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// The `k`-th Picard iterate on the lattice `t_n = -2 delta + n dt`,
/// `dt = 4 delta / nt`. Index `nt / 2` is `t = 0`.
#[derive(Debug, Clone)]
pub struct PicardIterate {
    pub u: SpaceTimeField,
    pub v: SpaceTimeField,
    pub delta: f64,
    pub k: usize,
}

impl PicardIterate {
    /// Iterate 0: `(psi(t) S(t) u0, psi(t) W(t) v0)`.
    pub fn free(u0: &ComplexField, v0: &RealField, delta: f64, nt: usize) -> Result<Self> {
        if u0.grid() != v0.grid() {
            return Err(Error::GridMismatch);
        }
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::Window(format!("delta must be positive, got {delta}")));
        }
        if nt / 4 < MIN_POINTS_PER_DELTA {
            return Err(Error::Resolution(format!(
                "nt = {nt} leaves fewer than {MIN_POINTS_PER_DELTA} points on [0, delta]"
            )));
        }
        let grid = *u0.grid();
        let zeros = vec![ZERO; nt * grid.nx()];
        let (u, v) = assemble(grid, -2.0 * delta, 4.0 * delta / nt as f64, nt, u0, v0, &zeros, &zeros)?;
        Ok(Self { u, v, delta, k: 0 })
    }

    pub fn grid(&self) -> &Grid {
        self.u.grid()
    }

    pub fn zero_index(&self) -> usize {
        self.u.nt() / 2
    }

    /// Lattice indices with `0 <= t <= delta`.
    pub fn forward_indices(&self) -> std::ops::RangeInclusive<usize> {
        let n0 = self.zero_index();
        n0..=n0 + self.u.nt() / 4
    }

    /// `max(sup |u - u'|, sup |v - v'|)` over `0 <= t <= delta`.
    pub fn sup_difference(&self, other: &Self) -> f64 {
        let mut d: f64 = 0.0;
        for n in self.forward_indices() {
            for (a, b) in [(&self.u, &other.u), (&self.v, &other.v)] {
                for (x, y) in a.slice(n).iter().zip(b.slice(n)) {
                    d = d.max((x - y).norm());
                }
            }
        }
        d
    }

    pub fn sup_norm(&self) -> f64 {
        self.u.sup_norm().max(self.v.sup_norm())
    }
}

/// One application of `(Phi_1, Phi_2)`.
///
/// The Duhamel integrals are taken in the interaction picture, where the
/// integrand is `S(-t') psi(t'/delta) N_u` (resp. `W(-t')`), and accumulated
/// outward from `t = 0` by composite Simpson steps. Products are truncated
/// to the 2/3-rule band.
pub fn picard_map(
    it: &PicardIterate,
    u0: &ComplexField,
    v0: &RealField,
    p: &SystemParams,
    delta: f64,
) -> Result<PicardIterate> {
    let grid = *it.grid();
    if *u0.grid() != grid || *v0.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let (nt, dt) = (it.u.nt(), it.u.dt());
    let quarter = 0.25 * nt as f64 * dt;
    if !(delta > 0.0 && delta <= quarter * (1.0 + 1e-12)) {
        return Err(Error::Window(format!(
            "delta = {delta} exceeds the lattice quarter-length {quarter}"
        )));
    }
    if delta / dt < MIN_POINTS_PER_DELTA as f64 - 1e-9 {
        return Err(Error::Resolution(format!(
            "{:.1} lattice steps on [0, delta], need {MIN_POINTS_PER_DELTA}",
            delta / dt
        )));
    }
    let nx = grid.nx();
    let tr = Transform::new(grid);
    let xi = grid.wavenumbers();
    let mut gu = vec![ZERO; nt * nx];
    let mut gv = vec![ZERO; nt * nx];
    for n in 0..nt {
        let t = it.u.time(n);
        let w = psi(t / delta);
        if w == 0.0 {
            continue;
        }
        let (fu, fv) = products(&tr, p, it.u.slice(n), it.v.slice(n), t)?;
        for j in 0..nx {
            if !grid.keeps_mode(j) {
                continue;
            }
            let x = xi[j];
            // -i F[...] and i xi F[...], pulled back by the free flows
            gu[n * nx + j] = Complex64::new(fu[j].im, -fu[j].re) * Complex64::from_polar(w, t * x * x);
            gv[n * nx + j] = fv[j] * Complex64::new(0.0, x) * Complex64::from_polar(w, -t * x * x * x);
        }
    }
    let n0 = nt / 2;
    let mut iu = vec![ZERO; nt * nx];
    let mut iv = vec![ZERO; nt * nx];
    let fwd: Vec<usize> = (n0..nt).collect();
    let bwd: Vec<usize> = (0..=n0).rev().collect();
    for (order, h) in [(&fwd, dt), (&bwd, -dt)] {
        accumulate(&gu, nx, order, h, &mut iu);
        accumulate(&gv, nx, order, h, &mut iv);
    }
    let (u, v) = assemble(grid, it.u.t0(), dt, nt, u0, v0, &iu, &iv)?;
    Ok(PicardIterate {
        u,
        v,
        delta: it.delta,
        k: it.k + 1,
    })
}

fn products(
    tr: &Transform,
    p: &SystemParams,
    u: &[Complex64],
    v: &[Complex64],
    t: f64,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let mut fu = Vec::with_capacity(u.len());
    let mut fv = Vec::with_capacity(u.len());
    for (uj, vj) in u.iter().zip(v) {
        let vr = vj.re;
        if !(uj.re.is_finite() && uj.im.is_finite() && vr.is_finite())
            || uj.norm() > BLOW_UP_THRESHOLD
            || vr.abs() > BLOW_UP_THRESHOLD
        {
            return Err(Error::BlowUp {
                time: t,
                reason: "Picard iterate left the representable range".into(),
            });
        }
        let m = uj.norm_sqr();
        fu.push(uj * (p.alpha * vr + p.beta * m));
        fv.push(Complex64::new(p.gamma * m - 0.5 * vr * vr, 0.0));
    }
    tr.forward_in_place(&mut fu);
    tr.forward_in_place(&mut fv);
    Ok((fu, fv))
}

/// Cumulative integral of `g` along `order`, spacing `h`, written to `out`.
///
/// Even steps are Simpson panels; odd steps add the last interval with the
/// third-order rule `h (-f0 + 8 f1 + 5 f2) / 12`.
fn accumulate(g: &[Complex64], nx: usize, order: &[usize], h: f64, out: &mut [Complex64]) {
    let at = |n: usize, k: usize| g[n * nx + k];
    for k in 0..nx {
        out[order[0] * nx + k] = ZERO;
    }
    for j in 1..order.len() {
        let (dst, prev) = (order[j], order[j - 1]);
        for k in 0..nx {
            let val = if j == 1 {
                let f2 = if order.len() > 2 { at(order[2], k) } else { at(dst, k) };
                (5.0 * at(order[0], k) + 8.0 * at(dst, k) - f2) * (h / 12.0)
            } else if j % 2 == 0 {
                out[order[j - 2] * nx + k]
                    + (at(order[j - 2], k) + 4.0 * at(prev, k) + at(dst, k)) * (h / 3.0)
            } else {
                out[prev * nx + k]
                    + (-at(order[j - 2], k) + 8.0 * at(prev, k) + 5.0 * at(dst, k)) * (h / 12.0)
            };
            out[dst * nx + k] = val;
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    grid: Grid,
    t0: f64,
    dt: f64,
    nt: usize,
    u0: &ComplexField,
    v0: &RealField,
    iu: &[Complex64],
    iv: &[Complex64],
) -> Result<(SpaceTimeField, SpaceTimeField)> {
    let nx = grid.nx();
    let xi = grid.wavenumbers();
    let (u0h, v0h) = (u0.spectrum(), v0.spectrum());
    let mut su = vec![ZERO; nt * nx];
    let mut sv = vec![ZERO; nt * nx];
    for n in 0..nt {
        let t = t0 + n as f64 * dt;
        let w = psi(t);
        let (ru, rv) = (&mut su[n * nx..(n + 1) * nx], &mut sv[n * nx..(n + 1) * nx]);
        for j in 0..nx {
            let x = xi[j];
            ru[j] = (u0h[j] + iu[n * nx + j]) * Complex64::from_polar(w, -t * x * x);
            rv[j] = (v0h[j] + iv[n * nx + j]) * Complex64::from_polar(w, t * x * x * x);
        }
        zero_nyquist(&grid, ru);
        zero_nyquist(&grid, rv);
        hermitian_part(&grid, rv);
    }
    let u = SpaceTimeField::from_spatial_spectra(grid, t0, dt, nt, su)?;
    let v = SpaceTimeField::from_spatial_spectra(grid, t0, dt, nt, sv)?;
    let v = v.map(|z| Complex64::new(z.re, 0.0));
    Ok((u, v))
}

/// Contraction outcome for one data amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRow {
    pub scale: f64,
    /// `||u0||_{H^s} + ||v0||_{H^l}`.
    pub amplitude: f64,
    pub contracts: Vec<bool>,
    /// Largest contracting `delta`, if any.
    pub delta_star: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionProbe {
    pub deltas: Vec<f64>,
    pub rows: Vec<ProbeRow>,
    /// Fit of `ln delta*` against `ln amplitude`; `None` when fewer than three
    /// amplitudes have a contracting `delta`.
    pub fit: Option<FitResult>,
    /// `delta*` never increases with the amplitude.
    pub monotone: bool,
}

/// Runs `iterations` Picard steps per `(scale, delta)` and records whether
/// consecutive sup-differences on `[0, delta]` shrink.
pub fn picard_contraction_probe(
    family: impl Fn(f64) -> (ComplexField, RealField),
    scales: &[f64],
    p: &SystemParams,
    deltas: &[f64],
    iterations: usize,
    nt: usize,
) -> Result<ContractionProbe> {
    if iterations < 3 {
        return Err(Error::InvalidInput("need at least 3 iterations".into()));
    }
    let mut rows = Vec::with_capacity(scales.len());
    for &scale in scales {
        let (u0, v0) = family(scale);
        let amplitude = sobolev_norm(&u0, p.s)? + sobolev_norm(&v0, p.l)?;
        let mut contracts = Vec::with_capacity(deltas.len());
        for &delta in deltas {
            contracts.push(contracts_at(&u0, &v0, p, delta, iterations, nt)?);
        }
        let delta_star = deltas
            .iter()
            .zip(&contracts)
            .filter(|(_, c)| **c)
            .map(|(d, _)| *d)
            .fold(None, |acc: Option<f64>, d| Some(acc.map_or(d, |a| a.max(d))));
        rows.push(ProbeRow {
            scale,
            amplitude,
            contracts,
            delta_star,
        });
    }
    let mut by_amplitude: Vec<&ProbeRow> = rows.iter().collect();
    by_amplitude.sort_by(|a, b| a.amplitude.total_cmp(&b.amplitude));
    let monotone = by_amplitude
        .windows(2)
        .all(|w| w[1].delta_star.unwrap_or(0.0) <= w[0].delta_star.unwrap_or(0.0));
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.delta_star.map(|d| (r.amplitude, d)))
        .collect();
    let fit = if pts.len() >= 3 { fit_loglog(&pts).ok() } else { None };
    Ok(ContractionProbe {
        deltas: deltas.to_vec(),
        rows,
        fit,
        monotone,
    })
}

fn contracts_at(
    u0: &ComplexField,
    v0: &RealField,
    p: &SystemParams,
    delta: f64,
    iterations: usize,
    nt: usize,
) -> Result<bool> {
    let mut it = PicardIterate::free(u0, v0, delta, nt)?;
    let floor = 1e-13 * it.sup_norm().max(f64::MIN_POSITIVE);
    let mut prev: Option<f64> = None;
    for _ in 0..iterations {
        let next = match picard_map(&it, u0, v0, p, delta) {
            Ok(n) => n,
            Err(Error::BlowUp { .. }) => return Ok(false),
            Err(e) => return Err(e),
        };
        let d = next.sup_difference(&it);
        if !d.is_finite() {
            return Ok(false);
        }
        if d <= floor {
            return Ok(true);
        }
        if let Some(q) = prev {
            if d >= q {
                return Ok(false);
            }
        }
        prev = Some(d);
        it = next;
    }
    Ok(true)
}
