//! Empirical bilinear and trilinear space-time estimates.
//!
//! Each [`EstimateKind`] names an inequality `LHS <= C * RHS` between
//! `X_{s,b}` / `Y_{l,c}` norms. [`bilinear_ratio`] evaluates `LHS / RHS` on
//! sampled fields; [`counterexample_family`] evaluates it analytically on the
//! indicator data that break the KdV-output estimate when `l > 4s`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::duhamel::{resonance_q1, upsilon_boxes, FrequencyInterval};
use crate::error::{param, Error, Result};
use crate::quadrature::GaussLegendre;
use crate::spectral::{
    apply_window, bracket, dealias, xsb_norm, Dispersion, Grid, NormSpec, SpaceTimeField, Transform,
};

/// Default value for exponents written `1/2+`.
pub const HALF_PLUS: f64 = 0.51;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateKind {
    /// `|u v|_{X_{s,b'-1}} <= C |u|_{X_{s,b}} |v|_{Y_{l,c}}`.
    SchrodingerProduct,
    /// `|d_x(u1 conj u2)|_{Y_{l,c'-1}} <= C |u1|_{X_{s,b}} |u2|_{X_{s,b}}`.
    KdvOutput,
    /// `|u1 u2 conj u3|_{L^2_{xt}} <= C prod |ui|_{X_{s,b}}`.
    Trilinear,
    /// `|d_x(v1 v2)|_{Y_{l,c'-1}} <= C |v1|_{Y_{l,c}} |v2|_{Y_{l,c}}`.
    KdvBilinear,
}

impl EstimateKind {
    pub fn arity(self) -> usize {
        match self {
            EstimateKind::Trilinear => 3,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EstimateKind::SchrodingerProduct => "schrodinger-product",
            EstimateKind::KdvOutput => "kdv-output",
            EstimateKind::Trilinear => "trilinear",
            EstimateKind::KdvBilinear => "kdv-bilinear",
        }
    }

    /// Dispersion of each input's norm.
    fn input_dispersions(self) -> &'static [Dispersion] {
        match self {
            EstimateKind::SchrodingerProduct => &[Dispersion::Schrodinger, Dispersion::Airy],
            EstimateKind::KdvOutput => &[Dispersion::Schrodinger, Dispersion::Schrodinger],
            EstimateKind::Trilinear => &[Dispersion::Schrodinger; 3],
            EstimateKind::KdvBilinear => &[Dispersion::Airy, Dispersion::Airy],
        }
    }
}

impl std::str::FromStr for EstimateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "schrodinger-product" => Ok(EstimateKind::SchrodingerProduct),
            "kdv-output" => Ok(EstimateKind::KdvOutput),
            "trilinear" => Ok(EstimateKind::Trilinear),
            "kdv-bilinear" => Ok(EstimateKind::KdvBilinear),
            other => Err(param("kind", format!("unknown estimate kind `{other}`"))),
        }
    }
}

/// Sampling lattice for an estimate: `nx` points on `[-L, L)`, `nt` times on `[-T, T)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolution {
    pub nx: usize,
    pub nt: usize,
    pub half_length: f64,
    pub horizon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateCase {
    pub kind: EstimateKind,
    pub s: f64,
    pub l: f64,
    pub b: f64,
    pub b_prime: f64,
    pub c: f64,
    pub c_prime: f64,
    pub resolution: Resolution,
}

impl EstimateCase {
    pub fn new(kind: EstimateKind, s: f64, l: f64, resolution: Resolution) -> Self {
        Self {
            kind,
            s,
            l,
            b: HALF_PLUS,
            b_prime: HALF_PLUS,
            c: HALF_PLUS,
            c_prime: HALF_PLUS,
            resolution,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, x) in [
            ("b", self.b),
            ("b_prime", self.b_prime),
            ("c", self.c),
            ("c_prime", self.c_prime),
        ] {
            if !(x > 0.0 && x < 1.0) {
                return Err(param(name, format!("modulation index must lie in (0, 1), got {x}")));
            }
        }
        if !(self.s.is_finite() && self.l.is_finite()) {
            return Err(param("s", "indices must be finite"));
        }
        let r = &self.resolution;
        if !(r.half_length > 0.0 && r.horizon > 0.0) {
            return Err(param("resolution", "L and T must be positive"));
        }
        Grid::new(r.nx, r.half_length)?;
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.resolution.nx, self.resolution.half_length)
    }

    /// Norm index of input `i`.
    fn input_norm(&self, i: usize) -> NormSpec {
        let d = self.kind.input_dispersions()[i];
        match d {
            Dispersion::Airy => NormSpec::new(self.l, self.c, d),
            _ => NormSpec::new(self.s, self.b, d),
        }
    }

    fn output_norm(&self) -> NormSpec {
        match self.kind {
            EstimateKind::SchrodingerProduct => {
                NormSpec::new(self.s, self.b_prime - 1.0, Dispersion::Schrodinger)
            }
            EstimateKind::KdvOutput | EstimateKind::KdvBilinear => {
                NormSpec::new(self.l, self.c_prime - 1.0, Dispersion::Airy)
            }
            EstimateKind::Trilinear => NormSpec::new(0.0, 0.0, Dispersion::Schrodinger),
        }
    }
}

/// One evaluated sample of an estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioSample {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// `LHS / RHS` for a two-input case.
pub fn bilinear_ratio(case: &EstimateCase, u: &SpaceTimeField, v: &SpaceTimeField) -> Result<RatioSample> {
    multilinear_ratio(case, &[u, v])
}

/// `LHS / RHS` for any case; `inputs.len()` must equal the case's arity.
///
/// Products are formed slice by slice in physical space and truncated to
/// the 2/3-rule band; derivatives are spectral.
pub fn multilinear_ratio(case: &EstimateCase, inputs: &[&SpaceTimeField]) -> Result<RatioSample> {
    case.validate()?;
    if inputs.len() != case.kind.arity() {
        return Err(Error::InvalidInput(format!(
            "{} takes {} inputs, got {}",
            case.kind.name(),
            case.kind.arity(),
            inputs.len()
        )));
    }
    let first = inputs[0];
    for f in inputs {
        if !first.same_lattice(f) {
            return Err(Error::GridMismatch);
        }
        if f.window().is_none() {
            return Err(Error::Window("estimate inputs must be windowed".into()));
        }
    }
    let rhs = inputs
        .iter()
        .enumerate()
        .map(|(i, f)| xsb_norm(f, &case.input_norm(i)))
        .product::<Result<f64>>()?;
    let product = form_product(case.kind, inputs)?;
    let lhs = xsb_norm(&product, &case.output_norm())?;
    if rhs == 0.0 {
        return Err(Error::UndefinedRatio(format!(
            "right-hand side vanishes (lhs = {lhs:e})"
        )));
    }
    Ok(RatioSample {
        lhs,
        rhs,
        ratio: lhs / rhs,
    })
}

fn form_product(kind: EstimateKind, inputs: &[&SpaceTimeField]) -> Result<SpaceTimeField> {
    let grid = *inputs[0].grid();
    let nx = grid.nx();
    let nt = inputs[0].nt();
    let tr = Transform::new(grid);
    let xi = grid.wavenumbers();
    let mut out = Vec::with_capacity(nx * nt);
    for n in 0..nt {
        let slices: Vec<&[Complex64]> = inputs.iter().map(|f| f.slice(n)).collect();
        let mut prod: Vec<Complex64> = (0..nx)
            .map(|j| match kind {
                EstimateKind::SchrodingerProduct | EstimateKind::KdvBilinear => {
                    slices[0][j] * slices[1][j]
                }
                EstimateKind::KdvOutput => slices[0][j] * slices[1][j].conj(),
                EstimateKind::Trilinear => slices[0][j] * slices[1][j] * slices[2][j].conj(),
            })
            .collect();
        tr.forward_in_place(&mut prod);
        dealias(&grid, &mut prod);
        if matches!(kind, EstimateKind::KdvOutput | EstimateKind::KdvBilinear) {
            for (z, x) in prod.iter_mut().zip(&xi) {
                *z *= Complex64::new(0.0, *x);
            }
        }
        tr.inverse_in_place(&mut prod);
        out.extend(prod);
    }
    let f = inputs[0];
    Ok(SpaceTimeField::new(grid, f.t0(), f.dt(), nt, out)?.with_window_tag(f.window()))
}

/// A frequency-localized random field
/// `psi(t/delta) sum_{k,m} g_{km} exp(i xi_k x - i phi(xi_k) t + i sigma_m t)`,
/// with `g` unit-variance complex Gaussians over the modes `k` in `modes`
/// and modulations `sigma_m = 2 pi m / T` with `|m| <= band`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizedSpec {
    pub modes: (i64, i64),
    pub band: i64,
    pub dispersion: Dispersion,
}

pub fn localized_field(
    grid: Grid,
    lattice: (f64, f64, usize),
    delta: f64,
    spec: &LocalizedSpec,
    rng: &mut impl Rng,
) -> Result<SpaceTimeField> {
    let (t0, dt, nt) = lattice;
    let period = dt * nt as f64;
    let mut terms = Vec::new();
    for k in spec.modes.0..=spec.modes.1 {
        let x = grid.frequency_spacing() * k as f64;
        let phi = spec.dispersion.symbol(x);
        for m in -spec.band..=spec.band {
            let g = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
                * std::f64::consts::FRAC_1_SQRT_2;
            terms.push((k, -phi + 2.0 * std::f64::consts::PI * m as f64 / period, g));
        }
    }
    let nx = grid.nx();
    let tr = Transform::new(grid);
    let mut spectra = vec![Complex64::new(0.0, 0.0); nx * nt];
    for n in 0..nt {
        let t = t0 + n as f64 * dt;
        let row = &mut spectra[n * nx..(n + 1) * nx];
        for &(k, w, g) in &terms {
            row[grid.slot(k)] += g * Complex64::from_polar(1.0, w * t);
        }
        for z in row.iter_mut() {
            *z *= grid.length();
        }
        tr.inverse_in_place(row);
    }
    let field = SpaceTimeField::new(grid, t0, dt, nt, spectra)?;
    apply_window(&field, delta)
}

/// Ratio statistics over an ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub samples: Vec<RatioSample>,
    pub max: f64,
    pub median: f64,
}

impl EnsembleStats {
    fn from_samples(samples: Vec<RatioSample>) -> Self {
        let mut r: Vec<f64> = samples.iter().map(|s| s.ratio).collect();
        r.sort_by(f64::total_cmp);
        let median = if r.is_empty() {
            f64::NAN
        } else if r.len() % 2 == 1 {
            r[r.len() / 2]
        } else {
            0.5 * (r[r.len() / 2 - 1] + r[r.len() / 2])
        };
        Self {
            max: r.last().copied().unwrap_or(f64::NAN),
            median,
            samples,
        }
    }
}

/// Random frequency-localized ensemble for `case`.
///
/// Member `i` draws from stream `i` of a ChaCha generator seeded with `seed`,
/// so members are independent of evaluation order. Modes are drawn in
/// physical frequency `|xi| <= xi_max`, so doubling `nx` at fixed `L`
/// reproduces the same continuum fields.
pub fn random_ensemble(case: &EstimateCase, members: usize, seed: u64, xi_max: f64) -> Result<EnsembleStats> {
    case.validate()?;
    let grid = case.grid()?;
    let r = case.resolution;
    let nt = r.nt;
    let dt = 2.0 * r.horizon / nt as f64;
    let lattice = (-r.horizon, dt, nt);
    let delta = 0.5 * r.horizon;
    let kmax = (xi_max / grid.frequency_spacing()).floor() as i64;
    if kmax < 1 || 3 * kmax > grid.dealias_cutoff() {
        return Err(param(
            "xi_max",
            format!("needs 1 <= xi_max / (pi / L) <= {}", grid.dealias_cutoff() / 3),
        ));
    }
    let samples = (0..members)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let fields = case
                .kind
                .input_dispersions()
                .iter()
                .map(|&d| {
                    let centre = rng.random_range(-kmax..=kmax);
                    let half = rng.random_range(0..=2i64);
                    let lo = (centre - half).max(-kmax);
                    let hi = (centre + half).min(kmax);
                    let spec = LocalizedSpec {
                        modes: (lo, hi),
                        band: rng.random_range(0..=2i64),
                        dispersion: d,
                    };
                    localized_field(grid, lattice, delta, &spec, &mut rng)
                })
                .collect::<Result<Vec<_>>>()?;
            let refs: Vec<&SpaceTimeField> = fields.iter().collect();
            multilinear_ratio(case, &refs)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EnsembleStats::from_samples(samples))
}

/// Restricted-window evaluation of the KdV-output estimate on indicator data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Counterexample {
    pub big_n: f64,
    pub lhs: f64,
    pub norm_u1: f64,
    pub norm_u2: f64,
    pub ratio: f64,
    /// `max |xi (xi^2 + xi - 2 xi_2)|` over the quadrature nodes of `Upsilon x Upsilon_2`.
    pub max_abs_q1: f64,
    /// `Upsilon - Upsilon_2` lies in `Upsilon_1`.
    pub support_inside: bool,
}

const U1_BAND: f64 = 100.0;
const U2_BAND: f64 = 10.0;
const OUT_BAND: f64 = 10.0;

/// `int_{-a}^{a} <sigma>^{2b} d sigma`.
fn modulation_weight(a: f64, b: f64, rule: &GaussLegendre) -> f64 {
    let mut edges = vec![0.0];
    let mut e = 1.0;
    while e < a {
        edges.push(e);
        e *= 8.0;
    }
    edges.push(a);
    2.0 * edges
        .windows(2)
        .map(|w| rule.integrate(w[0], w[1], |x| bracket(x).powf(2.0 * b)))
        .sum::<f64>()
}

/// `|{sigma_2 : |sigma_2| <= 10, |t - sigma_2| <= 100}|`.
fn tau_overlap(t: f64) -> f64 {
    let lo = (-U2_BAND).max(t - U1_BAND);
    let hi = U2_BAND.min(t + U1_BAND);
    (hi - lo).max(0.0)
}

/// Norms of `u1_hat = chi{xi in Upsilon_1, |tau + xi^2| <= 100}` and of `u2`,
/// where `conj u2` has spectrum `chi{xi in Upsilon_2, |tau - xi^2| <= 10}`.
/// The left side is restricted to `{xi in Upsilon, |tau - xi^3| <= 10}`.
///
/// Space-time transforms are unnormalised, so products pick up `(2 pi)^-2`
/// and norms `(2 pi)^-1`.
pub fn counterexample_family(big_n: f64, case: &EstimateCase, points: usize) -> Result<Counterexample> {
    if case.kind != EstimateKind::KdvOutput {
        return Err(param("kind", "the counterexample family tests the kdv-output estimate"));
    }
    case.validate()?;
    if big_n < 16.0 {
        log::warn!("N = {big_n} is below 16; the asymptotic regime may not be reached");
    }
    let [ups, ups1, ups2] = upsilon_boxes(big_n)?;
    let rule = GaussLegendre::new(points.max(8));
    let two_pi_sq = 4.0 * std::f64::consts::PI * std::f64::consts::PI;

    let space = |iv: &FrequencyInterval, s: f64| rule.integrate(iv.lo(), iv.hi(), |x| bracket(x).powf(2.0 * s));
    let norm_u1 = (space(&ups1, case.s) * modulation_weight(U1_BAND, case.b, &rule) / two_pi_sq).sqrt();
    let norm_u2 = (space(&ups2, case.s) * modulation_weight(U2_BAND, case.b, &rule) / two_pi_sq).sqrt();

    let c = ups.center;
    let (w, w1, w2) = (ups.half_width, ups1.half_width, ups2.half_width);
    let b_out = case.c_prime - 1.0;
    let mut max_abs_q1: f64 = 0.0;
    let mut lhs2 = 0.0;
    for (p, wp) in rule.on(-w, w) {
        let xi = c + p;
        let lo = (-w2).max(p - w1);
        let hi = w2.min(p + w1);
        let nodes: Vec<(f64, f64)> = if lo < hi { rule.on(lo, hi).collect() } else { Vec::new() };
        for &(q, _) in &nodes {
            max_abs_q1 = max_abs_q1.max(resonance_q1(c, p, q).abs());
        }
        let inner: f64 = [(-OUT_BAND, 0.0), (0.0, OUT_BAND)]
            .iter()
            .flat_map(|&(a, b)| rule.on(a, b))
            .map(|(sigma, ws)| {
                let conv: f64 = nodes
                    .iter()
                    .map(|&(q, wq)| wq * tau_overlap(sigma + resonance_q1(c, p, q)))
                    .sum::<f64>()
                    / two_pi_sq;
                ws * bracket(sigma).powf(2.0 * b_out) * conv * conv
            })
            .sum();
        lhs2 += wp * xi * xi * bracket(xi).powf(2.0 * case.l) * inner;
    }
    let lhs = (lhs2 / two_pi_sq).sqrt();
    let offset = (ups.center - ups2.center - ups1.center).abs();
    Ok(Counterexample {
        big_n,
        lhs,
        norm_u1,
        norm_u2,
        ratio: lhs / (norm_u1 * norm_u2),
        max_abs_q1,
        support_inside: offset + w + w2 <= w1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn res() -> Resolution {
        Resolution {
            nx: 64,
            nt: 64,
            half_length: 4.0 * std::f64::consts::PI,
            horizon: 2.0,
        }
    }

    #[test]
    fn modulation_weight_closed_forms() {
        let rule = GaussLegendre::new(32);
        assert!((modulation_weight(100.0, 0.0, &rule) - 200.0).abs() < 1e-10);
        // <x>^2 integrates to 2a + 2a^3/3
        let exact = 20.0 + 2000.0 / 3.0;
        assert!((modulation_weight(10.0, 1.0, &rule) - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn tau_overlap_is_full_on_the_window() {
        for t in [-10.2, -3.0, 0.0, 9.9, 10.2] {
            assert_eq!(tau_overlap(t), 20.0);
        }
        assert_eq!(tau_overlap(100.0), 10.0);
        assert_eq!(tau_overlap(200.0), 0.0);
    }

    #[test]
    fn case_validation() {
        let mut case = EstimateCase::new(EstimateKind::KdvOutput, 0.0, 1.0, res());
        assert!(case.validate().is_ok());
        case.b = 1.0;
        assert!(case.validate().is_err());
        assert!("bogus".parse::<EstimateKind>().is_err());
        assert_eq!("trilinear".parse::<EstimateKind>().unwrap(), EstimateKind::Trilinear);
    }

    #[test]
    fn arity_and_window_are_checked() {
        let case = EstimateCase::new(EstimateKind::Trilinear, 0.0, 0.0, res());
        let g = case.grid().unwrap();
        let f = SpaceTimeField::zeros(g, -2.0, 4.0 / 64.0, 64).unwrap();
        assert!(matches!(bilinear_ratio(&case, &f, &f), Err(Error::InvalidInput(_))));
        let case = EstimateCase::new(EstimateKind::KdvOutput, 0.0, 0.0, res());
        assert!(matches!(bilinear_ratio(&case, &f, &f), Err(Error::Window(_))));
    }
}
