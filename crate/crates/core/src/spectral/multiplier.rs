use super::field::SpectralField;
use super::fft::zero_nyquist;
use super::grid::Grid;
use super::norms::sobolev_norm;
use crate::error::{param, Error, Result};

/// Parameters of the smoothing multiplier `I_{N,s}`.
///
/// The symbol is `1` on `|xi| <= N` and `N^{1-s} |xi|^{s-1}` on `|xi| > 2N`.
/// Between the two it blends geometrically with a quintic smoothstep in
/// `r = log2(|xi|/N)`, which keeps it C^2 and monotone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiplierSpec {
    cutoff: f64,
    s: f64,
}

impl MultiplierSpec {
    pub fn new(cutoff: f64, s: f64) -> Result<Self> {
        if !(cutoff.is_finite() && cutoff >= 2.0) {
            return Err(param("N", format!("cutoff must be finite and >= 2, got {cutoff}")));
        }
        if !(s.is_finite() && s < 1.0) {
            return Err(param("s", format!("index must be finite and < 1, got {s}")));
        }
        Ok(Self { cutoff, s })
    }

    /// A multiplier that is identically one on `grid`.
    pub fn identity_on(grid: &Grid, s: f64) -> Result<Self> {
        Self::new((2.0 * grid.max_wavenumber()).max(2.0), s)
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn symbol(&self, xi: f64) -> f64 {
        let a = xi.abs();
        let n = self.cutoff;
        if a <= n {
            return 1.0;
        }
        let tail = (1.0 - self.s) * (n / a).ln();
        if a > 2.0 * n {
            return tail.exp();
        }
        let r = (a / n).log2();
        (smoothstep(r) * tail).exp()
    }
}

fn smoothstep(r: f64) -> f64 {
    r * r * r * (r * (6.0 * r - 15.0) + 10.0)
}

/// `I_{N,s} f`: pointwise product with the symbol, Nyquist removed.
pub fn apply_multiplier<F: SpectralField>(f: &F, m: &MultiplierSpec) -> F {
    let grid = *f.grid();
    let mut spec: Vec<_> = f
        .spectrum()
        .iter()
        .enumerate()
        .map(|(j, z)| z * m.symbol(grid.xi(j)))
        .collect();
    zero_nyquist(&grid, &mut spec);
    F::from_spectrum(grid, spec)
}

/// Ratios `(|If|_{H^1} / |f|_{H^s}, |If|_{H^1} / (N^{1-s} |f|_{H^s}))`.
///
/// For `0 <= s < 1` and `N >= 2` the first is at least 1 and the second at
/// most 2, from the pointwise bounds on `m(xi) <xi>^{1-s}`.
pub fn multiplier_equivalence_check<F: SpectralField>(
    f: &F,
    m: &MultiplierSpec,
) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&m.s()) {
        return Err(param("s", "equivalence constants need 0 <= s < 1"));
    }
    let base = sobolev_norm(f, m.s())?;
    if base == 0.0 {
        return Err(Error::UndefinedRatio("field has zero H^s norm".into()));
    }
    let smoothed = sobolev_norm(&apply_multiplier(f, m), 1.0)?;
    let lower = smoothed / base;
    Ok((lower, lower / m.cutoff().powf(1.0 - m.s())))
}
