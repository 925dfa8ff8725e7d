//! Periodic grids, Fourier transforms, Sobolev and Bourgain norms, and the
//! smoothing multiplier `I_{N,s}`.
//!
//! The real line is truncated to the periodic box `[-L, L)`. Transforms use
//! the Riemann-sum convention (forward weight `dx`, inverse weight `1/(2L)`)
//! so discrete norms approximate their continuum counterparts.

mod fft;
mod field;
mod grid;
mod multiplier;
mod norms;
mod spacetime;
mod window;

pub use fft::{dealias, hermitian_part, zero_nyquist, Fft1d, Transform};
pub use field::{ComplexField, RealField, SpectralField};
pub use grid::Grid;
pub use multiplier::{apply_multiplier, multiplier_equivalence_check, MultiplierSpec};
pub use norms::{bracket, derivative, l2_norm, lp_norm_pow, sobolev_norm};
pub use spacetime::{apply_window, xsb_norm, Dispersion, NormSpec, SpaceTimeField, TIME_PADDING};
pub use window::psi;
