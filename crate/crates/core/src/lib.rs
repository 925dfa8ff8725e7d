//! Spectral simulation and verification toolkit for the coupled
//! Schrodinger-Korteweg-de Vries system
//!
//! ```text
//! i u_t + u_xx = alpha u v + beta |u|^2 u
//! v_t + v_xxx + (v^2)_x / 2 = gamma (|u|^2)_x
//! ```
//!
//! Modules:
//! - [`spectral`]: grids, transforms, `H^s` and `X_{s,b}` norms, the `I_{N,s}` multiplier
//! - [`propagators`]: linear groups and the integrating-factor RK4 solver
//! - [`duhamel`]: Picard iteration and the second-iterate inflation experiment
//! - [`invariants`]: mass, momentum-type and energy functionals and their drift
//! - [`estimates`]: empirical bilinear estimate ratios and the sharpness family

pub mod duhamel;
pub mod error;
pub mod estimates;
pub mod fit;
pub mod invariants;
pub mod propagators;
pub mod quadrature;
pub mod spectral;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
