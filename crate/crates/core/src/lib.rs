//! Pseudo-spectral solver and numerical verification suite for Cauchy problems
//! `du/dt = psi(t, -i grad) u + f` whose symbol `psi(t, xi)` is only measurable
//! in time and may change sign.
//!
//! The crate is organized bottom-up:
//!
//! - [`spectral`]: grids, fields and the continuous-normalized Fourier pair.
//! - [`symbols`]: `psi(t, xi)` and its time integral for second-order,
//!   logarithmic, tabulated and closure symbols.
//! - [`propagator`]: overflow-safe multipliers, the solution representation,
//!   kernels.
//! - [`wellposedness`]: quantitative checks of the integrability hypotheses.
//! - [`spaces`]: weighted Bessel potential norms and their inequalities.
//! - [`verify`]: representation, weak-form and Gronwall residuals.
//! - [`cli`]: batch runner behind the `psidyn` binary.

pub mod cli;
pub mod error;
pub mod propagator;
pub mod quadrature;
pub mod spaces;
pub mod spectral;
pub mod symbols;
pub mod verify;
pub mod wellposedness;

pub use error::{Error, Result};
pub use num_complex::Complex64;
