//! Spectral fixed-point solver for stationary nonlocal equations driven by
//! the logarithmic Laplacian,
//!
//! ```text
//! (ln|p| - a) u^(p) = (2 pi)^{d/2} G^(p) F(u, .)^(p),
//! ```
//!
//! posed on a truncated periodic box. The crate provides the unitary
//! transform and symbol ([`spectral`]), admissible kernels and the
//! solvability diagnostics ([`kernels`]), Lipschitz nonlinearities
//! ([`nonlinearity`]), the certified Picard iteration ([`solver`]) and the
//! kernel-sequence convergence study ([`study`]). All statements are about
//! the discrete problem on the box.

pub mod dump;
pub mod error;
pub mod kernels;
pub mod nonlinearity;
pub mod solver;
pub mod spectral;
pub mod study;

pub use error::{Error, Result};
