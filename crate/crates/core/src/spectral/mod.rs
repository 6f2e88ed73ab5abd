//! Periodic-box discretization, the unitary Fourier transform and the
//! logarithmic-Laplacian symbol.

mod fft;
mod field;
mod grid;
mod quadrature;
mod symbol;

pub(crate) use fft::inverse_ft_scaled;
pub use fft::{forward_ft, inverse_ft, periodic_convolution, SYMMETRY_TOLERANCE};
pub use field::{norms, Norms, RealField, SpectralField};
pub use grid::Grid;
pub use quadrature::{hat_at, hat_at_many};
pub use symbol::{
    default_eta, reciprocal_symbol, reciprocal_table, symbol_value, Reciprocal, SymbolSpec,
};

pub(crate) use symbol::reciprocal_at_radius;
