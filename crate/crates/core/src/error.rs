use thiserror::Error;

use crate::solver::ContractionCertificate;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported dimension {0}; expected 1, 2 or 3")]
    UnsupportedDimension(usize),

    #[error("points per axis must be even and at least 8, got {0}")]
    InvalidResolution(usize),

    #[error("box half-width must be positive and finite, got {0}")]
    InvalidHalfWidth(f64),

    #[error("field has {found} samples, grid expects {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("spectral field is not conjugate-symmetric (imaginary residue {imag:.3e} vs norm {norm:.3e})")]
    NotConjugateSymmetric { imag: f64, norm: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("sphere radius {radius} lies outside the resolved band (Nyquist {nyquist})")]
    SphereOutsideBand { radius: f64, nyquist: f64 },

    #[error("taper width {taper} is too narrow for the grid ({modes} modes in its band)")]
    TaperTooNarrow { taper: f64, modes: usize },

    #[error("limit kernel is not admissible: orthogonality residual {residual:.3e} exceeds {threshold:.3e}")]
    InadmissibleLimit { residual: f64, threshold: f64 },

    #[error("contraction certificate failed (q = {q:.6}, orthogonality residual {residual:.3e})", q = .0.q, residual = .0.orth_residual)]
    CertificateFailed(Box<ContractionCertificate>),

    #[error("certificate for sequence member {m} failed (q = {q:.6})")]
    MemberCertificateFailed { m: usize, q: f64 },

    #[error("non-finite intermediate in the Picard map")]
    BlowUp,

    #[error("malformed field dump: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
