//! Integral kernels, the orthogonality conditions on the sphere
//! `|p| = e^a`, the weighted supremum `N_a`, and convergent kernel
//! sequences.

mod bounds;
mod na;
mod projection;
mod sequence;
mod sphere;

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::spectral::{forward_ft, norms, Grid, RealField, SpectralField};

pub use bounds::{
    verify_derivative_bound, verify_derivative_bound_with, verify_hat_bound, DerivativeBoundCheck,
    DerivativeCheckOptions, HatBoundCheck, DERIVATIVE_SLACK, HAT_SLACK,
};
pub use na::{
    compute_na, compute_na_with, lemma_a1_dichotomy, symbol_ratio_distance, DichotomyReport,
    DichotomyRow, NaEstimate, DIVERGENT_BAND, STABLE_VARIATION,
};
pub use projection::{project_orthogonal, project_orthogonal_report, ProjectionReport};
pub use sequence::{make_sequence, KernelSequence, Schedule, ScheduleKind};
pub use sphere::{hat_on_sphere, sphere_points, OrthogonalityReport, DEFAULT_SPHERE_SAMPLES};

/// Residual below `ADMISSIBLE_RESIDUAL * ||G||_1` counts as satisfying the
/// orthogonality conditions.
pub const ADMISSIBLE_RESIDUAL: f64 = 1e-8;

/// Analytic provenance of a kernel.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelFamily {
    /// `c w^{-d} exp(-|x|^2 / 2w^2)`, whose transform is `c exp(-w^2 |p|^2 / 2)`.
    Gaussian { width: f64, amplitude: f64 },
    /// `c exp(1 - 1/(1 - |x - x0|^2/R^2))` inside the ball of radius `R`.
    Bump {
        radius: f64,
        amplitude: f64,
        center: Vec<f64>,
    },
    /// `c1 N(w1) - c2 N(w2)` with `c2` fixed so the transform vanishes on
    /// `|p| = e^a`; `N(w)` is the unit-transform Gaussian above.
    Difference { w1: f64, w2: f64, c1: f64, a: f64 },
    /// Samples read from a field dump.
    File { path: String },
}

impl KernelFamily {
    pub fn tag(&self) -> &'static str {
        match self {
            KernelFamily::Gaussian { .. } => "gaussian",
            KernelFamily::Bump { .. } => "bump",
            KernelFamily::Difference { .. } => "difference",
            KernelFamily::File { .. } => "file",
        }
    }
}

/// Second amplitude of the difference family.
pub fn difference_c2(w1: f64, w2: f64, c1: f64, a: f64) -> f64 {
    c1 * ((w2 * w2 - w1 * w1) * (2.0 * a).exp() / 2.0).exp()
}

/// Sampled kernel with cached `||G||_1` and `||x G||_1`.
#[derive(Debug, Clone)]
pub struct Kernel {
    samples: RealField,
    family: Option<KernelFamily>,
    l1: f64,
    weighted_l1: f64,
    spectrum: OnceLock<SpectralField>,
}

impl Kernel {
    pub fn from_field(samples: RealField, family: Option<KernelFamily>) -> Self {
        let n = norms(&samples);
        Self {
            samples,
            family,
            l1: n.l1,
            weighted_l1: n.weighted_l1,
            spectrum: OnceLock::new(),
        }
    }

    pub fn zero(grid: Grid) -> Self {
        Self::from_field(RealField::zeros(grid), None)
    }

    pub fn samples(&self) -> &RealField {
        &self.samples
    }

    pub fn grid(&self) -> &Grid {
        self.samples.grid()
    }

    pub fn family(&self) -> Option<&KernelFamily> {
        self.family.as_ref()
    }

    pub fn l1(&self) -> f64 {
        self.l1
    }

    pub fn weighted_l1(&self) -> f64 {
        self.weighted_l1
    }

    /// Lattice transform `G^(p_k)`, computed once.
    pub fn spectrum(&self) -> &SpectralField {
        self.spectrum
            .get_or_init(|| forward_ft(&self.samples).expect("kernel samples are finite"))
    }

    /// Orthogonality residual threshold for this kernel.
    pub fn admissibility_threshold(&self) -> f64 {
        ADMISSIBLE_RESIDUAL * self.l1
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be positive, got {v}"
        )))
    }
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be finite, got {v}"
        )))
    }
}

fn gaussian_component(x: &[f64], width: f64, amplitude: f64) -> f64 {
    let d = x.len() as i32;
    let r2: f64 = x.iter().map(|v| v * v).sum();
    amplitude * width.powi(-d) * (-r2 / (2.0 * width * width)).exp()
}

pub fn make_kernel(family: KernelFamily, grid: &Grid) -> Result<Kernel> {
    let d = grid.dim();
    let samples = match &family {
        KernelFamily::Gaussian { width, amplitude } => {
            check_positive("width", *width)?;
            check_finite("amplitude", *amplitude)?;
            let (w, c) = (*width, *amplitude);
            RealField::from_fn(*grid, |x| gaussian_component(x, w, c))?
        }
        KernelFamily::Bump {
            radius,
            amplitude,
            center,
        } => {
            check_positive("radius", *radius)?;
            check_finite("amplitude", *amplitude)?;
            if center.len() != d || center.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "bump center needs {d} finite coordinates"
                )));
            }
            let (r, c) = (*radius, *amplitude);
            RealField::from_fn(*grid, |x| {
                let s2: f64 = x
                    .iter()
                    .zip(center)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    / (r * r);
                if s2 < 1.0 {
                    c * (1.0 - 1.0 / (1.0 - s2)).exp()
                } else {
                    0.0
                }
            })?
        }
        KernelFamily::Difference { w1, w2, c1, a } => {
            check_positive("w1", *w1)?;
            check_positive("w2", *w2)?;
            check_finite("c1", *c1)?;
            check_finite("a", *a)?;
            if (w1 - w2).abs() < 1e-12 * w1.max(*w2) {
                return Err(Error::InvalidParameter(
                    "difference family needs distinct widths".into(),
                ));
            }
            let c2 = difference_c2(*w1, *w2, *c1, *a);
            if !c2.is_finite() {
                return Err(Error::InvalidParameter("second amplitude overflows".into()));
            }
            let (w1, w2, c1) = (*w1, *w2, *c1);
            RealField::from_fn(*grid, |x| {
                gaussian_component(x, w1, c1) - gaussian_component(x, w2, c2)
            })?
        }
        KernelFamily::File { path } => {
            let (field, _) = crate::dump::read_kernel(std::path::Path::new(path))?;
            if field.grid() != grid {
                return Err(Error::GridMismatch);
            }
            field
        }
    };
    Ok(Kernel::from_field(samples, Some(family)))
}

/// `(2 pi)^{-d/2}`.
pub(crate) fn unitary(d: usize) -> f64 {
    (2.0 * PI).powf(-(d as f64) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid1() -> Grid {
        Grid::new(1, 20.0, 1024).unwrap()
    }

    #[test]
    fn gaussian_l1_is_root_two_pi() {
        let k = make_kernel(
            KernelFamily::Gaussian {
                width: 1.0,
                amplitude: 1.0,
            },
            &grid1(),
        )
        .unwrap();
        assert!((k.l1() - (2.0 * PI).sqrt()).abs() < 1e-8);
        // the |x| kink at the origin limits the trapezoid rule to O(h^2)
        let h = grid1().spacing();
        assert!((k.weighted_l1() - 2.0).abs() < h * h);
    }

    #[test]
    fn gaussian_normalization_in_higher_dims() {
        let g = Grid::new(2, 8.0, 64).unwrap();
        let k = make_kernel(
            KernelFamily::Gaussian {
                width: 1.0,
                amplitude: 1.0,
            },
            &g,
        )
        .unwrap();
        assert!((k.l1() - 2.0 * PI).abs() < 1e-8);
        let spec = k.spectrum();
        assert!((spec.coeffs()[0].re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn zero_amplitude_gives_zero_kernel() {
        let k = make_kernel(
            KernelFamily::Gaussian {
                width: 1.0,
                amplitude: 0.0,
            },
            &grid1(),
        )
        .unwrap();
        assert_eq!((k.l1(), k.weighted_l1()), (0.0, 0.0));
    }

    #[test]
    fn cached_norms_match_quadrature() {
        let g = Grid::new(2, 6.0, 32).unwrap();
        let k = make_kernel(
            KernelFamily::Bump {
                radius: 2.0,
                amplitude: 1.5,
                center: vec![0.5, -0.25],
            },
            &g,
        )
        .unwrap();
        let n = norms(k.samples());
        assert!((n.l1 - k.l1()).abs() <= 1e-10 * n.l1);
        assert!((n.weighted_l1 - k.weighted_l1()).abs() <= 1e-10 * n.weighted_l1);
    }

    #[test]
    fn invalid_parameters_rejected() {
        let g = grid1();
        assert!(make_kernel(
            KernelFamily::Gaussian {
                width: 0.0,
                amplitude: 1.0
            },
            &g
        )
        .is_err());
        assert!(make_kernel(
            KernelFamily::Gaussian {
                width: 1.0,
                amplitude: f64::INFINITY
            },
            &g
        )
        .is_err());
        assert!(make_kernel(
            KernelFamily::Difference {
                w1: 1.0,
                w2: 1.0,
                c1: 1.0,
                a: 0.0
            },
            &g
        )
        .is_err());
        assert!(make_kernel(
            KernelFamily::Bump {
                radius: 1.0,
                amplitude: 1.0,
                center: vec![0.0, 0.0]
            },
            &g
        )
        .is_err());
    }

    #[test]
    fn difference_amplitude_balances_on_sphere() {
        // c1 e^{-w1^2/2} = c2 e^{-w2^2/2} at a = 0
        let c2 = difference_c2(1.0, 2.0, 1.0, 0.0);
        assert!((c2 - 1.5f64.exp()).abs() < 1e-12);
        let a = 0.4;
        let c2 = difference_c2(0.7, 1.3, 2.0, a);
        let r2 = (2.0 * a).exp();
        assert!((2.0 * (-0.49 * r2 / 2.0).exp() - c2 * (-1.69 * r2 / 2.0).exp()).abs() < 1e-12);
    }
}
