use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{unitary, Kernel};
use crate::spectral::hat_at;

/// Additive slack on `max |G^| <= (2 pi)^{-d/2} ||G||_1`.
pub const HAT_SLACK: f64 = 1e-10;
/// Additive slack on `|dG^/d|p|| <= (2 pi)^{-d/2} ||x G||_1`.
pub const DERIVATIVE_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct HatBoundCheck {
    pub max_hat: f64,
    pub bound: f64,
    /// `bound + HAT_SLACK - max_hat`.
    pub margin: f64,
    /// Mode attaining the maximum.
    pub worst_mode: Vec<f64>,
    pub passed: bool,
}

/// Checks the sup bound of the transform over every lattice mode.
pub fn verify_hat_bound(kernel: &Kernel) -> HatBoundCheck {
    let grid = kernel.grid();
    let (worst, max_hat) = kernel
        .spectrum()
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, c)| (k, c.norm()))
        .fold(
            (0, 0.0),
            |best, cur| if cur.1 > best.1 { cur } else { best },
        );
    let bound = unitary(grid.dim()) * kernel.l1();
    let margin = bound + HAT_SLACK - max_hat;
    HatBoundCheck {
        max_hat,
        bound,
        margin,
        worst_mode: grid.mode(worst)[..grid.dim()].to_vec(),
        passed: margin >= 0.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeCheckOptions {
    /// Random directions in addition to the coordinate axes (ignored in 1D).
    pub rays: usize,
    /// Radii per ray, log-spaced from a quarter mode spacing to Nyquist.
    pub radii: usize,
    /// Central-difference step.
    pub step: f64,
    pub seed: u64,
}

impl Default for DerivativeCheckOptions {
    fn default() -> Self {
        Self {
            rays: 8,
            radii: 48,
            step: 1e-5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeBoundCheck {
    pub max_derivative: f64,
    pub bound: f64,
    /// `bound + DERIVATIVE_SLACK - max_derivative`.
    pub margin: f64,
    pub worst_point: Vec<f64>,
    pub passed: bool,
}

pub fn verify_derivative_bound(kernel: &Kernel) -> DerivativeBoundCheck {
    verify_derivative_bound_with(kernel, &DerivativeCheckOptions::default())
}

fn directions(dim: usize, rays: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for axis in 0..dim {
        for sign in [1.0, -1.0] {
            let mut e = vec![0.0; dim];
            e[axis] = sign;
            out.push(e);
        }
    }
    if dim == 1 {
        return out;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..rays {
        let phi = rng.random_range(0.0..2.0 * PI);
        let e = if dim == 2 {
            vec![phi.cos(), phi.sin()]
        } else {
            let z: f64 = rng.random_range(-1.0..1.0);
            let rho = (1.0 - z * z).sqrt();
            vec![rho * phi.cos(), rho * phi.sin(), z]
        };
        out.push(e);
    }
    out
}

/// Central differences of `G^` along rays, compared with the weighted-norm
/// bound on the radial derivative.
pub fn verify_derivative_bound_with(
    kernel: &Kernel,
    opts: &DerivativeCheckOptions,
) -> DerivativeBoundCheck {
    let grid = kernel.grid();
    let lo = 0.25 * grid.mode_spacing();
    let hi = grid.nyquist() - 2.0 * opts.step;
    let count = opts.radii.max(2);
    let radii: Vec<f64> = (0..count)
        .map(|i| lo * (hi / lo).powf(i as f64 / (count - 1) as f64))
        .collect();
    let mut max_derivative = 0.0f64;
    let mut worst_point = vec![0.0; grid.dim()];
    for e in directions(grid.dim(), opts.rays, opts.seed) {
        for &r in &radii {
            let at = |s: f64| -> Vec<f64> { e.iter().map(|c| c * s).collect() };
            let plus = hat_at(kernel.samples(), &at(r + opts.step));
            let minus = hat_at(kernel.samples(), &at(r - opts.step));
            let slope = (plus - minus).norm() / (2.0 * opts.step);
            if slope > max_derivative {
                max_derivative = slope;
                worst_point = at(r);
            }
        }
    }
    let bound = unitary(grid.dim()) * kernel.weighted_l1();
    let margin = bound + DERIVATIVE_SLACK - max_derivative;
    DerivativeBoundCheck {
        max_derivative,
        bound,
        margin,
        worst_point,
        passed: margin >= 0.0,
    }
}
