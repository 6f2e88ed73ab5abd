use std::f64::consts::PI;

use super::Kernel;
use crate::error::{Error, Result};
use crate::spectral::hat_at_many;

pub const DEFAULT_SPHERE_SAMPLES: usize = 128;

/// Sample points on the sphere of the given radius.
///
/// `d = 1` always yields the two points `+-r`; `d = 2` uses uniform angles
/// and `d = 3` a Fibonacci lattice.
pub fn sphere_points(dim: usize, radius: f64, nsamples: usize) -> Vec<Vec<f64>> {
    match dim {
        1 => vec![vec![radius], vec![-radius]],
        2 => (0..nsamples)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / nsamples as f64;
                vec![radius * t.cos(), radius * t.sin()]
            })
            .collect(),
        _ => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..nsamples)
                .map(|i| {
                    let z = 1.0 - (2.0 * i as f64 + 1.0) / nsamples as f64;
                    let rho = (1.0 - z * z).max(0.0).sqrt();
                    let phi = golden * i as f64;
                    vec![
                        radius * rho * phi.cos(),
                        radius * rho * phi.sin(),
                        radius * z,
                    ]
                })
                .collect()
        }
    }
}

/// `|G^(p)|` sampled on `|p| = e^a`.
#[derive(Debug, Clone)]
pub struct OrthogonalityReport {
    pub a: f64,
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub residual: f64,
}

pub fn hat_on_sphere(kernel: &Kernel, a: f64, nsamples: usize) -> Result<OrthogonalityReport> {
    let grid = kernel.grid();
    if grid.dim() > 1 && nsamples < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 sphere samples, got {nsamples}"
        )));
    }
    let radius = a.exp();
    if radius >= grid.nyquist() {
        return Err(Error::SphereOutsideBand {
            radius,
            nyquist: grid.nyquist(),
        });
    }
    Ok(sphere_report(kernel, a, nsamples))
}

/// Unchecked variant used where a value is wanted even off-band.
pub(crate) fn sphere_report(kernel: &Kernel, a: f64, nsamples: usize) -> OrthogonalityReport {
    let points = sphere_points(kernel.grid().dim(), a.exp(), nsamples);
    let values: Vec<f64> = hat_at_many(kernel.samples(), &points)
        .into_iter()
        .map(|c| c.norm())
        .collect();
    let residual = values.iter().copied().fold(0.0, f64::max);
    OrthogonalityReport {
        a,
        points,
        values,
        residual,
    }
}
