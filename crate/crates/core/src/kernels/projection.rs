//! Projection onto kernels whose transform vanishes on `|p| = e^a`.
//!
//! The correction is a real combination of localized fields
//! `phi_s = (-Delta)^k [P_s(x) exp(-|x|^2 / 2w^2)]`, where `P_s` runs over
//! solid harmonics of degree `l`. The transform of `phi_s` is
//! `(-i)^l |p|^{2k} P_s(p) w^{2l+d} exp(-w^2 |p|^2 / 2)`, so on the sphere
//! each field responds with a single spherical harmonic. With
//! `w = sqrt(2k) e^{-a}` the degree-0 profile peaks on the sphere and has
//! relative radial width about `1 / (2 sqrt(k))`; the taper fixes
//! `k = ceil(1 / taper^2)`.
//!
//! Coefficients are a least-squares fit of the off-grid transform of `G`
//! on a dense point set of the sphere, raising the degree until the fit is
//! exact to rounding.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rustfft::num_complex::Complex64;

use super::sphere::{sphere_points, sphere_report, DEFAULT_SPHERE_SAMPLES};
use super::Kernel;
use crate::error::{Error, Result};
use crate::spectral::{hat_at_many, Grid, RealField, SymbolSpec};

const FIT_TOLERANCE: f64 = 1e-12;
/// Largest admissible ratio of a correction field at the box edge, or of
/// its transform at the first alias frequency, to the respective peak.
const FOOTPRINT_TOLERANCE: f64 = 1e-13;
const SINGULAR_CUTOFF: f64 = 1e-12;
const DEGREES_2D: [usize; 10] = [0, 1, 2, 4, 8, 12, 16, 24, 32, 48];
const DEGREES_3D: [usize; 8] = [0, 1, 2, 4, 6, 8, 10, 12];

#[derive(Debug, Clone)]
pub struct ProjectionReport {
    pub kernel: Kernel,
    pub residual_before: f64,
    pub residual_after: f64,
    /// Largest misfit of the harmonic model at the fitting points.
    pub fit_residual: f64,
    /// Maximal angular degree of the correction.
    pub degree: usize,
    /// Power `k` of the Laplacian in the correction fields.
    pub order: usize,
    /// Gaussian width `w` of the correction fields.
    pub width: f64,
    /// Lattice modes with `||p| - e^a| <= taper e^a / 2`.
    pub band_modes: usize,
    /// `||G' - G||_1 / ||G||_1`, zero for the zero kernel.
    pub relative_change: f64,
}

pub fn project_orthogonal(kernel: &Kernel, spec: &SymbolSpec, taper: f64) -> Result<Kernel> {
    Ok(project_orthogonal_report(kernel, spec, taper)?.kernel)
}

/// Real angular basis up to `degree`, paired with the degree of each entry.
fn angular_basis(unit: &[f64], degree: usize) -> Vec<(usize, f64)> {
    match unit.len() {
        1 => vec![(0, 1.0), (1, unit[0].signum())],
        2 => {
            let theta = unit[1].atan2(unit[0]);
            let mut out = vec![(0, 1.0)];
            for m in 1..=degree {
                let mt = m as f64 * theta;
                out.push((m, mt.cos()));
                out.push((m, mt.sin()));
            }
            out
        }
        _ => real_harmonics(unit, degree),
    }
}

/// Real spherical harmonics from fully normalized associated Legendre
/// functions.
fn real_harmonics(unit: &[f64], degree: usize) -> Vec<(usize, f64)> {
    let z = unit[2].clamp(-1.0, 1.0);
    let s = (1.0 - z * z).max(0.0).sqrt();
    let phi = unit[1].atan2(unit[0]);
    let size = degree + 1;
    let mut p = vec![vec![0.0; size]; size];
    p[0][0] = 1.0;
    for m in 0..size {
        if m > 0 {
            let mf = m as f64;
            p[m][m] = ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s * p[m - 1][m - 1];
        }
        if m + 1 < size {
            p[m + 1][m] = (2.0 * m as f64 + 3.0).sqrt() * z * p[m][m];
        }
        for l in m + 2..size {
            let (lf, mf) = (l as f64, m as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
            p[l][m] = a * (z * p[l - 1][m] - b * p[l - 2][m]);
        }
    }
    let mut out = Vec::with_capacity(size * size);
    for (l, row) in p.iter().enumerate() {
        out.push((l, row[0]));
        for (m, value) in row.iter().enumerate().take(l + 1).skip(1) {
            let mp = m as f64 * phi;
            out.push((l, value * mp.cos()));
            out.push((l, value * mp.sin()));
        }
    }
    out
}

/// Coefficients in `t = r^2 / w^2` of `Q_k` with
/// `(-Delta_D)^k e^{-t/2} = Q_k(t) e^{-t/2}` for the radial Laplacian in
/// `D` dimensions.
fn laplacian_power(k: usize, big_d: f64, w: f64) -> Vec<f64> {
    let mut q = vec![1.0];
    for _ in 0..k {
        let dq: Vec<f64> = (1..q.len()).map(|j| j as f64 * q[j]).collect();
        let ddq: Vec<f64> = (1..dq.len()).map(|j| j as f64 * dq[j]).collect();
        let mut next = vec![0.0; q.len() + 1];
        for (j, c) in ddq.iter().enumerate() {
            next[j + 1] += 4.0 * c;
        }
        for (j, c) in dq.iter().enumerate() {
            next[j] += 2.0 * big_d * c;
            next[j + 1] -= 4.0 * c;
        }
        for (j, c) in q.iter().enumerate() {
            next[j + 1] += c;
            next[j] -= big_d * c;
        }
        q = next.iter().map(|c| -c / (w * w)).collect();
    }
    q
}

fn poly(q: &[f64], t: f64) -> f64 {
    q.iter().rev().fold(0.0, |acc, c| acc * t + c)
}

struct Correction {
    dim: usize,
    sphere: f64,
    order: usize,
    width: f64,
}

impl Correction {
    /// Radial envelope `r^l Q(r^2/w^2) e^{-r^2/2w^2}` for degree `l`.
    fn envelope(&self, l: usize) -> impl Fn(f64) -> f64 {
        // a solid harmonic of degree l turns the Laplacian into the radial
        // one in d + 2l dimensions
        let q = laplacian_power(self.order, (self.dim + 2 * l) as f64, self.width);
        let w = self.width;
        move |r: f64| {
            let t = r * r / (w * w);
            r.powi(l as i32) * poly(&q, t) * (-0.5 * t).exp()
        }
    }

    /// Transform amplitude on the sphere,
    /// `w^{2l+d} e^{(2k+l) a} e^{-w^2 e^{2a}/2}`.
    fn norm(&self, l: usize) -> f64 {
        let w = self.width;
        w.powi((2 * l + self.dim) as i32)
            * self.sphere.powi((2 * self.order + l) as i32)
            * (-0.5 * w * w * self.sphere * self.sphere).exp()
    }

    fn footprint(&self, l: usize, grid: &Grid) -> f64 {
        let env = self.envelope(l);
        let edge = grid.half_width() - grid.spacing();
        let far = grid.half_width() * (self.dim as f64).sqrt();
        let steps = 4000;
        let mut peak = 0.0f64;
        let mut tail = 0.0f64;
        for i in 0..=steps {
            let r = far * i as f64 / steps as f64;
            let v = env(r).abs();
            peak = peak.max(v);
            if r >= edge {
                tail = tail.max(v);
            }
        }
        let spatial = if peak > 0.0 { tail / peak } else { 1.0 };
        let alias = 2.0 * grid.nyquist() - self.sphere;
        let nu = (2 * self.order + l) as f64;
        let w = self.width;
        let spectral = (nu * (alias / self.sphere).ln()
            - 0.5 * w * w * (alias * alias - self.sphere * self.sphere))
            .exp();
        spatial.max(spectral)
    }

    fn field(&self, grid: &Grid, degree: usize, alpha: &[f64]) -> Result<RealField> {
        let top = degree.max(1);
        let envelopes: Vec<_> = (0..=top).map(|l| self.envelope(l)).collect();
        let norms: Vec<f64> = (0..=top).map(|l| self.norm(l)).collect();
        let d = self.dim;
        let values = (0..grid.len())
            .map(|j| {
                let x = grid.point(j);
                let r = x[..d].iter().map(|v| v * v).sum::<f64>().sqrt();
                // r^l vanishes at the origin for l > 0, so any direction works there
                let unit: Vec<f64> = if r > 0.0 {
                    x[..d].iter().map(|v| v / r).collect()
                } else {
                    let mut e = vec![0.0; d];
                    e[d - 1] = 1.0;
                    e
                };
                angular_basis(&unit, degree)
                    .iter()
                    .zip(alpha)
                    .map(|(&(l, y), a)| a * y * envelopes[l](r) / norms[l])
                    .sum::<f64>()
            })
            .collect();
        RealField::new(*grid, values)
    }
}

fn fit_points(dim: usize, radius: f64) -> Vec<Vec<f64>> {
    match dim {
        1 => sphere_points(1, radius, 2),
        2 => {
            // offset by half a step so the report points are not fitted
            let count = 512;
            (0..count)
                .map(|i| {
                    let t = 2.0 * PI * (i as f64 + 0.5) / count as f64;
                    vec![radius * t.cos(), radius * t.sin()]
                })
                .collect()
        }
        _ => sphere_points(3, radius, 1024),
    }
}

struct Fit {
    alpha: Vec<f64>,
    residual: f64,
}

/// Least-squares fit of `target` by the responses `(-i)^l Y_s(sigma_i)`.
fn fit(units: &[Vec<f64>], target: &[Complex64], degree: usize) -> Fit {
    let rows = target.len();
    let cols = angular_basis(&units[0], degree).len();
    let mut a = DMatrix::<f64>::zeros(2 * rows, cols);
    let mut b = DVector::<f64>::zeros(2 * rows);
    for (i, u) in units.iter().enumerate() {
        for (s, &(l, y)) in angular_basis(u, degree).iter().enumerate() {
            let r = Complex64::new(0.0, -1.0).powi(l as i32) * y;
            a[(2 * i, s)] = r.re;
            a[(2 * i + 1, s)] = r.im;
        }
        b[2 * i] = target[i].re;
        b[2 * i + 1] = target[i].im;
    }
    let svd = a.clone().svd(true, true);
    let cutoff = SINGULAR_CUTOFF * svd.singular_values.max();
    let alpha = svd
        .solve(&b, cutoff)
        .unwrap_or_else(|_| DVector::zeros(cols));
    let misfit = &a * &alpha - &b;
    let residual = (0..rows)
        .map(|i| misfit[2 * i].hypot(misfit[2 * i + 1]))
        .fold(0.0, f64::max);
    Fit {
        alpha: alpha.iter().copied().collect(),
        residual,
    }
}

pub fn project_orthogonal_report(
    kernel: &Kernel,
    spec: &SymbolSpec,
    taper: f64,
) -> Result<ProjectionReport> {
    let grid = *kernel.grid();
    let d = grid.dim();
    if !(taper.is_finite() && taper >= spec.eta && taper <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "taper {taper} must lie in [eta, 1] with eta = {}",
            spec.eta
        )));
    }
    let sphere = spec.sphere_radius();
    if sphere * (1.0 + taper) >= grid.nyquist() {
        return Err(Error::SphereOutsideBand {
            radius: sphere * (1.0 + taper),
            nyquist: grid.nyquist(),
        });
    }
    let band_modes = grid
        .mode_radii()
        .into_iter()
        .filter(|r| (r - sphere).abs() <= 0.5 * taper * sphere)
        .count();
    let order = (1.0 / (taper * taper)).ceil().max(1.0) as usize;
    let correction = Correction {
        dim: d,
        sphere,
        order,
        width: (2.0 * order as f64).sqrt() / sphere,
    };
    let lowest = if d == 1 { 1 } else { 0 };
    if band_modes < 2 || correction.footprint(lowest, &grid) > FOOTPRINT_TOLERANCE {
        return Err(Error::TaperTooNarrow {
            taper,
            modes: band_modes,
        });
    }

    let points = fit_points(d, sphere);
    let units: Vec<Vec<f64>> = points
        .iter()
        .map(|p| p.iter().map(|c| c / sphere).collect())
        .collect();
    let target = hat_at_many(kernel.samples(), &points);
    let threshold = FIT_TOLERANCE * kernel.l1();
    let ladder: &[usize] = match d {
        1 => &[1],
        2 => &DEGREES_2D,
        _ => &DEGREES_3D,
    };
    let mut best: Option<(usize, Fit)> = None;
    for &degree in ladder {
        if best.is_some() && correction.footprint(degree, &grid) > FOOTPRINT_TOLERANCE {
            break;
        }
        let current = fit(&units, &target, degree);
        let done = current.residual <= threshold;
        if best
            .as_ref()
            .is_none_or(|(_, b)| current.residual < b.residual)
        {
            best = Some((degree, current));
        }
        if done {
            break;
        }
    }
    let (degree, chosen) = best.expect("ladder is non-empty");

    let delta = correction.field(&grid, degree, &chosen.alpha)?;
    let projected = Kernel::from_field(kernel.samples().sub(&delta)?, kernel.family().cloned());
    let relative_change = if kernel.l1() > 0.0 {
        delta.norms().l1 / kernel.l1()
    } else {
        0.0
    };
    Ok(ProjectionReport {
        residual_before: sphere_report(kernel, spec.a, DEFAULT_SPHERE_SAMPLES).residual,
        residual_after: sphere_report(&projected, spec.a, DEFAULT_SPHERE_SAMPLES).residual,
        fit_residual: chosen.residual,
        degree,
        order,
        width: correction.width,
        band_modes,
        relative_change,
        kernel: projected,
    })
}
