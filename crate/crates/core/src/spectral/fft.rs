//! Unitary Fourier transform on the periodic box.
//!
//! The forward map is the trapezoidal quadrature of
//! `(2 pi)^{-d/2} int f(x) e^{-i p x} dx` at the lattice modes, and the
//! inverse is the matching Riemann sum over the frequency lattice. Both
//! reduce to an FFT with a `(-1)^k` shift because the box starts at `-L`.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::field::{RealField, SpectralField};
use super::grid::Grid;
use crate::error::{Error, Result};

/// Relative threshold on the imaginary residue of [`inverse_ft`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// In-place unnormalized FFT along every axis of a row-major cube.
pub(crate) fn fft_nd(data: &mut [Complex64], grid: &Grid, inverse: bool) {
    let n = grid.points();
    let d = grid.dim();
    let fft = plan(n, inverse);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];

    // last axis is contiguous
    fft.process_with_scratch(data, &mut scratch);

    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..d.saturating_sub(1) {
        let stride = n.pow((d - 1 - axis) as u32);
        let block = stride * n;
        for base in (0..data.len()).step_by(block) {
            for offset in 0..stride {
                let start = base + offset;
                for (i, slot) in line.iter_mut().enumerate() {
                    *slot = data[start + i * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (i, value) in line.iter().enumerate() {
                    data[start + i * stride] = *value;
                }
            }
        }
    }
}

/// `(-1)^{k_1 + ... + k_d}` for the spectral slot `flat`.
fn shift_sign(grid: &Grid, flat: usize) -> f64 {
    let idx = grid.unravel(flat);
    let parity: usize = idx[..grid.dim()].iter().sum();
    if parity.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn unitary_factor(d: usize) -> f64 {
    (2.0 * PI).powf(-(d as f64) / 2.0)
}

pub fn forward_ft(f: &RealField) -> Result<SpectralField> {
    if let Some(index) = f.values().iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    let grid = *f.grid();
    let mut data: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_nd(&mut data, &grid, false);
    let scale = unitary_factor(grid.dim()) * grid.cell_volume();
    for (k, c) in data.iter_mut().enumerate() {
        *c *= scale * shift_sign(&grid, k);
    }
    Ok(SpectralField::from_parts_unchecked(grid, data))
}

/// Inverse transform; rejects input whose result has a significant
/// imaginary part.
pub fn inverse_ft(spectrum: &SpectralField) -> Result<RealField> {
    inverse_ft_scaled(spectrum, 0.0)
}

/// [`inverse_ft`] with the residue measured against `max(||spectrum||, scale)`.
/// A product `m f^` inherits roundoff of size `max|m| ||f^||`, which can
/// dwarf its own norm when `m` cancels most of `f^`.
pub(crate) fn inverse_ft_scaled(spectrum: &SpectralField, scale: f64) -> Result<RealField> {
    let (values, imag) = inverse_complex(spectrum);
    let grid = *spectrum.grid();
    let imag_l2 = (grid.cell_volume() * imag).sqrt();
    let norm = spectrum.l2();
    let reference = norm.max(scale).max(f64::MIN_POSITIVE);
    if imag_l2 > SYMMETRY_TOLERANCE * reference && imag_l2 > 0.0 {
        return Err(Error::NotConjugateSymmetric {
            imag: imag_l2,
            norm,
        });
    }
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    Ok(RealField::from_parts_unchecked(grid, values))
}

/// Real part of the inverse transform and the summed squared imaginary part.
fn inverse_complex(spectrum: &SpectralField) -> (Vec<f64>, f64) {
    let grid = *spectrum.grid();
    let mut data: Vec<Complex64> = spectrum
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, c)| c * shift_sign(&grid, k))
        .collect();
    fft_nd(&mut data, &grid, true);
    let scale = unitary_factor(grid.dim()) * grid.mode_volume();
    let mut imag = 0.0;
    let values = data
        .iter()
        .map(|c| {
            imag += (c.im * scale).powi(2);
            c.re * scale
        })
        .collect();
    (values, imag)
}

/// Periodic convolution `h^d sum_i f(x_i) g(x_j - x_i)` with the
/// difference wrapped back into the box. Direct O(N^2) evaluation.
pub fn periodic_convolution(f: &RealField, g: &RealField) -> Result<RealField> {
    f.ensure_same_grid(g)?;
    let grid = *f.grid();
    let n = grid.points();
    let d = grid.dim();
    let half = n / 2;
    let dv = grid.cell_volume();
    let mut out = vec![0.0; grid.len()];
    for (j, slot) in out.iter_mut().enumerate() {
        let jj = grid.unravel(j);
        let mut acc = 0.0;
        for (i, fi) in f.values().iter().enumerate() {
            let ii = grid.unravel(i);
            let mut flat = 0;
            for axis in 0..d {
                flat = flat * n + (jj[axis] + n + half - ii[axis]) % n;
            }
            acc += fi * g.values()[flat];
        }
        *slot = dv * acc;
    }
    RealField::new(grid, out)
}
