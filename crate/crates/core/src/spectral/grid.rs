use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Truncated periodic discretization of `R^d` on the box `[-L, L)^d`.
///
/// Samples sit at `x_j = -L + j h` with `h = 2L / n` on every axis. The
/// matching frequency lattice is `p_k = (pi / L) k` for
/// `k in {-n/2, ..., n/2 - 1}`. Spectral arrays are stored in FFT order
/// (non-negative indices first) and flat arrays are row-major with the
/// last axis fastest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    half_width: f64,
    points: usize,
}

impl Grid {
    pub fn new(dim: usize, half_width: f64, points: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        if points < 8 || !points.is_multiple_of(2) {
            return Err(Error::InvalidResolution(points));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidHalfWidth(half_width));
        }
        Ok(Self {
            dim,
            half_width,
            points,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Points per axis.
    pub fn points(&self) -> usize {
        self.points
    }

    /// Total number of samples, `n^d`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    /// Spacing of the frequency lattice, `pi / L`.
    pub fn mode_spacing(&self) -> f64 {
        PI / self.half_width
    }

    /// Largest resolved frequency magnitude along an axis, `pi / h`.
    pub fn nyquist(&self) -> f64 {
        PI / self.spacing()
    }

    /// Quadrature cell volume `h^d`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Frequency cell volume `(pi / L)^d`.
    pub fn mode_volume(&self) -> f64 {
        self.mode_spacing().powi(self.dim as i32)
    }

    /// Sample coordinates along one axis.
    pub fn axis_coords(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.points)
            .map(|j| -self.half_width + j as f64 * h)
            .collect()
    }

    /// Signed integer frequency index for FFT-order position `i`.
    pub fn signed_index(&self, i: usize) -> i64 {
        if i < self.points / 2 {
            i as i64
        } else {
            i as i64 - self.points as i64
        }
    }

    /// Frequencies along one axis in FFT order.
    pub fn axis_modes(&self) -> Vec<f64> {
        let dp = self.mode_spacing();
        (0..self.points)
            .map(|i| dp * self.signed_index(i) as f64)
            .collect()
    }

    /// Splits a flat row-major index into per-axis indices.
    pub fn unravel(&self, flat: usize) -> [usize; 3] {
        let mut out = [0usize; 3];
        let mut rest = flat;
        for axis in (0..self.dim).rev() {
            out[axis] = rest % self.points;
            rest /= self.points;
        }
        out
    }

    /// Position of sample `flat`; unused trailing components are zero.
    pub fn point(&self, flat: usize) -> [f64; 3] {
        let idx = self.unravel(flat);
        let h = self.spacing();
        let mut x = [0.0; 3];
        for axis in 0..self.dim {
            x[axis] = -self.half_width + idx[axis] as f64 * h;
        }
        x
    }

    /// Frequency vector of spectral slot `flat`; unused trailing components are zero.
    pub fn mode(&self, flat: usize) -> [f64; 3] {
        let idx = self.unravel(flat);
        let dp = self.mode_spacing();
        let mut p = [0.0; 3];
        for axis in 0..self.dim {
            p[axis] = dp * self.signed_index(idx[axis]) as f64;
        }
        p
    }

    /// Euclidean norms of all sample positions, row-major.
    pub fn point_radii(&self) -> Vec<f64> {
        (0..self.len()).map(|j| norm3(&self.point(j))).collect()
    }

    /// Magnitudes `|p|` of all spectral slots, FFT order.
    pub fn mode_radii(&self) -> Vec<f64> {
        (0..self.len()).map(|k| norm3(&self.mode(k))).collect()
    }

    /// Flat spectral index of the mode `-p` for slot `flat`.
    pub fn mirror(&self, flat: usize) -> usize {
        let idx = self.unravel(flat);
        let n = self.points;
        let mut out = 0;
        for i in &idx[..self.dim] {
            out = out * n + (n - i) % n;
        }
        out
    }
}

pub(crate) fn norm3(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}
