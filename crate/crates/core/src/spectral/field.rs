use rustfft::num_complex::Complex64;

use super::grid::Grid;
use crate::error::{Error, Result};

/// Real samples over a grid, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    grid: Grid,
    values: Vec<f64>,
}

impl RealField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    /// Samples `f(x_j)` at every grid point.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let d = grid.dim();
        let values = (0..grid.len()).map(|j| f(&grid.point(j)[..d])).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub(crate) fn from_parts_unchecked(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn ensure_same_grid(&self, other: &RealField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    pub fn sub(&self, other: &RealField) -> Result<RealField> {
        self.ensure_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self::from_parts_unchecked(self.grid, values))
    }

    pub fn scale(&self, factor: f64) -> RealField {
        let values = self.values.iter().map(|v| v * factor).collect();
        Self::from_parts_unchecked(self.grid, values)
    }

    pub fn norms(&self) -> Norms {
        norms(self)
    }

    pub fn l2(&self) -> f64 {
        let sq: f64 = self.values.iter().map(|v| v * v).sum();
        (self.grid.cell_volume() * sq).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Complex coefficients on the frequency lattice, FFT order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                found: coeffs.len(),
            });
        }
        if let Some(index) = coeffs
            .iter()
            .position(|c| !(c.re.is_finite() && c.im.is_finite()))
        {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { grid, coeffs })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub(crate) fn from_parts_unchecked(grid: Grid, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), grid.len());
        Self { grid, coeffs }
    }

    /// Continuous-normalized L2 norm, `sqrt((pi/L)^d sum |c|^2)`.
    pub fn l2(&self) -> f64 {
        let sq: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        (self.grid.mode_volume() * sq).sqrt()
    }

    /// Largest `|c(p) - conj c(-p)|`, ignoring Nyquist slots.
    pub fn symmetry_defect(&self) -> f64 {
        let g = &self.grid;
        let half = g.points() / 2;
        let mut worst = 0.0f64;
        for k in 0..g.len() {
            let idx = g.unravel(k);
            if idx[..g.dim()].contains(&half) {
                continue;
            }
            let m = g.mirror(k);
            worst = worst.max((self.coeffs[k] - self.coeffs[m].conj()).norm());
        }
        worst
    }
}

/// Quadrature norms of a real field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub l2: f64,
    pub l1: f64,
    /// `||x f||_1` with the Euclidean `|x|`.
    pub weighted_l1: f64,
}

pub fn norms(f: &RealField) -> Norms {
    let grid = f.grid();
    let dv = grid.cell_volume();
    let mut sq = 0.0;
    let mut abs = 0.0;
    let mut weighted = 0.0;
    for (j, v) in f.values().iter().enumerate() {
        let r = super::grid::norm3(&grid.point(j));
        sq += v * v;
        abs += v.abs();
        weighted += r * v.abs();
    }
    Norms {
        l2: (dv * sq).sqrt(),
        l1: dv * abs,
        weighted_l1: dv * weighted,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indicator_area() {
        let g = Grid::new(1, 10.0, 64).unwrap();
        let f = RealField::from_fn(g, |x| if x[0].abs() <= 1.0 { 1.0 } else { 0.0 }).unwrap();
        let n = f.norms();
        assert!((n.l1 - 2.0).abs() <= g.spacing());
    }

    #[test]
    fn gaussian_l1() {
        let g = Grid::new(1, 20.0, 1024).unwrap();
        let f = RealField::from_fn(g, |x| (-x[0] * x[0] / 2.0).exp()).unwrap();
        let n = f.norms();
        assert!((n.l1 - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-8);
        // ||x e^{-x^2/2}||_1 = 2, to O(h^2) because of the kink at 0
        assert!((n.weighted_l1 - 2.0).abs() < g.spacing().powi(2));
        // ||e^{-x^2/2}||_2^2 = sqrt(pi)
        assert!((n.l2 - std::f64::consts::PI.sqrt().sqrt()).abs() < 1e-8);
    }

    #[test]
    fn zero_norms() {
        let g = Grid::new(2, 3.0, 8).unwrap();
        let n = RealField::zeros(g).norms();
        assert_eq!((n.l2, n.l1, n.weighted_l1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn rejects_non_finite() {
        let g = Grid::new(1, 3.0, 8).unwrap();
        let mut v = vec![0.0; 8];
        v[3] = f64::NAN;
        assert!(matches!(
            RealField::new(g, v),
            Err(Error::NonFinite { index: 3 })
        ));
        assert!(matches!(
            RealField::new(g, vec![0.0; 7]),
            Err(Error::LengthMismatch { .. })
        ));
    }
}
