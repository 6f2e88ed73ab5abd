//! Off-grid evaluation of the unitary Fourier transform.

use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use super::field::RealField;
use super::grid::Grid;

/// Direct quadrature `(2 pi)^{-d/2} h^d sum_j f(x_j) e^{-i p x_j}` at an
/// arbitrary frequency `p` (length `d`).
pub fn hat_at(f: &RealField, p: &[f64]) -> Complex64 {
    let grid = f.grid();
    let d = grid.dim();
    debug_assert_eq!(p.len(), d);
    let coords = grid.axis_coords();
    let phases: Vec<Vec<Complex64>> = p
        .iter()
        .map(|&pa| {
            coords
                .iter()
                .map(|&x| Complex64::from_polar(1.0, -pa * x))
                .collect()
        })
        .collect();
    let n = grid.points();
    let v = f.values();
    let sum = match d {
        1 => v
            .iter()
            .zip(&phases[0])
            .map(|(a, e)| e * a)
            .sum::<Complex64>(),
        2 => (0..n)
            .map(|i| {
                let row = &v[i * n..(i + 1) * n];
                let inner: Complex64 = row.iter().zip(&phases[1]).map(|(a, e)| e * a).sum();
                inner * phases[0][i]
            })
            .sum(),
        _ => (0..n)
            .map(|i| {
                let plane: Complex64 = (0..n)
                    .map(|j| {
                        let row = &v[(i * n + j) * n..(i * n + j + 1) * n];
                        let inner: Complex64 = row.iter().zip(&phases[2]).map(|(a, e)| e * a).sum();
                        inner * phases[1][j]
                    })
                    .sum();
                plane * phases[0][i]
            })
            .sum(),
    };
    sum * unitary(grid) * grid.cell_volume()
}

/// [`hat_at`] over many points, in parallel; order is preserved.
pub fn hat_at_many(f: &RealField, points: &[Vec<f64>]) -> Vec<Complex64> {
    points.par_iter().map(|p| hat_at(f, p)).collect()
}

fn unitary(grid: &Grid) -> f64 {
    (2.0 * PI).powf(-(grid.dim() as f64) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::fft::forward_ft;

    #[test]
    fn agrees_with_fft_on_lattice() {
        for (d, n) in [(1, 32), (2, 16), (3, 8)] {
            let g = Grid::new(d, 3.0, n).unwrap();
            let f = RealField::from_fn(g, |x| {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                (-r2).exp() * (1.0 + 0.3 * x[0])
            })
            .unwrap();
            let spec = forward_ft(&f).unwrap();
            for k in [0, 1, 5, g.len() - 1] {
                let p = g.mode(k);
                let direct = hat_at(&f, &p[..d]);
                assert!((direct - spec.coeffs()[k]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn gaussian_off_lattice() {
        let g = Grid::new(1, 20.0, 1024).unwrap();
        let f = RealField::from_fn(g, |x| (-x[0] * x[0] / 2.0).exp()).unwrap();
        for p in [1.0, -1.0, 0.37, 2.75] {
            let v = hat_at(&f, &[p]);
            assert!((v.re - (-p * p / 2.0_f64).exp()).abs() < 1e-12);
            assert!(v.im.abs() < 1e-12);
        }
    }
}
