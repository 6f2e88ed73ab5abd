use super::grid::Grid;
use crate::error::{Error, Result};

/// Spectral shift `a` and mask half-width `eta` in log-radius units.
///
/// Modes with `|ln(|p| / e^a)| < eta` form the masked annulus around the
/// singular sphere `|p| = e^a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolSpec {
    pub a: f64,
    pub eta: f64,
}

impl SymbolSpec {
    pub fn new(a: f64, eta: f64) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::InvalidParameter(format!("shift a = {a}")));
        }
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "mask half-width eta must be positive, got {eta}"
            )));
        }
        Ok(Self { a, eta })
    }

    /// Mask of about two mode spacings in radius: `eta = 2 (pi/L) / e^a`.
    pub fn with_default_eta(a: f64, grid: &Grid) -> Result<Self> {
        Self::new(a, default_eta(a, grid))
    }

    pub fn sphere_radius(&self) -> f64 {
        self.a.exp()
    }

    /// Signed log-distance `ln(|p| / e^a)` of a frequency magnitude.
    pub fn log_distance(&self, radius: f64) -> f64 {
        radius.ln() - self.a
    }

    pub fn is_masked(&self, radius: f64) -> bool {
        radius > 0.0 && self.log_distance(radius).abs() < self.eta
    }
}

pub fn default_eta(a: f64, grid: &Grid) -> f64 {
    2.0 * grid.mode_spacing() / a.exp()
}

/// The symbol `ln|p| - a`; `-inf` at the origin.
pub fn symbol_value(p: &[f64], a: f64) -> f64 {
    let r = p.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r == 0.0 {
        f64::NEG_INFINITY
    } else {
        r.ln() - a
    }
}

/// Regularized reciprocal of the symbol at one mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reciprocal {
    pub value: f64,
    pub masked: bool,
}

pub fn reciprocal_symbol(p: &[f64], spec: &SymbolSpec) -> Reciprocal {
    let r = p.iter().map(|v| v * v).sum::<f64>().sqrt();
    reciprocal_at_radius(r, spec)
}

pub(crate) fn reciprocal_at_radius(r: f64, spec: &SymbolSpec) -> Reciprocal {
    if r == 0.0 {
        return Reciprocal {
            value: 0.0,
            masked: false,
        };
    }
    let s = spec.log_distance(r);
    if s.abs() < spec.eta {
        Reciprocal {
            value: 0.0,
            masked: true,
        }
    } else {
        Reciprocal {
            value: 1.0 / s,
            masked: false,
        }
    }
}

/// Reciprocal symbol on every spectral slot plus the masked-slot count.
pub fn reciprocal_table(grid: &Grid, spec: &SymbolSpec) -> (Vec<f64>, usize) {
    let mut masked = 0;
    let table = grid
        .mode_radii()
        .into_iter()
        .map(|r| {
            let rec = reciprocal_at_radius(r, spec);
            masked += rec.masked as usize;
            rec.value
        })
        .collect();
    (table, masked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn symbol_zeros() {
        assert_eq!(symbol_value(&[1.0], 0.0), 0.0);
        assert!(symbol_value(&[E], 1.0).abs() < 1e-15);
        assert!(symbol_value(&[0.0, E, 0.0], 1.0).abs() < 1e-15);
        assert_eq!(symbol_value(&[0.0], 0.0), f64::NEG_INFINITY);
        assert_eq!(symbol_value(&[0.0, 0.0], 0.0), f64::NEG_INFINITY);
    }

    #[test]
    fn reciprocal_examples() {
        let spec = SymbolSpec::new(0.0, 0.1).unwrap();
        let r = reciprocal_symbol(&[E * E], &spec);
        assert!((r.value - 0.5).abs() < 1e-15 && !r.masked);

        let tight = SymbolSpec::new(0.0, 0.01).unwrap();
        let r = reciprocal_symbol(&[1.0001], &tight);
        assert_eq!(r.value, 0.0);
        assert!(r.masked);

        let r = reciprocal_symbol(&[0.0], &spec);
        assert_eq!(r.value, 0.0);
        assert!(!r.masked);
    }

    #[test]
    fn reciprocal_inverts_symbol_off_mask() {
        let spec = SymbolSpec::new(0.3, 0.05).unwrap();
        for i in 1..400 {
            let r = i as f64 * 0.013;
            let rec = reciprocal_at_radius(r, &spec);
            if rec.masked {
                assert!((r.ln() - 0.3).abs() < 0.05);
            } else {
                let s = symbol_value(&[r], 0.3);
                assert!((rec.value * s - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn default_eta_spans_two_modes() {
        let g = Grid::new(1, 20.0, 1024).unwrap();
        let eta = default_eta(0.0, &g);
        assert!((eta - 2.0 * std::f64::consts::PI / 20.0).abs() < 1e-15);
        assert!(SymbolSpec::new(0.0, 0.0).is_err());
        assert!(SymbolSpec::new(f64::NAN, 0.1).is_err());
    }
}
