//! The nonlinear term `F(u, x) = l phi(u) + h(x)`.
//!
//! Every family has `|phi'| <= 1` with equality at `u = 0` and
//! `|phi(u)| <= |u|`, so the declared gain `l` is the exact Lipschitz
//! constant and `k = l` is a valid growth constant.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::spectral::{Grid, RealField};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// `phi(u) = sin u`.
    SaturatingSine,
    /// `phi(u) = u / (1 + u^2)`.
    Rational,
    /// `phi(u) = clamp(u, -knee, knee)`.
    ClippedLinear { knee: f64 },
    /// `phi(u) = u`; a reference family with an exact linear solve.
    Linear,
}

impl Family {
    pub fn tag(&self) -> &'static str {
        match self {
            Family::SaturatingSine => "saturating_sine",
            Family::Rational => "rational",
            Family::ClippedLinear { .. } => "clipped_linear",
            Family::Linear => "linear",
        }
    }

    fn phi(&self, u: f64) -> f64 {
        match *self {
            Family::SaturatingSine => u.sin(),
            Family::Rational => u / (1.0 + u * u),
            Family::ClippedLinear { knee } => u.clamp(-knee, knee),
            Family::Linear => u,
        }
    }
}

/// Named offset profiles `h(x) >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OffsetProfile {
    Zero,
    Constant(f64),
    /// `amplitude exp(-|x|^2 / 2 width^2)`.
    Gaussian {
        amplitude: f64,
        width: f64,
    },
}

pub fn offset_field(profile: OffsetProfile, grid: &Grid) -> Result<RealField> {
    match profile {
        OffsetProfile::Zero => Ok(RealField::zeros(*grid)),
        OffsetProfile::Constant(c) => RealField::new(*grid, vec![c; grid.len()]),
        OffsetProfile::Gaussian { amplitude, width } => {
            if !(width.is_finite() && width > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "offset width must be positive, got {width}"
                )));
            }
            RealField::from_fn(*grid, |x| {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                amplitude * (-r2 / (2.0 * width * width)).exp()
            })
        }
    }
}

#[derive(Debug, Clone)]
pub struct Nonlinearity {
    family: Family,
    gain: f64,
    growth: f64,
    offset: RealField,
}

impl Nonlinearity {
    /// Family with growth constant `k = l`.
    pub fn new(family: Family, gain: f64, offset: RealField) -> Result<Self> {
        Self::with_growth(family, gain, gain, offset)
    }

    pub fn with_growth(family: Family, gain: f64, growth: f64, offset: RealField) -> Result<Self> {
        if !(gain.is_finite() && gain >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gain must be nonnegative, got {gain}"
            )));
        }
        if !(growth.is_finite() && growth >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "growth must be nonnegative, got {growth}"
            )));
        }
        if let Family::ClippedLinear { knee } = family {
            if !(knee.is_finite() && knee > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "knee must be positive, got {knee}"
                )));
            }
        }
        if let Some(j) = offset.values().iter().position(|&h| h < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "offset is negative at index {j}"
            )));
        }
        Ok(Self {
            family,
            gain,
            growth,
            offset,
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn growth(&self) -> f64 {
        self.growth
    }

    pub fn offset(&self) -> &RealField {
        &self.offset
    }

    pub fn grid(&self) -> &Grid {
        self.offset.grid()
    }

    /// `F(u, x_j)`.
    pub fn value(&self, u: f64, j: usize) -> f64 {
        self.gain * self.family.phi(u) + self.offset.values()[j]
    }

    /// Pointwise `F(v(x_j), x_j)`.
    pub fn eval(&self, v: &RealField) -> Result<RealField> {
        v.ensure_same_grid(&self.offset)?;
        let values: Vec<f64> = v
            .values()
            .iter()
            .enumerate()
            .map(|(j, &u)| self.value(u, j))
            .collect();
        RealField::new(*v.grid(), values)
    }

    fn sample_range(&self) -> f64 {
        if self.gain > 0.0 {
            10.0 / self.gain
        } else {
            10.0
        }
    }
}

pub fn eval_f(nl: &Nonlinearity, v: &RealField) -> Result<RealField> {
    nl.eval(v)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthCheck {
    pub passed: bool,
    /// Smallest `k |u| + h(x) - |F(u, x)|` seen.
    pub worst_margin: f64,
    /// `(u, j)` attaining the worst margin.
    pub witness: (f64, usize),
}

pub const GROWTH_SLACK: f64 = 1e-12;

/// Draws `u` from the wide range `[-10/l, 10/l]` for half the trials and
/// from the bands `[-1, 1]` and `[-1e-3, 1e-3]` for the rest.
fn draw_u(rng: &mut ChaCha8Rng, trial: usize, wide: f64) -> f64 {
    let span = match trial % 4 {
        0 | 1 => wide,
        2 => 1.0,
        _ => 1e-3,
    };
    rng.random_range(-span..=span)
}

pub fn verify_growth(nl: &Nonlinearity, trials: usize, seed: u64) -> Result<GrowthCheck> {
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = nl.grid().len();
    let wide = nl.sample_range();
    let mut worst = (f64::INFINITY, (0.0, 0));
    for trial in 0..trials {
        let u = if trial == 0 {
            0.0
        } else {
            draw_u(&mut rng, trial, wide)
        };
        let j = rng.random_range(0..n);
        let margin = nl.growth * u.abs() + nl.offset.values()[j] - nl.value(u, j).abs();
        if margin < worst.0 {
            worst = (margin, (u, j));
        }
    }
    Ok(GrowthCheck {
        passed: worst.0 >= -GROWTH_SLACK,
        worst_margin: worst.0,
        witness: worst.1,
    })
}

/// Largest difference quotient over random pairs with separations
/// log-uniform in `[1e-3, 1]`, a quarter of them straddling `u = 0`.
pub fn estimate_lipschitz(nl: &Nonlinearity, trials: usize, seed: u64) -> Result<f64> {
    if trials < 2 {
        return Err(Error::InvalidParameter("need at least two trials".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = nl.grid().len();
    let wide = nl.sample_range();
    let mut best = 0.0f64;
    for trial in 0..trials {
        let delta = 10f64.powf(rng.random_range(-3.0..=0.0));
        let u1 = match trial % 4 {
            0 => -0.5 * delta,
            1 => rng.random_range(-wide..=wide),
            2 => rng.random_range(-1.0..=1.0),
            _ => rng.random_range(-0.1..=0.1),
        };
        let u2 = u1 + delta;
        let j = rng.random_range(0..n);
        let quotient = (nl.value(u2, j) - nl.value(u1, j)).abs() / (u2 - u1);
        best = best.max(quotient);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use std::f64::consts::FRAC_PI_2;

    fn grid() -> Grid {
        Grid::new(1, 10.0, 64).unwrap()
    }

    fn constant(c: f64) -> RealField {
        offset_field(OffsetProfile::Constant(c), &grid()).unwrap()
    }

    #[test]
    fn eval_examples() {
        let g = grid();
        let nl = Nonlinearity::new(Family::SaturatingSine, 0.1, RealField::zeros(g)).unwrap();
        let out = nl.eval(&RealField::zeros(g)).unwrap();
        assert!(out.values().iter().all(|&v| v == 0.0));

        let nl = Nonlinearity::new(Family::SaturatingSine, 0.1, constant(0.3)).unwrap();
        let v = RealField::new(g, vec![FRAC_PI_2; g.len()]).unwrap();
        let out = nl.eval(&v).unwrap();
        assert!(out.values().iter().all(|&w| (w - 0.4).abs() < 1e-15));

        let nl = Nonlinearity::new(Family::Rational, 0.2, constant(0.3)).unwrap();
        let v = RealField::new(g, vec![1.0; g.len()]).unwrap();
        let out = nl.eval(&v).unwrap();
        assert!(out.values().iter().all(|&w| (w - 0.4).abs() < 1e-15));
    }

    #[test]
    fn eval_rejects_other_grid() {
        let nl = Nonlinearity::new(Family::Rational, 0.2, constant(0.0)).unwrap();
        let other = RealField::zeros(Grid::new(1, 10.0, 32).unwrap());
        assert!(matches!(nl.eval(&other), Err(Error::GridMismatch)));
    }

    #[test]
    fn rejects_negative_offset_and_gain() {
        let g = grid();
        assert!(Nonlinearity::new(Family::Rational, 0.2, constant(-0.1)).is_err());
        assert!(Nonlinearity::new(Family::Rational, -0.2, RealField::zeros(g)).is_err());
        assert!(Nonlinearity::new(
            Family::ClippedLinear { knee: 0.0 },
            0.2,
            RealField::zeros(g)
        )
        .is_err());
    }

    #[test]
    fn sine_lipschitz_estimate() {
        let nl = Nonlinearity::new(Family::SaturatingSine, 0.1, constant(0.2)).unwrap();
        let est = estimate_lipschitz(&nl, 100_000, 7).unwrap();
        assert!((0.099..=0.1 + 1e-12).contains(&est), "{est}");
    }

    #[test]
    fn rational_lipschitz_estimate() {
        let nl = Nonlinearity::new(Family::Rational, 0.2, constant(0.0)).unwrap();
        let est = estimate_lipschitz(&nl, 20_000, 1).unwrap();
        assert!(est <= 0.2 + 1e-12 && est > 0.19, "{est}");
    }

    #[test]
    fn degenerate_gain_has_zero_estimate() {
        let nl = Nonlinearity::new(Family::SaturatingSine, 0.0, constant(0.5)).unwrap();
        assert_eq!(estimate_lipschitz(&nl, 100, 3).unwrap(), 0.0);
    }

    #[test]
    fn growth_examples() {
        let nl = Nonlinearity::new(Family::SaturatingSine, 0.1, constant(0.2)).unwrap();
        let chk = verify_growth(&nl, 10_000, 0).unwrap();
        assert!(chk.passed);
        // u = 0 is always tried and the bound is tight there
        assert!(chk.worst_margin.abs() < 1e-15);

        let nl = Nonlinearity::with_growth(
            Family::ClippedLinear { knee: 1.0 },
            0.5,
            0.2,
            RealField::zeros(grid()),
        )
        .unwrap();
        let chk = verify_growth(&nl, 10_000, 0).unwrap();
        assert!(!chk.passed);
        assert!(chk.witness.0.abs() > 0.0);
        assert!(chk.worst_margin < 0.0);
    }

    #[test]
    fn trial_counts_validated() {
        let nl = Nonlinearity::new(Family::Rational, 0.2, constant(0.0)).unwrap();
        assert!(verify_growth(&nl, 0, 0).is_err());
        assert!(estimate_lipschitz(&nl, 1, 0).is_err());
    }

    fn family_strategy() -> impl Strategy<Value = Family> {
        prop_oneof![
            Just(Family::SaturatingSine),
            Just(Family::Rational),
            (0.1f64..5.0).prop_map(|knee| Family::ClippedLinear { knee }),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn declared_constants_hold(
            family in family_strategy(),
            gain in 0.01f64..2.0,
            h in 0.0f64..3.0,
            seed in any::<u64>(),
        ) {
            let nl = Nonlinearity::new(family, gain, constant(h)).unwrap();
            prop_assert!(estimate_lipschitz(&nl, 2000, seed).unwrap() <= gain + 1e-12);
            prop_assert!(verify_growth(&nl, 2000, seed).unwrap().passed);
        }

        #[test]
        fn sampled_continuity(
            family in family_strategy(),
            gain in 0.01f64..2.0,
            u in -50.0f64..50.0,
            eps in 1e-6f64..1.0,
        ) {
            let nl = Nonlinearity::new(family, gain, constant(0.7)).unwrap();
            let jump = (nl.value(u + eps, 3) - nl.value(u, 3)).abs();
            prop_assert!(jump <= gain * eps * (1.0 + 1e-12) + 1e-15);
        }

        #[test]
        fn field_lipschitz(
            family in family_strategy(),
            gain in 0.01f64..2.0,
            seed in any::<u64>(),
        ) {
            let g = grid();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut draw = || {
                RealField::new(g, (0..g.len()).map(|_| rng.random_range(-5.0..5.0)).collect())
                    .unwrap()
            };
            let (v, w) = (draw(), draw());
            let nl = Nonlinearity::new(family, gain, constant(0.4)).unwrap();
            let lhs = nl.eval(&v).unwrap().sub(&nl.eval(&w).unwrap()).unwrap().l2();
            prop_assert!(lhs <= gain * v.sub(&w).unwrap().l2() * (1.0 + 1e-12));
        }
    }
}
