//! Pass/fail checks behind `verify` and `ft-selftest`.

use loglap_core::kernels::{
    lemma_a1_dichotomy, verify_derivative_bound_with, verify_hat_bound, DerivativeCheckOptions,
    DIVERGENT_BAND, STABLE_VARIATION,
};
use loglap_core::nonlinearity::verify_growth;
use loglap_core::solver::{sample_contraction, SAMPLE_SLACK};
use loglap_core::spectral::{forward_ft, inverse_ft, Grid, RealField};
use loglap_core::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::Setup;
use crate::output::{real, Table};

pub const FT_TOLERANCE: f64 = 1e-8;
pub const ROUNDTRIP_TOLERANCE: f64 = 1e-12;
pub const CONTRACTION_PAIRS: usize = 100;
const GROWTH_TRIALS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub value: f64,
    pub limit: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, value: f64, limit: impl Into<String>) -> Self {
        Self {
            name,
            passed,
            value,
            limit: limit.into(),
        }
    }
}

pub fn table(checks: &[Check]) -> Table {
    let mut t = Table::new(&["check", "passed", "value", "limit"]);
    for c in checks {
        t.push(vec![
            c.name.to_string(),
            c.passed.to_string(),
            real(c.value),
            c.limit.clone(),
        ]);
    }
    t
}

/// Transform self-tests on `grid`: a Gaussian against its closed form,
/// roundtrip and Parseval on a seeded random field.
///
/// The Gaussian width `L sqrt(2 / (pi n))` balances the decay at the box
/// edge against the decay at Nyquist; both are `exp(-pi n / 4)`, so the
/// closed-form check is meaningful for `n >= 32`.
pub fn ft_selftest(grid: &Grid, seed: u64) -> Result<Vec<Check>> {
    let d = grid.dim();
    let w = grid.half_width() * (2.0 / (std::f64::consts::PI * grid.points() as f64)).sqrt();
    let f = RealField::from_fn(*grid, |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        (-r2 / (2.0 * w * w)).exp()
    })?;
    let spectrum = forward_ft(&f)?;
    let err = (0..grid.len())
        .map(|k| {
            let p = grid.mode(k);
            let p2: f64 = p[..d].iter().map(|v| v * v).sum();
            let exact = w.powi(d as i32) * (-0.5 * w * w * p2).exp();
            (spectrum.coeffs()[k].re - exact).hypot(spectrum.coeffs()[k].im)
        })
        .fold(0.0, f64::max);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..grid.len())
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let v = RealField::new(*grid, values)?;
    let v_hat = forward_ft(&v)?;
    let back = inverse_ft(&v_hat)?;
    let roundtrip = back.sub(&v)?.max_abs() / v.max_abs();
    let parseval = (v_hat.l2() - v.l2()).abs() / v.l2();
    Ok(vec![
        Check::new(
            "ft_gaussian_max_error",
            err <= FT_TOLERANCE,
            err,
            real(FT_TOLERANCE),
        ),
        Check::new(
            "ft_roundtrip",
            roundtrip <= ROUNDTRIP_TOLERANCE,
            roundtrip,
            real(ROUNDTRIP_TOLERANCE),
        ),
        Check::new(
            "ft_parseval",
            parseval <= ROUNDTRIP_TOLERANCE,
            parseval,
            real(ROUNDTRIP_TOLERANCE),
        ),
    ])
}

/// Full property suite for a configuration.
pub fn verify(setup: &Setup) -> Result<Vec<Check>> {
    let mut checks = ft_selftest(&setup.grid, setup.seed)?;
    let kernel = &setup.kernel;
    let spec = &setup.spec;

    let hat = verify_hat_bound(kernel);
    checks.push(Check::new(
        "hat_bound",
        hat.passed,
        hat.max_hat,
        real(hat.bound),
    ));
    let opts = DerivativeCheckOptions {
        seed: setup.seed,
        ..Default::default()
    };
    let der = verify_derivative_bound_with(kernel, &opts);
    checks.push(Check::new(
        "derivative_bound",
        der.passed,
        der.max_derivative,
        real(der.bound),
    ));

    let etas = [spec.eta, spec.eta / 2.0, spec.eta / 4.0];
    let dich = lemma_a1_dichotomy(kernel, spec.a, &etas)?;
    if dich.admissible {
        let variation = dich
            .rows
            .windows(2)
            .map(|w| {
                if w[0].na > 0.0 {
                    (w[1].na - w[0].na).abs() / w[0].na
                } else {
                    0.0
                }
            })
            .fold(0.0, f64::max);
        checks.push(Check::new(
            "dichotomy_stable",
            dich.passed,
            variation,
            real(STABLE_VARIATION),
        ));
    } else {
        // the worst ratio N_a eta / r, furthest from 1 on a log scale
        let worst = dich
            .rows
            .iter()
            .map(|r| r.na_times_eta / dich.residual)
            .fold(1.0, |acc: f64, x| {
                if x.ln().abs() > acc.ln().abs() {
                    x
                } else {
                    acc
                }
            });
        checks.push(Check::new(
            "dichotomy_divergent",
            dich.passed,
            worst,
            format!("[{}:{}]", DIVERGENT_BAND.0, DIVERGENT_BAND.1),
        ));
    }

    if let Some(nl) = &setup.nl {
        let growth = verify_growth(nl, GROWTH_TRIALS, setup.seed)?;
        checks.push(Check::new(
            "growth_bound",
            growth.passed,
            growth.worst_margin,
            real(0.0),
        ));
        let sample = sample_contraction(kernel, nl, spec, CONTRACTION_PAIRS, setup.seed)?;
        checks.push(Check::new(
            "contraction_sampled",
            sample.contraction_ok,
            sample.max_ratio,
            real(sample.q_discrete),
        ));
        checks.push(Check::new(
            "norm_bound_sampled",
            sample.norm_bound_ok,
            sample.norm_excess,
            real(SAMPLE_SLACK),
        ));
    }
    Ok(checks)
}
