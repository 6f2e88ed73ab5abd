//! The Picard map `t_a`, its contraction certificate, fixed-point
//! iteration and the discrete residual.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernels::{compute_na_with, Kernel, DEFAULT_SPHERE_SAMPLES};
use crate::nonlinearity::{estimate_lipschitz, Nonlinearity};
use crate::spectral::{
    forward_ft, inverse_ft_scaled, reciprocal_at_radius, RealField, SpectralField, SymbolSpec,
};

/// `(2 pi)^{d/2}`.
fn convolution_factor(dim: usize) -> f64 {
    (2.0 * PI).powf(dim as f64 / 2.0)
}

/// `q = (2 pi)^{d/2} N_a l`.
pub fn contraction_factor(dim: usize, na: f64, gain: f64) -> f64 {
    convolution_factor(dim) * na * gain
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyOptions {
    pub eps: f64,
    pub seed: u64,
    pub lipschitz_trials: usize,
    pub sphere_samples: usize,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            eps: 0.1,
            seed: 0,
            lipschitz_trials: 10_000,
            sphere_samples: DEFAULT_SPHERE_SAMPLES,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionCertificate {
    pub dim: usize,
    /// `N_a` including the off-grid ring.
    pub na: f64,
    /// Lattice-only `N_a`, an exact max over the modes the solver uses.
    pub grid_na: f64,
    pub q: f64,
    /// `q` built from `grid_na`.
    pub q_discrete: f64,
    /// Declared Lipschitz constant, used for `q`.
    pub gain: f64,
    /// Sampled estimate of the Lipschitz constant (advisory).
    pub sampled_gain: f64,
    pub orth_residual: f64,
    pub threshold: f64,
    pub divergence_indicator: f64,
    pub masked_modes: usize,
    pub eps: f64,
    pub pass: bool,
}

pub fn certify(
    kernel: &Kernel,
    nl: &Nonlinearity,
    spec: &SymbolSpec,
    opts: &CertifyOptions,
) -> Result<ContractionCertificate> {
    if !(opts.eps > 0.0 && opts.eps < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "eps must lie in (0, 1), got {}",
            opts.eps
        )));
    }
    if kernel.grid() != nl.grid() {
        return Err(Error::GridMismatch);
    }
    let dim = kernel.grid().dim();
    let est = compute_na_with(kernel, spec, opts.sphere_samples);
    let sampled_gain = estimate_lipschitz(nl, opts.lipschitz_trials.max(2), opts.seed)?;
    let q = contraction_factor(dim, est.value, nl.gain());
    let threshold = kernel.admissibility_threshold();
    Ok(ContractionCertificate {
        dim,
        na: est.value,
        grid_na: est.grid_value,
        q,
        q_discrete: contraction_factor(dim, est.grid_value, nl.gain()),
        gain: nl.gain(),
        sampled_gain,
        orth_residual: est.orth_residual,
        threshold,
        divergence_indicator: est.divergence_indicator,
        masked_modes: est.masked_modes,
        eps: opts.eps,
        pass: q <= 1.0 - opts.eps && est.orth_residual <= threshold,
    })
}

/// Precomputed multiplier `(2 pi)^{d/2} G^(p) / (ln|p| - a)` of the
/// linear part of `t_a`, zero on the masked annulus and at the origin.
#[derive(Debug, Clone)]
pub struct PicardMap {
    multiplier: Vec<Complex64>,
    masked_modes: usize,
}

impl PicardMap {
    pub fn new(kernel: &Kernel, spec: &SymbolSpec) -> Self {
        let grid = kernel.grid();
        let factor = convolution_factor(grid.dim());
        let mut masked_modes = 0;
        let multiplier = kernel
            .spectrum()
            .coeffs()
            .iter()
            .zip(grid.mode_radii())
            .map(|(g, r)| {
                let rec = reciprocal_at_radius(r, spec);
                masked_modes += rec.masked as usize;
                g * (factor * rec.value)
            })
            .collect();
        Self {
            multiplier,
            masked_modes,
        }
    }

    pub fn masked_modes(&self) -> usize {
        self.masked_modes
    }

    /// Solves the linear auxiliary equation for a given right-hand side `w`.
    pub fn apply_linear(&self, w: &RealField) -> Result<RealField> {
        let mut spectrum = forward_ft(w)?;
        let scale = spectrum.l2() * self.multiplier.iter().map(|m| m.norm()).fold(0.0, f64::max);
        for (c, m) in spectrum.coeffs_mut().iter_mut().zip(&self.multiplier) {
            *c *= m;
        }
        let u = inverse_ft_scaled(&spectrum, scale)?;
        if u.values().iter().any(|v| !v.is_finite()) {
            return Err(Error::BlowUp);
        }
        Ok(u)
    }

    pub fn apply(&self, v: &RealField, nl: &Nonlinearity) -> Result<RealField> {
        let w = nl.eval(v)?;
        if w.values().iter().any(|x| !x.is_finite()) {
            return Err(Error::BlowUp);
        }
        self.apply_linear(&w)
    }
}

/// One application of `t_a`: `u = F^{-1}[(2 pi)^{d/2} G^ F(v)^ / (ln|p| - a)]`.
pub fn apply_map_ta(
    v: &RealField,
    kernel: &Kernel,
    nl: &Nonlinearity,
    spec: &SymbolSpec,
) -> Result<RealField> {
    v.ensure_same_grid(kernel.samples())?;
    PicardMap::new(kernel, spec).apply(v, nl)
}

/// Slack on the sampled contraction and norm bounds.
pub const SAMPLE_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionSample {
    pub pairs: usize,
    /// Largest `||t_a v1 - t_a v2|| / ||v1 - v2||` seen.
    pub max_ratio: f64,
    /// `(2 pi)^{d/2} N_a(grid) l`.
    pub q_discrete: f64,
    /// Every pair satisfies `||t_a v1 - t_a v2|| <= q_discrete ||v1 - v2|| + 1e-10`.
    pub contraction_ok: bool,
    /// Largest `||t_a v|| - (2 pi)^{d/2} N_a(grid) ||F(v)||` seen.
    pub norm_excess: f64,
    pub norm_bound_ok: bool,
}

/// Samples random field pairs and checks the Lipschitz bound of `t_a`
/// with the lattice `N_a`, together with the norm bound
/// `||t_a v|| <= (2 pi)^{d/2} N_a ||F(v)||`.
///
/// Fields are uniform with amplitudes cycling through `1`, `10` and
/// `10 / l`, so both the small-signal and the saturated regime are hit.
pub fn sample_contraction(
    kernel: &Kernel,
    nl: &Nonlinearity,
    spec: &SymbolSpec,
    pairs: usize,
    seed: u64,
) -> Result<ContractionSample> {
    if pairs == 0 {
        return Err(Error::InvalidParameter("need at least one pair".into()));
    }
    if kernel.grid() != nl.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = *kernel.grid();
    let map = PicardMap::new(kernel, spec);
    let grid_na = compute_na_with(kernel, spec, DEFAULT_SPHERE_SAMPLES).grid_value;
    let q_discrete = contraction_factor(grid.dim(), grid_na, nl.gain());
    let norm_factor = convolution_factor(grid.dim()) * grid_na;
    let wide = if nl.gain() > 0.0 {
        10.0 / nl.gain()
    } else {
        10.0
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_ratio = 0.0f64;
    let mut contraction_ok = true;
    let mut norm_excess = f64::NEG_INFINITY;
    for i in 0..pairs {
        let amp = [1.0, 10.0, wide][i % 3];
        let mut draw = || {
            let values = (0..grid.len())
                .map(|_| rng.random_range(-amp..=amp))
                .collect();
            RealField::new(grid, values)
        };
        let (v1, v2) = (draw()?, draw()?);
        let (t1, t2) = (map.apply(&v1, nl)?, map.apply(&v2, nl)?);
        let gap = v1.sub(&v2)?.l2();
        let image_gap = t1.sub(&t2)?.l2();
        if gap > 0.0 {
            max_ratio = max_ratio.max(image_gap / gap);
        }
        contraction_ok &= image_gap <= q_discrete * gap + SAMPLE_SLACK;
        for (v, t) in [(&v1, &t1), (&v2, &t2)] {
            norm_excess = norm_excess.max(t.l2() - norm_factor * nl.eval(v)?.l2());
        }
    }
    Ok(ContractionSample {
        pairs,
        max_ratio,
        q_discrete,
        contraction_ok,
        norm_excess,
        norm_bound_ok: norm_excess <= SAMPLE_SLACK,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport {
    /// L2 norm of the equation defect over unmasked, non-DC modes.
    pub residual: f64,
    /// L2 norm of `(2 pi)^{d/2} G^ F(u)^` on the masked annulus and the origin.
    pub excluded_energy: f64,
}

pub fn residual(
    u: &RealField,
    kernel: &Kernel,
    nl: &Nonlinearity,
    spec: &SymbolSpec,
) -> Result<ResidualReport> {
    u.ensure_same_grid(kernel.samples())?;
    let grid = kernel.grid();
    let factor = convolution_factor(grid.dim());
    let u_hat = forward_ft(u)?;
    let w_hat = forward_ft(&nl.eval(u)?)?;
    let g_hat = kernel.spectrum();
    let mut defect = 0.0;
    let mut excluded = 0.0;
    for (k, r) in grid.mode_radii().into_iter().enumerate() {
        let rhs = g_hat.coeffs()[k] * w_hat.coeffs()[k] * factor;
        if r == 0.0 || spec.is_masked(r) {
            excluded += rhs.norm_sqr();
        } else {
            defect += (u_hat.coeffs()[k] * spec.log_distance(r) - rhs).norm_sqr();
        }
    }
    Ok(ResidualReport {
        residual: (defect * grid.mode_volume()).sqrt(),
        excluded_energy: (excluded * grid.mode_volume()).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub certify: CertifyOptions,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 500,
            certify: CertifyOptions::default(),
        }
    }
}

/// Slack on the per-iteration ratio check `ratio <= q`.
pub const RATIO_SLACK: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub iterations: usize,
    pub converged: bool,
    /// `||v_k - v_{k-1}||_2` for `k = 1..=iterations`.
    pub update_norms: Vec<f64>,
    /// Ratios of consecutive update norms.
    pub contraction_ratios: Vec<f64>,
    /// `q^k / (1 - q) ||v_1 - v_0||_2`.
    pub apriori_bounds: Vec<f64>,
    /// `||v_k - u||_2` with `u` the returned field.
    pub distances_to_final: Vec<f64>,
    pub apriori_ok: bool,
    pub ratios_ok: bool,
    pub final_field: RealField,
    pub residual: ResidualReport,
    pub certificate: ContractionCertificate,
    /// Geometric mean of the contraction ratios.
    pub measured_rate: Option<f64>,
    /// Iterations predicted from the measured rate and the first step.
    pub predicted_iterations: Option<usize>,
    /// Iterations after which the a priori error with the certified `q`
    /// is below `tol`.
    pub iteration_bound: Option<usize>,
}

/// Iterations until the a priori error `rate^k / (1 - rate) * first`
/// drops below `tol`.
fn geometric_prediction(tol: f64, rate: f64, first: f64) -> Option<usize> {
    if !(rate > 0.0 && rate < 1.0) || first <= 0.0 {
        return None;
    }
    let k = ((tol * (1.0 - rate) / first).ln() / rate.ln()).ceil();
    Some(k.max(1.0) as usize)
}

/// Iterations until the stopping rule fires when updates shrink by `rate`
/// per step. The residual at an iterate is about the next update, so the
/// residual test fires one step ahead of the update test.
fn stopping_prediction(tol: f64, scale: f64, rate: f64, first: f64) -> Option<usize> {
    if !(rate > 0.0 && rate < 1.0) || first <= 0.0 {
        return None;
    }
    let steps = |target: f64| (target / first).ln() / rate.ln();
    let by_update = 1.0 + steps(tol * scale).ceil();
    let by_residual = steps(tol).ceil();
    Some(by_update.min(by_residual).max(1.0) as usize)
}

pub fn picard_solve(
    kernel: &Kernel,
    nl: &Nonlinearity,
    spec: &SymbolSpec,
    v0: Option<&RealField>,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    if !(opts.tol.is_finite() && opts.tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tol must be positive, got {}",
            opts.tol
        )));
    }
    if opts.max_iter == 0 {
        return Err(Error::InvalidParameter(
            "max_iter must be at least 1".into(),
        ));
    }
    let certificate = certify(kernel, nl, spec, &opts.certify)?;
    if !certificate.pass {
        return Err(Error::CertificateFailed(Box::new(certificate)));
    }
    let start = match v0 {
        Some(v) => {
            v.ensure_same_grid(kernel.samples())?;
            v.clone()
        }
        None => RealField::zeros(*kernel.grid()),
    };
    let map = PicardMap::new(kernel, spec);

    let mut v = start.clone();
    let mut update_norms = Vec::new();
    let mut contraction_ratios = Vec::new();
    let mut converged = false;
    let mut last_residual = None;
    for _ in 0..opts.max_iter {
        let u = map.apply(&v, nl)?;
        let update = u.sub(&v)?.l2();
        if let Some(&prev) = update_norms.last() {
            if prev > 0.0 {
                contraction_ratios.push(update / prev);
            }
        }
        update_norms.push(update);
        let res = residual(&u, kernel, nl, spec)?;
        v = u;
        last_residual = Some(res);
        if update <= opts.tol * v.l2().max(1.0) || res.residual <= opts.tol {
            converged = true;
            break;
        }
    }
    let iterations = update_norms.len();
    let final_field = v;
    let residual = last_residual.expect("at least one iteration");

    // replay to measure the distance of every iterate to the returned field
    let mut distances_to_final = Vec::with_capacity(iterations);
    let mut w = start;
    for _ in 0..iterations {
        w = map.apply(&w, nl)?;
        distances_to_final.push(w.sub(&final_field)?.l2());
    }

    let q = certificate.q;
    let first = update_norms[0];
    let last = *update_norms.last().unwrap();
    let apriori_bounds: Vec<f64> = (1..=iterations)
        .map(|k| q.powi(k as i32) / (1.0 - q) * first)
        .collect();
    let scale = final_field.l2().max(1.0);
    let slack = q / (1.0 - q) * last + 1e-12 * scale;
    let apriori_ok = distances_to_final
        .iter()
        .zip(&apriori_bounds)
        .all(|(d, b)| *d <= b + slack);
    let ratios_ok = contraction_ratios.iter().all(|r| *r <= q + RATIO_SLACK);
    let measured_rate = if contraction_ratios.is_empty() {
        None
    } else {
        let log_mean = contraction_ratios.iter().map(|r| r.ln()).sum::<f64>()
            / contraction_ratios.len() as f64;
        Some(log_mean.exp())
    };
    Ok(SolveReport {
        iterations,
        converged,
        update_norms,
        contraction_ratios,
        apriori_bounds,
        distances_to_final,
        apriori_ok,
        ratios_ok,
        final_field,
        residual,
        certificate,
        measured_rate,
        predicted_iterations: measured_rate
            .and_then(|r| stopping_prediction(opts.tol, scale, r, first)),
        iteration_bound: geometric_prediction(opts.tol, q, first),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrivialityReport {
    pub tau: f64,
    /// Modes where both `|G^|` and `|F(0,.)^|` exceed `tau` times their maxima.
    pub overlap_modes: usize,
    pub raw_fraction: f64,
    /// Overlap restricted to modes the solver actually uses.
    pub effective_modes: usize,
    pub effective_fraction: f64,
}

/// Default relative threshold for the support overlap.
pub const DEFAULT_TAU: f64 = 1e-8;

pub fn triviality_indicator(
    kernel: &Kernel,
    nl: &Nonlinearity,
    spec: &SymbolSpec,
    tau: f64,
) -> Result<TrivialityReport> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tau must be positive, got {tau}"
        )));
    }
    let grid = kernel.grid();
    let zero = RealField::zeros(*grid);
    let f_hat: SpectralField = forward_ft(&nl.eval(&zero)?)?;
    let g_hat = kernel.spectrum();
    let max_of = |c: &[Complex64]| c.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let (g_max, f_max) = (max_of(g_hat.coeffs()), max_of(f_hat.coeffs()));
    let mut overlap_modes = 0;
    let mut effective_modes = 0;
    if g_max > 0.0 && f_max > 0.0 {
        for (k, r) in grid.mode_radii().into_iter().enumerate() {
            let both =
                g_hat.coeffs()[k].norm() > tau * g_max && f_hat.coeffs()[k].norm() > tau * f_max;
            if both {
                overlap_modes += 1;
                if r > 0.0 && !spec.is_masked(r) {
                    effective_modes += 1;
                }
            }
        }
    }
    let total = grid.len() as f64;
    Ok(TrivialityReport {
        tau,
        overlap_modes,
        raw_fraction: overlap_modes as f64 / total,
        effective_modes,
        effective_fraction: effective_modes as f64 / total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{make_kernel, KernelFamily};
    use crate::nonlinearity::{offset_field, Family, OffsetProfile};
    use crate::spectral::Grid;

    fn grid() -> Grid {
        Grid::new(1, 20.0, 1024).unwrap()
    }

    fn difference() -> Kernel {
        make_kernel(
            KernelFamily::Difference {
                w1: 1.0,
                w2: 2.0,
                c1: 1.0,
                a: 0.0,
            },
            &grid(),
        )
        .unwrap()
    }

    fn bump_offset() -> RealField {
        offset_field(
            OffsetProfile::Gaussian {
                amplitude: 0.5,
                width: 1.0,
            },
            &grid(),
        )
        .unwrap()
    }

    fn spec() -> SymbolSpec {
        SymbolSpec::new(0.0, 0.1).unwrap()
    }

    #[test]
    fn contraction_factor_arithmetic() {
        let q = contraction_factor(1, 0.1, 0.5);
        assert!((q - (2.0 * PI).sqrt() * 0.05).abs() < 1e-15);
        assert!((q - 0.12533).abs() < 1e-5);
    }

    #[test]
    fn zero_kernel_certifies() {
        let nl = Nonlinearity::new(Family::SaturatingSine, 0.1, bump_offset()).unwrap();
        let cert = certify(
            &Kernel::zero(grid()),
            &nl,
            &spec(),
            &CertifyOptions::default(),
        )
        .unwrap();
        assert_eq!(cert.q, 0.0);
        assert!(cert.pass);
    }

    #[test]
    fn raw_gaussian_fails_certificate() {
        let k = make_kernel(
            KernelFamily::Gaussian {
                width: 1.0,
                amplitude: 1.0,
            },
            &grid(),
        )
        .unwrap();
        let nl = Nonlinearity::new(Family::SaturatingSine, 1e-3, bump_offset()).unwrap();
        let cert = certify(&k, &nl, &spec(), &CertifyOptions::default()).unwrap();
        assert!(!cert.pass);
        assert!(cert.q < 0.9);
        assert!(cert.divergence_indicator > 6.0);
        let err = picard_solve(&k, &nl, &spec(), None, &SolveOptions::default()).unwrap_err();
        assert!(matches!(err, Error::CertificateFailed(_)));
    }

    #[test]
    fn sampled_contraction_is_deterministic_and_bounded() {
        let nl = Nonlinearity::new(Family::Rational, 0.2, bump_offset()).unwrap();
        let a = sample_contraction(&difference(), &nl, &spec(), 30, 5).unwrap();
        let b = sample_contraction(&difference(), &nl, &spec(), 30, 5).unwrap();
        assert_eq!(a, b);
        assert!(a.contraction_ok && a.norm_bound_ok, "{a:?}");
        assert!(a.max_ratio > 0.0 && a.max_ratio <= a.q_discrete + 1e-10);
        assert!(sample_contraction(&difference(), &nl, &spec(), 0, 5).is_err());
    }

    #[test]
    fn certify_validates_eps() {
        let nl = Nonlinearity::new(Family::SaturatingSine, 0.1, bump_offset()).unwrap();
        let opts = CertifyOptions {
            eps: 1.0,
            ..Default::default()
        };
        assert!(certify(&difference(), &nl, &spec(), &opts).is_err());
    }

    #[test]
    fn zero_rhs_is_fixed_in_one_step() {
        let nl = Nonlinearity::new(Family::SaturatingSine, 0.1, RealField::zeros(grid())).unwrap();
        let rep =
            picard_solve(&difference(), &nl, &spec(), None, &SolveOptions::default()).unwrap();
        assert_eq!(rep.iterations, 1);
        assert!(rep.converged);
        assert_eq!(rep.final_field.max_abs(), 0.0);
        assert_eq!(rep.residual.residual, 0.0);
    }

    #[test]
    fn reference_problem_converges() {
        let nl = Nonlinearity::new(Family::SaturatingSine, 0.1, bump_offset()).unwrap();
        let opts = SolveOptions::default();
        let rep = picard_solve(&difference(), &nl, &spec(), None, &opts).unwrap();
        assert!(rep.converged && rep.ratios_ok && rep.apriori_ok);
        assert!(rep.residual.residual <= 10.0 * opts.tol);
        let predicted = rep.predicted_iterations.unwrap();
        assert!(
            rep.iterations.abs_diff(predicted) <= 2,
            "{} vs {predicted}",
            rep.iterations
        );
        assert!(rep.iterations <= rep.iteration_bound.unwrap() + 1);

        let again =
            picard_solve(&difference(), &nl, &spec(), Some(&rep.final_field), &opts).unwrap();
        assert_eq!(again.iterations, 1);
        assert!(again.update_norms[0] <= 10.0 * opts.tol);
    }

    #[test]
    fn max_iter_flags_non_convergence() {
        let nl = Nonlinearity::new(Family::SaturatingSine, 0.1, bump_offset()).unwrap();
        let opts = SolveOptions {
            max_iter: 1,
            ..Default::default()
        };
        let rep = picard_solve(&difference(), &nl, &spec(), None, &opts).unwrap();
        assert!(!rep.converged);
        assert_eq!(rep.iterations, 1);
    }

    #[test]
    fn residual_of_zero_with_offset() {
        let k = difference();
        let nl = Nonlinearity::new(Family::SaturatingSine, 0.1, bump_offset()).unwrap();
        let rep = residual(&RealField::zeros(grid()), &k, &nl, &spec()).unwrap();
        // direct formula over unmasked, non-DC modes
        let h_hat = forward_ft(&bump_offset()).unwrap();
        let g = grid();
        let s = spec();
        let mut sum = 0.0;
        for (k_idx, r) in g.mode_radii().into_iter().enumerate() {
            if r > 0.0 && !s.is_masked(r) {
                sum += (k.spectrum().coeffs()[k_idx] * h_hat.coeffs()[k_idx]).norm_sqr();
            }
        }
        let expected = (2.0 * PI).sqrt() * (sum * g.mode_volume()).sqrt();
        assert!((rep.residual - expected).abs() <= 1e-12 * expected);
        assert!(rep.excluded_energy > 0.0);
    }

    #[test]
    fn linearized_single_mode_response() {
        let g = grid();
        let k = difference();
        let s = spec();
        let nl = Nonlinearity::new(Family::SaturatingSine, 0.1, RealField::zeros(g)).unwrap();
        let p0 = 10.0 * g.mode_spacing();
        let g_hat = crate::spectral::hat_at(k.samples(), &[p0]).re;
        let gain = (2.0 * PI).sqrt() * g_hat * 0.1 / p0.ln();
        for delta in [1e-3, 1e-4] {
            let v = RealField::from_fn(g, |x| delta * (p0 * x[0]).cos()).unwrap();
            let u = apply_map_ta(&v, &k, &nl, &s).unwrap();
            let expected = v.scale(gain);
            let err = u.sub(&expected).unwrap().l2() / expected.l2();
            // sin(d cos) = d cos - d^3 cos^3 / 6 + ...
            assert!(err <= delta * delta, "delta {delta}: {err}");
        }
    }

    #[test]
    fn triviality_cases() {
        let k = difference();
        let s = spec();
        let nl0 = Nonlinearity::new(Family::SaturatingSine, 0.1, RealField::zeros(grid())).unwrap();
        let rep = triviality_indicator(&k, &nl0, &s, 1e-6).unwrap();
        assert_eq!(rep.raw_fraction, 0.0);
        let nl = Nonlinearity::new(Family::SaturatingSine, 0.1, bump_offset()).unwrap();
        let rep = triviality_indicator(&k, &nl, &s, 1e-6).unwrap();
        assert!(rep.effective_fraction > 0.0);
    }
}
