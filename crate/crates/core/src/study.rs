//! Approximate problems along a kernel sequence `G_m -> G`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::{compute_na, symbol_ratio_distance, KernelSequence};
use crate::nonlinearity::Nonlinearity;
use crate::solver::{certify, contraction_factor, picard_solve, SolveOptions, SolveReport};
use crate::spectral::SymbolSpec;

/// Slack on the per-row bound `sol_dist <= bound_rhs`.
pub const ROW_BOUND_SLACK: f64 = 1e-10;
/// Relative slack (times `scale`) on the sharp bound with `1 - q_m`.
pub const SHARP_BOUND_SLACK: f64 = 1e-8;
/// Allowed growth factor in the `sol_dist` monotonicity diagnostic.
pub const MONOTONE_FACTOR: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequenceRow {
    pub m: usize,
    pub l1_dist: f64,
    pub wl1_dist: f64,
    pub ratio_dist: f64,
    pub nam: f64,
    pub qm: f64,
    pub sol_dist: f64,
    /// `(2 pi)^{d/2} / eps * ratio_dist * ||F(u)||_2`.
    pub bound_rhs: f64,
    pub bound_ok: bool,
    /// `sol_dist (1 - q_m) <= (2 pi)^{d/2} ratio_dist ||F(u)||_2 + 1e-8 scale`.
    pub sharp_ok: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct SequenceStudy {
    pub rows: Vec<SequenceRow>,
    pub limit: SolveReport,
    /// `||F(u)||_2` of the limit solution.
    pub scale: f64,
    /// Diagnostic only: `sol_dist` never grows by more than 1.5x.
    pub monotone_diagnostic: bool,
    pub all_bounds_ok: bool,
}

pub fn run_sequence(
    seq: &KernelSequence,
    nl: &Nonlinearity,
    spec: &SymbolSpec,
    opts: &SolveOptions,
) -> Result<SequenceStudy> {
    let eps = opts.certify.eps;
    let limit_cert = certify(&seq.limit, nl, spec, &opts.certify)?;
    if !limit_cert.pass {
        return Err(Error::CertificateFailed(Box::new(limit_cert)));
    }
    for (i, g) in seq.members.iter().enumerate() {
        let cert = certify(g, nl, spec, &opts.certify)?;
        if !cert.pass {
            return Err(Error::MemberCertificateFailed {
                m: i + 1,
                q: cert.q,
            });
        }
    }

    let limit = picard_solve(&seq.limit, nl, spec, None, opts)?;
    let scale = nl.eval(&limit.final_field)?.l2();
    let dim = seq.limit.grid().dim();
    let factor = (2.0 * PI).powf(dim as f64 / 2.0);

    let rows = seq
        .members
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            let member = picard_solve(g, nl, spec, None, opts)?;
            let ratio_dist = symbol_ratio_distance(g, &seq.limit, spec)?;
            let nam = compute_na(g, spec).value;
            let qm = contraction_factor(dim, nam, nl.gain());
            let sol_dist = member.final_field.sub(&limit.final_field)?.l2();
            let bound_rhs = factor / eps * ratio_dist * scale;
            let (l1_dist, wl1_dist) = seq.distances[i];
            Ok(SequenceRow {
                m: i + 1,
                l1_dist,
                wl1_dist,
                ratio_dist,
                nam,
                qm,
                sol_dist,
                bound_rhs,
                bound_ok: sol_dist <= bound_rhs + ROW_BOUND_SLACK,
                sharp_ok: sol_dist * (1.0 - qm)
                    <= factor * ratio_dist * scale + SHARP_BOUND_SLACK * scale,
                iterations: member.iterations,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let monotone_diagnostic = rows
        .windows(2)
        .all(|w| w[1].sol_dist <= MONOTONE_FACTOR * w[0].sol_dist + ROW_BOUND_SLACK);
    let all_bounds_ok = rows.iter().all(|r| r.bound_ok && r.sharp_ok);
    Ok(SequenceStudy {
        rows,
        limit,
        scale,
        monotone_diagnostic,
        all_bounds_ok,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaA2Row {
    pub m: usize,
    pub ratio_dist: f64,
    pub nam: f64,
    /// `|N_{a,m} - N_a|`.
    pub na_gap: f64,
    pub qm: f64,
    pub orth_residual: f64,
    pub admissible: bool,
    pub divergence_indicator: f64,
    /// `na_gap <= ratio_dist` up to rounding.
    pub gap_ok: bool,
}

#[derive(Debug, Clone)]
pub struct LemmaA2Table {
    pub rows: Vec<LemmaA2Row>,
    pub na_limit: f64,
    pub q_limit: f64,
    /// `N_a` of the limit kernel; the convergence thresholds are relative to it.
    pub scale: f64,
    /// `ratio_dist` non-increasing and at most `1e-6 scale` at the end.
    pub ratio_converges: bool,
    /// `|N_{a,m} - N_a|` at most `1e-6 scale` at the end, and bounded by
    /// `ratio_dist` on every row.
    pub na_converges: bool,
    /// All members certified at `eps` implies the limit is too.
    pub certificate_persists: bool,
    /// First member violating the orthogonality conditions.
    pub first_inadmissible: Option<usize>,
    pub passed: bool,
}

pub const LEMMA_A2_TOLERANCE: f64 = 1e-6;
const GAP_ROUNDING: f64 = 1e-12;

pub fn verify_lemma_a2(
    seq: &KernelSequence,
    spec: &SymbolSpec,
    gain: f64,
    eps: f64,
) -> Result<LemmaA2Table> {
    let dim = seq.limit.grid().dim();
    let limit_est = compute_na(&seq.limit, spec);
    let na_limit = limit_est.value;
    let q_limit = contraction_factor(dim, na_limit, gain);
    let scale = na_limit;
    let rows = seq
        .members
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            let est = compute_na(g, spec);
            let ratio_dist = symbol_ratio_distance(g, &seq.limit, spec)?;
            let na_gap = (est.value - na_limit).abs();
            Ok(LemmaA2Row {
                m: i + 1,
                ratio_dist,
                nam: est.value,
                na_gap,
                qm: contraction_factor(dim, est.value, gain),
                orth_residual: est.orth_residual,
                admissible: est.orth_residual <= g.admissibility_threshold(),
                divergence_indicator: est.divergence_indicator,
                gap_ok: na_gap <= ratio_dist + GAP_ROUNDING * na_limit.max(est.value),
            })
        })
        .collect::<Result<Vec<LemmaA2Row>>>()?;

    let last = rows.last();
    let ratio_converges = rows.windows(2).all(|w| w[1].ratio_dist <= w[0].ratio_dist)
        && last.is_some_and(|r| r.ratio_dist <= LEMMA_A2_TOLERANCE * scale);
    let na_converges = rows.iter().all(|r| r.gap_ok)
        && last.is_some_and(|r| r.na_gap <= LEMMA_A2_TOLERANCE * scale);
    let members_certified = rows.iter().all(|r| r.qm <= 1.0 - eps);
    let certificate_persists = !members_certified || q_limit <= 1.0 - eps + 1e-12;
    let first_inadmissible = rows.iter().find(|r| !r.admissible).map(|r| r.m);
    let limit_admissible = limit_est.orth_residual <= seq.limit.admissibility_threshold();
    let passed = ratio_converges
        && na_converges
        && certificate_persists
        && first_inadmissible.is_none()
        && limit_admissible;
    Ok(LemmaA2Table {
        rows,
        na_limit,
        q_limit,
        scale,
        ratio_converges,
        na_converges,
        certificate_persists,
        first_inadmissible,
        passed,
    })
}
