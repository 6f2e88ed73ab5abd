//! Subcommand drivers. Each writes its files into the output directory and
//! returns a summary plus the exit status it earned.

use anyhow::Result;
use loglap_core::dump::write_field;
use loglap_core::kernels::make_sequence;
use loglap_core::solver::{certify, picard_solve, ContractionCertificate, SolveReport};
use loglap_core::spectral::Grid;
use loglap_core::study::{run_sequence, verify_lemma_a2, LemmaA2Table, SequenceStudy};
use loglap_core::Error;

use crate::checks::{self, Check};
use crate::config::Setup;
use crate::output::{opt_real, real, OutputDir, Summary, Table};
use crate::Status;

#[derive(Debug)]
pub struct Outcome {
    pub status: Status,
    pub summary: Summary,
}

fn certificate_summary(s: &mut Summary, cert: &ContractionCertificate) {
    s.text("certificate_pass", cert.pass)
        .real("q", cert.q)
        .real("q_discrete", cert.q_discrete)
        .real("na", cert.na)
        .real("grid_na", cert.grid_na)
        .real("gain", cert.gain)
        .real("sampled_gain", cert.sampled_gain)
        .real("eps", cert.eps)
        .real("orth_residual", cert.orth_residual)
        .real("orth_threshold", cert.threshold)
        .real("divergence_indicator", cert.divergence_indicator)
        .text("masked_modes", cert.masked_modes);
}

pub fn cmd_certify(setup: &Setup, out: &OutputDir) -> Result<Outcome> {
    let nl = setup.nonlinearity()?;
    let cert = certify(&setup.kernel, nl, &setup.spec, &setup.solve.certify)?;
    let mut summary = Summary::new("certify");
    certificate_summary(&mut summary, &cert);
    out.write_text("certificate.txt", &summary.render())?;
    let status = if cert.pass {
        Status::Success
    } else {
        Status::CertificateFailed
    };
    Ok(Outcome { status, summary })
}

pub fn iteration_table(rep: &SolveReport) -> Table {
    let mut t = Table::new(&[
        "k",
        "update_norm",
        "ratio",
        "apriori_bound",
        "distance_to_final",
    ]);
    let aligned = rep.contraction_ratios.len() + 1 == rep.iterations;
    for k in 0..rep.iterations {
        let ratio = (aligned && k > 0).then(|| rep.contraction_ratios[k - 1]);
        t.push(vec![
            (k + 1).to_string(),
            real(rep.update_norms[k]),
            opt_real(ratio),
            real(rep.apriori_bounds[k]),
            real(rep.distances_to_final[k]),
        ]);
    }
    t
}

pub fn cmd_solve(setup: &Setup, out: &OutputDir) -> Result<Outcome> {
    let nl = setup.nonlinearity()?;
    let mut summary = Summary::new("solve");
    let result = picard_solve(
        &setup.kernel,
        nl,
        &setup.spec,
        setup.v0.as_ref(),
        &setup.solve,
    );
    let rep = match result {
        Ok(rep) => rep,
        Err(Error::CertificateFailed(cert)) => {
            // refuse rather than iterate without a contraction
            summary.text("refused", true);
            certificate_summary(&mut summary, &cert);
            out.write_text("solve_summary.txt", &summary.render())?;
            return Ok(Outcome {
                status: Status::CertificateFailed,
                summary,
            });
        }
        Err(e) => return Err(e.into()),
    };
    summary
        .text("refused", false)
        .text("converged", rep.converged)
        .text("iterations", rep.iterations)
        .text(
            "predicted_iterations",
            rep.predicted_iterations
                .map_or("none".into(), |v| v.to_string()),
        )
        .text(
            "iteration_bound",
            rep.iteration_bound.map_or("none".into(), |v| v.to_string()),
        )
        .text("measured_rate", opt_real(rep.measured_rate))
        .text("ratios_ok", rep.ratios_ok)
        .text("apriori_ok", rep.apriori_ok)
        .real("tol", setup.solve.tol)
        .real("residual", rep.residual.residual)
        .real("excluded_energy", rep.residual.excluded_energy)
        .real("solution_l2", rep.final_field.l2())
        .real("solution_max_abs", rep.final_field.max_abs());
    certificate_summary(&mut summary, &rep.certificate);
    out.write_text("iterations.csv", &iteration_table(&rep).render())?;
    if setup.dump_field {
        let path = out.path("solution.llap");
        write_field(&path, &rep.final_field)?;
        summary.text("field_dump", path.display());
    }
    out.write_text("solve_summary.txt", &summary.render())?;
    let status = if rep.converged {
        Status::Success
    } else {
        Status::NotConverged
    };
    Ok(Outcome { status, summary })
}

pub fn sequence_table(study: &SequenceStudy) -> Table {
    let mut t = Table::new(&[
        "m",
        "l1_dist",
        "wl1_dist",
        "ratio_dist",
        "nam",
        "qm",
        "sol_dist",
        "bound_rhs",
        "bound_ok",
        "sharp_ok",
        "iterations",
    ]);
    for r in &study.rows {
        t.push(vec![
            r.m.to_string(),
            real(r.l1_dist),
            real(r.wl1_dist),
            real(r.ratio_dist),
            real(r.nam),
            real(r.qm),
            real(r.sol_dist),
            real(r.bound_rhs),
            r.bound_ok.to_string(),
            r.sharp_ok.to_string(),
            r.iterations.to_string(),
        ]);
    }
    t
}

pub fn lemma_table(table: &LemmaA2Table) -> Table {
    let mut t = Table::new(&[
        "m",
        "ratio_dist",
        "nam",
        "na_gap",
        "qm",
        "orth_residual",
        "admissible",
        "divergence_indicator",
        "gap_ok",
    ]);
    for r in &table.rows {
        t.push(vec![
            r.m.to_string(),
            real(r.ratio_dist),
            real(r.nam),
            real(r.na_gap),
            real(r.qm),
            real(r.orth_residual),
            r.admissible.to_string(),
            real(r.divergence_indicator),
            r.gap_ok.to_string(),
        ]);
    }
    t
}

pub fn cmd_sequence(setup: &Setup, out: &OutputDir) -> Result<Outcome> {
    let nl = setup.nonlinearity()?;
    let schedule = setup.schedule()?;
    let seq = make_sequence(&setup.kernel, schedule, &setup.spec)?;
    let eps = setup.solve.certify.eps;
    let lemma = verify_lemma_a2(&seq, &setup.spec, nl.gain(), eps)?;
    out.write_text("lemma_a2.csv", &lemma_table(&lemma).render())?;

    let mut summary = Summary::new("sequence");
    summary
        .text("members", seq.members.len())
        .text("lemma_a2_passed", lemma.passed)
        .text("ratio_converges", lemma.ratio_converges)
        .text("na_converges", lemma.na_converges)
        .text("certificate_persists", lemma.certificate_persists)
        .text(
            "first_inadmissible",
            lemma
                .first_inadmissible
                .map_or("none".into(), |m| m.to_string()),
        )
        .real("na_limit", lemma.na_limit)
        .real("q_limit", lemma.q_limit);

    let study = match run_sequence(&seq, nl, &setup.spec, &setup.solve) {
        Ok(study) => study,
        Err(Error::MemberCertificateFailed { m, q }) => {
            summary.text("refused_member", m).real("refused_q", q);
            out.write_text("sequence_summary.txt", &summary.render())?;
            return Ok(Outcome {
                status: Status::CertificateFailed,
                summary,
            });
        }
        Err(Error::CertificateFailed(cert)) => {
            summary.text("refused_member", "limit");
            certificate_summary(&mut summary, &cert);
            out.write_text("sequence_summary.txt", &summary.render())?;
            return Ok(Outcome {
                status: Status::CertificateFailed,
                summary,
            });
        }
        Err(e) => return Err(e.into()),
    };
    out.write_text("sequence.csv", &sequence_table(&study).render())?;
    summary
        .text("all_bounds_ok", study.all_bounds_ok)
        .text("monotone_diagnostic", study.monotone_diagnostic)
        .real("scale", study.scale)
        .text("limit_iterations", study.limit.iterations);
    out.write_text("sequence_summary.txt", &summary.render())?;
    let status = if study.all_bounds_ok && lemma.passed {
        Status::Success
    } else {
        Status::CheckFailed
    };
    Ok(Outcome { status, summary })
}

fn check_outcome(command: &str, file: &str, checks: &[Check], out: &OutputDir) -> Result<Outcome> {
    out.write_text(file, &checks::table(checks).render())?;
    let mut summary = Summary::new(command);
    for c in checks {
        summary.text(c.name, if c.passed { "pass" } else { "fail" });
    }
    let passed = checks.iter().all(|c| c.passed);
    summary.text("all_passed", passed);
    let status = if passed {
        Status::Success
    } else {
        Status::CheckFailed
    };
    Ok(Outcome { status, summary })
}

pub fn cmd_verify(setup: &Setup, out: &OutputDir) -> Result<Outcome> {
    let checks = checks::verify(setup)?;
    check_outcome("verify", "verify.csv", &checks, out)
}

pub fn cmd_ft_selftest(grid: &Grid, seed: u64, out: &OutputDir) -> Result<Outcome> {
    let checks = checks::ft_selftest(grid, seed)?;
    check_outcome("ft-selftest", "ft_selftest.csv", &checks, out)
}
