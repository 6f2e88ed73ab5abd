use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use super::projection::project_orthogonal;
use super::sphere::{sphere_report, DEFAULT_SPHERE_SAMPLES};
use super::Kernel;
use crate::error::{Error, Result};
use crate::spectral::{inverse_ft, RealField, SpectralField, SymbolSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleKind {
    /// `G_m = chi_m G` with a smooth cutoff at radius `R_m = start + (m-1) step`.
    Truncate,
    /// `G_m^ = G^ exp(-(start/m)^2 |p|^2 / 2)`.
    Mollify,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub kind: ScheduleKind,
    pub members: usize,
    /// First cutoff radius, or the mollifier scale.
    pub start: f64,
    /// Radius increment per member (truncation only).
    pub step: f64,
    /// Width of the smooth cutoff transition (truncation only).
    pub transition: f64,
    /// Projection taper; `None` keeps members as constructed.
    pub taper: Option<f64>,
    /// 1-based member left unprojected, as a negative control.
    pub skip_projection: Option<usize>,
}

impl Schedule {
    pub fn truncate(members: usize) -> Self {
        Self {
            kind: ScheduleKind::Truncate,
            members,
            start: 4.0,
            step: 2.0,
            transition: 2.0,
            taper: Some(1.0),
            skip_projection: None,
        }
    }

    pub fn mollify(members: usize) -> Self {
        Self {
            kind: ScheduleKind::Mollify,
            members,
            start: 1.0,
            step: 0.0,
            transition: 0.0,
            taper: Some(1.0),
            skip_projection: None,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.members == 0 {
            return bad("schedule needs at least one member".into());
        }
        if !(self.start.is_finite() && self.start > 0.0) {
            return bad(format!(
                "schedule start must be positive, got {}",
                self.start
            ));
        }
        if self.kind == ScheduleKind::Truncate {
            if !(self.step.is_finite() && self.step > 0.0) {
                return bad(format!(
                    "truncation step must be positive, got {}",
                    self.step
                ));
            }
            if !(self.transition.is_finite() && self.transition > 0.0) {
                return bad(format!(
                    "truncation transition must be positive, got {}",
                    self.transition
                ));
            }
        }
        if let Some(m) = self.skip_projection {
            if m == 0 || m > self.members {
                return bad(format!("skip_projection {m} is not a member index"));
            }
        }
        Ok(())
    }
}

/// Kernels `G_1, ..., G_M` approaching `G` together with
/// `(||G_m - G||_1, ||x (G_m - G)||_1)`.
#[derive(Debug, Clone)]
pub struct KernelSequence {
    pub members: Vec<Kernel>,
    pub limit: Kernel,
    pub distances: Vec<(f64, f64)>,
    pub a: f64,
}

impl KernelSequence {
    /// Recomputes the distance columns from the stored members.
    pub fn recompute_distances(&self) -> Result<Vec<(f64, f64)>> {
        self.members
            .iter()
            .map(|g| {
                let n = g.samples().sub(self.limit.samples())?.norms();
                Ok((n.l1, n.weighted_l1))
            })
            .collect()
    }
}

fn cutoff(r: f64, radius: f64, width: f64) -> f64 {
    let t = (r - radius) / width;
    if t <= 0.0 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        let f = |s: f64| (-1.0 / s).exp();
        f(1.0 - t) / (f(t) + f(1.0 - t))
    }
}

fn raw_member(limit: &Kernel, schedule: &Schedule, m: usize) -> Result<Kernel> {
    let grid = *limit.grid();
    let family = limit.family().cloned();
    match schedule.kind {
        ScheduleKind::Truncate => {
            let radius = schedule.start + (m - 1) as f64 * schedule.step;
            let values = limit
                .samples()
                .values()
                .iter()
                .zip(grid.point_radii())
                .map(|(g, r)| g * cutoff(r, radius, schedule.transition))
                .collect();
            Ok(Kernel::from_field(RealField::new(grid, values)?, family))
        }
        ScheduleKind::Mollify => {
            let scale = schedule.start / m as f64;
            let coeffs: Vec<Complex64> = limit
                .spectrum()
                .coeffs()
                .iter()
                .zip(grid.mode_radii())
                .map(|(c, r)| c * (-0.5 * scale * scale * r * r).exp())
                .collect();
            let field = inverse_ft(&SpectralField::new(grid, coeffs)?)?;
            Ok(Kernel::from_field(field, family))
        }
    }
}

/// Builds the sequence and re-projects each member onto the admissible set.
pub fn make_sequence(
    limit: &Kernel,
    schedule: &Schedule,
    spec: &SymbolSpec,
) -> Result<KernelSequence> {
    schedule.validate()?;
    let residual = sphere_report(limit, spec.a, DEFAULT_SPHERE_SAMPLES).residual;
    let threshold = limit.admissibility_threshold();
    if residual > threshold {
        return Err(Error::InadmissibleLimit {
            residual,
            threshold,
        });
    }
    let members = (1..=schedule.members)
        .into_par_iter()
        .map(|m| {
            let raw = raw_member(limit, schedule, m)?;
            match schedule.taper {
                Some(taper) if schedule.skip_projection != Some(m) => {
                    project_orthogonal(&raw, spec, taper)
                }
                _ => Ok(raw),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut seq = KernelSequence {
        members,
        limit: limit.clone(),
        distances: Vec::new(),
        a: spec.a,
    };
    seq.distances = seq.recompute_distances()?;
    Ok(seq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{make_kernel, KernelFamily};
    use crate::spectral::Grid;

    fn setup() -> (Kernel, SymbolSpec) {
        let g = Grid::new(1, 20.0, 1024).unwrap();
        let k = make_kernel(
            KernelFamily::Difference {
                w1: 1.0,
                w2: 2.0,
                c1: 1.0,
                a: 0.0,
            },
            &g,
        )
        .unwrap();
        (k, SymbolSpec::new(0.0, 0.1).unwrap())
    }

    #[test]
    fn truncation_distances_decrease() {
        let (k, spec) = setup();
        let seq = make_sequence(&k, &Schedule::truncate(6), &spec).unwrap();
        assert_eq!(seq.members.len(), 6);
        for w in seq.distances.windows(2) {
            assert!(w[1].0 < w[0].0 && w[1].1 < w[0].1, "{:?}", seq.distances);
        }
        assert!(seq.distances[5].0 <= 1e-6);
        for m in &seq.members {
            let r = sphere_report(m, 0.0, DEFAULT_SPHERE_SAMPLES).residual;
            assert!(r <= m.admissibility_threshold());
        }
    }

    #[test]
    fn mollified_sequence_converges() {
        let (k, spec) = setup();
        let seq = make_sequence(&k, &Schedule::mollify(6), &spec).unwrap();
        for w in seq.distances.windows(2) {
            assert!(w[1].0 < w[0].0);
        }
    }

    #[test]
    fn single_member_matches_truncation_error() {
        let (k, spec) = setup();
        let mut sched = Schedule::truncate(1);
        sched.taper = None;
        let seq = make_sequence(&k, &sched, &spec).unwrap();
        let tail: f64 = k
            .samples()
            .values()
            .iter()
            .zip(k.grid().point_radii())
            .map(|(g, r)| g.abs() * (1.0 - cutoff(r, 4.0, 2.0)))
            .sum::<f64>()
            * k.grid().cell_volume();
        assert!((seq.distances[0].0 - tail).abs() <= 1e-12 * tail);
    }

    #[test]
    fn zero_kernel_sequence() {
        let g = Grid::new(1, 20.0, 256).unwrap();
        let spec = SymbolSpec::new(0.0, 0.1).unwrap();
        let seq = make_sequence(&Kernel::zero(g), &Schedule::truncate(3), &spec).unwrap();
        assert!(seq.distances.iter().all(|&(a, b)| a == 0.0 && b == 0.0));
        assert!(seq.members.iter().all(|m| m.l1() == 0.0));
    }

    #[test]
    fn rejects_inadmissible_limit() {
        let g = Grid::new(1, 20.0, 1024).unwrap();
        let k = make_kernel(
            KernelFamily::Gaussian {
                width: 1.0,
                amplitude: 1.0,
            },
            &g,
        )
        .unwrap();
        let spec = SymbolSpec::new(0.0, 0.1).unwrap();
        assert!(matches!(
            make_sequence(&k, &Schedule::truncate(2), &spec),
            Err(Error::InadmissibleLimit { .. })
        ));
    }

    #[test]
    fn skipped_member_keeps_residual() {
        let (k, spec) = setup();
        let mut sched = Schedule::truncate(3);
        sched.skip_projection = Some(1);
        let seq = make_sequence(&k, &sched, &spec).unwrap();
        let r = sphere_report(&seq.members[0], 0.0, 2).residual;
        assert!(r > 1e-6, "{r}");
    }
}
