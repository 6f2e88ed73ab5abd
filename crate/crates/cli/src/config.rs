//! Run configuration: one TOML file with the sections `[grid]`, `[symbol]`,
//! `[kernel]`, `[nonlinearity]`, `[solver]` and `[sequence]`.
//!
//! Unknown keys are rejected, and keys that do not belong to the selected
//! family are rejected too. Relative file paths are resolved against the
//! directory holding the config.

use std::fmt;
use std::path::{Path, PathBuf};

use loglap_core::kernels::{make_kernel, project_orthogonal, Kernel, KernelFamily, Schedule};
use loglap_core::nonlinearity::{offset_field, Family, Nonlinearity, OffsetProfile};
use loglap_core::solver::{CertifyOptions, SolveOptions};
use loglap_core::spectral::{Grid, RealField, SymbolSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

/// Invalid or unreadable configuration.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSection,
    #[serde(default)]
    pub symbol: SymbolSection,
    pub kernel: KernelSection,
    pub nonlinearity: Option<NonlinearitySection>,
    #[serde(default)]
    pub solver: SolverSection,
    pub sequence: Option<SequenceSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub d: usize,
    #[serde(rename = "L")]
    pub half_width: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolSection {
    #[serde(default)]
    pub a: f64,
    /// Mask half-width in `ln|p|`; defaults to two mode spacings.
    pub eta: Option<f64>,
    #[serde(default = "default_eps")]
    pub eps: f64,
}

impl Default for SymbolSection {
    fn default() -> Self {
        Self {
            a: 0.0,
            eta: None,
            eps: default_eps(),
        }
    }
}

fn default_eps() -> f64 {
    0.1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSection {
    pub family: String,
    pub width: Option<f64>,
    pub amplitude: Option<f64>,
    pub radius: Option<f64>,
    pub center: Option<Vec<f64>>,
    pub w1: Option<f64>,
    pub w2: Option<f64>,
    pub c1: Option<f64>,
    pub path: Option<PathBuf>,
    /// Project onto the admissible set with this taper before use.
    pub taper: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearitySection {
    pub family: String,
    pub l: f64,
    /// Growth constant; defaults to `l`.
    pub k: Option<f64>,
    pub knee: Option<f64>,
    #[serde(default)]
    pub h: OffsetSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OffsetSection {
    /// `zero`, `constant`, `gaussian` or `file`.
    pub profile: Option<String>,
    pub value: Option<f64>,
    pub amplitude: Option<f64>,
    pub width: Option<f64>,
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    /// `zero`, `random` or `file`.
    #[serde(default = "default_v0")]
    pub v0: String,
    pub v0_path: Option<PathBuf>,
    /// Seed for every sampled quantity.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub lipschitz_trials: usize,
    /// Write the final field as a binary dump.
    #[serde(default)]
    pub dump_field: bool,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            tol: default_tol(),
            max_iter: default_max_iter(),
            v0: default_v0(),
            v0_path: None,
            seed: 0,
            lipschitz_trials: default_trials(),
            dump_field: false,
        }
    }
}

fn default_tol() -> f64 {
    1e-10
}

fn default_max_iter() -> usize {
    500
}

fn default_v0() -> String {
    "zero".into()
}

fn default_trials() -> usize {
    10_000
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceSection {
    /// `truncate` or `mollify`.
    pub kind: String,
    #[serde(rename = "M")]
    pub members: usize,
    pub start: Option<f64>,
    pub step: Option<f64>,
    pub transition: Option<f64>,
    pub taper: Option<f64>,
    /// Set to false to keep members unprojected.
    #[serde(default = "default_true")]
    pub project: bool,
    pub skip_projection: Option<usize>,
}

fn default_true() -> bool {
    true
}

/// Parses config text; `origin` names the source in error messages.
pub fn parse_config(text: &str, origin: &str) -> Result<RunConfig, ConfigError> {
    toml::from_str(text).map_err(|e| ConfigError(format!("{origin}: {e}")))
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text, &path.display().to_string())
}

/// Everything a command needs, validated.
#[derive(Debug, Clone)]
pub struct Setup {
    pub grid: Grid,
    pub spec: SymbolSpec,
    pub kernel: Kernel,
    pub nl: Option<Nonlinearity>,
    pub solve: SolveOptions,
    pub v0: Option<RealField>,
    pub seed: u64,
    pub dump_field: bool,
    pub schedule: Option<Schedule>,
}

impl Setup {
    pub fn nonlinearity(&self) -> Result<&Nonlinearity, ConfigError> {
        self.nl
            .as_ref()
            .ok_or_else(|| ConfigError("missing [nonlinearity] section".into()))
    }

    pub fn schedule(&self) -> Result<&Schedule, ConfigError> {
        self.schedule
            .as_ref()
            .ok_or_else(|| ConfigError("missing [sequence] section".into()))
    }
}

fn core<T>(section: &str, r: loglap_core::Result<T>) -> Result<T, ConfigError> {
    r.map_err(|e| ConfigError(format!("[{section}]: {e}")))
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Rejects keys that are set but unused by the selected family.
fn only(
    section: &str,
    family: &str,
    set: &[(&str, bool)],
    allowed: &[&str],
) -> Result<(), ConfigError> {
    for (key, present) in set {
        if *present && !allowed.contains(key) {
            return invalid(format!(
                "[{section}]: key `{key}` does not apply to family `{family}`"
            ));
        }
    }
    Ok(())
}

fn require(section: &str, key: &str, v: Option<f64>) -> Result<f64, ConfigError> {
    v.ok_or_else(|| ConfigError(format!("[{section}]: missing key `{key}`")))
}

fn build_kernel(
    k: &KernelSection,
    grid: &Grid,
    a: f64,
    base: &Path,
) -> Result<Kernel, ConfigError> {
    let set = [
        ("width", k.width.is_some()),
        ("amplitude", k.amplitude.is_some()),
        ("radius", k.radius.is_some()),
        ("center", k.center.is_some()),
        ("w1", k.w1.is_some()),
        ("w2", k.w2.is_some()),
        ("c1", k.c1.is_some()),
        ("path", k.path.is_some()),
    ];
    let s = "kernel";
    let family = match k.family.as_str() {
        "gaussian" => {
            only(s, &k.family, &set, &["width", "amplitude"])?;
            KernelFamily::Gaussian {
                width: k.width.unwrap_or(1.0),
                amplitude: k.amplitude.unwrap_or(1.0),
            }
        }
        "bump" => {
            only(s, &k.family, &set, &["radius", "amplitude", "center"])?;
            KernelFamily::Bump {
                radius: require(s, "radius", k.radius)?,
                amplitude: k.amplitude.unwrap_or(1.0),
                center: k.center.clone().unwrap_or_else(|| vec![0.0; grid.dim()]),
            }
        }
        "difference" => {
            only(s, &k.family, &set, &["w1", "w2", "c1"])?;
            KernelFamily::Difference {
                w1: require(s, "w1", k.w1)?,
                w2: require(s, "w2", k.w2)?,
                c1: k.c1.unwrap_or(1.0),
                a,
            }
        }
        "file" => {
            only(s, &k.family, &set, &["path"])?;
            let path = k
                .path
                .as_ref()
                .ok_or_else(|| ConfigError("[kernel]: missing key `path`".into()))?;
            KernelFamily::File {
                path: resolve(base, path).to_string_lossy().into_owned(),
            }
        }
        "zero" => {
            only(s, &k.family, &set, &[])?;
            return Ok(Kernel::zero(*grid));
        }
        other => {
            return invalid(format!(
                "[kernel]: unknown family `{other}` (expected gaussian, bump, difference, file or zero)"
            ))
        }
    };
    core(s, make_kernel(family, grid))
}

fn build_offset(h: &OffsetSection, grid: &Grid, base: &Path) -> Result<RealField, ConfigError> {
    let profile = h.profile.as_deref().unwrap_or("zero");
    let set = [
        ("value", h.value.is_some()),
        ("amplitude", h.amplitude.is_some()),
        ("width", h.width.is_some()),
        ("path", h.path.is_some()),
    ];
    let s = "nonlinearity.h";
    let named = match profile {
        "zero" => {
            only(s, profile, &set, &[])?;
            OffsetProfile::Zero
        }
        "constant" => {
            only(s, profile, &set, &["value"])?;
            OffsetProfile::Constant(require(s, "value", h.value)?)
        }
        "gaussian" => {
            only(s, profile, &set, &["amplitude", "width"])?;
            OffsetProfile::Gaussian {
                amplitude: require(s, "amplitude", h.amplitude)?,
                width: require(s, "width", h.width)?,
            }
        }
        "file" => {
            only(s, profile, &set, &["path"])?;
            let path = h
                .path
                .as_ref()
                .ok_or_else(|| ConfigError(format!("[{s}]: missing key `path`")))?;
            let field = core(s, loglap_core::dump::read_field(&resolve(base, path)))?;
            if field.grid() != grid {
                return invalid(format!("[{s}]: dump grid differs from [grid]"));
            }
            return Ok(field);
        }
        other => {
            return invalid(format!(
                "[{s}]: unknown profile `{other}` (expected zero, constant, gaussian or file)"
            ))
        }
    };
    core(s, offset_field(named, grid))
}

fn build_nonlinearity(
    n: &NonlinearitySection,
    grid: &Grid,
    base: &Path,
) -> Result<Nonlinearity, ConfigError> {
    let s = "nonlinearity";
    let family = match n.family.as_str() {
        "saturating_sine" => Family::SaturatingSine,
        "rational" => Family::Rational,
        "clipped_linear" => Family::ClippedLinear {
            knee: require(s, "knee", n.knee)?,
        },
        "linear" => {
            return invalid("[nonlinearity]: the linear family is reserved for internal tests")
        }
        other => {
            return invalid(format!(
                "[nonlinearity]: unknown family `{other}` (expected saturating_sine, rational or clipped_linear)"
            ))
        }
    };
    if n.knee.is_some() && !matches!(family, Family::ClippedLinear { .. }) {
        return invalid(format!(
            "[nonlinearity]: key `knee` does not apply to family `{}`",
            n.family
        ));
    }
    let h = build_offset(&n.h, grid, base)?;
    core(
        s,
        Nonlinearity::with_growth(family, n.l, n.k.unwrap_or(n.l), h),
    )
}

fn build_schedule(q: &SequenceSection) -> Result<Schedule, ConfigError> {
    let mut sched = match q.kind.as_str() {
        "truncate" => Schedule::truncate(q.members),
        "mollify" => {
            if q.step.is_some() || q.transition.is_some() {
                return invalid("[sequence]: `step` and `transition` apply to truncate only");
            }
            Schedule::mollify(q.members)
        }
        other => {
            return invalid(format!(
                "[sequence]: unknown kind `{other}` (expected truncate or mollify)"
            ))
        }
    };
    if let Some(v) = q.start {
        sched.start = v;
    }
    if let Some(v) = q.step {
        sched.step = v;
    }
    if let Some(v) = q.transition {
        sched.transition = v;
    }
    if let Some(v) = q.taper {
        sched.taper = Some(v);
    }
    if !q.project {
        sched.taper = None;
    }
    sched.skip_projection = q.skip_projection;
    Ok(sched)
}

impl RunConfig {
    /// Validates every section and builds the numerical objects.
    /// `base` is the directory relative paths refer to.
    pub fn build(&self, base: &Path) -> Result<Setup, ConfigError> {
        let g = &self.grid;
        let grid = core("grid", Grid::new(g.d, g.half_width, g.n))?;
        let sym = &self.symbol;
        let spec = match sym.eta {
            Some(eta) => core("symbol", SymbolSpec::new(sym.a, eta))?,
            None => core("symbol", SymbolSpec::with_default_eta(sym.a, &grid))?,
        };
        if !(sym.eps > 0.0 && sym.eps < 1.0) {
            return invalid(format!("[symbol]: eps must lie in (0, 1), got {}", sym.eps));
        }
        let mut kernel = build_kernel(&self.kernel, &grid, sym.a, base)?;
        if let Some(taper) = self.kernel.taper {
            kernel = core("kernel", project_orthogonal(&kernel, &spec, taper))?;
        }
        let nl = self
            .nonlinearity
            .as_ref()
            .map(|n| build_nonlinearity(n, &grid, base))
            .transpose()?;

        let sv = &self.solver;
        if !(sv.tol.is_finite() && sv.tol > 0.0) {
            return invalid(format!("[solver]: tol must be positive, got {}", sv.tol));
        }
        if sv.max_iter == 0 {
            return invalid("[solver]: max_iter must be at least 1");
        }
        if sv.lipschitz_trials < 2 {
            return invalid("[solver]: lipschitz_trials must be at least 2");
        }
        if sv.v0_path.is_some() && sv.v0 != "file" {
            return invalid("[solver]: `v0_path` needs v0 = \"file\"");
        }
        let v0 = match sv.v0.as_str() {
            "zero" => None,
            "random" => {
                let mut rng = ChaCha8Rng::seed_from_u64(sv.seed);
                let values = (0..grid.len())
                    .map(|_| rng.random_range(-1.0..1.0))
                    .collect();
                Some(core("solver", RealField::new(grid, values))?)
            }
            "file" => {
                let path = sv
                    .v0_path
                    .as_ref()
                    .ok_or_else(|| ConfigError("[solver]: missing key `v0_path`".into()))?;
                let field = core(
                    "solver",
                    loglap_core::dump::read_field(&resolve(base, path)),
                )?;
                if field.grid() != &grid {
                    return invalid("[solver]: v0 dump grid differs from [grid]");
                }
                Some(field)
            }
            other => {
                return invalid(format!(
                    "[solver]: unknown v0 `{other}` (expected zero, random or file)"
                ))
            }
        };
        let solve = SolveOptions {
            tol: sv.tol,
            max_iter: sv.max_iter,
            certify: CertifyOptions {
                eps: sym.eps,
                seed: sv.seed,
                lipschitz_trials: sv.lipschitz_trials,
                ..Default::default()
            },
        };
        let schedule = self.sequence.as_ref().map(build_schedule).transpose()?;
        Ok(Setup {
            grid,
            spec,
            kernel,
            nl,
            solve,
            v0,
            seed: sv.seed,
            dump_field: sv.dump_field,
            schedule,
        })
    }
}

/// The reference problem: difference kernel on `[-20, 20)` with 1024
/// points, saturating sine with `l = 0.1` and a Gaussian offset.
pub const REFERENCE_CONFIG: &str = r#"[grid]
d = 1
L = 20.0
n = 1024

[symbol]
a = 0.0
eta = 0.1
eps = 0.1

[kernel]
family = "difference"
w1 = 1.0
w2 = 2.0
c1 = 1.0

[nonlinearity]
family = "saturating_sine"
l = 0.1
h = { profile = "gaussian", amplitude = 0.5, width = 1.0 }

[solver]
tol = 1e-10
max_iter = 500
seed = 0

[sequence]
kind = "truncate"
M = 6
"#;

#[cfg(test)]
mod tests {
    use super::*;

    fn build(text: &str) -> Result<Setup, ConfigError> {
        parse_config(text, "test")?.build(Path::new("."))
    }

    #[test]
    fn reference_config_builds() {
        let s = build(REFERENCE_CONFIG).unwrap();
        assert_eq!(s.grid.len(), 1024);
        assert_eq!(s.spec.eta, 0.1);
        assert_eq!(s.schedule.unwrap().members, 6);
        assert_eq!(s.nl.unwrap().gain(), 0.1);
    }

    #[test]
    fn unknown_keys_are_rejected_with_a_line() {
        let text = REFERENCE_CONFIG.replace("eps = 0.1", "eps = 0.1\nepsilon = 2");
        let err = build(&text).unwrap_err().0;
        assert!(err.contains("epsilon") && err.contains("line"), "{err}");
    }

    #[test]
    fn family_keys_are_checked() {
        let text = REFERENCE_CONFIG.replace("c1 = 1.0", "c1 = 1.0\nwidth = 2.0");
        let err = build(&text).unwrap_err().0;
        assert!(err.contains("`width`"), "{err}");
    }

    #[test]
    fn linear_family_is_refused() {
        let text = REFERENCE_CONFIG.replace("saturating_sine", "linear");
        assert!(build(&text).unwrap_err().0.contains("reserved"));
    }

    #[test]
    fn invalid_values_are_reported() {
        for (from, to) in [
            ("n = 1024", "n = 1023"),
            ("eps = 0.1", "eps = 1.5"),
            ("tol = 1e-10", "tol = -1.0"),
            ("kind = \"truncate\"", "kind = \"spiral\""),
        ] {
            let text = REFERENCE_CONFIG.replace(from, to);
            assert!(build(&text).is_err(), "{to}");
        }
    }

    #[test]
    fn random_start_is_seeded() {
        let text = REFERENCE_CONFIG.replace("seed = 0", "seed = 7\nv0 = \"random\"");
        let a = build(&text).unwrap().v0.unwrap();
        let b = build(&text).unwrap().v0.unwrap();
        assert_eq!(a.values(), b.values());
    }

    #[test]
    fn optional_sections_default() {
        let text = "[grid]\nd = 2\nL = 8.0\nn = 32\n[kernel]\nfamily = \"zero\"\n";
        let s = build(text).unwrap();
        assert!(s.nl.is_none() && s.schedule.is_none());
        assert_eq!(s.solve.tol, 1e-10);
        assert_eq!(s.kernel.l1(), 0.0);
    }
}
