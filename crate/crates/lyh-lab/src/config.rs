//! Experiment configuration: a TOML file validated into [`ExperimentConfig`].
//!
//! Every section and key is optional; missing keys take the defaults below.
//! Unknown keys are rejected. Errors carry the line and column of the
//! offending key when it appears in the file.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}:{col}: {message}")]
    Parse {
        path: String,
        line: usize,
        col: usize,
        message: String,
    },
    #[error("{}{field}: {message}", location(.path, .position))]
    Invalid {
        path: String,
        position: Option<(usize, usize)>,
        field: String,
        message: String,
    },
}

fn location(path: &str, position: &Option<(usize, usize)>) -> String {
    match position {
        Some((l, c)) => format!("{path}:{l}:{c}: "),
        None => format!("{path}: "),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    ConeCheck,
    EvolveOde,
    HeatRun,
    VerifyLyh,
    OracleSuite,
    Identities,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::ConeCheck => "cone-check",
            Suite::EvolveOde => "evolve-ode",
            Suite::HeatRun => "heat-run",
            Suite::VerifyLyh => "verify-lyh",
            Suite::OracleSuite => "oracle-suite",
            Suite::Identities => "identities",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Must match the subcommand when present.
    pub suite: Option<Suite>,
    pub seed: u64,
    pub dims: Dims,
    pub ranks: Ranks,
    pub budgets: Budgets,
    pub tolerances: Tolerances,
    pub times: Times,
    pub output: Output,
    pub model: Model,
    pub expect: Expect,
    pub ode: Ode,
    pub torus: Torus,
    pub oracle: Oracle,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            suite: None,
            seed: 20_240_601,
            dims: Dims::default(),
            ranks: Ranks::default(),
            budgets: Budgets::default(),
            tolerances: Tolerances::default(),
            times: Times::default(),
            output: Output::default(),
            model: Model::default(),
            expect: Expect::default(),
            ode: Ode::default(),
            torus: Torus::default(),
            oracle: Oracle::default(),
        }
    }
}

/// Complex dimension `m` (Kähler, torus) and real dimension `n` (Riemannian).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Dims {
    pub m: usize,
    pub n: usize,
}

impl Default for Dims {
    fn default() -> Self {
        Self { m: 2, n: 4 }
    }
}

/// Cone / form rank `p` (Kähler, torus) and `k` (Riemannian).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Ranks {
    pub p: usize,
    pub k: usize,
}

impl Default for Ranks {
    fn default() -> Self {
        Self { p: 1, k: 1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budgets {
    pub restarts: usize,
    pub max_steps: usize,
    /// Independent cells (random models, initial data, fields).
    pub trials: usize,
    /// Inconclusive verdicts tolerated before the run exits with status 3.
    pub inconclusive_quota: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Self { restarts: 64, max_steps: 500, trials: 4, inconclusive_quota: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Sign assertions: a value counts as nonnegative above `−assert`.
    pub assert: f64,
    /// Relative tolerance of the cone searches, `tol_in = cone · ‖op‖`.
    pub cone: f64,
    /// Identity and oracle residuals.
    pub residual: f64,
    /// Relative drift per unit time against closed-form trajectories.
    pub track: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { assert: 1e-8, cone: 1e-8, residual: 1e-10, track: 1e-8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Times {
    pub grid: Vec<f64>,
}

impl Default for Times {
    fn default() -> Self {
        Self { grid: vec![0.05, 0.1, 0.5] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Output {
    pub dir: PathBuf,
    /// Adds a generation timestamp to the manifest and a `#` line above each CSV header.
    pub timestamps: bool,
}

impl Default for Output {
    fn default() -> Self {
        Self { dir: PathBuf::from("lab-out"), timestamps: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    ConstHolSec,
    PsdGenerated,
    RandomSymmetric,
    /// A `C_p` member just outside the PSD cone.
    EngineeredNonPsd,
    /// PSD-generated plus a positive constant model, perturbed and re-certified in `C_p`.
    PerturbedPsd,
    Sphere,
    RandomRiem,
}

impl ModelKind {
    pub fn is_riemannian(self) -> bool {
        matches!(self, ModelKind::Sphere | ModelKind::RandomRiem)
    }

    pub fn is_random(self) -> bool {
        !matches!(self, ModelKind::ConstHolSec | ModelKind::Sphere)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Model {
    pub kind: ModelKind,
    /// Holomorphic sectional curvature, or sectional curvature of the sphere.
    pub c: f64,
    pub terms: usize,
    pub overshoot: f64,
    pub eps: f64,
}

impl Default for Model {
    fn default() -> Self {
        Self { kind: ModelKind::ConstHolSec, c: 1.0, terms: 3, overshoot: 1e-3, eps: 1e-3 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Expect {
    pub status: Option<lyh_core::Status>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Ode {
    pub dt_scale: f64,
    pub blowup_factor: f64,
    /// Time horizon; absent means "run to the blow-up guard".
    pub t_max: Option<f64>,
    pub snapshot_every: usize,
    pub max_steps: usize,
    /// Evaluate the homogeneous `min_Q` at every snapshot (Kähler only).
    pub lyh: bool,
}

impl Default for Ode {
    fn default() -> Self {
        let e = lyh_core::flow::EvolveConfig::default();
        Self {
            dt_scale: e.dt_scale,
            blowup_factor: e.blowup_factor,
            t_max: None,
            snapshot_every: e.snapshot_every,
            max_steps: e.max_steps,
            lyh: false,
        }
    }
}

impl Ode {
    pub fn evolve_config(&self) -> lyh_core::flow::EvolveConfig {
        lyh_core::flow::EvolveConfig {
            dt_scale: self.dt_scale,
            blowup_factor: self.blowup_factor,
            t_max: self.t_max.unwrap_or(f64::INFINITY),
            snapshot_every: self.snapshot_every,
            max_steps: self.max_steps,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Torus {
    /// Mode cutoff `N`: `|k|_∞ ≤ N`.
    pub cutoff: usize,
    /// Cosine terms per initial datum.
    pub terms: usize,
    pub margin: f64,
    /// Use `d`-closed data.
    pub closed: bool,
    /// Sample points drawn from the `grid^{2m}` lattice.
    pub points: usize,
    pub grid: usize,
    /// Random unitary frames in addition to the standard ones.
    pub extra_frames: usize,
    pub eps_rel: f64,
    /// Also run Lelong positivity along the flow.
    pub positivity: bool,
    /// Random modes per field in the identities suite.
    pub n_modes: usize,
}

impl Default for Torus {
    fn default() -> Self {
        Self {
            cutoff: 8,
            terms: 4,
            margin: 0.2,
            closed: false,
            points: 24,
            grid: 17,
            extra_frames: 2,
            eps_rel: 1e-6,
            positivity: true,
            n_modes: 8,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleScale {
    /// Case counts of the acceptance battery.
    #[default]
    Full,
    /// Roughly a tenth of the cases.
    Quick,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Oracle {
    pub scale: OracleScale,
}

impl ExperimentConfig {
    /// Parses and validates `src`; `path` only labels error messages.
    pub fn from_toml(src: &str, path: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(src).map_err(|e| {
            let (line, col) = e.span().map(|s| line_col(src, s.start)).unwrap_or((1, 1));
            ConfigError::Parse {
                path: path.to_string(),
                line,
                col,
                message: e.message().to_string(),
            }
        })?;
        cfg.validate(Some(src), path)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let src = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&src, &path.display().to_string())
    }

    /// Checks ranges; `src`, when given, is searched for the key to report its position.
    pub fn validate(&self, src: Option<&str>, path: &str) -> Result<(), ConfigError> {
        let fail = |section: &str, key: &str, message: String| ConfigError::Invalid {
            path: path.to_string(),
            position: src.and_then(|s| find_key(s, section, key)),
            field: if section.is_empty() { key.to_string() } else { format!("{section}.{key}") },
            message,
        };
        let t = &self.tolerances;
        for (key, v) in [("assert", t.assert), ("cone", t.cone), ("residual", t.residual), ("track", t.track)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(fail("tolerances", key, format!("must be a finite number > 0, got {v}")));
            }
        }
        if self.dims.m == 0 || self.dims.m > 4 {
            return Err(fail("dims", "m", format!("must be in 1..=4, got {}", self.dims.m)));
        }
        if self.dims.n < 2 || self.dims.n > 8 {
            return Err(fail("dims", "n", format!("must be in 2..=8, got {}", self.dims.n)));
        }
        if self.ranks.p == 0 || self.ranks.p > self.dims.m {
            return Err(fail("ranks", "p", format!("must be in 1..=m = {}, got {}", self.dims.m, self.ranks.p)));
        }
        if self.ranks.k == 0 || self.ranks.k > self.dims.n / 2 + 1 {
            return Err(fail("ranks", "k", format!("must be in 1..=n/2+1, got {}", self.ranks.k)));
        }
        if self.budgets.restarts == 0 {
            return Err(fail("budgets", "restarts", "must be at least 1".into()));
        }
        if self.budgets.max_steps == 0 {
            return Err(fail("budgets", "max_steps", "must be at least 1".into()));
        }
        if self.budgets.trials == 0 {
            return Err(fail("budgets", "trials", "must be at least 1".into()));
        }
        if self.times.grid.is_empty() || self.times.grid.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(fail("times", "grid", "must be a nonempty list of finite times > 0".into()));
        }
        let o = &self.ode;
        if !(o.dt_scale > 0.0 && o.dt_scale.is_finite()) {
            return Err(fail("ode", "dt_scale", format!("must be > 0, got {}", o.dt_scale)));
        }
        if !(o.blowup_factor > 1.0) {
            return Err(fail("ode", "blowup_factor", format!("must be > 1, got {}", o.blowup_factor)));
        }
        if matches!(o.t_max, Some(t) if !(t > 0.0)) {
            return Err(fail("ode", "t_max", "must be > 0".into()));
        }
        if o.snapshot_every == 0 || o.max_steps == 0 {
            return Err(fail("ode", "snapshot_every", "steps must be at least 1".into()));
        }
        let tr = &self.torus;
        if tr.cutoff == 0 {
            return Err(fail("torus", "cutoff", "must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&tr.margin) || tr.margin == 0.0 {
            return Err(fail("torus", "margin", format!("must be in (0, 1), got {}", tr.margin)));
        }
        if tr.points == 0 || tr.grid < 2 {
            return Err(fail("torus", "points", "need at least one point on a grid of side >= 2".into()));
        }
        if !(tr.eps_rel >= 0.0 && tr.eps_rel < 1.0) {
            return Err(fail("torus", "eps_rel", format!("must be in [0, 1), got {}", tr.eps_rel)));
        }
        if !self.model.c.is_finite() || !(self.model.eps >= 0.0) || !(self.model.overshoot >= 0.0) {
            return Err(fail("model", "c", "model parameters must be finite and eps, overshoot >= 0".into()));
        }
        Ok(())
    }
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) + 1;
    (line, col)
}

/// Position of `key = ...` inside `[section]` (top level for an empty section).
fn find_key(src: &str, section: &str, key: &str) -> Option<(usize, usize)> {
    let mut current = String::new();
    for (i, raw) in src.lines().enumerate() {
        let line = raw.trim_start();
        if let Some(rest) = line.strip_prefix('[') {
            current = rest.split(']').next().unwrap_or("").trim().to_string();
            continue;
        }
        let dotted = line.strip_prefix(section).and_then(|r| r.strip_prefix('.'));
        let candidate = if current == section {
            Some(line)
        } else if current.is_empty() {
            dotted
        } else {
            None
        };
        if let Some(rest) = candidate.and_then(|c| c.strip_prefix(key)) {
            if rest.trim_start().starts_with('=') {
                return Some((i + 1, raw.len() - line.len() + 1));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        ExperimentConfig::default().validate(None, "-").unwrap();
        let cfg = ExperimentConfig::from_toml("", "empty.toml").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
    }

    #[test]
    fn parse_error_has_position() {
        let e = ExperimentConfig::from_toml("seed = 1\n[dims]\nm = \"two\"\n", "bad.toml").unwrap_err();
        match e {
            ConfigError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("{other}"),
        }
        let e = ExperimentConfig::from_toml("[dims]\nq = 1\n", "bad.toml").unwrap_err();
        assert!(e.to_string().contains("bad.toml:2:"), "{e}");
    }

    #[test]
    fn nonpositive_tolerance_is_located() {
        let src = "seed = 3\n\n[tolerances]\n  cone = -1e-8\n";
        let e = ExperimentConfig::from_toml(src, "c.toml").unwrap_err();
        assert_eq!(e.to_string(), "c.toml:4:3: tolerances.cone: must be a finite number > 0, got -0.00000001");
        let dotted = "tolerances.assert = 0.0\n";
        let e = ExperimentConfig::from_toml(dotted, "d.toml").unwrap_err();
        assert!(e.to_string().starts_with("d.toml:1:1: tolerances.assert"), "{e}");
    }

    #[test]
    fn rank_bounds() {
        let e = ExperimentConfig::from_toml("[dims]\nm = 2\n[ranks]\np = 3\n", "r.toml").unwrap_err();
        assert!(e.to_string().starts_with("r.toml:4:1: ranks.p"), "{e}");
    }
}
