//! JSON run configuration, flag overrides and validation.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use covtest::seltests::Method;
use covtest::simlab::{Correlation, DesignSpec, SignPattern, SignalSpec, Support};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Path,
    Test,
    Experiment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Screening,
    Qq,
    Fdr,
    Equicorr,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Screening => "screening",
            ExperimentKind::Qq => "qq",
            ExperimentKind::Fdr => "fdr",
            ExperimentKind::Equicorr => "equicorr",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationConfig {
    Orthogonal,
    Ar1(f64),
    Equicorrelated(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignConfig {
    pub n: Option<usize>,
    pub p: Option<usize>,
    pub correlation: Option<CorrelationConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignsConfig {
    Positive,
    Alternating,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalConfig {
    pub k0: usize,
    #[serde(default)]
    pub beta_min: f64,
    /// Explicit support indices; the first k0 columns when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<Vec<usize>>,
    #[serde(default = "default_signs")]
    pub signs: SignsConfig,
}

fn default_signs() -> SignsConfig {
    SignsConfig::Positive
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovRate {
    /// Exp(1) at every step.
    One,
    /// Exp(k) at step k.
    Step,
}

/// Everything a run can be configured with. Fields left out of the file
/// are either filled with a default or reported as missing by [`resolve`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub experiment_kind: Option<ExperimentKind>,
    pub design: Option<DesignConfig>,
    pub signal: Option<SignalConfig>,
    pub sigma: Option<f64>,
    pub alpha: Option<f64>,
    pub reps: Option<usize>,
    pub steps: Option<usize>,
    pub seed: Option<u64>,
    pub output_path: Option<PathBuf>,
    pub n_mc: Option<usize>,
    pub methods: Option<Vec<String>>,
    pub k_grid: Option<Vec<usize>>,
    pub beta_min_grid: Option<Vec<f64>>,
    pub cov_rate: Option<CovRate>,
    /// CSV with a header row; column `y` is the response, the rest are
    /// predictors. Used by `path` and `test`.
    pub data: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn missing(field: &str) -> ConfigError {
    ConfigError(format!("missing required field `{field}`"))
}

fn invalid(field: &str, why: impl fmt::Display) -> ConfigError {
    ConfigError(format!("invalid value for `{field}`: {why}"))
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg = serde_json::from_str(text).map_err(|e| ConfigError(format!("config: {e}")))?;
    // serde also accepts a struct written as an array; insist on objects
    let raw: serde_json::Value = serde_json::from_str(text).map_err(|e| ConfigError(format!("config: {e}")))?;
    for key in ["design", "signal"] {
        if raw.get(key).is_some_and(|v| !v.is_object() && !v.is_null()) {
            return Err(invalid(key, "expected a JSON object"));
        }
    }
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| ConfigError(format!("{}: {}", path.display(), e.0)))
}

/// Flag values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub reps: Option<usize>,
    pub out: Option<PathBuf>,
    pub sigma: Option<f64>,
    pub alpha: Option<f64>,
    pub data: Option<PathBuf>,
}

impl RunConfig {
    pub fn apply(&mut self, o: &Overrides) {
        if o.seed.is_some() {
            self.seed = o.seed;
        }
        if o.reps.is_some() {
            self.reps = o.reps;
        }
        if o.out.is_some() {
            self.output_path = o.out.clone();
        }
        if o.sigma.is_some() {
            self.sigma = o.sigma;
        }
        if o.alpha.is_some() {
            self.alpha = o.alpha;
        }
        if o.data.is_some() {
            self.data = o.data.clone();
        }
    }
}

/// Where the response and design come from for `path` and `test`.
#[derive(Debug, Clone)]
pub enum DataSource {
    File(PathBuf),
    Simulated { design: DesignSpec, signal: SignalSpec, sigma: f64, seed: u64 },
}

#[derive(Debug, Clone)]
pub enum Job {
    Path { data: DataSource, steps: Option<usize> },
    Test {
        data: DataSource,
        sigma: f64,
        steps: Option<usize>,
        methods: Vec<Method>,
        cov_rate: CovRate,
        n_mc: usize,
        seed: u64,
    },
    Screening(covtest::simlab::ScreeningConfig),
    Qq(covtest::simlab::QqConfig),
    Fdr(covtest::simlab::FdrConfig),
    Equicorr(covtest::simlab::EquicorrConfig),
}

pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_N_MC: usize = 1000;
pub const DEFAULT_QQ_STEPS: usize = 4;
pub const DEFAULT_FDR_STEPS: usize = 20;
pub const DEFAULT_K_GRID: [usize; 4] = [5, 10, 15, 20];
pub const DEFAULT_BETA_MIN_GRID: [f64; 6] = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];

fn design_spec(cfg: &RunConfig) -> Result<DesignSpec, ConfigError> {
    let d = cfg.design.as_ref().ok_or_else(|| missing("design"))?;
    let spec = DesignSpec {
        n: d.n.ok_or_else(|| missing("design.n"))?,
        p: d.p.ok_or_else(|| missing("design.p"))?,
        structure: match d.correlation.ok_or_else(|| missing("design.correlation"))? {
            CorrelationConfig::Orthogonal => Correlation::Orthogonal,
            CorrelationConfig::Ar1(r) => Correlation::Ar1(r),
            CorrelationConfig::Equicorrelated(r) => Correlation::Equicorrelated(r),
        },
    };
    spec.validate().map_err(|e| invalid("design", e))?;
    Ok(spec)
}

/// `beta_min` replaces the file value when given (screening takes it from
/// its grid).
fn signal_spec(cfg: &RunConfig, p: usize, beta_min: Option<f64>) -> Result<Option<SignalSpec>, ConfigError> {
    let Some(s) = &cfg.signal else { return Ok(None) };
    let spec = SignalSpec {
        k0: s.k0,
        beta_min: beta_min.unwrap_or(s.beta_min),
        support: match &s.support {
            Some(v) => Support::Indices(v.clone()),
            None => Support::FirstK0,
        },
        signs: match s.signs {
            SignsConfig::Positive => SignPattern::Positive,
            SignsConfig::Alternating => SignPattern::Alternating,
        },
    };
    spec.beta(p).map_err(|e| invalid("signal", e))?;
    Ok(Some(spec))
}

fn require<T: Copy>(v: Option<T>, field: &str) -> Result<T, ConfigError> {
    v.ok_or_else(|| missing(field))
}

fn positive_sigma(cfg: &RunConfig) -> Result<f64, ConfigError> {
    let s = require(cfg.sigma, "sigma")?;
    if !(s > 0.0 && s.is_finite()) {
        return Err(invalid("sigma", format!("{s} is not a positive number")));
    }
    Ok(s)
}

fn positive_reps(cfg: &RunConfig) -> Result<usize, ConfigError> {
    let r = require(cfg.reps, "reps")?;
    if r == 0 {
        return Err(invalid("reps", "must be at least 1"));
    }
    Ok(r)
}

fn alpha(cfg: &RunConfig) -> Result<f64, ConfigError> {
    let a = cfg.alpha.unwrap_or(DEFAULT_ALPHA);
    if !(a > 0.0 && a < 1.0) {
        return Err(invalid("alpha", format!("{a} is outside (0, 1)")));
    }
    Ok(a)
}

fn methods(cfg: &RunConfig, default: &[Method]) -> Result<Vec<Method>, ConfigError> {
    match &cfg.methods {
        None => Ok(default.to_vec()),
        Some(names) => {
            let mut out = Vec::new();
            for name in names {
                let m: Method = name.parse().map_err(|_| invalid("methods", format!("unknown method `{name}`")))?;
                if !out.contains(&m) {
                    out.push(m);
                }
            }
            if out.is_empty() {
                return Err(invalid("methods", "list is empty"));
            }
            Ok(out)
        }
    }
}

fn data_source(cfg: &RunConfig) -> Result<DataSource, ConfigError> {
    if let Some(path) = &cfg.data {
        return Ok(DataSource::File(path.clone()));
    }
    let design = design_spec(cfg)?;
    let signal = signal_spec(cfg, design.p, None)?.unwrap_or_else(SignalSpec::null);
    Ok(DataSource::Simulated {
        design,
        signal,
        sigma: positive_sigma(cfg)?,
        seed: require(cfg.seed, "seed")?,
    })
}

fn n_mc(cfg: &RunConfig) -> Result<usize, ConfigError> {
    let n = cfg.n_mc.unwrap_or(DEFAULT_N_MC);
    if n == 0 {
        return Err(invalid("n_mc", "must be at least 1"));
    }
    Ok(n)
}

/// Checks the merged config for `command` and turns it into a job.
pub fn resolve(cfg: &RunConfig, command: Command, kind: Option<ExperimentKind>) -> Result<Job, ConfigError> {
    if let Some(c) = cfg.command {
        if c != command {
            return Err(invalid("command", format!("config is for `{c:?}` but `{command:?}` was requested")));
        }
    }
    if let (Some(k), Some(want)) = (cfg.experiment_kind, kind) {
        if k != want {
            return Err(invalid("experiment_kind", format!("config is for `{}` but `{}` was requested", k.name(), want.name())));
        }
    }
    if cfg.steps == Some(0) {
        return Err(invalid("steps", "must be at least 1"));
    }
    match command {
        Command::Path => Ok(Job::Path { data: data_source(cfg)?, steps: cfg.steps }),
        Command::Test => {
            let methods = methods(cfg, &[Method::Covariance, Method::Spacing])?;
            if methods.contains(&Method::TmaxConditional) {
                return Err(invalid("methods", "tmax_conditional is only available from the library"));
            }
            let seed = if methods.contains(&Method::Tmax) {
                require(cfg.seed, "seed")?
            } else {
                cfg.seed.unwrap_or(0)
            };
            Ok(Job::Test {
                data: data_source(cfg)?,
                sigma: positive_sigma(cfg)?,
                steps: cfg.steps,
                methods,
                cov_rate: cfg.cov_rate.unwrap_or(CovRate::One),
                n_mc: n_mc(cfg)?,
                seed,
            })
        }
        Command::Experiment => {
            let kind = kind.or(cfg.experiment_kind).ok_or_else(|| missing("experiment_kind"))?;
            let reps = positive_reps(cfg)?;
            let seed = require(cfg.seed, "seed")?;
            match kind {
                ExperimentKind::Equicorr => {
                    let d = cfg.design.as_ref().ok_or_else(|| missing("design"))?;
                    let p = require(d.p, "design.p")?;
                    let rho = match d.correlation.ok_or_else(|| missing("design.correlation"))? {
                        CorrelationConfig::Equicorrelated(r) => r,
                        _ => return Err(invalid("design.correlation", "equicorr needs an equicorrelated design")),
                    };
                    if p < 2 {
                        return Err(invalid("design.p", "must be at least 2"));
                    }
                    if !(rho > 0.0 && rho < 1.0) {
                        return Err(invalid("design.correlation", format!("rho = {rho} is outside (0, 1)")));
                    }
                    Ok(Job::Equicorr(covtest::simlab::EquicorrConfig { p, rho, reps, seed }))
                }
                ExperimentKind::Qq => {
                    let design = design_spec(cfg)?;
                    if let Some(s) = signal_spec(cfg, design.p, None)? {
                        if s.k0 > 0 {
                            return Err(invalid("signal", "the qq experiment runs under the global null (k0 = 0)"));
                        }
                    }
                    let methods = methods(cfg, &[Method::Covariance, Method::Spacing, Method::Tmax])?;
                    if let Some(m) = methods.iter().find(|m| !matches!(m, Method::Covariance | Method::Spacing | Method::Tmax)) {
                        return Err(invalid("methods", format!("`{m}` is not available in the qq experiment")));
                    }
                    let steps = cfg.steps.unwrap_or(DEFAULT_QQ_STEPS);
                    let bound = if methods.contains(&Method::Covariance) { steps + 1 } else { steps };
                    if bound > design.max_steps() {
                        return Err(invalid("steps", format!("{steps} steps do not fit a design with n = {}, p = {}", design.n, design.p)));
                    }
                    Ok(Job::Qq(covtest::simlab::QqConfig {
                        design,
                        sigma: positive_sigma(cfg)?,
                        steps,
                        methods,
                        reps,
                        n_mc: n_mc(cfg)?,
                        seed,
                    }))
                }
                ExperimentKind::Screening => {
                    let design = design_spec(cfg)?;
                    let beta_min_grid = cfg.beta_min_grid.clone().unwrap_or_else(|| DEFAULT_BETA_MIN_GRID.to_vec());
                    if beta_min_grid.is_empty() || beta_min_grid.iter().any(|b| !(*b > 0.0 && b.is_finite())) {
                        return Err(invalid("beta_min_grid", "needs positive finite entries"));
                    }
                    let signal = signal_spec(cfg, design.p, Some(beta_min_grid[0]))?.ok_or_else(|| missing("signal"))?;
                    let k_grid = cfg.k_grid.clone().unwrap_or_else(|| DEFAULT_K_GRID.to_vec());
                    if k_grid.is_empty() || k_grid.contains(&0) {
                        return Err(invalid("k_grid", "needs positive entries"));
                    }
                    if let Some(&k) = k_grid.iter().find(|&&k| k > design.max_steps()) {
                        return Err(invalid("k_grid", format!("k = {k} exceeds min(n - 1, p) = {}", design.max_steps())));
                    }
                    Ok(Job::Screening(covtest::simlab::ScreeningConfig {
                        design,
                        signal,
                        sigma: positive_sigma(cfg)?,
                        beta_min_grid,
                        k_grid,
                        reps,
                        seed,
                    }))
                }
                ExperimentKind::Fdr => {
                    let design = design_spec(cfg)?;
                    let signal = signal_spec(cfg, design.p, None)?.ok_or_else(|| missing("signal"))?;
                    let steps = cfg.steps.unwrap_or(DEFAULT_FDR_STEPS);
                    if steps + 1 > design.max_steps() {
                        return Err(invalid("steps", format!("{steps} steps do not fit a design with n = {}, p = {}", design.n, design.p)));
                    }
                    Ok(Job::Fdr(covtest::simlab::FdrConfig {
                        design,
                        signal,
                        sigma: positive_sigma(cfg)?,
                        alpha: alpha(cfg)?,
                        steps,
                        reps,
                        seed,
                    }))
                }
            }
        }
    }
}
