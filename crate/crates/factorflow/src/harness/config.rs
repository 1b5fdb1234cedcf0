//! Scenario configuration: JSON schema, dotted overrides and validation.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::dynamics::InitKind;
use crate::spectral::Matrix;
use crate::theory::{stepsize_bound, StepsizeContext};

use super::rng::Prng;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("bad override '{0}': expected key=value")]
    Override(String),
    #[error("invalid config:\n  - {}", .0.join("\n  - "))]
    Invalid(Vec<String>),
}

/// Eigenvalues of the target, either in the standard basis or embedded in a random one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Spectrum {
    List(Vec<f64>),
    Embedded {
        values: Vec<f64>,
        /// Ambient dimension; `values` is padded with zeros up to n.
        n: usize,
        /// Seed for a random orthogonal eigenvector basis; the standard basis when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        match self {
            Spectrum::List(v) => v.len(),
            Spectrum::Embedded { n, .. } => *n,
        }
    }

    pub fn given_values(&self) -> &[f64] {
        match self {
            Spectrum::List(v) => v,
            Spectrum::Embedded { values, .. } => values,
        }
    }

    /// Eigenvalues padded with zeros to the ambient dimension.
    pub fn values(&self) -> Vec<f64> {
        let mut v = self.given_values().to_vec();
        v.resize(self.dim().max(v.len()), 0.0);
        v
    }

    /// Eigenvector basis (columns); `None` means the standard basis.
    pub fn basis(&self) -> Option<Matrix> {
        match self {
            Spectrum::Embedded { n, seed: Some(seed), .. } => Some(Prng::new(*seed).orthogonal(*n)),
            _ => None,
        }
    }
}

/// Step size: a number, or "auto:<fraction>x<context>" resolved through the step-size bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EtaSpec {
    Fixed(f64),
    Auto(String),
}

impl EtaSpec {
    /// (fraction, context) of an auto spec.
    pub fn parse_auto(s: &str) -> Result<(f64, StepsizeContext), String> {
        let body = s
            .strip_prefix("auto:")
            .ok_or_else(|| format!("eta = '{s}' is neither a number nor 'auto:<fraction>x<context>'"))?;
        let (frac, ctx) = body
            .split_once('x')
            .or_else(|| body.split_once('×'))
            .ok_or_else(|| format!("eta = '{s}': expected 'auto:<fraction>x<context>'"))?;
        let fraction: f64 = frac.trim().parse().map_err(|_| format!("eta = '{s}': fraction '{frac}' is not a number"))?;
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(format!("eta = '{s}': fraction must lie in (0, 1)"));
        }
        let names: Vec<&str> = StepsizeContext::ALL.iter().map(|c| c.name()).collect();
        let context = StepsizeContext::parse(ctx.trim())
            .ok_or_else(|| format!("eta = '{s}': unknown context '{ctx}' (one of {})", names.join(", ")))?;
        Ok((fraction, context))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    Uniform,
    Gaussian,
}

/// Symmetrized additive noise. `scale` is relative to the spectral norm of the clean target:
/// uniform entries on [−scale‖W‖, scale‖W‖]; gaussian rescaled so that ‖Ξ‖ = scale‖W‖.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub scale: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimulationMode {
    /// Decoupled per-eigenvalue scalars for scaled-identity inits, full matrices otherwise.
    #[default]
    Auto,
    Decoupled,
    Matrix,
}

/// Plateau windows to evaluate. Continuous-time windows unless `epsilon_prime` is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlateauSpec {
    pub ranks: Vec<usize>,
    /// C of the continuous-time window.
    #[serde(default = "default_big_c")]
    pub big_c: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_prime: Option<f64>,
    /// Allowed deviation of the bound and of the simulated effective rank.
    #[serde(default = "default_plateau_tolerance")]
    pub tolerance: f64,
}

fn default_big_c() -> f64 {
    17.0
}

fn default_plateau_tolerance() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandInitSpec {
    #[serde(default = "default_randinit_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default = "default_randinit_seeds")]
    pub seeds: Vec<u64>,
}

impl Default for RandInitSpec {
    fn default() -> Self {
        RandInitSpec { alphas: default_randinit_alphas(), seeds: default_randinit_seeds() }
    }
}

fn default_randinit_alphas() -> Vec<f64> {
    vec![1.0, 0.1]
}

fn default_randinit_seeds() -> Vec<u64> {
    (0..10).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub spectrum: Spectrum,
    pub depth: u32,
    pub init: InitKind,
    pub eta: EtaSpec,
    pub epsilon: Vec<f64>,
    pub max_iters: u64,
    #[serde(default = "default_record_every")]
    pub record_every: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSpec>,
    #[serde(default)]
    pub simulation: SimulationMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plateau: Option<PlateauSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub randinit: Option<RandInitSpec>,
}

fn default_record_every() -> u64 {
    10
}

/// Scale parameter of the init: α, or σ for dense Gaussian factors.
pub fn init_scale(init: &InitKind) -> f64 {
    match *init {
        InitKind::Identical { alpha } | InitKind::Perturbed { alpha, .. } | InitKind::RandomScaledIdentity { alpha, .. } => {
            alpha
        }
        InitKind::GaussianDense { sigma, .. } => sigma,
    }
}

impl ScenarioConfig {
    /// Parse, apply overrides, then validate.
    pub fn from_json_with_overrides(text: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut value: Value = serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        let cfg: ScenarioConfig = serde_json::from_value(value).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Self::from_json_with_overrides(text, &[])
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_json_with_overrides(&text, overrides)
    }

    pub fn dim(&self) -> usize {
        self.spectrum.dim()
    }

    /// Whether the run uses per-eigenvalue scalars.
    pub fn decoupled(&self) -> bool {
        match self.simulation {
            SimulationMode::Decoupled => true,
            SimulationMode::Matrix => false,
            SimulationMode::Auto => !matches!(self.init, InitKind::GaussianDense { .. }),
        }
    }

    /// Every violated constraint, not just the first.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let given = self.spectrum.given_values();
        if given.is_empty() {
            v.push("spectrum must contain at least one eigenvalue".into());
        }
        if given.iter().any(|x| !x.is_finite()) {
            v.push("spectrum values must be finite".into());
        }
        if let Spectrum::Embedded { values, n, .. } = &self.spectrum {
            if values.len() > *n {
                v.push(format!("spectrum has {} values but n = {n}", values.len()));
            }
        }
        if self.depth < 1 {
            v.push("depth must be at least 1".into());
        }
        match self.init {
            InitKind::Identical { alpha } | InitKind::RandomScaledIdentity { alpha, .. } => {
                if !(alpha > 0.0 && alpha.is_finite()) {
                    v.push(format!("init.alpha = {alpha} must be positive"));
                }
            }
            InitKind::Perturbed { alpha, beta } => {
                if !(beta > 0.0 && beta < alpha && alpha.is_finite()) {
                    v.push(format!("init needs 0 < beta < alpha (alpha = {alpha}, beta = {beta})"));
                }
                if self.depth < 2 {
                    v.push("perturbed init needs depth >= 2".into());
                }
            }
            InitKind::GaussianDense { sigma, .. } => {
                if !(sigma > 0.0 && sigma.is_finite()) {
                    v.push(format!("init.sigma = {sigma} must be positive"));
                }
                if self.simulation == SimulationMode::Decoupled {
                    v.push("dense gaussian init cannot be simulated decoupled".into());
                }
            }
        }
        match &self.eta {
            EtaSpec::Fixed(x) => {
                if !(*x > 0.0 && x.is_finite()) {
                    v.push(format!("eta = {x} must be positive"));
                }
            }
            EtaSpec::Auto(s) => {
                if let Err(e) = EtaSpec::parse_auto(s) {
                    v.push(e);
                }
            }
        }
        for e in &self.epsilon {
            if !(*e > 0.0 && e.is_finite()) {
                v.push(format!("epsilon target {e} must be positive"));
            }
        }
        if self.max_iters < 1 {
            v.push("max_iters must be at least 1".into());
        }
        if self.record_every < 1 {
            v.push("record_every must be at least 1".into());
        }
        if let Some(noise) = &self.noise {
            if !(noise.scale >= 0.0 && noise.scale.is_finite()) {
                v.push(format!("noise.scale = {} must be non-negative", noise.scale));
            }
        }
        if let Some(p) = &self.plateau {
            if p.ranks.is_empty() {
                v.push("plateau.ranks must not be empty".into());
            }
            for r in &p.ranks {
                if *r < 1 || *r > self.dim() {
                    v.push(format!("plateau rank {r} out of range 1..={}", self.dim()));
                }
            }
            if !(p.tolerance > 0.0) {
                v.push(format!("plateau.tolerance = {} must be positive", p.tolerance));
            }
        }
        if let Some(r) = &self.randinit {
            if r.alphas.iter().any(|a| !(*a > 0.0)) {
                v.push("randinit.alphas must be positive".into());
            }
        }
        v
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(v))
        }
    }

    /// Concrete step size. Scalar contexts take the minimum over the target eigenvalues;
    /// matrix contexts use the spectral norm of the target.
    pub fn resolve_eta(&self, target_values: &[f64]) -> Result<f64, ConfigError> {
        match &self.eta {
            EtaSpec::Fixed(x) => Ok(*x),
            EtaSpec::Auto(s) => {
                let (fraction, context) = EtaSpec::parse_auto(s).map_err(|e| ConfigError::Invalid(vec![e]))?;
                let alpha = init_scale(&self.init);
                let bound = match context {
                    StepsizeContext::MatrixIdentical | StepsizeContext::MatrixPerturbed => {
                        let norm = target_values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                        stepsize_bound(context, norm, alpha, self.depth)
                    }
                    _ => target_values
                        .iter()
                        .map(|l| stepsize_bound(context, *l, alpha, self.depth))
                        .fold(f64::INFINITY, f64::min),
                };
                Ok(fraction * bound)
            }
        }
    }
}

/// Set `a.b.c=value` on a JSON document. The value is read as JSON when it parses, else as a string.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<(), ConfigError> {
    let (key, raw) = assignment.split_once('=').ok_or_else(|| ConfigError::Override(assignment.into()))?;
    let key = key.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(ConfigError::Override(assignment.into()));
    }
    let value = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.trim().to_string()));
    let mut node = doc;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        node = match node {
            Value::Object(map) => {
                if last {
                    map.insert((*part).to_string(), value);
                    return Ok(());
                }
                map.entry((*part).to_string()).or_insert_with(|| Value::Object(Default::default()))
            }
            Value::Array(items) => {
                let idx: usize = part.parse().map_err(|_| ConfigError::Override(assignment.into()))?;
                let slot = items.get_mut(idx).ok_or_else(|| ConfigError::Override(assignment.into()))?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => return Err(ConfigError::Override(assignment.into())),
        };
    }
    Ok(())
}
