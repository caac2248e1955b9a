use crate::bounds::ChannelParams;
use crate::ehmodel::HarvestModel;
use crate::numerics::DEFAULT_ORDER;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// What an experiment computes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Analytic bounds only.
    Bounds,
    /// Information-density moments with a Monte Carlo cross-check.
    Moments,
    /// Bounds plus Monte Carlo of the error events at every grid point.
    Simulate,
    /// Bounds, plus Monte Carlo when `messages` is set.
    #[default]
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HarvestKind {
    Constant,
    Exponential,
    Uniform,
    BernoulliScaled,
}

/// Harvest law; the mean comes from `channel.harvest_mean`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarvestSpec {
    pub kind: HarvestKind,
    /// Uniform support width (default `2·mean`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    /// Bernoulli success probability.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
}

impl HarvestSpec {
    pub fn model(&self, mean: f64) -> Result<HarvestModel> {
        let model = match self.kind {
            HarvestKind::Constant => HarvestModel::Constant { mean },
            HarvestKind::Exponential => HarvestModel::Exponential { mean },
            HarvestKind::Uniform => HarvestModel::Uniform {
                mean,
                width: self.width.unwrap_or(2.0 * mean),
            },
            HarvestKind::BernoulliScaled => HarvestModel::BernoulliScaled {
                mean,
                p: self
                    .p
                    .ok_or_else(|| Error::Validation("harvest.p is required for bernoulli_scaled".into()))?,
            },
        };
        model.validate().map_err(|e| Error::Validation(format!("harvest: {e}")))?;
        Ok(model)
    }
}

fn default_a() -> Vec<f64> {
    vec![1.0]
}

fn default_trials() -> u64 {
    10_000
}

fn default_order() -> usize {
    DEFAULT_ORDER
}

/// A JSON experiment description. Exactly one of `n` (transmission lengths)
/// and `n_hat` (total blocklengths) must be given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub channel: ChannelParams,
    pub harvest: HarvestSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_hat: Option<Vec<u64>>,
    pub eps: Vec<f64>,
    #[serde(default = "default_a")]
    pub a: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mode: Mode,
    /// Codebook size for Monte Carlo.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub messages: Option<usize>,
    #[serde(default = "default_order")]
    pub quadrature_order: usize,
}

impl ExperimentConfig {
    pub fn harvest_model(&self) -> Result<HarvestModel> {
        self.harvest.model(self.channel.harvest_mean)
    }

    /// Whether grid values are total blocklengths.
    pub fn grid_is_n_hat(&self) -> bool {
        self.n_hat.is_some()
    }

    pub fn grid(&self) -> &[u64] {
        self.n
            .as_deref()
            .or(self.n_hat.as_deref())
            .unwrap_or_default()
    }

    /// Whether Monte Carlo runs at every grid point.
    pub fn simulates(&self) -> bool {
        match self.mode {
            Mode::Simulate => true,
            Mode::Sweep => self.messages.is_some(),
            Mode::Bounds | Mode::Moments => false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Validation(msg));
        for (name, v) in [
            ("channel.noise_var", self.channel.noise_var),
            ("channel.harvest_mean", self.channel.harvest_mean),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} = {v} must be positive"));
            }
        }
        self.harvest_model()?;
        let (key, grid) = match (&self.n, &self.n_hat) {
            (Some(g), None) => ("n", g),
            (None, Some(g)) => ("n_hat", g),
            (Some(_), Some(_)) => return bad("give only one of n and n_hat".into()),
            (None, None) => return bad("one of n or n_hat is required".into()),
        };
        if grid.is_empty() {
            return bad(format!("{key} grid is empty"));
        }
        let min = if key == "n" { 2 } else { 3 };
        if let Some((i, v)) = grid.iter().enumerate().find(|(_, &v)| v < min) {
            return bad(format!("{key}[{i}] = {v} must be at least {min}"));
        }
        if self.eps.is_empty() {
            return bad("eps grid is empty".into());
        }
        if let Some((i, v)) = self.eps.iter().enumerate().find(|(_, &v)| !(v > 0.0 && v < 1.0)) {
            return bad(format!("eps[{i}] = {v} must lie in (0, 1)"));
        }
        if self.a.is_empty() {
            return bad("a grid is empty".into());
        }
        if let Some((i, v)) = self.a.iter().enumerate().find(|(_, &v)| !(v > 0.0 && v.is_finite())) {
            return bad(format!("a[{i}] = {v} must be positive"));
        }
        if self.quadrature_order < 2 {
            return bad(format!("quadrature_order = {} must be at least 2", self.quadrature_order));
        }
        if self.mode == Mode::Simulate && self.messages.is_none() {
            return bad("messages is required in simulate mode".into());
        }
        if let Some(m) = self.messages {
            if m == 0 {
                return bad("messages must be at least 1".into());
            }
        }
        if (self.simulates() || self.mode == Mode::Moments) && self.trials < 100 {
            return bad(format!("trials = {} must be at least 100", self.trials));
        }
        Ok(())
    }
}

/// Parses and validates a config from JSON text.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}
