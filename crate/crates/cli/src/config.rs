//! Run configuration: built-in defaults, overridden by an optional TOML file,
//! overridden by command-line flags.

use std::path::Path;

use gh_core::correspondence::MAX_STAR_SIDE;
use gh_core::metricspace::{E_SEARCH_BUDGET, TAU_EQ, TAU_METRIC};
use gh_core::{GhError, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Pretty,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub tau_metric: f64,
    pub tau_eq: f64,
    /// Largest side accepted by the exact solver.
    pub max_exact_side: usize,
    /// Largest space for which `e` is computed.
    pub e_budget: usize,
    pub seed: Option<u64>,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            tau_metric: TAU_METRIC,
            tau_eq: TAU_EQ,
            max_exact_side: MAX_STAR_SIDE,
            e_budget: E_SEARCH_BUDGET,
            seed: None,
            format: Format::Json,
        }
    }
}

/// Every field optional; used both for the config file and for flag overrides.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    pub tau_metric: Option<f64>,
    pub tau_eq: Option<f64>,
    pub max_exact_side: Option<usize>,
    pub e_budget: Option<usize>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
}

impl ConfigLayer {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| GhError::Parse {
            location: Some(path.display().to_string()),
            message: e.to_string(),
        })?;
        toml::from_str(&text).map_err(|e| GhError::Parse {
            location: Some(match e.span() {
                Some(span) => {
                    let line = text[..span.start].lines().count().max(1);
                    format!("{}: line {line}", path.display())
                }
                None => path.display().to_string(),
            }),
            message: e.message().to_string(),
        })
    }
}

impl RunConfig {
    /// Applies `layer` on top of `self`.
    pub fn merge(mut self, layer: &ConfigLayer) -> Self {
        if let Some(v) = layer.tau_metric {
            self.tau_metric = v;
        }
        if let Some(v) = layer.tau_eq {
            self.tau_eq = v;
        }
        if let Some(v) = layer.max_exact_side {
            self.max_exact_side = v;
        }
        if let Some(v) = layer.e_budget {
            self.e_budget = v;
        }
        if let Some(v) = layer.seed {
            self.seed = Some(v);
        }
        if let Some(v) = layer.format {
            self.format = v;
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("tau_metric", self.tau_metric), ("tau_eq", self.tau_eq)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(GhError::Domain(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        for (name, value) in [
            ("max_exact_side", self.max_exact_side),
            ("e_budget", self.e_budget),
        ] {
            if value < 1 {
                return Err(GhError::Domain(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }
}
