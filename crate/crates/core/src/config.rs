//! Run configuration, read from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ball::DEFAULT_BUDGET;
use crate::construct::ConstructionParams;
use crate::error::{Error, Result};
use crate::group::GroupSpec;

fn default_depth() -> u64 {
    8
}
fn default_p_max() -> u32 {
    6
}
fn default_samples() -> usize {
    20
}
fn default_sample_size() -> usize {
    8
}
fn default_trials() -> usize {
    25
}
fn default_psd_samples() -> usize {
    100
}
fn default_t_grid() -> Vec<f64> {
    vec![0.1, 1.0, 10.0]
}
fn default_heat_t() -> Vec<f64> {
    vec![0.5, 1.0, 2.0, 5.0]
}
fn default_x_points() -> usize {
    24
}
fn default_combine() -> u32 {
    4
}
fn default_budget() -> usize {
    DEFAULT_BUDGET
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub group: GroupSpec,
    /// Ball horizon `R`.
    pub radius: u32,
    pub d_target: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    /// Truncation depth `N`.
    #[serde(default = "default_depth")]
    pub depth: u64,
    /// Largest word length for the per-term decay check.
    #[serde(default = "default_p_max")]
    pub p_max: u32,
    /// Number of element samples for the negative-definiteness checks.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_sample_size")]
    pub sample_size: usize,
    /// Random zero-sum vectors per sample.
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Gram matrices per overlap function.
    #[serde(default = "default_psd_samples")]
    pub psd_samples: usize,
    /// Samples are drawn from the ball of this radius (default `R/2`).
    pub sample_radius: Option<u32>,
    #[serde(default = "default_t_grid")]
    pub t_grid: Vec<f64>,
    #[serde(default = "default_heat_t")]
    pub heat_t: Vec<f64>,
    /// Explicit sublevel grid; otherwise `x_points` evenly spaced levels.
    pub x_grid: Option<Vec<f64>>,
    #[serde(default = "default_x_points")]
    pub x_points: usize,
    #[serde(default)]
    pub seed: u64,
    /// Radii used by the growth fit (default: upper half of the horizon).
    pub fit_window: Option<(u32, u32)>,
    /// Number of decreasing-target contexts in the combined function; 0 disables it.
    #[serde(default = "default_combine")]
    pub combine: u32,
    /// Rows of `ell.csv` cover this radius (default `min(2m, R)`).
    pub ell_radius: Option<u32>,
    pub cache_dir: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub threads: Option<usize>,
    #[serde(default = "default_budget")]
    pub budget: usize,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        match (self.beta, self.gamma) {
            (Some(b), Some(g)) => {
                ConstructionParams::new(b, g, self.depth)?;
            }
            (None, None) => {
                if self.d_target.is_none() {
                    return Err(Error::Config("give either d_target or both beta and gamma".into()));
                }
            }
            _ => return Err(Error::Config("beta and gamma must be given together".into())),
        }
        if let Some(d) = self.d_target {
            if !(d > 0.0) {
                return Err(Error::Config(format!("d_target must be positive, got {d}")));
            }
        }
        if self.radius < 5 {
            return Err(Error::Config("radius must be at least 5".into()));
        }
        if self.depth == 0 {
            return Err(Error::Config("depth must be at least 1".into()));
        }
        if self.sample_size < 2 || self.sample_size > 256 {
            return Err(Error::Config("sample_size must be in [2, 256]".into()));
        }
        if self.t_grid.iter().chain(&self.heat_t).any(|t| !(*t > 0.0)) {
            return Err(Error::Config("t values must be positive".into()));
        }
        if let Some(r) = self.sample_radius {
            if 2 * r > self.radius {
                return Err(Error::Config(format!(
                    "sample_radius {r} needs products up to length {}, beyond radius {}",
                    2 * r,
                    self.radius
                )));
            }
        }
        Ok(())
    }

    pub fn fit_window(&self) -> (u32, u32) {
        self.fit_window.unwrap_or((self.radius / 2, self.radius))
    }

    pub fn sample_radius(&self) -> u32 {
        self.sample_radius.unwrap_or(self.radius / 2)
    }
}
