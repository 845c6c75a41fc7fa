use std::path::Path;

use qnoise_core::{SpectralDensityPair, SpectralGrid};
use serde::Deserialize;

use crate::InputError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelName {
    Planck,
    Flat,
    Tabulated,
}

/// Run configuration, read from a flat TOML file. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelName,
    pub beta: Option<f64>,
    pub h: Option<f64>,
    pub sigma2: Option<f64>,
    pub values: Option<Vec<f64>>,
    pub n_points: usize,
    pub step: f64,
    /// Time step; defaults to `1 / (n_points * step)`.
    pub eps: Option<f64>,
    /// Replaces every check tolerance when set.
    pub tolerance: Option<f64>,
    /// Frequency bands `[lo, hi]` used for moment tables.
    pub intervals: Option<Vec<[f64; 2]>>,
}

/// A validated configuration: grid, time step and density pair.
#[derive(Debug, Clone)]
pub struct Setup {
    pub config: RunConfig,
    pub grid: SpectralGrid,
    pub eps: f64,
    pub pair: SpectralDensityPair,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, InputError> {
        toml::from_str(text).map_err(|e| InputError(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, InputError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| InputError(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    fn forbid(&self, key: &str, present: bool) -> Result<(), InputError> {
        if present {
            return Err(InputError(format!(
                "key `{key}` is not used by model {:?}",
                self.model
            )));
        }
        Ok(())
    }

    fn require(key: &str, value: Option<f64>) -> Result<f64, InputError> {
        value.ok_or_else(|| InputError(format!("missing key `{key}`")))
    }

    pub fn setup(self) -> Result<Setup, InputError> {
        let core = |e: qnoise_core::Error| InputError(e.to_string());
        let grid = SpectralGrid::new(self.n_points, self.step).map_err(core)?;
        let eps = self.eps.unwrap_or_else(|| grid.dual_eps());
        grid.check_eps(eps).map_err(core)?;
        if let Some(tol) = self.tolerance {
            if !(tol > 0.0) || !tol.is_finite() {
                return Err(InputError(format!("tolerance must be positive, got {tol}")));
            }
        }
        for [lo, hi] in self.intervals.iter().flatten() {
            if !(lo <= hi) {
                return Err(InputError(format!(
                    "interval [{lo}, {hi}] is empty or not finite"
                )));
            }
        }
        let pair = match self.model {
            ModelName::Planck => {
                self.forbid("sigma2", self.sigma2.is_some())?;
                self.forbid("values", self.values.is_some())?;
                let beta = Self::require("beta", self.beta)?;
                let h = Self::require("h", self.h)?;
                SpectralDensityPair::planck(beta, h, &grid).map_err(core)?
            }
            ModelName::Flat => {
                self.forbid("beta", self.beta.is_some())?;
                self.forbid("h", self.h.is_some())?;
                self.forbid("values", self.values.is_some())?;
                SpectralDensityPair::flat(Self::require("sigma2", self.sigma2)?, &grid)
                    .map_err(core)?
            }
            ModelName::Tabulated => {
                self.forbid("beta", self.beta.is_some())?;
                self.forbid("h", self.h.is_some())?;
                self.forbid("sigma2", self.sigma2.is_some())?;
                let values = self
                    .values
                    .as_ref()
                    .ok_or_else(|| InputError("missing key `values`".into()))?;
                SpectralDensityPair::tabulated(values, &grid).map_err(core)?
            }
        };
        Ok(Setup {
            config: self,
            grid,
            eps,
            pair,
        })
    }

    pub fn intervals(&self) -> Vec<[f64; 2]> {
        self.intervals
            .clone()
            .unwrap_or_else(|| vec![[-1.0, 1.0], [0.0, 0.5]])
    }
}
