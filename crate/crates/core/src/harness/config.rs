use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::{Backend, NoiseModel};
use crate::prs::SignalConfig;
use crate::scenario::{IooParams, ScenarioKind, UmiParams};
use crate::selection::{Strategy, MIN_FIX_STATIONS};
use crate::solver::SolverConfig;

pub const DEFAULT_TRIALS: usize = 500;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scenario: ScenarioKind,
    pub trials: usize,
    pub n_select: usize,
    pub strategies: Vec<Strategy>,
    pub backend: Backend,
    pub seed: u64,
    pub out: PathBuf,
    /// LOS stations per trial; `None` keeps the scenario default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_los: Option<usize>,
    pub noise: NoiseModel,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub signal: SignalConfig,
}

impl ExperimentConfig {
    /// Defaults for `kind`: indoor noise for IOO, outdoor for UMi.
    pub fn new(kind: ScenarioKind) -> Self {
        Self {
            scenario: kind,
            trials: DEFAULT_TRIALS,
            n_select: MIN_FIX_STATIONS,
            strategies: Strategy::ALL.to_vec(),
            backend: Backend::Abstract,
            seed: 0,
            out: PathBuf::from("results"),
            n_los: None,
            noise: match kind {
                ScenarioKind::Umi => NoiseModel::OUTDOOR,
                ScenarioKind::Ioo => NoiseModel::INDOOR,
            },
            solver: SolverConfig::default(),
            signal: SignalConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        if self.n_select < MIN_FIX_STATIONS {
            return Err(Error::InvalidParameter(format!(
                "n_select must be at least {MIN_FIX_STATIONS}, got {}",
                self.n_select
            )));
        }
        if self.strategies.is_empty() {
            return Err(Error::InvalidParameter("no strategies selected".into()));
        }
        let mut seen = self.strategies.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.strategies.len() {
            return Err(Error::InvalidParameter("duplicate strategy".into()));
        }
        self.noise.validate()?;
        self.solver.validate()?;
        if self.backend == Backend::Signal {
            self.signal.validate()?;
        }
        Ok(())
    }

    pub fn umi_params(&self) -> UmiParams {
        let d = UmiParams::default();
        UmiParams { n_los: self.n_los.unwrap_or(d.n_los), ..d }
    }

    pub fn ioo_params(&self) -> IooParams {
        let d = IooParams::default();
        IooParams { n_los: self.n_los.unwrap_or(d.n_los), ..d }
    }

    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }
}
