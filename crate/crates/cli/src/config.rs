//! Scenario files.
//!
//! ```toml
//! [network]
//! lambda_b = 1e-5
//! lambda_m = 1e-4
//! threshold = 1e6
//! fading = { type = "rayleigh", mu = 1.0 }
//! path_loss = { type = "exponent", k = 0.01, gamma = 2.8 }
//!
//! [[capacity_functions]]
//! type = "coverage_indicator"
//! threshold = 1e6
//!
//! [simulation]
//! replications = 10000
//! seed = 1
//!
//! [output]
//! directory = "out"
//! ```

use std::path::{Path, PathBuf};

use cellfade::capacity::CapacityFunction;
use cellfade::channel::{FadingModel, NetworkModel, PathLossModel};
use cellfade::simulator::SimulationConfig;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const DEFAULT_REPLICATIONS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub network: NetworkSection,
    #[serde(default)]
    pub capacity_functions: Vec<CapacitySpec>,
    #[serde(default)]
    pub simulation: SimulationSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    pub lambda_b: f64,
    pub lambda_m: f64,
    pub threshold: f64,
    pub fading: FadingSpec,
    pub path_loss: PathLossSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FadingSpec {
    Rayleigh { mu: f64 },
    LogNormal { sigma_db: f64 },
    Constant { h: f64 },
    RayleighLogNormal { mu: f64, sigma_db: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PathLossSpec {
    Exponent { k: f64, gamma: f64 },
    ModifiedExponent { k: f64, gamma: f64, r0: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum CapacitySpec {
    One,
    OutageIndicator { threshold: f64 },
    CoverageIndicator { threshold: f64 },
    PiecewiseConstant { breakpoints: Vec<f64>, rates: Vec<f64> },
    Tabulated { grid: Vec<f64>, values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bs_window_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub user_window_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replications: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tracked_orders: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directory: Option<PathBuf>,
    #[serde(default = "default_formats")]
    pub formats: Vec<String>,
}

fn default_formats() -> Vec<String> {
    vec!["csv".to_string()]
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: None,
            formats: default_formats(),
        }
    }
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if let Some(f) = cfg.output.formats.iter().find(|f| f.as_str() != "csv") {
            return Err(CliError::Config(format!("unsupported output format `{f}` (only `csv`)")));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn network(&self) -> Result<NetworkModel, CliError> {
        let n = &self.network;
        let fading = match n.fading {
            FadingSpec::Rayleigh { mu } => FadingModel::rayleigh(mu),
            FadingSpec::LogNormal { sigma_db } => FadingModel::log_normal(sigma_db),
            FadingSpec::Constant { h } => FadingModel::constant(h),
            FadingSpec::RayleighLogNormal { mu, sigma_db } => {
                FadingModel::rayleigh_log_normal(mu, sigma_db)
            }
        }
        .map_err(|e| CliError::Config(format!("network.fading: {e}")))?;
        let path_loss = match n.path_loss {
            PathLossSpec::Exponent { k, gamma } => PathLossModel::exponent(k, gamma),
            PathLossSpec::ModifiedExponent { k, gamma, r0 } => {
                PathLossModel::modified_exponent(k, gamma, r0)
            }
        }
        .map_err(|e| CliError::Config(format!("network.path_loss: {e}")))?;
        NetworkModel::new(n.lambda_b, n.lambda_m, fading, path_loss, n.threshold)
            .map_err(|e| CliError::Config(format!("network: {e}")))
    }

    pub fn capacity_functions(&self) -> Result<Vec<CapacityFunction>, CliError> {
        self.capacity_functions
            .iter()
            .enumerate()
            .map(|(i, spec)| {
                match spec.clone() {
                    CapacitySpec::One => Ok(CapacityFunction::one()),
                    CapacitySpec::OutageIndicator { threshold } => {
                        CapacityFunction::outage_indicator(threshold)
                    }
                    CapacitySpec::CoverageIndicator { threshold } => {
                        CapacityFunction::coverage_indicator(threshold)
                    }
                    CapacitySpec::PiecewiseConstant { breakpoints, rates } => {
                        CapacityFunction::piecewise_constant(breakpoints, rates)
                    }
                    CapacitySpec::Tabulated { grid, values } => {
                        CapacityFunction::tabulated(grid, values)
                    }
                }
                .map_err(|e| CliError::Config(format!("capacity_functions[{i}]: {e}")))
            })
            .collect()
    }

    /// Simulation settings with command-line overrides applied.
    pub fn simulation(
        &self,
        seed: Option<u64>,
        replications: Option<usize>,
        threads: Option<usize>,
    ) -> Result<SimulationConfig, CliError> {
        let s = &self.simulation;
        let mut cfg = SimulationConfig::new(self.network()?);
        cfg.bs_window_radius = s.bs_window_radius;
        cfg.user_window_radius = s.user_window_radius;
        cfg.replications = replications.or(s.replications).unwrap_or(DEFAULT_REPLICATIONS);
        cfg.master_seed = seed.or(s.seed).unwrap_or(0);
        if let Some(eps) = s.epsilon {
            cfg.truncation_epsilon = eps;
        }
        if let Some(m) = s.tracked_orders {
            cfg.tracked_orders = m;
        }
        cfg.threads = threads.or(s.threads);
        cfg.capacity_functions = self.capacity_functions()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = r#"
[network]
lambda_b = 1e-5
lambda_m = 5e-5
threshold = 1e6
fading = { type = "log_normal", sigma_db = 4.0 }
path_loss = { type = "modified_exponent", k = 0.01, gamma = 2.8, r0 = 1.0 }

[[capacity_functions]]
type = "one"

[[capacity_functions]]
type = "piecewise_constant"
breakpoints = [1e5, 1e6, inf]
rates = [2.0, 1.0]

[[capacity_functions]]
type = "tabulated"
grid = [0.0, 1e6]
values = [1.0, 0.0]

[simulation]
replications = 500
seed = 7
epsilon = 1e-3

[output]
directory = "out"
"#;

    #[test]
    fn parses_full_scenario() {
        let cfg = ScenarioConfig::parse(FULL).unwrap();
        assert_eq!(cfg.capacity_functions.len(), 3);
        assert_eq!(cfg.simulation.seed, Some(7));
        let net = cfg.network().unwrap();
        assert_eq!(net.fading, FadingModel::LogNormal { sigma_db: 4.0 });
        let fs = cfg.capacity_functions().unwrap();
        assert_eq!(fs[1].evaluate(1e9), 1.0);
        let sim = cfg.simulation(None, Some(20), Some(2)).unwrap();
        assert_eq!(sim.replications, 20);
        assert_eq!(sim.master_seed, 7);
        assert_eq!(sim.threads, Some(2));
    }

    #[test]
    fn round_trip() {
        let cfg = ScenarioConfig::parse(FULL).unwrap();
        let text = cfg.to_toml().unwrap();
        let again = ScenarioConfig::parse(&text).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = FULL.replace("seed = 7", "seed = 7\nsede = 8");
        let err = ScenarioConfig::parse(&bad).unwrap_err();
        assert!(err.to_string().contains("sede"), "{err}");
        let bad = FULL.replace("sigma_db = 4.0", "sigma_db = 4.0, mu = 1.0");
        assert!(ScenarioConfig::parse(&bad).is_err());
        let bad = FULL.replace("[output]", "[outputs]");
        assert!(ScenarioConfig::parse(&bad).is_err());
    }

    #[test]
    fn diagnostics_point_at_the_line() {
        let bad = FULL.replace("lambda_m = 5e-5", "lambda_m = \"many\"");
        let err = ScenarioConfig::parse(&bad).unwrap_err().to_string();
        assert!(err.contains("lambda_m") && err.contains("line 4"), "{err}");
    }

    #[test]
    fn physical_validation() {
        let bad = FULL.replace("gamma = 2.8", "gamma = 1.5");
        let cfg = ScenarioConfig::parse(&bad).unwrap();
        assert!(matches!(cfg.network(), Err(CliError::Config(_))));
        let bad = FULL.replace("rates = [2.0, 1.0]", "rates = [2.0]");
        let cfg = ScenarioConfig::parse(&bad).unwrap();
        assert!(cfg.capacity_functions().is_err());
        let bad = FULL.replace("directory = \"out\"", "formats = [\"parquet\"]");
        assert!(ScenarioConfig::parse(&bad).is_err());
    }
}
