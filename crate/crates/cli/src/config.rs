use std::path::{Path, PathBuf};

use ksforge::Tolerance;
use serde::Deserialize;

use crate::CliError;

/// Defaults read from `--config`; command-line flags take precedence.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub tolerance: TolConfig,
    #[serde(default)]
    pub build: BuildConfig,
    #[serde(default)]
    pub interval: IntervalConfig,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolConfig {
    pub ortho_eps: Option<f64>,
    pub dedup_eps: Option<f64>,
    pub lp_eps: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildConfig {
    pub pole: Option<[f64; 3]>,
    pub a_angle: Option<f64>,
    pub a_lon: Option<f64>,
    pub b_angle: Option<f64>,
    pub b_lon: Option<f64>,
    pub q_angle: Option<f64>,
    pub dphi: Option<f64>,
    pub k: Option<usize>,
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalConfig {
    pub z0: Option<[f64; 3]>,
    pub x_angle: Option<f64>,
    pub x_lon: Option<f64>,
    pub epsilon: Option<f64>,
    pub stages: Option<usize>,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<RunConfig, CliError> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = crate::read(path)?;
        toml::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }

    pub fn tolerance(&self, flags: &TolConfig) -> Result<Tolerance, CliError> {
        let d = Tolerance::default();
        let t = Tolerance {
            ortho_eps: flags.ortho_eps.or(self.tolerance.ortho_eps).unwrap_or(d.ortho_eps),
            dedup_eps: flags.dedup_eps.or(self.tolerance.dedup_eps).unwrap_or(d.dedup_eps),
            lp_eps: flags.lp_eps.or(self.tolerance.lp_eps).unwrap_or(d.lp_eps),
        };
        t.validate()?;
        Ok(t)
    }
}
