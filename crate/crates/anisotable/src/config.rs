//! Experiment configuration files.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{AppError, AppResult};
use crate::formats::{DomainSpec, ModelSpec, SchemeSpec};

pub const WORKERS_ENV: &str = "ANISOTABLE_WORKERS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Sample,
    Survival,
    ExponentTime,
    ExponentSpace,
    Factorization,
    Overshoot,
    Yaglom,
    Zolotarev,
    BiasProbe,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 9] = [
        ExperimentKind::Sample,
        ExperimentKind::Survival,
        ExperimentKind::ExponentTime,
        ExperimentKind::ExponentSpace,
        ExperimentKind::Factorization,
        ExperimentKind::Overshoot,
        ExperimentKind::Yaglom,
        ExperimentKind::Zolotarev,
        ExperimentKind::BiasProbe,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Sample => "sample",
            ExperimentKind::Survival => "survival",
            ExperimentKind::ExponentTime => "exponent-time",
            ExperimentKind::ExponentSpace => "exponent-space",
            ExperimentKind::Factorization => "factorization",
            ExperimentKind::Overshoot => "overshoot",
            ExperimentKind::Yaglom => "yaglom",
            ExperimentKind::Zolotarev => "zolotarev",
            ExperimentKind::BiasProbe => "bias-probe",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = AppError;

    fn from_str(s: &str) -> AppResult<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| AppError::Config(format!("unknown experiment kind {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentKind>,
    pub model: ModelSpec,
    pub domain: DomainSpec,
    #[serde(default)]
    pub scheme: SchemeSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub worker_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub params: serde_json::Value,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> AppResult<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> AppResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        Self::from_json(&text)
    }

    /// Check the experiment kind against the one requested on the command
    /// line and fill it in.
    pub fn for_kind(mut self, kind: ExperimentKind) -> AppResult<Self> {
        match self.experiment {
            Some(k) if k != kind => {
                return Err(AppError::Config(format!(
                    "config is for experiment {k}, but {kind} was requested"
                )))
            }
            _ => self.experiment = Some(kind),
        }
        Ok(self)
    }
}

/// `--workers`, then the environment variable, then the config, then 1.
pub fn resolve_workers(cli: Option<usize>, env: Option<&str>, config: Option<usize>) -> AppResult<usize> {
    if let Some(w) = cli {
        return Ok(w.max(1));
    }
    if let Some(v) = env.filter(|v| !v.trim().is_empty()) {
        return v
            .trim()
            .parse::<usize>()
            .map(|w| w.max(1))
            .map_err(|_| AppError::Config(format!("{WORKERS_ENV}={v:?} is not a worker count")));
    }
    Ok(config.unwrap_or(1).max(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_names_round_trip() {
        for k in ExperimentKind::ALL {
            assert_eq!(k.as_str().parse::<ExperimentKind>().unwrap(), k);
            let json = serde_json::to_string(&k).unwrap();
            assert_eq!(json, format!("\"{}\"", k.as_str()));
        }
        assert!("walk".parse::<ExperimentKind>().is_err());
    }

    #[test]
    fn worker_precedence() {
        assert_eq!(resolve_workers(Some(3), Some("5"), Some(7)).unwrap(), 3);
        assert_eq!(resolve_workers(None, Some("5"), Some(7)).unwrap(), 5);
        assert_eq!(resolve_workers(None, None, Some(7)).unwrap(), 7);
        assert_eq!(resolve_workers(None, None, None).unwrap(), 1);
        assert!(resolve_workers(None, Some("many"), None).is_err());
    }

    #[test]
    fn mismatched_kind_is_rejected() {
        let json = r#"{"experiment":"yaglom","model":{"alpha":1.5,"dim":1,"density":{"kind":"constant","value":1.0},"theta_low":0.5,"theta_high":2.0},"domain":{"kind":"halfspace","axis":[1.0]},"params":{}}"#;
        let cfg = ExperimentConfig::from_json(json).unwrap();
        assert!(cfg.clone().for_kind(ExperimentKind::Survival).is_err());
        assert!(cfg.for_kind(ExperimentKind::Yaglom).is_ok());
    }
}
