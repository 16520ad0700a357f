//! Run manifests and byte-level replay.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anisotable_core::exec::BATCH_SIZE;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::{AppError, AppResult};
use crate::experiments::{self, sha256_hex, OutputFile};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamRecord {
    pub call: u64,
    pub stream_seed: u64,
    pub batch_seeds: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Totals {
    pub streams: u64,
    pub batches: u64,
    pub rows: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub tool_version: String,
    pub experiment: ExperimentKind,
    pub master_seed: u64,
    pub config_sha256: String,
    pub config: ExperimentConfig,
    pub batch_size: u64,
    pub workers: usize,
    pub streams: Vec<StreamRecord>,
    pub outputs: Vec<OutputFile>,
    pub totals: Totals,
    pub wall_time_s: f64,
}

impl RunManifest {
    pub fn load(path: &Path) -> AppResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Everything needed to execute one experiment.
#[derive(Clone, Debug)]
pub struct RunRequest {
    pub kind: ExperimentKind,
    pub config: ExperimentConfig,
    pub master_seed: u64,
    pub workers: usize,
    pub out_dir: PathBuf,
}

impl RunRequest {
    /// Merge command-line overrides into a config.
    pub fn resolve(
        kind: ExperimentKind,
        config: ExperimentConfig,
        seed: Option<u64>,
        workers: usize,
        out: Option<PathBuf>,
    ) -> AppResult<Self> {
        let mut config = config.for_kind(kind)?;
        let master_seed = seed.or(config.master_seed).ok_or_else(|| {
            AppError::Config("master_seed missing: set it in the config or pass --seed".into())
        })?;
        config.master_seed = Some(master_seed);
        let out_dir = out
            .or_else(|| config.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from(format!("anisotable-{kind}")));
        Ok(Self {
            kind,
            config,
            master_seed,
            workers,
            out_dir,
        })
    }
}

fn config_hash(config: &ExperimentConfig) -> AppResult<String> {
    // worker count and output location do not influence the results
    let mut canonical = config.clone();
    canonical.worker_count = None;
    canonical.output_dir = None;
    Ok(sha256_hex(serde_json::to_string(&canonical)?.as_bytes()))
}

/// Run an experiment and write its manifest next to the CSV files.
pub fn run_and_record(req: &RunRequest) -> AppResult<RunManifest> {
    let started = Instant::now();
    let outcome = experiments::run(req.kind, &req.config, req.master_seed, req.workers, &req.out_dir)?;
    let streams: Vec<StreamRecord> = outcome
        .streams
        .iter()
        .map(|s| StreamRecord {
            call: s.call,
            stream_seed: s.stream_seed,
            batch_seeds: s.batch_seeds().collect(),
        })
        .collect();
    let totals = Totals {
        streams: streams.len() as u64,
        batches: streams.iter().map(|s| s.batch_seeds.len() as u64).sum(),
        rows: outcome.outputs.iter().map(|o| o.rows).sum(),
    };
    let manifest = RunManifest {
        tool_version: TOOL_VERSION.to_string(),
        experiment: req.kind,
        master_seed: req.master_seed,
        config_sha256: config_hash(&req.config)?,
        config: req.config.clone(),
        batch_size: BATCH_SIZE,
        workers: req.workers,
        streams,
        outputs: outcome.outputs,
        totals,
        wall_time_s: started.elapsed().as_secs_f64(),
    };
    let path = req.out_dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(&path, text).map_err(|e| AppError::io(&path, e))?;
    Ok(manifest)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ReplayReport {
    pub warnings: Vec<String>,
    pub checked: Vec<String>,
}

/// Regenerate a run in a scratch directory and compare it byte for byte
/// with the manifest and with the files stored next to it.
pub fn replay(manifest_path: &Path, workers: usize) -> AppResult<ReplayReport> {
    let manifest = RunManifest::load(manifest_path)?;
    let mut report = ReplayReport::default();
    if manifest.tool_version != TOOL_VERSION {
        report.warnings.push(format!(
            "manifest written by version {}, replaying with {}",
            manifest.tool_version, TOOL_VERSION
        ));
    }
    if config_hash(&manifest.config)? != manifest.config_sha256 {
        return Err(AppError::MismatchDetected(vec!["config".into()]));
    }
    let scratch = tempfile::tempdir().map_err(|e| AppError::io(std::env::temp_dir(), e))?;
    let outcome = experiments::run(
        manifest.experiment,
        &manifest.config,
        manifest.master_seed,
        workers,
        scratch.path(),
    )?;
    let stored_dir = manifest_path.parent().unwrap_or(Path::new("."));
    let mut mismatched = Vec::new();
    if outcome.outputs.len() != manifest.outputs.len() {
        mismatched.push("output file list".to_string());
    }
    for expected in &manifest.outputs {
        let fresh = outcome.outputs.iter().find(|o| o.file == expected.file);
        if fresh != Some(expected) {
            mismatched.push(format!("{} (regenerated)", expected.file));
            continue;
        }
        let stored = stored_dir.join(&expected.file);
        match std::fs::read(&stored) {
            Ok(bytes) if sha256_hex(&bytes) == expected.sha256 => {}
            Ok(_) => mismatched.push(format!("{} (on disk)", expected.file)),
            Err(e) => return Err(AppError::io(stored, e)),
        }
        report.checked.push(expected.file.clone());
    }
    if !mismatched.is_empty() {
        return Err(AppError::MismatchDetected(mismatched));
    }
    Ok(report)
}
