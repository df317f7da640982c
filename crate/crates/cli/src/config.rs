//! Loading the run configuration and locating the run directory.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use solarcast_core::pipeline::PipelineConfig;

use crate::CliError;

/// Read a TOML config, or use the built-in defaults when no path is given,
/// then apply flag overrides and validate. Nothing is written here.
pub fn load(path: Option<&Path>, seed: Option<u64>, output: Option<&Path>) -> Result<PipelineConfig, CliError> {
    let mut config = match path {
        None => PipelineConfig::default(),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))?;
            parse(&text).map_err(|e| CliError::Usage(format!("invalid config {}: {e}", p.display())))?
        }
    };
    if let Some(seed) = seed {
        config.seed = Some(seed);
    }
    if let Some(dir) = output {
        config.output.dir = dir.to_path_buf();
    }
    if let Some(p) = path {
        resolve_relative(&mut config, p.parent().unwrap_or(Path::new(".")));
    }
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    for input in [&config.ingest.path, &config.ingest.weather_path].into_iter().flatten() {
        if !input.is_file() {
            return Err(CliError::Usage(format!("input file {} does not exist", input.display())));
        }
    }
    Ok(config)
}

pub fn parse(text: &str) -> Result<PipelineConfig, toml::de::Error> {
    toml::from_str(text)
}

/// Input paths in a config file are relative to the file itself.
fn resolve_relative(config: &mut PipelineConfig, base: &Path) {
    for p in [&mut config.ingest.path, &mut config.ingest.weather_path].into_iter().flatten() {
        if p.is_relative() {
            *p = base.join(&*p);
        }
    }
}

/// Canonical JSON of the resolved config; also echoed into the run directory.
/// The output location is left out, so the same experiment produces the same
/// bytes wherever it is written.
pub fn canonical_json(config: &PipelineConfig) -> String {
    let mut value = serde_json::to_value(config).expect("config is always serializable");
    if let Some(map) = value.as_object_mut() {
        map.remove("output");
    }
    serde_json::to_string_pretty(&value).expect("JSON values always serialize")
}

/// `<output.dir>/run-<hash>`, the hash covering the config and seed
/// (but not the output location).
pub fn run_dir(config: &PipelineConfig) -> PathBuf {
    let digest = Sha256::digest(canonical_json(config).as_bytes());
    config.output.dir.join(format!("run-{}", &hex::encode(digest)[..16]))
}
