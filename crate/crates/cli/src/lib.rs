//! Experiment runner and protocol server for the D2D underlay simulator.

pub mod format;
pub mod protocol;
pub mod runner;

use std::fs;
use std::path::Path;

use anyhow::{bail, Context};
use d2d_core::ScenarioConfig;

/// Reads and validates a scenario file.
pub fn load_config(path: &Path) -> anyhow::Result<ScenarioConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let config: ScenarioConfig =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let violations = config.validate();
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(ToString::to_string).collect();
        bail!(
            "invalid scenario {}:\n  {}",
            path.display(),
            list.join("\n  ")
        );
    }
    Ok(config)
}
