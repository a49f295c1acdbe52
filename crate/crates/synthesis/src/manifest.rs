//! Per-command run manifests written next to the outputs.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::prompts::template_hashes;
use crate::SynthesisError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timestamps {
    pub started_unix: u64,
    pub finished_unix: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: Value,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub prompt_template_hashes: BTreeMap<String, String>,
    pub model_ids: BTreeMap<String, String>,
    pub seed: Option<u64>,
    /// Wall-clock times, recorded only for live runs so that offline runs
    /// produce byte-identical manifests.
    pub timestamps: Option<Timestamps>,
    pub details: Value,
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.into(),
            config: Value::Null,
            inputs: Vec::new(),
            outputs: Vec::new(),
            prompt_template_hashes: template_hashes(),
            model_ids: BTreeMap::new(),
            seed: None,
            timestamps: None,
            details: Value::Null,
        }
    }

    /// Starts the clock when the run is live.
    pub fn start(mut self, live: bool) -> Self {
        if live {
            let t = now();
            self.timestamps = Some(Timestamps { started_unix: t, finished_unix: t });
        }
        self
    }

    pub fn finish(&mut self) {
        if let Some(ts) = self.timestamps.as_mut() {
            ts.finished_unix = now();
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), SynthesisError> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent)?;
        }
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }
}
