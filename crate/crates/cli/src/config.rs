//! Global options: command-line flags layered over an optional flat TOML file.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use roboground_core::ProfileRegistry;
use roboground_llm::LlmConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// Flat TOML file with defaults for any of these options.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Model backend: `live`, `mock:<transcript-dir>` or `scripted`.
    #[arg(long, global = true)]
    pub llm: Option<String>,
    /// Record every model exchange into this transcript directory.
    #[arg(long, global = true)]
    pub record: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for per-task stages.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Robot profile name.
    #[arg(long, global = true)]
    pub profile: Option<String>,
    /// Directory of extra robot profile TOML files.
    #[arg(long, global = true)]
    pub profile_dir: Option<PathBuf>,
    /// Reward mode: deterministic, llm or hybrid.
    #[arg(long, global = true)]
    pub mode: Option<String>,
    /// OpenAI-compatible endpoint for `--llm live`.
    #[arg(long, global = true, env = "ROBOGROUND_BASE_URL")]
    pub base_url: Option<String>,
    /// Model id sent to the live endpoint.
    #[arg(long, global = true, env = "ROBOGROUND_MODEL")]
    pub model: Option<String>,
}

/// Keys accepted in the config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    llm: Option<String>,
    record: Option<PathBuf>,
    seed: Option<u64>,
    jobs: Option<usize>,
    profile: Option<String>,
    profile_dir: Option<PathBuf>,
    mode: Option<String>,
    base_url: Option<String>,
    model: Option<String>,
    api_key_env: Option<String>,
    timeout_secs: Option<u64>,
    max_retries: Option<u32>,
}

/// Effective settings, snapshotted into run manifests.
#[derive(Debug, Clone, Serialize)]
pub struct Settings {
    pub llm: Option<String>,
    pub record: Option<PathBuf>,
    pub seed: Option<u64>,
    pub jobs: usize,
    pub profile: String,
    pub profile_dir: Option<PathBuf>,
    pub mode: Option<String>,
    pub endpoint: LlmConfig,
}

impl Settings {
    pub fn resolve(args: &GlobalArgs) -> Result<Self> {
        let file = match &args.config {
            Some(path) => load_file(path)?,
            None => FileConfig::default(),
        };
        let mut endpoint = LlmConfig::default();
        macro_rules! take {
            ($($field:ident),*) => {$( if let Some(v) = file.$field.clone() { endpoint.$field = v; } )*};
        }
        take!(base_url, model, api_key_env, timeout_secs, max_retries);
        if let Some(url) = &args.base_url {
            endpoint.base_url = url.clone();
        }
        if let Some(model) = &args.model {
            endpoint.model = model.clone();
        }
        let jobs = args.jobs.or(file.jobs).unwrap_or(4);
        if jobs == 0 {
            bail!("--jobs must be at least 1");
        }
        Ok(Self {
            llm: args.llm.clone().or(file.llm),
            record: args.record.clone().or(file.record),
            seed: args.seed.or(file.seed),
            jobs,
            profile: args.profile.clone().or(file.profile).unwrap_or_else(|| "uav".into()),
            profile_dir: args.profile_dir.clone().or(file.profile_dir),
            mode: args.mode.clone().or(file.mode),
            endpoint,
        })
    }

    pub fn registry(&self) -> Result<ProfileRegistry> {
        let mut registry = ProfileRegistry::with_builtins();
        if let Some(dir) = &self.profile_dir {
            registry.load_dir(dir).with_context(|| format!("loading profiles from {}", dir.display()))?;
        }
        Ok(registry)
    }

    pub fn robot(&self) -> Result<std::sync::Arc<roboground_core::RobotProfile>> {
        let registry = self.registry()?;
        registry.get(&self.profile).with_context(|| {
            format!("unknown robot profile `{}` (known: {})", self.profile, registry.names().join(", "))
        })
    }

    pub fn snapshot(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("settings serialize")
    }
}

fn load_file(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}
