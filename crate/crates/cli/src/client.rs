//! Builds the chat client selected by `--llm`.

use std::sync::Arc;

use anyhow::{bail, Context, Result};
use roboground_llm::{ChatClient, HttpClient, Recorder, ReplayClient, TranscriptStore};
use roboground_synthesis::scripted::ScriptedClient;

use crate::config::Settings;

pub fn build(settings: &Settings) -> Result<Arc<dyn ChatClient>> {
    let Some(spec) = settings.llm.as_deref() else {
        bail!("this command needs a model: pass --llm live, --llm mock:<transcript-dir> or --llm scripted");
    };
    let base: Arc<dyn ChatClient> = if spec == "live" {
        Arc::new(HttpClient::from_env(settings.endpoint.clone()).context("configuring the live endpoint")?)
    } else if spec == "scripted" {
        Arc::new(ScriptedClient::new())
    } else if let Some(dir) = spec.strip_prefix("mock:") {
        let store = TranscriptStore::open(dir).with_context(|| format!("opening transcripts in {dir}"))?;
        if store.is_empty()? {
            bail!("no transcripts found in {dir}");
        }
        let model = store.recorded_model()?.unwrap_or_else(|| settings.endpoint.model.clone());
        Arc::new(ReplayClient::new(store, model))
    } else {
        bail!("unknown --llm value `{spec}` (expected live, mock:<dir> or scripted)");
    };
    match &settings.record {
        Some(dir) => {
            let store = TranscriptStore::open(dir).with_context(|| format!("opening {}", dir.display()))?;
            Ok(Arc::new(Recorder::new(base, store)))
        }
        None => Ok(base),
    }
}
