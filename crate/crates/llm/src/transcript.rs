use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{ChatClient, ChatRequest, ChatResponse, ClientError};

/// Content hash identifying a request: identical requests share a key.
pub fn request_key(request: &ChatRequest) -> String {
    let canonical = serde_json::to_vec(request).expect("requests serialize");
    let digest = Sha256::digest(&canonical);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub key: String,
    pub request: ChatRequest,
    pub response: ChatResponse,
}

/// Directory of transcripts, one pretty-printed JSON file per request key.
#[derive(Debug, Clone)]
pub struct TranscriptStore {
    dir: PathBuf,
}

impl TranscriptStore {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, ClientError> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn save(&self, transcript: &Transcript) -> Result<(), ClientError> {
        let mut text = serde_json::to_string_pretty(transcript).expect("transcripts serialize");
        text.push('\n');
        // Write-then-rename so concurrent workers never expose a torn file.
        let tmp = self.dir.join(format!(".{}.tmp-{:?}", transcript.key, std::thread::current().id()));
        fs::write(&tmp, text)?;
        fs::rename(&tmp, self.path_for(&transcript.key))?;
        Ok(())
    }

    pub fn load(&self, key: &str) -> Result<Option<Transcript>, ClientError> {
        let path = self.path_for(key);
        if !path.exists() {
            return Ok(None);
        }
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map(Some).map_err(|e| ClientError::Decode(format!("transcript {key}: {e}")))
    }

    pub fn len(&self) -> Result<usize, ClientError> {
        let mut n = 0;
        for entry in fs::read_dir(&self.dir)? {
            let name = entry?.file_name();
            let name = name.to_string_lossy();
            if name.ends_with(".json") && !name.starts_with('.') {
                n += 1;
            }
        }
        Ok(n)
    }

    pub fn is_empty(&self) -> Result<bool, ClientError> {
        self.len().map(|n| n == 0)
    }

    /// Model id of the recorded requests, taken from the first transcript in
    /// name order. `None` for an empty store.
    pub fn recorded_model(&self) -> Result<Option<String>, ClientError> {
        let mut names: Vec<String> = fs::read_dir(&self.dir)?
            .filter_map(|e| e.ok())
            .map(|e| e.file_name().to_string_lossy().into_owned())
            .filter(|n| n.ends_with(".json") && !n.starts_with('.'))
            .collect();
        names.sort();
        match names.first() {
            Some(name) => Ok(self.load(name.trim_end_matches(".json"))?.map(|t| t.request.model)),
            None => Ok(None),
        }
    }
}

/// Wraps a client and records every successful exchange.
pub struct Recorder<C> {
    inner: C,
    store: TranscriptStore,
}

impl<C: ChatClient> Recorder<C> {
    pub fn new(inner: C, store: TranscriptStore) -> Self {
        Self { inner, store }
    }
}

impl<C: ChatClient> ChatClient for Recorder<C> {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, ClientError> {
        let response = self.inner.complete(request)?;
        let key = request_key(request);
        self.store.save(&Transcript { key, request: request.clone(), response: response.clone() })?;
        Ok(response)
    }

    fn model_id(&self) -> String {
        self.inner.model_id()
    }

    fn is_live(&self) -> bool {
        self.inner.is_live()
    }
}

/// Serves responses from recorded transcripts; never touches the network.
pub struct ReplayClient {
    store: TranscriptStore,
    model: String,
}

impl ReplayClient {
    pub fn new(store: TranscriptStore, model: impl Into<String>) -> Self {
        Self { store, model: model.into() }
    }
}

impl ChatClient for ReplayClient {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, ClientError> {
        let key = request_key(request);
        match self.store.load(&key)? {
            Some(t) => Ok(t.response),
            None => Err(ClientError::MissingTranscript { key }),
        }
    }

    fn model_id(&self) -> String {
        self.model.clone()
    }
}
