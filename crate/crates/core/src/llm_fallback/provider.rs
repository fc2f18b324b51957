//! Completion providers: the trait the fallback talks to, plus offline
//! implementations (transcript replay, scripted queue, recorder).

use std::collections::{HashMap, VecDeque};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::provider::ProviderError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecodeParams {
    pub max_tokens: u32,
    pub temperature: f32,
}

impl Default for DecodeParams {
    fn default() -> Self {
        Self {
            max_tokens: 256,
            temperature: 0.0,
        }
    }
}

pub trait CompletionProvider: Send + Sync {
    fn complete(&self, prompt: &str, params: &DecodeParams) -> Result<String, ProviderError>;
}

impl<P: CompletionProvider + ?Sized> CompletionProvider for &P {
    fn complete(&self, prompt: &str, params: &DecodeParams) -> Result<String, ProviderError> {
        (**self).complete(prompt, params)
    }
}

impl<P: CompletionProvider + ?Sized> CompletionProvider for std::sync::Arc<P> {
    fn complete(&self, prompt: &str, params: &DecodeParams) -> Result<String, ProviderError> {
        (**self).complete(prompt, params)
    }
}

/// Lowercase hex sha256 of the rendered prompt; the replay key.
pub fn prompt_sha256(prompt: &str) -> String {
    Sha256::digest(prompt.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranscriptEntry {
    pub prompt_sha256: String,
    pub response: String,
}

pub fn parse_transcript(json: &str) -> Result<Vec<TranscriptEntry>, ProviderError> {
    serde_json::from_str(json).map_err(|e| ProviderError::BadPayload(format!("transcript: {e}")))
}

/// Answers from a recorded transcript, keyed by prompt hash. Counts every
/// call, answered or not.
#[derive(Debug, Default)]
pub struct ReplayProvider {
    responses: HashMap<String, String>,
    calls: AtomicUsize,
}

impl ReplayProvider {
    pub fn new(entries: impl IntoIterator<Item = TranscriptEntry>) -> Self {
        Self {
            responses: entries.into_iter().map(|e| (e.prompt_sha256, e.response)).collect(),
            calls: AtomicUsize::new(0),
        }
    }

    pub fn from_json(json: &str) -> Result<Self, ProviderError> {
        parse_transcript(json).map(Self::new)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ProviderError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| ProviderError::Unreachable(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Keys responses by the hash of the given prompt text.
    pub fn from_prompts<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        Self::new(pairs.into_iter().map(|(p, r)| TranscriptEntry {
            prompt_sha256: prompt_sha256(p),
            response: r.to_owned(),
        }))
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn reset_calls(&self) {
        self.calls.store(0, Ordering::SeqCst);
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }
}

impl CompletionProvider for ReplayProvider {
    fn complete(&self, prompt: &str, _: &DecodeParams) -> Result<String, ProviderError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let key = prompt_sha256(prompt);
        self.responses
            .get(&key)
            .cloned()
            .ok_or(ProviderError::MissingTranscript(key))
    }
}

/// Returns queued responses in order regardless of the prompt; records the
/// prompts it was given.
#[derive(Debug, Default)]
pub struct ScriptedProvider {
    queue: Mutex<VecDeque<String>>,
    prompts: Mutex<Vec<String>>,
}

impl ScriptedProvider {
    pub fn new<S: Into<String>>(responses: impl IntoIterator<Item = S>) -> Self {
        Self {
            queue: Mutex::new(responses.into_iter().map(Into::into).collect()),
            prompts: Mutex::default(),
        }
    }

    pub fn prompts(&self) -> Vec<String> {
        self.prompts.lock().expect("prompt log").clone()
    }

    pub fn calls(&self) -> usize {
        self.prompts.lock().expect("prompt log").len()
    }
}

impl CompletionProvider for ScriptedProvider {
    fn complete(&self, prompt: &str, _: &DecodeParams) -> Result<String, ProviderError> {
        self.prompts.lock().expect("prompt log").push(prompt.to_owned());
        self.queue
            .lock()
            .expect("response queue")
            .pop_front()
            .ok_or_else(|| ProviderError::Unreachable("scripted provider exhausted".to_owned()))
    }
}

/// Forwards to another provider and keeps a transcript of what it answered.
#[derive(Debug)]
pub struct RecordingProvider<P> {
    inner: P,
    log: Mutex<Vec<TranscriptEntry>>,
}

impl<P: CompletionProvider> RecordingProvider<P> {
    pub fn new(inner: P) -> Self {
        Self {
            inner,
            log: Mutex::default(),
        }
    }

    pub fn transcript(&self) -> Vec<TranscriptEntry> {
        self.log.lock().expect("transcript").clone()
    }

    pub fn into_inner(self) -> P {
        self.inner
    }
}

impl<P: CompletionProvider> CompletionProvider for RecordingProvider<P> {
    fn complete(&self, prompt: &str, params: &DecodeParams) -> Result<String, ProviderError> {
        let response = self.inner.complete(prompt, params)?;
        self.log.lock().expect("transcript").push(TranscriptEntry {
            prompt_sha256: prompt_sha256(prompt),
            response: response.clone(),
        });
        Ok(response)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha_is_stable_hex() {
        assert_eq!(
            prompt_sha256("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn replay_counts_calls_and_misses() {
        let p = ReplayProvider::from_prompts([("hello", "world")]);
        let d = DecodeParams::default();
        assert_eq!(p.complete("hello", &d).unwrap(), "world");
        assert!(matches!(
            p.complete("other", &d),
            Err(ProviderError::MissingTranscript(_))
        ));
        assert_eq!(p.calls(), 2);
        p.reset_calls();
        assert_eq!(p.calls(), 0);
    }

    #[test]
    fn transcript_round_trip() {
        let rec = RecordingProvider::new(ScriptedProvider::new(["a", "b"]));
        let d = DecodeParams::default();
        rec.complete("p1", &d).unwrap();
        rec.complete("p2", &d).unwrap();
        let json = serde_json::to_string(&rec.transcript()).unwrap();
        let replay = ReplayProvider::from_json(&json).unwrap();
        assert_eq!(replay.complete("p2", &d).unwrap(), "b");
        assert!(ReplayProvider::from_json("{").is_err());
    }

    #[test]
    fn scripted_runs_dry() {
        let p = ScriptedProvider::new(["x"]);
        let d = DecodeParams::default();
        assert_eq!(p.complete("q", &d).unwrap(), "x");
        assert!(matches!(p.complete("q", &d), Err(ProviderError::Unreachable(_))));
        assert_eq!(p.prompts(), ["q", "q"]);
    }
}
