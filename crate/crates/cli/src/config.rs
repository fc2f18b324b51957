//! TOML configuration file. Provider tokens come from the environment only.

use std::path::{Path, PathBuf};

use nim_core::resources::ResourcePaths;
use nim_core::PipelineConfig;
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config {path}: {message}")]
    Parse { path: PathBuf, message: String },
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppConfig {
    /// Ontology file; the bundled seed ontology when absent.
    pub ontology: Option<PathBuf>,
    pub pipeline: PipelineConfig,
    pub resources: ResourcePaths,
    pub llm: Option<EndpointConfig>,
    pub translator: Option<EndpointConfig>,
    pub embeddings: Option<EndpointConfig>,
    pub service: ServiceConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointConfig {
    pub endpoint: String,
    #[serde(default)]
    pub model: Option<String>,
    /// Environment variable holding the bearer token.
    #[serde(default)]
    pub token_env: Option<String>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
}

fn default_timeout() -> u64 {
    30
}

impl EndpointConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            model: None,
            token_env: None,
            timeout_secs: default_timeout(),
        }
    }

    /// Token from `token_env`, or from `default_env` when that is unset.
    pub fn token(&self, default_env: &str) -> Option<String> {
        std::env::var(self.token_env.as_deref().unwrap_or(default_env))
            .ok()
            .filter(|t| !t.is_empty())
    }
}

pub const LLM_TOKEN_ENV: &str = "NIM_LLM_TOKEN";
pub const TRANSLATOR_TOKEN_ENV: &str = "NIM_TRANSLATOR_TOKEN";
pub const EMBEDDINGS_TOKEN_ENV: &str = "NIM_EMBEDDINGS_TOKEN";

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub addr: String,
    /// Concurrent compiles (and so provider calls) allowed at once.
    pub max_in_flight: usize,
    /// Never admit new concepts, regardless of `pipeline.admit_oov`.
    pub read_only: bool,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            addr: "127.0.0.1:8080".to_owned(),
            max_in_flight: 8,
            read_only: false,
        }
    }
}

impl AppConfig {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let mut cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: path.to_owned(),
            message: e.to_string(),
        })?;
        if let Some(dir) = path.parent() {
            cfg.resolve_paths(dir);
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_toml(&text, path)
    }

    /// Makes relative file paths relative to the config file's directory.
    fn resolve_paths(&mut self, dir: &Path) {
        let join = |p: &mut String| {
            if Path::new(p).is_relative() {
                *p = dir.join(&*p).to_string_lossy().into_owned();
            }
        };
        if let Some(o) = &mut self.ontology {
            if o.is_relative() {
                *o = dir.join(&*o);
            }
        }
        let r = &mut self.resources;
        for p in [
            &mut r.lexicon,
            &mut r.lemma_exceptions,
            &mut r.linking_verbs,
            &mut r.familiar_words,
            &mut r.synonyms,
        ]
        .into_iter()
        .flatten()
        {
            join(p);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_file() {
        let text = r#"
            ontology = "onto.json"

            [pipeline]
            binding_lang = "mr"
            admit_oov = false
            [pipeline.partition]
            verb_threshold = 0.6
            noun_gate = "complexity"
            [pipeline.fallback]
            k_examples = 3

            [resources]
            lexicon = "/abs/lexicon.tsv"
            synonyms = "syn.tsv"

            [llm]
            endpoint = "http://localhost:9000/complete"
            model = "m"
            token_env = "MY_TOKEN"

            [service]
            max_in_flight = 2
        "#;
        let cfg = AppConfig::from_toml(text, Path::new("/etc/nim/nim.toml")).unwrap();
        assert_eq!(cfg.ontology.unwrap(), Path::new("/etc/nim/onto.json"));
        assert_eq!(cfg.pipeline.binding_lang, "mr");
        assert_eq!(cfg.pipeline.source_lang, "en");
        assert!(!cfg.pipeline.admit_oov);
        assert_eq!(cfg.pipeline.partition.verb_threshold, 0.6);
        assert_eq!(cfg.pipeline.partition.max_words, 20);
        assert_eq!(cfg.pipeline.fallback.k_examples, 3);
        assert_eq!(cfg.pipeline.fallback.retries, 2);
        assert_eq!(cfg.resources.lexicon.as_deref(), Some("/abs/lexicon.tsv"));
        assert_eq!(cfg.resources.synonyms.as_deref(), Some("/etc/nim/syn.tsv"));
        assert_eq!(cfg.llm.unwrap().timeout_secs, 30);
        assert_eq!(cfg.service.max_in_flight, 2);
        assert_eq!(cfg.service.addr, "127.0.0.1:8080");
    }

    #[test]
    fn empty_and_bad() {
        let cfg = AppConfig::from_toml("", Path::new("x.toml")).unwrap();
        assert_eq!(cfg.pipeline, PipelineConfig::default());
        assert!(AppConfig::from_toml("[pipeline]\nbogus = 1", Path::new("x.toml")).is_err());
    }

    #[test]
    fn token_from_env() {
        let mut e = EndpointConfig::new("http://x");
        e.token_env = Some("NIM_TEST_TOKEN_FROM_ENV".into());
        assert_eq!(e.token(LLM_TOKEN_ENV), None);
        std::env::set_var("NIM_TEST_TOKEN_FROM_ENV", "secret");
        assert_eq!(e.token(LLM_TOKEN_ENV).as_deref(), Some("secret"));
    }
}
