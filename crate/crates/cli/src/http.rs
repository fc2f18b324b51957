//! Blocking JSON-over-HTTP clients for the completion, translation and
//! embedding providers.

use std::time::Duration;

use nim_core::binding_translate::TranslationProvider;
use nim_core::llm_fallback::{CompletionProvider, DecodeParams};
use nim_core::metrics::EmbeddingProvider;
use nim_core::ProviderError;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::EndpointConfig;

#[derive(Debug, Clone)]
struct Client {
    agent: ureq::Agent,
    endpoint: String,
    token: Option<String>,
}

impl Client {
    fn new(cfg: &EndpointConfig, token: Option<String>) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(cfg.timeout_secs)))
            .build()
            .into();
        Self {
            agent,
            endpoint: cfg.endpoint.clone(),
            token,
        }
    }

    fn post<B: Serialize, R: DeserializeOwned>(&self, body: &B) -> Result<R, ProviderError> {
        let mut req = self.agent.post(&self.endpoint);
        if let Some(t) = &self.token {
            req = req.header("Authorization", &format!("Bearer {t}"));
        }
        let mut resp = req.send_json(body).map_err(|e| match e {
            ureq::Error::StatusCode(code) => {
                ProviderError::Unreachable(format!("{} returned HTTP {code}", self.endpoint))
            }
            other => ProviderError::Unreachable(format!("{}: {other}", self.endpoint)),
        })?;
        resp.body_mut()
            .read_json::<R>()
            .map_err(|e| ProviderError::BadPayload(format!("{}: {e}", self.endpoint)))
    }
}

#[derive(Serialize)]
struct CompletionRequest<'a> {
    prompt: &'a str,
    max_tokens: u32,
    temperature: f32,
    #[serde(skip_serializing_if = "Option::is_none")]
    model: Option<&'a str>,
}

#[derive(Deserialize)]
struct CompletionResponse {
    text: String,
}

/// `POST {prompt, max_tokens, temperature[, model]}` -> `{text}`.
#[derive(Debug, Clone)]
pub struct HttpCompletion {
    client: Client,
    model: Option<String>,
}

impl HttpCompletion {
    pub fn new(cfg: &EndpointConfig, token: Option<String>) -> Self {
        Self {
            client: Client::new(cfg, token),
            model: cfg.model.clone(),
        }
    }
}

impl CompletionProvider for HttpCompletion {
    fn complete(&self, prompt: &str, params: &DecodeParams) -> Result<String, ProviderError> {
        let resp: CompletionResponse = self.client.post(&CompletionRequest {
            prompt,
            max_tokens: params.max_tokens,
            temperature: params.temperature,
            model: self.model.as_deref(),
        })?;
        Ok(resp.text)
    }
}

#[derive(Serialize)]
struct TranslateRequest<'a> {
    q: &'a str,
    source: &'a str,
    target: &'a str,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct TranslateResponse {
    translated_text: String,
}

/// `POST {q, source, target}` -> `{translatedText}`.
#[derive(Debug, Clone)]
pub struct HttpTranslator(Client);

impl HttpTranslator {
    pub fn new(cfg: &EndpointConfig, token: Option<String>) -> Self {
        Self(Client::new(cfg, token))
    }
}

impl TranslationProvider for HttpTranslator {
    fn translate(&self, text: &str, source: &str, target: &str) -> Result<String, ProviderError> {
        let resp: TranslateResponse = self.0.post(&TranslateRequest {
            q: text,
            source,
            target,
        })?;
        Ok(resp.translated_text)
    }
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: &'a [&'a str],
}

#[derive(Deserialize)]
struct EmbedResponse {
    vectors: Vec<Vec<f64>>,
}

/// `POST {texts}` -> `{vectors}`.
#[derive(Debug, Clone)]
pub struct HttpEmbeddings(Client);

impl HttpEmbeddings {
    pub fn new(cfg: &EndpointConfig, token: Option<String>) -> Self {
        Self(Client::new(cfg, token))
    }
}

impl EmbeddingProvider for HttpEmbeddings {
    fn embed(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, ProviderError> {
        let resp: EmbedResponse = self.0.post(&EmbedRequest { texts })?;
        if resp.vectors.len() != texts.len() {
            return Err(ProviderError::BadPayload(format!(
                "asked for {} vectors, got {}",
                texts.len(),
                resp.vectors.len()
            )));
        }
        Ok(resp.vectors)
    }
}

/// Stands in when no translation provider is configured; every call fails.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoTranslator;

impl TranslationProvider for NoTranslator {
    fn translate(&self, _: &str, source: &str, target: &str) -> Result<String, ProviderError> {
        Err(ProviderError::Unreachable(format!(
            "no translation provider configured for {source} -> {target}"
        )))
    }
}
