//! Semantic similarity as the cosine of externally computed embeddings.

use std::collections::HashMap;

use num_traits::Float;

use super::MetricError;
use crate::provider::ProviderError;

pub trait EmbeddingProvider: Send + Sync {
    fn embed(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, ProviderError>;
}

/// Stored vectors keyed by exact text.
#[derive(Debug, Clone, Default)]
pub struct VectorReplay(HashMap<String, Vec<f64>>);

impl VectorReplay {
    pub fn new(entries: impl IntoIterator<Item = (String, Vec<f64>)>) -> Self {
        Self(entries.into_iter().collect())
    }

    /// A JSON object of text -> vector.
    pub fn from_json(json: &str) -> Result<Self, ProviderError> {
        serde_json::from_str(json)
            .map(Self)
            .map_err(|e| ProviderError::BadPayload(format!("vector table: {e}")))
    }
}

impl EmbeddingProvider for VectorReplay {
    fn embed(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, ProviderError> {
        texts
            .iter()
            .map(|t| {
                self.0
                    .get(*t)
                    .cloned()
                    .ok_or_else(|| ProviderError::MissingEntry(t.to_string()))
            })
            .collect()
    }
}

pub fn cosine<T: Float>(a: &[T], b: &[T]) -> Option<T> {
    if a.len() != b.len() {
        return None;
    }
    let dot = a.iter().zip(b).fold(T::zero(), |s, (&x, &y)| s + x * y);
    let na = a.iter().fold(T::zero(), |s, &x| s + x * x).sqrt();
    let nb = b.iter().fold(T::zero(), |s, &x| s + x * x).sqrt();
    if na.is_zero() || nb.is_zero() {
        return None;
    }
    Some((dot / (na * nb)).max(-T::one()).min(T::one()))
}

pub fn sts_score<T: Float>(
    candidate: &str,
    reference: &str,
    provider: &dyn EmbeddingProvider,
) -> Result<T, MetricError> {
    let vectors = provider.embed(&[candidate, reference])?;
    let [a, b] = vectors.as_slice() else {
        return Err(ProviderError::BadPayload(format!("expected 2 vectors, got {}", vectors.len())).into());
    };
    if a.len() != b.len() {
        return Err(MetricError::DimensionMismatch(a.len(), b.len()));
    }
    let conv = |v: &[f64]| v.iter().map(|&x| T::from(x).unwrap_or_else(T::nan)).collect::<Vec<T>>();
    let (a_t, b_t) = (conv(a), conv(b));
    cosine(&a_t, &b_t).ok_or_else(|| {
        let zero = if a.iter().all(|x| *x == 0.0) {
            candidate
        } else {
            reference
        };
        MetricError::ZeroVector(zero.to_owned())
    })
}
