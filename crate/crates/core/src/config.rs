//! Pipeline configuration. Parsing from a file is left to the caller; every
//! field has a default.

use serde::{Deserialize, Serialize};

use crate::complexity::{ComplexityWeights, PartitionConfig};
use crate::llm_fallback::FallbackConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// BCP-47 code of incoming messages.
    pub source_lang: String,
    /// BCP-47 code of the binding text shown to the reader.
    pub binding_lang: String,
    pub partition: PartitionConfig,
    pub weights: ComplexityWeights,
    pub fallback: FallbackConfig,
    /// Insert concepts resolved by the fallback into the returned ontology.
    pub admit_oov: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            source_lang: "en".to_owned(),
            binding_lang: "en".to_owned(),
            partition: PartitionConfig::default(),
            weights: ComplexityWeights::default(),
            fallback: FallbackConfig::default(),
            admit_oov: true,
        }
    }
}
