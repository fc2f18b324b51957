//! Message compilation: partition, per-word decomposition (ontology first,
//! completion-provider fallback second), binding translation and segment
//! assembly.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::binding_translate::{
    insert_placeholders, realign, translate, Aligned, IdentityTranslator, TranslateError, TranslationProvider,
};
use crate::clock::Clock;
use crate::complexity::{partition, ComplexityModel, PartitionError};
use crate::config::PipelineConfig;
use crate::llm_fallback::{infer_entailment, CompletionProvider, FallbackConfig, FallbackError};
use crate::ontology::{ConceptEntry, ExplicationTuple, Ontology, OntologyError, PartOfSpeech};
use crate::preprocess::Preprocessor;
use crate::provider::ProviderError;
use crate::resources::Resources;

/// One complex word's decomposition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Elementalization {
    /// Surface form as written in the source.
    pub cw: String,
    pub sc: String,
    pub st: String,
    pub explication: Vec<ExplicationTuple>,
}

impl Elementalization {
    pub fn from_entry(cw: impl Into<String>, c: &ConceptEntry) -> Self {
        Self {
            cw: cw.into(),
            sc: c.sc.clone(),
            st: c.st.clone(),
            explication: c.explication.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IconRef {
    pub id: String,
    pub icon: String,
}

/// Variable plus its molecules. The variable has no icon.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicationView {
    pub sv: String,
    pub sm: Vec<IconRef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdeographSegment {
    pub cw: String,
    /// Index of the word among the source tokens.
    pub source_index: usize,
    pub sc: IconRef,
    pub st: IconRef,
    pub explication: Vec<ExplicationView>,
}

impl IdeographSegment {
    pub fn resolve(e: &Elementalization, source_index: usize, o: &Ontology) -> Self {
        let icon = |id: &str, icon: Option<&String>| IconRef {
            id: id.to_owned(),
            icon: icon.cloned().unwrap_or_default(),
        };
        Self {
            cw: e.cw.clone(),
            source_index,
            sc: icon(&e.sc, o.classes.get(&e.sc).map(|c| &c.icon)),
            st: icon(&e.st, o.templates.get(&e.st).map(|t| &t.icon)),
            explication: e
                .explication
                .iter()
                .map(|t| ExplicationView {
                    sv: t.sv.clone(),
                    sm: t
                        .sm
                        .iter()
                        .map(|m| icon(m, o.molecules.get(m).map(|m| &m.icon)))
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn elementalization(&self) -> Elementalization {
        Elementalization {
            cw: self.cw.clone(),
            sc: self.sc.id.clone(),
            st: self.st.id.clone(),
            explication: self
                .explication
                .iter()
                .map(|v| ExplicationTuple::new(v.sv.clone(), v.sm.iter().map(|m| m.id.clone())))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Segment {
    Text { surface: String },
    Ideograph(IdeographSegment),
}

impl Segment {
    pub fn as_ideograph(&self) -> Option<&IdeographSegment> {
        match self {
            Segment::Ideograph(i) => Some(i),
            Segment::Text { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NimMessage {
    pub source_text: String,
    pub source_lang: String,
    pub binding_lang: String,
    pub segments: Vec<Segment>,
    pub ontology_version: u64,
    pub created_at: Option<String>,
    /// Degradations applied while compiling (words kept as text, untranslated
    /// binding text).
    pub notes: Vec<String>,
}

impl NimMessage {
    pub fn ideographs(&self) -> impl Iterator<Item = &IdeographSegment> {
        self.segments.iter().filter_map(Segment::as_ideograph)
    }
}

/// Drops binding text; ideographs are returned in source order.
pub fn ablation_strip_text(m: &NimMessage) -> NimMessage {
    let mut ideographs: Vec<IdeographSegment> = m.ideographs().cloned().collect();
    ideographs.sort_by_key(|i| i.source_index);
    NimMessage {
        segments: ideographs.into_iter().map(Segment::Ideograph).collect(),
        ..m.clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorClass {
    Input,
    Provider,
    Ontology,
}

#[derive(Debug, Error)]
pub enum DecomposeError {
    #[error("`{lemma}` ({pos}) is not in the ontology and no fallback provider is configured")]
    OovWithoutFallback { lemma: String, pos: PartOfSpeech },
    #[error("fallback for `{lemma}`: {source}")]
    Fallback {
        lemma: String,
        #[source]
        source: FallbackError,
    },
}

/// Ontology hit, else the fallback. An admitted entry is returned for the
/// caller to insert; its `admitted_at` is left empty.
pub fn decompose_word(
    lemma: &str,
    pos: PartOfSpeech,
    o: &Ontology,
    fb: Option<&dyn CompletionProvider>,
    cfg: &FallbackConfig,
) -> Result<(Elementalization, Option<ConceptEntry>), DecomposeError> {
    if let Some(c) = o.lookup(lemma, pos) {
        return Ok((Elementalization::from_entry(lemma, c), None));
    }
    let fb = fb.ok_or_else(|| DecomposeError::OovWithoutFallback {
        lemma: lemma.to_owned(),
        pos,
    })?;
    let inf = infer_entailment(lemma, pos, o, fb, cfg).map_err(|source| DecomposeError::Fallback {
        lemma: lemma.to_owned(),
        source,
    })?;
    Ok((Elementalization::from_entry(lemma, &inf.entry), Some(inf.entry)))
}

#[derive(Debug, Error)]
pub enum CompileError {
    #[error("message is empty after cleaning")]
    Empty,
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error("out-of-vocabulary word `{word}` (lemma `{lemma}`, {pos}) and no fallback provider")]
    OovWithoutFallback {
        word: String,
        lemma: String,
        pos: PartOfSpeech,
    },
    #[error("fallback for `{word}`: {source}")]
    Fallback {
        word: String,
        #[source]
        source: FallbackError,
    },
    #[error("translation: {0}")]
    Translate(#[source] ProviderError),
    #[error(transparent)]
    Ontology(#[from] OntologyError),
}

impl CompileError {
    /// Pipeline stage that failed.
    pub fn stage(&self) -> &'static str {
        match self {
            CompileError::Empty => "preprocess",
            CompileError::Partition(_) => "complexity",
            CompileError::OovWithoutFallback { .. } => "decompose",
            CompileError::Fallback { .. } => "llm_fallback",
            CompileError::Translate(_) => "binding_translate",
            CompileError::Ontology(_) => "ontology",
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            CompileError::Empty | CompileError::Partition(_) => ErrorClass::Input,
            CompileError::OovWithoutFallback { .. } | CompileError::Translate(_) => ErrorClass::Provider,
            CompileError::Fallback {
                source: FallbackError::Provider(_),
                ..
            } => ErrorClass::Provider,
            CompileError::Fallback { .. } | CompileError::Ontology(_) => ErrorClass::Ontology,
        }
    }
}

/// External services used by one compile. Without a fallback provider,
/// out-of-vocabulary words are an error.
#[derive(Clone, Copy)]
pub struct Providers<'a> {
    pub fallback: Option<&'a dyn CompletionProvider>,
    pub translator: &'a dyn TranslationProvider,
    pub clock: Option<&'a dyn Clock>,
}

impl Default for Providers<'_> {
    fn default() -> Self {
        Self {
            fallback: None,
            translator: &IdentityTranslator,
            clock: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Compiled {
    pub message: NimMessage,
    /// The input snapshot itself when nothing was admitted.
    pub ontology: Arc<Ontology>,
    pub admitted: Vec<ConceptEntry>,
}

/// Preprocessor and scoring model built once, reused across messages.
#[derive(Debug, Clone)]
pub struct Compiler {
    pub config: PipelineConfig,
    preprocessor: Preprocessor,
    model: ComplexityModel,
}

impl Compiler {
    pub fn new(config: PipelineConfig, resources: Resources) -> Self {
        let preprocessor = resources.preprocessor();
        Self {
            model: ComplexityModel {
                familiar: resources.familiar,
                weights: config.weights,
            },
            preprocessor,
            config,
        }
    }

    pub fn with_config(config: PipelineConfig) -> Self {
        Self::new(config, Resources::builtin())
    }

    pub fn compile(&self, raw: &str, o: &Arc<Ontology>, providers: Providers<'_>) -> Result<Compiled, CompileError> {
        self.compile_to(raw, &self.config.binding_lang, o, providers)
    }

    /// Compiles with an explicit binding language.
    pub fn compile_to(
        &self,
        raw: &str,
        binding_lang: &str,
        o: &Arc<Ontology>,
        providers: Providers<'_>,
    ) -> Result<Compiled, CompileError> {
        let cfg = &self.config;
        let (text, tokens) = self.preprocessor.run(raw);
        if tokens.is_empty() {
            return Err(CompileError::Empty);
        }
        let mut parts = partition(&text, tokens, &self.model, &cfg.partition)?;

        let mut working = Arc::clone(o);
        let mut admitted = Vec::new();
        let mut notes = Vec::new();
        let mut cache: HashMap<(String, PartOfSpeech), Option<ConceptEntry>> = HashMap::new();
        let mut resolved: HashMap<usize, Elementalization> = HashMap::new();

        for idx in parts.picturable.clone() {
            let t = &parts.tokens[idx];
            let pos = t
                .coarse_pos
                .part_of_speech()
                .expect("picturable words are nouns or verbs");
            let key = (t.lemma.clone(), pos);
            let surface = t.token.surface.clone();
            let entry = match cache.get(&key) {
                Some(hit) => hit.clone(),
                None => {
                    let found = match decompose_word(&key.0, pos, &working, providers.fallback, &cfg.fallback) {
                        Ok((_, None)) => working.lookup(&key.0, pos).cloned(),
                        Ok((_, Some(mut entry))) => {
                            entry.admitted_at = providers.clock.map(|c| c.now());
                            if cfg.admit_oov {
                                working = Arc::new(working.insert_concept(entry.clone())?);
                            }
                            admitted.push(entry.clone());
                            Some(entry)
                        }
                        Err(DecomposeError::OovWithoutFallback { lemma, pos }) => {
                            return Err(CompileError::OovWithoutFallback {
                                word: surface,
                                lemma,
                                pos,
                            })
                        }
                        Err(DecomposeError::Fallback {
                            source: e @ FallbackError::ExhaustedRetries { .. },
                            ..
                        }) => {
                            notes.push(format!("`{surface}` kept as text: {e}"));
                            None
                        }
                        Err(DecomposeError::Fallback { source, .. }) => {
                            return Err(CompileError::Fallback { word: surface, source })
                        }
                    };
                    cache.insert(key, found.clone());
                    found
                }
            };
            match entry {
                Some(c) => {
                    resolved.insert(idx, Elementalization::from_entry(surface, &c));
                }
                None => parts.demote(idx),
            }
        }

        let placeholders =
            insert_placeholders(&parts).map(|idx| IdeographSegment::resolve(&resolved[&idx], idx, &working));
        let translated = if binding_lang == cfg.source_lang {
            placeholders.text_with_placeholders.clone()
        } else {
            match translate(&placeholders, &cfg.source_lang, binding_lang, providers.translator) {
                Ok(t) => t,
                Err(TranslateError::Provider(e)) => return Err(CompileError::Translate(e)),
                Err(e @ TranslateError::MarkerLost { .. }) => {
                    notes.push(format!("binding text left in {} source order: {e}", cfg.source_lang));
                    placeholders.text_with_placeholders.clone()
                }
            }
        };
        let segments = realign(&translated, &placeholders.marker_map)
            .expect("markers checked before realignment")
            .into_iter()
            .map(|a| match a {
                Aligned::Text(surface) => Segment::Text { surface },
                Aligned::Item(i) => Segment::Ideograph(i),
            })
            .collect();

        Ok(Compiled {
            message: NimMessage {
                source_text: raw.to_owned(),
                source_lang: cfg.source_lang.clone(),
                binding_lang: binding_lang.to_owned(),
                segments,
                ontology_version: working.version,
                created_at: providers.clock.map(|c| c.now()),
                notes,
            },
            ontology: working,
            admitted,
        })
    }
}

/// One-shot compile with the bundled lexical resources.
pub fn compile_message(
    raw: &str,
    cfg: &PipelineConfig,
    o: &Arc<Ontology>,
    providers: Providers<'_>,
) -> Result<Compiled, CompileError> {
    Compiler::with_config(cfg.clone()).compile(raw, o, providers)
}
