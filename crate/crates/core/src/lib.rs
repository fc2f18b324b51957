//! Compiler pipeline that turns short text messages into ideographic
//! metalanguage messages.
//!
//! Picturable words (nouns and complex verbs) are decomposed through a
//! semantic ontology into a class / template / (variable, molecule) hierarchy
//! and rendered as ideographs; the rest of the sentence stays as binding text,
//! optionally translated into the reader's language.
//!
//! The crate is organised as a pipeline:
//!
//! ```text
//! raw text -> preprocess -> complexity::partition -> decompose (ontology, llm_fallback)
//!          -> binding_translate -> NimMessage -> serialize
//! ```
//!
//! The [`metrics`] module holds the evaluation harness (METEOR,
//! comprehensibility, learning-curve rate, MIA indices). Its math is generic
//! over [`Scalar`]; the aliases below pick the two representations used in
//! practice.

pub mod binding_translate;
pub mod clock;
pub mod complexity;
pub mod config;
pub mod decompose;
pub mod llm_fallback;
pub mod metrics;
pub mod ontology;
pub mod preprocess;
pub mod provider;
pub mod resources;
pub mod scalar;
pub mod serialize;

pub use clock::{Clock, FixedClock, SystemClock};
pub use config::PipelineConfig;
pub use decompose::{compile_message, CompileError, Compiled, Compiler, NimMessage, Providers, Segment};
pub use ontology::{Ontology, OntologyError, OntologyStore, PartOfSpeech};
pub use provider::ProviderError;
pub use resources::Resources;
pub use scalar::Scalar;

/// Exact rational scalar, used where rates must sum to one without rounding.
pub type Exact = num_rational::Rational64;

pub type MiaScores64 = metrics::MiaScores<f64>;
pub type ExactMiaScores = metrics::MiaScores<Exact>;
pub type ColumnStats64 = metrics::ColumnStats<f64>;
