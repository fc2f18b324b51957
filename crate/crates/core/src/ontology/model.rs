use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartOfSpeech {
    Noun,
    Verb,
}

impl fmt::Display for PartOfSpeech {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PartOfSpeech::Noun => "noun",
            PartOfSpeech::Verb => "verb",
        })
    }
}

/// Top-level category (humans, things, location, ...).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemanticClass {
    pub id: String,
    pub display_name: String,
    pub pos_domain: PartOfSpeech,
    pub icon: String,
}

/// Finer pattern inside a class whose members share one set of variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemanticTemplate {
    pub id: String,
    pub parent_class: String,
    pub icon: String,
    pub variable_slots: Vec<String>,
}

/// Key of an explication tuple. Never displayed, so it has no icon.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemanticVariable {
    pub id: String,
    pub display_name: String,
}

/// Value of an explication tuple.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemanticMolecule {
    pub id: String,
    pub display_name: String,
    pub icon: String,
}

/// The molecules a variable may take inside one template.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntailmentConstraint {
    pub template: String,
    pub variable: String,
    pub allowed_molecules: BTreeSet<String>,
}

/// One (variable, molecule value) pair. The value is an ordered list: kinship
/// paths such as parent-of-parent are multi-molecule values.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicationTuple {
    pub sv: String,
    pub sm: Vec<String>,
}

impl ExplicationTuple {
    pub fn new(sv: impl Into<String>, sm: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Self {
            sv: sv.into(),
            sm: sm.into_iter().map(Into::into).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Seed,
    LlmAdmitted,
}

/// A lemma's full decomposition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConceptEntry {
    pub lemma: String,
    pub pos: PartOfSpeech,
    pub sc: String,
    pub st: String,
    pub explication: Vec<ExplicationTuple>,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub admitted_at: Option<String>,
}

impl ConceptEntry {
    pub fn key(&self) -> (String, PartOfSpeech) {
        (self.lemma.clone(), self.pos)
    }
}

/// Counts for one part-of-speech domain.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainStats {
    pub classes: usize,
    pub templates: usize,
    /// (variable, molecule) pairs permitted by the entailment constraints.
    pub tuples: usize,
    pub concepts: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OntologyStats {
    pub nouns: DomainStats,
    pub verbs: DomainStats,
    /// Distinct icon ids referenced by classes, templates and molecules.
    pub ideographs: usize,
}
