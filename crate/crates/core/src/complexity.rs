//! Word-level complexity scoring and the picturable / binding split.
//!
//! Nouns are ideographed by default; verbs only when they are not linking
//! verbs and their complexity score reaches the threshold. Everything else is
//! binding text.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::preprocess::{CoarsePos, TaggedToken};

/// Easy-word list (one word per line).
#[derive(Debug, Clone, Default)]
pub struct FamiliarWords(BTreeSet<String>);

impl FamiliarWords {
    pub fn from_lines(text: &str) -> Self {
        Self(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_lowercase)
                .collect(),
        )
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }
}

impl<S: Into<String>> FromIterator<S> for FamiliarWords {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Self(iter.into_iter().map(Into::into).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComplexityWeights {
    pub syllables: f64,
    pub chars: f64,
    pub unfamiliar: f64,
    /// Syllable count at which the syllable term saturates.
    pub max_syllables: usize,
    /// Character count at which the length term saturates.
    pub max_chars: usize,
}

impl Default for ComplexityWeights {
    fn default() -> Self {
        Self {
            syllables: 0.4,
            chars: 0.2,
            unfamiliar: 0.4,
            max_syllables: 4,
            max_chars: 12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexityFeatures {
    pub syllables: usize,
    pub chars: usize,
    pub familiar: bool,
    pub score: f64,
}

/// Vowel-group count with a silent final `e` (but "-le" after a consonant is
/// voiced). Never less than one for a non-empty word.
pub fn count_syllables(word: &str) -> usize {
    let w: Vec<char> = word.to_lowercase().chars().filter(|c| c.is_alphabetic()).collect();
    if w.is_empty() {
        return 0;
    }
    let is_vowel = |c: char| matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y');
    let mut groups = 0;
    let mut prev = false;
    for (i, &c) in w.iter().enumerate() {
        // leading y is a consonant ("yes")
        let v = is_vowel(c) && !(c == 'y' && i == 0);
        if v && !prev {
            groups += 1;
        }
        prev = v;
    }
    let n = w.len();
    if n > 2 && w[n - 1] == 'e' && !is_vowel(w[n - 2]) {
        let voiced_le = w[n - 2] == 'l' && n > 3 && !is_vowel(w[n - 3]);
        if !voiced_le && groups > 1 {
            groups -= 1;
        }
    }
    groups.max(1)
}

fn saturate(value: usize, max: usize) -> f64 {
    if max <= 1 {
        return if value > 1 { 1.0 } else { 0.0 };
    }
    (value.clamp(1, max) - 1) as f64 / (max - 1) as f64
}

pub fn word_complexity(lemma: &str, familiar: &FamiliarWords, weights: &ComplexityWeights) -> ComplexityFeatures {
    let syllables = count_syllables(lemma);
    let chars = lemma.chars().count();
    let is_familiar = familiar.contains(lemma);
    let raw = weights.syllables * saturate(syllables, weights.max_syllables)
        + weights.chars * saturate(chars, weights.max_chars)
        + weights.unfamiliar * if is_familiar { 0.0 } else { 1.0 };
    ComplexityFeatures {
        syllables,
        chars,
        familiar: is_familiar,
        score: raw.clamp(0.0, 1.0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NounGate {
    /// Every noun that is not a pronoun is picturable.
    #[default]
    All,
    /// Nouns go through the same score gate as verbs.
    Complexity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PartitionConfig {
    pub max_words: usize,
    pub strict: bool,
    pub verb_threshold: f64,
    pub noun_threshold: f64,
    pub noun_gate: NounGate,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        Self {
            max_words: 20,
            strict: true,
            verb_threshold: 0.5,
            noun_threshold: 0.5,
            noun_gate: NounGate::All,
        }
    }
}

/// Familiar-word list and weights, the inputs of the score gate.
#[derive(Debug, Clone, Default)]
pub struct ComplexityModel {
    pub familiar: FamiliarWords,
    pub weights: ComplexityWeights,
}

impl ComplexityModel {
    pub fn score(&self, lemma: &str) -> ComplexityFeatures {
        word_complexity(lemma, &self.familiar, &self.weights)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartitionError {
    #[error("message has {words} words; the limit is {max}")]
    MessageTooLong { words: usize, max: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionResult {
    /// Cleaned text the token spans refer to.
    pub text: String,
    pub tokens: Vec<TaggedToken>,
    /// Token indices of picturable words, in source order.
    pub picturable: Vec<usize>,
    /// Token indices of binding tokens, in source order.
    pub binding: Vec<usize>,
}

impl PartitionResult {
    pub fn picturable_tokens(&self) -> impl Iterator<Item = (&TaggedToken, &str)> {
        self.picturable
            .iter()
            .map(|&i| (&self.tokens[i], self.tokens[i].lemma.as_str()))
    }

    pub fn binding_tokens(&self) -> impl Iterator<Item = &TaggedToken> {
        self.binding.iter().map(|&i| &self.tokens[i])
    }

    pub fn is_picturable(&self, index: usize) -> bool {
        self.picturable.binary_search(&index).is_ok()
    }

    /// Picturable indices followed by binding indices; a permutation of the
    /// token indices.
    pub fn order_map(&self) -> Vec<usize> {
        self.picturable.iter().chain(&self.binding).copied().collect()
    }

    /// Moves a picturable token back to binding text.
    pub fn demote(&mut self, index: usize) {
        if let Ok(pos) = self.picturable.binary_search(&index) {
            self.picturable.remove(pos);
            let at = self.binding.binary_search(&index).unwrap_or_else(|e| e);
            self.binding.insert(at, index);
        }
    }
}

pub fn partition(
    text: &str,
    tokens: Vec<TaggedToken>,
    model: &ComplexityModel,
    cfg: &PartitionConfig,
) -> Result<PartitionResult, PartitionError> {
    let words = tokens.iter().filter(|t| t.is_word()).count();
    if cfg.strict && words > cfg.max_words {
        return Err(PartitionError::MessageTooLong {
            words,
            max: cfg.max_words,
        });
    }
    let mut picturable = Vec::new();
    let mut binding = Vec::new();
    for (i, t) in tokens.iter().enumerate() {
        let pictured = t.is_word()
            && !t.is_pronoun()
            && !t.is_linking_verb
            && !t.lemma.is_empty()
            && match t.coarse_pos {
                CoarsePos::Noun => match cfg.noun_gate {
                    NounGate::All => true,
                    NounGate::Complexity => model.score(&t.lemma).score >= cfg.noun_threshold,
                },
                CoarsePos::Verb => model.score(&t.lemma).score >= cfg.verb_threshold,
                CoarsePos::Other => false,
            };
        if pictured {
            picturable.push(i);
        } else {
            binding.push(i);
        }
    }
    Ok(PartitionResult {
        text: text.to_owned(),
        tokens,
        picturable,
        binding,
    })
}
