//! Binding-text translation with ideograph alignment.
//!
//! Picturable words are replaced by opaque markers `⟦CWn⟧` before the
//! sentence goes to the translator; the markers come back in target-language
//! order and the translated text is split at them.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complexity::PartitionResult;
use crate::provider::ProviderError;

pub const MARKER_OPEN: &str = "⟦CW";
pub const MARKER_CLOSE: &str = "⟧";

pub fn marker(n: usize) -> String {
    format!("{MARKER_OPEN}{n}{MARKER_CLOSE}")
}

/// Source sentence with picturable words replaced by numbered markers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaceholderedSentence<T> {
    pub text_with_placeholders: String,
    /// Marker number (from 1, source order) to payload.
    pub marker_map: BTreeMap<usize, T>,
}

impl<T> PlaceholderedSentence<T> {
    pub fn map<U>(self, mut f: impl FnMut(T) -> U) -> PlaceholderedSentence<U> {
        PlaceholderedSentence {
            text_with_placeholders: self.text_with_placeholders,
            marker_map: self.marker_map.into_iter().map(|(n, v)| (n, f(v))).collect(),
        }
    }
}

/// Markers carry the token index of each picturable word.
pub fn insert_placeholders(p: &PartitionResult) -> PlaceholderedSentence<usize> {
    let chars: Vec<char> = p.text.chars().collect();
    let mut out = String::new();
    let mut cursor = 0;
    let mut marker_map = BTreeMap::new();
    for (n, &idx) in p.picturable.iter().enumerate() {
        let (start, end) = p.tokens[idx].token.span;
        out.extend(&chars[cursor..start]);
        out.push_str(&marker(n + 1));
        marker_map.insert(n + 1, idx);
        cursor = end;
    }
    out.extend(&chars[cursor..]);
    PlaceholderedSentence {
        text_with_placeholders: out,
        marker_map,
    }
}

pub trait TranslationProvider: Send + Sync {
    fn translate(&self, text: &str, source: &str, target: &str) -> Result<String, ProviderError>;
}

impl<P: TranslationProvider + ?Sized> TranslationProvider for std::sync::Arc<P> {
    fn translate(&self, text: &str, source: &str, target: &str) -> Result<String, ProviderError> {
        (**self).translate(text, source, target)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityTranslator;

impl TranslationProvider for IdentityTranslator {
    fn translate(&self, text: &str, _: &str, _: &str) -> Result<String, ProviderError> {
        Ok(text.to_owned())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranslationEntry {
    pub source: String,
    pub target: String,
    pub text: String,
    pub translated: String,
}

/// Stored translations keyed by (source, target, text). Unknown inputs are
/// an error, not a pass-through.
#[derive(Debug, Clone, Default)]
pub struct TableTranslator {
    table: HashMap<(String, String, String), String>,
}

pub const APPENDIX_TRANSLATIONS_JSON: &str = include_str!("../data/translations/appendix_f.json");

impl TableTranslator {
    pub fn new(entries: impl IntoIterator<Item = TranslationEntry>) -> Self {
        Self {
            table: entries
                .into_iter()
                .map(|e| ((e.source, e.target, e.text), e.translated))
                .collect(),
        }
    }

    pub fn from_json(json: &str) -> Result<Self, ProviderError> {
        let entries: Vec<TranslationEntry> =
            serde_json::from_str(json).map_err(|e| ProviderError::BadPayload(format!("translation table: {e}")))?;
        Ok(Self::new(entries))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ProviderError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| ProviderError::Unreachable(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// The two worked example sentences rendered in Marathi and Nepali.
    pub fn appendix() -> Self {
        Self::from_json(APPENDIX_TRANSLATIONS_JSON).expect("bundled translation table parses")
    }
}

impl TranslationProvider for TableTranslator {
    fn translate(&self, text: &str, source: &str, target: &str) -> Result<String, ProviderError> {
        self.table
            .get(&(source.to_owned(), target.to_owned(), text.to_owned()))
            .cloned()
            .ok_or_else(|| ProviderError::MissingEntry(format!("{source}->{target}: {text}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranslateError {
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error("translation lost markers {missing:?}, duplicated {duplicated:?}, invented {unknown:?}")]
    MarkerLost {
        missing: Vec<usize>,
        duplicated: Vec<usize>,
        unknown: Vec<usize>,
    },
}

/// A run of translated text or a marker's payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Aligned<T> {
    Text(String),
    Item(T),
}

enum Piece<'a> {
    Text(&'a str),
    Marker(usize),
}

fn pieces(text: &str) -> Vec<Piece<'_>> {
    let mut out = Vec::new();
    let mut rest = text;
    let mut pending = 0; // bytes of `rest` already known to be plain text
    while let Some(off) = rest[pending..].find(MARKER_OPEN) {
        let at = pending + off;
        let after = &rest[at + MARKER_OPEN.len()..];
        let digits = after.bytes().take_while(u8::is_ascii_digit).count();
        let parsed = (digits > 0 && after[digits..].starts_with(MARKER_CLOSE))
            .then(|| after[..digits].parse::<usize>().ok())
            .flatten();
        match parsed {
            Some(n) => {
                out.push(Piece::Text(&rest[..at]));
                out.push(Piece::Marker(n));
                rest = &after[digits + MARKER_CLOSE.len()..];
                pending = 0;
            }
            None => pending = at + MARKER_OPEN.len(),
        }
    }
    out.push(Piece::Text(rest));
    out
}

fn check_markers<T>(text: &str, map: &BTreeMap<usize, T>) -> Result<(), TranslateError> {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for p in pieces(text) {
        if let Piece::Marker(n) = p {
            *counts.entry(n).or_default() += 1;
        }
    }
    let missing: Vec<usize> = map.keys().filter(|n| !counts.contains_key(n)).copied().collect();
    let duplicated: Vec<usize> = counts.iter().filter(|&(_, &c)| c > 1).map(|(&n, _)| n).collect();
    let unknown: Vec<usize> = counts.keys().filter(|n| !map.contains_key(n)).copied().collect();
    if missing.is_empty() && duplicated.is_empty() && unknown.is_empty() {
        Ok(())
    } else {
        Err(TranslateError::MarkerLost {
            missing,
            duplicated,
            unknown,
        })
    }
}

pub fn translate<T>(
    s: &PlaceholderedSentence<T>,
    source: &str,
    target: &str,
    tr: &dyn TranslationProvider,
) -> Result<String, TranslateError> {
    let out = tr.translate(&s.text_with_placeholders, source, target)?;
    check_markers(&out, &s.marker_map)?;
    Ok(out)
}

/// Splits translated text at its markers. Text runs are trimmed and empty
/// runs dropped.
pub fn realign<T: Clone>(translated: &str, map: &BTreeMap<usize, T>) -> Result<Vec<Aligned<T>>, TranslateError> {
    check_markers(translated, map)?;
    Ok(pieces(translated)
        .into_iter()
        .filter_map(|p| match p {
            Piece::Text(t) => {
                let t = t.trim();
                (!t.is_empty()).then(|| Aligned::Text(t.to_owned()))
            }
            Piece::Marker(n) => Some(Aligned::Item(map[&n].clone())),
        })
        .collect())
}
