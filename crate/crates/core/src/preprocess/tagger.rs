use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{Token, TokenKind};
use crate::ontology::PartOfSpeech;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoarsePos {
    Noun,
    Verb,
    Other,
}

impl CoarsePos {
    pub fn from_tag(tag: &str) -> Self {
        if tag.starts_with("NN") {
            CoarsePos::Noun
        } else if tag.starts_with("VB") {
            CoarsePos::Verb
        } else {
            CoarsePos::Other
        }
    }

    pub fn part_of_speech(self) -> Option<PartOfSpeech> {
        match self {
            CoarsePos::Noun => Some(PartOfSpeech::Noun),
            CoarsePos::Verb => Some(PartOfSpeech::Verb),
            CoarsePos::Other => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedToken {
    pub token: Token,
    /// Penn Treebank tag.
    pub pos_tag: String,
    pub coarse_pos: CoarsePos,
    pub lemma: String,
    pub is_linking_verb: bool,
}

impl TaggedToken {
    pub fn is_pronoun(&self) -> bool {
        matches!(self.pos_tag.as_str(), "PRP" | "PRP$" | "WP" | "WP$")
    }

    pub fn is_word(&self) -> bool {
        self.token.kind == TokenKind::Word
    }
}

/// Word -> tag table plus the linking/auxiliary verb list.
#[derive(Debug, Clone, Default)]
pub struct TagLexicon {
    tags: HashMap<String, String>,
    linking: BTreeSet<String>,
}

impl TagLexicon {
    /// Parses `word<TAB>TAG` lines. Blank lines and `#` comments are skipped.
    pub fn from_tsv(text: &str) -> Result<Self, String> {
        let mut tags = HashMap::new();
        for (n, line) in data_lines(text) {
            let Some((word, tag)) = line.split_once('\t') else {
                return Err(format!("line {n}: expected word<TAB>TAG"));
            };
            tags.insert(word.trim().to_lowercase(), tag.trim().to_owned());
        }
        Ok(Self {
            tags,
            linking: BTreeSet::new(),
        })
    }

    /// One word per line.
    pub fn with_linking_verbs(mut self, text: &str) -> Self {
        self.linking = data_lines(text).map(|(_, w)| w.to_lowercase()).collect();
        self
    }

    pub fn tag_of(&self, word: &str) -> Option<&str> {
        self.tags.get(word).map(String::as_str)
    }

    pub fn is_linking(&self, word: &str) -> bool {
        self.linking.contains(word)
    }

    pub fn linking_verbs(&self) -> impl Iterator<Item = &str> {
        self.linking.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }
}

pub(crate) fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
}

// Ordered: first match wins.
const SUFFIX_RULES: &[(&str, &str)] = &[
    ("ing", "VBG"),
    ("ed", "VBD"),
    ("ly", "RB"),
    ("tion", "NN"),
    ("sion", "NN"),
    ("ment", "NN"),
    ("ness", "NN"),
    ("ity", "NN"),
    ("ous", "JJ"),
    ("ful", "JJ"),
    ("ive", "JJ"),
    ("able", "JJ"),
    ("ible", "JJ"),
    ("less", "JJ"),
];

fn guess_tag(word: &str) -> &'static str {
    for (suffix, tag) in SUFFIX_RULES {
        if word.len() > suffix.len() + 2 && word.ends_with(suffix) {
            return tag;
        }
    }
    if word.len() > 3 && word.ends_with('s') && !word.ends_with("ss") && !word.ends_with("us") && !word.ends_with("is")
    {
        return "NNS";
    }
    "NN"
}

fn punctuation_tag(p: &str) -> &'static str {
    match p {
        "." | "?" | "!" => ".",
        "," => ",",
        _ => ":",
    }
}

/// Lexicon lookup, then suffix rules, then NN. Numbers get CD. The lemma is
/// initialised to the normalized form; see [`super::lemmatize`].
pub fn tag_pos(tokens: &[Token], lexicon: &TagLexicon) -> Vec<TaggedToken> {
    tokens
        .iter()
        .map(|t| {
            let pos_tag = match t.kind {
                TokenKind::Word => lexicon
                    .tag_of(&t.normalized)
                    .map(str::to_owned)
                    .unwrap_or_else(|| guess_tag(&t.normalized).to_owned()),
                TokenKind::Number => "CD".to_owned(),
                TokenKind::Punctuation => punctuation_tag(&t.surface).to_owned(),
            };
            TaggedToken {
                coarse_pos: CoarsePos::from_tag(&pos_tag),
                is_linking_verb: t.kind == TokenKind::Word && lexicon.is_linking(&t.normalized),
                lemma: t.normalized.clone(),
                pos_tag,
                token: t.clone(),
            }
        })
        .collect()
}
