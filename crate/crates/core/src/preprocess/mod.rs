//! Cleaning, tokenization, POS tagging and lemmatization of raw messages.
//!
//! Everything here is a pure function of its inputs.

mod lemma;
mod tagger;

use serde::{Deserialize, Serialize};

pub use lemma::{lemmatize, stem, LemmaRules};
pub use tagger::{tag_pos, CoarsePos, TagLexicon, TaggedToken};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenKind {
    Word,
    Number,
    Punctuation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub normalized: String,
    /// Character offsets `[start, end)` into the cleaned text.
    pub span: (usize, usize),
    pub kind: TokenKind,
}

const KEPT_PUNCTUATION: &[char] = &['.', ',', '?', '!', '\'', '-'];

/// Removes control characters and symbols outside letters, digits and
/// `. , ? ! ' -`, collapses whitespace runs to one space and trims.
pub fn clean(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut pending_space = false;
    for c in raw.chars() {
        let keep = c.is_alphanumeric() || KEPT_PUNCTUATION.contains(&c);
        if keep {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.push(c);
        } else {
            pending_space = true;
        }
    }
    out
}

/// Splits cleaned text into words, numbers and single punctuation marks.
/// Digit runs are isolated from adjacent letters ("12b" -> "12", "b").
/// Apostrophes and hyphens stay inside a word when letters follow them.
pub fn tokenize(cleaned: &str) -> Vec<Token> {
    let chars: Vec<char> = cleaned.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let kind = if c.is_whitespace() {
            i += 1;
            continue;
        } else if c.is_numeric() {
            while i < chars.len() && chars[i].is_numeric() {
                i += 1;
            }
            TokenKind::Number
        } else if c.is_alphabetic() {
            while i < chars.len() {
                if chars[i].is_alphabetic() {
                    i += 1;
                } else if matches!(chars[i], '\'' | '-') && chars.get(i + 1).is_some_and(|n| n.is_alphabetic()) {
                    i += 2;
                } else {
                    break;
                }
            }
            TokenKind::Word
        } else {
            i += 1;
            TokenKind::Punctuation
        };
        let surface: String = chars[start..i].iter().collect();
        let normalized = match kind {
            TokenKind::Word => surface.to_lowercase(),
            _ => surface.clone(),
        };
        tokens.push(Token {
            surface,
            normalized,
            span: (start, i),
            kind,
        });
    }
    tokens
}

/// Cleaning, tokenization, tagging and lemmatization bundled together.
#[derive(Debug, Clone)]
pub struct Preprocessor {
    pub lexicon: TagLexicon,
    pub rules: LemmaRules,
}

impl Preprocessor {
    pub fn new(lexicon: TagLexicon, rules: LemmaRules) -> Self {
        Self { lexicon, rules }
    }

    /// Returns the cleaned text and its tagged, lemmatized tokens.
    pub fn run(&self, raw: &str) -> (String, Vec<TaggedToken>) {
        let cleaned = clean(raw);
        let mut tagged = tag_pos(&tokenize(&cleaned), &self.lexicon);
        for t in &mut tagged {
            t.lemma = lemmatize(t, &self.rules);
        }
        (cleaned, tagged)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn surfaces(s: &str) -> Vec<String> {
        tokenize(s).into_iter().map(|t| t.surface).collect()
    }

    /// Rebuilds the cleaned text from spans; gaps are single spaces.
    fn rebuild(tokens: &[Token], len: usize) -> String {
        let mut chars = vec![' '; len];
        for t in tokens {
            for (k, c) in t.surface.chars().enumerate() {
                chars[t.span.0 + k] = c;
            }
        }
        chars.into_iter().collect()
    }

    #[test]
    fn clean_collapses_whitespace_and_keeps_punctuation() {
        assert_eq!(clean("I  am   going!!"), "I am going!!");
        assert_eq!(clean("hello\u{0007}world"), "hello world");
        assert_eq!(clean(""), "");
        assert_eq!(clean("  price: $5 @ shop\t"), "price 5 shop");
        assert_eq!(clean("what?\n ok."), "what? ok.");
    }

    #[test]
    fn clean_strips_marker_brackets() {
        assert_eq!(clean("go to ⟦CW1⟧"), "go to CW1");
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(surfaces("I am going to market"), ["I", "am", "going", "to", "market"]);
        assert!(tokenize("I am going to market")
            .iter()
            .all(|t| t.kind == TokenKind::Word));
        assert_eq!(surfaces("room 12b"), ["room", "12", "b"]);
        let kinds: Vec<_> = tokenize("room 12b").iter().map(|t| t.kind).collect();
        assert_eq!(kinds, [TokenKind::Word, TokenKind::Number, TokenKind::Word]);
        assert!(tokenize("").is_empty());
    }

    #[test]
    fn tokenize_punctuation_and_contractions() {
        assert_eq!(surfaces("don't go!"), ["don't", "go", "!"]);
        assert_eq!(surfaces("e-mail, 'hi'"), ["e-mail", ",", "'", "hi", "'"]);
        assert_eq!(tokenize("Seeds")[0].normalized, "seeds");
    }

    #[test]
    fn spans_use_character_offsets() {
        let t = tokenize("मी बाजारात");
        assert_eq!(t[1].span, (3, 10));
    }

    proptest! {
        #[test]
        fn tokenize_is_lossless(raw in "[a-zA-Z0-9 .,?!'\\-\t\u{7}#]{0,40}") {
            let cleaned = clean(&raw);
            let tokens = tokenize(&cleaned);
            prop_assert_eq!(rebuild(&tokens, cleaned.chars().count()), cleaned.clone());
            for w in tokens.windows(2) {
                prop_assert!(w[0].span.1 <= w[1].span.0);
            }
            for t in &tokens {
                prop_assert!(t.span.0 < t.span.1);
                if t.kind == TokenKind::Word {
                    prop_assert_eq!(t.normalized.clone(), t.surface.to_lowercase());
                }
            }
        }

        #[test]
        fn clean_is_idempotent(raw in "\\PC{0,40}") {
            let once = clean(&raw);
            prop_assert_eq!(clean(&once), once);
        }
    }
}
