use std::collections::HashMap;

use super::tagger::data_lines;
use super::{TaggedToken, TokenKind};

/// Irregular-form exception table consulted before the suffix rules.
#[derive(Debug, Clone, Default)]
pub struct LemmaRules {
    exceptions: HashMap<String, String>,
}

impl LemmaRules {
    /// Parses `surface<TAB>lemma` lines.
    pub fn from_tsv(text: &str) -> Result<Self, String> {
        let mut exceptions = HashMap::new();
        for (n, line) in data_lines(text) {
            let Some((surface, lemma)) = line.split_once('\t') else {
                return Err(format!("line {n}: expected surface<TAB>lemma"));
            };
            exceptions.insert(surface.trim().to_lowercase(), lemma.trim().to_lowercase());
        }
        Ok(Self { exceptions })
    }

    pub fn exception(&self, surface: &str) -> Option<&str> {
        self.exceptions.get(surface).map(String::as_str)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Inflection {
    Plural,
    Past,
    Progressive,
}

fn is_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u')
}

fn has_vowel(s: &str) -> bool {
    s.bytes().any(|c| is_vowel(c) || c == b'y')
}

fn strip_plural(w: &str) -> Option<String> {
    if w.len() > 4 && w.ends_with("ies") {
        return Some(format!("{}y", &w[..w.len() - 3]));
    }
    for suffix in ["sses", "xes", "zes", "ches", "shes", "oes"] {
        if w.len() > suffix.len() + 1 && w.ends_with(suffix) {
            return Some(w[..w.len() - 2].to_owned());
        }
    }
    if w.len() > 3 && w.ends_with('s') && !w.ends_with("ss") && !w.ends_with("us") && !w.ends_with("is") {
        return Some(w[..w.len() - 1].to_owned());
    }
    None
}

/// Undoes consonant doubling or restores a dropped final `e` on a verb stem
/// left after removing `-ed` / `-ing`.
fn repair_stem(stem: &str) -> String {
    let b = stem.as_bytes();
    let n = b.len();
    if n >= 3 && b[n - 1] == b[n - 2] && !is_vowel(b[n - 1]) {
        let doubled = b[n - 1];
        let keep = match doubled {
            b's' | b'z' | b'f' => true,
            b'l' => n < 6,
            _ => false,
        };
        if !keep {
            return stem[..n - 1].to_owned();
        }
        return stem.to_owned();
    }
    let needs_e = (stem.ends_with("at") && !stem.ends_with("eat"))
        || stem.ends_with("iz")
        || stem.ends_with("bl")
        || stem.ends_with('v')
        || (n >= 2 && b[n - 1] == b'c' && !is_vowel(b[n - 2]) || stem.ends_with("nc"))
        || (n >= 2 && b[n - 1] == b'g' && b[n - 2] != b'n' && !is_vowel(b[n - 2]))
        || (n >= 3 && b[n - 1] == b's' && is_vowel(b[n - 2]) && !is_vowel(b[n - 3]))
        || short_cvc(b);
    if needs_e {
        format!("{stem}e")
    } else {
        stem.to_owned()
    }
}

/// Short stems ending consonant-vowel-consonant ("rid", "mak", "writ").
fn short_cvc(b: &[u8]) -> bool {
    let n = b.len();
    if !(3..=4).contains(&n) {
        return false;
    }
    let (c1, v, c2) = (b[n - 3], b[n - 2], b[n - 1]);
    !is_vowel(c1)
        && c1 != b'y'
        && is_vowel(v)
        && !is_vowel(c2)
        && !matches!(c2, b'w' | b'x' | b'y' | b'r' | b'l' | b'n' | b't')
        || (n == 4 && b[0] == b'w' && b[1] == b'r')
        || (n == 3 && c2 == b't' && !is_vowel(c1) && is_vowel(v) && c1 != b'g' && c1 != b's')
}

fn strip_past(w: &str) -> Option<String> {
    if w.len() > 4 && w.ends_with("ied") {
        return Some(format!("{}y", &w[..w.len() - 3]));
    }
    if w.ends_with("eed") || w.len() < 5 || !w.ends_with("ed") {
        return None;
    }
    let stem = &w[..w.len() - 2];
    has_vowel(stem).then(|| repair_stem(stem))
}

fn strip_progressive(w: &str) -> Option<String> {
    if !w.ends_with("ing") || w.len() < 5 {
        return None;
    }
    let stem = &w[..w.len() - 3];
    if !has_vowel(stem) {
        return None;
    }
    if stem.len() == 2 {
        return Some(stem.to_owned());
    }
    Some(repair_stem(stem))
}

fn inflection_of(tag: &str) -> Option<Inflection> {
    match tag {
        "NNS" | "NNPS" | "VBZ" => Some(Inflection::Plural),
        "VBD" | "VBN" => Some(Inflection::Past),
        "VBG" => Some(Inflection::Progressive),
        _ => None,
    }
}

fn step(w: &str, inflection: Option<Inflection>, rules: &LemmaRules) -> Option<String> {
    if let Some(lemma) = rules.exception(w) {
        return (lemma != w).then(|| lemma.to_owned());
    }
    match inflection? {
        Inflection::Plural => strip_plural(w),
        Inflection::Past => strip_past(w),
        Inflection::Progressive => strip_progressive(w),
    }
}

/// Runs `step` to a fixed point. Every rule shortens the word, so this
/// terminates; the iteration cap only guards against cyclic exception tables.
fn fixpoint(word: &str, inflection: Option<Inflection>, rules: &LemmaRules) -> String {
    let mut current = word.to_owned();
    for _ in 0..16 {
        match step(&current, inflection, rules) {
            Some(next) if next != current && !next.is_empty() => current = next,
            _ => break,
        }
    }
    current
}

/// Exception table first, then suffix rules selected by the Penn tag.
/// Non-word tokens return their normalized form unchanged.
pub fn lemmatize(t: &TaggedToken, rules: &LemmaRules) -> String {
    if t.token.kind != TokenKind::Word {
        return t.token.normalized.clone();
    }
    fixpoint(&t.token.normalized, inflection_of(&t.pos_tag), rules)
}

/// Tag-free stemmer for word matching: applies the plural, past and
/// progressive rules in turn.
pub fn stem(word: &str, rules: &LemmaRules) -> String {
    let mut current = word.to_lowercase();
    for _ in 0..16 {
        let mut next = current.clone();
        for inflection in [Inflection::Progressive, Inflection::Past, Inflection::Plural] {
            if let Some(s) = step(&next, Some(inflection), rules) {
                if s.chars().count() >= 2 {
                    next = s;
                }
            }
        }
        if next == current {
            break;
        }
        current = next;
    }
    current
}
