//! Unigram-alignment METEOR with exact, stem and synonym stages.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::preprocess::{stem, LemmaRules};
use crate::scalar::Scalar;

/// Symmetric word -> synonyms table.
#[derive(Debug, Clone, Default)]
pub struct SynonymTable(BTreeMap<String, BTreeSet<String>>);

impl SynonymTable {
    /// Lines of `word<TAB>syn1,syn2,...`; `#` starts a comment line.
    pub fn from_tsv(text: &str) -> Result<Self, String> {
        let mut table = Self::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (word, syns) = line
                .split_once('\t')
                .ok_or_else(|| format!("line {}: expected word<TAB>synonyms", n + 1))?;
            for syn in syns.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                table.add(word.trim(), syn);
            }
        }
        Ok(table)
    }

    pub fn add(&mut self, a: &str, b: &str) {
        let (a, b) = (a.to_lowercase(), b.to_lowercase());
        self.0.entry(a.clone()).or_default().insert(b.clone());
        self.0.entry(b).or_default().insert(a);
    }

    pub fn are_synonyms(&self, a: &str, b: &str) -> bool {
        self.0.get(a).is_some_and(|s| s.contains(b))
    }
}

/// Stemming rules and synonym table used by the matcher.
#[derive(Debug, Clone, Default)]
pub struct MatchResources {
    pub lemma_rules: LemmaRules,
    pub synonyms: SynonymTable,
}

impl MatchResources {
    pub fn builtin() -> Self {
        let r = crate::resources::Resources::builtin();
        Self {
            lemma_rules: r.lemma_rules,
            synonyms: r.synonyms,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchKind {
    Exact,
    Stem,
    Synonym,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Alignment {
    pub candidate: usize,
    pub reference: usize,
    pub kind: MatchKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeteorScore<S> {
    pub score: S,
    pub precision: S,
    pub recall: S,
    pub fmean: S,
    pub penalty: S,
    pub matches: usize,
    pub chunks: usize,
    pub alignment: Vec<Alignment>,
}

/// Lowercased words with surrounding punctuation removed.
pub fn meteor_tokens(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|w| w.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase())
        .filter(|w| !w.is_empty())
        .collect()
}

fn match_kind(c: &str, r: &str, cs: &str, rs: &str, res: &MatchResources) -> Option<MatchKind> {
    if c == r {
        Some(MatchKind::Exact)
    } else if cs == rs {
        Some(MatchKind::Stem)
    } else if res.synonyms.are_synonyms(c, r) || res.synonyms.are_synonyms(cs, rs) {
        Some(MatchKind::Synonym)
    } else {
        None
    }
}

/// Number of runs contiguous in both sentences, for an alignment sorted by
/// candidate position.
pub fn count_chunks(alignment: &[Alignment]) -> usize {
    if alignment.is_empty() {
        return 0;
    }
    1 + alignment
        .windows(2)
        .filter(|w| !(w[1].candidate == w[0].candidate + 1 && w[1].reference == w[0].reference + 1))
        .count()
}

type Objective = (usize, usize, usize);

fn objective(a: &[Alignment]) -> Objective {
    let n = |k| a.iter().filter(|m| m.kind == k).count();
    (n(MatchKind::Exact), n(MatchKind::Stem), n(MatchKind::Synonym))
}

fn better(obj: Objective, chunks: usize, best_obj: Objective, best_chunks: usize) -> bool {
    // prefer more exact, then more stem, then more synonym, then fewer chunks
    obj > best_obj || (obj == best_obj && chunks < best_chunks)
}

struct Search<'a> {
    options: &'a [Vec<(usize, MatchKind)>],
    /// Best kind available to each candidate position, for the bound.
    best_kind: Vec<Option<MatchKind>>,
    used: Vec<bool>,
    current: Vec<Alignment>,
    best: Vec<Alignment>,
    best_obj: Objective,
    best_chunks: usize,
    budget: usize,
}

impl Search<'_> {
    fn bound(&self, from: usize) -> Objective {
        let (mut e, mut s, mut y) = objective(&self.current);
        for k in self.best_kind[from..].iter().flatten() {
            match k {
                MatchKind::Exact => e += 1,
                MatchKind::Stem => s += 1,
                MatchKind::Synonym => y += 1,
            }
        }
        (e, s, y)
    }

    fn run(&mut self, i: usize) {
        if self.budget == 0 {
            return;
        }
        self.budget -= 1;
        let chunks = count_chunks(&self.current);
        if i == self.options.len() {
            if better(objective(&self.current), chunks, self.best_obj, self.best_chunks) {
                self.best = self.current.clone();
                self.best_obj = objective(&self.current);
                self.best_chunks = chunks;
            }
            return;
        }
        // the optimistic count can only tie the best with at least as many chunks
        let bound = self.bound(i);
        if bound < self.best_obj || (bound == self.best_obj && chunks >= self.best_chunks) {
            return;
        }
        for k in 0..self.options[i].len() {
            let (r, kind) = self.options[i][k];
            if self.used[r] {
                continue;
            }
            self.used[r] = true;
            self.current.push(Alignment {
                candidate: i,
                reference: r,
                kind,
            });
            self.run(i + 1);
            self.current.pop();
            self.used[r] = false;
        }
        self.run(i + 1);
    }
}

/// Maximal alignment: most exact matches, then stem, then synonym; among
/// those, fewest chunks.
pub fn align(candidate: &[String], reference: &[String], res: &MatchResources) -> Vec<Alignment> {
    let stems_c: Vec<String> = candidate.iter().map(|w| stem(w, &res.lemma_rules)).collect();
    let stems_r: Vec<String> = reference.iter().map(|w| stem(w, &res.lemma_rules)).collect();
    let options: Vec<Vec<(usize, MatchKind)>> = candidate
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let mut opts: Vec<(usize, MatchKind)> = reference
                .iter()
                .enumerate()
                .filter_map(|(j, r)| match_kind(c, r, &stems_c[i], &stems_r[j], res).map(|k| (j, k)))
                .collect();
            // strongest kinds first, then nearest the diagonal, for a good first leaf
            opts.sort_by_key(|&(j, k)| (k, j.abs_diff(i), j));
            opts
        })
        .collect();

    // greedy seed
    let mut used = vec![false; reference.len()];
    let mut greedy = Vec::new();
    for (i, opts) in options.iter().enumerate() {
        if let Some(&(j, kind)) = opts.iter().find(|(j, _)| !used[*j]) {
            used[j] = true;
            greedy.push(Alignment {
                candidate: i,
                reference: j,
                kind,
            });
        }
    }

    let mut search = Search {
        options: &options,
        best_kind: options.iter().map(|o| o.iter().map(|&(_, k)| k).min()).collect(),
        used: vec![false; reference.len()],
        current: Vec::new(),
        best_obj: objective(&greedy),
        best_chunks: count_chunks(&greedy),
        best: greedy,
        budget: 200_000,
    };
    search.run(0);
    search.best
}

pub fn meteor<S: Scalar>(candidate: &str, reference: &str, res: &MatchResources) -> MeteorScore<S> {
    let cand = meteor_tokens(candidate);
    let refs = meteor_tokens(reference);
    let alignment = align(&cand, &refs, res);
    let m = alignment.len();
    let chunks = count_chunks(&alignment);
    if m == 0 {
        return MeteorScore {
            score: S::zero(),
            precision: S::zero(),
            recall: S::zero(),
            fmean: S::zero(),
            penalty: S::zero(),
            matches: 0,
            chunks: 0,
            alignment,
        };
    }
    let precision = S::ratio(m, cand.len());
    let recall = S::ratio(m, refs.len());
    let nine = S::from_count(9);
    let fmean = S::from_count(10) * precision * recall / (recall + nine * precision);
    let penalty = if chunks == 1 && m == cand.len() {
        S::zero()
    } else {
        let frag = S::ratio(chunks, m);
        S::ratio(1, 2) * frag * frag * frag
    };
    MeteorScore {
        score: fmean * (S::one() - penalty),
        precision,
        recall,
        fmean,
        penalty,
        matches: m,
        chunks,
        alignment,
    }
}
