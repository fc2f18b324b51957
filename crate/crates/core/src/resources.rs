//! Lexical data files: tag lexicon, lemma exceptions, linking verbs,
//! familiar-word list and synonym table. Bundled copies are compiled in;
//! replacements can be loaded from disk.

use std::path::Path;

use thiserror::Error;

use crate::complexity::FamiliarWords;
use crate::metrics::SynonymTable;
use crate::preprocess::{LemmaRules, Preprocessor, TagLexicon};

pub const LEXICON_TSV: &str = include_str!("../data/lexicon.tsv");
pub const LEMMA_EXCEPTIONS_TSV: &str = include_str!("../data/lemma_exceptions.tsv");
pub const LINKING_VERBS_TXT: &str = include_str!("../data/linking_verbs.txt");
pub const FAMILIAR_WORDS_TXT: &str = include_str!("../data/familiar_words.txt");
pub const SYNONYMS_TSV: &str = include_str!("../data/synonyms.tsv");

#[derive(Debug, Error)]
pub enum ResourceError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: String, message: String },
}

#[derive(Debug, Clone)]
pub struct Resources {
    pub lexicon: TagLexicon,
    pub lemma_rules: LemmaRules,
    pub familiar: FamiliarWords,
    pub synonyms: SynonymTable,
}

/// Optional on-disk replacements for the bundled files.
#[derive(Debug, Clone, Default, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourcePaths {
    pub lexicon: Option<String>,
    pub lemma_exceptions: Option<String>,
    pub linking_verbs: Option<String>,
    pub familiar_words: Option<String>,
    pub synonyms: Option<String>,
}

fn read(path: &Option<String>, bundled: &'static str) -> Result<(String, String), ResourceError> {
    match path {
        None => Ok(("<bundled>".to_owned(), bundled.to_owned())),
        Some(p) => std::fs::read_to_string(Path::new(p))
            .map(|text| (p.clone(), text))
            .map_err(|source| ResourceError::Io {
                path: p.clone(),
                source,
            }),
    }
}

impl Resources {
    pub fn builtin() -> Self {
        Self::load(&ResourcePaths::default()).expect("bundled resources parse")
    }

    pub fn load(paths: &ResourcePaths) -> Result<Self, ResourceError> {
        let (lex_path, lex) = read(&paths.lexicon, LEXICON_TSV)?;
        let (_, linking) = read(&paths.linking_verbs, LINKING_VERBS_TXT)?;
        let (exc_path, exc) = read(&paths.lemma_exceptions, LEMMA_EXCEPTIONS_TSV)?;
        let (_, familiar) = read(&paths.familiar_words, FAMILIAR_WORDS_TXT)?;
        let (syn_path, syn) = read(&paths.synonyms, SYNONYMS_TSV)?;
        let fmt = |path: String| move |message: String| ResourceError::Format { path, message };
        Ok(Self {
            lexicon: TagLexicon::from_tsv(&lex)
                .map_err(fmt(lex_path))?
                .with_linking_verbs(&linking),
            lemma_rules: LemmaRules::from_tsv(&exc).map_err(fmt(exc_path))?,
            familiar: FamiliarWords::from_lines(&familiar),
            synonyms: SynonymTable::from_tsv(&syn).map_err(fmt(syn_path))?,
        })
    }

    pub fn preprocessor(&self) -> Preprocessor {
        Preprocessor::new(self.lexicon.clone(), self.lemma_rules.clone())
    }
}
