//! Out-of-vocabulary resolution through a completion provider.
//!
//! Stage one asks for the class and template, stage two for the
//! (variable, molecule) pairs of that template. Every answer is checked
//! against the ontology with the same rules as hand-authored entries; a
//! rejected answer is retried with the violations appended to the prompt.

mod parse;
mod prompt;
mod provider;

pub use parse::{first_json_object, parse_response, Parsed, Stage};
pub use prompt::{build_prompt_sc_st, build_prompt_svsm, sv_sm_json, Prompt};
pub use provider::{
    parse_transcript, prompt_sha256, CompletionProvider, DecodeParams, RecordingProvider, ReplayProvider,
    ScriptedProvider, TranscriptEntry,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ontology::validate_concept;
use crate::ontology::{ConceptEntry, ExplicationTuple, Ontology, PartOfSpeech, Provenance};
use crate::provider::ProviderError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FallbackConfig {
    /// Few-shot examples per prompt.
    pub k_examples: usize,
    /// Extra attempts per stage after a rejected answer.
    pub retries: u32,
    pub decode: DecodeParams,
}

impl Default for FallbackConfig {
    fn default() -> Self {
        Self {
            k_examples: 5,
            retries: 2,
            decode: DecodeParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FallbackError {
    #[error("need {needed} example {pos}s for the prompt, ontology has {available}")]
    InsufficientExamples {
        pos: PartOfSpeech,
        needed: usize,
        available: usize,
    },
    #[error("unknown semantic template `{0}`")]
    UnknownTemplate(String),
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error("stage {stage} rejected after {attempts} attempts: {}", violations.join("; "))]
    ExhaustedRetries {
        stage: Stage,
        attempts: u32,
        violations: Vec<String>,
    },
}

/// Unvalidated provider output, kept with the raw responses for audit.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CandidateEntailment {
    pub lemma: String,
    pub sc: String,
    pub st: String,
    pub tuples: Vec<(String, Vec<String>)>,
    pub raw_responses: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Inference {
    pub candidate: CandidateEntailment,
    pub entry: ConceptEntry,
    /// Provider calls made, including rejected attempts.
    pub calls: usize,
}

/// Maps a provider label to an id: exact id first, then display name.
fn resolve<'a>(label: &str, ids: impl Iterator<Item = (&'a String, &'a str)>) -> Option<String> {
    let mut by_name = None;
    for (id, display) in ids {
        if id == label {
            return Some(id.clone());
        }
        if by_name.is_none() && display.trim().to_lowercase() == label {
            by_name = Some(id.clone());
        }
    }
    by_name
}

fn check_sc_st(o: &Ontology, pos: PartOfSpeech, sc: &str, st: &str) -> Result<(String, String), Vec<String>> {
    let mut violations = Vec::new();
    let sc_id = resolve(sc, o.classes.iter().map(|(id, c)| (id, c.display_name.as_str())));
    let st_id = resolve(st, o.templates.keys().map(|id| (id, id.as_str())));
    match &sc_id {
        None => violations.push(format!("SC `{sc}` is not a known class")),
        Some(id) if o.classes[id].pos_domain != pos => violations.push(format!(
            "SC `{id}` holds {}s, the word is a {pos}",
            o.classes[id].pos_domain
        )),
        Some(_) => {}
    }
    match (&sc_id, &st_id) {
        (_, None) => violations.push(format!("ST `{st}` is not a known template")),
        (Some(sc), Some(st)) if &o.templates[st].parent_class != sc => violations.push(format!(
            "ST `{st}` belongs to SC `{}`, not `{sc}`",
            o.templates[st].parent_class
        )),
        _ => {}
    }
    match (sc_id, st_id) {
        (Some(sc), Some(st)) if violations.is_empty() => Ok((sc, st)),
        _ => Err(violations),
    }
}

fn build_entry(
    o: &Ontology,
    lemma: &str,
    pos: PartOfSpeech,
    sc: &str,
    st: &str,
    tuples: &[(String, Vec<String>)],
) -> Result<ConceptEntry, Vec<String>> {
    let slots = &o.templates[st].variable_slots;
    let mut explication: Vec<ExplicationTuple> = tuples
        .iter()
        .map(|(k, v)| {
            let sv = resolve(k, o.variables.iter().map(|(id, var)| (id, var.display_name.as_str())))
                .unwrap_or_else(|| k.clone());
            let sm = v
                .iter()
                .map(|m| {
                    resolve(m, o.molecules.iter().map(|(id, mol)| (id, mol.display_name.as_str())))
                        .unwrap_or_else(|| m.clone())
                })
                .collect::<Vec<_>>();
            ExplicationTuple { sv, sm }
        })
        .collect();
    // answers list keys in any order; unknown keys sort last and are reported
    explication.sort_by_key(|t| slots.iter().position(|s| s == &t.sv).unwrap_or(usize::MAX));
    let entry = ConceptEntry {
        lemma: lemma.to_owned(),
        pos,
        sc: sc.to_owned(),
        st: st.to_owned(),
        explication,
        provenance: Provenance::LlmAdmitted,
        admitted_at: None,
    };
    let violations = validate_concept(o, &entry);
    if violations.is_empty() {
        Ok(entry)
    } else {
        Err(violations
            .iter()
            .map(|v| format!("{} ({})", v.rule, v.detail))
            .collect())
    }
}

/// Runs one stage: ask, parse, check; on rejection ask again with feedback.
fn run_stage<T>(
    provider: &dyn CompletionProvider,
    prompt: &Prompt,
    stage: Stage,
    cfg: &FallbackConfig,
    raw_log: &mut Vec<String>,
    calls: &mut usize,
    mut check: impl FnMut(Parsed) -> Result<T, Vec<String>>,
) -> Result<T, FallbackError> {
    let mut violations: Vec<String> = Vec::new();
    let attempts = cfg.retries + 1;
    for _ in 0..attempts {
        let p = prompt.with_feedback(&violations);
        *calls += 1;
        let raw = provider.complete(&p.rendered, &cfg.decode)?;
        raw_log.push(raw.clone());
        violations = match parse_response(&raw, stage) {
            Ok(parsed) => match check(parsed) {
                Ok(v) => return Ok(v),
                Err(v) => v,
            },
            Err(e) => vec![e.to_string()],
        };
    }
    Err(FallbackError::ExhaustedRetries {
        stage,
        attempts,
        violations,
    })
}

pub fn infer_entailment(
    lemma: &str,
    pos: PartOfSpeech,
    o: &Ontology,
    provider: &dyn CompletionProvider,
    cfg: &FallbackConfig,
) -> Result<Inference, FallbackError> {
    let mut raw = Vec::new();
    let mut calls = 0;

    let p1 = build_prompt_sc_st(lemma, pos, o, cfg.k_examples)?;
    let (sc, st) = run_stage(
        provider,
        &p1,
        Stage::ScSt,
        cfg,
        &mut raw,
        &mut calls,
        |parsed| match parsed {
            Parsed::ScSt { sc, st } => check_sc_st(o, pos, &sc, &st),
            Parsed::SvSm(_) => unreachable!("stage one parses SC/ST"),
        },
    )?;

    let p2 = build_prompt_svsm(lemma, &st, o, cfg.k_examples)?;
    let mut tuples = Vec::new();
    let entry = run_stage(
        provider,
        &p2,
        Stage::SvSm,
        cfg,
        &mut raw,
        &mut calls,
        |parsed| match parsed {
            Parsed::SvSm(pairs) => {
                tuples = pairs.clone();
                build_entry(o, lemma, pos, &sc, &st, &pairs)
            }
            Parsed::ScSt { .. } => unreachable!("stage two parses key/value pairs"),
        },
    )?;

    Ok(Inference {
        candidate: CandidateEntailment {
            lemma: lemma.to_owned(),
            sc,
            st,
            tuples,
            raw_responses: raw,
        },
        entry,
        calls,
    })
}

/// Replay transcript for a concept that answers both stages with the
/// concept's own decomposition, as computed from `o` (which need not
/// contain the concept).
pub fn transcript_for(
    entry: &ConceptEntry,
    o: &Ontology,
    cfg: &FallbackConfig,
) -> Result<Vec<TranscriptEntry>, FallbackError> {
    transcript_with(
        entry,
        o,
        cfg,
        serde_json::json!({"SC": entry.sc, "ST": entry.st}).to_string(),
        sv_sm_json(entry),
    )
}

/// Replay transcript with explicit stage answers for `entry`'s lemma and
/// template.
pub fn transcript_with(
    entry: &ConceptEntry,
    o: &Ontology,
    cfg: &FallbackConfig,
    sc_st_answer: String,
    sv_sm_answer: String,
) -> Result<Vec<TranscriptEntry>, FallbackError> {
    let p1 = build_prompt_sc_st(&entry.lemma, entry.pos, o, cfg.k_examples)?;
    let p2 = build_prompt_svsm(&entry.lemma, &entry.st, o, cfg.k_examples)?;
    Ok(vec![
        TranscriptEntry {
            prompt_sha256: prompt_sha256(&p1.rendered),
            response: sc_st_answer,
        },
        TranscriptEntry {
            prompt_sha256: prompt_sha256(&p2.rendered),
            response: sv_sm_answer,
        },
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(retries: u32) -> FallbackConfig {
        FallbackConfig {
            retries,
            ..Default::default()
        }
    }

    #[test]
    fn mandi_from_scripted_answers() {
        let o = Ontology::seed();
        let p = ScriptedProvider::new([
            r#"{"SC":"Location","ST":"Commercial"}"#,
            r#"{"Key1":"Purpose","Value1":"Business"}"#,
        ]);
        let inf = infer_entailment("mandi", PartOfSpeech::Noun, &o, &p, &cfg(2)).unwrap();
        assert_eq!(inf.calls, 2);
        assert_eq!(
            (inf.entry.sc.as_str(), inf.entry.st.as_str()),
            ("location", "commercial")
        );
        assert_eq!(inf.entry.explication, [ExplicationTuple::new("purpose", ["business"])]);
        assert_eq!(inf.entry.provenance, Provenance::LlmAdmitted);
        assert_eq!(inf.candidate.raw_responses.len(), 2);
        assert!(o.insert_concept(inf.entry).is_ok());
    }

    #[test]
    fn replay_transcript_for_typhoon() {
        let o = Ontology::seed();
        let typhoon = o.lookup("typhoon", PartOfSpeech::Noun).unwrap().clone();
        let mut without = o.clone();
        without.concepts.remove(&typhoon.key());
        let replay = ReplayProvider::new(transcript_for(&typhoon, &without, &cfg(0)).unwrap());
        let inf = infer_entailment("typhoon", PartOfSpeech::Noun, &without, &replay, &cfg(0)).unwrap();
        assert_eq!(inf.entry.st, "event climate");
        assert_eq!(inf.entry.explication, typhoon.explication);
        assert_eq!(replay.calls(), 2);
    }

    #[test]
    fn unknown_class_exhausts_retries() {
        let o = Ontology::seed();
        let bad = r#"{"SC":"food","ST":"commercial"}"#;
        let p = ScriptedProvider::new([bad, bad, bad]);
        match infer_entailment("mandi", PartOfSpeech::Noun, &o, &p, &cfg(1)) {
            Err(FallbackError::ExhaustedRetries {
                stage: Stage::ScSt,
                attempts: 2,
                violations,
            }) => assert!(violations[0].contains("food")),
            other => panic!("{other:?}"),
        }
        assert_eq!(p.calls(), 2);
        // the retry prompt carries the rejection
        let prompts = p.prompts();
        assert!(!prompts[0].contains("rejected") && prompts[1].contains("`food`"));
    }

    #[test]
    fn retry_recovers() {
        let o = Ontology::seed();
        let p = ScriptedProvider::new([
            "no idea",
            r#"{"SC":"location","ST":"commercial"}"#,
            r#"{"Key1":"purpose","Value1":"germinate"}"#,
            r#"{"Key1":"purpose","Value1":"business"}"#,
        ]);
        let inf = infer_entailment("mandi", PartOfSpeech::Noun, &o, &p, &cfg(1)).unwrap();
        assert_eq!(inf.calls, 4);
        assert!(p.prompts()[3].contains("molecule not allowed"));
    }

    #[test]
    fn class_template_mismatch_and_pos() {
        let o = Ontology::seed();
        assert!(check_sc_st(&o, PartOfSpeech::Noun, "things", "commercial").is_err());
        assert!(check_sc_st(&o, PartOfSpeech::Verb, "location", "commercial").is_err());
        assert!(check_sc_st(&o, PartOfSpeech::Noun, "location", "commercial").is_ok());
    }

    #[test]
    fn provider_failure_is_not_retried() {
        let o = Ontology::seed();
        let p = ScriptedProvider::new(Vec::<String>::new());
        assert!(matches!(
            infer_entailment("mandi", PartOfSpeech::Noun, &o, &p, &cfg(5)),
            Err(FallbackError::Provider(ProviderError::Unreachable(_)))
        ));
        assert_eq!(p.calls(), 1);
    }
}
