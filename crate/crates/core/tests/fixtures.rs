//! Checks that committed replay transcripts match the prompts the current
//! code renders. Set `NIM_BLESS=1` to rewrite them.

use std::path::PathBuf;

use nim_core::llm_fallback::{transcript_with, FallbackConfig, TranscriptEntry};
use nim_core::ontology::{ConceptEntry, ExplicationTuple, Provenance};
use nim_core::{Ontology, PartOfSpeech};

fn data(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(rel)
}

fn mandi() -> ConceptEntry {
    ConceptEntry {
        lemma: "mandi".into(),
        pos: PartOfSpeech::Noun,
        sc: "location".into(),
        st: "commercial".into(),
        explication: vec![ExplicationTuple::new("purpose", ["business"])],
        provenance: Provenance::LlmAdmitted,
        admitted_at: None,
    }
}

fn check(rel: &str, entries: Vec<TranscriptEntry>) {
    let path = data(rel);
    let mut expected = serde_json::to_string_pretty(&entries).unwrap();
    expected.push('\n');
    if std::env::var_os("NIM_BLESS").is_some() {
        std::fs::write(&path, &expected).unwrap();
        return;
    }
    let actual = std::fs::read_to_string(&path).unwrap_or_default();
    assert_eq!(actual, expected, "{} is stale; rerun with NIM_BLESS=1", path.display());
}

#[test]
fn mandi_transcript_is_current() {
    let entries = transcript_with(
        &mandi(),
        &Ontology::seed(),
        &FallbackConfig::default(),
        r#"{"SC":"Location","ST":"Commercial"}"#.into(),
        r#"{"Key1":"Purpose","Value1":"Business"}"#.into(),
    )
    .unwrap();
    check("transcripts/mandi.json", entries);
}
