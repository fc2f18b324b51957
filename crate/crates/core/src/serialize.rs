//! Output formats: elementalization text, wire JSON (schema version 1) and a
//! terminal preview. Nothing here consults providers or the clock.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::decompose::{NimMessage, Segment};

pub const WIRE_VERSION: u64 = 1;

pub fn to_elementalization(m: &NimMessage) -> String {
    let mut lines = vec!["<elementalization>".to_owned()];
    for i in m.ideographs() {
        lines.push(format!("-<cw>{}</cw>", i.cw.to_uppercase()));
        lines.push(format!("--- <sc>{}</sc>", i.sc.id));
        lines.push(format!("--- <st>{}</st>", i.st.id));
        for v in &i.explication {
            let sm: Vec<&str> = v.sm.iter().map(|m| m.id.as_str()).collect();
            lines.push(format!("------ <sv>{}</sv> <sm>{}</sm>", v.sv, sm.join(", ")));
        }
    }
    lines.push("</elementalization>".to_owned());
    lines.join("\n")
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireMessage {
    version: u64,
    source_text: String,
    source_lang: String,
    binding_lang: String,
    ontology_version: u64,
    segments: Vec<Segment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    created_at: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    notes: Vec<String>,
}

/// Rebuilds every object with its keys in sorted order.
fn sorted(v: Value) -> Value {
    match v {
        Value::Object(map) => {
            let mut entries: Vec<(String, Value)> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            Value::Object(entries.into_iter().map(|(k, v)| (k, sorted(v))).collect())
        }
        Value::Array(items) => Value::Array(items.into_iter().map(sorted).collect()),
        other => other,
    }
}

pub fn to_wire_value(m: &NimMessage) -> Value {
    let wire = WireMessage {
        version: WIRE_VERSION,
        source_text: m.source_text.clone(),
        source_lang: m.source_lang.clone(),
        binding_lang: m.binding_lang.clone(),
        ontology_version: m.ontology_version,
        segments: m.segments.clone(),
        created_at: m.created_at.clone(),
        notes: m.notes.clone(),
    };
    sorted(serde_json::to_value(wire).expect("wire message serializes"))
}

/// Compact UTF-8 JSON with sorted keys.
pub fn to_wire_json(m: &NimMessage) -> Vec<u8> {
    serde_json::to_vec(&to_wire_value(m)).expect("wire message serializes")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("schema violation at `{pointer}`: {message}")]
pub struct SchemaError {
    /// JSON pointer to the offending value ("" for the document root).
    pub pointer: String,
    pub message: String,
}

fn escape(token: &str) -> String {
    token.replace('~', "~0").replace('/', "~1")
}

fn pointer_of(path: &serde_path_to_error::Path, message: &str) -> String {
    use serde_path_to_error::Segment as S;
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            S::Seq { index } => out.push_str(&format!("/{index}")),
            S::Map { key } => out.push_str(&format!("/{}", escape(key))),
            S::Enum { .. } | S::Unknown => {}
        }
    }
    // a missing field is reported at its parent; point at the field itself
    if let Some(rest) = message.strip_prefix("missing field `") {
        if let Some(field) = rest.split('`').next() {
            out.push('/');
            out.push_str(&escape(field));
        }
    }
    out
}

pub fn from_wire_json(bytes: &[u8]) -> Result<NimMessage, SchemaError> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    let wire: WireMessage = serde_path_to_error::deserialize(de).map_err(|e| {
        let message = e.inner().to_string();
        let message = message.split(" at line ").next().unwrap_or(&message).to_owned();
        SchemaError {
            pointer: pointer_of(e.path(), &message),
            message,
        }
    })?;
    if wire.version != WIRE_VERSION {
        return Err(SchemaError {
            pointer: "/version".to_owned(),
            message: format!("unsupported version {}, expected {WIRE_VERSION}", wire.version),
        });
    }
    Ok(NimMessage {
        source_text: wire.source_text,
        source_lang: wire.source_lang,
        binding_lang: wire.binding_lang,
        segments: wire.segments,
        ontology_version: wire.ontology_version,
        created_at: wire.created_at,
        notes: wire.notes,
    })
}

/// One line of binding text with `[SC:id]` boxes in segment order.
pub fn render_terminal(m: &NimMessage) -> String {
    m.segments
        .iter()
        .map(|s| match s {
            Segment::Text { surface } => surface.clone(),
            Segment::Ideograph(i) => format!("[SC:{}]", i.sc.id),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// The preview line followed by each ideograph's template and molecules.
pub fn render_terminal_expanded(m: &NimMessage) -> String {
    let mut lines = vec![render_terminal(m)];
    for i in m.ideographs() {
        lines.push(format!("-{} [SC:{}]", i.cw.to_uppercase(), i.sc.id));
        lines.push(format!("--- [ST:{}]", i.st.id));
        for v in &i.explication {
            let sm: Vec<String> = v.sm.iter().map(|m| format!("[SM:{}]", m.id)).collect();
            lines.push(format!("------ {}", sm.join(" ")));
        }
    }
    lines.join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::{ExplicationView, IconRef, IdeographSegment};
    use proptest::prelude::*;

    fn icon(id: &str) -> IconRef {
        IconRef {
            id: id.into(),
            icon: format!("sm.{id}"),
        }
    }

    fn moto() -> IdeographSegment {
        IdeographSegment {
            cw: "motorcycle".into(),
            source_index: 6,
            sc: icon("things"),
            st: icon("automobile"),
            explication: vec![
                ExplicationView {
                    sv: "category".into(),
                    sm: vec![icon("private transport")],
                },
                ExplicationView {
                    sv: "path".into(),
                    sm: vec![icon("sibling"), icon("child")],
                },
            ],
        }
    }

    fn message(segments: Vec<Segment>) -> NimMessage {
        NimMessage {
            source_text: "on motorcycle".into(),
            source_lang: "en".into(),
            binding_lang: "en".into(),
            segments,
            ontology_version: 3,
            created_at: None,
            notes: vec![],
        }
    }

    #[test]
    fn elementalization_grammar() {
        let m = message(vec![Segment::Text { surface: "on".into() }, Segment::Ideograph(moto())]);
        assert_eq!(
            to_elementalization(&m),
            "<elementalization>\n-<cw>MOTORCYCLE</cw>\n--- <sc>things</sc>\n--- <st>automobile</st>\n\
             ------ <sv>category</sv> <sm>private transport</sm>\n------ <sv>path</sv> <sm>sibling, child</sm>\n\
             </elementalization>"
        );
        assert_eq!(
            to_elementalization(&message(vec![])),
            "<elementalization>\n</elementalization>"
        );
    }

    #[test]
    fn wire_shape() {
        let m = message(vec![Segment::Text { surface: "on".into() }, Segment::Ideograph(moto())]);
        let v: Value = serde_json::from_slice(&to_wire_json(&m)).unwrap();
        assert_eq!(v["version"], 1);
        assert_eq!(v["segments"][0], serde_json::json!({"kind": "text", "surface": "on"}));
        assert_eq!(v["segments"][1]["kind"], "ideograph");
        assert_eq!(v["segments"][1]["explication"][0]["sv"], "category");
        assert!(v["segments"][1]["explication"][0].get("icon").is_none());
        assert!(v.get("created_at").is_none() && v.get("notes").is_none());
        let text = String::from_utf8(to_wire_json(&message(vec![]))).unwrap();
        assert!(text.starts_with(r#"{"binding_lang":"en","ontology_version":3,"segments":[],"#));
    }

    #[test]
    fn schema_errors() {
        let m = message(vec![Segment::Ideograph(moto())]);
        let mut v = to_wire_value(&m);
        v["version"] = 2.into();
        let e = from_wire_json(&serde_json::to_vec(&v).unwrap()).unwrap_err();
        assert_eq!(e.pointer, "/version");

        let mut v = to_wire_value(&m);
        v["segments"][0].as_object_mut().unwrap().remove("st");
        let e = from_wire_json(&serde_json::to_vec(&v).unwrap()).unwrap_err();
        assert_eq!(e.pointer, "/segments/0/st");

        let mut v = to_wire_value(&m);
        v["segments"][0]["explication"][1]["sm"][0]["id"] = 5.into();
        let e = from_wire_json(&serde_json::to_vec(&v).unwrap()).unwrap_err();
        assert!(e.pointer.starts_with("/segments/0"), "{e}");

        assert!(from_wire_json(b"[]").is_err());
        assert_eq!(from_wire_json(b"{}").unwrap_err().pointer, "/version");
    }

    #[test]
    fn terminal_views() {
        let m = message(vec![Segment::Text { surface: "on".into() }, Segment::Ideograph(moto())]);
        assert_eq!(render_terminal(&m), "on [SC:things]");
        assert_eq!(
            render_terminal_expanded(&m),
            "on [SC:things]\n-MOTORCYCLE [SC:things]\n--- [ST:automobile]\n------ [SM:private transport]\n\
             ------ [SM:sibling] [SM:child]"
        );
        assert_eq!(render_terminal(&message(vec![])), "");
    }

    fn arb_icon() -> impl Strategy<Value = IconRef> {
        ("[a-z ()+1]{1,8}", "[a-z./]{0,12}").prop_map(|(id, icon)| IconRef { id, icon })
    }

    fn arb_segment() -> impl Strategy<Value = Segment> {
        prop_oneof![
            "\\PC{0,12}".prop_map(|surface| Segment::Text { surface }),
            (
                "\\PC{1,10}",
                0usize..30,
                arb_icon(),
                arb_icon(),
                prop::collection::vec(("[a-z]{1,6}", prop::collection::vec(arb_icon(), 1..3)), 0..3)
            )
                .prop_map(|(cw, source_index, sc, st, ex)| Segment::Ideograph(IdeographSegment {
                    cw,
                    source_index,
                    sc,
                    st,
                    explication: ex.into_iter().map(|(sv, sm)| ExplicationView { sv, sm }).collect(),
                })),
        ]
    }

    proptest! {
        #[test]
        fn wire_round_trip(
            segments in prop::collection::vec(arb_segment(), 0..6),
            source in "\\PC{0,30}",
            version in 0u64..1000,
            created in prop::option::of("[0-9TZ:-]{4,20}"),
            notes in prop::collection::vec("\\PC{0,10}", 0..2),
        ) {
            let m = NimMessage {
                source_text: source,
                source_lang: "en".into(),
                binding_lang: "mr".into(),
                segments,
                ontology_version: version,
                created_at: created,
                notes,
            };
            let bytes = to_wire_json(&m);
            prop_assert_eq!(from_wire_json(&bytes).unwrap(), m.clone());
            prop_assert_eq!(to_wire_json(&from_wire_json(&bytes).unwrap()), bytes);
        }
    }
}
