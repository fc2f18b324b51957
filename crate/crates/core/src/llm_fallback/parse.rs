//! Extraction of the JSON answer from free-form provider text.

use serde::Serialize;
use serde_json::{Map, Value};

use super::FallbackError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    ScSt,
    SvSm,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stage::ScSt => "sc_st",
            Stage::SvSm => "sv_sm",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Parsed {
    ScSt {
        sc: String,
        st: String,
    },
    /// (variable, ordered molecule list) in response order.
    SvSm(Vec<(String, Vec<String>)>),
}

/// First substring of `raw` that parses as a JSON object.
pub fn first_json_object(raw: &str) -> Option<Map<String, Value>> {
    raw.char_indices().filter(|&(_, c)| c == '{').find_map(|(i, _)| {
        let mut stream = serde_json::Deserializer::from_str(&raw[i..]).into_iter::<Value>();
        match stream.next() {
            Some(Ok(Value::Object(map))) => Some(map),
            _ => None,
        }
    })
}

fn norm(s: &str) -> String {
    s.trim().to_lowercase()
}

fn get<'a>(map: &'a Map<String, Value>, key: &str) -> Option<&'a Value> {
    map.get(key)
        .or_else(|| map.iter().find(|(k, _)| k.eq_ignore_ascii_case(key)).map(|(_, v)| v))
}

fn malformed(msg: impl Into<String>) -> FallbackError {
    FallbackError::Malformed(msg.into())
}

fn string_field(map: &Map<String, Value>, key: &str) -> Result<String, FallbackError> {
    match get(map, key) {
        Some(Value::String(s)) if !s.trim().is_empty() => Ok(norm(s)),
        Some(_) => Err(malformed(format!("`{key}` must be a non-empty string"))),
        None => Err(malformed(format!("missing key `{key}`"))),
    }
}

fn molecules(value: &Value, key: &str) -> Result<Vec<String>, FallbackError> {
    let items: Vec<String> = match value {
        Value::String(s) => s.split([';', ',']).map(norm).collect(),
        Value::Array(items) => items
            .iter()
            .map(|v| {
                v.as_str()
                    .map(norm)
                    .ok_or_else(|| malformed(format!("`{key}` holds a non-string")))
            })
            .collect::<Result<_, _>>()?,
        _ => return Err(malformed(format!("`{key}` must be a string or list of strings"))),
    };
    let items: Vec<String> = items.into_iter().filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err(malformed(format!("`{key}` is empty")));
    }
    Ok(items)
}

pub fn parse_response(raw: &str, stage: Stage) -> Result<Parsed, FallbackError> {
    let map = first_json_object(raw).ok_or_else(|| malformed("no JSON object in response"))?;
    match stage {
        Stage::ScSt => Ok(Parsed::ScSt {
            sc: string_field(&map, "SC")?,
            st: string_field(&map, "ST")?,
        }),
        Stage::SvSm => {
            let mut pairs = Vec::new();
            for i in 1.. {
                let (k, v) = (format!("Key{i}"), format!("Value{i}"));
                match (get(&map, &k), get(&map, &v)) {
                    (None, None) => break,
                    (Some(_), None) => return Err(malformed(format!("`{k}` has no `{v}`"))),
                    (None, Some(_)) => return Err(malformed(format!("`{v}` has no `{k}`"))),
                    (Some(_), Some(value)) => pairs.push((string_field(&map, &k)?, molecules(value, &v)?)),
                }
            }
            if pairs.is_empty() {
                return Err(malformed("missing key `Key1`"));
            }
            Ok(Parsed::SvSm(pairs))
        }
    }
}
