use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::thread::JoinHandle;

use nim_cli::config::EndpointConfig;
use nim_cli::http::{HttpCompletion, HttpEmbeddings, HttpTranslator, NoTranslator};
use nim_core::binding_translate::TranslationProvider;
use nim_core::llm_fallback::{CompletionProvider, DecodeParams};
use nim_core::metrics::EmbeddingProvider;
use nim_core::ProviderError;
use serde_json::Value;

struct Captured {
    auth: Option<String>,
    body: Value,
}

/// Serves one request with `status` and `body`, returning what it received.
fn serve_once(status: u16, body: &'static str) -> (String, JoinHandle<Captured>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1", listener.local_addr().unwrap());
    let handle = std::thread::spawn(move || {
        let (stream, _) = listener.accept().unwrap();
        let mut reader = BufReader::new(stream.try_clone().unwrap());
        let mut len = 0;
        let mut auth = None;
        loop {
            let mut line = String::new();
            reader.read_line(&mut line).unwrap();
            let line = line.trim_end();
            if line.is_empty() {
                break;
            }
            if let Some((k, v)) = line.split_once(':') {
                match k.to_ascii_lowercase().as_str() {
                    "content-length" => len = v.trim().parse().unwrap(),
                    "authorization" => auth = Some(v.trim().to_owned()),
                    _ => {}
                }
            }
        }
        let mut buf = vec![0; len];
        reader.read_exact(&mut buf).unwrap();
        let mut stream = stream;
        write!(
            stream,
            "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
            body.len()
        )
        .unwrap();
        Captured {
            auth,
            body: serde_json::from_slice(&buf).unwrap(),
        }
    });
    (url, handle)
}

#[test]
fn completion_round_trip() {
    let (url, server) = serve_once(200, r#"{"text":"{\"SC\":\"Location\"}"}"#);
    let mut cfg = EndpointConfig::new(url);
    cfg.model = Some("small".into());
    let p = HttpCompletion::new(&cfg, Some("secret".into()));
    let params = DecodeParams::default();
    let out = p.complete("word => ?", &params).unwrap();
    assert_eq!(out, r#"{"SC":"Location"}"#);
    let got = server.join().unwrap();
    assert_eq!(got.auth.as_deref(), Some("Bearer secret"));
    assert_eq!(got.body["prompt"], "word => ?");
    assert_eq!(got.body["model"], "small");
    assert_eq!(got.body["max_tokens"], params.max_tokens);
}

#[test]
fn translator_round_trip() {
    let (url, server) = serve_once(200, r#"{"translatedText":"⟦CW1⟧ आउन सक्छ"}"#);
    let t = HttpTranslator::new(&EndpointConfig::new(url), None);
    assert_eq!(t.translate("There may be ⟦CW1⟧", "en", "ne").unwrap(), "⟦CW1⟧ आउन सक्छ");
    let got = server.join().unwrap();
    assert_eq!(got.auth, None);
    assert_eq!(got.body["q"], "There may be ⟦CW1⟧");
    assert_eq!(got.body["source"], "en");
    assert_eq!(got.body["target"], "ne");
}

#[test]
fn embeddings_round_trip_and_count_check() {
    let (url, server) = serve_once(200, r#"{"vectors":[[1.0,0.0],[0.0,1.0]]}"#);
    let e = HttpEmbeddings::new(&EndpointConfig::new(url), None);
    let v = e.embed(&["a", "b"]).unwrap();
    assert_eq!(v, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
    assert_eq!(server.join().unwrap().body["texts"], serde_json::json!(["a", "b"]));

    let (url, server) = serve_once(200, r#"{"vectors":[[1.0]]}"#);
    let e = HttpEmbeddings::new(&EndpointConfig::new(url), None);
    assert!(matches!(e.embed(&["a", "b"]), Err(ProviderError::BadPayload(_))));
    server.join().unwrap();
}

#[test]
fn http_errors_map_to_provider_errors() {
    let (url, server) = serve_once(500, r#"{"error":"boom"}"#);
    let p = HttpCompletion::new(&EndpointConfig::new(url), None);
    assert!(matches!(
        p.complete("x", &DecodeParams::default()),
        Err(ProviderError::Unreachable(_))
    ));
    server.join().unwrap();

    let (url, server) = serve_once(200, r#"{"unexpected":true}"#);
    let p = HttpCompletion::new(&EndpointConfig::new(url), None);
    assert!(matches!(
        p.complete("x", &DecodeParams::default()),
        Err(ProviderError::BadPayload(_))
    ));
    server.join().unwrap();
}

#[test]
fn closed_port_is_unreachable() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let p = HttpCompletion::new(&EndpointConfig::new(format!("http://127.0.0.1:{port}/")), None);
    assert!(matches!(
        p.complete("x", &DecodeParams::default()),
        Err(ProviderError::Unreachable(_))
    ));
    assert!(matches!(
        NoTranslator.translate("x", "en", "mr"),
        Err(ProviderError::Unreachable(_))
    ));
}
