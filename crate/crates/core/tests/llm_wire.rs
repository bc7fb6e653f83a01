mod support {
    pub mod mock_http;
}

use std::time::Duration;

use compcq_core::genharness::parse_cq_list;
use compcq_core::llm::{build_request, parse_response, HttpClient, ProviderConfig, WireFormat};
use compcq_core::{Error, LlmClient};
use serde_json::Value;
use support::mock_http::MockServer;

const WIRES: [(WireFormat, &str, &str); 4] = [
    (WireFormat::OpenAi, "openai", "gpt-4.1"),
    (WireFormat::Gemini, "gemini", "gemini-2.5-pro"),
    (WireFormat::Ollama, "ollama", "llama3.1:8b"),
    (WireFormat::Anthropic, "anthropic", "example-model"),
];

fn fixture(name: &str) -> Value {
    let path = format!("{}/tests/fixtures/wire/{name}.json", env!("CARGO_MANIFEST_DIR"));
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const EXPECTED: [&str; 3] = [
    "Which artists performed at the venue?",
    "What instruments were used in the recording?",
    "Who released the album?",
];

#[test]
fn request_bodies_match_vendored_fixtures() {
    for (wire, name, model) in WIRES {
        let cfg = ProviderConfig::new(name, wire, "https://api.example.test", model);
        let req = build_request(&cfg, "PROMPT");
        assert_eq!(req.body, fixture(&format!("{name}.request")), "{name}");
        assert_eq!(req.seed_sent, wire != WireFormat::Anthropic);
    }
}

#[test]
fn responses_parse_to_the_same_questions() {
    for (wire, name, _) in WIRES {
        let text = parse_response(wire, &fixture(&format!("{name}.response"))).unwrap();
        assert_eq!(parse_cq_list(&text), EXPECTED, "{name}");
    }
    assert!(parse_response(WireFormat::OpenAi, &serde_json::json!({"error": "x"})).is_err());
}

fn local_cfg(url: &str, var: &str) -> ProviderConfig {
    let mut cfg = ProviderConfig::new("local", WireFormat::OpenAi, url, "m");
    cfg.auth = Some(var.into());
    cfg.backoff = Duration::from_millis(1);
    cfg
}

#[test]
fn retries_on_429_and_5xx_then_succeeds() {
    let ok = fixture("openai.response").to_string();
    let server = MockServer::scripted(vec![(429, "{}".into()), (503, "{}".into()), (200, ok)]);
    std::env::set_var("COMPCQ_TEST_KEY_RETRY", "sk-test-secret");
    let client = HttpClient::from_config(local_cfg(&server.url, "COMPCQ_TEST_KEY_RETRY")).unwrap();
    let c = client.complete("PROMPT").unwrap();
    assert_eq!(parse_cq_list(&c.text).len(), 3);
    assert!(c.seed_sent);
    let reqs = server.join();
    assert_eq!(reqs.len(), 3);
    assert_eq!(reqs[0].path, "/chat/completions");
    assert_eq!(reqs[0].header("authorization"), Some("Bearer sk-test-secret"));
    assert!(!format!("{client:?}").contains("sk-test-secret"));
}

#[test]
fn client_errors_are_not_retried() {
    let server = MockServer::scripted(vec![(401, "{\"error\":\"bad key\"}".into())]);
    std::env::set_var("COMPCQ_TEST_KEY_401", "k");
    let client = HttpClient::from_config(local_cfg(&server.url, "COMPCQ_TEST_KEY_401")).unwrap();
    match client.complete("PROMPT").unwrap_err() {
        Error::Provider { status, .. } => assert_eq!(status, Some(401)),
        e => panic!("unexpected {e}"),
    }
    assert_eq!(server.join().len(), 1);
}

#[test]
fn retries_are_bounded() {
    let server = MockServer::scripted(vec![(500, "{}".into()); 4]);
    std::env::set_var("COMPCQ_TEST_KEY_500", "k");
    let client = HttpClient::from_config(local_cfg(&server.url, "COMPCQ_TEST_KEY_500")).unwrap();
    assert!(client.complete("PROMPT").unwrap_err().is_provider());
    assert_eq!(server.join().len(), 4);
}

#[test]
fn missing_key_names_the_variable() {
    let cfg = local_cfg("http://127.0.0.1:9", "COMPCQ_TEST_KEY_UNSET_XYZ");
    let err = HttpClient::from_config(cfg).unwrap_err();
    assert!(err.to_string().contains("COMPCQ_TEST_KEY_UNSET_XYZ"));
}

#[test]
fn literal_secret_in_auth_field_is_rejected() {
    let mut cfg = local_cfg("http://127.0.0.1:9", "X");
    cfg.auth = Some("sk-live-abc123".into());
    assert!(cfg.validate().is_err());
}
