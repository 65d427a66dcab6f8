//! Remote provider behavior against a scripted HTTP stub server.

use std::io::{Read, Write};
use std::net::TcpListener;
use std::sync::mpsc;
use std::thread;

use synthcorpus::providers::{
    ChatProvider, Embedder, ProviderConfig, ProviderError, RemoteChat, RemoteEmbedder,
};

/// Serve one scripted response per incoming connection, then stop.
fn stub_server(responses: Vec<String>) -> (String, mpsc::Receiver<String>) {
    let listener = TcpListener::bind("127.0.0.1:0").expect("bind stub server");
    let addr = listener.local_addr().unwrap();
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        for response in responses {
            let (mut stream, _) = match listener.accept() {
                Ok(conn) => conn,
                Err(_) => return,
            };
            let mut buf = vec![0u8; 65536];
            let mut total = 0;
            // Read until the end of headers, then the declared body length.
            let body = loop {
                let n = stream.read(&mut buf[total..]).unwrap_or(0);
                if n == 0 {
                    break String::new();
                }
                total += n;
                let text = String::from_utf8_lossy(&buf[..total]).to_string();
                if let Some(header_end) = text.find("\r\n\r\n") {
                    let content_length = text
                        .lines()
                        .find_map(|l| {
                            let l = l.to_ascii_lowercase();
                            l.strip_prefix("content-length:").map(|v| v.trim().parse::<usize>().unwrap_or(0))
                        })
                        .unwrap_or(0);
                    let body_start = header_end + 4;
                    if total >= body_start + content_length {
                        break text[body_start..body_start + content_length].to_string();
                    }
                }
            };
            let _ = tx.send(body);
            let _ = stream.write_all(response.as_bytes());
            let _ = stream.flush();
        }
    });
    (format!("http://{addr}"), rx)
}

fn http_response(status: &str, body: &str) -> String {
    format!(
        "HTTP/1.1 {status}\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
        body.len()
    )
}

fn fast_config(endpoint: &str) -> ProviderConfig {
    let mut config = ProviderConfig::new(endpoint, "test-model");
    config.max_retries = 3;
    config.backoff_ms = 5;
    config.timeout_secs = 5;
    config.rate_limit_per_min = 60_000.0;
    config
}

#[test]
fn chat_succeeds_after_two_429s() {
    let ok = http_response(
        "200 OK",
        r#"{"choices":[{"message":{"role":"assistant","content":"1. hello"}}]}"#,
    );
    let (endpoint, _rx) = stub_server(vec![
        http_response("429 Too Many Requests", "{}"),
        http_response("429 Too Many Requests", "{}"),
        ok,
    ]);
    let chat = RemoteChat::new(fast_config(&endpoint)).unwrap();
    let out = chat.chat_complete("say hello").unwrap();
    assert_eq!(out, "1. hello");
}

#[test]
fn chat_gives_up_after_max_retries() {
    let responses = vec![http_response("429 Too Many Requests", "{}"); 4];
    let (endpoint, _rx) = stub_server(responses);
    let chat = RemoteChat::new(fast_config(&endpoint)).unwrap();
    match chat.chat_complete("say hello") {
        Err(ProviderError::Http { status: 429, attempts, .. }) => assert_eq!(attempts, 4),
        other => panic!("expected Http 429 error, got {other:?}"),
    }
}

#[test]
fn chat_client_error_fails_immediately() {
    let (endpoint, _rx) = stub_server(vec![http_response("401 Unauthorized", "{}")]);
    let chat = RemoteChat::new(fast_config(&endpoint)).unwrap();
    match chat.chat_complete("hi") {
        Err(ProviderError::Http { status: 401, attempts, .. }) => assert_eq!(attempts, 1),
        other => panic!("expected immediate 401, got {other:?}"),
    }
}

#[test]
fn empty_completion_is_an_error() {
    let (endpoint, _rx) = stub_server(vec![http_response(
        "200 OK",
        r#"{"choices":[{"message":{"role":"assistant","content":"  "}}]}"#,
    )]);
    let chat = RemoteChat::new(fast_config(&endpoint)).unwrap();
    assert!(matches!(
        chat.chat_complete("hi"),
        Err(ProviderError::EmptyCompletion)
    ));
}

#[test]
fn embeddings_reorder_by_index_and_normalize() {
    let body = r#"{"data":[
        {"index":1,"embedding":[0.0,2.0]},
        {"index":0,"embedding":[3.0,0.0]}
    ]}"#;
    let (endpoint, rx) = stub_server(vec![http_response("200 OK", body)]);
    let embedder = Embedder::new(Box::new(
        RemoteEmbedder::new(fast_config(&endpoint)).unwrap(),
    ));
    let out = embedder
        .embed_batch(&["first".to_string(), "second".to_string()])
        .unwrap();
    assert_eq!(out[0].values(), &[1.0, 0.0]);
    assert_eq!(out[1].values(), &[0.0, 1.0]);
    let request = rx.recv().unwrap();
    assert!(request.contains("\"input\":[\"first\",\"second\"]"));
    assert!(request.contains("\"model\":\"test-model\""));
}

#[test]
fn chat_request_carries_prompt_and_temperature() {
    let ok = http_response(
        "200 OK",
        r#"{"choices":[{"message":{"content":"ok"}}]}"#,
    );
    let (endpoint, rx) = stub_server(vec![ok]);
    let mut config = fast_config(&endpoint);
    config.temperature = Some(0.7);
    let chat = RemoteChat::new(config).unwrap();
    chat.chat_complete("PROMPT BODY").unwrap();
    let request = rx.recv().unwrap();
    assert!(request.contains("PROMPT BODY"));
    assert!(request.contains("\"temperature\":0.7"));
}
