use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::mpsc;
use std::thread;

use roboground_llm::{ChatClient, ChatMessage, ChatRequest, ClientError, HttpClient, LlmConfig};

/// Serves the given canned (status, body) pairs in order and reports each
/// request's authorization header and body.
fn stub(responses: Vec<(u16, &'static str)>) -> (String, mpsc::Receiver<(String, String)>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1", listener.local_addr().unwrap());
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        for (status, body) in responses {
            let (mut stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut auth = String::new();
            let mut len = 0usize;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                let lower = line.to_ascii_lowercase();
                if let Some(v) = lower.strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
                if lower.starts_with("authorization:") {
                    auth = line["authorization:".len()..].trim().to_string();
                }
                if line == "\r\n" {
                    break;
                }
            }
            let mut buf = vec![0; len];
            reader.read_exact(&mut buf).unwrap();
            tx.send((auth, String::from_utf8(buf).unwrap())).unwrap();
            let reply = format!(
                "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
                body.len()
            );
            stream.write_all(reply.as_bytes()).unwrap();
        }
    });
    (url, rx)
}

fn request() -> ChatRequest {
    let mut r = ChatRequest::new("m", vec![ChatMessage::system("s"), ChatMessage::user("u")]);
    r.seed = Some(3);
    r
}

const OK: &str = r#"{"model":"m-2024","choices":[{"message":{"role":"assistant","content":"aw.takeoff()"}}]}"#;

#[test]
fn posts_openai_shaped_body_with_bearer_token() {
    let (url, rx) = stub(vec![(200, OK)]);
    let client = HttpClient::with_key(LlmConfig { base_url: url, ..LlmConfig::default() }, "sk-test").unwrap();
    let resp = client.complete(&request()).unwrap();
    assert_eq!(resp.content, "aw.takeoff()");
    assert_eq!(resp.model, "m-2024");
    let (auth, body) = rx.recv().unwrap();
    assert_eq!(auth, "Bearer sk-test");
    let body: serde_json::Value = serde_json::from_str(&body).unwrap();
    assert_eq!(body["messages"][1]["role"], "user");
    assert_eq!(body["seed"], 3);
}

#[test]
fn retries_server_errors_then_succeeds() {
    let (url, rx) = stub(vec![(503, "{}"), (200, OK)]);
    let cfg = LlmConfig { base_url: url, max_retries: 2, ..LlmConfig::default() };
    let client = HttpClient::with_key(cfg, "k").unwrap();
    assert_eq!(client.complete(&request()).unwrap().content, "aw.takeoff()");
    assert_eq!(rx.iter().take(2).count(), 2);
}

#[test]
fn auth_failures_are_not_retried() {
    let (url, _rx) = stub(vec![(401, r#"{"error":"bad key"}"#)]);
    let client = HttpClient::with_key(LlmConfig { base_url: url, ..LlmConfig::default() }, "k").unwrap();
    assert!(matches!(client.complete(&request()), Err(ClientError::Auth(_))));
}
