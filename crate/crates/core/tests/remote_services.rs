//! Remote encoder and language-model clients against a local HTTP server.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;

use joinrank::decompose::{decompose_query, DecompositionCache, DecompositionClient, HttpLanguageModel, LanguageModel, LlmConfig};
use joinrank::embedding::{EmbeddingProvider, RemoteEncoder, RemoteEncoderConfig};
use joinrank::Error;

struct Request {
    headers: Vec<String>,
    body: String,
}

/// Serve each request with `respond(index, request) -> (status, body)` and
/// close the connection. Returns the base URL and the request log.
fn serve(respond: impl Fn(usize, &Request) -> (u16, String) + Send + 'static) -> (String, Arc<Mutex<Vec<Request>>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/", listener.local_addr().unwrap());
    let log = Arc::new(Mutex::new(Vec::new()));
    let seen = Arc::clone(&log);
    let count = AtomicUsize::new(0);
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { break };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut headers = Vec::new();
            let mut length = 0;
            loop {
                let mut line = String::new();
                if reader.read_line(&mut line).unwrap() == 0 || line == "\r\n" {
                    break;
                }
                let line = line.trim_end().to_string();
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    length = v.trim().parse().unwrap();
                }
                headers.push(line);
            }
            let mut body = vec![0; length];
            reader.read_exact(&mut body).unwrap();
            let request = Request {
                headers,
                body: String::from_utf8(body).unwrap(),
            };
            let (status, payload) = respond(count.fetch_add(1, Ordering::SeqCst), &request);
            seen.lock().unwrap().push(request);
            let reply = format!(
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}",
                payload.len()
            );
            let _ = stream.write_all(reply.as_bytes());
        }
    });
    (url, log)
}

/// Vector `[len, 1, 0]` per text, so the order of results is checkable.
fn encode_reply(request: &Request) -> String {
    let parsed: serde_json::Value = serde_json::from_str(&request.body).unwrap();
    let vectors: Vec<Vec<f32>> = parsed["texts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| vec![t.as_str().unwrap().len() as f32, 1.0, 0.0])
        .collect();
    serde_json::json!({ "vectors": vectors }).to_string()
}

#[test]
fn encoder_batches_in_order() {
    let (url, log) = serve(|_, r| (200, encode_reply(r)));
    let mut config = RemoteEncoderConfig::new(url, 3);
    config.batch_size = 2;
    let encoder = RemoteEncoder::new(config);
    let texts = ["a", "bb", "ccc", "dddd", "eeeee"];
    let vectors = encoder.encode_batch(&texts).unwrap();
    let firsts: Vec<f32> = vectors.iter().map(|v| v.values()[0]).collect();
    assert_eq!(firsts, [1.0, 2.0, 3.0, 4.0, 5.0]);
    assert_eq!(log.lock().unwrap().len(), 3);
}

#[test]
fn encoder_retries_then_succeeds() {
    let (url, log) = serve(|i, r| if i == 0 { (500, "{}".into()) } else { (200, encode_reply(r)) });
    let encoder = RemoteEncoder::new(RemoteEncoderConfig::new(url, 3));
    assert_eq!(encoder.encode_batch(&["xy"]).unwrap().len(), 1);
    assert_eq!(log.lock().unwrap().len(), 2);
}

#[test]
fn encoder_gives_up_with_transport_error() {
    let (url, log) = serve(|_, _| (503, "{}".into()));
    let mut config = RemoteEncoderConfig::new(url, 3);
    config.max_retries = 1;
    let err = RemoteEncoder::new(config).encode_batch(&["x"]).unwrap_err();
    assert!(matches!(err, Error::Transport { retries: 1, .. }), "{err}");
    assert_eq!(log.lock().unwrap().len(), 2);
}

#[test]
fn encoder_sends_bearer_token_from_environment() {
    std::env::set_var("JOINRANK_TEST_ENCODER_TOKEN", "s3cret");
    let (url, log) = serve(|_, r| (200, encode_reply(r)));
    let mut config = RemoteEncoderConfig::new(url, 3);
    config.token_env = Some("JOINRANK_TEST_ENCODER_TOKEN".into());
    RemoteEncoder::new(config).encode_batch(&["x"]).unwrap();
    let log = log.lock().unwrap();
    assert!(log[0].headers.iter().any(|h| h == "authorization: Bearer s3cret" || h == "Authorization: Bearer s3cret"));
}

#[test]
fn provider_memoizes_remote_vectors() {
    let (url, log) = serve(|_, r| (200, encode_reply(r)));
    let provider = EmbeddingProvider::remote(RemoteEncoder::new(RemoteEncoderConfig::new(url, 3)));
    provider.embed("same text").unwrap();
    provider.embed("same text").unwrap();
    assert_eq!(log.lock().unwrap().len(), 1);
}

#[test]
fn encoder_rejects_wrong_vector_count() {
    let (url, _) = serve(|_, _| (200, r#"{"vectors": [[1, 0, 0]]}"#.into()));
    let err = RemoteEncoder::new(RemoteEncoderConfig::new(url, 3)).encode_batch(&["a", "b"]).unwrap_err();
    assert!(matches!(err, Error::Contract(_)), "{err}");
}

#[test]
fn language_model_decomposition_is_cached() {
    let reply = serde_json::json!({ "text": "<sub_c>client:gender</sub_c>\n<sub_c>loan:amount</sub_c>\n<FIN></FIN>" }).to_string();
    let (url, log) = serve(move |_, _| (200, reply.clone()));
    let client = DecompositionClient::RemoteLlm(Box::new(HttpLanguageModel::new(LlmConfig::new(url, "m"))));
    let cache = DecompositionCache::in_memory();
    let query = "Which female clients have loans?";
    let first = decompose_query(&client, &cache, query).unwrap();
    let texts: Vec<String> = first.sub_queries().iter().map(|s| s.text()).collect();
    assert_eq!(texts, ["client gender", "loan amount"]);
    let second = decompose_query(&client, &cache, query).unwrap();
    assert_eq!(second.sub_queries(), first.sub_queries());
    let log = log.lock().unwrap();
    assert_eq!(log.len(), 1);
    let body: serde_json::Value = serde_json::from_str(&log[0].body).unwrap();
    assert_eq!(body["model"], "m");
    assert!(body["prompt"].as_str().unwrap().ends_with(query) || body["prompt"].as_str().unwrap().contains(query));
}

#[test]
fn language_model_plain_text_reply() {
    let (url, _) = serve(|_, _| (200, "<sub_c>x:y</sub_c><FIN></FIN>".into()));
    let model = HttpLanguageModel::new(LlmConfig::new(url, "m"));
    assert_eq!(model.complete("p").unwrap(), "<sub_c>x:y</sub_c><FIN></FIN>");
}
