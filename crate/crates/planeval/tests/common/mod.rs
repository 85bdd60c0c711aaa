#![allow(dead_code)]

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use planeval::client::{ChatEndpointConfig, Clock};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn chat_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(&format!("chat/{name}"))).unwrap()
}

/// What the stub sends back for one request.
#[derive(Clone)]
pub enum Reply {
    Status(u16, String),
    /// Accept the request and never answer.
    Hang,
}

pub fn ok(body: String) -> Reply {
    Reply::Status(200, body)
}

/// A chat-completions envelope around `content`.
pub fn envelope(content: &str) -> String {
    serde_json::json!({
        "id": "stub",
        "object": "chat.completion",
        "choices": [{"index": 0, "message": {"role": "assistant", "content": content}, "finish_reason": "stop"}],
        "usage": {"prompt_tokens": 11, "completion_tokens": 7, "total_tokens": 18}
    })
    .to_string()
}

/// Loopback HTTP server answering from a script; the last reply repeats.
pub struct StubServer {
    pub base_url: String,
    pub requests: Arc<Mutex<Vec<String>>>,
    stop: Arc<AtomicBool>,
}

impl StubServer {
    pub fn start(script: Vec<Reply>) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let base_url = format!("http://{}/v1", listener.local_addr().unwrap());
        let requests = Arc::new(Mutex::new(Vec::new()));
        let stop = Arc::new(AtomicBool::new(false));
        let (reqs, halt) = (requests.clone(), stop.clone());
        thread::spawn(move || {
            let mut served = 0usize;
            for stream in listener.incoming() {
                if halt.load(Ordering::SeqCst) {
                    break;
                }
                let Ok(stream) = stream else { continue };
                let reply = script[served.min(script.len() - 1)].clone();
                served += 1;
                let reqs = reqs.clone();
                thread::spawn(move || serve(stream, reply, reqs));
            }
        });
        Self { base_url, requests, stop }
    }

    pub fn request_count(&self) -> usize {
        self.requests.lock().unwrap().len()
    }

    pub fn config(&self, key_env: &str) -> ChatEndpointConfig {
        ChatEndpointConfig {
            base_url: self.base_url.clone(),
            model_name: "stub-model".into(),
            api_key_env: key_env.into(),
            timeout_seconds: 5,
            max_retries: 3,
            backoff_base_ms: 1000,
            jitter: 0.25,
            ..Default::default()
        }
    }
}

impl Drop for StubServer {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        let addr = self.base_url.trim_start_matches("http://").trim_end_matches("/v1").to_string();
        let _ = TcpStream::connect(addr);
    }
}

fn serve(stream: TcpStream, reply: Reply, requests: Arc<Mutex<Vec<String>>>) {
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut head = String::new();
    let mut length = 0usize;
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line).unwrap_or(0) == 0 {
            return;
        }
        if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
            length = v.trim().parse().unwrap_or(0);
        }
        head.push_str(&line);
        if line == "\r\n" {
            break;
        }
    }
    let mut body = vec![0u8; length];
    let _ = reader.read_exact(&mut body);
    requests.lock().unwrap().push(format!("{head}{}", String::from_utf8_lossy(&body)));
    let mut stream = stream;
    match reply {
        Reply::Hang => thread::sleep(Duration::from_secs(30)),
        Reply::Status(code, text) => {
            let response = format!(
                "HTTP/1.1 {code} Stub\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{text}",
                text.len()
            );
            let _ = stream.write_all(response.as_bytes());
            let _ = stream.flush();
        }
    }
}

/// Clock that never waits and records every requested sleep.
#[derive(Default)]
pub struct StubClock {
    pub now: Mutex<Duration>,
    pub sleeps: Mutex<Vec<Duration>>,
}

impl Clock for StubClock {
    fn now(&self) -> Duration {
        *self.now.lock().unwrap()
    }

    fn sleep(&self, d: Duration) {
        self.sleeps.lock().unwrap().push(d);
        *self.now.lock().unwrap() += d;
    }
}

/// Sets a process-unique key variable and returns its name.
pub fn key_env(tag: &str) -> String {
    let name = format!("PLANEVAL_TEST_KEY_{tag}");
    std::env::set_var(&name, "test-key");
    name
}
