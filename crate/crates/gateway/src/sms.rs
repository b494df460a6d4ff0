//! SMS transports: a recording mock and an HTTP client for a third-party
//! messaging API.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Duration;

use fourfa_core::transport::{DeliveryId, SmsTransport, TransportError};
use serde::{Deserialize, Serialize};

use crate::config::{Config, Secret, SmsEndpoint};

/// One line of the mock transport's log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordedSms {
    pub id: String,
    pub to: String,
    pub body: String,
}

impl RecordedSms {
    /// The trailing digits of the message body.
    pub fn code(&self) -> Option<&str> {
        let code = self.body.rsplit(' ').next()?;
        (!code.is_empty() && code.bytes().all(|b| b.is_ascii_digit())).then_some(code)
    }
}

/// Appends every message to a JSONL file and hands out sequential ids.
pub struct MockSmsTransport {
    log: PathBuf,
    state: Mutex<u64>,
    echo: bool,
}

impl MockSmsTransport {
    pub fn new(log: impl Into<PathBuf>) -> Self {
        MockSmsTransport {
            log: log.into(),
            state: Mutex::new(0),
            echo: false,
        }
    }

    /// Also print each message on stderr (for the interactive demo).
    pub fn echoing(mut self) -> Self {
        self.echo = true;
        self
    }

    pub fn log_path(&self) -> &Path {
        &self.log
    }

    pub fn read_log(path: &Path) -> std::io::Result<Vec<RecordedSms>> {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(e),
        };
        text.lines()
            .filter(|l| !l.is_empty())
            .map(|l| serde_json::from_str(l).map_err(std::io::Error::other))
            .collect()
    }
}

impl SmsTransport for MockSmsTransport {
    fn send(&self, destination: &str, body: &str) -> Result<DeliveryId, TransportError> {
        let mut counter = self.state.lock().unwrap_or_else(|e| e.into_inner());
        *counter += 1;
        let entry = RecordedSms {
            id: format!("mock-{:06}", *counter),
            to: destination.into(),
            body: body.into(),
        };
        let mut line = serde_json::to_string(&entry).expect("plain struct serializes");
        line.push('\n');
        OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.log)
            .and_then(|mut f| f.write_all(line.as_bytes()))
            .map_err(|e| TransportError(format!("mock log {}: {e}", self.log.display())))?;
        if self.echo {
            eprintln!("[mock SMS to {}] {}", entry.to, entry.body);
        }
        Ok(DeliveryId(entry.id))
    }
}

#[derive(Serialize)]
struct SendRequest<'a> {
    to: &'a str,
    body: &'a str,
}

#[derive(Deserialize)]
struct SendResponse {
    #[serde(alias = "sid", alias = "message_id")]
    id: String,
}

/// POSTs `{"to", "body"}` as JSON with a bearer token and expects `{"id"}`
/// (or `sid`) back.
pub struct HttpSmsTransport {
    endpoint: String,
    token: Secret,
    agent: ureq::Agent,
}

impl HttpSmsTransport {
    pub fn new(endpoint: impl Into<String>, token: Secret) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(10)))
            .http_status_as_error(false)
            .build()
            .new_agent();
        HttpSmsTransport {
            endpoint: endpoint.into(),
            token,
            agent,
        }
    }
}

impl SmsTransport for HttpSmsTransport {
    fn send(&self, destination: &str, body: &str) -> Result<DeliveryId, TransportError> {
        let mut response = self
            .agent
            .post(&self.endpoint)
            .header("Authorization", &format!("Bearer {}", self.token.expose()))
            .send_json(SendRequest {
                to: destination,
                body,
            })
            .map_err(|e| {
                TransportError(format!("request failed: {}", redact_transport_error(&e)))
            })?;
        let status = response.status();
        if !status.is_success() {
            return Err(TransportError(format!("provider answered {status}")));
        }
        let parsed: SendResponse = response
            .body_mut()
            .read_json()
            .map_err(|_| TransportError("provider response has no message id".into()))?;
        Ok(DeliveryId(parsed.id))
    }
}

fn redact_transport_error(e: &ureq::Error) -> String {
    // ureq errors describe the connection, never the request body.
    e.to_string()
}

pub fn transport_from_config(config: &Config) -> Box<dyn SmsTransport + Send + Sync> {
    match &config.sms_endpoint {
        SmsEndpoint::Mock => Box::new(MockSmsTransport::new(&config.sms_mock_log)),
        SmsEndpoint::Http(url) => {
            Box::new(HttpSmsTransport::new(url.clone(), config.sms_token.clone()))
        }
    }
}
