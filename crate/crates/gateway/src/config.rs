//! Gateway configuration: a TOML file, overridden by `FOURFA_*` variables,
//! with defaults for everything except the store path and the two envelope
//! passphrases.

use std::path::{Path, PathBuf};

use fourfa_core::factors::{
    OtpDigits, DEFAULT_FACE_THRESHOLD, DEFAULT_GEOFENCE_M, DEFAULT_OTP_TTL_S,
};
use fourfa_core::flow::{FlowPolicy, SealKeys, DEFAULT_SESSION_TTL_S};

pub const DEFAULT_LISTEN: &str = "127.0.0.1:8080";

/// A string that never prints.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct Secret(String);

impl Secret {
    pub fn new(s: impl Into<String>) -> Self {
        Secret(s.into())
    }

    pub fn expose(&self) -> &str {
        &self.0
    }
}

impl std::fmt::Debug for Secret {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("<redacted>")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SmsEndpoint {
    Mock,
    Http(String),
}

#[derive(Debug, Clone)]
pub struct Config {
    pub store_path: PathBuf,
    pub sms_endpoint: SmsEndpoint,
    pub sms_token: Secret,
    /// Where the mock transport appends dispatched messages.
    pub sms_mock_log: PathBuf,
    pub geofence_radius: f64,
    pub otp_ttl: u64,
    pub otp_digits: OtpDigits,
    pub face_threshold: f64,
    pub mac_pass: Secret,
    pub key_pass: Secret,
    pub listen_addr: String,
}

impl Config {
    pub fn policy(&self) -> FlowPolicy {
        FlowPolicy {
            face_threshold: self.face_threshold,
            geofence_radius_m: self.geofence_radius,
            otp_digits: self.otp_digits,
            otp_ttl_s: self.otp_ttl,
            session_ttl_s: DEFAULT_SESSION_TTL_S,
        }
    }

    pub fn seal_keys(&self) -> SealKeys {
        SealKeys {
            mac_pass: self.mac_pass.expose().as_bytes().to_vec(),
            key_pass: self.key_pass.expose().as_bytes().to_vec(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("invalid configuration field `{field}`: {message}")]
pub struct ConfigError {
    pub field: &'static str,
    pub message: String,
}

fn invalid(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        field,
        message: message.into(),
    }
}

/// (config key, environment variable)
const FIELDS: [(&str, &str); 11] = [
    ("store_path", "FOURFA_STORE"),
    ("sms_endpoint", "FOURFA_SMS_ENDPOINT"),
    ("sms_token", "FOURFA_SMS_TOKEN"),
    ("sms_mock_log", "FOURFA_SMS_LOG"),
    ("geofence_radius", "FOURFA_GEOFENCE_M"),
    ("otp_ttl", "FOURFA_OTP_TTL_S"),
    ("otp_digits", "FOURFA_OTP_DIGITS"),
    ("face_threshold", "FOURFA_FACE_THRESHOLD"),
    ("mac_pass", "FOURFA_MAC_PASS"),
    ("key_pass", "FOURFA_KEY_PASS"),
    ("listen_addr", "FOURFA_LISTEN"),
];

/// Raw values by key after merging file and environment.
struct Merged {
    table: toml::Table,
}

impl Merged {
    fn text(&self, field: &'static str) -> Result<Option<String>, ConfigError> {
        match self.table.get(field) {
            None => Ok(None),
            Some(toml::Value::String(s)) => Ok(Some(s.clone())),
            Some(_) => Err(invalid(field, "expected a string")),
        }
    }

    fn number(&self, field: &'static str) -> Result<Option<f64>, ConfigError> {
        match self.table.get(field) {
            None => Ok(None),
            Some(toml::Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(toml::Value::Float(f)) => Ok(Some(*f)),
            Some(toml::Value::String(s)) => s
                .trim()
                .parse()
                .map(Some)
                .map_err(|_| invalid(field, "expected a number")),
            Some(_) => Err(invalid(field, "expected a number")),
        }
    }

    fn integer(&self, field: &'static str) -> Result<Option<i64>, ConfigError> {
        match self.table.get(field) {
            None => Ok(None),
            Some(toml::Value::Integer(i)) => Ok(Some(*i)),
            Some(toml::Value::String(s)) => s
                .trim()
                .parse()
                .map(Some)
                .map_err(|_| invalid(field, "expected an integer")),
            Some(_) => Err(invalid(field, "expected an integer")),
        }
    }
}

/// Reads `file` (if given) and applies overrides from `env`.
///
/// `env` is a lookup such as `|k| std::env::var(k).ok()`.
pub fn load_config(
    file: Option<&Path>,
    env: impl Fn(&str) -> Option<String>,
) -> Result<Config, ConfigError> {
    let mut table = match file {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| invalid("config", format!("{}: {e}", path.display())))?;
            // The parser's message may quote file contents; report position only.
            text.parse::<toml::Table>().map_err(|e| {
                let at = e
                    .span()
                    .map(|s| format!(" at byte {}", s.start))
                    .unwrap_or_default();
                invalid("config", format!("not valid TOML{at}"))
            })?
        }
        None => toml::Table::new(),
    };
    if let Some(unknown) = table.keys().find(|k| !FIELDS.iter().any(|(f, _)| f == k)) {
        let unknown = unknown.clone();
        return Err(invalid("config", format!("unknown key `{unknown}`")));
    }
    for (field, var) in FIELDS {
        if let Some(value) = env(var) {
            table.insert(field.into(), toml::Value::String(value));
        }
    }
    let m = Merged { table };

    let store_path = PathBuf::from(
        m.text("store_path")?
            .filter(|s| !s.is_empty())
            .ok_or_else(|| invalid("store_path", "required"))?,
    );

    let sms_endpoint = match m.text("sms_endpoint")?.as_deref() {
        None | Some("mock") => SmsEndpoint::Mock,
        Some(url) if url.starts_with("http://") || url.starts_with("https://") => {
            SmsEndpoint::Http(url.into())
        }
        Some(_) => {
            return Err(invalid(
                "sms_endpoint",
                "must be \"mock\" or an http(s) URL",
            ))
        }
    };
    let sms_token = Secret(m.text("sms_token")?.unwrap_or_default());
    let sms_mock_log = m
        .text("sms_mock_log")?
        .map(PathBuf::from)
        .unwrap_or_else(|| store_path.with_extension("sms.log"));

    let geofence_radius = m.number("geofence_radius")?.unwrap_or(DEFAULT_GEOFENCE_M);
    if !(geofence_radius.is_finite() && geofence_radius > 0.0) {
        return Err(invalid(
            "geofence_radius",
            "must be a positive number of meters",
        ));
    }
    let otp_ttl = m.integer("otp_ttl")?.unwrap_or(DEFAULT_OTP_TTL_S as i64);
    if otp_ttl <= 0 {
        return Err(invalid("otp_ttl", "must be a positive number of seconds"));
    }
    let otp_digits = match m.integer("otp_digits")? {
        None => OtpDigits::Six,
        Some(n) => u32::try_from(n)
            .ok()
            .and_then(OtpDigits::from_count)
            .ok_or_else(|| invalid("otp_digits", "must be 4 or 6"))?,
    };
    let face_threshold = m
        .number("face_threshold")?
        .unwrap_or(DEFAULT_FACE_THRESHOLD);
    if !(face_threshold > 0.0 && face_threshold <= 1.0) {
        return Err(invalid("face_threshold", "must be in (0, 1]"));
    }

    let secret = |field: &'static str| -> Result<Secret, ConfigError> {
        m.text(field)?
            .filter(|s| !s.is_empty())
            .map(Secret)
            .ok_or_else(|| invalid(field, "required"))
    };
    let mac_pass = secret("mac_pass")?;
    let key_pass = secret("key_pass")?;
    let listen_addr = m
        .text("listen_addr")?
        .unwrap_or_else(|| DEFAULT_LISTEN.into());

    Ok(Config {
        store_path,
        sms_endpoint,
        sms_token,
        sms_mock_log,
        geofence_radius,
        otp_ttl: otp_ttl as u64,
        otp_digits,
        face_threshold,
        mac_pass,
        key_pass,
        listen_addr,
    })
}
