//! Text serialization of the four credentials.
//!
//! ```text
//! MTRK-PAYLOAD/1
//! user=<username>
//! pass=<password>
//! geo=<lat>,<lon>        fixed 6 decimals
//! face=64x32
//! <32 rows of 64 ramp characters>
//! ```
//!
//! Every line, including the last face row, ends in a single `\n`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::factors::{validate_username, FaceTemplate, GeoPoint, FACE_COLS, FACE_ROWS, RAMP};

const HEADER: &str = "MTRK-PAYLOAD/1";
const FACE_LINE: &str = "face=64x32";
const LINES: usize = 5 + FACE_ROWS;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PayloadError {
    #[error("malformed payload at line {line}")]
    Malformed { line: usize },
    #[error("payload field `{0}` contains characters the line format cannot carry")]
    InvalidField(&'static str),
}

/// Username, password, face template and location, as shipped to the merchant.
#[derive(Clone, PartialEq)]
pub struct TransactionPayload {
    username: String,
    password: String,
    face: FaceTemplate,
    geo: GeoPoint,
}

impl TransactionPayload {
    pub fn new(
        username: &str,
        password: &str,
        face: FaceTemplate,
        geo: GeoPoint,
    ) -> Result<Self, PayloadError> {
        validate_username(username).map_err(|_| PayloadError::InvalidField("user"))?;
        if password.chars().any(char::is_control) {
            return Err(PayloadError::InvalidField("pass"));
        }
        Ok(TransactionPayload {
            username: username.into(),
            password: password.into(),
            face,
            geo,
        })
    }

    pub fn username(&self) -> &str {
        &self.username
    }

    pub fn password(&self) -> &str {
        &self.password
    }

    pub fn face(&self) -> &FaceTemplate {
        &self.face
    }

    pub fn geo(&self) -> GeoPoint {
        self.geo
    }
}

impl core::fmt::Debug for TransactionPayload {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("TransactionPayload")
            .field("username", &self.username)
            .field("password", &"<redacted>")
            .field("geo", &self.geo)
            .finish_non_exhaustive()
    }
}

fn geo_text(p: GeoPoint) -> String {
    format!("{:.6},{:.6}", p.lat(), p.lon())
}

pub fn serialize_payload(payload: &TransactionPayload) -> Vec<u8> {
    let mut out = String::with_capacity(64 + FACE_ROWS * (FACE_COLS + 1));
    out.push_str(HEADER);
    out.push('\n');
    out.push_str("user=");
    out.push_str(&payload.username);
    out.push('\n');
    out.push_str("pass=");
    out.push_str(&payload.password);
    out.push('\n');
    out.push_str("geo=");
    out.push_str(&geo_text(payload.geo));
    out.push('\n');
    out.push_str(FACE_LINE);
    out.push('\n');
    for row in payload.face.rows() {
        out.push_str(row);
        out.push('\n');
    }
    out.into_bytes()
}

/// Strict inverse of [`serialize_payload`].
pub fn parse_payload(bytes: &[u8]) -> Result<TransactionPayload, PayloadError> {
    let bad = |line| PayloadError::Malformed { line };

    let text = core::str::from_utf8(bytes).map_err(|e| {
        let line = bytes[..e.valid_up_to()]
            .iter()
            .filter(|&&b| b == b'\n')
            .count()
            + 1;
        bad(line)
    })?;
    let body = text
        .strip_suffix('\n')
        .ok_or(bad(text.split('\n').count()))?;
    let lines: Vec<&str> = body.split('\n').collect();
    if lines.len() != LINES {
        return Err(bad(lines.len().min(LINES) + 1));
    }

    if lines[0] != HEADER {
        return Err(bad(1));
    }
    let username = lines[1].strip_prefix("user=").ok_or(bad(2))?;
    validate_username(username).map_err(|_| bad(2))?;
    let password = lines[2].strip_prefix("pass=").ok_or(bad(3))?;
    if password.chars().any(char::is_control) {
        return Err(bad(3));
    }
    let geo = parse_geo(lines[3]).ok_or(bad(4))?;
    if lines[4] != FACE_LINE {
        return Err(bad(5));
    }
    let rows = &lines[5..];
    if let Some(i) = rows
        .iter()
        .position(|row| row.len() != FACE_COLS || !row.bytes().all(|c| RAMP.contains(&c)))
    {
        return Err(bad(6 + i));
    }
    let face = FaceTemplate::from_rows(rows.iter().copied()).map_err(|_| bad(6))?;

    Ok(TransactionPayload {
        username: username.into(),
        password: password.into(),
        face,
        geo,
    })
}

fn parse_geo(line: &str) -> Option<GeoPoint> {
    let value = line.strip_prefix("geo=")?;
    let (lat, lon) = value.split_once(',')?;
    let point = GeoPoint::new(parse_fixed6(lat)?, parse_fixed6(lon)?).ok()?;
    // Only the canonical rendering is accepted.
    (geo_text(point) == value).then_some(point)
}

fn parse_fixed6(s: &str) -> Option<f64> {
    let digits = s.strip_prefix('-').unwrap_or(s);
    let (int, frac) = digits.split_once('.')?;
    if int.is_empty()
        || frac.len() != 6
        || !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit())
    {
        return None;
    }
    s.parse().ok()
}
