//! Receiving side: open the envelope, parse the credentials, check them.

use crate::envelope::{open_envelope, EnvelopeError};
use crate::factors::{match_face, verify_location, verify_password, UserRecord};
use crate::flow::{parse_payload, TransactionPayload};
use crate::raster::RasterImage;
use crate::store::UserStore;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Approve,
    Deny,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Reason {
    Ok,
    Tamper,
    NoEnvelope,
    Malformed,
    UnknownUser,
    Password,
    Face,
    Geolocation,
}

impl Reason {
    pub fn as_str(self) -> &'static str {
        match self {
            Reason::Ok => "ok",
            Reason::Tamper => "tamper",
            Reason::NoEnvelope => "no-envelope",
            Reason::Malformed => "malformed",
            Reason::UnknownUser => "unknown-user",
            Reason::Password => "password",
            Reason::Face => "face",
            Reason::Geolocation => "geolocation",
        }
    }
}

impl core::fmt::Display for Reason {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Approve only ever pairs with [`Reason::Ok`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Decision {
    outcome: Outcome,
    reason: Reason,
}

impl Decision {
    pub const APPROVE: Decision = Decision {
        outcome: Outcome::Approve,
        reason: Reason::Ok,
    };

    pub fn deny(reason: Reason) -> Self {
        debug_assert!(reason != Reason::Ok);
        Decision {
            outcome: Outcome::Deny,
            reason,
        }
    }

    pub fn outcome(&self) -> Outcome {
        self.outcome
    }

    pub fn reason(&self) -> Reason {
        self.reason
    }

    pub fn is_approved(&self) -> bool {
        self.outcome == Outcome::Approve
    }
}

impl From<&EnvelopeError> for Reason {
    fn from(e: &EnvelopeError) -> Self {
        match e {
            EnvelopeError::BadMagic | EnvelopeError::CapacityExceeded { .. } => Reason::NoEnvelope,
            EnvelopeError::UnsupportedVersion(_) => Reason::Malformed,
            EnvelopeError::TruncatedEnvelope { .. }
            | EnvelopeError::TamperDetected
            | EnvelopeError::WrongKey => Reason::Tamper,
        }
    }
}

/// Password, then face, then geofence; the first failure decides.
pub fn authenticate_payload(
    payload: &TransactionPayload,
    record: &UserRecord,
    radius_m: f64,
    face_threshold: f64,
) -> Decision {
    if !verify_password(record, payload.password().as_bytes()) {
        return Decision::deny(Reason::Password);
    }
    if match_face(payload.face(), record.face()) < face_threshold {
        return Decision::deny(Reason::Face);
    }
    if !verify_location(record, payload.geo(), radius_m) {
        return Decision::deny(Reason::Geolocation);
    }
    Decision::APPROVE
}

pub fn process_envelope(
    image: &RasterImage,
    mac_pass: &[u8],
    key_pass: &[u8],
    store: &dyn UserStore,
    radius_m: f64,
    face_threshold: f64,
) -> Decision {
    let bytes = match open_envelope(image, mac_pass, key_pass) {
        Ok(bytes) => bytes,
        Err(e) => return Decision::deny(Reason::from(&e)),
    };
    let Ok(payload) = parse_payload(&bytes) else {
        return Decision::deny(Reason::Malformed);
    };
    // A store failure is reported like an unknown user.
    let Ok(Some(record)) = store.get(payload.username()) else {
        return Decision::deny(Reason::UnknownUser);
    };
    authenticate_payload(&payload, &record, radius_m, face_threshold)
}
