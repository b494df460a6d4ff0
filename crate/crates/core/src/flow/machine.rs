use alloc::string::String;
use alloc::vec::Vec;

use base64::Engine as _;
use rand_core::CryptoRng;

use super::payload::{serialize_payload, PayloadError, TransactionPayload};
use super::session::{DenyReason, Session, SessionId, SessionState};
use crate::crypto::Block64;
use crate::envelope::{seal_envelope, EnvelopeError};
use crate::factors::{
    face_to_template, issue_otp, match_face, validate_username, verify_location, verify_otp,
    verify_password, FactorError, GeoPoint, OtpDigits, DEFAULT_FACE_THRESHOLD, DEFAULT_GEOFENCE_M,
    DEFAULT_OTP_TTL_S,
};
use crate::raster::RasterImage;
use crate::store::{StoreError, UserStore};
use crate::transport::{SmsTransport, TransportError};

pub const DEFAULT_SESSION_TTL_S: u64 = 15 * 60;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FlowError {
    #[error("username must be 1..=64 bytes without control characters")]
    InvalidUsername,
    #[error("event {event} is not valid in state {state}")]
    InvalidTransition {
        state: &'static str,
        event: &'static str,
    },
    #[error("session has ended")]
    TerminalSession,
    #[error("session is not authenticated")]
    NotAuthenticated,
    #[error("password does not match the enrolled credential")]
    CredentialMismatch,
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Factor(FactorError),
    #[error(transparent)]
    Envelope(#[from] EnvelopeError),
    #[error(transparent)]
    Payload(#[from] PayloadError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

impl From<FactorError> for FlowError {
    fn from(e: FactorError) -> Self {
        match e {
            FactorError::Transport(t) => FlowError::Transport(t),
            FactorError::InvalidUsername => FlowError::InvalidUsername,
            other => FlowError::Factor(other),
        }
    }
}

/// Inputs to the session state machine, one per factor step.
#[derive(Clone)]
pub enum FactorEvent {
    PasswordSubmitted(String),
    OtpRequested,
    OtpSubmitted(String),
    FaceSubmitted(RasterImage),
    LocationReported(GeoPoint),
    FinalizeRequested(RasterImage),
}

impl FactorEvent {
    pub fn name(&self) -> &'static str {
        match self {
            FactorEvent::PasswordSubmitted(_) => "password_submitted",
            FactorEvent::OtpRequested => "otp_requested",
            FactorEvent::OtpSubmitted(_) => "otp_submitted",
            FactorEvent::FaceSubmitted(_) => "face_submitted",
            FactorEvent::LocationReported(_) => "location_reported",
            FactorEvent::FinalizeRequested(_) => "finalize_requested",
        }
    }
}

impl core::fmt::Debug for FactorEvent {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowPolicy {
    pub face_threshold: f64,
    pub geofence_radius_m: f64,
    pub otp_digits: OtpDigits,
    pub otp_ttl_s: u64,
    pub session_ttl_s: u64,
}

impl Default for FlowPolicy {
    fn default() -> Self {
        FlowPolicy {
            face_threshold: DEFAULT_FACE_THRESHOLD,
            geofence_radius_m: DEFAULT_GEOFENCE_M,
            otp_digits: OtpDigits::Six,
            otp_ttl_s: DEFAULT_OTP_TTL_S,
            session_ttl_s: DEFAULT_SESSION_TTL_S,
        }
    }
}

/// Passphrases for the envelope MAC and cipher keys.
#[derive(Clone)]
pub struct SealKeys {
    pub mac_pass: Vec<u8>,
    pub key_pass: Vec<u8>,
}

impl core::fmt::Debug for SealKeys {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str("SealKeys(..)")
    }
}

/// Everything a transition may consult besides the session itself.
pub struct FlowContext<'a> {
    pub store: &'a dyn UserStore,
    pub transport: &'a dyn SmsTransport,
    pub rng: &'a mut dyn CryptoRng,
    pub policy: &'a FlowPolicy,
    pub keys: &'a SealKeys,
}

pub fn begin_session(
    username: &str,
    now: u64,
    rng: &mut dyn CryptoRng,
) -> Result<Session, FlowError> {
    validate_username(username)?;
    let mut token = [0u8; 16];
    rng.fill_bytes(&mut token);
    Ok(Session {
        id: SessionId(base64::engine::general_purpose::URL_SAFE_NO_PAD.encode(token)),
        username: username.into(),
        state: SessionState::AwaitPassword,
        challenge: None,
        face_submitted: None,
        reported_location: None,
        created_at: now,
        verified_password: None,
    })
}

/// Applies one event. On error the session is left exactly as it was.
///
/// Returns the sealed stego image when the event completes the transaction.
pub fn apply_event(
    session: &mut Session,
    event: FactorEvent,
    ctx: &mut FlowContext<'_>,
    now: u64,
) -> Result<Option<RasterImage>, FlowError> {
    if session.state.is_terminal()
        || now > session.created_at.saturating_add(ctx.policy.session_ttl_s)
    {
        return Err(FlowError::TerminalSession);
    }
    let mut next = session.clone();
    let out = step(&mut next, event, ctx, now)?;
    *session = next;
    Ok(out)
}

fn step(
    s: &mut Session,
    event: FactorEvent,
    ctx: &mut FlowContext<'_>,
    now: u64,
) -> Result<Option<RasterImage>, FlowError> {
    use FactorEvent as E;
    use SessionState as S;

    match (s.state, event) {
        (S::AwaitPassword, E::PasswordSubmitted(password)) => {
            let ok = match ctx.store.get(&s.username)? {
                Some(record) => verify_password(&record, password.as_bytes()),
                None => {
                    // Same work as a real check so unknown users are not distinguishable.
                    let _ = crate::crypto::hmac_sha256(&[0; 16], password.as_bytes());
                    false
                }
            };
            if ok {
                s.state = S::AwaitOtp;
                s.verified_password = Some(password);
            } else {
                s.end(S::Denied(DenyReason::Password));
            }
        }
        (S::AwaitOtp, E::OtpRequested) => {
            let p = ctx.policy;
            let challenge = issue_otp(
                p.otp_digits,
                now,
                p.otp_ttl_s,
                s.id.as_str(),
                &mut *ctx.rng,
                ctx.transport,
            )?;
            s.challenge = Some(challenge);
            s.state = S::OtpPending;
        }
        (S::OtpPending, E::OtpSubmitted(code)) => {
            let challenge = s.challenge.as_mut().ok_or(FlowError::NotAuthenticated)?;
            match verify_otp(challenge, &code, now) {
                Ok(true) => {
                    s.state = S::ParallelChecks {
                        face_done: false,
                        geo_done: false,
                    }
                }
                Ok(false) | Err(_) => s.end(S::Denied(DenyReason::Otp)),
            }
        }
        (
            S::ParallelChecks {
                face_done: false,
                geo_done,
            },
            E::FaceSubmitted(image),
        ) => {
            let template = face_to_template(&image)?;
            let matched = match ctx.store.get(&s.username)? {
                Some(record) => match_face(&template, record.face()) >= ctx.policy.face_threshold,
                None => false,
            };
            s.face_submitted = Some(template);
            if matched {
                s.state = checks_state(true, geo_done);
            } else {
                s.end(S::Denied(DenyReason::Face));
            }
        }
        (
            S::ParallelChecks {
                face_done,
                geo_done: false,
            },
            E::LocationReported(point),
        ) => {
            let inside = match ctx.store.get(&s.username)? {
                Some(record) => verify_location(&record, point, ctx.policy.geofence_radius_m),
                None => false,
            };
            s.reported_location = Some(point);
            if inside {
                s.state = checks_state(face_done, true);
            } else {
                s.end(S::Denied(DenyReason::Geolocation));
            }
        }
        (S::Authenticated, E::FinalizeRequested(cover)) => {
            let password = s
                .verified_password
                .clone()
                .ok_or(FlowError::NotAuthenticated)?;
            let payload = assemble_payload(s, ctx.store, &password)?;
            let mut iv = [0u8; 8];
            ctx.rng.fill_bytes(&mut iv);
            let keys = ctx.keys;
            let stego = finalize_transaction(
                s,
                &payload,
                &cover,
                &keys.mac_pass,
                &keys.key_pass,
                Block64(iv),
            )?;
            return Ok(Some(stego));
        }
        (state, event) => {
            return Err(FlowError::InvalidTransition {
                state: state.name(),
                event: event.name(),
            });
        }
    }
    Ok(None)
}

fn checks_state(face_done: bool, geo_done: bool) -> SessionState {
    if face_done && geo_done {
        SessionState::Authenticated
    } else {
        SessionState::ParallelChecks {
            face_done,
            geo_done,
        }
    }
}

/// Collects the four credentials of an authenticated session.
pub fn assemble_payload(
    session: &Session,
    store: &dyn UserStore,
    password: &str,
) -> Result<TransactionPayload, FlowError> {
    if session.state != SessionState::Authenticated {
        return Err(FlowError::NotAuthenticated);
    }
    let (Some(face), Some(geo)) = (session.face_submitted.clone(), session.reported_location)
    else {
        return Err(FlowError::NotAuthenticated);
    };
    let record = store
        .get(&session.username)?
        .ok_or(FlowError::NotAuthenticated)?;
    if !verify_password(&record, password.as_bytes()) {
        return Err(FlowError::CredentialMismatch);
    }
    Ok(TransactionPayload::new(
        &session.username,
        password,
        face,
        geo,
    )?)
}

/// Seals the serialized payload into `cover` and completes the session.
pub fn finalize_transaction(
    session: &mut Session,
    payload: &TransactionPayload,
    cover: &RasterImage,
    mac_pass: &[u8],
    key_pass: &[u8],
    iv: Block64,
) -> Result<RasterImage, FlowError> {
    if session.state.is_terminal() {
        return Err(FlowError::TerminalSession);
    }
    if session.state != SessionState::Authenticated {
        return Err(FlowError::NotAuthenticated);
    }
    let stego = seal_envelope(cover, &serialize_payload(payload), mac_pass, key_pass, iv)?;
    session.end(SessionState::Completed);
    Ok(stego)
}
