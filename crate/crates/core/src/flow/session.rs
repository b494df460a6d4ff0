use alloc::string::String;

use crate::factors::{FaceTemplate, GeoPoint, OtpChallenge};

/// 128-bit random token, base64url without padding.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SessionId(pub(crate) String);

impl SessionId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl core::fmt::Display for SessionId {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DenyReason {
    Password,
    Otp,
    Face,
    Geolocation,
}

impl DenyReason {
    pub fn as_str(self) -> &'static str {
        match self {
            DenyReason::Password => "password",
            DenyReason::Otp => "otp",
            DenyReason::Face => "face",
            DenyReason::Geolocation => "geolocation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SessionState {
    AwaitPassword,
    AwaitOtp,
    OtpPending,
    ParallelChecks { face_done: bool, geo_done: bool },
    Authenticated,
    Completed,
    Denied(DenyReason),
}

impl SessionState {
    pub fn is_terminal(self) -> bool {
        matches!(self, SessionState::Completed | SessionState::Denied(_))
    }

    pub fn name(self) -> &'static str {
        match self {
            SessionState::AwaitPassword => "await_password",
            SessionState::AwaitOtp => "await_otp",
            SessionState::OtpPending => "otp_pending",
            SessionState::ParallelChecks { .. } => "parallel_checks",
            SessionState::Authenticated => "authenticated",
            SessionState::Completed => "completed",
            SessionState::Denied(_) => "denied",
        }
    }
}

/// One transaction's progress through the factors.
#[derive(Clone, PartialEq)]
pub struct Session {
    pub(crate) id: SessionId,
    pub(crate) username: String,
    pub(crate) state: SessionState,
    pub(crate) challenge: Option<OtpChallenge>,
    pub(crate) face_submitted: Option<FaceTemplate>,
    pub(crate) reported_location: Option<GeoPoint>,
    pub(crate) created_at: u64,
    // Held from the password step until the session ends; the payload carries it.
    pub(crate) verified_password: Option<String>,
}

impl Session {
    pub fn id(&self) -> &SessionId {
        &self.id
    }

    pub fn username(&self) -> &str {
        &self.username
    }

    pub fn state(&self) -> SessionState {
        self.state
    }

    pub fn challenge(&self) -> Option<&OtpChallenge> {
        self.challenge.as_ref()
    }

    pub fn face_submitted(&self) -> Option<&FaceTemplate> {
        self.face_submitted.as_ref()
    }

    pub fn reported_location(&self) -> Option<GeoPoint> {
        self.reported_location
    }

    pub fn created_at(&self) -> u64 {
        self.created_at
    }

    pub(crate) fn end(&mut self, state: SessionState) {
        self.state = state;
        self.verified_password = None;
    }
}

impl core::fmt::Debug for Session {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Session")
            .field("id", &self.id)
            .field("username", &self.username)
            .field("state", &self.state)
            .field("created_at", &self.created_at)
            .finish_non_exhaustive()
    }
}
