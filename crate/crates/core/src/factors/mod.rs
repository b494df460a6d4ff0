//! The four verification factors: password, one-time code, face template
//! and geofence.

mod face;
mod geo;
mod otp;
mod user;

pub use face::{
    face_to_template, match_face, render_template, FaceTemplate, DEFAULT_FACE_THRESHOLD,
    FACE_CELLS, FACE_COLS, FACE_ROWS, RAMP,
};
pub use geo::{geo_distance, verify_location, GeoPoint, DEFAULT_GEOFENCE_M, EARTH_RADIUS_M};
pub use otp::{issue_otp, verify_otp, OtpChallenge, OtpDigits, DEFAULT_OTP_TTL_S, OTP_ATTEMPTS};
pub use user::{enroll_user, validate_username, verify_password, UserRecord};

use crate::transport::TransportError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FactorError {
    #[error("username must be 1..=64 bytes without control characters")]
    InvalidUsername,
    #[error("latitude must be in [-90, 90] and longitude in (-180, 180]")]
    InvalidLocation,
    #[error("face image is {width}x{height}; at least 64x32 is required")]
    ImageTooSmall { width: u32, height: u32 },
    #[error("face template must be 32 rows of 64 ramp characters")]
    InvalidTemplate,
    #[error("one-time code TTL must be positive")]
    InvalidTtl,
    #[error("one-time code challenge has no attempts left")]
    ChallengeLocked,
    #[error(transparent)]
    Transport(#[from] TransportError),
}
