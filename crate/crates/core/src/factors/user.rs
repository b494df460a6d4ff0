use alloc::string::String;

use sha2::{Digest, Sha256};

use super::{face_to_template, FaceTemplate, FactorError, GeoPoint};
use crate::crypto::ct_eq;
use crate::raster::RasterImage;

/// An enrolled identity.
#[derive(Clone, PartialEq)]
pub struct UserRecord {
    username: String,
    pw_salt: [u8; 16],
    pw_digest: [u8; 32],
    face: FaceTemplate,
    home: GeoPoint,
}

impl UserRecord {
    /// Reassembles a stored record, checking the username.
    pub fn from_parts(
        username: &str,
        pw_salt: [u8; 16],
        pw_digest: [u8; 32],
        face: FaceTemplate,
        home: GeoPoint,
    ) -> Result<Self, FactorError> {
        validate_username(username)?;
        Ok(UserRecord {
            username: username.into(),
            pw_salt,
            pw_digest,
            face,
            home,
        })
    }

    pub fn username(&self) -> &str {
        &self.username
    }

    pub fn pw_salt(&self) -> &[u8; 16] {
        &self.pw_salt
    }

    pub fn pw_digest(&self) -> &[u8; 32] {
        &self.pw_digest
    }

    pub fn face(&self) -> &FaceTemplate {
        &self.face
    }

    pub fn home(&self) -> GeoPoint {
        self.home
    }

    pub fn set_home(&mut self, home: GeoPoint) {
        self.home = home;
    }
}

impl core::fmt::Debug for UserRecord {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("UserRecord")
            .field("username", &self.username)
            .field("home", &self.home)
            .finish_non_exhaustive()
    }
}

pub fn validate_username(username: &str) -> Result<(), FactorError> {
    if username.is_empty() || username.len() > 64 || username.chars().any(char::is_control) {
        return Err(FactorError::InvalidUsername);
    }
    Ok(())
}

fn password_digest(salt: &[u8; 16], password: &[u8]) -> [u8; 32] {
    Sha256::new()
        .chain_update(salt)
        .chain_update(password)
        .finalize()
        .into()
}

pub fn enroll_user(
    username: &str,
    password: &[u8],
    face_image: &RasterImage,
    home: GeoPoint,
    salt: [u8; 16],
) -> Result<UserRecord, FactorError> {
    validate_username(username)?;
    let face = face_to_template(face_image)?;
    Ok(UserRecord {
        username: username.into(),
        pw_salt: salt,
        pw_digest: password_digest(&salt, password),
        face,
        home,
    })
}

pub fn verify_password(record: &UserRecord, password: &[u8]) -> bool {
    ct_eq(
        &password_digest(&record.pw_salt, password),
        &record.pw_digest,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::Channels;

    fn face() -> RasterImage {
        RasterImage::filled(64, 32, Channels::Rgb, [40, 40, 40, 0]).unwrap()
    }

    fn home() -> GeoPoint {
        GeoPoint::new(30.3165, 78.0322).unwrap()
    }

    #[test]
    fn enroll_then_verify() {
        let rec = enroll_user("alice", b"correct horse", &face(), home(), [1; 16]).unwrap();
        assert!(verify_password(&rec, b"correct horse"));
        assert!(!verify_password(&rec, b"correct horsf"));
        assert!(!verify_password(&rec, b""));
    }

    #[test]
    fn username_rules() {
        for bad in ["", "a\nb", "tab\there", &"x".repeat(65)] {
            assert_eq!(
                enroll_user(bad, b"pw", &face(), home(), [0; 16]).unwrap_err(),
                FactorError::InvalidUsername
            );
        }
        assert!(enroll_user(&"x".repeat(64), b"pw", &face(), home(), [0; 16]).is_ok());
    }

    #[test]
    fn salt_changes_digest() {
        let a = enroll_user("bob", b"same", &face(), home(), [1; 16]).unwrap();
        let b = enroll_user("bob", b"same", &face(), home(), [2; 16]).unwrap();
        assert_ne!(a.pw_digest(), b.pw_digest());
    }

    #[test]
    fn small_face_image() {
        let tiny = RasterImage::filled(63, 32, Channels::Rgb, [0; 4]).unwrap();
        assert_eq!(
            enroll_user("carol", b"pw", &tiny, home(), [0; 16]).unwrap_err(),
            FactorError::ImageTooSmall {
                width: 63,
                height: 32
            }
        );
    }
}
