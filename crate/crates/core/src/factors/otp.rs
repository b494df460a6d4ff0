use alloc::format;

use rand_core::CryptoRng;
use sha2::{Digest, Sha256};

use super::FactorError;
use crate::crypto::ct_eq;
use crate::transport::{DeliveryId, SmsTransport};

pub const DEFAULT_OTP_TTL_S: u64 = 120;
pub const OTP_ATTEMPTS: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum OtpDigits {
    Four = 4,
    #[default]
    Six = 6,
}

impl OtpDigits {
    pub fn from_count(n: u32) -> Option<Self> {
        match n {
            4 => Some(OtpDigits::Four),
            6 => Some(OtpDigits::Six),
            _ => None,
        }
    }

    pub const fn count(self) -> u32 {
        self as u32
    }

    const fn modulus(self) -> u32 {
        10u32.pow(self as u32)
    }
}

/// A salted hash commitment to an issued code. The code itself is not kept.
#[derive(Clone, PartialEq, Eq)]
pub struct OtpChallenge {
    salt: [u8; 16],
    commitment: [u8; 32],
    digits: OtpDigits,
    issued_at: u64,
    ttl: u64,
    attempts_left: u8,
    delivery: DeliveryId,
}

impl OtpChallenge {
    pub fn digits(&self) -> OtpDigits {
        self.digits
    }

    pub fn issued_at(&self) -> u64 {
        self.issued_at
    }

    pub fn ttl(&self) -> u64 {
        self.ttl
    }

    pub fn attempts_left(&self) -> u8 {
        self.attempts_left
    }

    pub fn delivery(&self) -> &DeliveryId {
        &self.delivery
    }

    pub fn commitment(&self) -> &[u8; 32] {
        &self.commitment
    }
}

impl core::fmt::Debug for OtpChallenge {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("OtpChallenge")
            .field("digits", &self.digits)
            .field("issued_at", &self.issued_at)
            .field("ttl", &self.ttl)
            .field("attempts_left", &self.attempts_left)
            .finish_non_exhaustive()
    }
}

fn commit(salt: &[u8; 16], code: &[u8]) -> [u8; 32] {
    Sha256::new()
        .chain_update(salt)
        .chain_update(code)
        .finalize()
        .into()
}

/// Uniform draw from `[0, modulus)` by rejection.
fn uniform_below<R: CryptoRng + ?Sized>(rng: &mut R, modulus: u32) -> u32 {
    let zone = u32::MAX - u32::MAX % modulus;
    loop {
        let v = rng.next_u32();
        if v < zone {
            return v % modulus;
        }
    }
}

/// Draws a fresh code, sends it to `destination`, and keeps only its commitment.
pub fn issue_otp<R, T>(
    digits: OtpDigits,
    now: u64,
    ttl: u64,
    destination: &str,
    rng: &mut R,
    transport: &T,
) -> Result<OtpChallenge, FactorError>
where
    R: CryptoRng + ?Sized,
    T: SmsTransport + ?Sized,
{
    if ttl == 0 {
        return Err(FactorError::InvalidTtl);
    }
    let mut salt = [0u8; 16];
    rng.fill_bytes(&mut salt);
    let value = uniform_below(rng, digits.modulus());
    let code = format!("{value:0width$}", width = digits.count() as usize);
    let commitment = commit(&salt, code.as_bytes());

    let body = format!("Your transaction verification code is {code}");
    let delivery = transport.send(destination, &body)?;
    Ok(OtpChallenge {
        salt,
        commitment,
        digits,
        issued_at: now,
        ttl,
        attempts_left: OTP_ATTEMPTS,
        delivery,
    })
}

/// Checks `code` against the commitment, consuming one attempt.
pub fn verify_otp(challenge: &mut OtpChallenge, code: &str, now: u64) -> Result<bool, FactorError> {
    if challenge.attempts_left == 0 {
        return Err(FactorError::ChallengeLocked);
    }
    challenge.attempts_left -= 1;
    let fresh = now <= challenge.issued_at.saturating_add(challenge.ttl);
    let matches = ct_eq(
        &commit(&challenge.salt, code.as_bytes()),
        &challenge.commitment,
    );
    Ok(fresh && matches)
}
