//! Bit-exact primitives behind the envelope: passphrase-to-key derivation,
//! the XTEA block cipher, CBC chaining with PKCS#7 padding and HMAC-SHA256.
//!
//! Everything here is a pure function of its inputs.

mod cbc;
mod ct;
mod hmac;
mod kdf;
mod xtea;

pub use cbc::{cbc_decrypt, cbc_encrypt, padded_len, CbcError};
pub use ct::ct_eq;
pub use hmac::{hmac_sha256, MacTag};
pub use kdf::derive_key;
pub use xtea::{xtea_decrypt_block, xtea_encrypt_block};

/// A 128-bit cipher or MAC key.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct Key128(pub [u8; 16]);

impl Key128 {
    pub fn as_bytes(&self) -> &[u8; 16] {
        &self.0
    }
}

impl core::fmt::Debug for Key128 {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str("Key128(..)")
    }
}

impl From<[u8; 16]> for Key128 {
    fn from(bytes: [u8; 16]) -> Self {
        Key128(bytes)
    }
}

/// One 64-bit cipher block, read as two big-endian words.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Block64(pub [u8; 8]);

impl Block64 {
    pub const ZERO: Block64 = Block64([0; 8]);

    pub fn as_bytes(&self) -> &[u8; 8] {
        &self.0
    }

    pub(crate) fn words(&self) -> (u32, u32) {
        let b = &self.0;
        (
            u32::from_be_bytes([b[0], b[1], b[2], b[3]]),
            u32::from_be_bytes([b[4], b[5], b[6], b[7]]),
        )
    }

    pub(crate) fn from_words(v0: u32, v1: u32) -> Self {
        let mut out = [0u8; 8];
        out[..4].copy_from_slice(&v0.to_be_bytes());
        out[4..].copy_from_slice(&v1.to_be_bytes());
        Block64(out)
    }
}

impl From<[u8; 8]> for Block64 {
    fn from(bytes: [u8; 8]) -> Self {
        Block64(bytes)
    }
}
