use sha2::{Digest, Sha256};

use super::Key128;

/// Turns a passphrase into a cipher key: the first 16 bytes of SHA-256.
pub fn derive_key(passphrase: &[u8]) -> Key128 {
    let digest = Sha256::digest(passphrase);
    let mut key = [0u8; 16];
    key.copy_from_slice(&digest[..16]);
    Key128(key)
}
