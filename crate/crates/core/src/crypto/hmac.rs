use sha2::{Digest, Sha256};

use super::ct::ct_eq;

const BLOCK: usize = 64;

/// A full-length HMAC-SHA256 tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MacTag(pub [u8; 32]);

impl MacTag {
    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    /// Constant-time comparison; use this instead of `==` on secret-derived tags.
    pub fn verify(&self, other: &MacTag) -> bool {
        ct_eq(&self.0, &other.0)
    }
}

/// HMAC over SHA-256 with the standard 64-byte block.
pub fn hmac_sha256(key: &[u8], message: &[u8]) -> MacTag {
    let mut block_key = [0u8; BLOCK];
    if key.len() > BLOCK {
        block_key[..32].copy_from_slice(&Sha256::digest(key));
    } else {
        block_key[..key.len()].copy_from_slice(key);
    }

    let mut ipad = [0x36u8; BLOCK];
    let mut opad = [0x5cu8; BLOCK];
    for i in 0..BLOCK {
        ipad[i] ^= block_key[i];
        opad[i] ^= block_key[i];
    }

    let inner = Sha256::new()
        .chain_update(ipad)
        .chain_update(message)
        .finalize();
    let outer = Sha256::new()
        .chain_update(opad)
        .chain_update(inner)
        .finalize();

    let mut tag = [0u8; 32];
    tag.copy_from_slice(&outer);
    MacTag(tag)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unhex(s: &str) -> alloc::vec::Vec<u8> {
        (0..s.len())
            .step_by(2)
            .map(|i| u8::from_str_radix(&s[i..i + 2], 16).unwrap())
            .collect()
    }

    // RFC 4231 test cases 1-4.
    #[test]
    fn rfc4231_vectors() {
        let cases: [(alloc::vec::Vec<u8>, alloc::vec::Vec<u8>, &str); 4] = [
            (
                alloc::vec![0x0b; 20],
                b"Hi There".to_vec(),
                "b0344c61d8db38535ca8afceaf0bf12b881dc200c9833da726e9376c2e32cff7",
            ),
            (
                b"Jefe".to_vec(),
                b"what do ya want for nothing?".to_vec(),
                "5bdcc146bf60754e6a042426089575c75a003f089d2739839dec58b964ec3843",
            ),
            (
                alloc::vec![0xaa; 20],
                alloc::vec![0xdd; 50],
                "773ea91e36800e46854db8ebd09181a72959098b3ef8c122d9635514ced565fe",
            ),
            (
                unhex("0102030405060708090a0b0c0d0e0f10111213141516171819"),
                alloc::vec![0xcd; 50],
                "82558a389a443c0ea4cc819899f2083a85f0faa3e578f8077a2e3ff46729665b",
            ),
        ];
        for (key, msg, want) in cases {
            assert_eq!(hmac_sha256(&key, &msg).0.to_vec(), unhex(want));
        }
    }

    #[test]
    fn long_key_is_hashed() {
        // RFC 4231 case 6: 131-byte key.
        let tag = hmac_sha256(
            &[0xaa; 131],
            b"Test Using Larger Than Block-Size Key - Hash Key First",
        );
        assert_eq!(
            tag.0.to_vec(),
            unhex("60e431591ee0b67f0d8a26aacbf5b77f8e0bc6213728c5140546040f0ee37f54")
        );
    }

    #[test]
    fn verify_is_exact() {
        let a = hmac_sha256(b"k", b"m");
        assert!(a.verify(&hmac_sha256(b"k", b"m")));
        let mut b = a;
        b.0[31] ^= 1;
        assert!(!a.verify(&b));
    }
}
