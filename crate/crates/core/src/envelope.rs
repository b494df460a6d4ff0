//! The embedded wire format.
//!
//! Byte stream, written MSB-first into the least-significant bit of every
//! R, G and B sample in row-major order (alpha is never touched):
//!
//! ```text
//! "MTRK" | version=0x01 | payload_len: u32 BE | iv: 8 | tag: 32 | ciphertext
//! ```
//!
//! `tag = HMAC-SHA256(derive_key(mac_pass), magic|version|payload_len|iv|ciphertext)`
//! and `ciphertext = XTEA-CBC(derive_key(key_pass), iv, payload)`.

use alloc::vec::Vec;

use crate::crypto::{
    cbc_decrypt, cbc_encrypt, derive_key, hmac_sha256, padded_len, Block64, MacTag,
};
use crate::raster::RasterImage;

pub const MAGIC: [u8; 4] = *b"MTRK";
pub const VERSION: u8 = 0x01;
pub const HEADER_LEN: usize = 17;
pub const TAG_LEN: usize = 32;
/// Header plus tag; the ciphertext follows.
pub const OVERHEAD: usize = HEADER_LEN + TAG_LEN;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EnvelopeError {
    #[error("cover too small: envelope needs {required} bytes, image holds {available}")]
    CapacityExceeded { required: u64, available: u64 },
    #[error("no envelope found in image")]
    BadMagic,
    #[error("unsupported envelope version {0}")]
    UnsupportedVersion(u8),
    #[error("envelope declares {declared} ciphertext bytes but only {available} remain")]
    TruncatedEnvelope { declared: u64, available: u64 },
    #[error("authentication tag mismatch: envelope tampered or wrong MAC passphrase")]
    TamperDetected,
    #[error("tag verified but decryption failed: wrong key passphrase")]
    WrongKey,
}

/// Parsed fixed-size header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnvelopeHeader {
    pub payload_len: u32,
    pub iv: Block64,
}

impl EnvelopeHeader {
    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        out[..4].copy_from_slice(&MAGIC);
        out[4] = VERSION;
        out[5..9].copy_from_slice(&self.payload_len.to_be_bytes());
        out[9..].copy_from_slice(&self.iv.0);
        out
    }

    pub fn parse(bytes: &[u8; HEADER_LEN]) -> Result<Self, EnvelopeError> {
        if bytes[..4] != MAGIC {
            return Err(EnvelopeError::BadMagic);
        }
        if bytes[4] != VERSION {
            return Err(EnvelopeError::UnsupportedVersion(bytes[4]));
        }
        let payload_len = u32::from_be_bytes([bytes[5], bytes[6], bytes[7], bytes[8]]);
        let mut iv = [0u8; 8];
        iv.copy_from_slice(&bytes[9..]);
        Ok(EnvelopeHeader {
            payload_len,
            iv: Block64(iv),
        })
    }
}

/// Bytes that fit in the image: one bit per R, G, B sample.
pub fn capacity_of(image: &RasterImage) -> u64 {
    image.pixel_count() as u64 * 3 / 8
}

/// Total embedded size for a payload of `payload_len` plaintext bytes.
pub fn envelope_len(payload_len: usize) -> u64 {
    (OVERHEAD + padded_len(payload_len)) as u64
}

/// Encrypts, authenticates and embeds `payload` into a copy of `cover`.
pub fn seal_envelope(
    cover: &RasterImage,
    payload: &[u8],
    mac_pass: &[u8],
    key_pass: &[u8],
    iv: Block64,
) -> Result<RasterImage, EnvelopeError> {
    let required = envelope_len(payload.len());
    let available = capacity_of(cover);
    if required > available || padded_len(payload.len()) > u32::MAX as usize {
        return Err(EnvelopeError::CapacityExceeded {
            required,
            available,
        });
    }

    let ciphertext = cbc_encrypt(payload, &derive_key(key_pass), iv);
    let header = EnvelopeHeader {
        payload_len: ciphertext.len() as u32,
        iv,
    }
    .to_bytes();
    let tag = mac(mac_pass, &header, &ciphertext);

    let mut stego = cover.clone();
    let mut bits = LsbWriter::new(&mut stego);
    bits.write(&header);
    bits.write(&tag.0);
    bits.write(&ciphertext);
    Ok(stego)
}

/// Extracts, authenticates and decrypts the envelope hidden in `image`.
pub fn open_envelope(
    image: &RasterImage,
    mac_pass: &[u8],
    key_pass: &[u8],
) -> Result<Vec<u8>, EnvelopeError> {
    let available = capacity_of(image);
    if available < HEADER_LEN as u64 {
        return Err(EnvelopeError::BadMagic);
    }
    let reader = LsbReader::new(image);

    let mut raw = [0u8; HEADER_LEN];
    reader.read_into(0, &mut raw);
    let header = EnvelopeHeader::parse(&raw)?;
    let len = header.payload_len as u64;
    if len == 0 || !len.is_multiple_of(8) {
        return Err(EnvelopeError::TamperDetected);
    }
    if OVERHEAD as u64 + len > available {
        return Err(EnvelopeError::TruncatedEnvelope {
            declared: len,
            available: available.saturating_sub(OVERHEAD as u64),
        });
    }

    let mut stored = [0u8; TAG_LEN];
    reader.read_into(HEADER_LEN, &mut stored);
    let mut ciphertext = alloc::vec![0u8; len as usize];
    reader.read_into(OVERHEAD, &mut ciphertext);

    if !mac(mac_pass, &raw, &ciphertext).verify(&MacTag(stored)) {
        return Err(EnvelopeError::TamperDetected);
    }
    cbc_decrypt(&ciphertext, &derive_key(key_pass), header.iv).map_err(|_| EnvelopeError::WrongKey)
}

fn mac(mac_pass: &[u8], header: &[u8; HEADER_LEN], ciphertext: &[u8]) -> MacTag {
    let mut msg = Vec::with_capacity(HEADER_LEN + ciphertext.len());
    msg.extend_from_slice(header);
    msg.extend_from_slice(ciphertext);
    hmac_sha256(derive_key(mac_pass).as_bytes(), &msg)
}

/// Sample index carrying stream bit `bit`.
#[inline]
fn carrier_index(bit: usize, channels: usize) -> usize {
    if channels == 3 {
        bit
    } else {
        (bit / 3) * channels + bit % 3
    }
}

struct LsbWriter<'a> {
    samples: &'a mut [u8],
    channels: usize,
    bit: usize,
}

impl<'a> LsbWriter<'a> {
    fn new(image: &'a mut RasterImage) -> Self {
        let channels = image.channels().count();
        LsbWriter {
            samples: image.samples_mut(),
            channels,
            bit: 0,
        }
    }

    fn write(&mut self, bytes: &[u8]) {
        for &byte in bytes {
            for shift in (0..8).rev() {
                let i = carrier_index(self.bit, self.channels);
                self.samples[i] = (self.samples[i] & !1) | ((byte >> shift) & 1);
                self.bit += 1;
            }
        }
    }
}

struct LsbReader<'a> {
    samples: &'a [u8],
    channels: usize,
}

impl<'a> LsbReader<'a> {
    fn new(image: &'a RasterImage) -> Self {
        LsbReader {
            samples: image.samples(),
            channels: image.channels().count(),
        }
    }

    fn read_into(&self, byte_offset: usize, out: &mut [u8]) {
        let mut bit = byte_offset * 8;
        for byte in out.iter_mut() {
            let mut v = 0u8;
            for _ in 0..8 {
                v = (v << 1) | (self.samples[carrier_index(bit, self.channels)] & 1);
                bit += 1;
            }
            *byte = v;
        }
    }
}
