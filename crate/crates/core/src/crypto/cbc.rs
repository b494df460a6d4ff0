use alloc::vec::Vec;

use super::{xtea_decrypt_block, xtea_encrypt_block, Block64, Key128};

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum CbcError {
    #[error("ciphertext length {0} is not a positive multiple of 8")]
    Length(usize),
    #[error("invalid padding")]
    Padding,
}

/// Ciphertext length for a plaintext of `len` bytes: padding is always added.
pub const fn padded_len(len: usize) -> usize {
    (len / 8 + 1) * 8
}

/// PKCS#7 pad, then CBC-chain XTEA under `iv`.
pub fn cbc_encrypt(plaintext: &[u8], key: &Key128, iv: Block64) -> Vec<u8> {
    let pad = 8 - plaintext.len() % 8;
    let mut out = Vec::with_capacity(padded_len(plaintext.len()));
    out.extend_from_slice(plaintext);
    out.resize(plaintext.len() + pad, pad as u8);

    let mut prev = iv.0;
    for chunk in out.chunks_exact_mut(8) {
        let mut block = [0u8; 8];
        for i in 0..8 {
            block[i] = chunk[i] ^ prev[i];
        }
        prev = xtea_encrypt_block(Block64(block), key).0;
        chunk.copy_from_slice(&prev);
    }
    out
}

pub fn cbc_decrypt(ciphertext: &[u8], key: &Key128, iv: Block64) -> Result<Vec<u8>, CbcError> {
    if ciphertext.is_empty() || !ciphertext.len().is_multiple_of(8) {
        return Err(CbcError::Length(ciphertext.len()));
    }
    let mut out = Vec::with_capacity(ciphertext.len());
    let mut prev = iv.0;
    for chunk in ciphertext.chunks_exact(8) {
        let mut block = [0u8; 8];
        block.copy_from_slice(chunk);
        let plain = xtea_decrypt_block(Block64(block), key).0;
        for i in 0..8 {
            out.push(plain[i] ^ prev[i]);
        }
        prev = block;
    }

    let pad = *out.last().expect("nonempty") as usize;
    if !(1..=8).contains(&pad) || out[out.len() - pad..].iter().any(|&b| b as usize != pad) {
        return Err(CbcError::Padding);
    }
    out.truncate(out.len() - pad);
    Ok(out)
}
