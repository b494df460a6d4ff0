use super::{Block64, Key128};

const DELTA: u32 = 0x9E37_79B9;
const CYCLES: u32 = 32;

fn schedule(key: &Key128) -> [u32; 4] {
    let k = &key.0;
    core::array::from_fn(|i| {
        u32::from_be_bytes([k[4 * i], k[4 * i + 1], k[4 * i + 2], k[4 * i + 3]])
    })
}

#[inline(always)]
fn mix(v: u32) -> u32 {
    ((v << 4) ^ (v >> 5)).wrapping_add(v)
}

/// XTEA, 32 cycles (64 Feistel rounds), big-endian words and key.
pub fn xtea_encrypt_block(block: Block64, key: &Key128) -> Block64 {
    let k = schedule(key);
    let (mut v0, mut v1) = block.words();
    let mut sum = 0u32;
    for _ in 0..CYCLES {
        v0 = v0.wrapping_add(mix(v1) ^ sum.wrapping_add(k[(sum & 3) as usize]));
        sum = sum.wrapping_add(DELTA);
        v1 = v1.wrapping_add(mix(v0) ^ sum.wrapping_add(k[((sum >> 11) & 3) as usize]));
    }
    Block64::from_words(v0, v1)
}

pub fn xtea_decrypt_block(block: Block64, key: &Key128) -> Block64 {
    let k = schedule(key);
    let (mut v0, mut v1) = block.words();
    let mut sum = DELTA.wrapping_mul(CYCLES);
    for _ in 0..CYCLES {
        v1 = v1.wrapping_sub(mix(v0) ^ sum.wrapping_add(k[((sum >> 11) & 3) as usize]));
        sum = sum.wrapping_sub(DELTA);
        v0 = v0.wrapping_sub(mix(v1) ^ sum.wrapping_add(k[(sum & 3) as usize]));
    }
    Block64::from_words(v0, v1)
}
