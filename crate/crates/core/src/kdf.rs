//! Domain-separated SHAKE256 helpers standing in for the random oracles.

use sha3::digest::{ExtendableOutput, Update, XofReader};
use sha3::Shake256;

/// XORs `data` in place with the first `data.len()` bytes of `SHAKE256(tag ‖ parts…)`.
///
/// Each part is absorbed with a `u32` length prefix so concatenations cannot collide.
pub(crate) fn xor_stream(tag: &[u8], parts: &[&[u8]], data: &mut [u8]) {
    let mut reader = absorb(tag, parts).finalize_xof();
    let mut block = [0u8; 136];
    for chunk in data.chunks_mut(block.len()) {
        reader.read(&mut block[..chunk.len()]);
        for (d, k) in chunk.iter_mut().zip(&block) {
            *d ^= k;
        }
    }
}

/// First `out.len()` bytes of `SHAKE256(tag ‖ parts…)`.
pub(crate) fn expand(tag: &[u8], parts: &[&[u8]], out: &mut [u8]) {
    absorb(tag, parts).finalize_xof().read(out);
}

fn absorb(tag: &[u8], parts: &[&[u8]]) -> Shake256 {
    let mut xof = Shake256::default();
    xof.update(&(tag.len() as u32).to_be_bytes());
    xof.update(tag);
    for part in parts {
        xof.update(&(part.len() as u32).to_be_bytes());
        xof.update(part);
    }
    xof
}
