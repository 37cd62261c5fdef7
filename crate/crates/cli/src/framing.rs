//! Byte payloads to q-ary messages and back.
//!
//! Every byte becomes `⌈log_q 256⌉` base-q digits, most significant first. For
//! q = 2 that is MSB-first bits, for q = 4 two bits per symbol.

use anyhow::{bail, Result};
use serde::{Deserialize, Serialize};

/// Header line of a codeword file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodewordHeader {
    pub schema: u32,
    pub params: serde_json::Value,
    pub seed: Option<u64>,
    /// Digits per byte.
    pub byte_digits: usize,
    /// Length of the original file; the message is zero-padded past it.
    pub message_bytes: usize,
    pub message_symbols: usize,
}

pub fn byte_digits(q: u32) -> usize {
    let mut d = 0;
    let mut cap = 1u32;
    while cap < 256 {
        cap *= q;
        d += 1;
    }
    d
}

/// Expands `bytes` and zero-pads to `len` symbols.
pub fn bytes_to_symbols(bytes: &[u8], q: u32, len: usize) -> Result<Vec<u8>> {
    let d = byte_digits(q);
    if bytes.len() * d > len {
        bail!("message of {} bytes needs {} symbols, the code carries {len}", bytes.len(), bytes.len() * d);
    }
    let mut out = Vec::with_capacity(len);
    for &b in bytes {
        let mut digits = vec![0u8; d];
        let mut v = u32::from(b);
        for slot in digits.iter_mut().rev() {
            *slot = (v % q) as u8;
            v /= q;
        }
        out.extend(digits);
    }
    out.resize(len, 0);
    Ok(out)
}

/// Collapses the first `count` bytes back from their digits.
pub fn symbols_to_bytes(symbols: &[u8], q: u32, count: usize) -> Result<Vec<u8>> {
    let d = byte_digits(q);
    if count * d > symbols.len() {
        bail!("{count} bytes need {} symbols, only {} decoded", count * d, symbols.len());
    }
    symbols
        .chunks(d)
        .take(count)
        .map(|c| {
            let v = c.iter().fold(0u32, |acc, &s| acc * q + u32::from(s));
            u8::try_from(v).map_err(|_| anyhow::anyhow!("digit group {c:?} exceeds a byte"))
        })
        .collect()
}
