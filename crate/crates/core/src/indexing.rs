//! Reflected q-ary Gray code indices with a parity symbol, padded with a `1`
//! at every position divisible by `f`.

use crate::alphabet::QString;
use crate::error::{param_err, Error, Result};
use crate::params::CodeParams;

/// Rank-`i` word of the reflected q-ary Gray code of length `len`.
pub fn gray_unrank(i: u64, len: usize, q: u32) -> Result<QString> {
    let space = u64::from(q).checked_pow(len as u32);
    if space.is_some_and(|s| i >= s) {
        return Err(param_err!("rank {i} outside [0, {q}^{len})"));
    }
    let mut digits = vec![0u8; len];
    let mut v = i;
    for d in digits.iter_mut().rev() {
        *d = (v % u64::from(q)) as u8;
        v /= u64::from(q);
    }
    // A digit runs downward whenever the number formed by the higher digits is odd.
    let mut odd = false;
    let mut out = Vec::with_capacity(len);
    for &d in &digits {
        out.push(if odd { (q - 1) as u8 - d } else { d });
        odd = (u32::from(odd) * (q % 2) + u32::from(d)) % 2 == 1;
    }
    Ok(QString::from_raw(q, out))
}

/// Inverse of [`gray_unrank`].
pub fn gray_rank(c: &[u8], q: u32) -> u64 {
    let mut odd = false;
    let mut rank = 0u64;
    for &g in c {
        let d = if odd { (q - 1) as u8 - g } else { g };
        rank = rank * u64::from(q) + u64::from(d);
        odd = (u32::from(odd) * (q % 2) + u32::from(d)) % 2 == 1;
    }
    rank
}

/// Parity symbol making the sum of `c ∘ parity` vanish in `Z_q`.
pub fn parity_symbol(c: &[u8], q: u32) -> u8 {
    let sum: u32 = c.iter().map(|&s| u32::from(s)).sum();
    ((q - sum % q) % q) as u8
}

/// Inserts a `1` at every position divisible by `f`.
pub fn pad_ones(data: &[u8], f: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(data.len() + data.len() / (f - 1) + 1);
    let mut it = data.iter().peekable();
    while it.peek().is_some() {
        if out.len() % f == 0 {
            out.push(1);
        } else {
            out.push(*it.next().unwrap());
        }
    }
    out
}

/// Removes the symbols at positions divisible by `f`; `None` if any of them is not `1`.
pub fn strip_ones(padded: &[u8], f: usize) -> Option<Vec<u8>> {
    let mut out = Vec::with_capacity(padded.len());
    for (p, &s) in padded.iter().enumerate() {
        if p % f == 0 {
            if s != 1 {
                return None;
            }
        } else {
            out.push(s);
        }
    }
    Some(out)
}

/// `c''_i`: Gray word of rank `i`, its parity, padded to length `alpha`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedIndex {
    pub value: u64,
    pub padded: QString,
}

pub fn build_encoded_index(i: u64, params: &CodeParams) -> Result<EncodedIndex> {
    let mut c = gray_unrank(i, params.index_len, params.q)?.into_symbols();
    c.push(parity_symbol(&c, params.q));
    let padded = pad_ones(&c, params.f);
    debug_assert_eq!(padded.len(), params.alpha);
    Ok(EncodedIndex { value: i, padded: QString::from_raw(params.q, padded) })
}

/// Outcome of reading an `alpha`-word as an index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IndexReading {
    /// Gray rank of the `I`-prefix.
    pub rank: u64,
    /// Whether the parity symbol matches the prefix.
    pub parity_ok: bool,
}

/// Strips padding and reads the Gray rank and parity check of an `alpha`-word.
pub fn read_index_word(w: &[u8], params: &CodeParams) -> Result<IndexReading> {
    if w.len() != params.alpha {
        return Err(param_err!("index word must have length {}", params.alpha));
    }
    let c = strip_ones(w, params.f)
        .ok_or_else(|| Error::Corruption("padded index position is not 1".into()))?;
    debug_assert_eq!(c.len(), params.index_len + 1);
    let sum: u32 = c.iter().map(|&s| u32::from(s)).sum();
    Ok(IndexReading {
        rank: gray_rank(&c[..params.index_len], params.q),
        parity_ok: sum % params.q == 0,
    })
}

/// Index of the first encoded index meeting the segment the word was cut from.
///
/// A word with a wrong parity symbol is a copy of `c''_{i+1}` carrying the
/// parity of `c''_i`, so the rank is decremented.
pub fn decode_index_word(w: &[u8], params: &CodeParams) -> Result<u64> {
    let reading = read_index_word(w, params)?;
    if reading.parity_ok {
        Ok(reading.rank)
    } else {
        reading
            .rank
            .checked_sub(1)
            .ok_or_else(|| Error::Corruption("parity mismatch on rank 0".into()))
    }
}
