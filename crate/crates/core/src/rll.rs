//! Run-length-limited encoders: injective maps `Σ^m → Σ^N` whose outputs
//! start with `1` and contain no run of `f` zeros.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::alphabet::QString;
use crate::error::{param_err, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RllKind {
    /// A literal `1` at every output position divisible by `f`.
    #[default]
    Stuffing,
    /// Low-redundancy scheme. Payloads are ranked as base-q integers and
    /// mapped to the admissible word of the same lexicographic rank.
    SequenceReplacement,
}

impl fmt::Display for RllKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RllKind::Stuffing => "stuffing",
            RllKind::SequenceReplacement => "sequence_replacement",
        })
    }
}

impl FromStr for RllKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stuffing" => Ok(RllKind::Stuffing),
            "sequence_replacement" | "sequence-replacement" => Ok(RllKind::SequenceReplacement),
            _ => Err(param_err!("unknown RLL scheme {s:?}")),
        }
    }
}

/// An RLL encoder/decoder pair for a fixed output length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RllScheme {
    kind: RllKind,
    q: u32,
    f: usize,
    out_len: usize,
    payload_len: usize,
    // completions[l][r]: admissible continuations of length l after a zero run of r.
    completions: Vec<Vec<u128>>,
}

impl RllScheme {
    pub fn new(kind: RllKind, q: u32, f: usize, out_len: usize) -> Result<Self> {
        if f < 2 {
            return Err(param_err!("forbidden run length f must be at least 2 (got {f})"));
        }
        if out_len == 0 {
            return Err(param_err!("RLL output length must be positive"));
        }
        let mut scheme = Self {
            kind,
            q,
            f,
            out_len,
            payload_len: 0,
            completions: Vec::new(),
        };
        scheme.payload_len = match kind {
            RllKind::Stuffing => out_len - out_len.div_ceil(f),
            RllKind::SequenceReplacement => {
                scheme.completions = completion_table(q, f, out_len)?;
                let total = scheme.completions[out_len - 1][0];
                floor_log(total, u128::from(q))
            }
        };
        Ok(scheme)
    }

    pub fn kind(&self) -> RllKind {
        self.kind
    }

    /// Output length `N`.
    pub fn out_len(&self) -> usize {
        self.out_len
    }

    /// Payload length `m` carried by one output word.
    pub fn payload_len(&self) -> usize {
        self.payload_len
    }

    pub fn encode(&self, x: &QString) -> Result<QString> {
        if x.len() != self.payload_len || x.q() != self.q {
            return Err(param_err!(
                "RLL payload must have length {} over q={} (got {} over q={})",
                self.payload_len,
                self.q,
                x.len(),
                x.q()
            ));
        }
        let out = match self.kind {
            RllKind::Stuffing => {
                let mut payload = x.symbols().iter();
                (0..self.out_len)
                    .map(|p| if p % self.f == 0 { 1 } else { *payload.next().unwrap() })
                    .collect()
            }
            RllKind::SequenceReplacement => self.unrank(digits_to_int(x.symbols(), self.q)),
        };
        Ok(QString::from_raw(self.q, out))
    }

    pub fn decode(&self, y: &QString) -> Result<QString> {
        if y.len() != self.out_len || y.q() != self.q {
            return Err(param_err!("RLL word must have length {}", self.out_len));
        }
        let s = y.symbols();
        let payload = match self.kind {
            RllKind::Stuffing => {
                if let Some(p) = (0..self.out_len).step_by(self.f).find(|&p| s[p] != 1) {
                    return Err(Error::Corruption(format!("stuffed position {p} is not 1")));
                }
                (0..self.out_len)
                    .filter(|p| p % self.f != 0)
                    .map(|p| s[p])
                    .collect()
            }
            RllKind::SequenceReplacement => {
                let rank = self.rank(s)?;
                let limit = u128::from(self.q).pow(self.payload_len as u32);
                if rank >= limit {
                    return Err(Error::Corruption("word outside the encoder's image".into()));
                }
                int_to_digits(rank, self.q, self.payload_len)
            }
        };
        Ok(QString::from_raw(self.q, payload))
    }

    fn unrank(&self, mut v: u128) -> Vec<u8> {
        let n = self.out_len;
        let mut out = Vec::with_capacity(n);
        out.push(1u8);
        let mut run = 0usize;
        for pos in 1..n {
            let left = n - pos - 1;
            for sym in 0..self.q {
                let next = if sym == 0 { run + 1 } else { 0 };
                if next >= self.f {
                    continue;
                }
                let c = self.completions[left][next];
                if v < c {
                    out.push(sym as u8);
                    run = next;
                    break;
                }
                v -= c;
            }
        }
        out
    }

    fn rank(&self, s: &[u8]) -> Result<u128> {
        if s[0] != 1 {
            return Err(Error::Corruption("RLL word must start with 1".into()));
        }
        let n = self.out_len;
        let mut rank = 0u128;
        let mut run = 0usize;
        for pos in 1..n {
            let left = n - pos - 1;
            let sym = u32::from(s[pos]);
            for smaller in 0..sym {
                let next = if smaller == 0 { run + 1 } else { 0 };
                if next < self.f {
                    rank += self.completions[left][next];
                }
            }
            run = if sym == 0 { run + 1 } else { 0 };
            if run >= self.f {
                return Err(Error::Corruption(format!("zero run of length {} in RLL word", run)));
            }
        }
        Ok(rank)
    }
}

fn completion_table(q: u32, f: usize, n: usize) -> Result<Vec<Vec<u128>>> {
    let mut table = vec![vec![1u128; f]];
    for l in 1..n {
        let prev = &table[l - 1];
        let mut row = vec![0u128; f];
        for (r, slot) in row.iter_mut().enumerate() {
            let nonzero = prev[0]
                .checked_mul(u128::from(q - 1))
                .ok_or_else(|| Error::Config("RLL word too long for exact ranking".into()))?;
            let zero = if r + 1 < f { prev[r + 1] } else { 0 };
            *slot = nonzero
                .checked_add(zero)
                .ok_or_else(|| Error::Config("RLL word too long for exact ranking".into()))?;
        }
        table.push(row);
    }
    Ok(table)
}

fn floor_log(mut v: u128, base: u128) -> usize {
    let mut k = 0;
    while v >= base {
        v /= base;
        k += 1;
    }
    k
}

pub(crate) fn digits_to_int(digits: &[u8], q: u32) -> u128 {
    digits
        .iter()
        .fold(0u128, |acc, &d| acc * u128::from(q) + u128::from(d))
}

pub(crate) fn int_to_digits(mut v: u128, q: u32, len: usize) -> Vec<u8> {
    let mut out = vec![0u8; len];
    for slot in out.iter_mut().rev() {
        *slot = (v % u128::from(q)) as u8;
        v /= u128::from(q);
    }
    out
}
