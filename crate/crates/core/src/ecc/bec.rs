//! Systematic burst-erasure codes for the deletion codec.
//!
//! Coordinates of `message ∘ redundancy` are split into `depth` rows by
//! residue mod `depth`, so a burst of at most `depth` consecutive erasures
//! hits each row at most once. Each row carries a single parity symbol
//! (`t = 1`) or is protected by a Reed–Solomon code over `GF(q^b)` with `t`
//! check symbols.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::gf::{prime_power, Field};
use super::rs::ReedSolomon;
use crate::alphabet::QString;
use crate::error::{param_err, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BecKind {
    InterleavedParity,
    InterleavedRs,
}

impl fmt::Display for BecKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BecKind::InterleavedParity => "interleaved_parity",
            BecKind::InterleavedRs => "interleaved_rs",
        })
    }
}

impl FromStr for BecKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "interleaved_parity" | "parity" => Ok(BecKind::InterleavedParity),
            "interleaved_rs" | "rs" => Ok(BecKind::InterleavedRs),
            _ => Err(param_err!("unknown BEC kind {s:?}")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BecCode {
    kind: BecKind,
    q: u32,
    depth: usize,
    t: usize,
    message_len: usize,
    /// q-ary symbols per RS super-symbol (1 for the parity code).
    super_len: usize,
    /// Per-row RS codes, indexed by row.
    rows: Vec<Option<ReedSolomon>>,
}

impl BecCode {
    pub fn new(kind: BecKind, q: u32, depth: usize, t: usize, message_len: usize) -> Result<Self> {
        if depth == 0 {
            return Err(Error::Config("BEC depth must be positive".into()));
        }
        match kind {
            BecKind::InterleavedParity => {
                if t > 1 {
                    return Err(Error::Config(format!(
                        "interleaved parity corrects one burst, not {t}"
                    )));
                }
                Ok(Self { kind, q, depth, t, message_len, super_len: 1, rows: Vec::new() })
            }
            BecKind::InterleavedRs => Self::interleaved_rs(q, depth, t, message_len),
        }
    }

    fn interleaved_rs(q: u32, depth: usize, t: usize, message_len: usize) -> Result<Self> {
        if prime_power(u64::from(q)).is_none() {
            return Err(Error::Config(format!("interleaved RS needs a prime-power q (got {q})")));
        }
        let row_len = message_len.div_ceil(depth);
        let mut b = 1usize;
        loop {
            let order = u64::from(q).checked_pow(b as u32);
            match order {
                Some(o) if o > super::gf::MAX_FIELD_ORDER => {
                    return Err(Error::Config("interleaved RS rows are too long".into()))
                }
                Some(o) if o > (row_len.div_ceil(b) + t) as u64 => break,
                Some(_) => b += 1,
                None => return Err(Error::Config("interleaved RS rows are too long".into())),
            }
        }
        let field = Arc::new(Field::new(u64::from(q).pow(b as u32))?);
        let rows = (0..depth)
            .map(|r| {
                let len = row_message_len(message_len, depth, r).div_ceil(b);
                if t == 0 || len == 0 {
                    Ok(None)
                } else {
                    ReedSolomon::new(field.clone(), len + t, len).map(Some)
                }
            })
            .collect::<Result<_>>()?;
        Ok(Self { kind: BecKind::InterleavedRs, q, depth, t, message_len, super_len: b, rows })
    }

    pub fn kind(&self) -> BecKind {
        self.kind
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn bursts(&self) -> usize {
        self.t
    }

    pub fn message_len(&self) -> usize {
        self.message_len
    }

    /// Symbols per RS super-symbol.
    pub fn super_len(&self) -> usize {
        self.super_len
    }

    /// Redundancy length: `depth` for parity, `t·b·depth` for interleaved RS.
    pub fn redundancy_len(&self) -> usize {
        match self.kind {
            BecKind::InterleavedParity => self.t * self.depth,
            BecKind::InterleavedRs => self.t * self.super_len * self.depth,
        }
    }

    fn coords_of_row(&self, r: usize, start: usize, end: usize) -> impl Iterator<Item = usize> {
        let first = start + (r + self.depth - start % self.depth) % self.depth;
        (first..end).step_by(self.depth)
    }

    /// Returns only the redundancy symbols.
    pub fn encode(&self, message: &QString) -> Result<QString> {
        if message.len() != self.message_len || message.q() != self.q {
            return Err(Error::Config(format!(
                "BEC message must have length {} over q = {}",
                self.message_len, self.q
            )));
        }
        let y = message.symbols();
        let l = self.message_len;
        let total = l + self.redundancy_len();
        let mut out = vec![0u8; self.redundancy_len()];
        if self.t == 0 {
            return Ok(QString::from_raw(self.q, out));
        }
        for r in 0..self.depth {
            let red: Vec<usize> = self.coords_of_row(r, l, total).collect();
            match self.kind {
                BecKind::InterleavedParity => {
                    let sum: u32 = self.coords_of_row(r, 0, l).map(|c| u32::from(y[c])).sum();
                    out[red[0] - l] = (sum % self.q) as u8;
                }
                BecKind::InterleavedRs => {
                    let Some(rs) = &self.rows[r] else { continue };
                    let msg = self.row_supers(r, |c| Some(y[c]));
                    let msg: Vec<u32> = msg.into_iter().map(|s| s.unwrap()).collect();
                    let cw = rs.encode(&msg)?;
                    let digits = self.unpack(&cw[msg.len()..]);
                    for (&c, d) in red.iter().zip(digits) {
                        out[c - l] = d;
                    }
                }
            }
        }
        Ok(QString::from_raw(self.q, out))
    }

    /// Packs row `r`'s message coordinates into super-symbols; `None` if any part is erased.
    fn row_supers(&self, r: usize, get: impl Fn(usize) -> Option<u8>) -> Vec<Option<u32>> {
        let coords: Vec<usize> = self.coords_of_row(r, 0, self.message_len).collect();
        coords
            .chunks(self.super_len)
            .map(|chunk| {
                let mut v = 0u32;
                for i in 0..self.super_len {
                    let d = match chunk.get(i) {
                        Some(&c) => get(c)?,
                        None => 0,
                    };
                    v = v * self.q + u32::from(d);
                }
                Some(v)
            })
            .collect()
    }

    fn unpack(&self, supers: &[u32]) -> Vec<u8> {
        let mut out = Vec::with_capacity(supers.len() * self.super_len);
        for &s in supers {
            let mut digits = vec![0u8; self.super_len];
            let mut v = s;
            for d in digits.iter_mut().rev() {
                *d = (v % self.q) as u8;
                v /= self.q;
            }
            out.extend(digits);
        }
        out
    }

    /// Recovers the message from `message ∘ redundancy` with erasures marked `None`.
    pub fn decode(&self, word: &[Option<u8>]) -> Result<QString> {
        let l = self.message_len;
        let total = l + self.redundancy_len();
        if word.len() != total {
            return Err(Error::Config(format!("BEC word must have length {total}")));
        }
        let mut y: Vec<Option<u8>> = word[..l].to_vec();
        for r in 0..self.depth {
            let row: Vec<usize> = self.coords_of_row(r, 0, total).collect();
            let erased = row.iter().filter(|&&c| word[c].is_none()).count();
            let budget = match self.kind {
                BecKind::InterleavedParity => self.t,
                BecKind::InterleavedRs => self.t * self.super_len,
            };
            if erased == 0 {
                continue;
            }
            if self.t == 0 || (self.kind == BecKind::InterleavedParity && erased > budget) {
                return Err(Error::Decode(format!(
                    "row {r} has {erased} erasures, more than the budget {}",
                    self.t
                )));
            }
            match self.kind {
                BecKind::InterleavedParity => {
                    let Some(&hole) = row.iter().find(|&&c| word[c].is_none()) else { continue };
                    if hole >= l {
                        continue;
                    }
                    let known: u32 = row
                        .iter()
                        .filter(|&&c| c != hole && c < l)
                        .map(|&c| u32::from(word[c].unwrap()))
                        .sum();
                    let parity = u32::from(word[*row.last().unwrap()].unwrap());
                    y[hole] = Some(((parity + self.q * (known / self.q + 1) - known) % self.q) as u8);
                }
                BecKind::InterleavedRs => {
                    let Some(rs) = &self.rows[r] else { continue };
                    let mut received = self.row_supers(r, |c| word[c]);
                    let red: Vec<usize> = self.coords_of_row(r, l, total).collect();
                    for chunk in red.chunks(self.super_len) {
                        let mut v = Some(0u32);
                        for &c in chunk {
                            v = v.zip(word[c]).map(|(acc, d)| acc * self.q + u32::from(d));
                        }
                        received.push(v);
                    }
                    let lost = received.iter().filter(|s| s.is_none()).count();
                    if lost > self.t {
                        return Err(Error::Decode(format!(
                            "row {r} has {lost} erased super-symbols, more than the budget {}",
                            self.t
                        )));
                    }
                    let got = rs.decode(&received)?;
                    let digits = self.unpack(&got.message);
                    for (&c, d) in self.coords_of_row(r, 0, l).collect::<Vec<_>>().iter().zip(digits) {
                        y[c] = Some(d);
                    }
                }
            }
        }
        let y: Vec<u8> = y.into_iter().map(|s| s.expect("every row was solved")).collect();
        Ok(QString::from_raw(self.q, y))
    }
}

fn row_message_len(message_len: usize, depth: usize, r: usize) -> usize {
    if r < message_len % depth {
        message_len / depth + 1
    } else {
        message_len / depth
    }
}

/// All ways to perturb `x` on at most `t` windows of length at most `len`.
fn burst_ball(x: &[u8], q: u32, len: usize, t: usize) -> HashSet<Vec<u8>> {
    let mut ball = HashSet::new();
    ball.insert(x.to_vec());
    for _ in 0..t {
        let mut next = ball.clone();
        for v in &ball {
            for start in 0..x.len() {
                let end = (start + len).min(x.len());
                let width = end - start;
                let combos = (q as usize).pow(width as u32);
                for mut code in 0..combos {
                    let mut w = v.clone();
                    for slot in &mut w[start..end] {
                        *slot = (code % q as usize) as u8;
                        code /= q as usize;
                    }
                    next.insert(w);
                }
            }
        }
        ball = next;
    }
    ball
}

/// Whether the disagreement set of `x` and `y` fits in `k` windows of length `len`.
fn covered_by_windows(diff: &[usize], n: usize, len: usize, k: usize) -> bool {
    fn go(diff: &[usize], n: usize, len: usize, k: usize, from: usize) -> bool {
        if diff.is_empty() {
            return true;
        }
        if k == 0 {
            return false;
        }
        // Try every window that covers the first uncovered position.
        let first = diff[0];
        let lo = first.saturating_sub(len - 1).max(from);
        (lo..=first).any(|start| {
            let end = (start + len).min(n);
            let rest: Vec<usize> = diff.iter().copied().filter(|&d| d >= end).collect();
            go(&rest, n, len, k - 1, start)
        })
    }
    go(diff, n, len, k, 0)
}

/// `(bursts_confusable, erasure_confusable)` for `t` bursts of length at most `len`.
///
/// The first is decided by intersecting the two burst-error balls, the second
/// by searching for `2t` windows covering every disagreement.
pub fn burst_confusability_check(x: &QString, y: &QString, len: usize, t: usize) -> Result<(bool, bool)> {
    if x.len() != y.len() || x.q() != y.q() {
        return Err(param_err!("strings must have equal length and alphabet"));
    }
    if len == 0 {
        return Err(param_err!("burst length must be positive"));
    }
    let bx = burst_ball(x.symbols(), x.q(), len, t);
    let by = burst_ball(y.symbols(), y.q(), len, t);
    let bursts = bx.iter().any(|v| by.contains(v));
    let diff: Vec<usize> = (0..x.len()).filter(|&i| x.symbols()[i] != y.symbols()[i]).collect();
    let erasures = covered_by_windows(&diff, x.len(), len, 2 * t);
    Ok((bursts, erasures))
}

/// Precomputed burst balls for exhaustive sweeps over many pairs.
pub struct BurstBalls {
    balls: Vec<HashSet<Vec<u8>>>,
}

impl BurstBalls {
    pub fn for_all_binary(n: usize, len: usize, t: usize) -> Self {
        let balls = (0..1usize << n)
            .map(|v| {
                let x: Vec<u8> = (0..n).rev().map(|b| ((v >> b) & 1) as u8).collect();
                burst_ball(&x, 2, len, t)
            })
            .collect();
        Self { balls }
    }

    pub fn intersect(&self, a: usize, b: usize) -> bool {
        let (s, l) = if self.balls[a].len() <= self.balls[b].len() { (a, b) } else { (b, a) };
        self.balls[s].iter().any(|v| self.balls[l].contains(v))
    }
}

/// Erasure predicate on raw binary words, for exhaustive sweeps.
pub fn erasure_confusable_bits(a: usize, b: usize, n: usize, len: usize, t: usize) -> bool {
    let diff: Vec<usize> = (0..n).filter(|&i| ((a ^ b) >> (n - 1 - i)) & 1 == 1).collect();
    covered_by_windows(&diff, n, len, 2 * t)
}
