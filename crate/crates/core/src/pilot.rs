//! Pilot-interleaved single-strand code.
//!
//! A prefix `p` of a de Bruijn sequence is interleaved symbol by symbol with
//! `m − 1` streams sharing no `s`-window with `p`. Any `m·s`-segment then
//! contains `s` consecutive pilot symbols, whose position in `p` gives the offset.
//! There is no information encoder into `O_p`; streams are sampled.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::alphabet::QString;
use crate::error::{param_err, Error, Result};

/// Largest de Bruijn sequence [`de_bruijn`] will build.
pub const MAX_DE_BRUIJN_LEN: u64 = 1 << 26;

/// De Bruijn sequence of order `s` over `Z_q` (concatenated Lyndon words, lexicographically least).
pub fn de_bruijn(q: u32, s: usize) -> Result<QString> {
    if q < 2 || s == 0 {
        return Err(param_err!("de Bruijn sequence needs q >= 2 and s >= 1"));
    }
    let len = u64::from(q)
        .checked_pow(s as u32)
        .filter(|&l| l <= MAX_DE_BRUIJN_LEN)
        .ok_or_else(|| Error::Resource(format!("q^s = {q}^{s} exceeds {MAX_DE_BRUIJN_LEN}")))?;
    let q8 = q as u8;
    let mut out = Vec::with_capacity(len as usize);
    let mut a = vec![0u8; s + 1];
    // Iterative FKM: visit prenecklaces in lexicographic order and keep Lyndon words
    // whose length divides s.
    let mut t = 1usize;
    loop {
        if s % t == 0 {
            out.extend_from_slice(&a[1..=t]);
        }
        // next prenecklace
        let mut i = s;
        while i > 0 && a[i] == q8 - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        a[i] += 1;
        for j in i + 1..=s {
            a[j] = a[j - i];
        }
        t = i;
    }
    debug_assert_eq!(out.len() as u64, len);
    QString::new(q, out)
}

/// `x ⊥_s y`: no `s`-window of `x` starting in `[0, L − s)` equals one of `y` starting there.
pub fn perp(x: &QString, y: &QString, s: usize) -> bool {
    perp_windows(x.symbols(), y.symbols(), s, x.len().min(y.len()).saturating_sub(s))
}

/// Like [`perp`] but over all `L − s + 1` windows, including the final one.
pub fn perp_full(x: &QString, y: &QString, s: usize) -> bool {
    let n = x.len().min(y.len());
    perp_windows(x.symbols(), y.symbols(), s, if n >= s { n - s + 1 } else { 0 })
}

fn perp_windows(x: &[u8], y: &[u8], s: usize, count: usize) -> bool {
    if count == 0 {
        return true;
    }
    let ys: std::collections::HashSet<&[u8]> = (0..count).map(|j| &y[j..j + s]).collect();
    (0..count).all(|i| !ys.contains(&x[i..i + s]))
}

/// Which form of the disjointness predicate a sampler enforces.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Predicate {
    /// Windows starting in `[0, L − s)`, as in the definition of `O_p`.
    Literal,
    /// Every window. Guarantees unambiguous location at the strand end.
    #[default]
    Full,
}

impl Predicate {
    pub fn holds(self, c: &QString, p: &QString, s: usize) -> bool {
        match self {
            Predicate::Literal => perp(c, p, s),
            Predicate::Full => perp_full(c, p, s),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sample {
    pub word: QString,
    /// Draws used, including the accepted one.
    pub tries: usize,
}

/// Rejection-samples a uniform member of `{c : c ⊥_s p}`.
pub fn sample_op(p: &QString, s: usize, predicate: Predicate, rng: &mut impl Rng, max_tries: usize) -> Result<Sample> {
    for tries in 1..=max_tries {
        let c = QString::new(p.q(), (0..p.len()).map(|_| rng.gen_range(0..p.q()) as u8).collect())?;
        if predicate.holds(&c, p, s) {
            return Ok(Sample { word: c, tries });
        }
    }
    Err(Error::Resource(format!("no member of O_p in {max_tries} draws")))
}

/// Fraction of `draws` uniform words accepted into `O_p` under the literal predicate.
pub fn acceptance_rate(p: &QString, s: usize, draws: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = p.q();
    let mut hits = 0usize;
    for _ in 0..draws {
        let c = QString::new(q, (0..p.len()).map(|_| rng.gen_range(0..q) as u8).collect()).expect("symbols below q");
        hits += usize::from(perp(&c, p, s));
    }
    hits as f64 / draws as f64
}

/// `1 − (n/m)²·q^{−s}`, the union-bound estimate of the acceptance rate.
pub fn acceptance_lower_bound(q: u32, stream_len: usize, s: usize) -> f64 {
    1.0 - (stream_len as f64).powi(2) * f64::from(q).powi(-(s as i32))
}

/// Output position `j` carries symbol `⌊j/m⌋` of stream `j mod m`; stream 0 is the pilot.
pub fn pilot_interleave(p: &QString, streams: &[QString]) -> Result<QString> {
    let m = streams.len() + 1;
    if streams.iter().any(|c| c.len() != p.len() || c.q() != p.q()) {
        return Err(param_err!("every stream must match the pilot length {} and q = {}", p.len(), p.q()));
    }
    let mut out = Vec::with_capacity(m * p.len());
    for t in 0..p.len() {
        out.push(p.symbols()[t]);
        out.extend(streams.iter().map(|c| c.symbols()[t]));
    }
    QString::new(p.q(), out)
}

/// Inverse of [`pilot_interleave`]: the `m` streams, pilot first.
pub fn deinterleave(c: &QString, m: usize) -> Vec<QString> {
    (0..m)
        .map(|r| QString::new(c.q(), c.symbols().iter().skip(r).step_by(m).copied().collect()).expect("symbols below q"))
        .collect()
}

/// Pilot code parameters with the pilot and its window table.
#[derive(Clone, Debug)]
pub struct PilotConfig {
    pub q: u32,
    pub n: usize,
    /// Interleaving count `m`.
    pub m: usize,
    /// De Bruijn order.
    pub s: usize,
    pub pilot: QString,
    positions: HashMap<Vec<u8>, usize>,
}

impl PilotConfig {
    pub fn new(q: u32, n: usize, m: usize, s: usize) -> Result<Self> {
        if m < 2 || n % m != 0 {
            return Err(param_err!("need m > 1 dividing n (got n = {n}, m = {m})"));
        }
        let len = n / m;
        let mut power = 1usize;
        while power < len {
            power *= q as usize;
        }
        if power != len {
            return Err(param_err!("n/m = {len} is not a power of q = {q}"));
        }
        if (q as u64).checked_pow(s as u32).is_some_and(|qs| qs < len as u64) || s > len {
            return Err(param_err!("order s = {s} must satisfy log_q(n/m) <= s <= n/m"));
        }
        let pilot = de_bruijn(q, s)?.slice(0, len);
        let positions = (0..=len - s).map(|j| (pilot.symbols()[j..j + s].to_vec(), j)).collect();
        Ok(Self { q, n, m, s, pilot, positions })
    }

    pub fn stream_len(&self) -> usize {
        self.n / self.m
    }

    /// Minimum segment length `m·s` the locator needs.
    pub fn min_segment(&self) -> usize {
        self.m * self.s
    }

    /// Samples `m − 1` streams and interleaves them with the pilot.
    pub fn sample_codeword(&self, predicate: Predicate, seed: u64, max_tries: usize) -> Result<QString> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let streams = (1..self.m)
            .map(|_| sample_op(&self.pilot, self.s, predicate, &mut rng, max_tries).map(|x| x.word))
            .collect::<Result<Vec<_>>>()?;
        pilot_interleave(&self.pilot, &streams)
    }

    /// Offset of `u` within its codeword.
    pub fn locate(&self, u: &QString) -> Result<usize> {
        let (m, s) = (self.m, self.s);
        if u.len() < m * s || u.len() > self.n {
            return Err(param_err!("segment length {} outside [{}, {}]", u.len(), m * s, self.n));
        }
        let sym = u.symbols();
        let mut found = Vec::new();
        for r in 0..m {
            let word: Vec<u8> = (0..s).map(|t| sym[r + t * m]).collect();
            if let Some(&j) = self.positions.get(&word) {
                // The pilot symbol at stream position j sits at codeword position j·m.
                let Some(offset) = (j * m).checked_sub(r) else { continue };
                if offset + u.len() <= self.n && self.pilot_consistent(sym, offset) {
                    found.push(offset);
                }
            }
        }
        match found.as_slice() {
            [o] => Ok(*o),
            [] => Err(Error::Corruption("no phase carries a pilot window".into())),
            _ => Err(Error::Corruption(format!("ambiguous pilot phase, offsets {found:?}"))),
        }
    }

    /// Every pilot position covered by `u` at `offset` agrees with `p`.
    fn pilot_consistent(&self, u: &[u8], offset: usize) -> bool {
        let first = offset.div_ceil(self.m) * self.m;
        (first..offset + u.len())
            .step_by(self.m)
            .all(|g| u[g - offset] == self.pilot.symbols()[g / self.m])
    }
}

/// Free-function form of [`PilotConfig::locate`].
pub fn pilot_locate(u: &QString, config: &PilotConfig) -> Result<usize> {
    config.locate(u)
}
