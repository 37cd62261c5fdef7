//! Derived code parameters. Every size used by the codecs comes from here.

use serde::{Deserialize, Serialize};

use crate::alphabet::MAX_Q;
use crate::error::{param_err, Error, Result};
use crate::rll::{RllKind, RllScheme};

/// Raw inputs of a configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawParams {
    pub q: u32,
    pub n: usize,
    pub k: usize,
    pub lmin: usize,
    pub lmax: usize,
    pub f: usize,
    #[serde(default)]
    pub rll: RllKind,
}

impl RawParams {
    pub fn new(q: u32, n: usize, k: usize, lmin: usize, lmax: usize, f: usize) -> Self {
        Self { q, n, k, lmin, lmax, f, rll: RllKind::Stuffing }
    }

    pub fn with_rll(mut self, rll: RllKind) -> Self {
        self.rll = rll;
        self
    }

    pub fn derive(self) -> Result<CodeParams> {
        derive_params(self)
    }
}

/// A validated parameter bundle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeParams {
    pub q: u32,
    pub n: usize,
    pub k: usize,
    #[serde(rename = "Lmin")]
    pub lmin: usize,
    #[serde(rename = "Lmax")]
    pub lmax: usize,
    pub f: usize,
    /// Gray-code index length.
    #[serde(rename = "I")]
    pub index_len: usize,
    /// Length of a padded encoded index.
    pub alpha: usize,
    /// Information blocks per strand.
    #[serde(rename = "K")]
    pub blocks: usize,
    /// Encoded (RLL) block length.
    #[serde(rename = "N")]
    pub block_len: usize,
    /// Information block length.
    pub m: usize,
    pub marker_len: usize,
    pub rll: RllKind,
}

/// Derives every quantity of a configuration and checks the layout invariants.
pub fn derive_params(raw: RawParams) -> Result<CodeParams> {
    let RawParams { q, n, k, lmin, lmax, f, rll } = raw;
    if !(2..=MAX_Q).contains(&q) {
        return Err(param_err!("q must lie in [2, {MAX_Q}] (got {q})"));
    }
    if n == 0 || k == 0 || lmin == 0 {
        return Err(param_err!("n, k and Lmin must be positive"));
    }
    if f < 2 {
        return Err(param_err!("f >= 2 violated (f = {f})"));
    }
    if lmin > lmax {
        return Err(param_err!("Lmin <= Lmax violated ({lmin} > {lmax})"));
    }
    if lmax > n {
        return Err(param_err!("Lmax <= n violated ({lmax} > {n})"));
    }
    let blocks = (n / lmin).checked_sub(1).unwrap_or(0);
    if blocks < 1 {
        return Err(param_err!("K >= 1 violated (K = floor(n/Lmin) - 1 = {blocks})"));
    }
    let stride = n.div_ceil(lmin);
    let indices_needed = (k - 1) * stride + blocks + 1;
    let index_len = ceil_log(indices_needed as u128, u128::from(q));
    let alpha = (f * (index_len + 1)).div_ceil(f - 1);
    if alpha - alpha.div_ceil(f) != index_len + 1 {
        return Err(Error::Config(format!(
            "padding {index_len}+1 index symbols with f = {f} does not yield length {alpha}"
        )));
    }
    let skeleton = alpha + f + 2;
    if skeleton >= lmin {
        return Err(param_err!(
            "N >= f violated: N = Lmin - alpha - f - 2 = {lmin} - {alpha} - {f} - 2 < {f}"
        ));
    }
    let block_len = lmin - skeleton;
    if block_len < f {
        return Err(param_err!(
            "N >= f violated: N = Lmin - alpha - f - 2 = {block_len} < {f}"
        ));
    }
    let m = RllScheme::new(rll, q, f, block_len)?.payload_len();
    if m == 0 {
        return Err(param_err!("information block length m is zero for N = {block_len}"));
    }
    Ok(CodeParams {
        q,
        n,
        k,
        lmin,
        lmax,
        f,
        index_len,
        alpha,
        blocks,
        block_len,
        m,
        marker_len: f + 2,
        rll,
    })
}

/// Smallest `e` with `base^e >= v`.
pub(crate) fn ceil_log(v: u128, base: u128) -> usize {
    let mut e = 0;
    let mut p = 1u128;
    while p < v {
        p = p.saturating_mul(base);
        e += 1;
    }
    e
}

impl CodeParams {
    pub fn raw(&self) -> RawParams {
        RawParams {
            q: self.q,
            n: self.n,
            k: self.k,
            lmin: self.lmin,
            lmax: self.lmax,
            f: self.f,
            rll: self.rll,
        }
    }

    /// Index ranks reserved for each strand: `ceil(n / Lmin)`.
    pub fn index_stride(&self) -> usize {
        self.n.div_ceil(self.lmin)
    }

    /// Number of Gray codewords, `q^I`.
    pub fn index_space(&self) -> u64 {
        u64::from(self.q).pow(self.index_len as u32)
    }

    /// Length of index plus marker.
    pub fn skeleton_len(&self) -> usize {
        self.alpha + self.marker_len
    }

    pub fn rll_scheme(&self) -> RllScheme {
        RllScheme::new(self.rll, self.q, self.f, self.block_len)
            .expect("validated parameters yield a valid RLL scheme")
    }

    /// Message length of the noiseless codec, `k·K·m`.
    pub fn message_len(&self) -> usize {
        self.k * self.blocks * self.m
    }

    /// Total stored length over all strands.
    pub fn total_len(&self) -> usize {
        self.n * self.k
    }

    /// Global index rank of local block `i` in `strand`.
    pub fn index_rank(&self, strand: usize, local: usize) -> u64 {
        (strand * self.index_stride() + local) as u64
    }

    /// Maps a global index rank back to `(strand, local block)` if it is one the encoder uses.
    pub fn split_rank(&self, rank: u64) -> Option<(usize, usize)> {
        let stride = self.index_stride() as u64;
        let strand = (rank / stride) as usize;
        let local = (rank % stride) as usize;
        (strand < self.k && local <= self.blocks).then_some((strand, local))
    }

    /// Density `a = Lmin / log_q(n·k)`.
    pub fn asymptotic_a(&self) -> f64 {
        self.lmin as f64 / ((self.n * self.k) as f64).log(f64::from(self.q))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("CodeParams serializes")
    }

    /// Parses a serialized bundle and re-derives it, rejecting inconsistent records.
    pub fn from_json(text: &str) -> Result<Self> {
        let parsed: CodeParams =
            serde_json::from_str(text).map_err(|e| param_err!("malformed params JSON: {e}"))?;
        let derived = parsed.raw().derive()?;
        if derived != parsed {
            return Err(param_err!("serialized params disagree with their re-derivation"));
        }
        Ok(derived)
    }

    /// Suggested forbidden run length `round(sqrt(log_q n))`, never below 2.
    pub fn suggest_f(q: u32, n: usize) -> usize {
        ((n as f64).log(f64::from(q)).sqrt().round() as usize).max(2)
    }
}
