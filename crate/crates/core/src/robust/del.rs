//! t-deletion codec: the last `ρ` blocks carry burst-erasure redundancy for
//! the payload of the others.
//!
//! A lost segment erases at most `L̂max` consecutive payload symbols once
//! indices and markers are stripped, so a BEC code of depth `L̂max`
//! recovers up to `t` lost segments.

use crate::alphabet::{QString, SegmentCollection};
use crate::codec::{assemble_blocks, payload_range, Codeword, Decoder};
use crate::ecc::{BecCode, BecKind};
use crate::error::{param_err, Error, Result};
use crate::indexing::pad_ones;
use crate::params::CodeParams;

/// Largest number of payload symbols of blocks `0..K` inside any `Lmax` consecutive positions.
pub fn lhat_max(params: &CodeParams) -> usize {
    let mut payload = vec![0usize; params.n];
    for i in 0..params.blocks {
        payload[payload_range(params, i)].fill(1);
    }
    let width = params.lmax.min(params.n);
    let mut count: usize = payload[..width].iter().sum();
    let mut best = count;
    for g in width..params.n {
        count = count + payload[g] - payload[g - width];
        best = best.max(count);
    }
    best
}

/// `Lmax − ⌈Lmax/Lmin⌉·(α + f + 2)`, the closed form from the analysis. It
/// undercounts when a window cuts a skeleton at each end, and can go negative.
pub fn lhat_max_formula(params: &CodeParams) -> i64 {
    params.lmax as i64 - (params.lmax.div_ceil(params.lmin) * params.skeleton_len()) as i64
}

/// Length of `w` after inserting a `1` at every position divisible by `f`.
pub fn stuffed_len(len: usize, f: usize) -> usize {
    if len == 0 {
        0
    } else {
        len + (len - 1) / (f - 1) + 1
    }
}

/// Outcome of a deletion decode with the erasure geometry seen by the BEC decoder.
#[derive(Clone, Debug)]
pub struct DelDecodeReport {
    pub message: Result<QString>,
    /// Maximal erased runs `(start, len)` of `y* ∘ w` after stripping.
    pub erased_runs: Vec<(usize, usize)>,
}

#[derive(Clone, Debug)]
pub struct DeletionCodec {
    params: CodeParams,
    t: usize,
    bec: BecCode,
    /// Blocks given to redundancy.
    rho: usize,
}

impl DeletionCodec {
    pub fn new(params: CodeParams, t: usize, kind: BecKind) -> Result<Self> {
        let total = params.k * params.blocks;
        let depth = lhat_max(&params);
        // ρ depends on the payload length only through the RS super-symbol size.
        let mut rho = 0;
        loop {
            if rho >= total {
                return Err(Error::Config(format!(
                    "burst-erasure redundancy for t = {t} does not fit in {total} blocks"
                )));
            }
            let bec = BecCode::new(kind, params.q, depth, t, (total - rho) * params.block_len)?;
            let need = stuffed_len(bec.redundancy_len(), params.f).div_ceil(params.block_len);
            if need <= rho {
                return Ok(Self { params, t, bec, rho });
            }
            rho = need;
        }
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn bec(&self) -> &BecCode {
        &self.bec
    }

    /// Redundancy blocks `ρ = ⌈|w*|/N⌉`.
    pub fn rho(&self) -> usize {
        self.rho
    }

    /// `ρ` as given by `⌈ρ_BEC/N⌉·⌊f/(f−1)⌋`.
    pub fn rho_formula(&self) -> usize {
        let f = self.params.f;
        self.bec.redundancy_len().div_ceil(self.params.block_len) * (f / (f - 1))
    }

    /// `|w*|`.
    pub fn stuffed_redundancy_len(&self) -> usize {
        stuffed_len(self.bec.redundancy_len(), self.params.f)
    }

    pub fn data_blocks(&self) -> usize {
        self.params.k * self.params.blocks - self.rho
    }

    /// Message length `(k·K − ρ)·m`.
    pub fn message_len(&self) -> usize {
        self.data_blocks() * self.params.m
    }

    pub fn encode(&self, x: &QString) -> Result<Codeword> {
        let p = &self.params;
        if x.len() != self.message_len() || x.q() != p.q {
            return Err(param_err!(
                "message must have length (kK − ρ)·m = {} over q = {} (got {} over q = {})",
                self.message_len(),
                p.q,
                x.len(),
                x.q()
            ));
        }
        let rll = p.rll_scheme();
        let mut ys = x
            .symbols()
            .chunks(p.m)
            .map(|b| rll.encode(&QString::from_raw(p.q, b.to_vec())))
            .collect::<Result<Vec<_>>>()?;
        let y_star: Vec<u8> = ys.iter().flat_map(|y| y.symbols().iter().copied()).collect();
        let w = self.bec.encode(&QString::from_raw(p.q, y_star))?;
        let mut w_star = pad_ones(w.symbols(), p.f);
        w_star.resize(self.rho * p.block_len, 1);
        ys.extend(w_star.chunks(p.block_len).map(|b| QString::from_raw(p.q, b.to_vec())));
        assemble_blocks(&ys, p)
    }

    pub fn decode(&self, received: &SegmentCollection) -> Result<QString> {
        self.decode_report(received)?.message
    }

    /// Fails outright only when segments contradict each other; a BEC failure
    /// is reported in `message`.
    pub fn decode_report(&self, received: &SegmentCollection) -> Result<DelDecodeReport> {
        let p = &self.params;
        let strands = Decoder::new(*p).assemble(received)?;
        let blocks: Vec<&[Option<u8>]> = strands
            .iter()
            .flat_map(|z| (0..p.blocks).map(move |i| &z[payload_range(p, i)]))
            .collect();
        let (data, red) = blocks.split_at(self.data_blocks());
        let mut word: Vec<Option<u8>> = data.iter().flat_map(|b| b.iter().copied()).collect();
        word.extend(
            red.iter()
                .flat_map(|b| b.iter().copied())
                .take(self.stuffed_redundancy_len())
                .enumerate()
                .filter(|(j, _)| j % p.f != 0)
                .map(|(_, s)| s),
        );
        let erased_runs = runs(&word);
        let message = self.bec.decode(&word).and_then(|y_star| {
            let rll = p.rll_scheme();
            let mut out = Vec::with_capacity(self.message_len());
            for (b, y) in y_star.symbols().chunks(p.block_len).enumerate() {
                let x = rll
                    .decode(&QString::from_raw(p.q, y.to_vec()))
                    .map_err(|e| Error::Decode(format!("block {b}: {e}")))?;
                out.extend_from_slice(x.symbols());
            }
            Ok(QString::from_raw(p.q, out))
        });
        Ok(DelDecodeReport { message, erased_runs })
    }
}

fn runs(word: &[Option<u8>]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, s) in word.iter().enumerate() {
        match (s, start) {
            (None, None) => start = Some(i),
            (Some(_), Some(b)) => {
                out.push((b, i - b));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(b) = start {
        out.push((b, word.len() - b));
    }
    out
}

pub fn robust_encode_del(x: &QString, params: &CodeParams, t: usize, kind: BecKind) -> Result<Codeword> {
    DeletionCodec::new(*params, t, kind)?.encode(x)
}

pub fn robust_decode_del(
    received: &SegmentCollection,
    params: &CodeParams,
    t: usize,
    kind: BecKind,
) -> Result<QString> {
    DeletionCodec::new(*params, t, kind)?.decode(received)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::exact_segmentation_multi;
    use crate::codec::{decode, encode, locate_symbols, Located};
    use crate::params::RawParams;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg_a() -> CodeParams {
        RawParams::new(2, 124, 1, 15, 20, 3).derive().unwrap()
    }

    fn rs_config() -> CodeParams {
        RawParams::new(2, 2000, 1, 30, 40, 3).derive().unwrap()
    }

    fn random_message(rng: &mut ChaCha8Rng, q: u32, len: usize) -> QString {
        QString::new(q, (0..len).map(|_| rng.gen_range(0..q) as u8).collect()).unwrap()
    }

    #[test]
    fn lhat_on_cfg_a() {
        let p = cfg_a();
        // Twenty positions can hold the last 2 symbols of one y, a skeleton and a whole y.
        assert_eq!(lhat_max(&p), 8);
        assert_eq!(lhat_max_formula(&p), 20 - 2 * 11);
    }

    /// Oracle: brute force over every start and every payload position.
    #[test]
    fn lhat_matches_brute_force() {
        for raw in [
            RawParams::new(2, 124, 1, 15, 20, 3),
            RawParams::new(2, 2000, 1, 30, 40, 3),
            RawParams::new(2, 496, 1, 31, 62, 3),
            RawParams::new(3, 300, 1, 20, 45, 3),
        ] {
            let p = raw.derive().unwrap();
            let in_payload = |g: usize| (0..p.blocks).any(|i| payload_range(&p, i).contains(&g));
            let brute = (0..=p.n - p.lmax)
                .map(|g| (g..g + p.lmax).filter(|&x| in_payload(x)).count())
                .max()
                .unwrap();
            assert_eq!(lhat_max(&p), brute, "{raw:?}");
        }
    }

    #[test]
    fn stuffed_length_matches_pad_ones() {
        for f in 2..6 {
            for len in 0..40 {
                assert_eq!(stuffed_len(len, f), pad_ones(&vec![0; len], f).len());
            }
        }
    }

    #[test]
    fn rho_on_cfg_a() {
        let c = DeletionCodec::new(cfg_a(), 1, BecKind::InterleavedParity).unwrap();
        assert_eq!(c.bec().redundancy_len(), 8);
        assert_eq!(c.stuffed_redundancy_len(), 12);
        assert_eq!((c.rho(), c.rho_formula()), (3, 2));
        assert_eq!(c.message_len(), 4 * 2);
    }

    #[test]
    fn rs_config_sizes() {
        let p = rs_config();
        assert_eq!((p.blocks, p.index_len, p.alpha, p.block_len, p.m), (65, 7, 12, 13, 8));
        let c = DeletionCodec::new(p, 2, BecKind::InterleavedRs).unwrap();
        assert_eq!(c.bec().depth(), lhat_max(&p));
        assert_eq!(c.bec().redundancy_len(), 2 * c.bec().super_len() * c.bec().depth());
        assert!(c.rho() * p.block_len >= c.stuffed_redundancy_len());
        assert!((c.rho() - 1) * p.block_len < c.stuffed_redundancy_len());
    }

    #[test]
    fn t_zero_is_the_noiseless_code() {
        let p = cfg_a();
        let c = DeletionCodec::new(p, 0, BecKind::InterleavedParity).unwrap();
        assert_eq!(c.rho(), 0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_message(&mut rng, 2, c.message_len());
        let z = c.encode(&x).unwrap();
        assert_eq!(z, encode(&x, &p).unwrap());
        assert_eq!(decode(&exact_segmentation_multi(&z.strands, 17).unwrap(), &p).unwrap(), x);
    }

    #[test]
    fn redundancy_blocks_keep_locate_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for (p, t, kind) in [
            (cfg_a(), 1, BecKind::InterleavedParity),
            (rs_config(), 2, BecKind::InterleavedRs),
            (RawParams::new(2, 400, 2, 20, 26, 3).derive().unwrap(), 1, BecKind::InterleavedParity),
        ] {
            let c = DeletionCodec::new(p, t, kind).unwrap();
            for _ in 0..5 {
                let z = c.encode(&random_message(&mut rng, 2, c.message_len())).unwrap();
                for strand in &z.strands {
                    for g in 0..=p.n - p.lmin {
                        match locate_symbols(&strand.symbols()[g..g + p.lmin], &p).unwrap() {
                            Located::Placed(pl) => assert_eq!(pl.offset, g),
                            Located::Discard => assert!(g >= p.blocks * p.lmin),
                        }
                    }
                }
            }
        }
    }

    fn all_lmin(z: &Codeword) -> Vec<QString> {
        let p = &z.params;
        z.strands
            .iter()
            .flat_map(|s| (0..p.n).step_by(p.lmin).map(move |g| s.slice(g, (g + p.lmin).min(p.n))))
            .collect()
    }

    #[test]
    fn any_single_lost_segment_is_recovered_on_cfg_a() {
        let p = cfg_a();
        let c = DeletionCodec::new(p, 1, BecKind::InterleavedParity).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let x = random_message(&mut rng, 2, c.message_len());
            let pieces = all_lmin(&c.encode(&x).unwrap());
            for lost in 0..pieces.len() {
                let mut kept = pieces.clone();
                kept.remove(lost);
                let report = c.decode_report(&SegmentCollection::new(kept)).unwrap();
                assert!(report.erased_runs.len() <= 1);
                assert!(report.erased_runs.iter().all(|r| r.1 <= c.bec().depth()));
                assert_eq!(report.message.unwrap(), x, "lost {lost}");
            }
        }
    }

    #[test]
    fn two_adjacent_lost_segments_are_recovered_with_rs() {
        let p = rs_config();
        let c = DeletionCodec::new(p, 2, BecKind::InterleavedRs).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..30 {
            let x = random_message(&mut rng, 2, c.message_len());
            let z = c.encode(&x).unwrap();
            let mut pieces = Vec::new();
            let mut g = 0;
            while g < p.n {
                let len = rng.gen_range(p.lmin..=p.lmax).min(p.n - g);
                pieces.push(z.single().slice(g, g + len));
                g += len;
            }
            let at = rng.gen_range(0..pieces.len() - 1);
            pieces.drain(at..at + 2);
            assert_eq!(c.decode(&SegmentCollection::new(pieces)).unwrap(), x);
        }
    }

    #[test]
    fn parity_code_fails_on_two_far_losses() {
        let p = cfg_a();
        let c = DeletionCodec::new(p, 1, BecKind::InterleavedParity).unwrap();
        let x = QString::zeros(2, c.message_len());
        let mut pieces = all_lmin(&c.encode(&x).unwrap());
        // y_1 and y_3 occupy the same parity rows 4..8 of the depth-8 interleaver.
        pieces.remove(3);
        pieces.remove(1);
        assert!(matches!(c.decode(&SegmentCollection::new(pieces)), Err(Error::Decode(_))));
    }
}
