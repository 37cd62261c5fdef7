//! t-substitution codec: an outer Reed–Solomon code over `GF(q^m)` whose
//! symbols are the information blocks of the noiseless layout.
//!
//! Decoding keeps one window per decoded index, pre-fills the skeleton,
//! writes window payloads and erases every block that saw a conflicting
//! write or was left incomplete. Erased blocks become RS erasures.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::windows::{classify_window, windows, Validity};
use crate::alphabet::{QString, SegmentCollection};
use crate::codec::{assemble_blocks, payload_range, skeleton, Codeword};
use crate::ecc::{Field, ReedSolomon};
use crate::error::{param_err, Error, Result};
use crate::params::CodeParams;

/// A window kept in `Z'(U)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZEntry {
    pub window: QString,
    pub strand: usize,
    /// Strand-local offset of the window's first symbol.
    pub offset: usize,
    pub validity: Validity,
}

/// The paper's restriction `Z'(U)`: one window per decoded index.
pub type ZMap = BTreeMap<u64, ZEntry>;

fn tie_order(e: &ZEntry) -> (u64, usize, usize, &[u8]) {
    (e.validity.index.unwrap_or(u64::MAX), e.strand, e.offset, e.window.symbols())
}

/// Every distinct valid window of the received segments, ordered by
/// `(ind'(w), position, length, content)`.
pub fn build_z(received: &SegmentCollection, params: &CodeParams) -> Vec<ZEntry> {
    let mut z = Vec::new();
    for seg in received.segments() {
        if seg.q() != params.q {
            continue;
        }
        for (_, w) in windows(seg, params.lmin) {
            let v = classify_window(w.symbols(), params);
            if let (true, Some(strand), Some(offset)) = (v.is_valid(), v.strand, v.offset) {
                z.push(ZEntry { window: w, strand, offset, validity: v });
            }
        }
    }
    z.sort_by(|a, b| {
        tie_order(a).cmp(&tie_order(b)).then_with(|| a.window.len().cmp(&b.window.len()))
    });
    z.dedup();
    z
}

/// Restricts to one window per index, keeping the shortest and then the
/// lexicographically least.
///
/// The decoder does not use this: a misplaced window claiming the index of
/// a genuine one would evict it, turning a collision into a wrong block.
pub fn restrict(z: &[ZEntry]) -> ZMap {
    let mut out = ZMap::new();
    for e in z {
        let Some(index) = e.validity.index else { continue };
        match out.get(&index) {
            Some(kept) if (kept.window.len(), kept.window.symbols()) <= (e.window.len(), e.window.symbols()) => {}
            _ => {
                out.insert(index, e.clone());
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockStatus {
    Untouched,
    FilledPartial,
    FilledComplete,
    Erased,
}

/// The partially known codeword `z'` and the fate of each payload block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReconstructionState {
    pub params: CodeParams,
    /// One entry per strand, `None` for unknown symbols.
    pub strands: Vec<Vec<Option<u8>>>,
    /// Strand-major, `k·K` entries. After reconstruction only
    /// `FilledComplete` and `Erased` remain.
    pub blocks: Vec<BlockStatus>,
    /// Blocks erased because two windows disagreed on one of their symbols.
    pub collisions: usize,
}

impl ReconstructionState {
    /// Number of erased blocks `e`.
    pub fn erased(&self) -> usize {
        self.blocks.iter().filter(|&&b| b == BlockStatus::Erased).count()
    }

    /// Symbols of block `b` (strand-major), `None` if it is erased.
    pub fn block(&self, b: usize) -> Option<Vec<u8>> {
        if self.blocks[b] == BlockStatus::Erased {
            return None;
        }
        let (s, i) = (b / self.params.blocks, b % self.params.blocks);
        self.strands[s][payload_range(&self.params, i)].iter().copied().collect()
    }

    /// Number `s` of complete blocks that differ from the transmitted codeword.
    /// Needs ground truth, so it is only meaningful in trials.
    pub fn wrong_blocks(&self, truth: &Codeword) -> usize {
        let p = &self.params;
        (0..p.k * p.blocks)
            .filter(|&b| {
                let (s, i) = (b / p.blocks, b % p.blocks);
                self.block(b)
                    .is_some_and(|y| y.as_slice() != &truth.strands[s].symbols()[payload_range(p, i)])
            })
            .count()
    }
}

/// Writes windows over the skeleton in the given order and erases what is not trustworthy.
pub fn reconstruct<'a>(z: impl IntoIterator<Item = &'a ZEntry>, params: &CodeParams) -> ReconstructionState {
    let p = *params;
    let mut strands: Vec<Vec<Option<u8>>> = (0..p.k).map(|s| skeleton(s, &p)).collect();
    let mut blocks = vec![BlockStatus::Untouched; p.k * p.blocks];
    let mut collisions = 0;
    // Block of each payload position, if any.
    let mut owner = vec![None; p.n];
    for i in 0..p.blocks {
        owner[payload_range(&p, i)].fill(Some(i));
    }
    for entry in z {
        let base = entry.strand * p.blocks;
        for (j, &sym) in entry.window.symbols().iter().enumerate() {
            let pos = entry.offset + j;
            // Skeleton positions are never overwritten.
            let Some(i) = owner[pos] else { continue };
            let status = &mut blocks[base + i];
            if *status == BlockStatus::Erased {
                continue;
            }
            let slot = &mut strands[entry.strand][pos];
            match *slot {
                Some(prev) if prev != sym => {
                    *status = BlockStatus::Erased;
                    collisions += 1;
                }
                _ => {
                    *slot = Some(sym);
                    *status = BlockStatus::FilledPartial;
                }
            }
        }
    }
    for (b, status) in blocks.iter_mut().enumerate() {
        let (s, i) = (b / p.blocks, b % p.blocks);
        let full = strands[s][payload_range(&p, i)].iter().all(Option::is_some);
        *status = match *status {
            BlockStatus::FilledPartial if full => BlockStatus::FilledComplete,
            _ => BlockStatus::Erased,
        };
        if *status == BlockStatus::Erased {
            strands[s][payload_range(&p, i)].fill(None);
        }
    }
    ReconstructionState { params: p, strands, blocks, collisions }
}

/// Outcome of decoding together with the intermediate state, for instrumentation.
#[derive(Clone, Debug)]
pub struct SubDecodeReport {
    pub message: Result<QString>,
    pub state: ReconstructionState,
    /// Distinct valid windows written.
    pub kept_windows: usize,
    /// Complete blocks the RLL decoder rejected, passed on as erasures.
    pub rll_rejections: usize,
}

/// Codec correcting `t` substitutions anywhere in the stored strands.
#[derive(Clone, Debug)]
pub struct SubstitutionCodec {
    params: CodeParams,
    t: usize,
    rs: ReedSolomon,
}

impl SubstitutionCodec {
    pub fn new(params: CodeParams, t: usize) -> Result<Self> {
        let len = params.k * params.blocks;
        if 2 * t >= len {
            return Err(Error::Config(format!("2t = {} leaves no message blocks out of {len}", 2 * t)));
        }
        let order = u64::from(params.q)
            .checked_pow(params.m as u32)
            .filter(|&o| o <= crate::ecc::gf::MAX_FIELD_ORDER)
            .ok_or_else(|| Error::Config(format!("GF({}^{}) is too large", params.q, params.m)))?;
        let field = Arc::new(Field::new(order)?);
        let rs = ReedSolomon::new(field, len, len - 2 * t)?;
        Ok(Self { params, t, rs })
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// Message symbols over `GF(q^m)`, `M = k·K − 2t`.
    pub fn message_symbols(&self) -> usize {
        self.rs.dimension()
    }

    /// Message length in q-ary symbols, `M·m`.
    pub fn message_len(&self) -> usize {
        self.message_symbols() * self.params.m
    }

    pub fn encode(&self, x: &QString) -> Result<Codeword> {
        let p = &self.params;
        if x.len() != self.message_len() || x.q() != p.q {
            return Err(param_err!(
                "message must have length M·m = {} over q = {} (got {} over q = {})",
                self.message_len(),
                p.q,
                x.len(),
                x.q()
            ));
        }
        let symbols: Vec<u32> = x.symbols().chunks(p.m).map(|b| to_symbol(b, p.q)).collect();
        let rll = p.rll_scheme();
        let ys = self
            .rs
            .encode(&symbols)?
            .into_iter()
            .map(|s| rll.encode(&QString::from_raw(p.q, from_symbol(s, p.m, p.q))))
            .collect::<Result<Vec<_>>>()?;
        assemble_blocks(&ys, p)
    }

    pub fn decode(&self, received: &SegmentCollection) -> Result<QString> {
        self.decode_report(received).message
    }

    pub fn decode_report(&self, received: &SegmentCollection) -> SubDecodeReport {
        let p = &self.params;
        let z = build_z(received, p);
        let state = reconstruct(&z, p);
        let rll = p.rll_scheme();
        let mut rll_rejections = 0;
        let word: Vec<Option<u32>> = (0..p.k * p.blocks)
            .map(|b| {
                let y = state.block(b)?;
                match rll.decode(&QString::from_raw(p.q, y)) {
                    Ok(x) => Some(to_symbol(x.symbols(), p.q)),
                    Err(_) => {
                        rll_rejections += 1;
                        None
                    }
                }
            })
            .collect();
        let message = self
            .rs
            .decode(&word)
            .map(|d| {
                let digits = d.message.iter().flat_map(|&s| from_symbol(s, p.m, p.q)).collect();
                QString::from_raw(p.q, digits)
            })
            .map_err(|e| Error::Decode(format!("outer code: {e}")));
        SubDecodeReport { message, state, kept_windows: z.len(), rll_rejections }
    }
}

/// Big-endian base-q value of a block.
fn to_symbol(digits: &[u8], q: u32) -> u32 {
    digits.iter().fold(0, |acc, &d| acc * q + u32::from(d))
}

fn from_symbol(mut v: u32, len: usize, q: u32) -> Vec<u8> {
    let mut out = vec![0u8; len];
    for slot in out.iter_mut().rev() {
        *slot = (v % q) as u8;
        v /= q;
    }
    out
}

pub fn robust_encode_sub(x: &QString, params: &CodeParams, t: usize) -> Result<Codeword> {
    SubstitutionCodec::new(*params, t)?.encode(x)
}

pub fn robust_decode_sub(received: &SegmentCollection, params: &CodeParams, t: usize) -> Result<QString> {
    SubstitutionCodec::new(*params, t)?.decode(received)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::exact_segmentation_multi;
    use crate::codec::{encode, Decoder};
    use crate::params::RawParams;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg_b() -> CodeParams {
        RawParams::new(2, 496, 1, 31, 40, 3).derive().unwrap()
    }

    fn random_message(rng: &mut ChaCha8Rng, q: u32, len: usize) -> QString {
        QString::new(q, (0..len).map(|_| rng.gen_range(0..q) as u8).collect()).unwrap()
    }

    /// Cuts each strand at random lengths in `[Lmin, Lmax]`.
    fn tear(z: &Codeword, rng: &mut ChaCha8Rng) -> SegmentCollection {
        let p = &z.params;
        let mut out = Vec::new();
        for s in &z.strands {
            let mut g = 0;
            while g < p.n {
                let len = rng.gen_range(p.lmin..=p.lmax).min(p.n - g);
                out.push(s.slice(g, g + len));
                g += len;
            }
        }
        SegmentCollection::new(out)
    }

    #[test]
    fn cfg_b_sizes() {
        let p = cfg_b();
        assert_eq!((p.index_len, p.alpha, p.block_len, p.m, p.blocks), (4, 8, 18, 12, 15));
        let c = SubstitutionCodec::new(p, 1).unwrap();
        assert_eq!(c.message_symbols(), 13);
    }

    #[test]
    fn symbol_digits_round_trip() {
        for v in [0u32, 1, 4095, 1234] {
            assert_eq!(to_symbol(&from_symbol(v, 12, 2), 2), v);
        }
        assert_eq!(from_symbol(5, 3, 3), [0, 1, 2]);
    }

    #[test]
    fn t_zero_matches_noiseless_encoder() {
        let p = cfg_b();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random_message(&mut rng, 2, p.message_len());
        assert_eq!(robust_encode_sub(&x, &p, 0).unwrap(), encode(&x, &p).unwrap());
    }

    #[test]
    fn noiseless_windows_cover_every_block() {
        let p = cfg_b();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let c = SubstitutionCodec::new(p, 1).unwrap();
        for _ in 0..50 {
            let x = random_message(&mut rng, 2, c.message_len());
            let z = c.encode(&x).unwrap();
            let received = tear(&z, &mut rng);
            let report = c.decode_report(&received);
            assert_eq!(report.state.erased(), 0);
            assert_eq!(report.state.wrong_blocks(&z), 0);
            assert_eq!(report.message.unwrap(), x);
            // Same placement as the noiseless decoder.
            let noiseless = Decoder::new(p).assemble(&received).unwrap();
            for i in 0..p.blocks {
                let r = payload_range(&p, i);
                assert_eq!(report.state.strands[0][r.clone()], noiseless[0][r]);
            }
        }
    }

    #[test]
    fn build_z_keeps_shortest_then_least() {
        let p = cfg_b();
        let z = encode(&QString::zeros(2, p.message_len()), &p).unwrap();
        let s = z.single();
        let a = s.slice(0, 31);
        let longer = s.slice(0, 40);
        let z = build_z(&SegmentCollection::new(vec![longer, a.clone()]), &p);
        assert_eq!(z.len(), 2);
        assert_eq!(restrict(&z)[&0].window, a);
        // Equal lengths: the lexicographically least wins.
        let mut b = a.symbols().to_vec();
        b[20] ^= 1;
        let b = QString::new(2, b).unwrap();
        let z = build_z(&SegmentCollection::new(vec![a.clone(), b.clone()]), &p);
        let least = if a.symbols() < b.symbols() { &a } else { &b };
        assert_eq!(&restrict(&z)[&0].window, least);
        assert!(build_z(&SegmentCollection::default(), &p).is_empty());
    }

    #[test]
    fn build_z_on_exact_cut_maps_every_index() {
        let p = cfg_b();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let z = encode(&random_message(&mut rng, 2, p.message_len()), &p).unwrap();
        let map = restrict(&build_z(&exact_segmentation_multi(&z.strands, p.lmin).unwrap(), &p));
        for i in 0..=p.blocks {
            let e = &map[&(i as u64)];
            assert_eq!(e.offset, i * p.lmin);
            assert_eq!(e.window, z.single().slice(e.offset, e.offset + e.window.len()));
        }
    }

    #[test]
    fn collision_erases_whole_block() {
        let p = cfg_b();
        let z = encode(&QString::zeros(2, p.message_len()), &p).unwrap();
        let s = z.single();
        let mut map = build_z(&exact_segmentation_multi(&z.strands, p.lmin).unwrap(), &p);
        let v = map[3].validity;
        // A second window claiming block 3's payload with one flipped symbol.
        let r = payload_range(&p, 3);
        let mut forged = s.symbols()[3 * p.lmin..4 * p.lmin].to_vec();
        forged[r.start - 3 * p.lmin + 2] ^= 1;
        map.push(ZEntry { window: QString::from_raw(2, forged), strand: 0, offset: 3 * p.lmin, validity: v });
        let state = reconstruct(&map, &p);
        assert_eq!(state.blocks[3], BlockStatus::Erased);
        assert_eq!(state.erased(), 1);
        assert_eq!(state.collisions, 1);
        assert!(state.strands[0][r].iter().all(Option::is_none));
    }

    #[test]
    fn single_flip_inside_a_block_is_corrected() {
        let p = cfg_b();
        let c = SubstitutionCodec::new(p, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x = random_message(&mut rng, 2, c.message_len());
        let mut z = c.encode(&x).unwrap();
        let pos = payload_range(&p, 5).start + 7;
        let mut sym = z.strands[0].symbols().to_vec();
        sym[pos] ^= 1;
        z.strands[0] = QString::from_raw(2, sym);
        let received = tear(&z, &mut rng);
        let report = c.decode_report(&received);
        assert!(2 * report.state.wrong_blocks(&c.encode(&x).unwrap()) + report.state.erased() <= 2);
        assert_eq!(report.message.unwrap(), x);
    }

    #[test]
    fn rejects_infeasible_field() {
        // CFG-A: m = 2, so GF(4) cannot hold a length-7 outer code.
        let p = RawParams::new(2, 124, 1, 15, 20, 3).derive().unwrap();
        assert!(matches!(SubstitutionCodec::new(p, 1), Err(Error::Config(_))));
    }

    #[test]
    fn invariant_holds_under_random_and_targeted_flips() {
        let p = cfg_b();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for t in [1usize, 2] {
            let c = SubstitutionCodec::new(p, t).unwrap();
            for trial in 0..3000 {
                let x = random_message(&mut rng, 2, c.message_len());
                let clean = c.encode(&x).unwrap();
                let mut sym = clean.strands[0].symbols().to_vec();
                for _ in 0..t {
                    let pos = match trial % 4 {
                        0 => rng.gen_range(0..p.n),
                        // index, marker and parity positions of a random block
                        1 => rng.gen_range(0..=p.blocks) * p.lmin + rng.gen_range(0..p.alpha),
                        2 => rng.gen_range(0..=p.blocks) * p.lmin + p.alpha + rng.gen_range(0..p.marker_len),
                        _ => rng.gen_range(0..=p.blocks) * p.lmin + p.alpha - 1,
                    };
                    sym[pos] ^= 1;
                }
                let z = Codeword { params: p, strands: vec![QString::from_raw(2, sym)] };
                let report = c.decode_report(&tear(&z, &mut rng));
                let (e, s) = (report.state.erased(), report.state.wrong_blocks(&clean));
                assert!(2 * s + e <= 2 * t, "t={t} trial={trial} e={e} s={s}");
                assert_eq!(report.message.as_ref().unwrap(), &x, "t={t} trial={trial}");
            }
        }
    }
}
