//! Noiseless torn-paper codec.
//!
//! Each strand is `z_0 ∘ … ∘ z_K ∘ 0^{n mod Lmin}` with `z_i = c''_i ∘ 1 0^f 1 ∘ y_i`,
//! where `c''_i` is the padded Gray index and `y_i` the RLL image of block `i`;
//! the final block carries `0^N` in place of data.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::alphabet::{find_marker_occurrences, trailing_zero_run, OccurrenceKind, QString, SegmentCollection};
use crate::error::{param_err, Error, Result};
use crate::indexing::{build_encoded_index, decode_index_word};
use crate::params::CodeParams;

/// Encoded strands together with the parameters that produced them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Codeword {
    pub params: CodeParams,
    pub strands: Vec<QString>,
}

impl Codeword {
    /// The only strand of a single-strand codeword.
    pub fn single(&self) -> &QString {
        &self.strands[0]
    }
}

/// Where a segment sits in the codeword.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    /// Global Gray rank recovered from the segment.
    pub index: u64,
    pub strand: usize,
    /// Offset within the strand.
    pub offset: usize,
    /// `strand·n + offset`.
    pub global_offset: usize,
    /// Marker offset inside the `Lmin`-prefix that was used.
    pub marker_offset: usize,
    pub marker_kind: OccurrenceKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Located {
    Placed(Placement),
    /// Short tail piece or a piece lying entirely in the terminal region.
    Discard,
}

/// Lays out one strand around its encoded blocks `y_0 … y_{K−1}`.
fn assemble_strand(strand: usize, ys: &[QString], params: &CodeParams) -> QString {
    let mut z = Vec::with_capacity(params.n);
    let marker = crate::alphabet::marker(params.q, params.f);
    for i in 0..=params.blocks {
        let c = build_encoded_index(params.index_rank(strand, i), params)
            .expect("ranks below q^I by construction");
        z.extend_from_slice(c.padded.symbols());
        z.extend_from_slice(marker.symbols());
        match ys.get(i) {
            Some(y) => z.extend_from_slice(y.symbols()),
            None => z.resize(z.len() + params.block_len, 0),
        }
    }
    z.resize(params.n, 0);
    QString::from_raw(params.q, z)
}

/// Builds the codeword from `k·K` already-constrained blocks of length `N`, strand-major.
pub fn assemble_blocks(ys: &[QString], params: &CodeParams) -> Result<Codeword> {
    if ys.len() != params.k * params.blocks {
        return Err(param_err!("expected {} blocks, got {}", params.k * params.blocks, ys.len()));
    }
    if let Some(bad) = ys.iter().find(|y| y.len() != params.block_len || y.q() != params.q) {
        return Err(param_err!("block of length {} over q = {} does not fit N = {}", bad.len(), bad.q(), params.block_len));
    }
    let strands = ys
        .chunks(params.blocks)
        .enumerate()
        .map(|(s, chunk)| assemble_strand(s, chunk, params))
        .collect();
    Ok(Codeword { params: *params, strands })
}

/// Encodes `x` of length `k·K·m`; strand `s` carries `x[s·K·m .. (s+1)·K·m)`.
pub fn encode(x: &QString, params: &CodeParams) -> Result<Codeword> {
    if x.len() != params.message_len() || x.q() != params.q {
        return Err(param_err!(
            "message must have length k·K·m = {} over q = {} (got {} over q = {})",
            params.message_len(),
            params.q,
            x.len(),
            x.q()
        ));
    }
    let rll = params.rll_scheme();
    let ys = x
        .symbols()
        .chunks(params.m)
        .map(|b| rll.encode(&QString::from_raw(params.q, b.to_vec())))
        .collect::<Result<Vec<_>>>()?;
    assemble_blocks(&ys, params)
}

/// Strand-local positions of payload block `i`.
pub fn payload_range(params: &CodeParams, i: usize) -> std::ops::Range<usize> {
    let start = i * params.lmin + params.skeleton_len();
    start..start + params.block_len
}

/// One strand with every message-independent position filled and payload blocks unknown.
pub fn skeleton(strand: usize, params: &CodeParams) -> Vec<Option<u8>> {
    let mut z: Vec<Option<u8>> = assemble_strand(strand, &[], params).symbols().iter().map(|&s| Some(s)).collect();
    for i in 0..params.blocks {
        z[payload_range(params, i)].fill(None);
    }
    z
}

/// Recovers the index and position of a segment from its `Lmin`-prefix.
pub fn locate(u: &QString, params: &CodeParams) -> Result<Located> {
    locate_symbols(u.symbols(), params)
}

pub fn locate_symbols(u: &[u8], params: &CodeParams) -> Result<Located> {
    if u.len() < params.lmin {
        return Ok(Located::Discard);
    }
    match place(u, params) {
        Ok(p) => Ok(Located::Placed(p)),
        // Pieces from the zero tail of a strand end in a run longer than f.
        Err(Error::Corruption(_)) if trailing_zero_run(u) > params.f => Ok(Located::Discard),
        Err(e) => Err(e),
    }
}

fn place(u: &[u8], params: &CodeParams) -> Result<Placement> {
    let lmin = params.lmin;
    let alpha = params.alpha;
    let w = &u[..lmin];
    let occ = find_marker_occurrences(w, params.f);
    let (j, kind) = occ
        .iter()
        .find(|o| o.1 == OccurrenceKind::Complete)
        .or_else(|| occ.first())
        .copied()
        .ok_or_else(|| Error::Corruption("no marker in the Lmin-prefix".into()))?;
    let word: Vec<u8> = if j >= alpha {
        w[j - alpha..j].to_vec()
    } else {
        // Index cut at the front: read the window cyclically.
        w[lmin - (alpha - j)..].iter().chain(&w[..j]).copied().collect()
    };
    let mut index = decode_index_word(&word, params)?;
    if j == 0 {
        // The wrapped window is all of the next block's index.
        index = index
            .checked_sub(1)
            .ok_or_else(|| Error::Corruption("marker at offset 0 after index 0".into()))?;
    }
    let (strand, local) = params
        .split_rank(index)
        .ok_or_else(|| Error::Corruption(format!("index {index} is not used by the encoder")))?;
    let offset = (local * lmin + alpha)
        .checked_sub(j)
        .filter(|o| o + u.len() <= params.n)
        .ok_or_else(|| Error::Corruption(format!("segment placed outside strand {strand}")))?;
    Ok(Placement {
        index,
        strand,
        offset,
        global_offset: strand * params.n + offset,
        marker_offset: j,
        marker_kind: kind,
    })
}

/// Decoder that memoizes segment locations across calls.
#[derive(Clone, Debug)]
pub struct Decoder {
    params: CodeParams,
    cache: HashMap<Vec<u8>, Located>,
}

impl Decoder {
    pub fn new(params: CodeParams) -> Self {
        Self { params, cache: HashMap::new() }
    }

    pub fn locate(&mut self, u: &[u8]) -> Result<Located> {
        if let Some(hit) = self.cache.get(u) {
            return Ok(hit.clone());
        }
        let got = locate_symbols(u, &self.params)?;
        self.cache.insert(u.to_vec(), got.clone());
        Ok(got)
    }

    /// Reassembles every strand from the received segments.
    pub fn assemble(&mut self, received: &SegmentCollection) -> Result<Vec<Vec<Option<u8>>>> {
        let p = self.params;
        let mut strands = vec![vec![None; p.n]; p.k];
        for seg in received.segments() {
            if seg.q() != p.q {
                return Err(param_err!("segment over q = {} but params use q = {}", seg.q(), p.q));
            }
            let Located::Placed(pl) = self.locate(seg.symbols())? else {
                continue;
            };
            let buf = &mut strands[pl.strand][pl.offset..pl.offset + seg.len()];
            for (slot, &s) in buf.iter_mut().zip(seg.symbols()) {
                match slot {
                    Some(prev) if *prev != s => {
                        return Err(Error::Decode(format!(
                            "conflicting placements in strand {} at offset {}",
                            pl.strand, pl.offset
                        )));
                    }
                    _ => *slot = Some(s),
                }
            }
        }
        Ok(strands)
    }

    pub fn decode(&mut self, received: &SegmentCollection) -> Result<QString> {
        let p = self.params;
        let strands = self.assemble(received)?;
        let rll = p.rll_scheme();
        let head = p.skeleton_len();
        let mut out = Vec::with_capacity(p.message_len());
        for (s, z) in strands.iter().enumerate() {
            for i in 0..p.blocks {
                let start = i * p.lmin + head;
                let y = z[start..start + p.block_len]
                    .iter()
                    .map(|v| v.ok_or_else(|| {
                        Error::Decode(format!("strand {s} block {i} is not covered by any segment"))
                    }))
                    .collect::<Result<Vec<u8>>>()?;
                let x = rll.decode(&QString::from_raw(p.q, y)).map_err(|e| {
                    Error::Decode(format!("strand {s} block {i}: {e}"))
                })?;
                out.extend_from_slice(x.symbols());
            }
        }
        Ok(QString::from_raw(p.q, out))
    }
}

pub fn decode(received: &SegmentCollection, params: &CodeParams) -> Result<QString> {
    Decoder::new(*params).decode(received)
}

/// `n·k − K·m·k`.
pub fn code_redundancy(params: &CodeParams) -> usize {
    params.total_len() - params.message_len()
}

/// `(n mod Lmin) + Lmin + K·(Lmin − m)` per strand, summed over strands.
pub fn redundancy_decomposition(params: &CodeParams) -> usize {
    params.k * (params.n % params.lmin + params.lmin + params.blocks * (params.lmin - params.m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::{enumerate_segmentations, exact_segmentation};
    use crate::params::RawParams;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg_a() -> CodeParams {
        RawParams::new(2, 124, 1, 15, 20, 3).derive().unwrap()
    }

    fn random_message(p: &CodeParams, rng: &mut ChaCha8Rng) -> QString {
        QString::new(p.q, (0..p.message_len()).map(|_| rng.gen_range(0..p.q) as u8).collect()).unwrap()
    }

    /// Assembles the layout from its textual pieces, independently of `encode`.
    fn layout_oracle(x: &str) -> String {
        let gray = ["000", "001", "011", "010", "110", "111", "101", "100"];
        let mut z = String::new();
        for i in 0..=7 {
            let c = gray[i];
            let ones = c.chars().filter(|&ch| ch == '1').count();
            let cp = format!("{c}{}", ones % 2);
            let b: Vec<char> = cp.chars().collect();
            z += &format!("1{}{}1{}{}", b[0], b[1], b[2], b[3]);
            z += "10001";
            if i < 7 {
                let xi: Vec<char> = x[2 * i..2 * i + 2].chars().collect();
                z += &format!("1{}{}1", xi[0], xi[1]);
            } else {
                z += "0000";
            }
        }
        z + "0000"
    }

    #[test]
    fn all_zero_message_layout() {
        let p = cfg_a();
        let z = encode(&QString::zeros(2, 14), &p).unwrap();
        let s = z.single().to_string();
        assert_eq!(&s[..15], "100100100011001");
        assert_eq!(s, layout_oracle("00000000000000"));
    }

    #[test]
    fn layout_matches_oracle_for_random_messages() {
        let p = cfg_a();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let x = random_message(&p, &mut rng);
            let z = encode(&x, &p).unwrap();
            assert_eq!(z.single().len(), 124);
            assert_eq!(z.single().to_string(), layout_oracle(&x.to_string()));
        }
    }

    fn marker_census(z: &[u8], f: usize) -> usize {
        z.windows(f + 2)
            .filter(|w| w[0] == 1 && w[f + 1] == 1 && w[1..=f].iter().all(|&s| s == 0))
            .count()
    }

    #[test]
    fn marker_census_is_k_plus_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for raw in [
            RawParams::new(2, 124, 1, 15, 20, 3),
            RawParams::new(2, 124, 2, 16, 20, 3),
            RawParams::new(4, 300, 1, 20, 30, 2),
            RawParams::new(3, 500, 3, 25, 40, 3),
        ] {
            let p = raw.derive().unwrap();
            for _ in 0..100 {
                let z = encode(&random_message(&p, &mut rng), &p).unwrap();
                for s in &z.strands {
                    assert_eq!(marker_census(s.symbols(), p.f), p.blocks + 1);
                }
            }
        }
    }

    #[test]
    fn second_strand_starts_at_rank_stride() {
        let p = RawParams::new(2, 124, 2, 16, 20, 3).derive().unwrap();
        let z = encode(&QString::zeros(2, p.message_len()), &p).unwrap();
        let w = &z.strands[1].symbols()[..p.alpha];
        assert_eq!(decode_index_word(w, &p).unwrap(), 8);
        assert_eq!(p.index_stride(), 8);
    }

    #[test]
    fn offset_sweep_recovers_true_positions() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for raw in [
            RawParams::new(2, 124, 1, 15, 20, 3),
            RawParams::new(2, 131, 1, 15, 20, 3),
            RawParams::new(2, 200, 2, 18, 25, 3),
            RawParams::new(4, 300, 1, 20, 30, 2),
        ] {
            let p = raw.derive().unwrap();
            for _ in 0..20 {
                let z = encode(&random_message(&p, &mut rng), &p).unwrap();
                for (s, strand) in z.strands.iter().enumerate() {
                    for g in 0..=p.n - p.lmin {
                        for len in p.lmin..=p.lmax.min(p.n - g) {
                            let u = &strand.symbols()[g..g + len];
                            let got = locate_symbols(u, &p).unwrap();
                            match got {
                                Located::Placed(pl) => {
                                    assert_eq!((pl.strand, pl.offset), (s, g), "{raw:?} g={g}");
                                    assert_eq!(pl.global_offset, s * p.n + g);
                                }
                                // No information symbol inside the piece.
                                Located::Discard => assert!(g >= p.blocks * p.lmin, "{raw:?} g={g}"),
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn discard_cases() {
        let p = cfg_a();
        assert_eq!(locate(&QString::zeros(2, 15), &p).unwrap(), Located::Discard);
        assert_eq!(locate(&QString::zeros(2, 3), &p).unwrap(), Located::Discard);
        let z = encode(&QString::zeros(2, 14), &p).unwrap();
        let pl = locate(&z.single().slice(0, 15), &p).unwrap();
        let Located::Placed(pl) = pl else { panic!() };
        assert_eq!((pl.marker_offset, pl.offset, pl.marker_kind), (6, 0, OccurrenceKind::Complete));
        let noise = QString::parse("010101010101010", 2).unwrap();
        assert!(matches!(locate(&noise, &p), Err(Error::Corruption(_))));
    }

    #[test]
    fn round_trip_exact_segmentation() {
        let p = cfg_a();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let x = random_message(&p, &mut rng);
            let z = encode(&x, &p).unwrap();
            assert_eq!(decode(&exact_segmentation(z.single(), 15).unwrap(), &p).unwrap(), x);
            assert_eq!(decode(&SegmentCollection::new(vec![z.single().clone()]), &p).unwrap(), x);
        }
    }

    #[test]
    fn round_trip_every_segmentation() {
        let p = cfg_a();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..3 {
            let x = random_message(&p, &mut rng);
            let z = encode(&x, &p).unwrap();
            let all = enumerate_segmentations(z.single(), 15, 20).unwrap();
            assert!(all.len() > 1000);
            let mut dec = Decoder::new(p);
            for t in &all {
                assert_eq!(dec.decode(t).unwrap(), x);
            }
        }
    }

    #[test]
    fn duplicates_do_not_conflict() {
        let p = cfg_a();
        let z = encode(&QString::zeros(2, 14), &p).unwrap();
        let t = exact_segmentation(z.single(), 15).unwrap();
        let doubled = t.union(&t);
        assert_eq!(decode(&doubled, &p).unwrap(), QString::zeros(2, 14));
    }

    #[test]
    fn missing_segment_is_a_decode_failure() {
        let p = cfg_a();
        let z = encode(&QString::zeros(2, 14), &p).unwrap();
        let mut segs = exact_segmentation(z.single(), 15).unwrap().into_segments();
        segs.remove(3);
        assert!(matches!(decode(&SegmentCollection::new(segs), &p), Err(Error::Decode(_))));
    }

    #[test]
    fn redundancy_examples() {
        let p = cfg_a();
        assert_eq!(code_redundancy(&p), 110);
        assert_eq!(redundancy_decomposition(&p), 4 + 15 + 7 * 13);
        let two = RawParams::new(2, 124, 2, 16, 20, 3).derive().unwrap();
        assert_eq!(code_redundancy(&two), 2 * (124 - two.blocks * two.m));
        assert_eq!(code_redundancy(&two), redundancy_decomposition(&two));
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let p = cfg_a();
        assert!(matches!(encode(&QString::zeros(2, 13), &p), Err(Error::Param(_))));
    }
}
