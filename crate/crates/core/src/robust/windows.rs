//! Windows of received segments and their validity classification.

use serde::{Deserialize, Serialize};

use crate::alphabet::{find_marker_occurrences, OccurrenceKind, QString};
use crate::indexing::{gray_rank, strip_ones};
use crate::params::CodeParams;
use crate::rll::RllKind;

/// Non-overlapping `Lmin`-pieces of `u`, the last of length in `[Lmin, 2·Lmin)`.
/// Segments shorter than `Lmin` yield nothing.
pub fn windows(u: &QString, lmin: usize) -> Vec<(usize, QString)> {
    let count = u.len() / lmin;
    (0..count)
        .map(|i| {
            let start = i * lmin;
            let end = if i + 1 == count { u.len() } else { start + lmin };
            (start, u.slice(start, end))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    NotADecodable,
    ADecodableInvalid,
    Valid,
}

/// Classification of a window together with the index it decodes to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Validity {
    pub classification: Classification,
    /// Offset in the window of the marker whose index was used.
    pub chosen_marker_offset: Option<usize>,
    pub chosen_index_kind: Option<OccurrenceKind>,
    /// `ind'(w)`: global rank of the first encoded index meeting the window.
    pub index: Option<u64>,
    pub strand: Option<usize>,
    /// Strand-local offset implied for the window's first symbol.
    pub offset: Option<usize>,
}

impl Validity {
    fn rejected(classification: Classification) -> Self {
        Self {
            classification,
            chosen_marker_offset: None,
            chosen_index_kind: None,
            index: None,
            strand: None,
            offset: None,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.classification == Classification::Valid
    }
}

/// A marker occurrence used as an anchor, in window coordinates.
#[derive(Clone, Copy, Debug)]
struct Anchor {
    /// Position of the marker's first symbol within the window.
    pos: usize,
}

/// The `alpha` symbols read as an index.
struct Reading {
    anchor: Anchor,
    cyclic: bool,
    /// `(rank, parity_ok)`, or `None` when a padded position is not `1`.
    parsed: Option<(u64, bool)>,
}

fn parse(word: &[u8], params: &CodeParams) -> Option<(u64, bool)> {
    let c = strip_ones(word, params.f)?;
    let sum: u32 = c.iter().map(|&s| u32::from(s)).sum();
    Some((gray_rank(&c[..params.index_len], params.q), sum % params.q == 0))
}

/// Anchors of a window plus prefix occurrences out of phase with them.
struct Anchors {
    anchors: Vec<Anchor>,
    conflicts: Vec<usize>,
}

fn anchors(w: &[u8], params: &CodeParams) -> Option<Anchors> {
    let lmin = params.lmin;
    let complete: Vec<usize> = find_marker_occurrences(w, params.f)
        .into_iter()
        .filter(|o| o.1 == OccurrenceKind::Complete)
        .map(|o| o.0)
        .collect();
    if complete.len() >= 2 {
        // A unique pair at distance exactly Lmin; extra complete markers are forgeries.
        let pairs: Vec<(usize, usize)> = complete
            .iter()
            .flat_map(|&a| complete.iter().filter(move |&&b| b == a + lmin).map(move |&b| (a, b)))
            .collect();
        return match pairs.as_slice() {
            [(a, b)] => Some(Anchors { anchors: vec![Anchor { pos: *a }, Anchor { pos: *b }], conflicts: vec![] }),
            _ => None,
        };
    }
    // Cyclic occurrences of the Lmin-prefix and the Lmin-suffix, in window coordinates.
    let base = w.len() - lmin;
    let cyclic = |start: usize| {
        find_marker_occurrences(&w[start..start + lmin], params.f)
            .into_iter()
            .filter(|o| o.1 == OccurrenceKind::Cyclic)
            .map(move |o| start + o.0)
    };
    let prefix: Vec<usize> = cyclic(0).collect();
    let pos = match complete.first().or(prefix.first()) {
        Some(p) => *p,
        None => cyclic(base).next()?,
    };
    // A forged lone marker needs the genuine one split at both edges, and the
    // split marker then shows up as a cyclic occurrence of the Lmin-prefix at
    // another phase. Only stuffed blocks rule such occurrences out in clean windows.
    let conflicts = match params.rll {
        RllKind::Stuffing => prefix.into_iter().filter(|&j| j % lmin != pos % lmin).collect(),
        RllKind::SequenceReplacement => Vec::new(),
    };
    Some(Anchors { anchors: vec![Anchor { pos }], conflicts })
}

fn reading(w: &[u8], anchor: Anchor, params: &CodeParams) -> Reading {
    let (lmin, alpha) = (params.lmin, params.alpha);
    if anchor.pos >= alpha {
        let word = &w[anchor.pos - alpha..anchor.pos];
        Reading { anchor, cyclic: false, parsed: parse(word, params) }
    } else {
        // Index cut at the front: read it cyclically from the Lmin-prefix.
        let word: Vec<u8> = w[lmin - (alpha - anchor.pos)..lmin]
            .iter()
            .chain(&w[..anchor.pos])
            .copied()
            .collect();
        Reading { anchor, cyclic: true, parsed: parse(&word, params) }
    }
}

/// Classifies a window of length in `[Lmin, 2·Lmin)` and decodes its index.
pub fn classify_window(w: &[u8], params: &CodeParams) -> Validity {
    debug_assert!(w.len() >= params.lmin && w.len() < 2 * params.lmin);
    let Some(Anchors { anchors, conflicts }) = anchors(w, params) else {
        return Validity::rejected(Classification::NotADecodable);
    };
    let readings: Vec<Reading> = anchors.iter().map(|&a| reading(w, a, params)).collect();
    let complete: Vec<&Reading> = readings.iter().filter(|r| !r.cyclic).collect();
    let good = |r: &Reading| matches!(r.parsed, Some((_, true)));
    let chosen: Option<(&Reading, u64)> = match complete.as_slice() {
        [] => {
            let r = &readings[0];
            r.parsed.and_then(|(rank, parity_ok)| {
                let mut rank = if parity_ok { Some(rank) } else { rank.checked_sub(1) }?;
                if r.anchor.pos == 0 {
                    rank = rank.checked_sub(1)?;
                }
                Some((r, rank))
            })
        }
        [one] => good(one).then(|| (*one, one.parsed.unwrap().0)),
        [a, b] => match (good(a), good(b)) {
            (true, false) => Some((*a, a.parsed.unwrap().0)),
            (false, true) => Some((*b, b.parsed.unwrap().0)),
            (true, true) if b.parsed.unwrap().0 == a.parsed.unwrap().0 + 1 => {
                Some((*a, a.parsed.unwrap().0))
            }
            _ => None,
        },
        _ => None,
    };
    let Some((r, index)) = chosen else {
        return Validity::rejected(Classification::ADecodableInvalid);
    };
    let placed = params.split_rank(index).and_then(|(strand, local)| {
        (local * params.lmin + params.alpha)
            .checked_sub(r.anchor.pos)
            .filter(|o| o + w.len() <= params.n)
            .map(|o| (strand, o))
    });
    let Some((strand, offset)) = placed else {
        return Validity::rejected(Classification::ADecodableInvalid);
    };
    if !conflicts.iter().all(|&j| explained_by_tail(w, j, offset, params)) {
        return Validity::rejected(Classification::NotADecodable);
    }
    // Report the first encoded index meeting the window, whichever reading fixed the offset.
    let local = offset.saturating_sub(params.alpha).div_ceil(params.lmin);
    let index = params.index_rank(strand, local);
    Validity {
        classification: Classification::Valid,
        chosen_marker_offset: Some(r.anchor.pos),
        chosen_index_kind: Some(if r.cyclic { OccurrenceKind::Cyclic } else { OccurrenceKind::Complete }),
        index: Some(index),
        strand: Some(strand),
        offset: Some(offset),
    }
}

/// Whether an out-of-phase prefix occurrence at `j` is the zero tail of the
/// strand showing through the wrap, given the window sits at `offset`.
///
/// Stuffed blocks lock every zero run to the marker phase, so only the
/// unstuffed `0^N ∘ 0^{n mod Lmin}` tail can fake a cyclic occurrence in a
/// clean window.
fn explained_by_tail(w: &[u8], j: usize, offset: usize, params: &CodeParams) -> bool {
    let lmin = params.lmin;
    let zeros = params.blocks * lmin + params.skeleton_len();
    let tail_start = zeros.saturating_sub(offset);
    let touches = (j..lmin).chain(0..j + params.marker_len - lmin).any(|p| p >= tail_start);
    touches && w.iter().skip(tail_start).all(|&s| s == 0)
}

/// `(ind'(w), strand-global offset)` of a valid window.
pub fn ind_prime(w: &[u8], params: &CodeParams) -> Option<(u64, usize)> {
    let v = classify_window(w, params);
    v.is_valid().then(|| (v.index.unwrap(), v.strand.unwrap() * params.n + v.offset.unwrap()))
}
