//! Sequences over a finite alphabet `Z_q`, segment multisets, and the
//! segmentation / marker primitives every codec in the crate builds on.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{param_err, Error, Result};

/// Largest supported alphabet; symbols are stored as bytes.
pub const MAX_Q: u32 = 256;

/// A finite string over the alphabet `{0, .., q-1}`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QString {
    q: u32,
    symbols: Vec<u8>,
}

impl QString {
    pub fn new(q: u32, symbols: Vec<u8>) -> Result<Self> {
        if !(2..=MAX_Q).contains(&q) {
            return Err(param_err!("alphabet size {q} outside [2, {MAX_Q}]"));
        }
        if let Some(bad) = symbols.iter().find(|&&s| u32::from(s) >= q) {
            return Err(param_err!("symbol {bad} not below q = {q}"));
        }
        Ok(Self { q, symbols })
    }

    /// Builds a string without validating symbols. Callers guarantee `s < q`.
    pub(crate) fn from_raw(q: u32, symbols: Vec<u8>) -> Self {
        debug_assert!(symbols.iter().all(|&s| u32::from(s) < q));
        Self { q, symbols }
    }

    pub fn empty(q: u32) -> Self {
        Self::from_raw(q, Vec::new())
    }

    pub fn zeros(q: u32, len: usize) -> Self {
        Self::from_raw(q, vec![0; len])
    }

    /// Parses the text form: one digit per symbol, or `ACGT` when `q == 4`.
    pub fn parse(text: &str, q: u32) -> Result<Self> {
        let mut symbols = Vec::with_capacity(text.len());
        for c in text.trim().chars() {
            let v = match c {
                '0'..='9' => c as u32 - '0' as u32,
                'A' | 'a' if q == 4 => 0,
                'C' | 'c' if q == 4 => 1,
                'G' | 'g' if q == 4 => 2,
                'T' | 't' if q == 4 => 3,
                _ => return Err(param_err!("unexpected character {c:?} in q-ary text")),
            };
            if v >= q {
                return Err(param_err!("symbol {v} not below q = {q}"));
            }
            symbols.push(v as u8);
        }
        if q > 10 {
            return Err(param_err!("text form only defined for q <= 10"));
        }
        Self::new(q, symbols)
    }

    /// Renders q = 4 strings with the nucleotide alias.
    pub fn to_acgt(&self) -> Option<String> {
        (self.q == 4).then(|| {
            self.symbols
                .iter()
                .map(|&s| ['A', 'C', 'G', 'T'][s as usize])
                .collect()
        })
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn into_symbols(self) -> Vec<u8> {
        self.symbols
    }

    pub fn slice(&self, start: usize, end: usize) -> QString {
        QString::from_raw(self.q, self.symbols[start..end].to_vec())
    }

    /// Number of nonzero symbols.
    pub fn weight(&self) -> usize {
        self.symbols.iter().filter(|&&s| s != 0).count()
    }

    pub fn hamming_distance(&self, other: &QString) -> Result<usize> {
        if self.q != other.q || self.len() != other.len() {
            return Err(param_err!("hamming distance needs equal length and alphabet"));
        }
        Ok(self
            .symbols
            .iter()
            .zip(&other.symbols)
            .filter(|(a, b)| a != b)
            .count())
    }

    /// Componentwise additive inverse in `Z_q`.
    pub fn negated(&self) -> QString {
        let q = self.q;
        QString::from_raw(
            q,
            self.symbols
                .iter()
                .map(|&s| ((q - u32::from(s)) % q) as u8)
                .collect(),
        )
    }
}

impl fmt::Display for QString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.symbols {
            if s < 10 {
                write!(f, "{s}")?;
            } else {
                write!(f, "[{s}]")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for QString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QString(q={}, \"{}\")", self.q, self)
    }
}

/// `a ∘ b`.
pub fn concat(a: &QString, b: &QString) -> Result<QString> {
    if a.q != b.q {
        return Err(param_err!("cannot concatenate strings over q={} and q={}", a.q, b.q));
    }
    let mut symbols = Vec::with_capacity(a.len() + b.len());
    symbols.extend_from_slice(&a.symbols);
    symbols.extend_from_slice(&b.symbols);
    Ok(QString::from_raw(a.q, symbols))
}

/// Componentwise `x + e` over `Z_q`.
pub fn hamming_perturb(x: &QString, error_vector: &QString) -> Result<QString> {
    if x.q != error_vector.q || x.len() != error_vector.len() {
        return Err(param_err!("error vector must match the string's length and alphabet"));
    }
    let q = x.q;
    Ok(QString::from_raw(
        q,
        x.symbols
            .iter()
            .zip(&error_vector.symbols)
            .map(|(&a, &b)| ((u32::from(a) + u32::from(b)) % q) as u8)
            .collect(),
    ))
}

/// Canonical order for segments inside a multiset: length first, then lexicographic.
fn canonical_cmp(a: &QString, b: &QString) -> std::cmp::Ordering {
    a.len().cmp(&b.len()).then_with(|| a.symbols.cmp(&b.symbols))
}

/// Unordered multiset of segments. Stored sorted so that equality is multiset equality.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct SegmentCollection {
    segments: Vec<QString>,
}

impl SegmentCollection {
    pub fn new(mut segments: Vec<QString>) -> Self {
        segments.sort_by(canonical_cmp);
        Self { segments }
    }

    pub fn segments(&self) -> &[QString] {
        &self.segments
    }

    pub fn into_segments(self) -> Vec<QString> {
        self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Multiset union.
    pub fn union(&self, other: &SegmentCollection) -> SegmentCollection {
        let mut all = self.segments.clone();
        all.extend(other.segments.iter().cloned());
        SegmentCollection::new(all)
    }

    pub fn total_len(&self) -> usize {
        self.segments.iter().map(QString::len).sum()
    }
}

impl fmt::Debug for SegmentCollection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{{")?;
        for (i, s) in self.segments.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "}}}}")
    }
}

impl PartialOrd for SegmentCollection {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SegmentCollection {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.segments
            .len()
            .cmp(&other.segments.len())
            .then_with(|| {
                for (a, b) in self.segments.iter().zip(&other.segments) {
                    let c = canonical_cmp(a, b);
                    if c.is_ne() {
                        return c;
                    }
                }
                std::cmp::Ordering::Equal
            })
    }
}

/// Noise budget of a codec configuration. The two noise models are never mixed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBudget {
    pub t_sub: usize,
    pub t_del: usize,
}

impl ErrorBudget {
    pub fn substitutions(t: usize) -> Self {
        Self { t_sub: t, t_del: 0 }
    }

    pub fn deletions(t: usize) -> Self {
        Self { t_sub: 0, t_del: t }
    }

    pub fn validate(&self) -> Result<()> {
        if self.t_sub > 0 && self.t_del > 0 {
            return Err(param_err!(
                "substitutions and segment deletions cannot be combined in one configuration"
            ));
        }
        Ok(())
    }
}

/// Default cap on the number of distinct multisets [`enumerate_segmentations`] may produce.
pub const DEFAULT_ENUMERATION_CAP: usize = 10_000_000;

/// All `(lmin, lmax)`-segmentations of `x` as deduplicated multisets, in canonical order.
pub fn enumerate_segmentations(
    x: &QString,
    lmin: usize,
    lmax: usize,
) -> Result<Vec<SegmentCollection>> {
    enumerate_segmentations_capped(x, lmin, lmax, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_segmentations_capped(
    x: &QString,
    lmin: usize,
    lmax: usize,
    cap: usize,
) -> Result<Vec<SegmentCollection>> {
    if lmin == 0 || lmin > lmax || lmax > x.len().max(1) {
        return Err(param_err!(
            "need 1 <= lmin <= lmax <= |x| (got lmin={lmin}, lmax={lmax}, |x|={})",
            x.len()
        ));
    }
    let mut found = BTreeSet::new();
    let mut patterns = 0usize;
    let mut cuts = Vec::new();
    for_each_cut_pattern(x.len(), lmin, lmax, &mut cuts, &mut |lengths| {
        patterns += 1;
        if patterns > cap.saturating_mul(16) {
            return Err(Error::Resource(format!("more than {} cut patterns", cap * 16)));
        }
        let mut pos = 0;
        let pieces = lengths
            .iter()
            .map(|&l| {
                let s = x.slice(pos, pos + l);
                pos += l;
                s
            })
            .collect();
        found.insert(SegmentCollection::new(pieces));
        if found.len() > cap {
            return Err(Error::Resource(format!("more than {cap} distinct segmentations")));
        }
        Ok(())
    })?;
    Ok(found.into_iter().collect())
}

/// Calls `visit` with the piece lengths of every admissible cut pattern of a
/// length-`n` string: all pieces but the last in `[lmin, lmax]`, the last in `[1, lmax]`.
pub fn for_each_cut_pattern<F>(
    n: usize,
    lmin: usize,
    lmax: usize,
    cuts: &mut Vec<usize>,
    visit: &mut F,
) -> Result<()>
where
    F: FnMut(&[usize]) -> Result<()>,
{
    if n == 0 {
        if !cuts.is_empty() {
            visit(cuts)?;
        }
        return Ok(());
    }
    // The remainder as a final (possibly short) piece. Pieces of length in
    // [lmin, lmax] are reached through the loop below with a zero remainder.
    if n < lmin {
        cuts.push(n);
        visit(cuts)?;
        cuts.pop();
        return Ok(());
    }
    for l in lmin..=lmax.min(n) {
        cuts.push(l);
        for_each_cut_pattern(n - l, lmin, lmax, cuts, visit)?;
        cuts.pop();
    }
    Ok(())
}

/// The unique `(l, l)`-segmentation: consecutive `l`-pieces plus a shorter tail.
pub fn exact_segmentation(x: &QString, l: usize) -> Result<SegmentCollection> {
    if l == 0 {
        return Err(param_err!("segment length must be positive"));
    }
    Ok(SegmentCollection::new(exact_pieces(x, l)))
}

pub(crate) fn exact_pieces(x: &QString, l: usize) -> Vec<QString> {
    x.symbols()
        .chunks(l)
        .map(|c| QString::from_raw(x.q(), c.to_vec()))
        .collect()
}

/// [`exact_segmentation`] applied to every string of a multiset, as one union.
pub fn exact_segmentation_multi(strings: &[QString], l: usize) -> Result<SegmentCollection> {
    if l == 0 {
        return Err(param_err!("segment length must be positive"));
    }
    Ok(SegmentCollection::new(
        strings.iter().flat_map(|x| exact_pieces(x, l)).collect(),
    ))
}

/// Whether an occurrence of `1 0^f 1` lies inside the string or wraps its end.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OccurrenceKind {
    Complete,
    Cyclic,
}

/// The marker `1 0^f 1`.
pub fn marker(q: u32, f: usize) -> QString {
    let mut s = vec![0u8; f + 2];
    s[0] = 1;
    s[f + 1] = 1;
    QString::from_raw(q, s)
}

/// Occurrences of `1 0^f 1` in `u`, complete ones and those wrapping from the
/// end of `u` back to its start. Sorted by offset; complete first on ties.
pub fn find_marker_occurrences(u: &[u8], f: usize) -> Vec<(usize, OccurrenceKind)> {
    let len = u.len();
    let width = f + 2;
    if len < width {
        return Vec::new();
    }
    let mut out = Vec::new();
    // Complete occurrences: scan zero runs of length exactly f bounded by ones.
    let mut i = 0;
    while i < len {
        if u[i] == 1 {
            let mut j = i + 1;
            while j < len && u[j] == 0 {
                j += 1;
            }
            if j < len && u[j] == 1 && j - i - 1 == f {
                out.push((i, OccurrenceKind::Complete));
            }
            if j == i + 1 {
                i += 1;
            } else {
                i = j;
            }
        } else {
            i += 1;
        }
    }
    // Cyclic occurrences start in the last f+1 positions.
    for j in (len - width + 1)..len {
        if (0..width).all(|p| {
            let expected = if p == 0 || p == width - 1 { 1 } else { 0 };
            u[(j + p) % len] == expected
        }) {
            out.push((j, OccurrenceKind::Cyclic));
        }
    }
    out.sort();
    out
}

/// Length of the longest run of zeros.
pub fn longest_zero_run(u: &[u8]) -> usize {
    let mut best = 0;
    let mut cur = 0;
    for &s in u {
        if s == 0 {
            cur += 1;
            best = best.max(cur);
        } else {
            cur = 0;
        }
    }
    best
}

/// Number of trailing zeros.
pub fn trailing_zero_run(u: &[u8]) -> usize {
    u.iter().rev().take_while(|&&s| s == 0).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(text: &str) -> QString {
        QString::parse(text, 2).unwrap()
    }

    #[test]
    fn concat_examples() {
        assert_eq!(concat(&s("001"), &s("01")).unwrap(), s("00101"));
        assert_eq!(concat(&QString::empty(2), &s("110")).unwrap(), s("110"));
        let m = concat(&concat(&s("1"), &QString::zeros(2, 3)).unwrap(), &s("1")).unwrap();
        assert_eq!(m, s("10001"));
        assert_eq!(m, marker(2, 3));
    }

    #[test]
    fn concat_rejects_alphabet_mismatch() {
        let a = QString::parse("012", 3).unwrap();
        assert!(matches!(concat(&a, &s("1")), Err(Error::Param(_))));
    }

    #[test]
    fn symbol_validation() {
        assert!(QString::new(2, vec![0, 2]).is_err());
        assert!(QString::new(1, vec![]).is_err());
        assert!(QString::parse("0x", 2).is_err());
        let dna = QString::parse("ACGT", 4).unwrap();
        assert_eq!(dna.symbols(), &[0, 1, 2, 3]);
        assert_eq!(dna.to_acgt().unwrap(), "ACGT");
    }

    #[test]
    fn spectrum_of_00101() {
        let got = enumerate_segmentations(&s("00101"), 2, 3).unwrap();
        let want: BTreeSet<_> = [
            vec!["001", "01"],
            vec!["00", "101"],
            vec!["00", "10", "1"],
        ]
        .into_iter()
        .map(|v| SegmentCollection::new(v.into_iter().map(s).collect()))
        .collect();
        assert_eq!(got.into_iter().collect::<BTreeSet<_>>(), want);
    }

    #[test]
    fn single_segment_spectrum() {
        let x = s("0110100");
        let got = enumerate_segmentations(&x, 7, 7).unwrap();
        assert_eq!(got, vec![SegmentCollection::new(vec![x])]);
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let x = QString::zeros(2, 40);
        let x = QString::new(2, x.symbols().iter().enumerate().map(|(i, _)| (i % 3 == 0) as u8).collect()).unwrap();
        let err = enumerate_segmentations_capped(&x, 2, 5, 10).unwrap_err();
        assert!(matches!(err, Error::Resource(_)));
    }

    /// Independent oracle: all 2^(n-1) cut masks, filtered by the length rules.
    fn brute_force_spectrum(x: &QString, lmin: usize, lmax: usize) -> BTreeSet<SegmentCollection> {
        let n = x.len();
        let mut out = BTreeSet::new();
        for mask in 0u32..(1 << (n - 1)) {
            let mut pieces = Vec::new();
            let mut start = 0;
            for p in 1..=n {
                if p == n || mask >> (p - 1) & 1 == 1 {
                    pieces.push(x.slice(start, p));
                    start = p;
                }
            }
            let last = pieces.len() - 1;
            let ok = pieces.iter().enumerate().all(|(i, u)| {
                if i < last {
                    (lmin..=lmax).contains(&u.len())
                } else {
                    u.len() <= lmax
                }
            });
            if ok {
                out.insert(SegmentCollection::new(pieces));
            }
        }
        out
    }

    #[test]
    fn spectrum_matches_cut_mask_oracle() {
        for text in ["001011", "000000", "101101", "110010", "0110100110"] {
            let x = s(text);
            for lmin in 1..=3 {
                for lmax in lmin..=4.min(x.len()) {
                    let got: BTreeSet<_> =
                        enumerate_segmentations(&x, lmin, lmax).unwrap().into_iter().collect();
                    assert_eq!(got, brute_force_spectrum(&x, lmin, lmax), "{text} {lmin} {lmax}");
                }
            }
        }
    }

    #[test]
    fn exact_segmentation_examples() {
        let strings = [s("01010"), s("00101"), s("11101")];
        let got = exact_segmentation_multi(&strings, 2).unwrap();
        let want = SegmentCollection::new(
            ["01", "01", "0", "00", "10", "1", "11", "10", "1"].into_iter().map(s).collect(),
        );
        assert_eq!(got, want);
        assert_eq!(
            exact_segmentation(&s("10001"), 5).unwrap(),
            SegmentCollection::new(vec![s("10001")])
        );
        assert_eq!(
            exact_segmentation(&QString::zeros(2, 7), 3).unwrap(),
            SegmentCollection::new(vec![s("000"), s("000"), s("0")])
        );
    }

    fn naive_markers(u: &[u8], f: usize) -> Vec<(usize, OccurrenceKind)> {
        let m = marker(2, f);
        let w = f + 2;
        let mut out = Vec::new();
        for j in 0..u.len() {
            let rotated: Vec<u8> = (0..w).map(|p| u[(j + p) % u.len()]).collect();
            if rotated == m.symbols() {
                let kind = if j + w <= u.len() {
                    OccurrenceKind::Complete
                } else {
                    OccurrenceKind::Cyclic
                };
                out.push((j, kind));
            }
        }
        out
    }

    #[test]
    fn marker_examples() {
        assert_eq!(
            find_marker_occurrences(s("100011").symbols(), 3),
            vec![(0, OccurrenceKind::Complete)]
        );
        let u = s("01100");
        assert_eq!(find_marker_occurrences(u.symbols(), 1), naive_markers(u.symbols(), 1));
        assert!(find_marker_occurrences(s("110111011").symbols(), 2).is_empty());
        // suffix "10" + prefix "001" of 1 0^3 1
        assert_eq!(
            find_marker_occurrences(s("0011110").symbols(), 3),
            vec![(5, OccurrenceKind::Cyclic)]
        );
    }

    #[test]
    fn marker_scan_agrees_with_rotation_scan() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100_000 {
            let f = rng.gen_range(1..5);
            let len = rng.gen_range(f + 2..24);
            let u: Vec<u8> = (0..len).map(|_| (rng.gen_range(0..10) < 6) as u8 ^ 1).collect();
            assert_eq!(find_marker_occurrences(&u, f), naive_markers(&u, f), "{u:?} f={f}");
        }
    }

    #[test]
    fn hamming_examples() {
        let x = s("0110");
        assert_eq!(hamming_perturb(&x, &QString::zeros(2, 4)).unwrap(), x);
        let y = hamming_perturb(&s("000"), &s("010")).unwrap();
        assert_eq!(y, s("010"));
        assert_eq!(y.hamming_distance(&s("000")).unwrap(), 1);
        // mod-3 oracle: (0+0, 1+2, 2+1) mod 3
        let a = QString::parse("012", 3).unwrap();
        let e = QString::parse("021", 3).unwrap();
        let want: Vec<u8> = a.symbols().iter().zip(e.symbols()).map(|(x, y)| (x + y) % 3).collect();
        assert_eq!(hamming_perturb(&a, &e).unwrap().symbols(), &want[..]);
        assert_eq!(want, vec![0, 0, 0]);
        assert!(hamming_perturb(&a, &s("01")).is_err());
    }

    #[test]
    fn error_budget_models_are_exclusive() {
        assert!(ErrorBudget { t_sub: 1, t_del: 1 }.validate().is_err());
        assert!(ErrorBudget::deletions(2).validate().is_ok());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn qstring(q: u32, max_len: usize) -> impl Strategy<Value = QString> {
            proptest::collection::vec(0..q as u8, 0..max_len)
                .prop_map(move |v| QString::new(q, v).unwrap())
        }

        proptest! {
            #[test]
            fn perturb_then_negate_is_identity(
                (x, e) in (2u32..7, 0usize..30).prop_flat_map(|(q, n)| (
                    proptest::collection::vec(0..q as u8, n).prop_map(move |v| QString::new(q, v).unwrap()),
                    proptest::collection::vec(0..q as u8, n).prop_map(move |v| QString::new(q, v).unwrap()),
                ))
            ) {
                let y = hamming_perturb(&x, &e).unwrap();
                prop_assert_eq!(y.hamming_distance(&x).unwrap(), e.weight());
                prop_assert_eq!(hamming_perturb(&y, &e.negated()).unwrap(), x);
            }

            #[test]
            fn exact_segmentation_is_the_only_member(x in qstring(2, 14), l in 1usize..5) {
                prop_assume!(x.len() >= l);
                let all = enumerate_segmentations(&x, l, l).unwrap();
                prop_assert_eq!(all.len(), 1);
                prop_assert_eq!(&all[0], &exact_segmentation(&x, l).unwrap());
            }

            #[test]
            fn segmentations_reassemble(x in qstring(2, 11), lmin in 1usize..4, extra in 0usize..3) {
                let lmax = lmin + extra;
                prop_assume!(x.len() >= lmax);
                for seg in enumerate_segmentations(&x, lmin, lmax).unwrap() {
                    prop_assert_eq!(seg.total_len(), x.len());
                    let short = seg.segments().iter().filter(|u| u.len() < lmin).count();
                    prop_assert!(short <= 1);
                    prop_assert!(seg.segments().iter().all(|u| u.len() <= lmax && !u.is_empty()));
                    // Some ordering of the pieces concatenates back to x.
                    prop_assert!(reassembles(&x.symbols()[..], seg.segments(), &mut vec![false; seg.len()], lmin));
                }
            }
        }

        fn reassembles(rest: &[u8], pieces: &[QString], used: &mut Vec<bool>, lmin: usize) -> bool {
            if rest.is_empty() {
                return used.iter().all(|&u| u);
            }
            for i in 0..pieces.len() {
                let p = pieces[i].symbols();
                if !used[i] && rest.starts_with(p) && (p.len() >= lmin || p.len() == rest.len()) {
                    used[i] = true;
                    if reassembles(&rest[p.len()..], pieces, used, lmin) {
                        return true;
                    }
                    used[i] = false;
                }
            }
            false
        }
    }
}
