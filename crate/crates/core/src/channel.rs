//! Torn-paper channel simulator.
//!
//! Strategies cut every strand into an admissible segmentation, optionally after
//! substitutions, and may drop pieces afterwards. Everything is driven by a `u64`
//! seed so a trial can be replayed from its report alone.

use std::fmt;
use std::str::FromStr;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::alphabet::{ErrorBudget, QString, SegmentCollection};
use crate::codec::{locate_symbols, Codeword, Decoder, Located};
use crate::error::{param_err, Error, Result};
use crate::params::CodeParams;
use crate::robust::{AnyCodec, NoiseModel, RobustConfig};

/// Independent random streams derived from one seed.
const STREAM_MESSAGE: u64 = 1;
const STREAM_CUTS: u64 = 2;
const STREAM_SHUFFLE: u64 = 3;
const STREAM_CORRUPT: u64 = 4;
const STREAM_DELETE: u64 = 5;

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// How the adversary chooses cut positions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    /// Piece lengths uniform in `[Lmin, Lmax]`.
    UniformRandomCuts,
    /// Consecutive `Lmin`-pieces.
    AllLmin,
    /// Cuts inside markers whenever one is reachable.
    MarkerStraddle,
    /// Cuts inside encoded indices whenever one is reachable.
    IndexStraddle,
    /// As many `Lmin`-pieces as possible with a final piece of length 1.
    GreedyShort,
    /// Explicit piece lengths, one list per strand (a single list applies to all strands).
    Scripted(Vec<Vec<usize>>),
}

impl StrategyKind {
    /// The non-scripted strategies.
    pub const MENU: [StrategyKind; 5] = [
        StrategyKind::UniformRandomCuts,
        StrategyKind::AllLmin,
        StrategyKind::MarkerStraddle,
        StrategyKind::IndexStraddle,
        StrategyKind::GreedyShort,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            StrategyKind::UniformRandomCuts => "uniform_random_cuts",
            StrategyKind::AllLmin => "all_lmin",
            StrategyKind::MarkerStraddle => "marker_straddle",
            StrategyKind::IndexStraddle => "index_straddle",
            StrategyKind::GreedyShort => "greedy_short",
            StrategyKind::Scripted(_) => "scripted",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategyKind::Scripted(lists) => {
                let lists: Vec<String> = lists
                    .iter()
                    .map(|l| l.iter().map(usize::to_string).collect::<Vec<_>>().join(","))
                    .collect();
                write!(f, "scripted:{}", lists.join(";"))
            }
            other => f.write_str(other.name()),
        }
    }
}

/// Parses a strategy name, or `scripted:15,20,15;15,15,20` for explicit cuts.
impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(body) = s.strip_prefix("scripted:") {
            let lists = body
                .split(';')
                .map(|list| {
                    list.split(',')
                        .map(|v| v.trim().parse::<usize>().map_err(|_| param_err!("bad cut length {v:?}")))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok(StrategyKind::Scripted(lists));
        }
        StrategyKind::MENU
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| param_err!("unknown strategy {s:?}"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdversaryStrategy {
    pub kind: StrategyKind,
    pub seed: u64,
    pub budget: ErrorBudget,
}

impl AdversaryStrategy {
    pub fn new(kind: StrategyKind, seed: u64) -> Self {
        Self { kind, seed, budget: ErrorBudget::default() }
    }

    pub fn with_budget(mut self, budget: ErrorBudget) -> Self {
        self.budget = budget;
        self
    }
}

/// A received segment together with where it was cut from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Piece {
    pub strand: usize,
    pub offset: usize,
    pub segment: QString,
}

/// Output of [`tear`]: the pieces in shuffled order with their provenance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tearing {
    pub pieces: Vec<Piece>,
}

impl Tearing {
    /// The multiset seen by the decoder.
    pub fn collection(&self) -> SegmentCollection {
        pieces_to_collection(&self.pieces)
    }

    /// Piece lengths per strand in strand order, i.e. the cut lists.
    pub fn cut_lists(&self, strands: usize) -> Vec<Vec<usize>> {
        let mut sorted: Vec<&Piece> = self.pieces.iter().collect();
        sorted.sort_by_key(|p| (p.strand, p.offset));
        let mut lists = vec![Vec::new(); strands];
        for p in sorted {
            lists[p.strand].push(p.segment.len());
        }
        lists
    }
}

pub fn pieces_to_collection(pieces: &[Piece]) -> SegmentCollection {
    SegmentCollection::new(pieces.iter().map(|p| p.segment.clone()).collect())
}

/// Checks one cut list: every piece in `[lmin, lmax]`, except a final piece shorter than `lmin`.
pub fn validate_cuts(lengths: &[usize], n: usize, lmin: usize, lmax: usize) -> Result<()> {
    let total: usize = lengths.iter().sum();
    if total != n {
        return Err(param_err!("cut lengths sum to {total}, strand length is {n}"));
    }
    for (i, &l) in lengths.iter().enumerate() {
        let last = i + 1 == lengths.len();
        let ok = (lmin..=lmax).contains(&l) || (last && l >= 1 && l < lmin);
        if !ok {
            return Err(param_err!("piece {i} has length {l}, outside [{lmin}, {lmax}]"));
        }
    }
    Ok(())
}

/// Cut positions strictly inside a region `[start, start + len)` of every block.
fn interior_cuts(params: &CodeParams, start: usize, len: usize) -> Vec<usize> {
    (0..=params.blocks)
        .flat_map(|i| {
            let s = i * params.lmin + start;
            s + 1..s + len
        })
        .filter(|&c| c < params.n)
        .collect()
}

/// Extends a partial cut list by a random admissible piece.
fn random_piece(rest: usize, lmin: usize, lmax: usize, rng: &mut ChaCha8Rng) -> usize {
    if rest < lmin {
        rest
    } else {
        rng.gen_range(lmin..=lmax.min(rest))
    }
}

/// Cuts aimed at `targets`: the next cut is a reachable target when there is one.
fn targeted_cuts(params: &CodeParams, targets: &[usize], earliest: bool, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let (n, lmin, lmax) = (params.n, params.lmin, params.lmax);
    let mut lengths = Vec::new();
    let mut pos = 0;
    while pos < n {
        let rest = n - pos;
        let lo = pos + lmin;
        let hi = (pos + lmax).min(n - 1);
        let reach: Vec<usize> = targets.iter().copied().filter(|&c| c >= lo && c <= hi).collect();
        let l = if rest >= lmin && !reach.is_empty() {
            // The first piece picks its target at random so that different seeds
            // stress different offsets inside the region.
            let c = if earliest && pos > 0 { reach[0] } else { *reach.choose(rng).unwrap() };
            c - pos
        } else {
            random_piece(rest, lmin, lmax, rng)
        };
        lengths.push(l);
        pos += l;
    }
    lengths
}

fn greedy_short_cuts(params: &CodeParams, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let (n, lmin, lmax) = (params.n, params.lmin, params.lmax);
    let body = n - 1;
    let pieces = body / lmin;
    let extra = body - pieces * lmin;
    if lmin == 1 || pieces == 0 || extra > pieces * (lmax - lmin) {
        return all_lmin_cuts(n, lmin);
    }
    let mut lengths = vec![lmin; pieces];
    for _ in 0..extra {
        loop {
            let i = rng.gen_range(0..pieces);
            if lengths[i] < lmax {
                lengths[i] += 1;
                break;
            }
        }
    }
    lengths.push(1);
    lengths
}

fn all_lmin_cuts(n: usize, lmin: usize) -> Vec<usize> {
    let mut lengths = vec![lmin; n / lmin];
    if n % lmin > 0 {
        lengths.push(n % lmin);
    }
    lengths
}

/// Piece lengths for every strand under `strategy`.
pub fn cut_lists(params: &CodeParams, strategy: &AdversaryStrategy) -> Result<Vec<Vec<usize>>> {
    let (n, lmin, lmax) = (params.n, params.lmin, params.lmax);
    let mut rng = rng(strategy.seed, STREAM_CUTS);
    if let StrategyKind::Scripted(lists) = &strategy.kind {
        let lists = match lists.len() {
            1 => vec![lists[0].clone(); params.k],
            l if l == params.k => lists.clone(),
            l => return Err(param_err!("{l} scripted cut lists for {} strands", params.k)),
        };
        for l in &lists {
            validate_cuts(l, n, lmin, lmax)?;
        }
        return Ok(lists);
    }
    let markers = interior_cuts(params, params.alpha, params.marker_len);
    let indices = interior_cuts(params, 0, params.alpha);
    Ok((0..params.k)
        .map(|_| match strategy.kind {
            StrategyKind::UniformRandomCuts => {
                let mut lengths = Vec::new();
                let mut rest = n;
                while rest > 0 {
                    let l = random_piece(rest, lmin, lmax, &mut rng);
                    lengths.push(l);
                    rest -= l;
                }
                lengths
            }
            StrategyKind::AllLmin => all_lmin_cuts(n, lmin),
            StrategyKind::MarkerStraddle => targeted_cuts(params, &markers, false, &mut rng),
            StrategyKind::IndexStraddle => targeted_cuts(params, &indices, true, &mut rng),
            StrategyKind::GreedyShort => greedy_short_cuts(params, &mut rng),
            StrategyKind::Scripted(_) => unreachable!(),
        })
        .collect())
}

/// Segments every strand of `z` and shuffles the pieces.
pub fn tear(z: &Codeword, strategy: &AdversaryStrategy) -> Result<Tearing> {
    let lists = cut_lists(&z.params, strategy)?;
    let mut pieces = Vec::new();
    for (strand, (x, lengths)) in z.strands.iter().zip(&lists).enumerate() {
        let mut offset = 0;
        for &l in lengths {
            pieces.push(Piece { strand, offset, segment: x.slice(offset, offset + l) });
            offset += l;
        }
    }
    pieces.shuffle(&mut rng(strategy.seed, STREAM_SHUFFLE));
    Ok(Tearing { pieces })
}

/// Where substitutions are aimed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorruptionMode {
    #[default]
    Random,
    /// Inside encoded indices `c''_i`.
    Index,
    /// Inside markers.
    Marker,
    /// On the parity symbol of an encoded index.
    Parity,
    /// Each substitution picks one of the modes above.
    Mixed,
}

impl FromStr for CorruptionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "random" => CorruptionMode::Random,
            "index" => CorruptionMode::Index,
            "marker" => CorruptionMode::Marker,
            "parity" => CorruptionMode::Parity,
            "mixed" => CorruptionMode::Mixed,
            _ => return Err(param_err!("unknown corruption mode {s:?}")),
        })
    }
}

/// Position of the parity symbol inside a padded index.
pub fn parity_position(params: &CodeParams) -> usize {
    let d = params.index_len;
    d + d / (params.f - 1) + 1
}

fn targets(params: &CodeParams, mode: CorruptionMode) -> Vec<usize> {
    let starts = (0..=params.blocks).map(|i| i * params.lmin);
    let collect = |off: usize, len: usize| -> Vec<usize> {
        starts.clone().flat_map(|s| s + off..s + off + len).filter(|&p| p < params.n).collect()
    };
    match mode {
        CorruptionMode::Random | CorruptionMode::Mixed => (0..params.n).collect(),
        CorruptionMode::Index => collect(0, params.alpha),
        CorruptionMode::Marker => collect(params.alpha, params.marker_len),
        CorruptionMode::Parity => collect(parity_position(params), 1),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Corrupted {
    pub codeword: Codeword,
    /// `(strand, position)` of every substitution.
    pub positions: Vec<(usize, usize)>,
}

/// Applies exactly `t_sub` substitutions (fewer only if the codeword is shorter).
pub fn corrupt(z: &Codeword, t_sub: usize, mode: CorruptionMode, seed: u64) -> Corrupted {
    let p = &z.params;
    let mut rng = rng(seed, STREAM_CORRUPT);
    let total = p.k * p.n;
    let t_sub = t_sub.min(total);
    let modes = [CorruptionMode::Index, CorruptionMode::Marker, CorruptionMode::Parity, CorruptionMode::Random];
    let mut chosen: Vec<(usize, usize)> = Vec::with_capacity(t_sub);
    while chosen.len() < t_sub {
        let m = match mode {
            CorruptionMode::Mixed => modes[rng.gen_range(0..modes.len())],
            m => m,
        };
        let free: Vec<(usize, usize)> = (0..p.k)
            .flat_map(|s| targets(p, m).into_iter().map(move |q| (s, q)))
            .filter(|c| !chosen.contains(c))
            .collect();
        let pick = match free.choose(&mut rng) {
            Some(&c) => c,
            // Targets exhausted: fall back to any free position.
            None => loop {
                let c = (rng.gen_range(0..p.k), rng.gen_range(0..p.n));
                if !chosen.contains(&c) {
                    break c;
                }
            },
        };
        chosen.push(pick);
    }
    let mut strands: Vec<Vec<u8>> = z.strands.iter().map(|s| s.symbols().to_vec()).collect();
    for &(s, q) in &chosen {
        let v = &mut strands[s][q];
        *v = ((u32::from(*v) + rng.gen_range(1..p.q)) % p.q) as u8;
    }
    let strands = strands.into_iter().map(|s| QString::new(p.q, s).expect("symbols below q")).collect();
    Corrupted { codeword: Codeword { params: *p, strands }, positions: chosen }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeletionMode {
    #[default]
    Random,
    /// Consecutive pieces in strand-major order.
    Adjacent,
}

impl FromStr for DeletionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(DeletionMode::Random),
            "adjacent" => Ok(DeletionMode::Adjacent),
            _ => Err(param_err!("unknown deletion mode {s:?}")),
        }
    }
}

/// Drops exactly `t_del` pieces; the survivors keep their shuffled order.
pub fn delete_segments(pieces: &[Piece], t_del: usize, mode: DeletionMode, seed: u64) -> Result<Vec<Piece>> {
    if t_del > pieces.len() {
        return Err(param_err!("cannot delete {t_del} of {} segments", pieces.len()));
    }
    let mut rng = rng(seed, STREAM_DELETE);
    let doomed: Vec<usize> = match mode {
        DeletionMode::Random => index::sample(&mut rng, pieces.len(), t_del).into_vec(),
        DeletionMode::Adjacent => {
            let mut order: Vec<usize> = (0..pieces.len()).collect();
            order.sort_by_key(|&i| (pieces[i].strand, pieces[i].offset));
            let start = rng.gen_range(0..=pieces.len() - t_del);
            order[start..start + t_del].to_vec()
        }
    };
    Ok(pieces
        .iter()
        .enumerate()
        .filter(|(i, _)| !doomed.contains(i))
        .map(|(_, p)| p.clone())
        .collect())
}

/// Text form of a set of pieces: one segment per line, in the given order.
pub fn write_segments(pieces: &[Piece]) -> String {
    let mut out = String::new();
    for p in pieces {
        out.push_str(&p.segment.to_string());
        out.push('\n');
    }
    out
}

/// Reads the text form, ignoring blank lines and `#` comments.
pub fn read_segments(text: &str, q: u32) -> Result<SegmentCollection> {
    let segments = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| QString::parse(l, q))
        .collect::<Result<Vec<_>>>()?;
    Ok(SegmentCollection::new(segments))
}

/// Everything needed to replay a trial, except the seed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub params: CodeParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub robust: Option<RobustConfig>,
    pub strategy: StrategyKind,
    #[serde(default)]
    pub corruption: CorruptionMode,
    #[serde(default)]
    pub deletion: DeletionMode,
    /// Noise events per trial; defaults to the configured `t`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<usize>,
}

impl TrialConfig {
    pub fn noiseless(params: CodeParams, strategy: StrategyKind) -> Self {
        Self {
            params,
            robust: None,
            strategy,
            corruption: CorruptionMode::default(),
            deletion: DeletionMode::default(),
            noise: None,
        }
    }

    pub fn with_robust(mut self, robust: RobustConfig) -> Self {
        self.robust = Some(robust);
        self
    }

    pub fn budget(&self) -> ErrorBudget {
        match self.robust {
            None => ErrorBudget::default(),
            Some(r) => {
                let amount = self.noise.unwrap_or(r.t);
                match r.model {
                    NoiseModel::Substitution => ErrorBudget::substitutions(amount),
                    NoiseModel::Deletion => ErrorBudget::deletions(amount),
                }
            }
        }
    }
}

/// One JSON line per trial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialReport {
    pub seed: u64,
    #[serde(flatten)]
    pub config: TrialConfig,
    /// The decoder returned a message.
    pub success: bool,
    /// The returned message equals the transmitted one.
    pub equal: bool,
    pub segments: usize,
    pub discards: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collisions: Option<usize>,
    /// Erased blocks `e`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e: Option<usize>,
    /// Wrong complete blocks `s`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl TrialReport {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("reports serialize")
    }
}

/// Encoder, channel and decoder for one configuration; build once, run per seed.
#[derive(Clone, Debug)]
pub struct TrialRunner {
    config: TrialConfig,
    codec: AnyCodec,
}

impl TrialRunner {
    pub fn new(config: TrialConfig) -> Result<Self> {
        let codec = AnyCodec::new(config.params, config.robust.as_ref())?;
        Ok(Self { config, codec })
    }

    pub fn config(&self) -> &TrialConfig {
        &self.config
    }

    pub fn message_len(&self) -> usize {
        self.codec.message_len()
    }

    pub fn run(&self, seed: u64) -> TrialReport {
        let p = &self.config.params;
        let budget = self.config.budget();
        let mut mrng = rng(seed, STREAM_MESSAGE);
        let x = QString::new(p.q, (0..self.message_len()).map(|_| mrng.gen_range(0..p.q) as u8).collect())
            .expect("symbols below q");
        let mut report = TrialReport {
            seed,
            config: self.config.clone(),
            success: false,
            equal: false,
            segments: 0,
            discards: 0,
            collisions: None,
            e: None,
            s: None,
            error: None,
        };
        let fail = |mut r: TrialReport, e: Error| {
            r.error = Some(e.to_string());
            r
        };
        let z = match self.codec.encode(&x) {
            Ok(z) => z,
            Err(e) => return fail(report, e),
        };
        let stored = corrupt(&z, budget.t_sub, self.config.corruption, seed).codeword;
        let strategy = AdversaryStrategy::new(self.config.strategy.clone(), seed).with_budget(budget);
        let tearing = match tear(&stored, &strategy) {
            Ok(t) => t,
            Err(e) => return fail(report, e),
        };
        let pieces = match delete_segments(&tearing.pieces, budget.t_del, self.config.deletion, seed) {
            Ok(p) => p,
            Err(e) => return fail(report, e),
        };
        let received = pieces_to_collection(&pieces);
        report.segments = received.len();
        report.discards = received
            .segments()
            .iter()
            .filter(|u| matches!(locate_symbols(u.symbols(), p), Ok(Located::Discard)))
            .count();
        let decoded = match &self.codec {
            AnyCodec::Plain(_) => Decoder::new(*p).decode(&received),
            AnyCodec::Sub(c) => {
                let r = c.decode_report(&received);
                report.collisions = Some(r.state.collisions);
                report.e = Some(r.state.erased());
                report.s = Some(r.state.wrong_blocks(&z));
                r.message
            }
            AnyCodec::Del(c) => c.decode_report(&received).and_then(|r| {
                report.e = Some(r.erased_runs.len());
                r.message
            }),
        };
        match decoded {
            Ok(y) => {
                report.success = true;
                report.equal = y == x;
            }
            Err(e) => report.error = Some(e.to_string()),
        }
        report
    }

    /// Runs `seeds` on up to `threads` workers; reports come back in seed order.
    pub fn run_many(&self, seeds: std::ops::Range<u64>, threads: usize) -> Vec<TrialReport> {
        let seeds: Vec<u64> = seeds.collect();
        let threads = threads.max(1).min(seeds.len().max(1));
        let chunk = seeds.len().div_ceil(threads).max(1);
        std::thread::scope(|scope| {
            let handles: Vec<_> = seeds
                .chunks(chunk)
                .map(|c| scope.spawn(move || c.iter().map(|&s| self.run(s)).collect::<Vec<_>>()))
                .collect();
            handles.into_iter().flat_map(|h| h.join().expect("trial worker panicked")).collect()
        })
    }
}

/// Replays a trial from its report.
pub fn replay(report: &TrialReport) -> Result<TrialReport> {
    let mut config = report.config.clone();
    config.params = config.params.raw().derive()?;
    Ok(TrialRunner::new(config)?.run(report.seed))
}
