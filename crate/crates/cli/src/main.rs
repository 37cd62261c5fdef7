//! `tornpaper`: encode, tear, decode and benchmark torn-paper codes.

mod framing;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use tornpaper::alphabet::ErrorBudget;
use tornpaper::bounds::BoundReport;
use tornpaper::channel::{
    corrupt, delete_segments, read_segments, replay, tear, write_segments, AdversaryStrategy, CorruptionMode,
    DeletionMode, StrategyKind, TrialConfig, TrialReport, TrialRunner,
};
use tornpaper::codec::{code_redundancy, Codeword};
use tornpaper::ecc::BecKind;
use tornpaper::robust::{delta_redundancy, AnyCodec, NoiseModel, ParamsEnvelope, RobustConfig};
use tornpaper::{CodeParams, QString, RawParams, RllKind};

use framing::{byte_digits, bytes_to_symbols, symbols_to_bytes, CodewordHeader};

const SCHEMA: u32 = 1;

/// Failure classes, each with its own exit status.
#[derive(Debug)]
enum Failure {
    Param(anyhow::Error),
    Decode(anyhow::Error),
    Io(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Param(_) => 2,
            Failure::Decode(_) => 3,
            Failure::Io(_) => 4,
        }
    }
}

impl From<tornpaper::Error> for Failure {
    fn from(e: tornpaper::Error) -> Self {
        match e {
            tornpaper::Error::Decode(_) | tornpaper::Error::Corruption(_) => Failure::Decode(e.into()),
            _ => Failure::Param(e.into()),
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn param(e: anyhow::Error) -> Failure {
    Failure::Param(e)
}

fn read(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(Failure::Io)
}

fn write(path: Option<&Path>, data: &[u8]) -> Outcome<()> {
    match path {
        Some(p) => fs::write(p, data).with_context(|| format!("writing {}", p.display())).map_err(Failure::Io),
        None => std::io::stdout().write_all(data).context("writing stdout").map_err(Failure::Io),
    }
}

#[derive(Parser)]
#[command(name = "tornpaper", version, about = "Codes for the adversarial torn-paper channel")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct ParamArgs {
    /// JSON params file, codeword file, or inline `q=2,n=124,k=1,Lmin=15,Lmax=20,f=3[,rll=...]`
    #[arg(long)]
    params: String,
    /// Use the substitution-robust codec for this many errors
    #[arg(long)]
    t_sub: Option<usize>,
    /// Use the deletion-robust codec for this many lost segments
    #[arg(long)]
    t_del: Option<usize>,
    /// Burst-erasure code of the deletion codec
    #[arg(long, value_enum)]
    bec: Option<BecArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BecArg {
    Parity,
    Rs,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a binary file into a codeword file
    Encode {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decode a segments file (one segment per line) back into the original bytes
    Decode {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Bytes to keep; defaults to the length recorded in a codeword-file header
        #[arg(long)]
        bytes: Option<usize>,
    },
    /// Cut a codeword file into a shuffled segments file
    Tear {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "uniform_random_cuts")]
        strategy: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Substitutions applied before cutting
        #[arg(long, default_value_t = 0)]
        t_sub: usize,
        /// Segments dropped after cutting
        #[arg(long, default_value_t = 0)]
        t_del: usize,
        #[arg(long, default_value = "random")]
        corruption: String,
        #[arg(long, default_value = "random")]
        deletion: String,
    },
    /// Run seeded end-to-end trials and print one JSON report per line
    Trial {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value = "uniform_random_cuts")]
        strategy: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(long, default_value = "random")]
        corruption: String,
        #[arg(long, default_value = "random")]
        deletion: String,
        /// Noise events per trial, if different from the codec's t
        #[arg(long)]
        noise: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run the trials of a report file and check they reproduce
    Replay {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Success rates and redundancy over a parameter grid, as CSV
    Sweep {
        #[arg(long, default_value_t = 2)]
        q: u32,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        lmin: Vec<usize>,
        /// Lmax − Lmin; defaults to ⌈Lmin/4⌉
        #[arg(long)]
        lmax_extra: Option<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        f: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        t: Vec<usize>,
        #[arg(long, default_value = "substitution")]
        model: String,
        #[arg(long, value_delimiter = ',', default_value = "uniform_random_cuts")]
        strategy: Vec<String>,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the redundancy and rate bounds for a configuration
    Bounds {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 4)]
        pilot_m: usize,
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct Versioned<'a, T: Serialize> {
    schema: u32,
    #[serde(flatten)]
    body: &'a T,
}

fn versioned<T: Serialize>(body: &T) -> String {
    serde_json::to_string(&Versioned { schema: SCHEMA, body }).expect("reports serialize")
}

fn parse_inline(text: &str) -> anyhow::Result<RawParams> {
    let mut fields = std::collections::HashMap::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| anyhow!("expected key=value, got {part:?}"))?;
        fields.insert(k.trim().to_ascii_lowercase(), v.trim().to_string());
    }
    let num = |key: &str| -> anyhow::Result<Option<usize>> {
        fields.get(key).map(|v| v.parse().with_context(|| format!("bad value for {key}"))).transpose()
    };
    let need = |key: &str| num(key)?.ok_or_else(|| anyhow!("missing {key}"));
    let q = need("q")? as u32;
    let n = need("n")?;
    let f = num("f")?.unwrap_or_else(|| CodeParams::suggest_f(q, n));
    let mut raw = RawParams::new(q, n, num("k")?.unwrap_or(1), need("lmin")?, need("lmax")?, f);
    if let Some(r) = fields.get("rll") {
        raw = raw.with_rll(r.parse::<RllKind>()?);
    }
    Ok(raw)
}

/// Reads a codeword file: header plus one strand per line.
fn parse_codeword_file(text: &str) -> Outcome<(CodewordHeader, ParamsEnvelope, Vec<QString>)> {
    let mut lines = text.lines();
    let head = lines
        .next()
        .and_then(|l| l.strip_prefix('#'))
        .ok_or_else(|| param(anyhow!("codeword file lacks its '#' header line")))?;
    let header: CodewordHeader = serde_json::from_str(head.trim()).context("malformed codeword header").map_err(param)?;
    let env = ParamsEnvelope::from_json(&header.params.to_string())?;
    let strands = lines
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| QString::parse(l, env.params.q))
        .collect::<tornpaper::Result<Vec<_>>>()?;
    Ok((header, env, strands))
}

/// Resolves `--params` and the robust overrides.
fn load_params(args: &ParamArgs) -> Outcome<(ParamsEnvelope, Option<CodewordHeader>)> {
    let spec = args.params.trim();
    let (mut env, header) = if Path::new(spec).is_file() {
        let text = read(Path::new(spec))?;
        if text.starts_with('#') {
            let (h, env, _) = parse_codeword_file(&text)?;
            (env, Some(h))
        } else {
            (ParamsEnvelope::from_json(&text)?, None)
        }
    } else if spec.starts_with('{') {
        (ParamsEnvelope::from_json(spec)?, None)
    } else {
        let params = parse_inline(spec).map_err(param)?.derive()?;
        (ParamsEnvelope { params, robust: None }, None)
    };
    let budget = ErrorBudget { t_sub: args.t_sub.unwrap_or(0), t_del: args.t_del.unwrap_or(0) };
    budget.validate()?;
    let bec = args.bec.map(|b| match b {
        BecArg::Parity => BecKind::InterleavedParity,
        BecArg::Rs => BecKind::InterleavedRs,
    });
    if let Some(t) = args.t_sub {
        env.robust = Some(RobustConfig::substitution(t));
    }
    if let Some(t) = args.t_del {
        let base = RobustConfig { t, model: NoiseModel::Deletion, bec: None };
        env.robust = Some(RobustConfig { bec: Some(bec.unwrap_or(base.bec_kind())), ..base });
    }
    if env.robust.is_some_and(|r| r.t == 0) {
        env.robust = None;
    }
    Ok((env, header))
}

fn parse<T: std::str::FromStr<Err = tornpaper::Error>>(s: &str) -> Outcome<T> {
    Ok(s.parse::<T>()?)
}

fn encode(args: &ParamArgs, input: &Path, out: &Path) -> Outcome<()> {
    let (env, _) = load_params(args)?;
    let codec = AnyCodec::new(env.params, env.robust.as_ref())?;
    let bytes = fs::read(input).with_context(|| format!("reading {}", input.display())).map_err(Failure::Io)?;
    let q = env.params.q;
    let symbols = bytes_to_symbols(&bytes, q, codec.message_len()).map_err(param)?;
    let z = codec.encode(&QString::new(q, symbols)?)?;
    let header = CodewordHeader {
        schema: SCHEMA,
        params: serde_json::from_str(&env.to_json()).expect("envelope is JSON"),
        seed: None,
        byte_digits: byte_digits(q),
        message_bytes: bytes.len(),
        message_symbols: codec.message_len(),
    };
    let mut text = format!("# {}\n", serde_json::to_string(&header).expect("header serializes"));
    for s in &z.strands {
        text.push_str(&s.to_string());
        text.push('\n');
    }
    write(Some(out), text.as_bytes())
}

fn decode(args: &ParamArgs, input: &Path, out: &Path, bytes: Option<usize>) -> Outcome<()> {
    let (env, header) = load_params(args)?;
    let codec = AnyCodec::new(env.params, env.robust.as_ref())?;
    let segments = read_segments(&read(input)?, env.params.q)?;
    let x = codec.decode(&segments)?;
    let q = env.params.q;
    let count = bytes.or(header.map(|h| h.message_bytes)).unwrap_or(x.len() / byte_digits(q));
    let data = symbols_to_bytes(x.symbols(), q, count).map_err(param)?;
    write(Some(out), &data)
}

#[allow(clippy::too_many_arguments)]
fn tear_file(
    input: &Path,
    out: Option<&Path>,
    strategy: &str,
    seed: u64,
    t_sub: usize,
    t_del: usize,
    corruption: &str,
    deletion: &str,
) -> Outcome<()> {
    let (_, env, strands) = parse_codeword_file(&read(input)?)?;
    let p = env.params;
    if strands.len() != p.k || strands.iter().any(|s| s.len() != p.n) {
        return Err(param(anyhow!("codeword file holds {} strands, expected {} of length {}", strands.len(), p.k, p.n)));
    }
    let z = Codeword { params: p, strands };
    let stored = corrupt(&z, t_sub, parse::<CorruptionMode>(corruption)?, seed).codeword;
    let budget = ErrorBudget { t_sub, t_del };
    let tearing = tear(&stored, &AdversaryStrategy::new(parse(strategy)?, seed).with_budget(budget))?;
    let pieces = delete_segments(&tearing.pieces, t_del, parse::<DeletionMode>(deletion)?, seed)?;
    write(out, write_segments(&pieces).as_bytes())
}

#[allow(clippy::too_many_arguments)]
fn trial(
    args: &ParamArgs,
    strategy: &str,
    seed: u64,
    trials: u64,
    threads: usize,
    corruption: &str,
    deletion: &str,
    noise: Option<usize>,
    out: Option<&Path>,
) -> Outcome<()> {
    let (env, _) = load_params(args)?;
    let config = TrialConfig {
        params: env.params,
        robust: env.robust,
        strategy: parse(strategy)?,
        corruption: parse(corruption)?,
        deletion: parse(deletion)?,
        noise,
    };
    let runner = TrialRunner::new(config)?;
    let mut text = String::new();
    for r in runner.run_many(seed..seed + trials, threads) {
        text.push_str(&versioned(&r));
        text.push('\n');
    }
    write(out, text.as_bytes())
}

fn replay_file(input: &Path) -> Outcome<()> {
    let mut mismatches = 0;
    for (i, line) in read(input)?.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let report: TrialReport =
            serde_json::from_str(line).with_context(|| format!("line {}", i + 1)).map_err(param)?;
        let again = replay(&report)?;
        let same = again == report;
        mismatches += usize::from(!same);
        println!("seed {} {}", report.seed, if same { "reproduced" } else { "DIFFERS" });
    }
    if mismatches > 0 {
        return Err(Failure::Decode(anyhow!("{mismatches} trials did not reproduce")));
    }
    Ok(())
}

#[derive(Serialize)]
struct SweepRow {
    n: usize,
    #[serde(rename = "Lmin")]
    lmin: usize,
    f: usize,
    t: usize,
    strategy: String,
    trials: u64,
    successes: u64,
    redundancy: Option<usize>,
    rate: Option<f64>,
}

#[allow(clippy::too_many_arguments)]
fn sweep(
    q: u32,
    k: usize,
    ns: &[usize],
    lmins: &[usize],
    lmax_extra: Option<usize>,
    fs_: &[usize],
    ts: &[usize],
    model: &str,
    strategies: &[String],
    trials: u64,
    seed: u64,
    threads: usize,
    out: Option<&Path>,
) -> Outcome<()> {
    let model: NoiseModel = parse(model)?;
    let strategies = strategies.iter().map(|s| parse::<StrategyKind>(s)).collect::<Outcome<Vec<_>>>()?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for &n in ns {
        for &lmin in lmins {
            for &f in fs_ {
                for &t in ts {
                    for strategy in &strategies {
                        let lmax = lmin + lmax_extra.unwrap_or(lmin.div_ceil(4));
                        let robust = (t > 0).then(|| match model {
                            NoiseModel::Substitution => RobustConfig::substitution(t),
                            NoiseModel::Deletion => RobustConfig { t, model, bec: None },
                        });
                        let row = match sweep_point(RawParams::new(q, n, k, lmin, lmax, f), robust, strategy, trials, seed, threads) {
                            Ok((successes, red)) => SweepRow {
                                n,
                                lmin,
                                f,
                                t,
                                strategy: strategy.to_string(),
                                trials,
                                successes,
                                redundancy: Some(red),
                                rate: Some(1.0 - red as f64 / (n * k) as f64),
                            },
                            Err(e) => {
                                eprintln!("n={n} Lmin={lmin} f={f} t={t}: {e}");
                                SweepRow { n, lmin, f, t, strategy: strategy.to_string(), trials: 0, successes: 0, redundancy: None, rate: None }
                            }
                        };
                        w.serialize(row).map_err(|e| Failure::Io(e.into()))?;
                    }
                }
            }
        }
    }
    let data = w.into_inner().map_err(|e| Failure::Io(anyhow!("{e}")))?;
    write(out, &data)
}

fn sweep_point(
    raw: RawParams,
    robust: Option<RobustConfig>,
    strategy: &StrategyKind,
    trials: u64,
    seed: u64,
    threads: usize,
) -> tornpaper::Result<(u64, usize)> {
    let params = raw.derive()?;
    let red = match &robust {
        None => code_redundancy(&params),
        Some(r) => delta_redundancy(&params, r)?.total,
    };
    let mut config = TrialConfig::noiseless(params, strategy.clone());
    config.robust = robust;
    let runner = TrialRunner::new(config)?;
    let ok = runner.run_many(seed..seed + trials, threads).iter().filter(|r| r.equal).count() as u64;
    Ok((ok, red))
}

fn bounds(args: &ParamArgs, pilot_m: usize, delta: f64, format: Format, out: Option<&Path>) -> Outcome<()> {
    let (env, _) = load_params(args)?;
    let report = BoundReport::new(&env.params, pilot_m, delta, env.robust.as_ref())?;
    let text = match format {
        Format::Json => versioned(&report) + "\n",
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["quantity", "value", "annotation"]).map_err(|e| Failure::Io(e.into()))?;
            for (name, value, note) in report.rows() {
                w.write_record([name.as_str(), value.as_str(), note]).map_err(|e| Failure::Io(e.into()))?;
            }
            String::from_utf8(w.into_inner().map_err(|e| Failure::Io(anyhow!("{e}")))?).expect("csv is UTF-8")
        }
        Format::Table => {
            let rows = report.rows();
            let width = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
            let mut s = format!("params {}\n", env.to_json());
            for (name, value, note) in rows {
                s.push_str(&format!("{name:<width$}  {value:>14}  {note}\n"));
            }
            s
        }
    };
    write(out, text.as_bytes())
}

fn run(cli: Cli) -> Outcome<()> {
    match cli.command {
        Command::Encode { params, input, out } => encode(&params, &input, &out),
        Command::Decode { params, input, out, bytes } => decode(&params, &input, &out, bytes),
        Command::Tear { input, out, strategy, seed, t_sub, t_del, corruption, deletion } => {
            tear_file(&input, out.as_deref(), &strategy, seed, t_sub, t_del, &corruption, &deletion)
        }
        Command::Trial { params, strategy, seed, trials, threads, corruption, deletion, noise, out } => {
            trial(&params, &strategy, seed, trials, threads, &corruption, &deletion, noise, out.as_deref())
        }
        Command::Replay { input } => replay_file(&input),
        Command::Sweep { q, k, n, lmin, lmax_extra, f, t, model, strategy, trials, seed, threads, out } => {
            sweep(q, k, &n, &lmin, lmax_extra, &f, &t, &model, &strategy, trials, seed, threads, out.as_deref())
        }
        Command::Bounds { params, pilot_m, delta, format, out } => bounds(&params, pilot_m, delta, format, out.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Param(e) | Failure::Decode(e) | Failure::Io(e)) = &f;
            eprintln!("tornpaper: {e:#}");
            ExitCode::from(f.code())
        }
    }
}
