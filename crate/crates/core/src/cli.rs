//! Command-line front end: `join`, `eval`, `gen` and `stats`.
//!
//! Pair files are tab separated, `id_a<TAB>id_b<TAB>distance` with 0-based
//! ids, preceded by `# key=value` metadata lines. Reports are CSV with a
//! single header row.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::eval::{
    anchor_statistics, brute_force_join, generate_synthetic, measure_recall, pair_set,
    write_anchor_cdf_csv, write_metrics_csv, write_timings_csv, SyntheticSpec,
};
use crate::gramhash::GramHasher;
use crate::join::{JoinResult, JoinStats, JoinedPair, MinJoin};
use crate::minhash::{MinHashJoin, MinHashParams};
use crate::partition::{default_gram_length_for, PartitionParams};
use crate::record::{alphabet_size, StringRecord};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Signature count of the MinHash engine when `--ell` is not given.
pub const DEFAULT_ELL: usize = 4;

/// Seeds used by `stats` when `--runs` is not given.
pub const DEFAULT_STATS_RUNS: usize = 200;

#[derive(Parser, Debug)]
#[command(
    name = "minjoin",
    version,
    about = "Edit similarity joins by local hash minima"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Subcommand, Debug)]
pub enum CliCommand {
    /// Find all pairs within edit distance K and write them as TSV.
    Join {
        #[command(flatten)]
        opts: JoinArgs,
        /// Also write per-stage timings as CSV.
        #[arg(long)]
        timings: Option<PathBuf>,
    },
    /// Run an engine against the brute-force truth and write metrics CSV.
    Eval {
        #[command(flatten)]
        opts: JoinArgs,
        #[arg(long)]
        timings: Option<PathBuf>,
        /// Also evaluate five targeted-partition values spread over [K/5, K].
        #[arg(long)]
        sweep: bool,
    },
    /// Write a synthetic dataset with planted similar pairs.
    Gen(GenArgs),
    /// Write the interior-anchor CDF over many seeds plus stage timings.
    Stats {
        #[command(flatten)]
        opts: JoinArgs,
        /// Number of hash seeds, starting at --seed.
        #[arg(long, default_value_t = DEFAULT_STATS_RUNS)]
        runs: usize,
    },
}

#[derive(Args, Debug, Clone)]
pub struct JoinArgs {
    /// Dataset, one string per line.
    #[arg(short, long)]
    pub input: PathBuf,
    /// Output file (`join`, `eval`) or directory (`stats`).
    #[arg(short, long)]
    pub output: PathBuf,
    /// Edit distance threshold.
    #[arg(short)]
    pub k: Option<usize>,
    /// Targeted partitions per string [default: ceil(K/5)].
    #[arg(short = 't', long = "targets")]
    pub targets: Option<usize>,
    /// Gram length [default: 3 log_|alphabet| (max_len / T), at least 3].
    #[arg(short = 'q', long = "gram-len")]
    pub gram_len: Option<usize>,
    #[arg(short = 'r', long, default_value_t = 1)]
    pub repetitions: usize,
    #[arg(short, long, value_enum, default_value_t = Engine::Minjoin)]
    pub engine: Engine,
    /// MinHash signature count.
    #[arg(long)]
    pub ell: Option<usize>,
    #[arg(short, long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 uses all cores. Output does not depend on it.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Use a `GRAM<TAB>value` lookup table instead of the rolling hash.
    #[arg(long = "fixture-hash")]
    pub fixture_hash: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct GenArgs {
    /// Dataset output path.
    #[arg(short, long)]
    pub output: PathBuf,
    /// Planted-pair output path [default: <output>.truth.tsv].
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(short, long, default_value_t = 1000)]
    pub n: usize,
    #[arg(short, long, default_value_t = 1000)]
    pub len: usize,
    #[arg(short, long, default_value_t = 4)]
    pub alphabet: usize,
    #[arg(long, default_value_t = 100)]
    pub clusters: usize,
    #[arg(long, default_value_t = 3)]
    pub cluster_size: usize,
    #[arg(long, default_value_t = 50)]
    pub k_plant: usize,
    #[arg(short, long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    Minjoin,
    Minhash,
    Brute,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Minjoin => "minjoin",
            Engine::Minhash => "minhash",
            Engine::Brute => "brute",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Join,
    Eval,
    Gen,
    Stats,
}

/// Fully resolved parameters of one invocation.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
    pub input: Option<PathBuf>,
    pub output: PathBuf,
    pub k: usize,
    pub targets: usize,
    pub gram_len: usize,
    pub repetitions: usize,
    pub engine: Engine,
    pub ell: usize,
    pub seed: u64,
    pub threads: usize,
    pub fixture_hash: Option<PathBuf>,
    pub timings: Option<PathBuf>,
    pub sweep: bool,
    pub runs: usize,
    pub truth: Option<PathBuf>,
    pub synthetic: Option<SyntheticSpec>,
}

impl RunConfig {
    /// `# key=value` lines recording everything that determines the output.
    pub fn metadata(&self) -> Vec<(&'static str, String)> {
        let mut meta = vec![
            ("version", VERSION.to_string()),
            ("command", format!("{:?}", self.command).to_lowercase()),
        ];
        if let Some(spec) = &self.synthetic {
            meta.extend([
                ("n", spec.n.to_string()),
                ("len", spec.len.to_string()),
                ("alphabet", spec.alphabet_size.to_string()),
                ("clusters", spec.clusters.to_string()),
                ("cluster_size", spec.cluster_size.to_string()),
                ("k_plant", spec.k_plant.to_string()),
                ("seed", spec.seed.to_string()),
            ]);
            return meta;
        }
        meta.extend([
            ("engine", self.engine.name().to_string()),
            ("k", self.k.to_string()),
            ("seed", self.seed.to_string()),
        ]);
        match self.engine {
            Engine::Minjoin => meta.extend([
                ("targets", self.targets.to_string()),
                ("gram_len", self.gram_len.to_string()),
                ("repetitions", self.repetitions.to_string()),
            ]),
            Engine::Minhash => meta.extend([
                ("gram_len", self.gram_len.to_string()),
                ("ell", self.ell.to_string()),
            ]),
            Engine::Brute => {}
        }
        let hasher = if self.fixture_hash.is_some() {
            "fixture"
        } else {
            "rolling"
        };
        meta.push(("hasher", hasher.to_string()));
        meta
    }
}

/// Reads one string per line. CRLF endings and a trailing newline are
/// accepted; empty or whitespace-only lines are not.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Vec<StringRecord>> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_dataset(&bytes, path)
}

pub fn parse_dataset(bytes: &[u8], path: &Path) -> Result<Vec<StringRecord>> {
    let body = bytes.strip_suffix(b"\n").unwrap_or(bytes);
    if body.is_empty() {
        return Err(Error::EmptyDataset);
    }
    body.split(|&b| b == b'\n')
        .enumerate()
        .map(|(i, line)| {
            let line = line.strip_suffix(b"\r").unwrap_or(line);
            if line.iter().all(u8::is_ascii_whitespace) {
                return Err(Error::BlankLine {
                    path: path.to_path_buf(),
                    line: i + 1,
                });
            }
            Ok(StringRecord::new(i, line))
        })
        .collect()
}

/// Default targeted partitions: `max(1, ceil(K / 5))`.
pub fn default_targets(k: usize) -> usize {
    k.div_ceil(5).max(1)
}

fn resolve(
    command: Command,
    opts: &JoinArgs,
    dataset: &[StringRecord],
    fixture: Option<&GramHasher>,
) -> Result<RunConfig> {
    if opts.ell.is_some() && opts.engine != Engine::Minhash {
        return Err(Error::ConflictingFlags(
            "--ell only applies to --engine minhash".into(),
        ));
    }
    if opts.fixture_hash.is_some() && opts.engine == Engine::Brute {
        return Err(Error::ConflictingFlags(
            "--fixture-hash has no effect with --engine brute".into(),
        ));
    }
    if opts.fixture_hash.is_some() && opts.repetitions > 1 {
        return Err(Error::ConflictingFlags(
            "--repetitions > 1 needs seeded hashing, not --fixture-hash".into(),
        ));
    }
    if opts.repetitions == 0 {
        return Err(Error::InvalidParameter(
            "--repetitions must be at least 1".into(),
        ));
    }
    if opts.targets == Some(0) {
        return Err(Error::InvalidParameter(
            "--targets must be at least 1".into(),
        ));
    }
    if opts.gram_len == Some(0) {
        return Err(Error::InvalidParameter(
            "--gram-len must be at least 1".into(),
        ));
    }
    if opts.ell == Some(0) {
        return Err(Error::InvalidParameter("--ell must be at least 1".into()));
    }
    let k = match (command, opts.k, opts.targets) {
        (_, Some(k), _) => k,
        (Command::Stats, None, Some(t)) => t,
        _ => return Err(Error::InvalidParameter("-k is required".into())),
    };
    let targets = opts.targets.unwrap_or_else(|| default_targets(k));
    let gram_len = match (fixture.and_then(GramHasher::table_gram_len), opts.gram_len) {
        (Some(table), Some(q)) if table != q => {
            return Err(Error::ConflictingFlags(format!(
                "-q {q} differs from the {table}-grams of --fixture-hash"
            )))
        }
        (Some(table), _) => table,
        (None, Some(q)) => q,
        (None, None) => {
            let min_len = dataset.iter().map(StringRecord::len).min().unwrap_or(1);
            let max_len = dataset.iter().map(StringRecord::len).max().unwrap_or(1);
            default_gram_length_for(min_len, max_len, targets, alphabet_size(dataset).max(2))?
        }
    };
    Ok(RunConfig {
        command,
        input: Some(opts.input.clone()),
        output: opts.output.clone(),
        k,
        targets,
        gram_len,
        repetitions: opts.repetitions,
        engine: opts.engine,
        ell: opts.ell.unwrap_or(DEFAULT_ELL),
        seed: opts.seed,
        threads: opts.threads,
        fixture_hash: opts.fixture_hash.clone(),
        timings: None,
        sweep: false,
        runs: DEFAULT_STATS_RUNS,
        truth: None,
        synthetic: None,
    })
}

/// Runs the selected engine with `config`'s parameters.
pub fn run_engine(
    config: &RunConfig,
    targets: usize,
    dataset: &[StringRecord],
    fixture: Option<&GramHasher>,
) -> Result<JoinResult> {
    match config.engine {
        Engine::Minjoin => {
            let params = PartitionParams::new(targets, config.gram_len)
                .with_repetitions(config.repetitions)
                .with_seed(config.seed);
            let mut join = MinJoin::new(config.k, params).with_threads(config.threads);
            if let Some(h) = fixture {
                join = join.with_hasher(h.clone());
            }
            join.run(dataset)
        }
        Engine::Minhash => {
            let params = MinHashParams::new(config.gram_len, config.ell, config.seed);
            let mut join = MinHashJoin::new(config.k, params).with_threads(config.threads);
            if let Some(h) = fixture {
                join = join.with_hasher(h.clone());
            }
            join.run(dataset)
        }
        Engine::Brute => {
            let started = std::time::Instant::now();
            let pairs = brute_force_join(dataset, config.k);
            let n = dataset.len();
            let mut stats = JoinStats {
                strings: n,
                candidates_before_dedup: n * (n - 1) / 2,
                candidates_after_dedup: n * (n - 1) / 2,
                verifications: n * (n - 1) / 2,
                ..JoinStats::default()
            };
            stats.timings.verify = started.elapsed();
            Ok(JoinResult {
                pairs,
                candidates: Vec::new(),
                stats,
            })
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn finish(path: &Path, w: BufWriter<File>) -> Result<()> {
    w.into_inner()
        .map_err(|e| Error::io(path, e.into_error()))?
        .sync_all()
        .map_err(|e| Error::io(path, e))
}

fn write_metadata<W: Write>(w: &mut W, meta: &[(&str, String)]) -> std::io::Result<()> {
    for (key, value) in meta {
        writeln!(w, "# {key}={value}")?;
    }
    Ok(())
}

/// Writes the pair TSV: metadata lines, then one `id_a<TAB>id_b<TAB>distance`
/// per pair.
pub fn write_pairs<W: Write>(
    mut w: W,
    meta: &[(&str, String)],
    pairs: &[JoinedPair],
) -> std::io::Result<()> {
    write_metadata(&mut w, meta)?;
    for p in pairs {
        writeln!(w, "{}\t{}\t{}", p.id_a, p.id_b, p.distance)?;
    }
    Ok(())
}

/// Reads a pair TSV written by [`write_pairs`] (or a truth file), skipping
/// `#` lines.
pub fn read_pairs(path: impl AsRef<Path>) -> Result<Vec<(usize, usize)>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split('\t').map(str::parse::<usize>);
        match (fields.next(), fields.next()) {
            (Some(Ok(a)), Some(Ok(b))) => pairs.push((a, b)),
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "{}: line {} is not a pair",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    Ok(pairs)
}

fn timing_rows(stats: &JoinStats) -> Vec<(String, std::time::Duration)> {
    stats
        .timings
        .rows()
        .into_iter()
        .map(|(s, d)| (s.to_string(), d))
        .collect()
}

/// What a command produced, for the caller to print.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub config: RunConfig,
    pub files: Vec<PathBuf>,
    pub message: String,
}

fn load_inputs(opts: &JoinArgs) -> Result<(Vec<StringRecord>, Option<GramHasher>)> {
    let dataset = load_dataset(&opts.input)?;
    let fixture = opts
        .fixture_hash
        .as_ref()
        .map(GramHasher::load_fixture)
        .transpose()?;
    Ok((dataset, fixture))
}

/// Parses nothing, validates everything, then executes one command.
pub fn run(cli: Cli) -> Result<RunSummary> {
    match cli.command {
        CliCommand::Join { opts, timings } => {
            let (dataset, fixture) = load_inputs(&opts)?;
            let mut config = resolve(Command::Join, &opts, &dataset, fixture.as_ref())?;
            config.timings = timings;
            run_join(config, &dataset, fixture.as_ref())
        }
        CliCommand::Eval {
            opts,
            timings,
            sweep,
        } => {
            let (dataset, fixture) = load_inputs(&opts)?;
            let mut config = resolve(Command::Eval, &opts, &dataset, fixture.as_ref())?;
            config.timings = timings;
            config.sweep = sweep;
            run_eval(config, &dataset, fixture.as_ref())
        }
        CliCommand::Gen(args) => run_gen(args),
        CliCommand::Stats { opts, runs } => {
            if opts.fixture_hash.is_some() {
                return Err(Error::ConflictingFlags(
                    "stats varies the hash seed; drop --fixture-hash".into(),
                ));
            }
            let (dataset, _) = load_inputs(&opts)?;
            let mut config = resolve(Command::Stats, &opts, &dataset, None)?;
            config.runs = runs;
            run_stats(config, &dataset)
        }
    }
}

fn run_join(
    config: RunConfig,
    dataset: &[StringRecord],
    fixture: Option<&GramHasher>,
) -> Result<RunSummary> {
    let result = run_engine(&config, config.targets, dataset, fixture)?;
    let mut w = create(&config.output)?;
    write_pairs(&mut w, &config.metadata(), &result.pairs)
        .map_err(|e| Error::io(&config.output, e))?;
    finish(&config.output, w)?;
    let mut files = vec![config.output.clone()];
    if let Some(path) = &config.timings {
        let mut w = create(path)?;
        write_timings_csv(&mut w, &timing_rows(&result.stats)).map_err(|e| Error::io(path, e))?;
        finish(path, w)?;
        files.push(path.clone());
    }
    let message = format!(
        "{} pairs from {} candidates over {} strings",
        result.pairs.len(),
        result.stats.candidates_after_dedup,
        dataset.len()
    );
    Ok(RunSummary {
        config,
        files,
        message,
    })
}

fn sweep_targets(k: usize) -> Vec<usize> {
    let lo = default_targets(k);
    let hi = k.max(lo);
    let mut ts: Vec<usize> = (0..5).map(|i| lo + (hi - lo) * i / 4).collect();
    ts.dedup();
    ts
}

fn run_eval(
    config: RunConfig,
    dataset: &[StringRecord],
    fixture: Option<&GramHasher>,
) -> Result<RunSummary> {
    let truth = pair_set(&brute_force_join(dataset, config.k));
    let result = run_engine(&config, config.targets, dataset, fixture)?;
    let report = measure_recall(&pair_set(&result.pairs), &truth);
    let mut rows: Vec<(String, String)> = config
        .metadata()
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
    rows.extend([
        ("recall".to_string(), format!("{:.6}", report.recall)),
        ("precision".to_string(), format!("{:.6}", report.precision)),
        ("truth_size".to_string(), report.truth_size.to_string()),
        ("found_size".to_string(), report.found_size.to_string()),
        (
            "partitions".to_string(),
            result.stats.partitions.to_string(),
        ),
        (
            "candidates_before_dedup".to_string(),
            result.stats.candidates_before_dedup.to_string(),
        ),
        (
            "verifications".to_string(),
            result.stats.verifications.to_string(),
        ),
    ]);
    if config.sweep && config.engine == Engine::Minjoin {
        for t in sweep_targets(config.k) {
            let swept = run_engine(&config, t, dataset, fixture)?;
            let r = measure_recall(&pair_set(&swept.pairs), &truth);
            rows.push((format!("recall.t{t}"), format!("{:.6}", r.recall)));
            rows.push((
                format!("verifications.t{t}"),
                swept.stats.verifications.to_string(),
            ));
        }
    }
    let mut w = create(&config.output)?;
    write_metrics_csv(&mut w, &rows).map_err(|e| Error::io(&config.output, e))?;
    finish(&config.output, w)?;
    let mut files = vec![config.output.clone()];
    if let Some(path) = &config.timings {
        let mut w = create(path)?;
        write_timings_csv(&mut w, &timing_rows(&result.stats)).map_err(|e| Error::io(path, e))?;
        finish(path, w)?;
        files.push(path.clone());
    }
    let message = format!(
        "recall {:.4}, precision {:.4} ({} of {} true pairs)",
        report.recall, report.precision, report.found_size, report.truth_size
    );
    Ok(RunSummary {
        config,
        files,
        message,
    })
}

fn run_gen(args: GenArgs) -> Result<RunSummary> {
    let spec = SyntheticSpec {
        n: args.n,
        len: args.len,
        alphabet_size: args.alphabet,
        clusters: args.clusters,
        cluster_size: args.cluster_size,
        k_plant: args.k_plant,
        seed: args.seed,
    };
    let data = generate_synthetic(&spec)?;
    let truth = args.truth.clone().unwrap_or_else(|| {
        let mut name = args.output.clone().into_os_string();
        name.push(".truth.tsv");
        PathBuf::from(name)
    });
    let config = RunConfig {
        command: Command::Gen,
        input: None,
        output: args.output.clone(),
        k: args.k_plant,
        targets: 0,
        gram_len: 0,
        repetitions: 1,
        engine: Engine::Brute,
        ell: 0,
        seed: args.seed,
        threads: 1,
        fixture_hash: None,
        timings: None,
        sweep: false,
        runs: 0,
        truth: Some(truth.clone()),
        synthetic: Some(spec),
    };

    let mut w = create(&args.output)?;
    for r in &data.records {
        w.write_all(&r.bytes)
            .and_then(|_| w.write_all(b"\n"))
            .map_err(|e| Error::io(&args.output, e))?;
    }
    finish(&args.output, w)?;

    let mut w = create(&truth)?;
    (|| -> std::io::Result<()> {
        write_metadata(&mut w, &config.metadata())?;
        for (a, b) in &data.planted {
            writeln!(w, "{a}\t{b}")?;
        }
        Ok(())
    })()
    .map_err(|e| Error::io(&truth, e))?;
    finish(&truth, w)?;

    let message = format!(
        "{} strings, {} planted pairs",
        data.records.len(),
        data.planted.len()
    );
    Ok(RunSummary {
        files: vec![args.output, truth],
        config,
        message,
    })
}

fn run_stats(config: RunConfig, dataset: &[StringRecord]) -> Result<RunSummary> {
    if config.runs == 0 {
        return Err(Error::InvalidParameter("--runs must be at least 1".into()));
    }
    let seeds: Vec<u64> = (0..config.runs as u64)
        .map(|i| config.seed.wrapping_add(i))
        .collect();
    let strings: Vec<&[u8]> = dataset.iter().map(|r| r.bytes.as_slice()).collect();
    let stats = anchor_statistics(&strings, config.targets, config.gram_len, &seeds)?;
    let result = run_engine(&config, config.targets, dataset, None)?;

    std::fs::create_dir_all(&config.output).map_err(|e| Error::io(&config.output, e))?;
    let anchors = config.output.join("anchors.csv");
    let mut w = create(&anchors)?;
    write_anchor_cdf_csv(&mut w, &stats).map_err(|e| Error::io(&anchors, e))?;
    finish(&anchors, w)?;

    let timings = config.output.join("timings.csv");
    let mut w = create(&timings)?;
    write_timings_csv(&mut w, &timing_rows(&result.stats)).map_err(|e| Error::io(&timings, e))?;
    finish(&timings, w)?;

    let meta = config.output.join("metadata.txt");
    let mut w = create(&meta)?;
    let mut lines = config.metadata();
    lines.push(("runs", config.runs.to_string()));
    write_metadata(&mut w, &lines).map_err(|e| Error::io(&meta, e))?;
    finish(&meta, w)?;

    let t = config.targets as f64;
    let message = format!(
        "interior anchors: mean {:.2}, variance {:.2}, {:.1}% within T +/- 2 sqrt(T)",
        stats.mean,
        stats.variance,
        100.0 * stats.mass_within(t, 2.0 * t.sqrt())
    );
    Ok(RunSummary {
        config,
        files: vec![anchors, timings, meta],
        message,
    })
}
