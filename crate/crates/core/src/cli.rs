//! Command-line front end.
//!
//! Subcommands: `dict check`, `table gen`, `table buckets`, `crack`,
//! `bench noise`, `bench success`. Every command accepts `--config FILE`
//! (line-oriented `key=value`, `#` comments); explicit flags override file
//! values. Unknown config keys are rejected.
//!
//! Exit codes: 0 success (crack: hash recovered), 1 crack NOT_FOUND,
//! 2 malformed input (dictionary, config, hex target, file formats),
//! 3 invalid generation parameters (plaintext-space overflow, m > N),
//! 4 table/bucket/dictionary mismatch, 5 internal engine failure.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::buckets::BucketMap;
use crate::dictgen::{compute_extension_ratio, SmartDictionary};
use crate::grover::{success_probability, TargetSpec, Variant};
use crate::qsim::NoiseModel;
use crate::rainbow::{search, EngineKind, HashValue, RainbowTable, TableFile, TableParams};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_FOUND: i32 = 1;
pub const EXIT_BAD_INPUT: i32 = 2;
pub const EXIT_BAD_PARAMS: i32 = 3;
pub const EXIT_MISMATCH: i32 = 4;
pub const EXIT_INTERNAL: i32 = 5;

#[derive(Parser)]
#[command(
    name = "qrainbow",
    about = "Smart-dictionary rainbow tables with a distributed exact Grover lookup engine",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dictionary utilities
    Dict {
        #[command(subcommand)]
        sub: DictCmd,
    },
    /// Table construction and indexing
    Table {
        #[command(subcommand)]
        sub: TableCmd,
    },
    /// Recover the preimage of a hash from a table
    Crack {
        /// Target digest, hex encoded
        target: String,
        #[command(flatten)]
        opts: CrackOpts,
    },
    /// Reproducible experiment sweeps (CSV output)
    Bench {
        #[command(subcommand)]
        sub: BenchCmd,
    },
}

#[derive(Subcommand)]
enum DictCmd {
    /// Parse a dictionary definition and report its plaintext space
    Check { file: PathBuf },
}

#[derive(Subcommand)]
enum TableCmd {
    /// Generate a rainbow table file
    Gen(TableGenOpts),
    /// Build the bucket sidecar for an existing table file
    Buckets(TableBucketsOpts),
}

#[derive(Subcommand)]
enum BenchCmd {
    /// Depolarizing-noise sweep of the three Grover variants
    Noise(BenchNoiseOpts),
    /// Success probabilities across target sizes
    Success(BenchSuccessOpts),
}

#[derive(Args)]
struct TableGenOpts {
    #[arg(long)]
    dict: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    t: Option<u64>,
    #[arg(long)]
    m: Option<u64>,
    #[arg(long)]
    k: Option<u64>,
    #[arg(long)]
    kappa: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    hash: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct TableBucketsOpts {
    #[arg(long)]
    table: Option<PathBuf>,
    /// Defaults to `<table>.buckets`
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct CrackOpts {
    #[arg(long)]
    dict: Option<PathBuf>,
    #[arg(long)]
    table: Option<PathBuf>,
    /// Bucket sidecar; rebuilt from the table when absent
    #[arg(long)]
    buckets: Option<PathBuf>,
    #[arg(long)]
    engine: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct BenchNoiseOpts {
    /// Target bitstring (its length sets the qubit count)
    #[arg(long)]
    tau: Option<String>,
    /// Sweep grid `start:end:step`
    #[arg(long = "p-grid")]
    p_grid: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report sampled frequencies over this many shots instead of exact
    /// probabilities
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct BenchSuccessOpts {
    /// Sweep every target of every size 2..=5, not just the four defaults
    #[arg(long)]
    exhaustive: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Parsed `key=value` config file. Flags override these values.
struct FileConfig(BTreeMap<String, String>);

const CONFIG_KEYS: &[&str] = &[
    "dict", "table", "buckets", "out", "t", "m", "k", "kappa", "seed", "hash", "engine", "tau",
    "p-grid", "shots", "exhaustive",
];

impl FileConfig {
    fn load(path: Option<&Path>) -> Result<Self> {
        let mut map = BTreeMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)?;
            for (no, raw) in text.lines().enumerate() {
                let line = raw.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    Error::Config(format!("config line {}: expected key=value", no + 1))
                })?;
                let key = key.trim().replace('_', "-");
                if !CONFIG_KEYS.contains(&key.as_str()) {
                    return Err(Error::Config(format!(
                        "config line {}: unknown key {key:?}",
                        no + 1
                    )));
                }
                map.insert(key, value.trim().to_string());
            }
        }
        Ok(FileConfig(map))
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| Error::Config(format!("config key {key:?}: bad value {raw:?}"))),
        }
    }

    fn get_path(&self, key: &str) -> Option<PathBuf> {
        self.0.get(key).map(PathBuf::from)
    }
}

fn require<T>(value: Option<T>, what: &str) -> Result<T> {
    value.ok_or_else(|| Error::Config(format!("missing required {what} (flag or config)")))
}

/// Entry point used by main(); returns the process exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version as "errors" with success status
            let code = if e.use_stderr() { EXIT_BAD_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Dict { sub } => match sub {
            DictCmd::Check { file } => report(cmd_dict_check(&file), |e| match e {
                Error::Io(_) | Error::Dict(_) | Error::Config(_) => EXIT_BAD_INPUT,
                _ => EXIT_INTERNAL,
            }),
        },
        Command::Table { sub } => match sub {
            TableCmd::Gen(opts) => report(cmd_table_gen(opts), |e| match e {
                Error::Config(_) => EXIT_BAD_PARAMS,
                Error::Io(_) | Error::Dict(_) | Error::Table(_) => EXIT_BAD_INPUT,
                _ => EXIT_INTERNAL,
            }),
            TableCmd::Buckets(opts) => report(cmd_table_buckets(opts), |e| match e {
                Error::Mismatch(_) => EXIT_MISMATCH,
                Error::Io(_) | Error::Table(_) | Error::Config(_) => EXIT_BAD_INPUT,
                _ => EXIT_INTERNAL,
            }),
        },
        Command::Crack { target, opts } => report(cmd_crack(&target, opts), |e| match e {
            Error::Mismatch(_) => EXIT_MISMATCH,
            Error::Engine(_) => EXIT_INTERNAL,
            Error::Io(_) | Error::Dict(_) | Error::Table(_) | Error::Config(_) => EXIT_BAD_INPUT,
            _ => EXIT_INTERNAL,
        }),
        Command::Bench { sub } => {
            let result = match sub {
                BenchCmd::Noise(opts) => cmd_bench_noise(opts),
                BenchCmd::Success(opts) => cmd_bench_success(opts),
            };
            report(result, |e| match e {
                Error::Io(_) | Error::Config(_) => EXIT_BAD_INPUT,
                _ => EXIT_INTERNAL,
            })
        }
    }
}

fn report(result: Result<i32>, classify: impl Fn(&Error) -> i32) -> i32 {
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            classify(&e)
        }
    }
}

fn cmd_dict_check(file: &Path) -> Result<i32> {
    let dict = SmartDictionary::from_file(file)?;
    println!("pattern: {}", dict.pattern());
    for class in dict.pattern().sequence() {
        let gen = dict
            .generator_set()
            .generator(*class)
            .expect("validated at construction");
        let ext = compute_extension_ratio(dict.rules(), gen);
        println!(
            "class {}: {} entries, extension ratio {}",
            class,
            gen.len(),
            ext
        );
    }
    println!("rules: {}", dict.rules().len());
    println!("N: {}", dict.space_size());
    Ok(EXIT_OK)
}

fn cmd_table_gen(opts: TableGenOpts) -> Result<i32> {
    let file = FileConfig::load(opts.config.as_deref())?;
    let dict_path = require(opts.dict.or_else(|| file.get_path("dict")), "--dict")?;
    let out = require(opts.out.or_else(|| file.get_path("out")), "--out")?;
    let t = opts.t.or(file.get("t")?).unwrap_or(16);
    let m = opts.m.or(file.get("m")?).unwrap_or(64);
    let k = opts.k.or(file.get("k")?).unwrap_or(16);
    let kappa = opts.kappa.or(file.get("kappa")?).unwrap_or(16);
    let seed = opts.seed.or(file.get("seed")?).unwrap_or(1);
    let hash = opts
        .hash
        .map(|s| s.parse())
        .transpose()?
        .or(file.get("hash")?)
        .unwrap_or(crate::rainbow::HashAlgorithm::Sha1);

    let dictionary = SmartDictionary::from_file(&dict_path)?;
    let params = TableParams {
        chain_length: t,
        chain_count: m,
        hash_algorithm: hash,
        bucket_modulus: k,
        endpoint_bits: kappa,
        seed,
        dictionary,
    };
    let started = Instant::now();
    let table = crate::rainbow::generate_table(params)?;
    table.save(&out)?;
    println!(
        "m={} t={} N={} hash_evals={} duplicates={} elapsed={:.3}s out={}",
        m,
        t,
        table.params().dictionary.space_size(),
        table.generation_hash_evals(),
        table.duplicate_endpoints(),
        started.elapsed().as_secs_f64(),
        out.display()
    );
    Ok(EXIT_OK)
}

fn cmd_table_buckets(opts: TableBucketsOpts) -> Result<i32> {
    let file = FileConfig::load(opts.config.as_deref())?;
    let table_path = require(opts.table.or_else(|| file.get_path("table")), "--table")?;
    let out = opts
        .out
        .or_else(|| file.get_path("buckets"))
        .unwrap_or_else(|| sidecar_path(&table_path));
    let tf = TableFile::load(&table_path)?;
    let map = BucketMap::build_from_endpoints(
        tf.header.bucket_modulus,
        tf.header.endpoint_bits,
        tf.rows.iter().map(|r| r.end_hashed),
    )?;
    map.save(&out)?;
    println!(
        "buckets={} k={} kappa={} rows={} out={}",
        map.bucket_count(),
        map.k(),
        map.kappa(),
        tf.rows.len(),
        out.display()
    );
    Ok(EXIT_OK)
}

fn sidecar_path(table: &Path) -> PathBuf {
    let mut os = table.as_os_str().to_os_string();
    os.push(".buckets");
    PathBuf::from(os)
}

/// Check a loaded sidecar against the table it claims to index: same k and
/// kappa, and exactly the table's (bucket, offset) population.
fn verify_buckets_match(map: &BucketMap, table: &RainbowTable) -> Result<()> {
    let params = table.params();
    if map.k() != params.bucket_modulus || map.kappa() != params.endpoint_bits {
        return Err(Error::Mismatch(format!(
            "bucket sidecar (k={}, kappa={}) does not match table (k={}, kappa={})",
            map.k(),
            map.kappa(),
            params.bucket_modulus,
            params.endpoint_bits
        )));
    }
    let rebuilt = BucketMap::build(table)?;
    let collect = |m: &BucketMap| -> Vec<(u64, Vec<u64>)> {
        m.iter()
            .map(|(k, offs)| {
                let mut o = offs.clone();
                o.sort_unstable();
                (*k, o)
            })
            .collect()
    };
    if collect(map) != collect(&rebuilt) {
        return Err(Error::Mismatch(
            "bucket sidecar population differs from the table's endpoints".into(),
        ));
    }
    Ok(())
}

fn cmd_crack(target_hex: &str, opts: CrackOpts) -> Result<i32> {
    let file = FileConfig::load(opts.config.as_deref())?;
    let dict_path = require(opts.dict.or_else(|| file.get_path("dict")), "--dict")?;
    let table_path = require(opts.table.or_else(|| file.get_path("table")), "--table")?;
    let buckets_path = opts.buckets.or_else(|| file.get_path("buckets"));
    let engine: EngineKind = opts
        .engine
        .map(|s| s.parse())
        .transpose()?
        .or(file.get("engine")?)
        .unwrap_or(EngineKind::Dega);

    let target = HashValue::from_hex(target_hex)?;
    let dictionary = SmartDictionary::from_file(&dict_path)?;
    let table = RainbowTable::load(&table_path, dictionary)?;
    if target.bytes().len() != table.params().hash_algorithm.digest_len() {
        return Err(Error::Config(format!(
            "target is {} bytes but {} digests are {} bytes",
            target.bytes().len(),
            table.params().hash_algorithm,
            table.params().hash_algorithm.digest_len()
        )));
    }
    let buckets = match buckets_path {
        Some(path) => {
            let map = BucketMap::load_sidecar(&path)?;
            verify_buckets_match(&map, &table)?;
            // the sidecar has no provenance; search only needs membership,
            // which was just verified identical, so use the rebuilt map
            BucketMap::build(&table)?
        }
        None => BucketMap::build(&table)?,
    };

    let outcome = search(&target, &table, &buckets, engine)?;
    let c = outcome.counters;
    match outcome.result {
        Some(plaintext) => {
            println!("{plaintext}");
            println!(
                "counters: replay={} final_column={} rebuild={} oracle_calls={} chains_examined={}",
                c.replay_hash_evals,
                c.final_column_hash_evals,
                c.rebuild_hash_evals,
                c.oracle_calls,
                c.chains_examined
            );
            Ok(EXIT_OK)
        }
        None => {
            println!("NOT_FOUND");
            println!(
                "counters: replay={} final_column={} rebuild={} oracle_calls={} chains_examined={}",
                c.replay_hash_evals,
                c.final_column_hash_evals,
                c.rebuild_hash_evals,
                c.oracle_calls,
                c.chains_examined
            );
            Ok(EXIT_NOT_FOUND)
        }
    }
}

fn parse_p_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Config(format!(
            "p-grid must be start:end:step, got {spec:?}"
        )));
    }
    let parse = |s: &str| -> Result<f64> {
        s.parse()
            .map_err(|_| Error::Config(format!("bad p-grid number {s:?}")))
    };
    let (start, end, step) = (parse(parts[0])?, parse(parts[1])?, parse(parts[2])?);
    if step <= 0.0 || start < 0.0 || end > 1.0 || end < start {
        return Err(Error::Config(format!("unusable p-grid {spec:?}")));
    }
    let mut grid = Vec::new();
    let mut i = 0u32;
    loop {
        let p = start + step * i as f64;
        if p > end + 1e-12 {
            break;
        }
        grid.push(p);
        i += 1;
    }
    Ok(grid)
}

fn write_output(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, content)?,
        None => {
            std::io::stdout().write_all(content.as_bytes())?;
        }
    }
    Ok(())
}

/// Evaluate one sweep cell per entry, in order. Exact sweeps fan out over
/// worker threads; sampled sweeps stay sequential so the shot RNG stream is
/// reproducible. Results come back in cell order for the single writer.
fn sweep<C: Sync>(
    cells: &[C],
    seed: u64,
    shots: Option<u64>,
    eval: impl Fn(&C, Option<(u64, &mut ChaCha20Rng)>) -> Result<f64> + Sync,
) -> Result<Vec<f64>> {
    match shots {
        None => {
            use rayon::prelude::*;
            cells.par_iter().map(|c| eval(c, None)).collect()
        }
        Some(shots) => {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            cells
                .iter()
                .map(|c| eval(c, Some((shots, &mut rng))))
                .collect()
        }
    }
}

/// Exact probability, or a sampled frequency when shots are requested.
fn observed_probability(
    variant: Variant,
    spec: &TargetSpec,
    noise: Option<NoiseModel>,
    sampling: Option<(u64, &mut ChaCha20Rng)>,
) -> Result<f64> {
    match sampling {
        None => success_probability(variant, spec, noise),
        Some((shots, rng)) => {
            let gates = crate::grover::circuit_for(variant, spec)?;
            let probs = crate::qsim::run_circuit(&gates, spec.n(), noise)?;
            let mut hits = 0u64;
            for _ in 0..shots {
                let mut draw: f64 = rng.gen();
                let mut outcome = probs.len() - 1;
                for (i, p) in probs.iter().enumerate() {
                    if draw < *p {
                        outcome = i;
                        break;
                    }
                    draw -= p;
                }
                if outcome == spec.index() {
                    hits += 1;
                }
            }
            Ok(hits as f64 / shots as f64)
        }
    }
}

fn cmd_bench_noise(opts: BenchNoiseOpts) -> Result<i32> {
    let file = FileConfig::load(opts.config.as_deref())?;
    let tau = opts
        .tau
        .or(file.get("tau")?)
        .unwrap_or_else(|| "0011".to_string());
    let grid_spec = opts
        .p_grid
        .or(file.get("p-grid")?)
        .unwrap_or_else(|| "0:0.10:0.01".to_string());
    let shots = match opts.shots {
        Some(s) => Some(s),
        None => file.get("shots")?,
    };
    let seed = opts.seed.or(file.get("seed")?).unwrap_or(1);
    let out = opts.out.or_else(|| file.get_path("out"));

    let spec = TargetSpec::new(&tau)?;
    let grid = parse_p_grid(&grid_spec)?;
    let cells: Vec<(f64, Variant)> = grid
        .iter()
        .flat_map(|&p| Variant::ALL.map(|v| (p, v)))
        .collect();
    let probs = sweep(&cells, seed, shots, |&(p, variant), sampling| {
        observed_probability(variant, &spec, Some(NoiseModel::new(p)?), sampling)
    })?;
    let mut csv = String::from("p,variant,success_probability\n");
    for ((p, variant), prob) in cells.iter().zip(probs) {
        csv.push_str(&format!("{p:.4},{},{prob:.9}\n", variant.name()));
    }
    write_output(out.as_deref(), &csv)?;
    Ok(EXIT_OK)
}

/// The four desk-scale targets the success sweep reports by default.
pub const SUCCESS_TARGETS: [&str; 4] = ["11", "001", "1100", "01011"];

fn cmd_bench_success(opts: BenchSuccessOpts) -> Result<i32> {
    let file = FileConfig::load(opts.config.as_deref())?;
    let exhaustive = opts.exhaustive || file.get("exhaustive")?.unwrap_or(false);
    let shots = match opts.shots {
        Some(s) => Some(s),
        None => file.get("shots")?,
    };
    let seed = opts.seed.or(file.get("seed")?).unwrap_or(1);
    let out = opts.out.or_else(|| file.get_path("out"));

    let targets: Vec<String> = if exhaustive {
        (2..=5usize)
            .flat_map(|n| (0..1u64 << n).map(move |v| format!("{v:0n$b}")))
            .collect()
    } else {
        SUCCESS_TARGETS.iter().map(|s| s.to_string()).collect()
    };

    let cells: Vec<(String, Variant)> = targets
        .iter()
        .flat_map(|tau| Variant::ALL.map(|v| (tau.clone(), v)))
        .collect();
    let probs = sweep(&cells, seed, shots, |(tau, variant), sampling| {
        observed_probability(*variant, &TargetSpec::new(tau)?, None, sampling)
    })?;
    let mut csv = String::from("n,tau,variant,success_probability\n");
    for ((tau, variant), prob) in cells.iter().zip(probs) {
        csv.push_str(&format!("{},{tau},{},{prob:.9}\n", tau.len(), variant.name()));
    }
    write_output(out.as_deref(), &csv)?;
    Ok(EXIT_OK)
}
