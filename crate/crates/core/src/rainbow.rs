//! Rainbow chain construction, table persistence, and lookup.
//!
//! A chain starts at a sampled index S_0 and iterates t times:
//! plaintext = IndexToPlain(S), y = H(plaintext), S = HashToIndex(y, N, step),
//! with step = 1-based iteration number so every column reduces differently.
//! The stored row keeps the start index, the final plaintext, and the
//! leading-kappa-bit truncation of the final hash (the k-bit endpoint).
//!
//! Lookup hypothesis i (1-based, i = 1..t) assumes the target hash sits i
//! reduction steps before the endpoint: it replays those i reductions with
//! salts (t-i)..(t-1), paying i-1 intermediate full hashes plus one k-bit
//! hash of the candidate endpoint, which is exactly the classic
//! t(t-1)/2 + t cost profile for a fruitless search. Targets that hash a
//! stored endpoint itself are caught beforehand by a zero-cost probe that
//! truncates the target hash directly. Rebuild work after a bucket hit is
//! counted separately so false alarms never blur the replay bound.

use std::collections::HashSet;
use std::fmt;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use sha1::{Digest, Sha1};
use sha2::Sha256;

use crate::buckets::BucketMap;
use crate::dictgen::SmartDictionary;
use crate::grover;
use crate::{Error, Result};

/// Full cryptographic hash used along the chains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HashAlgorithm {
    Sha1,
    Sha256,
}

impl HashAlgorithm {
    pub fn digest_len(self) -> usize {
        match self {
            HashAlgorithm::Sha1 => 20,
            HashAlgorithm::Sha256 => 32,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            HashAlgorithm::Sha1 => "sha1",
            HashAlgorithm::Sha256 => "sha256",
        }
    }
}

impl FromStr for HashAlgorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sha1" => Ok(HashAlgorithm::Sha1),
            "sha256" => Ok(HashAlgorithm::Sha256),
            other => Err(Error::Config(format!("unknown hash algorithm {other:?}"))),
        }
    }
}

impl fmt::Display for HashAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A digest of the configured full hash.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashValue {
    bytes: Vec<u8>,
}

impl HashValue {
    pub fn from_bytes(bytes: Vec<u8>) -> Self {
        HashValue { bytes }
    }

    pub fn from_hex(hex_str: &str) -> Result<Self> {
        let bytes = hex::decode(hex_str.trim())
            .map_err(|e| Error::Config(format!("malformed hex digest: {e}")))?;
        Ok(HashValue { bytes })
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.bytes)
    }

    /// Big-endian integer over the first 16 digest bytes; shorter digests use
    /// what they have.
    pub fn int128(&self) -> u128 {
        let mut acc: u128 = 0;
        for &b in self.bytes.iter().take(16) {
            acc = (acc << 8) | b as u128;
        }
        acc
    }

    /// The leading `kappa` bits as an integer (big-endian bit order).
    pub fn truncate_bits(&self, kappa: u32) -> u64 {
        debug_assert!((1..=64).contains(&kappa));
        let nbytes = kappa.div_ceil(8) as usize;
        let mut acc: u128 = 0;
        for i in 0..nbytes {
            let b = self.bytes.get(i).copied().unwrap_or(0);
            acc = (acc << 8) | b as u128;
        }
        (acc >> (8 * nbytes as u32 - kappa)) as u64
    }
}

pub fn full_hash(alg: HashAlgorithm, plaintext: &str) -> HashValue {
    let bytes = match alg {
        HashAlgorithm::Sha1 => Sha1::digest(plaintext.as_bytes()).to_vec(),
        HashAlgorithm::Sha256 => Sha256::digest(plaintext.as_bytes()).to_vec(),
    };
    HashValue { bytes }
}

/// Reduction step: (H_int + step) mod N over the plaintext index space. The
/// additive step salt makes each chain column a distinct reduction function.
pub fn hash_to_index(h: &HashValue, space: u64, step: u64) -> u64 {
    debug_assert!(space >= 1);
    let space = space as u128;
    // reduce both terms first: an all-ones digest plus a step would overflow
    let base = h.int128() % space;
    ((base + step as u128 % space) % space) as u64
}

/// k-bit endpoint hash: full hash of the plaintext truncated to the leading
/// kappa bits.
pub fn k_bit_hash(alg: HashAlgorithm, kappa: u32, plaintext: &str) -> u64 {
    full_hash(alg, plaintext).truncate_bits(kappa)
}

/// Everything table generation and lookup agree on.
#[derive(Debug, Clone)]
pub struct TableParams {
    pub chain_length: u64,
    pub chain_count: u64,
    pub hash_algorithm: HashAlgorithm,
    /// Bucket modulus k: the quantum search-space size.
    pub bucket_modulus: u64,
    /// kappa: bit width of the endpoint hash, 2^kappa = bucket count * k.
    pub endpoint_bits: u32,
    pub seed: u64,
    pub dictionary: SmartDictionary,
}

impl TableParams {
    pub fn validate(&self) -> Result<()> {
        if self.chain_length < 1 {
            return Err(Error::Config("chain length t must be >= 1".into()));
        }
        if self.chain_count < 1 {
            return Err(Error::Config("chain count m must be >= 1".into()));
        }
        if self.bucket_modulus < 4 || !self.bucket_modulus.is_power_of_two() {
            return Err(Error::Config(format!(
                "bucket modulus k={} must be a power of two >= 4",
                self.bucket_modulus
            )));
        }
        let n = self.dictionary.space_size();
        if self.bucket_modulus > n {
            return Err(Error::Config(format!(
                "bucket modulus k={} exceeds plaintext space N={n}",
                self.bucket_modulus
            )));
        }
        if self.endpoint_bits == 0 || self.endpoint_bits > 64 {
            return Err(Error::Config(format!(
                "kappa={} outside 1..=64",
                self.endpoint_bits
            )));
        }
        if (self.endpoint_bits as u64) < self.bucket_modulus.trailing_zeros() as u64 {
            return Err(Error::Config(
                "kappa smaller than log2(k): endpoint space narrower than one bucket".into(),
            ));
        }
        if self.chain_count > n {
            return Err(Error::Config(format!(
                "chain count m={} cannot exceed plaintext space N={n} (distinct starts)",
                self.chain_count
            )));
        }
        Ok(())
    }
}

/// One stored chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableRow {
    pub start_index: u64,
    pub end_plaintext: String,
    pub end_hashed: u64,
}

/// Endpoint table, rows sorted by (end_hashed, start_index).
#[derive(Debug, Clone)]
pub struct RainbowTable {
    params: TableParams,
    rows: Vec<TableRow>,
}

/// Result of walking one chain.
#[derive(Debug, Clone)]
pub struct ChainEnd {
    pub end_plaintext: String,
    pub end_hashed: u64,
    pub hash_evals: u64,
}

/// Walk t steps from a start index. The endpoint hash reuses the final
/// iteration's digest, so the cost is exactly t full-hash evaluations.
pub fn generate_chain(start: u64, params: &TableParams) -> Result<ChainEnd> {
    let dict = &params.dictionary;
    let space = dict.space_size();
    if start >= space {
        return Err(Error::Range {
            what: "start index",
            value: start,
            limit: space,
        });
    }
    let mut index = start;
    let mut plaintext = String::new();
    let mut end_hashed = 0u64;
    for step in 1..=params.chain_length {
        plaintext = dict.index_to_plain(index)?;
        let digest = full_hash(params.hash_algorithm, &plaintext);
        end_hashed = digest.truncate_bits(params.endpoint_bits);
        index = hash_to_index(&digest, space, step);
    }
    Ok(ChainEnd {
        end_plaintext: plaintext,
        end_hashed,
        hash_evals: params.chain_length,
    })
}

/// Sample m distinct start indices, reproducibly for a given seed.
fn sample_starts(space: u64, m: u64, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    if space <= 1 << 20 {
        // partial Fisher-Yates over the whole space
        let mut pool: Vec<u64> = (0..space).collect();
        for i in 0..m as usize {
            let j = rng.gen_range(i..pool.len());
            pool.swap(i, j);
        }
        pool.truncate(m as usize);
        pool
    } else {
        let mut seen = HashSet::with_capacity(m as usize);
        let mut starts = Vec::with_capacity(m as usize);
        while starts.len() < m as usize {
            let s = rng.gen_range(0..space);
            if seen.insert(s) {
                starts.push(s);
            }
        }
        starts
    }
}

/// Build a table: m chains from seeded distinct starts, rows sorted by
/// endpoint.
pub fn generate_table(params: TableParams) -> Result<RainbowTable> {
    params.validate()?;
    let starts = sample_starts(params.dictionary.space_size(), params.chain_count, params.seed);
    let mut rows = starts
        .par_iter()
        .map(|&start| {
            generate_chain(start, &params).map(|end| TableRow {
                start_index: start,
                end_plaintext: end.end_plaintext,
                end_hashed: end.end_hashed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| {
        (a.end_hashed, a.start_index).cmp(&(b.end_hashed, b.start_index))
    });
    Ok(RainbowTable { params, rows })
}

impl RainbowTable {
    pub fn params(&self) -> &TableParams {
        &self.params
    }

    pub fn rows(&self) -> &[TableRow] {
        &self.rows
    }

    /// Full hashes spent generating the table: m * t.
    pub fn generation_hash_evals(&self) -> u64 {
        self.params.chain_count * self.params.chain_length
    }

    /// Rows sharing their endpoint value with another row.
    pub fn duplicate_endpoints(&self) -> usize {
        self.rows
            .windows(2)
            .filter(|w| w[0].end_hashed == w[1].end_hashed)
            .count()
    }

    /// Rows whose end_hashed equals `value` (contiguous in the sorted order).
    pub fn rows_with_endpoint(&self, value: u64) -> &[TableRow] {
        let lo = self.rows.partition_point(|r| r.end_hashed < value);
        let hi = self.rows.partition_point(|r| r.end_hashed <= value);
        &self.rows[lo..hi]
    }

    pub fn to_table_string(&self) -> String {
        let p = &self.params;
        let mut out = format!(
            "RTBL1 {} {} {} {} {} {} {}\n",
            p.hash_algorithm,
            p.chain_length,
            p.chain_count,
            p.bucket_modulus,
            p.endpoint_bits,
            p.seed,
            p.dictionary.space_size(),
        );
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{}",
                row.start_index,
                hex::encode(row.end_plaintext.as_bytes()),
                row.end_hashed
            );
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_table_string())?;
        Ok(())
    }

    pub fn load(path: &Path, dictionary: SmartDictionary) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, dictionary)
    }

    pub fn parse(text: &str, dictionary: SmartDictionary) -> Result<Self> {
        Self::from_table_file(TableFile::parse(text)?, dictionary)
    }

    /// Bind a raw table file to the dictionary it was generated over.
    pub fn from_table_file(file: TableFile, dictionary: SmartDictionary) -> Result<Self> {
        let h = &file.header;
        if h.space != dictionary.space_size() {
            return Err(Error::Mismatch(format!(
                "table was built over N={} but the dictionary defines N={}",
                h.space,
                dictionary.space_size()
            )));
        }
        let params = TableParams {
            chain_length: h.chain_length,
            chain_count: h.chain_count,
            hash_algorithm: h.hash_algorithm,
            bucket_modulus: h.bucket_modulus,
            endpoint_bits: h.endpoint_bits,
            seed: h.seed,
            dictionary,
        };
        params.validate().map_err(|e| Error::Table(format!("{e}")))?;
        Ok(RainbowTable {
            params,
            rows: file.rows,
        })
    }
}

/// The RTBL1 header fields as written.
#[derive(Debug, Clone, Copy)]
pub struct TableHeader {
    pub hash_algorithm: HashAlgorithm,
    pub chain_length: u64,
    pub chain_count: u64,
    pub bucket_modulus: u64,
    pub endpoint_bits: u32,
    pub seed: u64,
    pub space: u64,
}

/// A parsed table file before it is bound to a dictionary. Enough for
/// dictionary-free work such as bucket building.
#[derive(Debug, Clone)]
pub struct TableFile {
    pub header: TableHeader,
    pub rows: Vec<TableRow>,
}

impl TableFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Table("empty table file".into()))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 8 || parts[0] != "RTBL1" {
            return Err(Error::Table(format!("bad table header {header:?}")));
        }
        let hash_algorithm: HashAlgorithm = parts[1].parse()?;
        let parse_u64 = |s: &str, what: &str| -> Result<u64> {
            s.parse()
                .map_err(|_| Error::Table(format!("bad {what} {s:?} in header")))
        };
        let header = TableHeader {
            hash_algorithm,
            chain_length: parse_u64(parts[2], "t")?,
            chain_count: parse_u64(parts[3], "m")?,
            bucket_modulus: parse_u64(parts[4], "k")?,
            endpoint_bits: parse_u64(parts[5], "kappa")? as u32,
            seed: parse_u64(parts[6], "seed")?,
            space: parse_u64(parts[7], "N")?,
        };

        let mut rows = Vec::new();
        for (no, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(Error::Table(format!("line {}: expected 3 fields", no + 2)));
            }
            let start_index = fields[0]
                .parse()
                .map_err(|_| Error::Table(format!("line {}: bad start index", no + 2)))?;
            let plain_bytes = hex::decode(fields[1])
                .map_err(|_| Error::Table(format!("line {}: bad plaintext hex", no + 2)))?;
            let end_plaintext = String::from_utf8(plain_bytes)
                .map_err(|_| Error::Table(format!("line {}: plaintext not UTF-8", no + 2)))?;
            let end_hashed = fields[2]
                .parse()
                .map_err(|_| Error::Table(format!("line {}: bad endpoint", no + 2)))?;
            rows.push(TableRow {
                start_index,
                end_plaintext,
                end_hashed,
            });
        }
        if rows.len() as u64 != header.chain_count {
            return Err(Error::Table(format!(
                "header promises m={} rows, file has {}",
                header.chain_count,
                rows.len()
            )));
        }
        if !rows.windows(2).all(|w| w[0].end_hashed <= w[1].end_hashed) {
            return Err(Error::Table("rows are not sorted by endpoint".into()));
        }
        Ok(TableFile { header, rows })
    }
}

/// Which engine answers the bucket membership probes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineKind {
    Classical,
    Dega,
}

impl FromStr for EngineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "classical" => Ok(EngineKind::Classical),
            "dega" => Ok(EngineKind::Dega),
            other => Err(Error::Config(format!("unknown engine {other:?}"))),
        }
    }
}

/// Cost counters, split so the replay bound stays assertable: `replay` covers
/// the intermediate hashes between reductions, `final_column` the k-bit hash
/// of each candidate endpoint, `rebuild` the verification walks after a
/// bucket hit.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchCounters {
    pub replay_hash_evals: u64,
    pub final_column_hash_evals: u64,
    pub rebuild_hash_evals: u64,
    pub oracle_calls: u64,
    pub chains_examined: u64,
}

impl SearchCounters {
    pub fn hash_evals(&self) -> u64 {
        self.replay_hash_evals + self.final_column_hash_evals + self.rebuild_hash_evals
    }
}

/// Lookup outcome: the recovered preimage, if any, plus the cost counters.
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub result: Option<String>,
    pub counters: SearchCounters,
}

fn probe_and_verify(
    target: &HashValue,
    candidate_endpoint: Option<&str>,
    endpoint_hash: u64,
    table: &RainbowTable,
    buckets: &BucketMap,
    engine: EngineKind,
    counters: &mut SearchCounters,
) -> Result<Option<String>> {
    let k = buckets.k();
    let bucket_key = endpoint_hash / k;
    let offset = endpoint_hash % k;
    let membership = match buckets.query_bucket(bucket_key) {
        // classical pre-check: absent key skips the quantum search entirely
        None => return Ok(None),
        Some(m) => m,
    };
    counters.oracle_calls += 1;
    let hit = match engine {
        EngineKind::Classical => membership[offset as usize],
        EngineKind::Dega => grover::search_bucket(&membership, offset)?,
    };
    if !hit {
        return Ok(None);
    }
    let params = table.params();
    let space = params.dictionary.space_size();
    for row in table.rows_with_endpoint(endpoint_hash) {
        if let Some(p) = candidate_endpoint {
            if row.end_plaintext != p {
                continue;
            }
        }
        counters.chains_examined += 1;
        // rebuild from the stored start; the predecessor of the target hash
        // is the recovered plaintext
        let mut index = row.start_index;
        for step in 1..=params.chain_length {
            let plaintext = params.dictionary.index_to_plain(index)?;
            let digest = full_hash(params.hash_algorithm, &plaintext);
            counters.rebuild_hash_evals += 1;
            if digest == *target {
                return Ok(Some(plaintext));
            }
            index = hash_to_index(&digest, space, step);
        }
        // chain merge or truncation collision: a false alarm, keep going
    }
    Ok(None)
}

/// Look up a target hash. Probes the endpoint column directly, then assumes
/// each chain position in turn, replaying the salted reductions to a
/// candidate endpoint and handing the bucket to the engine.
pub fn search(
    target: &HashValue,
    table: &RainbowTable,
    buckets: &BucketMap,
    engine: EngineKind,
) -> Result<SearchOutcome> {
    let params = table.params();
    if buckets.k() != params.bucket_modulus || buckets.kappa() != params.endpoint_bits {
        return Err(Error::Mismatch(format!(
            "bucket index (k={}, kappa={}) does not match table (k={}, kappa={})",
            buckets.k(),
            buckets.kappa(),
            params.bucket_modulus,
            params.endpoint_bits
        )));
    }
    let t = params.chain_length;
    let space = params.dictionary.space_size();
    let alg = params.hash_algorithm;
    let mut counters = SearchCounters::default();

    // endpoint column: the target may hash a stored end plaintext, in which
    // case its truncation is the endpoint value itself. No hashing needed.
    let direct = target.truncate_bits(params.endpoint_bits);
    if let Some(found) =
        probe_and_verify(target, None, direct, table, buckets, engine, &mut counters)?
    {
        return Ok(SearchOutcome {
            result: Some(found),
            counters,
        });
    }

    for i in 1..=t {
        // replay i reductions with salts (t-i)..(t-1)
        let mut digest = target.clone();
        let mut plaintext = String::new();
        for j in 0..i {
            let index = hash_to_index(&digest, space, t - i + j);
            plaintext = params.dictionary.index_to_plain(index)?;
            if j + 1 < i {
                digest = full_hash(alg, &plaintext);
                counters.replay_hash_evals += 1;
            }
        }
        let endpoint_hash = k_bit_hash(alg, params.endpoint_bits, &plaintext);
        counters.final_column_hash_evals += 1;
        if let Some(found) = probe_and_verify(
            target,
            Some(&plaintext),
            endpoint_hash,
            table,
            buckets,
            engine,
            &mut counters,
        )? {
            return Ok(SearchOutcome {
                result: Some(found),
                counters,
            });
        }
    }
    Ok(SearchOutcome {
        result: None,
        counters,
    })
}

/// Baseline ordinary chains (no smart dictionary): plaintexts are reduced
/// into a raw space of fixed-width base-36 strings.
pub const RAW_CHARSET: &[u8; 36] = b"abcdefghijklmnopqrstuvwxyz0123456789";
pub const RAW_WIDTH: usize = 8;

/// Reduce a hash into the raw plaintext space.
pub fn reduce_raw(h: &HashValue, step: u64) -> String {
    let space = (RAW_CHARSET.len() as u64).pow(RAW_WIDTH as u32);
    let mut v = (h.int128() % space as u128 + step as u128 % space as u128) as u64 % space;
    let mut chars = [0u8; RAW_WIDTH];
    for c in chars.iter_mut().rev() {
        *c = RAW_CHARSET[(v % 36) as usize];
        v /= 36;
    }
    String::from_utf8(chars.to_vec()).expect("charset is ASCII")
}

/// Ordinary rainbow generation: for each start, t rounds of hash-then-reduce.
/// Returns the (start, end) pairs and the total hash evaluations.
pub fn generate_ordinary_table(
    starts: &[String],
    t: u64,
    alg: HashAlgorithm,
) -> (Vec<(String, String)>, u64) {
    let mut pairs = Vec::with_capacity(starts.len());
    let mut hash_evals = 0u64;
    for start in starts {
        let mut current = start.clone();
        for step in 1..=t {
            let digest = full_hash(alg, &current);
            hash_evals += 1;
            current = reduce_raw(&digest, step);
        }
        pairs.push((start.clone(), current));
    }
    (pairs, hash_evals)
}
