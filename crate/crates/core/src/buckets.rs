//! Bucket index over the k-bit chain endpoint hashes.
//!
//! An endpoint value h in [0, 2^kappa) lands in bucket floor(h / k) at offset
//! h mod k, so every bucket is a search space of exactly k slots — the size
//! the quantum engine is built for. Offsets are stored once per bucket;
//! provenance keeps every contributing table row so endpoint collisions stay
//! resolvable.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::rainbow::RainbowTable;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct BucketMap {
    k: u64,
    kappa: u32,
    buckets: BTreeMap<u64, Vec<u64>>,
    provenance: BTreeMap<(u64, u64), Vec<usize>>,
}

impl BucketMap {
    pub fn new(k: u64, kappa: u32) -> Result<Self> {
        if k < 4 || !k.is_power_of_two() {
            return Err(Error::Config(format!(
                "bucket modulus k={k} must be a power of two >= 4"
            )));
        }
        if kappa == 0 || kappa > 64 {
            return Err(Error::Config(format!("kappa={kappa} outside 1..=64")));
        }
        if (kappa as u64) < k.trailing_zeros() as u64 {
            return Err(Error::Config(format!(
                "endpoint space 2^{kappa} is narrower than one bucket of {k}"
            )));
        }
        Ok(BucketMap {
            k,
            kappa,
            buckets: BTreeMap::new(),
            provenance: BTreeMap::new(),
        })
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn kappa(&self) -> u32 {
        self.kappa
    }

    fn endpoint_space(&self) -> u128 {
        1u128 << self.kappa
    }

    /// Record one table row's endpoint. Duplicate offsets within a bucket are
    /// stored once; provenance accumulates every row.
    pub fn insert_end(&mut self, end_hashed: u64, row: usize) -> Result<()> {
        if (end_hashed as u128) >= self.endpoint_space() {
            return Err(Error::Range {
                what: "end_hashed",
                value: end_hashed,
                limit: if self.kappa == 64 { u64::MAX } else { 1u64 << self.kappa },
            });
        }
        let bucket_key = end_hashed / self.k;
        let offset = end_hashed % self.k;
        let offsets = self.buckets.entry(bucket_key).or_default();
        if !offsets.contains(&offset) {
            offsets.push(offset);
        }
        self.provenance.entry((bucket_key, offset)).or_default().push(row);
        Ok(())
    }

    /// Index every row of a table.
    pub fn build(table: &RainbowTable) -> Result<Self> {
        let params = table.params();
        Self::build_from_endpoints(
            params.bucket_modulus,
            params.endpoint_bits,
            table.rows().iter().map(|r| r.end_hashed),
        )
    }

    /// Index raw endpoint values (row index = iteration order). Lets bucket
    /// files be produced straight from a table file, no dictionary needed.
    pub fn build_from_endpoints(
        k: u64,
        kappa: u32,
        endpoints: impl IntoIterator<Item = u64>,
    ) -> Result<Self> {
        let mut map = BucketMap::new(k, kappa)?;
        for (i, eh) in endpoints.into_iter().enumerate() {
            map.insert_end(eh, i)?;
        }
        Ok(map)
    }

    /// Membership vector of the k slots of one bucket, or None when the key
    /// was never populated.
    pub fn query_bucket(&self, bucket_key: u64) -> Option<Vec<bool>> {
        self.buckets.get(&bucket_key).map(|offsets| {
            let mut slots = vec![false; self.k as usize];
            for &o in offsets {
                slots[o as usize] = true;
            }
            slots
        })
    }

    /// Table rows that produced (bucket_key, offset).
    pub fn rows_for(&self, bucket_key: u64, offset: u64) -> &[usize] {
        self.provenance
            .get(&(bucket_key, offset))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn bucket_count(&self) -> usize {
        self.buckets.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&u64, &Vec<u64>)> {
        self.buckets.iter()
    }

    /// Total provenance entries: one per indexed row.
    pub fn provenance_total(&self) -> usize {
        self.provenance.values().map(Vec::len).sum()
    }

    pub fn to_sidecar_string(&self) -> String {
        let mut out = format!("BKT1 {} {}\n", self.k, self.kappa);
        for (key, offsets) in &self.buckets {
            let mut sorted = offsets.clone();
            sorted.sort_unstable();
            let list: Vec<String> = sorted.iter().map(|o| o.to_string()).collect();
            let _ = writeln!(out, "{key}:{}", list.join(","));
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_sidecar_string())?;
        Ok(())
    }

    /// Parse a sidecar file. Provenance is not stored in the sidecar; callers
    /// that need row-level verification rebuild from the table instead.
    pub fn load_sidecar(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_sidecar(&text)
    }

    pub fn parse_sidecar(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Table("empty bucket file".into()))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 3 || parts[0] != "BKT1" {
            return Err(Error::Table(format!("bad bucket header {header:?}")));
        }
        let k: u64 = parts[1]
            .parse()
            .map_err(|_| Error::Table(format!("bad k {:?}", parts[1])))?;
        let kappa: u32 = parts[2]
            .parse()
            .map_err(|_| Error::Table(format!("bad kappa {:?}", parts[2])))?;
        let mut map = BucketMap::new(k, kappa)?;
        for (no, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let (key, offs) = line
                .split_once(':')
                .ok_or_else(|| Error::Table(format!("line {}: missing ':'", no + 2)))?;
            let key: u64 = key
                .parse()
                .map_err(|_| Error::Table(format!("line {}: bad bucket key", no + 2)))?;
            for o in offs.split(',').filter(|s| !s.is_empty()) {
                let o: u64 = o
                    .parse()
                    .map_err(|_| Error::Table(format!("line {}: bad offset", no + 2)))?;
                if o >= k {
                    return Err(Error::Table(format!("line {}: offset {o} >= k", no + 2)));
                }
                let offsets = map.buckets.entry(key).or_default();
                if !offsets.contains(&o) {
                    offsets.push(o);
                }
            }
        }
        Ok(map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insert_end_key_offset_arithmetic() {
        let mut map = BucketMap::new(16, 8).unwrap();
        map.insert_end(0, 0).unwrap();
        assert!(map.query_bucket(0).unwrap()[0]);

        map.insert_end(171, 1).unwrap();
        // 171 = 10*16 + 11
        let slots = map.query_bucket(10).unwrap();
        assert!(slots[11]);
        assert_eq!(slots.iter().filter(|&&s| s).count(), 1);
    }

    #[test]
    fn duplicate_offsets_dedup_with_full_provenance() {
        let mut map = BucketMap::new(16, 8).unwrap();
        map.insert_end(171, 4).unwrap();
        map.insert_end(171, 9).unwrap();
        let slots = map.query_bucket(10).unwrap();
        assert_eq!(slots.iter().filter(|&&s| s).count(), 1);
        assert_eq!(map.rows_for(10, 11), &[4, 9]);
        assert_eq!(map.provenance_total(), 2);
    }

    #[test]
    fn out_of_range_endpoint_rejected() {
        let mut map = BucketMap::new(16, 8).unwrap();
        assert!(map.insert_end(256, 0).is_err());
        assert!(map.insert_end(255, 0).is_ok());
    }

    #[test]
    fn query_missing_key_absent() {
        let map = BucketMap::new(16, 8).unwrap();
        assert!(map.query_bucket(3).is_none());
    }

    #[test]
    fn empty_input_builds_empty_map() {
        let map = BucketMap::build_from_endpoints(16, 8, std::iter::empty()).unwrap();
        assert_eq!(map.bucket_count(), 0);
        assert_eq!(map.provenance_total(), 0);
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(BucketMap::new(12, 8).is_err());
        assert!(BucketMap::new(2, 8).is_err());
        assert!(BucketMap::new(16, 0).is_err());
        assert!(BucketMap::new(16, 3).is_err());
    }

    #[test]
    fn sidecar_round_trip() {
        let mut map = BucketMap::new(16, 8).unwrap();
        for (i, eh) in [0u64, 171, 171, 255, 16].iter().enumerate() {
            map.insert_end(*eh, i).unwrap();
        }
        let text = map.to_sidecar_string();
        let loaded = BucketMap::parse_sidecar(&text).unwrap();
        assert_eq!(loaded.k(), 16);
        assert_eq!(loaded.kappa(), 8);
        assert_eq!(loaded.bucket_count(), map.bucket_count());
        for (key, offsets) in map.iter() {
            let a = loaded.query_bucket(*key).unwrap();
            let b = map.query_bucket(*key).unwrap();
            assert_eq!(a, b, "bucket {key} offsets {offsets:?}");
        }
    }

    #[test]
    fn sidecar_rejects_garbage() {
        assert!(BucketMap::parse_sidecar("").is_err());
        assert!(BucketMap::parse_sidecar("NOPE 16 8\n").is_err());
        assert!(BucketMap::parse_sidecar("BKT1 16 8\n5\n").is_err());
        assert!(BucketMap::parse_sidecar("BKT1 16 8\n5:99\n").is_err());
    }
}
