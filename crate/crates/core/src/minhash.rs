//! MinHash signature join used as a comparison baseline.
//!
//! Each string is reduced to the `ell` smallest distinct q-gram hash
//! values under one hash function. Strings sharing any signature value
//! become candidates (after the length filter) and are verified.

use std::collections::{HashMap, HashSet};
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gramhash::{GramHasher, HashValue};
use crate::join::{
    length_filter, sorted_order, thread_pool, validate_dataset, verify_candidates, JoinResult,
    JoinStats,
};
use crate::record::StringRecord;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MinHashParams {
    pub gram_len: usize,
    /// Signatures kept per string.
    pub ell: usize,
    pub seed: u64,
}

impl MinHashParams {
    pub fn new(gram_len: usize, ell: usize, seed: u64) -> Self {
        MinHashParams {
            gram_len,
            ell,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.gram_len == 0 {
            return Err(Error::InvalidParameter(
                "gram length must be at least 1".into(),
            ));
        }
        if self.ell == 0 {
            return Err(Error::InvalidParameter(
                "signature count must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// The `ell` smallest distinct gram hashes of `s`, ascending.
pub fn minhash_signatures(
    s: &[u8],
    params: &MinHashParams,
    hasher: &GramHasher,
) -> Result<Vec<HashValue>> {
    params.validate()?;
    let mut values = hasher.hash_sequence(s, params.gram_len)?.values().to_vec();
    values.sort_unstable();
    values.dedup();
    values.truncate(params.ell);
    Ok(values)
}

#[derive(Clone, Debug)]
pub struct MinHashJoin {
    pub k: usize,
    pub params: MinHashParams,
    pub hasher: Option<GramHasher>,
    pub length_filter: bool,
    pub threads: usize,
}

impl MinHashJoin {
    pub fn new(k: usize, params: MinHashParams) -> Self {
        MinHashJoin {
            k,
            params,
            hasher: None,
            length_filter: true,
            threads: 1,
        }
    }

    pub fn with_hasher(mut self, hasher: GramHasher) -> Self {
        self.hasher = Some(hasher);
        self
    }

    pub fn with_length_filter(mut self, enabled: bool) -> Self {
        self.length_filter = enabled;
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads;
        self
    }

    pub fn run(&self, dataset: &[StringRecord]) -> Result<JoinResult> {
        validate_dataset(dataset)?;
        self.params.validate()?;
        let hasher = self
            .hasher
            .clone()
            .unwrap_or_else(|| GramHasher::rolling(self.params.seed));
        let pool = thread_pool(self.threads)?;
        let mut stats = JoinStats {
            strings: dataset.len(),
            ..JoinStats::default()
        };

        let started = Instant::now();
        let order = sorted_order(dataset);
        let signatures: Vec<Vec<HashValue>> = pool.install(|| {
            order
                .par_iter()
                .map(|&slot| {
                    let s = &dataset[slot].bytes;
                    if s.len() < self.params.gram_len {
                        // too short to have a gram: fall back to the whole string
                        return Ok(vec![crate::gramhash::Fingerprint::of(s).0]);
                    }
                    minhash_signatures(s, &self.params, &hasher)
                })
                .collect::<Result<_>>()
        })?;
        stats.partitions = signatures.iter().map(Vec::len).sum();
        stats.timings.partition = started.elapsed();

        let started = Instant::now();
        let k = self.k;
        // signature -> (slot, string length)
        let mut index: HashMap<HashValue, Vec<(usize, usize)>> = HashMap::new();
        let mut slots: HashSet<(usize, usize)> = HashSet::new();
        for (&slot, sigs) in order.iter().zip(&signatures) {
            let cur_len = dataset[slot].len();
            for sig in sigs {
                let Some(bucket) = index.get_mut(sig) else {
                    continue;
                };
                let before = bucket.len();
                bucket.retain(|&(other, other_len)| {
                    stats.bucket_probes += 1;
                    if self.length_filter && !length_filter(cur_len, other_len, k) {
                        return false;
                    }
                    stats.candidates_before_dedup += 1;
                    slots.insert((other.min(slot), other.max(slot)));
                    true
                });
                stats.evicted += before - bucket.len();
            }
            for &sig in sigs {
                index.entry(sig).or_default().push((slot, cur_len));
            }
        }
        stats.candidates_after_dedup = slots.len();
        stats.timings.join = started.elapsed();

        let started = Instant::now();
        stats.verifications = slots.len();
        let (candidates, pairs) = verify_candidates(dataset, slots, k, &pool);
        stats.timings.verify = started.elapsed();

        Ok(JoinResult {
            pairs,
            candidates,
            stats,
        })
    }
}

pub fn minhash_join(
    dataset: &[StringRecord],
    k: usize,
    params: MinHashParams,
) -> Result<JoinResult> {
    MinHashJoin::new(k, params).run(dataset)
}
