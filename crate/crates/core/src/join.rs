//! The partition hash join.
//!
//! Strings are sorted by length, then bytes. Each string is partitioned,
//! and every partition probes the bucket of its fingerprint before being
//! inserted itself. A probe hit becomes a candidate pair when it passes
//! the length filter and the position filter. Because lengths only grow
//! along the stream, an entry that fails the length filter can never pair
//! again and is dropped from its bucket on the spot. Deduplicated
//! candidates are verified with the banded threshold DP.

use std::collections::{HashMap, HashSet};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gramhash::{Fingerprint, GramHasher};
use crate::partition::{partition_for_join, PartitionParams, PartitionSpan};
use crate::record::StringRecord;
use crate::verify::edit_distance_at_most_k;

/// `||len_a| - |len_b|| <= k`.
pub fn length_filter(len_a: usize, len_b: usize, k: usize) -> bool {
    len_a.abs_diff(len_b) <= k
}

/// Keeps a matched partition pair only if the prefix-length difference plus
/// the suffix-length difference around the match is at most `k`.
pub fn position_filter(
    pos_a: usize,
    len_str_a: usize,
    pos_b: usize,
    len_str_b: usize,
    k: usize,
) -> bool {
    let suffix_a = len_str_a as i64 - pos_a as i64;
    let suffix_b = len_str_b as i64 - pos_b as i64;
    pos_a.abs_diff(pos_b) + suffix_a.abs_diff(suffix_b) as usize <= k
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IndexEntry {
    /// Slot of the string in the dataset slice handed to the join.
    pub string_id: usize,
    pub pos: usize,
    pub len: usize,
    pub string_len: usize,
}

/// Fingerprint-keyed buckets of partition entries.
#[derive(Debug, Default)]
pub struct PartitionIndex {
    buckets: HashMap<Fingerprint, Vec<IndexEntry>>,
    live: usize,
}

impl PartitionIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: Fingerprint, entry: IndexEntry) {
        self.buckets.entry(key).or_default().push(entry);
        self.live += 1;
    }

    pub fn bucket(&self, key: Fingerprint) -> &[IndexEntry] {
        self.buckets.get(&key).map_or(&[], Vec::as_slice)
    }

    /// Number of live entries.
    pub fn len(&self) -> usize {
        self.live
    }

    pub fn is_empty(&self) -> bool {
        self.live == 0
    }

    /// Drops every entry whose string is more than `k` shorter than
    /// `current_len`.
    pub fn evict_stale(&mut self, current_len: usize, k: usize) -> usize {
        let mut removed = 0;
        for bucket in self.buckets.values_mut() {
            let before = bucket.len();
            bucket.retain(|e| !is_stale(e.string_len, current_len, k));
            removed += before - bucket.len();
        }
        self.buckets.retain(|_, b| !b.is_empty());
        self.live -= removed;
        removed
    }

    /// Visits one bucket. Entries for which `keep` returns false are removed.
    fn visit(&mut self, key: Fingerprint, mut keep: impl FnMut(&IndexEntry) -> bool) -> usize {
        let Some(bucket) = self.buckets.get_mut(&key) else {
            return 0;
        };
        let before = bucket.len();
        bucket.retain(|e| keep(e));
        let removed = before - bucket.len();
        self.live -= removed;
        removed
    }
}

fn is_stale(entry_len: usize, current_len: usize, k: usize) -> bool {
    current_len.saturating_sub(entry_len) > k
}

/// Free-function form of [`PartitionIndex::evict_stale`].
pub fn evict_stale(index: &mut PartitionIndex, current_len: usize, k: usize) -> usize {
    index.evict_stale(current_len, k)
}

/// Unordered pair of dataset ids, stored with `id_a < id_b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CandidatePair {
    pub id_a: usize,
    pub id_b: usize,
}

impl CandidatePair {
    /// `None` for a self pair.
    pub fn new(a: usize, b: usize) -> Option<Self> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Some(CandidatePair { id_a: a, id_b: b }),
            std::cmp::Ordering::Greater => Some(CandidatePair { id_a: b, id_b: a }),
            std::cmp::Ordering::Equal => None,
        }
    }
}

/// A verified output pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JoinedPair {
    pub id_a: usize,
    pub id_b: usize,
    pub distance: usize,
}

impl JoinedPair {
    pub fn ids(&self) -> (usize, usize) {
        (self.id_a, self.id_b)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StageTimings {
    pub partition: Duration,
    pub join: Duration,
    pub verify: Duration,
}

impl StageTimings {
    pub fn total(&self) -> Duration {
        self.partition + self.join + self.verify
    }

    /// `(stage, duration)` rows including the total.
    pub fn rows(&self) -> Vec<(&'static str, Duration)> {
        vec![
            ("partition", self.partition),
            ("join", self.join),
            ("verify", self.verify),
            ("total", self.total()),
        ]
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct JoinStats {
    pub strings: usize,
    /// Partitions (or signatures) generated over all strings.
    pub partitions: usize,
    /// Index entries visited during probing.
    pub bucket_probes: usize,
    pub evicted: usize,
    pub candidates_before_dedup: usize,
    pub candidates_after_dedup: usize,
    pub verifications: usize,
    pub timings: StageTimings,
}

#[derive(Clone, Debug, Default)]
pub struct JoinResult {
    /// Verified pairs sorted by `(id_a, id_b)`.
    pub pairs: Vec<JoinedPair>,
    /// Deduplicated candidates sorted by `(id_a, id_b)`.
    pub candidates: Vec<CandidatePair>,
    pub stats: JoinStats,
}

impl JoinResult {
    pub fn pair_ids(&self) -> HashSet<(usize, usize)> {
        self.pairs.iter().map(JoinedPair::ids).collect()
    }
}

/// Which pruning rules the stream applies. All on by default; turning them
/// off only changes how many candidates reach verification.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FilterConfig {
    pub length: bool,
    pub position: bool,
    /// Remove entries that fail the length filter. Ignored when the length
    /// filter is off.
    pub evict: bool,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            length: true,
            position: true,
            evict: true,
        }
    }
}

impl FilterConfig {
    pub fn none() -> Self {
        FilterConfig {
            length: false,
            position: false,
            evict: false,
        }
    }
}

pub(crate) fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot build thread pool: {e}")))
}

/// Slots of `dataset` sorted by length, then bytes, then id.
pub(crate) fn sorted_order(dataset: &[StringRecord]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (&dataset[a], &dataset[b]);
        ra.len()
            .cmp(&rb.len())
            .then_with(|| ra.bytes.cmp(&rb.bytes))
            .then_with(|| ra.id.cmp(&rb.id))
    });
    order
}

/// Verifies slot pairs in parallel and maps them to dataset ids.
pub(crate) fn verify_candidates(
    dataset: &[StringRecord],
    slots: HashSet<(usize, usize)>,
    k: usize,
    pool: &rayon::ThreadPool,
) -> (Vec<CandidatePair>, Vec<JoinedPair>) {
    let mut candidates: Vec<(CandidatePair, usize, usize)> = slots
        .into_iter()
        .filter_map(|(a, b)| CandidatePair::new(dataset[a].id, dataset[b].id).map(|c| (c, a, b)))
        .collect();
    candidates.sort_unstable();
    let pairs = pool.install(|| {
        candidates
            .par_iter()
            .filter_map(|&(c, a, b)| {
                edit_distance_at_most_k(&dataset[a].bytes, &dataset[b].bytes, k)
                    .distance
                    .map(|distance| JoinedPair {
                        id_a: c.id_a,
                        id_b: c.id_b,
                        distance,
                    })
            })
            .collect()
    });
    (candidates.into_iter().map(|(c, _, _)| c).collect(), pairs)
}

pub(crate) fn validate_dataset(dataset: &[StringRecord]) -> Result<()> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if let Some(r) = dataset.iter().find(|r| r.is_empty()) {
        return Err(Error::InvalidParameter(format!("string {} is empty", r.id)));
    }
    Ok(())
}

/// Configured partition join.
#[derive(Clone, Debug)]
pub struct MinJoin {
    pub k: usize,
    pub params: PartitionParams,
    /// Overrides the seeded rolling hasher, e.g. with a fixture table.
    pub hasher: Option<GramHasher>,
    pub filters: FilterConfig,
    /// Worker threads for partitioning and verification; 0 picks a default.
    pub threads: usize,
}

impl MinJoin {
    pub fn new(k: usize, params: PartitionParams) -> Self {
        MinJoin {
            k,
            params,
            hasher: None,
            filters: FilterConfig::default(),
            threads: 1,
        }
    }

    pub fn with_hasher(mut self, hasher: GramHasher) -> Self {
        self.hasher = Some(hasher);
        self
    }

    pub fn with_filters(mut self, filters: FilterConfig) -> Self {
        self.filters = filters;
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
        let keyed: Vec<Vec<(Fingerprint, PartitionSpan)>> = pool.install(|| {
            order
                .par_iter()
                .map(|&slot| {
                    let s = &dataset[slot].bytes;
                    let parts = partition_for_join(s, &self.params, &hasher)?;
                    Ok(parts
                        .spans
                        .into_iter()
                        .map(|span| (Fingerprint::of(span.slice(s)), span))
                        .collect())
                })
                .collect::<Result<_>>()
        })?;
        stats.partitions = keyed.iter().map(Vec::len).sum();
        stats.timings.partition = started.elapsed();

        let started = Instant::now();
        let k = self.k;
        let filters = self.filters;
        let mut index = PartitionIndex::new();
        let mut slots: HashSet<(usize, usize)> = HashSet::new();
        for (&slot, parts) in order.iter().zip(&keyed) {
            let cur_len = dataset[slot].len();
            for &(fp, span) in parts {
                let mut probes = 0;
                let mut passed = 0;
                let evicted = index.visit(fp, |e| {
                    probes += 1;
                    if filters.length && !length_filter(cur_len, e.string_len, k) {
                        return !filters.evict;
                    }
                    if filters.position
                        && !position_filter(span.pos, cur_len, e.pos, e.string_len, k)
                    {
                        return true;
                    }
                    if e.string_id != slot {
                        passed += 1;
                        slots.insert(ordered(slot, e.string_id));
                    }
                    true
                });
                stats.bucket_probes += probes;
                stats.candidates_before_dedup += passed;
                stats.evicted += evicted;
            }
            for &(fp, span) in parts {
                index.insert(
                    fp,
                    IndexEntry {
                        string_id: slot,
                        pos: span.pos,
                        len: span.len,
                        string_len: cur_len,
                    },
                );
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

fn ordered(a: usize, b: usize) -> (usize, usize) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Runs the join with the seeded rolling hasher and default filters.
pub fn min_join(dataset: &[StringRecord], k: usize, params: PartitionParams) -> Result<JoinResult> {
    MinJoin::new(k, params).run(dataset)
}
