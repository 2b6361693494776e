//! Ground truth, synthetic data, and evaluation reports.

use std::collections::{BTreeMap, HashSet};
use std::io::{self, Write};
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gramhash::GramHasher;
use crate::join::JoinedPair;
use crate::partition::find_anchors;
use crate::record::StringRecord;
use crate::verify::{edit_distance_at_most_k, edit_distance_full};

/// Datasets above this size still run, with a warning.
pub const BRUTE_FORCE_WARN_SIZE: usize = 5_000;

/// Letters used by generated strings, in order.
pub const GENERATOR_ALPHABET: &[u8] =
    b"ACGTBDEFHIJKLMNOPQRSUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";

/// Every pair with `ED <= k`, checked one by one with the threshold DP.
///
/// A q-gram count bound skips the DP for pairs that cannot be within `k`;
/// it never rejects a qualifying pair, so the output stays exact.
pub fn brute_force_join(dataset: &[StringRecord], k: usize) -> Vec<JoinedPair> {
    let profiles: Vec<GramProfile> = dataset.iter().map(|r| GramProfile::of(&r.bytes)).collect();
    brute_force_join_with(dataset, |i, j| {
        let (x, y) = (&dataset[i].bytes, &dataset[j].bytes);
        if !GramProfile::may_be_within(&profiles[i], &profiles[j], x.len(), y.len(), k) {
            return None;
        }
        edit_distance_at_most_k(x, y, k).distance
    })
}

const PROFILE_GRAM: usize = 5;
const PROFILE_BINS: usize = 1024;

/// Hashed q-gram counts. Merging grams into bins can only raise the shared
/// count, so the lower bound in `may_be_within` stays valid.
struct GramProfile {
    counts: Vec<u32>,
}

impl GramProfile {
    fn of(s: &[u8]) -> Self {
        let mut counts = vec![
            0u32;
            if s.len() >= PROFILE_GRAM {
                PROFILE_BINS
            } else {
                0
            }
        ];
        for w in s.windows(PROFILE_GRAM) {
            let h = w.iter().fold(0u64, |acc, &b| {
                acc.wrapping_mul(0x100_0000_01b3).wrapping_add(b as u64 + 1)
            });
            let bin = (crate::gramhash::splitmix64(h) % PROFILE_BINS as u64) as usize;
            counts[bin] += 1;
        }
        GramProfile { counts }
    }

    /// Each edit touches at most q grams of either string, so a pair within
    /// `k` shares at least `max_len - q + 1 - k*q` grams.
    fn may_be_within(a: &Self, b: &Self, len_a: usize, len_b: usize, k: usize) -> bool {
        let longer = len_a.max(len_b);
        let needed = (longer + 1).saturating_sub(PROFILE_GRAM + k * PROFILE_GRAM);
        if needed == 0 || a.counts.is_empty() || b.counts.is_empty() {
            return true;
        }
        let shared: usize = a
            .counts
            .iter()
            .zip(&b.counts)
            .map(|(&x, &y)| x.min(y) as usize)
            .sum();
        shared >= needed
    }
}

/// Same as [`brute_force_join`] using the full quadratic DP.
pub fn brute_force_join_full(dataset: &[StringRecord], k: usize) -> Vec<JoinedPair> {
    brute_force_join_with(dataset, |i, j| {
        Some(edit_distance_full(&dataset[i].bytes, &dataset[j].bytes)).filter(|&d| d <= k)
    })
}

fn brute_force_join_with<F>(dataset: &[StringRecord], distance: F) -> Vec<JoinedPair>
where
    F: Fn(usize, usize) -> Option<usize> + Sync,
{
    if dataset.len() > BRUTE_FORCE_WARN_SIZE {
        log::warn!(
            "brute-force join over {} strings compares {} pairs",
            dataset.len(),
            dataset.len() * (dataset.len() - 1) / 2
        );
    }
    let mut pairs: Vec<JoinedPair> = (0..dataset.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let distance = &distance;
            (i + 1..dataset.len()).filter_map(move |j| {
                let (a, b) = (&dataset[i], &dataset[j]);
                if a.id == b.id {
                    return None;
                }
                distance(i, j).map(|d| JoinedPair {
                    id_a: a.id.min(b.id),
                    id_b: a.id.max(b.id),
                    distance: d,
                })
            })
        })
        .collect();
    pairs.sort_unstable();
    pairs
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SyntheticSpec {
    /// Total number of strings.
    pub n: usize,
    /// Length of every cluster seed and background string.
    pub len: usize,
    pub alphabet_size: usize,
    pub clusters: usize,
    /// Strings per cluster: the seed plus `cluster_size - 1` edited copies.
    pub cluster_size: usize,
    /// Edit operations applied to each copy.
    pub k_plant: usize,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct SyntheticDataset {
    pub records: Vec<StringRecord>,
    /// `(seed id, copy id)` pairs, each within `k_plant` edits.
    pub planted: Vec<(usize, usize)>,
}

#[derive(Clone, Copy, Debug)]
enum EditOp {
    Insert,
    Delete,
    Substitute,
}

pub fn random_string<R: Rng>(rng: &mut R, len: usize, alphabet: &[u8]) -> Vec<u8> {
    (0..len)
        .map(|_| alphabet[rng.gen_range(0..alphabet.len())])
        .collect()
}

/// Applies `edits` uniformly placed edit operations, each an insertion,
/// deletion or substitution with equal probability. Substitutions always
/// change the letter.
pub fn apply_random_edits<R: Rng>(rng: &mut R, s: &[u8], edits: usize, alphabet: &[u8]) -> Vec<u8> {
    let mut out = s.to_vec();
    for _ in 0..edits {
        let op = match rng.gen_range(0..3) {
            0 => EditOp::Insert,
            1 => EditOp::Delete,
            _ => EditOp::Substitute,
        };
        match op {
            EditOp::Insert => {
                let at = rng.gen_range(0..=out.len());
                out.insert(at, alphabet[rng.gen_range(0..alphabet.len())]);
            }
            EditOp::Delete if !out.is_empty() => {
                let at = rng.gen_range(0..out.len());
                out.remove(at);
            }
            EditOp::Substitute if !out.is_empty() => {
                let at = rng.gen_range(0..out.len());
                let old = out[at];
                let mut b = old;
                while b == old {
                    b = alphabet[rng.gen_range(0..alphabet.len())];
                }
                out[at] = b;
            }
            // nothing to delete or substitute
            _ => out.push(alphabet[rng.gen_range(0..alphabet.len())]),
        }
    }
    out
}

/// Clusters first (seed, then its copies), then independent background
/// strings up to `n`.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SyntheticDataset> {
    if spec.alphabet_size < 2 || spec.alphabet_size > GENERATOR_ALPHABET.len() {
        return Err(Error::InvalidParameter(format!(
            "alphabet size must be in [2, {}], got {}",
            GENERATOR_ALPHABET.len(),
            spec.alphabet_size
        )));
    }
    if spec.len == 0 {
        return Err(Error::InvalidParameter(
            "string length must be at least 1".into(),
        ));
    }
    if spec.cluster_size == 0 && spec.clusters > 0 {
        return Err(Error::InvalidParameter(
            "cluster size must be at least 1".into(),
        ));
    }
    let clustered = spec.clusters * spec.cluster_size;
    if clustered > spec.n {
        return Err(Error::InvalidParameter(format!(
            "{} clusters of {} exceed n = {}",
            spec.clusters, spec.cluster_size, spec.n
        )));
    }
    let alphabet = &GENERATOR_ALPHABET[..spec.alphabet_size];
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut strings = Vec::with_capacity(spec.n);
    let mut planted = Vec::new();
    for _ in 0..spec.clusters {
        let seed_id = strings.len();
        strings.push(random_string(&mut rng, spec.len, alphabet));
        for _ in 1..spec.cluster_size {
            let copy = apply_random_edits(&mut rng, &strings[seed_id], spec.k_plant, alphabet);
            planted.push((seed_id, strings.len()));
            strings.push(copy);
        }
    }
    while strings.len() < spec.n {
        strings.push(random_string(&mut rng, spec.len, alphabet));
    }
    let records = strings
        .into_iter()
        .enumerate()
        .map(|(id, s)| StringRecord::new(id, s))
        .collect();
    Ok(SyntheticDataset { records, planted })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RecallReport {
    pub recall: f64,
    pub precision: f64,
    pub truth_size: usize,
    pub found_size: usize,
}

/// Recall and precision of `found` against `truth`, both as id pairs.
pub fn measure_recall(
    found: &HashSet<(usize, usize)>,
    truth: &HashSet<(usize, usize)>,
) -> RecallReport {
    let hits = found.intersection(truth).count();
    RecallReport {
        recall: if truth.is_empty() {
            1.0
        } else {
            hits as f64 / truth.len() as f64
        },
        precision: if found.is_empty() {
            1.0
        } else {
            hits as f64 / found.len() as f64
        },
        truth_size: truth.len(),
        found_size: found.len(),
    }
}

pub fn pair_set(pairs: &[JoinedPair]) -> HashSet<(usize, usize)> {
    pairs.iter().map(JoinedPair::ids).collect()
}

/// Distribution of interior-anchor counts over many runs.
#[derive(Clone, Debug, PartialEq)]
pub struct AnchorStats {
    pub counts: Vec<usize>,
    pub mean: f64,
    /// Sample variance (n - 1 denominator).
    pub variance: f64,
    pub histogram: BTreeMap<usize, usize>,
}

impl AnchorStats {
    pub fn from_counts(counts: Vec<usize>) -> Self {
        let n = counts.len() as f64;
        let mean = if counts.is_empty() {
            0.0
        } else {
            counts.iter().sum::<usize>() as f64 / n
        };
        let variance = if counts.len() < 2 {
            0.0
        } else {
            counts
                .iter()
                .map(|&c| (c as f64 - mean).powi(2))
                .sum::<f64>()
                / (n - 1.0)
        };
        let mut histogram = BTreeMap::new();
        for &c in &counts {
            *histogram.entry(c).or_insert(0) += 1;
        }
        AnchorStats {
            counts,
            mean,
            variance,
            histogram,
        }
    }

    /// `(anchors, runs, cumulative fraction)` per observed count.
    pub fn cdf(&self) -> Vec<(usize, usize, f64)> {
        let total = self.counts.len() as f64;
        let mut acc = 0;
        self.histogram
            .iter()
            .map(|(&anchors, &runs)| {
                acc += runs;
                (anchors, runs, acc as f64 / total)
            })
            .collect()
    }

    /// Fraction of runs with `|count - center| >= radius`.
    pub fn tail_fraction(&self, center: f64, radius: f64) -> f64 {
        if self.counts.is_empty() {
            return 0.0;
        }
        let far = self
            .counts
            .iter()
            .filter(|&&c| (c as f64 - center).abs() >= radius)
            .count();
        far as f64 / self.counts.len() as f64
    }

    /// Fraction of runs with `|count - center| <= radius`.
    pub fn mass_within(&self, center: f64, radius: f64) -> f64 {
        if self.counts.is_empty() {
            return 0.0;
        }
        let near = self
            .counts
            .iter()
            .filter(|&&c| (c as f64 - center).abs() <= radius)
            .count();
        near as f64 / self.counts.len() as f64
    }
}

/// Interior-anchor counts of every string under every seed.
pub fn anchor_statistics<S: AsRef<[u8]>>(
    strings: &[S],
    targets: usize,
    gram_len: usize,
    seeds: &[u64],
) -> Result<AnchorStats> {
    let mut counts = Vec::with_capacity(strings.len() * seeds.len());
    for &seed in seeds {
        let hasher = GramHasher::rolling(seed);
        for s in strings {
            counts.push(find_anchors(s.as_ref(), targets, &hasher, gram_len)?.interior_count());
        }
    }
    Ok(AnchorStats::from_counts(counts))
}

/// Everything an `eval` run reports.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub recall: f64,
    pub precision: f64,
    pub truth_size: usize,
    pub found_size: usize,
    pub stage_timings: Vec<(String, Duration)>,
    pub anchor_stats: Option<AnchorStats>,
}

impl EvalReport {
    pub fn new(recall: RecallReport, stage_timings: Vec<(String, Duration)>) -> Self {
        EvalReport {
            recall: recall.recall,
            precision: recall.precision,
            truth_size: recall.truth_size,
            found_size: recall.found_size,
            stage_timings,
            anchor_stats: None,
        }
    }
}

/// `stage,millis`
pub fn write_timings_csv<W: Write>(mut w: W, rows: &[(String, Duration)]) -> io::Result<()> {
    writeln!(w, "stage,millis")?;
    for (stage, d) in rows {
        writeln!(w, "{stage},{:.3}", d.as_secs_f64() * 1e3)?;
    }
    Ok(())
}

/// `anchors,count,frequency` where frequency is the cumulative fraction.
pub fn write_anchor_cdf_csv<W: Write>(mut w: W, stats: &AnchorStats) -> io::Result<()> {
    writeln!(w, "anchors,count,frequency")?;
    for (anchors, runs, freq) in stats.cdf() {
        writeln!(w, "{anchors},{runs},{freq:.6}")?;
    }
    Ok(())
}

/// `metric,value`
pub fn write_metrics_csv<W: Write>(mut w: W, rows: &[(String, String)]) -> io::Result<()> {
    writeln!(w, "metric,value")?;
    for (metric, value) in rows {
        writeln!(w, "{metric},{value}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::records_from;

    const STRINGS: &str = include_str!("../fixtures/example_strings.txt");

    #[test]
    fn brute_force_on_running_example() {
        let data = records_from(STRINGS.lines().map(str::as_bytes));
        let ids: Vec<_> = brute_force_join(&data, 4)
            .iter()
            .map(JoinedPair::ids)
            .collect();
        assert_eq!(ids, vec![(0, 1), (2, 3), (2, 4)]);
        assert_eq!(brute_force_join_full(&data, 4), brute_force_join(&data, 4));
    }

    #[test]
    fn gram_count_bound_is_lossless() {
        // clusters at exactly k edits sit on the boundary of the bound
        for (seed, k) in [(3u64, 2usize), (4, 6), (5, 12)] {
            let spec = SyntheticSpec {
                n: 40,
                len: 120,
                alphabet_size: 4,
                clusters: 8,
                cluster_size: 3,
                k_plant: k,
                seed,
            };
            let data = generate_synthetic(&spec).unwrap();
            for kk in [k.saturating_sub(1), k, k + 3] {
                assert_eq!(
                    brute_force_join(&data.records, kk),
                    brute_force_join_full(&data.records, kk)
                );
            }
        }
    }

    #[test]
    fn saturated_threshold_returns_all_pairs() {
        let data = records_from(["A", "CCCC", "GGGGGGG", "TTT"]);
        assert_eq!(brute_force_join(&data, 7).len(), 6);
    }

    #[test]
    fn singleton_clusters_plant_nothing() {
        let spec = SyntheticSpec {
            n: 20,
            len: 50,
            alphabet_size: 4,
            clusters: 5,
            cluster_size: 1,
            k_plant: 3,
            seed: 1,
        };
        let data = generate_synthetic(&spec).unwrap();
        assert_eq!(data.records.len(), 20);
        assert!(data.planted.is_empty());
    }

    #[test]
    fn zero_edit_clones_are_identical() {
        let spec = SyntheticSpec {
            n: 10,
            len: 40,
            alphabet_size: 4,
            clusters: 3,
            cluster_size: 2,
            k_plant: 0,
            seed: 2,
        };
        let data = generate_synthetic(&spec).unwrap();
        assert_eq!(data.planted.len(), 3);
        for &(a, b) in &data.planted {
            assert_eq!(data.records[a].bytes, data.records[b].bytes);
        }
    }

    #[test]
    fn generator_rejects_bad_specs() {
        let mut spec = SyntheticSpec {
            n: 10,
            len: 40,
            alphabet_size: 1,
            clusters: 1,
            cluster_size: 2,
            k_plant: 0,
            seed: 2,
        };
        assert!(generate_synthetic(&spec).is_err());
        spec.alphabet_size = 4;
        spec.clusters = 6;
        assert!(generate_synthetic(&spec).is_err());
    }

    #[test]
    fn planted_pairs_are_within_budget_and_in_truth() {
        let spec = SyntheticSpec {
            n: 200,
            len: 300,
            alphabet_size: 4,
            clusters: 20,
            cluster_size: 3,
            k_plant: 12,
            seed: 9,
        };
        let data = generate_synthetic(&spec).unwrap();
        assert_eq!(data.planted.len(), 40);
        let truth = pair_set(&brute_force_join(&data.records, 12));
        for &(a, b) in &data.planted {
            assert!(edit_distance_full(&data.records[a].bytes, &data.records[b].bytes) <= 12);
            assert!(truth.contains(&(a, b)));
        }
        // random background strings of length 300 are far apart
        let planted: HashSet<_> = data.planted.iter().copied().collect();
        for pair in &truth {
            let a_clustered = pair.0 < 60 && pair.1 < 60;
            assert!(planted.contains(pair) || a_clustered, "{pair:?}");
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = SyntheticSpec {
            n: 50,
            len: 100,
            alphabet_size: 20,
            clusters: 5,
            cluster_size: 4,
            k_plant: 5,
            seed: 77,
        };
        let a = generate_synthetic(&spec).unwrap();
        let b = generate_synthetic(&spec).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(a.planted, b.planted);
    }

    #[test]
    fn recall_edge_cases() {
        let truth: HashSet<_> = [(0, 1), (2, 3)].into();
        let r = measure_recall(&truth, &truth);
        assert_eq!((r.recall, r.precision), (1.0, 1.0));
        let r = measure_recall(&HashSet::new(), &truth);
        assert_eq!((r.recall, r.precision), (0.0, 1.0));
        let r = measure_recall(&[(0, 1)].into(), &truth);
        assert_eq!((r.recall, r.precision), (0.5, 1.0));
        let r = measure_recall(&HashSet::new(), &HashSet::new());
        assert_eq!(r.recall, 1.0);
    }

    #[test]
    fn anchor_counts_match_exhaustive_window_check() {
        // tiny strings: T equal to the number of grams gives radius 1
        let strings: Vec<Vec<u8>> = (0..64u32)
            .map(|bits| {
                (0..12)
                    .map(|i| b"ACGT"[((bits >> (i % 6)) & 3) as usize])
                    .collect()
            })
            .collect();
        let seeds = [1u64, 2, 3];
        let stats = anchor_statistics(&strings, 10, 3, &seeds).unwrap();
        let mut expected = Vec::new();
        for &seed in &seeds {
            let h = GramHasher::rolling(seed);
            for s in &strings {
                let v: Vec<u64> = s.windows(3).map(|g| h.hash_gram(g).unwrap()).collect();
                let count = (1..v.len() - 1)
                    .filter(|&i| v[i] < v[i - 1] && v[i] < v[i + 1])
                    .count();
                expected.push(count);
            }
        }
        assert_eq!(stats.counts, expected);
    }

    #[test]
    fn stats_and_cdf() {
        let stats = AnchorStats::from_counts(vec![1, 2, 2, 3]);
        assert_eq!(stats.mean, 2.0);
        assert!((stats.variance - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(stats.cdf(), vec![(1, 1, 0.25), (2, 2, 0.75), (3, 1, 1.0)]);
        assert_eq!(stats.tail_fraction(2.0, 1.0), 0.5);
        assert_eq!(stats.mass_within(2.0, 0.5), 0.5);

        let mut out = Vec::new();
        write_anchor_cdf_csv(&mut out, &stats).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "anchors,count,frequency\n1,1,0.250000\n2,2,0.750000\n3,1,1.000000\n"
        );
    }

    #[test]
    fn csv_writers() {
        let mut out = Vec::new();
        write_timings_csv(&mut out, &[("join".into(), Duration::from_micros(1500))]).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "stage,millis\njoin,1.500\n"
        );
        let mut out = Vec::new();
        write_metrics_csv(&mut out, &[("recall".into(), "1".into())]).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "metric,value\nrecall,1\n");
    }
}
