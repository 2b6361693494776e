//! Local-hash-minimum anchors and string partitioning.
//!
//! A q-gram position is an anchor when its hash is strictly smaller than
//! every other hash within radius `r`, where `r` shrinks or grows with the
//! string length so that every string gets about `T` interior anchors.
//! Positions 1 and `|s|` are always added as sentinels. The string is then
//! cut at consecutive anchors into spans that tile it exactly.
//!
//! All positions in this module are 1-based.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::gramhash::{splitmix64, GramHasher, HashArray, HashValue};

/// Smallest gram length handed out by [`default_gram_length`].
pub const MIN_GRAM_LEN: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PartitionParams {
    /// Targeted number of partitions per string.
    pub targets: usize,
    pub gram_len: usize,
    pub repetitions: usize,
    pub seed: u64,
}

impl PartitionParams {
    pub fn new(targets: usize, gram_len: usize) -> Self {
        PartitionParams {
            targets,
            gram_len,
            repetitions: 1,
            seed: 0,
        }
    }

    pub fn with_repetitions(mut self, repetitions: usize) -> Self {
        self.repetitions = repetitions;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.targets == 0 {
            return Err(Error::InvalidParameter(
                "targeted partitions must be at least 1".into(),
            ));
        }
        if self.gram_len == 0 {
            return Err(Error::InvalidParameter(
                "gram length must be at least 1".into(),
            ));
        }
        if self.repetitions == 0 {
            return Err(Error::InvalidParameter(
                "repetitions must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// `max(1, floor((len - q + 1 - T) / (2T + 2)))`.
pub fn neighborhood_radius(string_len: usize, gram_len: usize, targets: usize) -> usize {
    let grams = string_len as i64 - gram_len as i64 + 1;
    let r = (grams - targets as i64).div_euclid(2 * targets as i64 + 2);
    r.max(1) as usize
}

/// `max(3, ceil(3 * log_alphabet(max_len / T)))`.
///
/// The caller clamps the result to the shortest string of a dataset, see
/// [`default_gram_length_for`].
pub fn default_gram_length(max_len: usize, targets: usize, alphabet_size: usize) -> Result<usize> {
    if alphabet_size < 2 {
        return Err(Error::InvalidParameter(format!(
            "alphabet size must be at least 2, got {alphabet_size}"
        )));
    }
    if targets == 0 || max_len <= targets {
        return Err(Error::InvalidParameter(format!(
            "maximum length {max_len} must exceed targeted partitions {targets}"
        )));
    }
    let ratio = max_len as f64 / targets as f64;
    let q = 3.0 * ratio.ln() / (alphabet_size as f64).ln();
    // guard against ln rounding pushing an exact integer over the edge
    let q = (q - 1e-9).ceil().max(0.0) as usize;
    Ok(q.max(MIN_GRAM_LEN))
}

/// Default gram length for a dataset: the formula above, never longer than
/// the shortest string. Falls back to [`MIN_GRAM_LEN`] when the longest
/// string is not longer than `targets`.
pub fn default_gram_length_for(
    min_len: usize,
    max_len: usize,
    targets: usize,
    alphabet_size: usize,
) -> Result<usize> {
    let q = if max_len > targets {
        default_gram_length(max_len, targets, alphabet_size)?
    } else if alphabet_size < 2 {
        return default_gram_length(max_len, targets, alphabet_size);
    } else {
        MIN_GRAM_LEN
    };
    Ok(q.min(min_len).max(1))
}

/// Anchor positions of one string, strictly increasing, first is 1 and
/// last is `|s|`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnchorSet {
    positions: Vec<usize>,
    radius: usize,
}

impl AnchorSet {
    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Anchors other than the two sentinels.
    pub fn interior(&self) -> &[usize] {
        match self.positions.len() {
            0..=2 => &[],
            n => &self.positions[1..n - 1],
        }
    }

    pub fn interior_count(&self) -> usize {
        self.interior().len()
    }
}

/// Interior anchors (1-based) of a hash array for radius `r`: positions
/// `i` in `[1 + r, m - r]` whose value is the strict minimum of
/// `h[i - r ..= i + r]`.
///
/// Sliding-window minimum with a monotone deque, so the cost is linear in
/// `m` for any radius.
pub fn strict_local_minima(h: &[HashValue], radius: usize) -> Vec<usize> {
    let m = h.len();
    let width = 2 * radius + 1;
    let mut out = Vec::new();
    if radius == 0 || m < width {
        return out;
    }
    // indices with non-decreasing values; ties are kept so the front run
    // holds every occurrence of the window minimum
    let mut window: VecDeque<usize> = VecDeque::with_capacity(width);
    for right in 0..m {
        while let Some(&back) = window.back() {
            if h[back] > h[right] {
                window.pop_back();
            } else {
                break;
            }
        }
        window.push_back(right);
        if right + 1 < width {
            continue;
        }
        let left = right + 1 - width;
        while window.front().is_some_and(|&f| f < left) {
            window.pop_front();
        }
        let center = left + radius;
        if window[0] == center && window.get(1).is_none_or(|&next| h[next] > h[center]) {
            out.push(center + 1);
        }
    }
    out
}

pub fn find_anchors(s: &[u8], targets: usize, hasher: &GramHasher, q: usize) -> Result<AnchorSet> {
    let hashes = hasher.hash_sequence(s, q)?;
    Ok(anchors_from_hashes(&hashes, s.len(), targets))
}

pub(crate) fn anchors_from_hashes(
    hashes: &HashArray,
    string_len: usize,
    targets: usize,
) -> AnchorSet {
    let radius = neighborhood_radius(string_len, hashes.gram_len(), targets);
    let mut positions = Vec::with_capacity(2 * targets + 4);
    positions.push(1);
    positions.extend(strict_local_minima(hashes.values(), radius));
    if string_len != 1 {
        positions.push(string_len);
    }
    AnchorSet { positions, radius }
}

/// A substring `s[pos ..= pos + len - 1]`, 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartitionSpan {
    pub pos: usize,
    pub len: usize,
}

impl PartitionSpan {
    pub fn new(pos: usize, len: usize) -> Self {
        PartitionSpan { pos, len }
    }

    pub fn slice<'a>(&self, s: &'a [u8]) -> &'a [u8] {
        &s[self.pos - 1..self.pos - 1 + self.len]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionList {
    pub spans: Vec<PartitionSpan>,
    pub radius_used: usize,
    pub string_id: usize,
}

impl PartitionList {
    pub fn with_string_id(mut self, id: usize) -> Self {
        self.string_id = id;
        self
    }

    pub fn len(&self) -> usize {
        self.spans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spans.is_empty()
    }

    /// Span contents in order.
    pub fn substrings<'a>(&'a self, s: &'a [u8]) -> impl Iterator<Item = &'a [u8]> + 'a {
        self.spans.iter().map(move |span| span.slice(s))
    }

    /// The single span `(1, |s|)`.
    pub fn whole(string_len: usize) -> Self {
        PartitionList {
            spans: vec![PartitionSpan::new(1, string_len)],
            radius_used: 0,
            string_id: 0,
        }
    }
}

/// Cuts a string of length `string_len` at its anchors. The final span runs
/// through the last letter.
pub fn spans_from_anchors(anchors: &AnchorSet, string_len: usize) -> PartitionList {
    let a = anchors.positions();
    let spans = if a.len() < 2 {
        vec![PartitionSpan::new(1, string_len)]
    } else {
        let last = a.len() - 2;
        a.windows(2)
            .enumerate()
            .map(|(i, w)| {
                if i == last {
                    PartitionSpan::new(w[0], string_len - w[0] + 1)
                } else {
                    PartitionSpan::new(w[0], w[1] - w[0])
                }
            })
            .collect()
    };
    PartitionList {
        spans,
        radius_used: anchors.radius(),
        string_id: 0,
    }
}

pub fn partition_string(
    s: &[u8],
    targets: usize,
    hasher: &GramHasher,
    q: usize,
) -> Result<PartitionList> {
    let anchors = find_anchors(s, targets, hasher, q)?;
    Ok(spans_from_anchors(&anchors, s.len()))
}

/// Seed of repetition `index`; repetition 0 keeps the base seed.
pub fn repetition_seed(base_seed: u64, index: usize) -> u64 {
    if index == 0 {
        base_seed
    } else {
        splitmix64(base_seed ^ splitmix64(index as u64))
    }
}

/// Union of `repetitions` independently seeded partition runs, duplicates
/// removed and spans sorted by `(pos, len)`.
///
/// The base seed is the seed of `hasher`. `radius_used` reports the radius
/// of the first run; all runs share it since it only depends on lengths.
pub fn partition_with_repetitions(
    s: &[u8],
    targets: usize,
    hasher: &GramHasher,
    q: usize,
    repetitions: usize,
) -> Result<PartitionList> {
    if repetitions == 0 {
        return Err(Error::InvalidParameter(
            "repetitions must be at least 1".into(),
        ));
    }
    let mut list = partition_string(s, targets, hasher, q)?;
    if repetitions == 1 || hasher.is_lookup() {
        return Ok(list);
    }
    for rep in 1..repetitions {
        let h = hasher.reseeded(repetition_seed(hasher.seed(), rep));
        list.spans
            .extend(partition_string(s, targets, &h, q)?.spans);
    }
    list.spans.sort_unstable();
    list.spans.dedup();
    Ok(list)
}

/// Partitioning used by the join: strings shorter than `q` become one span.
pub(crate) fn partition_for_join(
    s: &[u8],
    params: &PartitionParams,
    hasher: &GramHasher,
) -> Result<PartitionList> {
    if s.len() < params.gram_len {
        return Ok(PartitionList::whole(s.len()));
    }
    partition_with_repetitions(
        s,
        params.targets,
        hasher,
        params.gram_len,
        params.repetitions,
    )
}
