//! Gram hashing and partition fingerprints.
//!
//! Every q-gram of a string is mapped to a 64-bit value; anchor detection
//! only ever compares these values with `<`. Two hashers exist:
//!
//! - a seeded polynomial rolling hash over the Mersenne prime 2^61 - 1,
//!   finalized through a 64-bit mixer so that values look uniform, and
//! - a lookup table loaded from a `GRAM<TAB>value` fixture, where `value`
//!   is a decimal in (0, 1) scaled into the 64-bit domain.
//!
//! Fingerprints of whole partitions are plain content hashes (XXH3); equal
//! content always yields equal fingerprints.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};

/// A gram hash value. Smaller values win anchor contests.
pub type HashValue = u64;

const MERSENNE_61: u64 = (1 << 61) - 1;

#[inline]
fn reduce(x: u64) -> u64 {
    let x = (x & MERSENNE_61) + (x >> 61);
    if x >= MERSENNE_61 {
        x - MERSENNE_61
    } else {
        x
    }
}

#[inline]
fn mul_mod(a: u64, b: u64) -> u64 {
    let p = (a as u128) * (b as u128);
    reduce(((p as u64) & MERSENNE_61) + ((p >> 61) as u64))
}

/// SplitMix64 step; also used to derive independent seeds.
#[inline]
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

// MurmurHash3 fmix64.
#[inline]
fn finalize(mut x: u64) -> u64 {
    x ^= x >> 33;
    x = x.wrapping_mul(0xff51_afd7_ed55_8ccd);
    x ^= x >> 33;
    x = x.wrapping_mul(0xc4ce_b9fe_1a85_ec53);
    x ^ (x >> 33)
}

#[inline]
fn symbol(b: u8) -> u64 {
    b as u64 + 1
}

#[derive(Clone)]
enum Mode {
    Rolling {
        base: u64,
        salt: u64,
    },
    Lookup {
        gram_len: usize,
        table: HashMap<Vec<u8>, HashValue>,
    },
}

/// Maps q-grams to totally ordered 64-bit values. Immutable once built.
#[derive(Clone)]
pub struct GramHasher {
    seed: u64,
    mode: Mode,
}

impl fmt::Debug for GramHasher {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.mode {
            Mode::Rolling { .. } => f
                .debug_struct("GramHasher")
                .field("mode", &"rolling")
                .field("seed", &self.seed)
                .finish(),
            Mode::Lookup { gram_len, table } => f
                .debug_struct("GramHasher")
                .field("mode", &"lookup")
                .field("gram_len", gram_len)
                .field("entries", &table.len())
                .finish(),
        }
    }
}

impl GramHasher {
    /// Seeded rolling hasher.
    pub fn rolling(seed: u64) -> Self {
        let base = splitmix64(seed) % (MERSENNE_61 - 512) + 257;
        let salt = splitmix64(seed ^ 0x5851_F42D_4C95_7F2D);
        GramHasher {
            seed,
            mode: Mode::Rolling { base, salt },
        }
    }

    /// Lookup-table hasher from `(gram, value)` pairs with values in (0, 1).
    ///
    /// All grams must share one length. A gram listed twice with two
    /// different values is rejected.
    pub fn from_table<I, G>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (G, f64)>,
        G: Into<Vec<u8>>,
    {
        let mut table = HashMap::new();
        let mut gram_len = None;
        for (i, (gram, value)) in entries.into_iter().enumerate() {
            let gram = gram.into();
            let line = i + 1;
            insert_entry(&mut table, &mut gram_len, gram, value, line)?;
        }
        let gram_len = gram_len.ok_or(Error::Fixture {
            line: 0,
            reason: "no entries".into(),
        })?;
        Ok(GramHasher {
            seed: 0,
            mode: Mode::Lookup { gram_len, table },
        })
    }

    /// Parses fixture text: one `GRAM<TAB>value` per line. Blank lines and
    /// lines starting with `#` are skipped.
    pub fn parse_fixture(text: &str) -> Result<Self> {
        let mut table = HashMap::new();
        let mut gram_len = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let raw = raw.trim_end_matches('\r');
            if raw.trim().is_empty() || raw.starts_with('#') {
                continue;
            }
            let (gram, value) = raw.split_once('\t').ok_or_else(|| Error::Fixture {
                line,
                reason: "expected GRAM<TAB>value".into(),
            })?;
            let value: f64 = value.trim().parse().map_err(|_| Error::Fixture {
                line,
                reason: format!("cannot parse {value:?} as a decimal"),
            })?;
            insert_entry(
                &mut table,
                &mut gram_len,
                gram.as_bytes().to_vec(),
                value,
                line,
            )?;
        }
        let gram_len = gram_len.ok_or(Error::Fixture {
            line: 0,
            reason: "no entries".into(),
        })?;
        Ok(GramHasher {
            seed: 0,
            mode: Mode::Lookup { gram_len, table },
        })
    }

    pub fn load_fixture(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_fixture(&text)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The same hasher family under a different seed. Lookup tables carry
    /// no randomness and are returned unchanged.
    pub fn reseeded(&self, seed: u64) -> Self {
        match self.mode {
            Mode::Rolling { .. } => GramHasher::rolling(seed),
            Mode::Lookup { .. } => self.clone(),
        }
    }

    pub fn is_lookup(&self) -> bool {
        matches!(self.mode, Mode::Lookup { .. })
    }

    /// Gram length fixed by a lookup table, if any.
    pub fn table_gram_len(&self) -> Option<usize> {
        match self.mode {
            Mode::Lookup { gram_len, .. } => Some(gram_len),
            Mode::Rolling { .. } => None,
        }
    }

    /// Hashes one gram directly, without rolling.
    pub fn hash_gram(&self, gram: &[u8]) -> Result<HashValue> {
        match &self.mode {
            Mode::Rolling { base, salt } => {
                let poly = gram
                    .iter()
                    .fold(0u64, |acc, &b| reduce(mul_mod(acc, *base) + symbol(b)));
                Ok(finalize(poly ^ salt))
            }
            Mode::Lookup { gram_len, table } => {
                if gram.len() != *gram_len {
                    return Err(Error::GramLengthMismatch {
                        table: *gram_len,
                        requested: gram.len(),
                    });
                }
                table
                    .get(gram)
                    .copied()
                    .ok_or_else(|| Error::UnknownGram(String::from_utf8_lossy(gram).into_owned()))
            }
        }
    }

    /// Hash values of every q-gram of `s`, in order.
    pub fn hash_sequence(&self, s: &[u8], q: usize) -> Result<HashArray> {
        if q == 0 {
            return Err(Error::InvalidParameter(
                "gram length must be at least 1".into(),
            ));
        }
        if s.len() < q {
            return Err(Error::StringTooShort {
                len: s.len(),
                gram_len: q,
            });
        }
        let count = s.len() - q + 1;
        let mut values = Vec::with_capacity(count);
        match &self.mode {
            Mode::Rolling { base, salt } => {
                // base^(q-1), the weight of the outgoing symbol
                let lead = (1..q).fold(1u64, |acc, _| mul_mod(acc, *base));
                let mut poly = s[..q]
                    .iter()
                    .fold(0u64, |acc, &b| reduce(mul_mod(acc, *base) + symbol(b)));
                values.push(finalize(poly ^ salt));
                for i in q..s.len() {
                    let out = mul_mod(symbol(s[i - q]), lead);
                    poly = reduce(poly + MERSENNE_61 - out);
                    poly = reduce(mul_mod(poly, *base) + symbol(s[i]));
                    values.push(finalize(poly ^ salt));
                }
            }
            Mode::Lookup { gram_len, .. } => {
                if q != *gram_len {
                    return Err(Error::GramLengthMismatch {
                        table: *gram_len,
                        requested: q,
                    });
                }
                for gram in s.windows(q) {
                    values.push(self.hash_gram(gram)?);
                }
            }
        }
        Ok(HashArray { values, q })
    }
}

fn insert_entry(
    table: &mut HashMap<Vec<u8>, HashValue>,
    gram_len: &mut Option<usize>,
    gram: Vec<u8>,
    value: f64,
    line: usize,
) -> Result<()> {
    if gram.is_empty() {
        return Err(Error::Fixture {
            line,
            reason: "empty gram".into(),
        });
    }
    match *gram_len {
        None => *gram_len = Some(gram.len()),
        Some(q) if q != gram.len() => {
            return Err(Error::Fixture {
                line,
                reason: format!("gram length {} differs from {q}", gram.len()),
            })
        }
        Some(_) => {}
    }
    if !(value > 0.0 && value < 1.0) {
        return Err(Error::Fixture {
            line,
            reason: format!("value {value} outside (0, 1)"),
        });
    }
    let scaled = scale_unit(value);
    if let Some(prev) = table.insert(gram.clone(), scaled) {
        if prev != scaled {
            return Err(Error::Fixture {
                line,
                reason: format!(
                    "gram {:?} listed twice with different values",
                    String::from_utf8_lossy(&gram)
                ),
            });
        }
    }
    Ok(())
}

/// Order-preserving map from (0, 1) into the u64 comparison domain.
pub fn scale_unit(value: f64) -> HashValue {
    (value * 18_446_744_073_709_551_616.0) as u64
}

/// Hash values of all q-grams of one string; `values[i]` covers
/// `s[i..i + q]` (0-based).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HashArray {
    values: Vec<HashValue>,
    q: usize,
}

impl HashArray {
    pub fn values(&self) -> &[HashValue] {
        &self.values
    }

    pub fn gram_len(&self) -> usize {
        self.q
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn gram_hash_sequence(s: &[u8], q: usize, hasher: &GramHasher) -> Result<HashArray> {
    hasher.hash_sequence(s, q)
}

/// Content hash of a partition; the join key.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fingerprint(pub u64);

impl Fingerprint {
    pub fn of(bytes: &[u8]) -> Self {
        Fingerprint(xxhash_rust::xxh3::xxh3_64(bytes))
    }
}

/// Fingerprint of `s[pos..pos + len]` with a 1-based `pos`.
pub fn content_fingerprint(s: &[u8], pos: usize, len: usize) -> Result<Fingerprint> {
    if pos == 0 || len == 0 || pos - 1 + len > s.len() {
        return Err(Error::SpanOutOfRange {
            pos,
            len,
            string_len: s.len(),
        });
    }
    Ok(Fingerprint::of(&s[pos - 1..pos - 1 + len]))
}
