/// One input string and its stable 0-based dataset index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StringRecord {
    pub id: usize,
    pub bytes: Vec<u8>,
}

impl StringRecord {
    pub fn new(id: usize, bytes: impl Into<Vec<u8>>) -> Self {
        StringRecord {
            id,
            bytes: bytes.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.bytes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bytes.is_empty()
    }
}

/// Records numbered by position.
pub fn records_from<I, S>(strings: I) -> Vec<StringRecord>
where
    I: IntoIterator<Item = S>,
    S: Into<Vec<u8>>,
{
    strings
        .into_iter()
        .enumerate()
        .map(|(id, s)| StringRecord::new(id, s))
        .collect()
}

/// Number of distinct bytes across the dataset.
pub fn alphabet_size(records: &[StringRecord]) -> usize {
    let mut seen = [false; 256];
    for r in records {
        for &b in &r.bytes {
            seen[b as usize] = true;
        }
    }
    seen.iter().filter(|&&x| x).count()
}
