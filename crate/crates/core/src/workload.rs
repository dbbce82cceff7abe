//! Workload loading, representation, and synthesis.
//!
//! A workload pairs a newline-delimited string dataset with a set of regex
//! queries. Records get dense 0-based ids in file order and are kept
//! byte-exact. The synthetic generator reproduces the geometric-length,
//! sliced-literal workload family used by the benchmark suite.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One line of the dataset. `text` holds the raw bytes, newline-free.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataRecord {
    pub id: u32,
    pub text: Vec<u8>,
}

/// One regex query. The pattern may or may not parse under the supported
/// subset; unparseable queries are still verifiable but never planned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegexQuery {
    pub id: u32,
    pub pattern: Vec<u8>,
}

/// A workload `(Q, D)`: the query set and the dataset, plus corpus stats.
#[derive(Debug, Clone)]
pub struct Workload {
    queries: Vec<RegexQuery>,
    records: Vec<DataRecord>,
    alphabet: BTreeSet<u8>,
    total_bytes: u64,
}

impl Workload {
    /// Build a workload from raw record and pattern lines. Ids are assigned
    /// densely in order. Fails on an empty dataset or a record containing a
    /// newline; an empty query list is allowed here (selectors that do not
    /// read queries accept it) and rejected by [`load_workload`].
    pub fn from_parts(records: Vec<Vec<u8>>, queries: Vec<Vec<u8>>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::ZeroRecords);
        }
        let mut alphabet = BTreeSet::new();
        let mut total_bytes = 0u64;
        let records = records
            .into_iter()
            .enumerate()
            .map(|(i, text)| {
                let id = i as u32;
                if text.contains(&b'\n') {
                    return Err(Error::RecordHasNewline(id));
                }
                alphabet.extend(text.iter().copied());
                total_bytes += text.len() as u64;
                Ok(DataRecord { id, text })
            })
            .collect::<Result<Vec<_>>>()?;
        let queries = queries
            .into_iter()
            .enumerate()
            .map(|(i, pattern)| RegexQuery {
                id: i as u32,
                pattern,
            })
            .collect();
        Ok(Workload {
            queries,
            records,
            alphabet,
            total_bytes,
        })
    }

    pub fn records(&self) -> &[DataRecord] {
        &self.records
    }

    pub fn queries(&self) -> &[RegexQuery] {
        &self.queries
    }

    /// Number of records. Selectivity denominators use this, not
    /// [`total_bytes`](Self::total_bytes).
    pub fn record_count(&self) -> u32 {
        self.records.len() as u32
    }

    /// Total dataset size in bytes, `Σ |d_i|`.
    pub fn total_bytes(&self) -> u64 {
        self.total_bytes
    }

    /// Exact set of distinct bytes across all record texts.
    pub fn alphabet(&self) -> &BTreeSet<u8> {
        &self.alphabet
    }
}

/// Split file content into lines. A trailing newline does not create a
/// phantom record; interior empty lines are kept to preserve id alignment.
fn split_lines(mut data: Vec<u8>) -> Vec<Vec<u8>> {
    if data.last() == Some(&b'\n') {
        data.pop();
    }
    if data.is_empty() {
        return Vec::new();
    }
    data.split(|&b| b == b'\n').map(|l| l.to_vec()).collect()
}

/// Load a workload from a newline-delimited dataset file and a one-regex-
/// per-line query file.
pub fn load_workload(dataset_path: &Path, query_path: &Path) -> Result<Workload> {
    let data = fs::read(dataset_path).map_err(|e| Error::io(dataset_path, e))?;
    let records = split_lines(data);
    if records.is_empty() {
        return Err(Error::ZeroRecords);
    }
    let qdata = fs::read(query_path).map_err(|e| Error::io(query_path, e))?;
    let queries = split_lines(qdata);
    if queries.is_empty() {
        return Err(Error::ZeroQueries);
    }
    Workload::from_parts(records, queries)
}

/// Load only a query file (used for disjoint test query sets).
pub fn load_queries(query_path: &Path) -> Result<Vec<RegexQuery>> {
    let qdata = fs::read(query_path).map_err(|e| Error::io(query_path, e))?;
    let queries = split_lines(qdata);
    if queries.is_empty() {
        return Err(Error::ZeroQueries);
    }
    Ok(queries
        .into_iter()
        .enumerate()
        .map(|(i, pattern)| RegexQuery {
            id: i as u32,
            pattern,
        })
        .collect())
}

fn join_lines<'a>(lines: impl Iterator<Item = &'a [u8]>) -> Vec<u8> {
    let mut out = Vec::new();
    for l in lines {
        out.extend_from_slice(l);
        out.push(b'\n');
    }
    out
}

/// Write a workload back to disk in the load format. Reloading yields
/// byte-identical records and patterns.
pub fn write_workload(w: &Workload, dataset_path: &Path, query_path: &Path) -> Result<()> {
    let data = join_lines(w.records.iter().map(|r| r.text.as_slice()));
    fs::write(dataset_path, data).map_err(|e| Error::io(dataset_path, e))?;
    let qdata = join_lines(w.queries.iter().map(|q| q.pattern.as_slice()));
    fs::write(query_path, qdata).map_err(|e| Error::io(query_path, e))?;
    Ok(())
}

/// Write a bare query list in the load format.
pub fn write_queries(queries: &[RegexQuery], path: &Path) -> Result<()> {
    let data = join_lines(queries.iter().map(|q| q.pattern.as_slice()));
    fs::write(path, data).map_err(|e| Error::io(path, e))
}

/// Inclusive byte range, e.g. `A-P`. Restricted to printable ASCII so that
/// query files stay valid UTF-8 text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlphabetRange {
    pub start: u8,
    pub end: u8,
}

impl AlphabetRange {
    pub fn new(start: u8, end: u8) -> Result<Self> {
        if start > end {
            return Err(Error::config("alphabet range start exceeds end"));
        }
        if !(0x20..=0x7e).contains(&start) || !(0x20..=0x7e).contains(&end) {
            return Err(Error::config("alphabet range must be printable ASCII"));
        }
        Ok(AlphabetRange { start, end })
    }

    pub fn len(&self) -> usize {
        (self.end - self.start) as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl fmt::Display for AlphabetRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.start as char, self.end as char)
    }
}

impl FromStr for AlphabetRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bytes = s.as_bytes();
        if bytes.len() == 3 && bytes[1] == b'-' {
            return AlphabetRange::new(bytes[0], bytes[2]);
        }
        Err(Error::config(format!(
            "invalid alphabet range {s:?}, expected e.g. \"A-P\""
        )))
    }
}

impl Serialize for AlphabetRange {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for AlphabetRange {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn default_index_fraction() -> f64 {
    0.10
}

fn default_test_fraction() -> f64 {
    0.02
}

/// Parameters of the synthetic workload generator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub record_count: u32,
    pub geometric_p: f64,
    pub alphabet: AlphabetRange,
    #[serde(default = "default_index_fraction")]
    pub index_query_fraction: f64,
    #[serde(default = "default_test_fraction")]
    pub test_query_fraction: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.record_count == 0 {
            return Err(Error::config("record_count must be positive"));
        }
        if !(self.geometric_p > 0.0 && self.geometric_p <= 1.0) {
            return Err(Error::config("geometric_p must be in (0, 1]"));
        }
        for (name, f) in [
            ("index_query_fraction", self.index_query_fraction),
            ("test_query_fraction", self.test_query_fraction),
        ] {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::config(format!("{name} must be in (0, 1]")));
            }
        }
        Ok(())
    }
}

/// Record length: geometric on {1, 2, ...} via inverse CDF, so the mean is
/// `1/p` and no record is empty.
fn sample_length(rng: &mut ChaCha8Rng, p: f64) -> usize {
    if p >= 1.0 {
        return 1;
    }
    let u: f64 = rng.random();
    let len = 1.0 + ((1.0 - u).ln() / (1.0 - p).ln()).floor();
    len.max(1.0).min(1 << 24) as usize
}

/// Escape one literal byte for inclusion in a pattern. Alphanumerics and
/// space pass through; printable punctuation gets a backslash.
fn push_escaped(pattern: &mut Vec<u8>, b: u8) {
    if b.is_ascii_alphanumeric() || b == b' ' {
        pattern.push(b);
    } else {
        pattern.push(b'\\');
        pattern.push(b);
    }
}

/// Build one query from a source record: `lit1 . gap . lit2` where both
/// literals are slices of the record and the gap matches 1..=50 arbitrary
/// characters. The query always matches its source record.
fn make_query(rng: &mut ChaCha8Rng, text: &[u8]) -> Vec<u8> {
    let n = text.len();
    debug_assert!(n >= 1);
    let l1 = rng.random_range(1..=n.min(5));
    let start1 = rng.random_range(0..=n - l1);
    let lit1 = &text[start1..start1 + l1];
    let tail = n - start1 - l1;

    let mut pattern = Vec::new();
    for &b in lit1 {
        push_escaped(&mut pattern, b);
    }
    if tail == 0 {
        // lit1 runs to the end of the record; a gap could not match.
        return pattern;
    }
    pattern.extend_from_slice(b".{1,50}");
    let l2 = rng.random_range(0..=5.min(tail.saturating_sub(1)));
    if l2 > 0 {
        let lo = start1 + l1 + 1;
        let hi = (n - l2).min(start1 + l1 + 50);
        let start2 = rng.random_range(lo..=hi);
        for &b in &text[start2..start2 + l2] {
            push_escaped(&mut pattern, b);
        }
    }
    pattern
}

fn fraction_count(n: u32, fraction: f64) -> usize {
    (((n as f64) * fraction).round() as usize).clamp(1, n as usize)
}

/// Generate a synthetic workload plus a disjoint test query set.
///
/// Index-building queries come from a random `index_query_fraction` of the
/// records; test queries are built the same way from records not used for
/// index queries, so an index never sees them. Fully deterministic for a
/// given spec.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<(Workload, Vec<RegexQuery>)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.record_count;

    let records: Vec<Vec<u8>> = (0..n)
        .map(|_| {
            let len = sample_length(&mut rng, spec.geometric_p);
            (0..len)
                .map(|_| rng.random_range(spec.alphabet.start..=spec.alphabet.end))
                .collect()
        })
        .collect();

    let mut ids: Vec<u32> = (0..n).collect();
    ids.shuffle(&mut rng);
    let index_n = fraction_count(n, spec.index_query_fraction);
    let remaining = n as usize - index_n;
    let test_n = fraction_count(n, spec.test_query_fraction).min(remaining);
    let index_sources = &ids[..index_n];
    let test_sources = &ids[index_n..index_n + test_n];

    let queries: Vec<Vec<u8>> = index_sources
        .iter()
        .map(|&i| make_query(&mut rng, &records[i as usize]))
        .collect();
    let test_queries: Vec<RegexQuery> = test_sources
        .iter()
        .enumerate()
        .map(|(qid, &i)| RegexQuery {
            id: qid as u32,
            pattern: make_query(&mut rng, &records[i as usize]),
        })
        .collect();

    let workload = Workload::from_parts(records, queries)?;
    Ok((workload, test_queries))
}
