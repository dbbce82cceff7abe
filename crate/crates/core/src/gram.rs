//! N-gram enumeration and support statistics.
//!
//! The n-gram unit is the byte. Supports count containing records (or
//! queries) once each, regardless of repeat occurrences, so
//! `selectivity(g) = s_D(g) / record_count` is the fraction of records
//! containing `g`.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::escape::escape_bytes;
use crate::regex_literal;
use crate::workload::Workload;

/// A contiguous byte sequence used as an index key candidate.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NGram(Vec<u8>);

impl NGram {
    pub fn new(bytes: impl Into<Vec<u8>>) -> Self {
        let bytes = bytes.into();
        debug_assert!(!bytes.is_empty());
        NGram(bytes)
    }

    pub fn bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True if `self` occurs contiguously inside `text`.
    pub fn contained_in(&self, text: &[u8]) -> bool {
        contains_subslice(text, &self.0)
    }
}

impl fmt::Debug for NGram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NGram({})", escape_bytes(&self.0))
    }
}

impl fmt::Display for NGram {
    fmt_display_via_escape!();
}

macro_rules! fmt_display_via_escape {
    () => {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            f.write_str(&escape_bytes(&self.0))
        }
    };
}
use fmt_display_via_escape;

impl From<&[u8]> for NGram {
    fn from(b: &[u8]) -> Self {
        NGram::new(b.to_vec())
    }
}

impl From<&str> for NGram {
    fn from(s: &str) -> Self {
        NGram::new(s.as_bytes().to_vec())
    }
}

pub(crate) fn contains_subslice(haystack: &[u8], needle: &[u8]) -> bool {
    needle.is_empty()
        || haystack.len() >= needle.len()
            && haystack.windows(needle.len()).any(|w| w == needle)
}

/// All distinct contiguous substrings of `text` with length in
/// `[min_n, max_n]`. Empty when `text` is shorter than `min_n`.
pub fn grams_of(text: &[u8], min_n: usize, max_n: usize) -> HashSet<NGram> {
    assert!(1 <= min_n && min_n <= max_n, "require 1 <= min_n <= max_n");
    let mut out = HashSet::new();
    for n in min_n..=max_n.min(text.len()) {
        for w in text.windows(n) {
            out.insert(NGram::from(w));
        }
    }
    out
}

/// Per-gram supports over a workload.
#[derive(Debug, Clone)]
pub struct GramStats {
    s_d: HashMap<NGram, u32>,
    s_q: HashMap<NGram, u32>,
    record_count: u32,
}

impl GramStats {
    /// Direct construction; `record_count` of zero leaves selectivity
    /// undefined and is rejected.
    pub fn with_counts(
        s_d: HashMap<NGram, u32>,
        s_q: HashMap<NGram, u32>,
        record_count: u32,
    ) -> Result<Self> {
        if record_count == 0 {
            return Err(Error::config("record_count must be positive"));
        }
        Ok(GramStats {
            s_d,
            s_q,
            record_count,
        })
    }

    /// Records containing `g`; zero for unknown grams.
    pub fn s_d(&self, g: &NGram) -> u32 {
        self.s_d.get(g).copied().unwrap_or(0)
    }

    /// Queries containing `g` in some maximal literal; zero for unknown grams.
    pub fn s_q(&self, g: &NGram) -> u32 {
        self.s_q.get(g).copied().unwrap_or(0)
    }

    pub fn record_count(&self) -> u32 {
        self.record_count
    }

    /// Fraction of records containing `g`.
    pub fn selectivity(&self, g: &NGram) -> f64 {
        self.s_d(g) as f64 / self.record_count as f64
    }

    pub fn grams(&self) -> impl Iterator<Item = &NGram> {
        self.s_d.keys()
    }
}

/// Count records containing each candidate, one record at most once.
/// Records are partitioned across threads and the per-chunk maps merged.
pub(crate) fn support_in_records<'a>(
    texts: impl IndexedParallelIterator<Item = &'a [u8]>,
    candidates: &HashSet<NGram>,
) -> HashMap<NGram, u32> {
    let lengths: Vec<usize> = {
        let mut ls: Vec<usize> = candidates.iter().map(|g| g.len()).collect();
        ls.sort_unstable();
        ls.dedup();
        ls
    };
    texts
        .fold(HashMap::new, |mut acc: HashMap<NGram, u32>, text| {
            let mut seen: HashSet<&NGram> = HashSet::new();
            for &n in &lengths {
                if n > text.len() {
                    break;
                }
                for w in text.windows(n) {
                    // Borrow the candidate's own key so `seen` needs no copies.
                    if let Some((g, _)) = candidates.get_key_value(&NGram::from(w)) {
                        seen.insert(g);
                    }
                }
            }
            for g in seen {
                *acc.entry(g.clone()).or_insert(0) += 1;
            }
            acc
        })
        .reduce(HashMap::new, |mut a, b| {
            for (g, c) in b {
                *a.entry(g).or_insert(0) += c;
            }
            a
        })
}

/// Maximal literals of each query, as extracted by the literal tree.
/// Unparseable queries and queries with no required literal yield an
/// empty list.
pub fn query_literals(workload: &Workload) -> Vec<Vec<Vec<u8>>> {
    workload
        .queries()
        .iter()
        .map(|q| regex_literal::pattern_literals(&q.pattern))
        .collect()
}

/// Exact `s_D` and `s_Q` for every candidate. Candidates absent from the
/// dataset get `s_D = 0`; a query counts once toward `s_Q` even when the
/// gram occurs in several of its literals.
pub fn compute_stats(workload: &Workload, candidates: &HashSet<NGram>) -> GramStats {
    let s_d = support_in_records(
        workload.records().par_iter().map(|r| r.text.as_slice()),
        candidates,
    );
    let literals = query_literals(workload);
    let mut s_q: HashMap<NGram, u32> = HashMap::new();
    for lits in &literals {
        let mut seen: HashSet<&NGram> = HashSet::new();
        for lit in lits {
            for n in 1..=lit.len() {
                for w in lit.windows(n) {
                    if let Some((g, _)) = candidates.get_key_value(&NGram::from(w)) {
                        seen.insert(g);
                    }
                }
            }
        }
        for g in seen {
            *s_q.entry(g.clone()).or_insert(0) += 1;
        }
    }
    GramStats {
        s_d,
        s_q,
        record_count: workload.record_count(),
    }
}

/// Dump stats as CSV `gram,s_D,s_Q,selectivity`, grams hex-escaped.
pub fn write_stats_csv(stats: &GramStats, path: &Path) -> Result<()> {
    let mut grams: Vec<&NGram> = stats.s_d.keys().collect();
    grams.sort();
    let mut buf = Vec::new();
    writeln!(buf, "gram,s_D,s_Q,selectivity").unwrap();
    for g in grams {
        writeln!(
            buf,
            "{},{},{},{:.6}",
            escape_bytes(g.bytes()),
            stats.s_d(g),
            stats.s_q(g),
            stats.selectivity(g)
        )
        .unwrap();
    }
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn workload(records: &[&str], queries: &[&str]) -> Workload {
        Workload::from_parts(
            records.iter().map(|r| r.as_bytes().to_vec()).collect(),
            queries.iter().map(|q| q.as_bytes().to_vec()).collect(),
        )
        .unwrap()
    }

    fn gset(grams: &[&str]) -> HashSet<NGram> {
        grams.iter().map(|g| NGram::from(*g)).collect()
    }

    #[test]
    fn grams_of_basic() {
        let got = grams_of(b"abc", 1, 2);
        assert_eq!(got, gset(&["a", "b", "c", "ab", "bc"]));
    }

    #[test]
    fn grams_of_dedups() {
        assert_eq!(grams_of(b"aaa", 2, 2), gset(&["aa"]));
    }

    #[test]
    fn grams_of_sliding_window() {
        // Oracle: |text| - n + 1 windows before dedup; all distinct here.
        let got = grams_of(b"ZZZ.pdf", 3, 3);
        assert_eq!(got, gset(&["ZZZ", "ZZ.", "Z.p", ".pd", "pdf"]));
        assert_eq!(got.len(), 7 - 3 + 1);
    }

    #[test]
    fn grams_of_short_text_empty() {
        assert!(grams_of(b"ab", 3, 5).is_empty());
    }

    #[test]
    fn compute_stats_hand_count() {
        let w = workload(&["abc", "abd"], &[]);
        let stats = compute_stats(&w, &gset(&["ab", "bc"]));
        assert_eq!(stats.s_d(&NGram::from("ab")), 2);
        assert_eq!(stats.s_d(&NGram::from("bc")), 1);
    }

    #[test]
    fn absent_gram_zero_selectivity() {
        let w = workload(&["abc", "abd"], &[]);
        let stats = compute_stats(&w, &gset(&["zz"]));
        assert_eq!(stats.s_d(&NGram::from("zz")), 0);
        assert_eq!(stats.selectivity(&NGram::from("zz")), 0.0);
    }

    #[test]
    fn selectivity_arithmetic() {
        let mut s_d = HashMap::new();
        s_d.insert(NGram::from("g"), 1);
        let stats = GramStats::with_counts(s_d, HashMap::new(), 10).unwrap();
        assert_eq!(stats.selectivity(&NGram::from("g")), 0.1);
    }

    #[test]
    fn zero_record_count_rejected() {
        assert!(GramStats::with_counts(HashMap::new(), HashMap::new(), 0).is_err());
    }

    #[test]
    fn s_q_counts_query_once() {
        // Gram "ab" occurs in two literals of the same query.
        let w = workload(&["x"], &["ab.*ab"]);
        let stats = compute_stats(&w, &gset(&["ab"]));
        assert_eq!(stats.s_q(&NGram::from("ab")), 1);
    }

    #[test]
    fn s_q_uses_literals_not_raw_pattern() {
        // ".*" is regex syntax, not a literal; "a.b" contains no "ab" literal.
        let w = workload(&["x"], &["a.b"]);
        let stats = compute_stats(&w, &gset(&["ab", "a.b", "a", "b"]));
        assert_eq!(stats.s_q(&NGram::from("ab")), 0);
        assert_eq!(stats.s_q(&NGram::from("a.b")), 0);
        assert_eq!(stats.s_q(&NGram::from("a")), 1);
        assert_eq!(stats.s_q(&NGram::from("b")), 1);
    }

    #[test]
    fn substring_monotonicity_spot_check() {
        let w = workload(&["xx.pdfg", "a.pdf", "pdf", "qqq"], &[]);
        let stats = compute_stats(&w, &gset(&["pdf", "pdfg"]));
        assert!(stats.selectivity(&NGram::from("pdfg")) <= stats.selectivity(&NGram::from("pdf")));
    }

    #[test]
    fn stats_match_bruteforce_scan() {
        // Randomized 20-record corpus against the per-record containment oracle.
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        let records: Vec<Vec<u8>> = (0..20)
            .map(|_| {
                let len = rng.random_range(0..12);
                (0..len).map(|_| rng.random_range(b'a'..=b'd')).collect()
            })
            .collect();
        let mut texts = records.clone();
        texts[0] = b"abcd".to_vec(); // ensure non-empty corpus bytes
        let w = Workload::from_parts(texts.clone(), vec![]).unwrap();
        let mut candidates = HashSet::new();
        for t in &texts {
            candidates.extend(grams_of(t, 1, 3));
        }
        candidates.insert(NGram::from("zz"));
        let stats = compute_stats(&w, &candidates);
        for g in &candidates {
            let oracle = texts.iter().filter(|t| g.contained_in(t)).count() as u32;
            assert_eq!(stats.s_d(g), oracle, "gram {g:?}");
        }
    }

    proptest! {
        /// Substring monotonicity: s_D of a superstring never exceeds s_D of
        /// the substring.
        #[test]
        fn support_monotone_under_extension(
            records in prop::collection::vec(prop::collection::vec(b'a'..=b'c', 0..10), 1..20),
            pick in any::<prop::sample::Index>(),
        ) {
            let w = Workload::from_parts(records.clone(), vec![]).unwrap();
            let mut all: Vec<NGram> = Vec::new();
            for r in &records {
                all.extend(grams_of(r, 1, 4));
            }
            prop_assume!(!all.is_empty());
            all.sort();
            all.dedup();
            let g2 = pick.get(&all).clone();
            let candidates: HashSet<NGram> = all.iter().cloned().collect();
            let stats = compute_stats(&w, &candidates);
            // Every proper substring of g2 must have support >= s_D(g2).
            for n in 1..g2.len() {
                for w2 in g2.bytes().windows(n) {
                    let sub = NGram::from(w2);
                    prop_assert!(stats.s_d(&sub) >= stats.s_d(&g2));
                }
            }
        }

        /// grams_of(text, n, n) has exactly max(0, |text|-n+1) members
        /// before dedup, and at most that many after.
        #[test]
        fn gram_count_bound(text in prop::collection::vec(b'a'..=b'c', 0..20), n in 1usize..5) {
            let got = grams_of(&text, n, n);
            let windows = text.len().saturating_sub(n - 1).min(text.len());
            prop_assert!(got.len() <= windows);
            if !text.is_empty() && n <= text.len() {
                prop_assert!(!got.is_empty());
            }
        }
    }
}
