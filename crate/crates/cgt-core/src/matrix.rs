//! Shared representation of test regimens, outcomes, and the generic
//! negative-elimination decoder for disjunct matrices.
//!
//! A test regimen is a t x n Boolean matrix: rows are tests, columns are
//! items, and a 1-entry means the item is sampled into the test. Rows are
//! stored sparsely as sorted column-index lists; pooling rows are thin
//! relative to n for every construction in this crate.

use std::fmt;

use crate::error::{Error, Result};

/// Construction method tag, used in matrix files and CLI dispatch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Crs,
    Rw,
    D2,
    D3,
    Custom,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::Crs => "crs",
            Method::Rw => "rw",
            Method::D2 => "d2",
            Method::D3 => "d3",
            Method::Custom => "custom",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "crs" => Ok(Method::Crs),
            "rw" => Ok(Method::Rw),
            "d2" => Ok(Method::D2),
            "d3" => Ok(Method::D3),
            "custom" => Ok(Method::Custom),
            other => Err(Error::input(format!("unknown method `{other}`"))),
        }
    }
}

/// Method-specific construction parameters carried alongside a matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MethodParams {
    /// Prime powers (p, e) of the plan that generated the residue rows.
    Crs { prime_powers: Vec<(u64, u32)> },
    /// Rake-and-winnow sample injection: 2*tparam rows, seeded generator.
    Rw {
        tparam: u32,
        k: u32,
        seed: u64,
        generator: String,
    },
    /// Ternary digit scheme for up to two defectives.
    D2 { q: u32, effective_n: u64 },
    /// Binary digit-pair scheme for up to three defectives.
    D3 { q: u32, effective_n: u64 },
    Custom,
}

impl MethodParams {
    pub fn method(&self) -> Method {
        match self {
            MethodParams::Crs { .. } => Method::Crs,
            MethodParams::Rw { .. } => Method::Rw,
            MethodParams::D2 { .. } => Method::D2,
            MethodParams::D3 { .. } => Method::D3,
            MethodParams::Custom => Method::Custom,
        }
    }
}

/// A t x n test regimen with sparse rows and its construction metadata.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestMatrix {
    n: u64,
    d: u32,
    rows: Vec<Vec<u64>>,
    params: MethodParams,
}

impl TestMatrix {
    /// Build a matrix from explicit rows, validating the representation
    /// invariants: indices in [0, n), strictly increasing per row.
    pub fn new(n: u64, d: u32, rows: Vec<Vec<u64>>, params: MethodParams) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            for w in row.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::input(format!(
                        "row {i} is not strictly increasing"
                    )));
                }
            }
            if let Some(&last) = row.last() {
                if last >= n {
                    return Err(Error::input(format!(
                        "row {i} contains index {last} >= n={n}"
                    )));
                }
            }
        }
        Ok(TestMatrix { n, d, rows, params })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Number of tests (rows).
    pub fn t(&self) -> usize {
        self.rows.len()
    }

    /// Declared defect capacity d the construction was sized for.
    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.rows
    }

    pub fn method(&self) -> Method {
        self.params.method()
    }

    pub fn params(&self) -> &MethodParams {
        &self.params
    }

    /// The realized sampling rate S: the maximum number of tests any single
    /// item participates in.
    pub fn sampling_rate(&self) -> usize {
        let mut weight = vec![0usize; self.n as usize];
        for row in &self.rows {
            for &j in row {
                weight[j as usize] += 1;
            }
        }
        weight.into_iter().max().unwrap_or(0)
    }

    /// Per-column row-incidence bitsets (words of 64 rows each). Shared by
    /// the verifiers and the simulation loops.
    pub fn column_bitsets(&self) -> ColumnBitsets {
        let words = self.t().div_ceil(64);
        let mut cols = vec![0u64; self.n as usize * words];
        for (i, row) in self.rows.iter().enumerate() {
            for &j in row {
                cols[j as usize * words + i / 64] |= 1u64 << (i % 64);
            }
        }
        ColumnBitsets {
            words,
            t: self.t(),
            bits: cols,
        }
    }
}

/// Dense per-column view of a matrix: for each column, the set of rows that
/// sample it, packed 64 rows per word.
pub struct ColumnBitsets {
    words: usize,
    t: usize,
    bits: Vec<u64>,
}

impl ColumnBitsets {
    pub fn words(&self) -> usize {
        self.words
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn column(&self, j: u64) -> &[u64] {
        let j = j as usize;
        &self.bits[j * self.words..(j + 1) * self.words]
    }

    /// OR the column into an accumulator of `words` length.
    pub fn or_into(&self, j: u64, acc: &mut [u64]) {
        for (a, b) in acc.iter_mut().zip(self.column(j)) {
            *a |= b;
        }
    }

    /// True when every row sampling column j is set in `mask`.
    pub fn is_subset_of(&self, j: u64, mask: &[u64]) -> bool {
        self.column(j)
            .iter()
            .zip(mask)
            .all(|(c, m)| c & !m == 0)
    }
}

/// Result vector of one testing round; bit i is the outcome of test i
/// (true = positive).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeVector {
    bits: Vec<bool>,
}

impl OutcomeVector {
    pub fn new(bits: Vec<bool>) -> Self {
        OutcomeVector { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Parse a line of `0`/`1` characters.
    pub fn parse(line: &str) -> Result<Self> {
        let mut bits = Vec::with_capacity(line.len());
        for (i, c) in line.trim_end_matches(['\r', '\n']).chars().enumerate() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                other => {
                    return Err(Error::input(format!(
                        "outcome position {i}: expected 0 or 1, found `{other}`"
                    )))
                }
            }
        }
        Ok(OutcomeVector { bits })
    }
}

impl fmt::Display for OutcomeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// A set of item indices: sorted, deduplicated.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct DefectiveSet {
    items: Vec<u64>,
}

impl DefectiveSet {
    pub fn new(mut items: Vec<u64>) -> Self {
        items.sort_unstable();
        items.dedup();
        DefectiveSet { items }
    }

    pub fn empty() -> Self {
        DefectiveSet { items: Vec::new() }
    }

    pub fn items(&self) -> &[u64] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn contains(&self, item: u64) -> bool {
        self.items.binary_search(&item).is_ok()
    }
}

impl FromIterator<u64> for DefectiveSet {
    fn from_iter<I: IntoIterator<Item = u64>>(iter: I) -> Self {
        DefectiveSet::new(iter.into_iter().collect())
    }
}

impl fmt::Display for DefectiveSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, item) in self.items.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{item}")?;
        }
        f.write_str("}")
    }
}

/// Outcome of a decoding step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecodeResult {
    /// At most d items survived elimination (or digit reconstruction
    /// finished); this is the defective set.
    Identified(DefectiveSet),
    /// More than d items survived negative elimination: at least d+1
    /// defectives are present. Carries the survivor count.
    Overflow(usize),
    /// Stage-1 candidate set awaiting individual confirmation.
    Candidates(DefectiveSet),
}

/// Run every test of the regimen against a known defective set: bit i is
/// positive iff row i intersects the defectives.
pub fn run_tests(m: &TestMatrix, defectives: &DefectiveSet) -> Result<OutcomeVector> {
    if let Some(&max) = defectives.items().last() {
        if max >= m.n() {
            return Err(Error::input(format!(
                "defective index {max} out of range for n={}",
                m.n()
            )));
        }
    }
    let bits = m
        .rows()
        .iter()
        .map(|row| intersects(row, defectives.items()))
        .collect();
    Ok(OutcomeVector::new(bits))
}

fn intersects(row: &[u64], defectives: &[u64]) -> bool {
    // both sorted; scan the shorter against the longer
    if defectives.len() <= 8 || defectives.len() * 16 < row.len() {
        defectives.iter().any(|d| row.binary_search(d).is_ok())
    } else {
        let (mut i, mut j) = (0, 0);
        while i < row.len() && j < defectives.len() {
            match row[i].cmp(&defectives[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }
}

/// Negative-elimination decoding for disjunct regimens: every item that
/// appears in a negative test is pure; if at most d items survive they are
/// exactly the defectives, otherwise report overflow.
pub fn decode_disjunct(m: &TestMatrix, o: &OutcomeVector, d: u32) -> Result<DecodeResult> {
    let survivors = disjunct_survivors(m, o)?;
    if survivors.len() <= d as usize {
        Ok(DecodeResult::Identified(DefectiveSet::new(survivors)))
    } else {
        Ok(DecodeResult::Overflow(survivors.len()))
    }
}

/// The items not eliminated by any negative test, in ascending order.
/// Exposed separately so the CLI can dump survivors on overflow.
pub fn disjunct_survivors(m: &TestMatrix, o: &OutcomeVector) -> Result<Vec<u64>> {
    if o.len() != m.t() {
        return Err(Error::input(format!(
            "outcome length {} != t={}",
            o.len(),
            m.t()
        )));
    }
    let mut eliminated = vec![false; m.n() as usize];
    for (i, row) in m.rows().iter().enumerate() {
        if !o.get(i) {
            for &j in row {
                eliminated[j as usize] = true;
            }
        }
    }
    Ok(eliminated
        .iter()
        .enumerate()
        .filter(|(_, &e)| !e)
        .map(|(j, _)| j as u64)
        .collect())
}
