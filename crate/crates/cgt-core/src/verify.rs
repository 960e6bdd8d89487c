//! Brute-force matrix property verifiers.
//!
//! These enumerate column subsets exhaustively and are the ground truth the
//! constructions are checked against at desk scale. A guard refuses
//! instances whose enumeration would blow up; callers can force past it.
//! Subset scans run data-parallel (partitioned by the smallest subset
//! element) when the `parallel` feature is on, reducing to the first
//! witness in lexicographic order so results are identical either way.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::matrix::TestMatrix;

/// Enumeration limits and execution mode for the verifiers.
#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    /// Bypass the n/subset-count guard.
    pub force: bool,
    /// Partition the scan across worker threads (no effect unless the
    /// `parallel` feature is enabled).
    pub parallel: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            force: false,
            parallel: cfg!(feature = "parallel"),
        }
    }
}

const GUARD_MAX_N: u64 = 64;
const GUARD_MAX_SUBSETS: u128 = 10_000_000;

/// A d-subset whose Boolean sum covers another column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisjunctWitness {
    pub defectives: Vec<u64>,
    pub covered: u64,
}

/// Two distinct column subsets with identical Boolean sums.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeparabilityWitness {
    pub first: Vec<u64>,
    pub second: Vec<u64>,
}

/// A d-subset with at least k indistinguishable outside columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvabilityWitness {
    pub defectives: Vec<u64>,
    pub indistinguishable: Vec<u64>,
}

/// True iff no column is covered by the Boolean sum of any d others.
pub fn is_d_disjunct(m: &TestMatrix, d: u32) -> Result<bool> {
    is_d_disjunct_with(m, d, VerifyOptions::default())
}

pub fn is_d_disjunct_with(m: &TestMatrix, d: u32, opts: VerifyOptions) -> Result<bool> {
    Ok(find_disjunct_counterexample(m, d, opts)?.is_none())
}

/// Lexicographically first (defective set, covered column) violation, if any.
pub fn find_disjunct_counterexample(
    m: &TestMatrix,
    d: u32,
    opts: VerifyOptions,
) -> Result<Option<DisjunctWitness>> {
    check_subset_size(m, d)?;
    guard(m.n(), subsets_of_size(m.n(), d), opts)?;
    let cols = m.column_bitsets();
    let n = m.n();
    let k = d as usize;
    Ok(scan_first(n, opts.parallel, |first| {
        let mut union = vec![0u64; cols.words()];
        scan_combinations(first + 1, n, k - 1, &mut |rest| {
            union.iter_mut().for_each(|w| *w = 0);
            cols.or_into(first, &mut union);
            for &c in rest {
                cols.or_into(c, &mut union);
            }
            let covered = (0..n).find(|&j| {
                j != first && !rest.contains(&j) && cols.is_subset_of(j, &union)
            })?;
            let mut defectives = Vec::with_capacity(k);
            defectives.push(first);
            defectives.extend_from_slice(rest);
            Some(DisjunctWitness {
                defectives,
                covered,
            })
        })
    }))
}

/// True iff the Boolean sums of all column subsets of size at most d are
/// pairwise distinct.
pub fn is_separable_upto(m: &TestMatrix, d: u32) -> Result<bool> {
    is_separable_upto_with(m, d, VerifyOptions::default())
}

pub fn is_separable_upto_with(m: &TestMatrix, d: u32, opts: VerifyOptions) -> Result<bool> {
    Ok(find_separability_counterexample(m, d, opts)?.is_none())
}

/// First pair of subsets (in size-then-lex enumeration order) sharing a
/// Boolean sum.
pub fn find_separability_counterexample(
    m: &TestMatrix,
    d: u32,
    opts: VerifyOptions,
) -> Result<Option<SeparabilityWitness>> {
    check_subset_size(m, d)?;
    let total: u128 = (0..=d).map(|i| subsets_of_size(m.n(), i)).sum();
    guard(m.n(), total, opts)?;
    let cols = m.column_bitsets();
    let n = m.n();
    // sums can collide across sizes too, so one table covers the whole range
    let mut seen: HashMap<Vec<u64>, Vec<u64>> = HashMap::new();
    for size in 0..=d as usize {
        let hit = scan_combinations(0, n, size, &mut |subset| {
            let mut or = vec![0u64; cols.words()];
            for &c in subset {
                cols.or_into(c, &mut or);
            }
            match seen.get(&or) {
                Some(prev) => Some(SeparabilityWitness {
                    first: prev.clone(),
                    second: subset.to_vec(),
                }),
                None => {
                    seen.insert(or, subset.to_vec());
                    None
                }
            }
        });
        if hit.is_some() {
            return Ok(hit);
        }
    }
    Ok(None)
}

/// True iff for every d-subset D fewer than k outside columns are
/// indistinguishable from D. (d,1)-resolvable coincides with d-disjunct.
pub fn is_dk_resolvable(m: &TestMatrix, d: u32, k: u32) -> Result<bool> {
    is_dk_resolvable_with(m, d, k, VerifyOptions::default())
}

pub fn is_dk_resolvable_with(
    m: &TestMatrix,
    d: u32,
    k: u32,
    opts: VerifyOptions,
) -> Result<bool> {
    Ok(find_resolvability_counterexample(m, d, k, opts)?.is_none())
}

/// First d-subset with at least k indistinguishable outside columns.
pub fn find_resolvability_counterexample(
    m: &TestMatrix,
    d: u32,
    k: u32,
    opts: VerifyOptions,
) -> Result<Option<ResolvabilityWitness>> {
    check_subset_size(m, d)?;
    if k == 0 {
        return Err(Error::input("k must be at least 1"));
    }
    guard(m.n(), subsets_of_size(m.n(), d), opts)?;
    let cols = m.column_bitsets();
    let n = m.n();
    let size = d as usize;
    let k = k as usize;
    Ok(scan_first(n, opts.parallel, |first| {
        let mut union = vec![0u64; cols.words()];
        scan_combinations(first + 1, n, size - 1, &mut |rest| {
            union.iter_mut().for_each(|w| *w = 0);
            cols.or_into(first, &mut union);
            for &c in rest {
                cols.or_into(c, &mut union);
            }
            let indistinguishable: Vec<u64> = (0..n)
                .filter(|&j| {
                    j != first && !rest.contains(&j) && cols.is_subset_of(j, &union)
                })
                .collect();
            if indistinguishable.len() >= k {
                let mut defectives = Vec::with_capacity(size);
                defectives.push(first);
                defectives.extend_from_slice(rest);
                Some(ResolvabilityWitness {
                    defectives,
                    indistinguishable,
                })
            } else {
                None
            }
        })
    }))
}

fn check_subset_size(m: &TestMatrix, d: u32) -> Result<()> {
    if d == 0 {
        return Err(Error::input("d must be at least 1"));
    }
    if u64::from(d) >= m.n() {
        return Err(Error::input(format!(
            "d={d} must be smaller than n={}",
            m.n()
        )));
    }
    Ok(())
}

fn guard(n: u64, subsets: u128, opts: VerifyOptions) -> Result<()> {
    if opts.force {
        return Ok(());
    }
    if n > GUARD_MAX_N {
        return Err(Error::GuardExceeded(format!(
            "n={n} exceeds the brute-force limit of {GUARD_MAX_N}"
        )));
    }
    if subsets > GUARD_MAX_SUBSETS {
        return Err(Error::GuardExceeded(format!(
            "{subsets} subsets exceed the enumeration limit of {GUARD_MAX_SUBSETS}"
        )));
    }
    Ok(())
}

fn subsets_of_size(n: u64, k: u32) -> u128 {
    let mut acc: u128 = 1;
    for i in 0..u64::from(k) {
        acc = acc.saturating_mul((n - i) as u128) / (i + 1) as u128;
        if acc > u128::MAX / 2 {
            return u128::MAX;
        }
    }
    acc
}

/// Visit every size-k subset of [lo, hi) in lexicographic order until the
/// visitor yields a value.
fn scan_combinations<W>(
    lo: u64,
    hi: u64,
    k: usize,
    visit: &mut impl FnMut(&[u64]) -> Option<W>,
) -> Option<W> {
    if k == 0 {
        return visit(&[]);
    }
    if lo + k as u64 > hi {
        return None;
    }
    let mut subset: Vec<u64> = (lo..lo + k as u64).collect();
    loop {
        if let Some(w) = visit(&subset) {
            return Some(w);
        }
        let mut i = k;
        loop {
            if i == 0 {
                return None;
            }
            i -= 1;
            if subset[i] < hi - (k - i) as u64 {
                subset[i] += 1;
                for j in i + 1..k {
                    subset[j] = subset[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// First Some(..) over i in [0, n), in index order. Splits across workers
/// when requested; `find_map_first` keeps the sequential answer.
fn scan_first<W: Send>(
    n: u64,
    parallel: bool,
    f: impl Fn(u64) -> Option<W> + Sync + Send,
) -> Option<W> {
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return (0..n).into_par_iter().find_map_first(f);
    }
    let _ = parallel;
    (0..n).find_map(f)
}
