//! Randomized two-stage rake-and-winnow protocol.
//!
//! Stage 1 builds a 2t x n matrix by sample injection: each column is
//! placed into t/d rows drawn without replacement from a seeded generator,
//! Bloom-filter style. Negative tests rake away pure items; the survivors
//! form a small candidate set. Stage 2 winnows it with one individual test
//! per candidate. Any d defectives light up at most t rows, so at least t
//! rows stay negative, and a survivor outside the defectives is a
//! 2^(-t/d)-probability collision event.
//!
//! Matrices and transcripts are bit-reproducible from the parameters: the
//! per-column substream is the ChaCha8 stream numbered by the column index,
//! and sampling is a partial Fisher-Yates with rejection-sampled uniforms.

use num_bigint::BigUint;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use std::fmt;

use crate::bignum::log2_big;
use crate::error::{Error, Result};
use crate::matrix::{DefectiveSet, MethodParams, TestMatrix};

/// Name of the pinned generator, serialized into matrix files.
pub const GENERATOR_NAME: &str = "chacha8";

/// Construction parameters for one protocol instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RwParams {
    pub n: u64,
    pub d: u32,
    pub k: u32,
    /// Row-count parameter: the matrix has 2*tparam rows and each column is
    /// injected into tparam/d of them.
    pub tparam: u32,
    pub seed: u64,
}

impl RwParams {
    pub fn new(n: u64, d: u32, k: u32, tparam: u32, seed: u64) -> Result<Self> {
        if d == 0 {
            return Err(Error::input("d must be at least 1"));
        }
        if u64::from(d) >= n {
            return Err(Error::input(format!("d={d} must be smaller than n={n}")));
        }
        if k == 0 {
            return Err(Error::input("k must be at least 1"));
        }
        if tparam == 0 || !tparam.is_multiple_of(d) {
            return Err(Error::input(format!(
                "t={tparam} must be a positive multiple of d={d}"
            )));
        }
        Ok(RwParams {
            n,
            d,
            k,
            tparam,
            seed,
        })
    }

    /// Parameters with t sized by the resolvability bound for (n, d, k).
    pub fn sized(n: u64, d: u32, k: u32, seed: u64) -> Result<Self> {
        let tparam = stage1_test_count(n, d, k)?;
        RwParams::new(n, d, k, tparam, seed)
    }

    /// Total stage-1 tests (rows).
    pub fn rows(&self) -> usize {
        2 * self.tparam as usize
    }

    /// Tests each item is injected into.
    pub fn injections(&self) -> usize {
        (self.tparam / self.d) as usize
    }
}

/// Smallest t making a 2t x n injection matrix (d,k)-resolvable with
/// probability at least 1 - 1/n:
/// t >= (d^2/k) lg(en/d) + d lg(en/k) + (d/k) lg n, rounded up to a
/// multiple of d. Logarithms are base 2. With k = d this collapses to
/// 2d lg(en/d) + lg n.
pub fn stage1_test_count(n: u64, d: u32, k: u32) -> Result<u32> {
    let t = stage1_test_count_big(&BigUint::from(n), d, k)?;
    u32::try_from(t).map_err(|_| Error::input("t does not fit in 32 bits"))
}

/// Arbitrary-precision n variant used by the comparison tables.
pub fn stage1_test_count_big(n: &BigUint, d: u32, k: u32) -> Result<u64> {
    if d == 0 || k == 0 {
        return Err(Error::input("d and k must be at least 1"));
    }
    if BigUint::from(d) >= *n {
        return Err(Error::input(format!("d={d} must be smaller than n")));
    }
    let lg_n = log2_big(n);
    let lg_e = std::f64::consts::E.log2();
    let (d, k) = (f64::from(d), f64::from(k));
    // lg(en/d) = lg e + lg n - lg d
    let raw = (d * d / k) * (lg_e + lg_n - d.log2())
        + d * (lg_e + lg_n - k.log2())
        + (d / k) * lg_n;
    let t0 = raw.ceil() as u64;
    let d = d as u64;
    Ok(t0.div_ceil(d) * d)
}

/// Build the 2t x n injection matrix. Columns are processed in ascending
/// order; column j draws t/d distinct rows from its own seeded substream,
/// so the result is a pure function of (n, d, t, seed).
pub fn build_rw_matrix(params: &RwParams) -> Result<TestMatrix> {
    let rows_total = params.rows();
    let per_column = params.injections();
    let mut rows: Vec<Vec<u64>> = vec![Vec::new(); rows_total];
    for j in 0..params.n {
        let mut rng = column_rng(params.seed, j);
        for r in sample_distinct(&mut rng, rows_total, per_column) {
            rows[r].push(j);
        }
    }
    TestMatrix::new(
        params.n,
        params.d,
        rows,
        MethodParams::Rw {
            tparam: params.tparam,
            k: params.k,
            seed: params.seed,
            generator: GENERATOR_NAME.to_string(),
        },
    )
}

fn column_rng(seed: u64, column: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(column);
    rng
}

/// Uniform draw from [0, m) by rejection; no modulo bias.
fn uniform(rng: &mut impl RngCore, m: u64) -> u64 {
    debug_assert!(m > 0);
    let zone = u64::MAX - u64::MAX % m;
    loop {
        let v = rng.next_u64();
        if v < zone {
            return v % m;
        }
    }
}

/// `count` distinct values from [0, m), ascending: partial Fisher-Yates.
fn sample_distinct(rng: &mut impl RngCore, m: usize, count: usize) -> Vec<usize> {
    debug_assert!(count <= m);
    let mut pool: Vec<usize> = (0..m).collect();
    for i in 0..count {
        let j = i + uniform(rng, (m - i) as u64) as usize;
        pool.swap(i, j);
    }
    pool.truncate(count);
    pool.sort_unstable();
    pool
}

/// Record of one two-stage run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoStageTranscript {
    /// Items surviving stage-1 negative elimination.
    pub stage1_candidates: DefectiveSet,
    /// Individual tests performed in stage 2 (zero when failed).
    pub stage2_tests: usize,
    /// Candidates whose individual test was positive.
    pub final_set: DefectiveSet,
    /// Stage 1 left d+k or more candidates; the construction's
    /// low-probability failure. Retry with a fresh seed.
    pub failed: bool,
}

impl fmt::Display for TwoStageTranscript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "candidates={}", self.stage1_candidates)?;
        writeln!(f, "stage2_tests={}", self.stage2_tests)?;
        writeln!(f, "final={}", self.final_set)?;
        write!(f, "failed={}", self.failed)
    }
}

/// Run the full protocol against a subset-query oracle. The oracle is
/// invoked once per stage-1 row (in row order) and then once per surviving
/// candidate (ascending); it must answer consistently with a fixed hidden
/// defective set of size at most d.
pub fn two_stage_identify<F>(params: &RwParams, mut oracle: F) -> Result<TwoStageTranscript>
where
    F: FnMut(&[u64]) -> bool,
{
    let matrix = build_rw_matrix(params)?;
    let outcomes: Vec<bool> = matrix.rows().iter().map(|row| oracle(row)).collect();

    let mut eliminated = vec![false; params.n as usize];
    for (row, &positive) in matrix.rows().iter().zip(&outcomes) {
        if !positive {
            for &j in row {
                eliminated[j as usize] = true;
            }
        }
    }
    let candidates: Vec<u64> = (0..params.n).filter(|&j| !eliminated[j as usize]).collect();

    if candidates.len() >= (params.d + params.k) as usize {
        return Ok(TwoStageTranscript {
            stage1_candidates: DefectiveSet::new(candidates),
            stage2_tests: 0,
            final_set: DefectiveSet::empty(),
            failed: true,
        });
    }

    let mut final_items = Vec::new();
    for &c in &candidates {
        if oracle(&[c]) {
            final_items.push(c);
        }
    }
    let final_set = DefectiveSet::new(final_items);

    // a positive pooled test must contain a confirmed defective; anything
    // else means the oracle contradicted itself across stages
    for (i, (row, &positive)) in matrix.rows().iter().zip(&outcomes).enumerate() {
        if positive && !row.iter().any(|&j| final_set.contains(j)) {
            return Err(Error::ProtocolViolation(format!(
                "test {i} was positive but contains no confirmed defective"
            )));
        }
    }

    Ok(TwoStageTranscript {
        stage2_tests: candidates.len(),
        stage1_candidates: DefectiveSet::new(candidates),
        final_set,
        failed: false,
    })
}

/// Outcome of one simulated trial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialReport {
    pub seed: u64,
    pub hidden: DefectiveSet,
    pub transcript: TwoStageTranscript,
}

impl TrialReport {
    /// Exact identification: not failed and final equals hidden.
    pub fn identified(&self) -> bool {
        !self.transcript.failed && self.transcript.final_set == self.hidden
    }

    /// No non-defective ever reported, failed runs included.
    pub fn sound(&self) -> bool {
        self.transcript
            .final_set
            .items()
            .iter()
            .all(|&j| self.hidden.contains(j))
    }
}

/// How trial batches execute.
#[derive(Debug, Clone, Copy)]
pub struct TrialOptions {
    pub parallel: bool,
}

impl Default for TrialOptions {
    fn default() -> Self {
        TrialOptions {
            parallel: cfg!(feature = "parallel"),
        }
    }
}

/// A batch of seeded protocol simulations. Trial i uses matrix seed
/// base_seed + i; reports come back in trial order regardless of worker
/// count, so batches are reproducible.
#[derive(Debug, Clone, Copy)]
pub struct TrialBatch {
    pub params: RwParams,
    /// Seed of trial 0; the matrix seed in `params` is ignored.
    pub base_seed: u64,
    pub trials: usize,
}

impl TrialBatch {
    /// Fresh hidden sets of `hidden_size` items, drawn per trial from a
    /// substream independent of the matrix seeds.
    pub fn run_random(&self, hidden_size: usize, opts: TrialOptions) -> Result<Vec<TrialReport>> {
        let run_one = |i: usize| -> Result<TrialReport> {
            let hidden = draw_hidden(self.base_seed, i as u64, self.params.n, hidden_size);
            self.run_one(i, &hidden)
        };
        run_batch(self.trials, opts.parallel, run_one)
    }

    /// The same hidden set against every seed.
    pub fn run_fixed(&self, hidden: &DefectiveSet, opts: TrialOptions) -> Result<Vec<TrialReport>> {
        let run_one = |i: usize| -> Result<TrialReport> { self.run_one(i, hidden) };
        run_batch(self.trials, opts.parallel, run_one)
    }

    fn run_one(&self, index: usize, hidden: &DefectiveSet) -> Result<TrialReport> {
        let seed = self.base_seed.wrapping_add(index as u64);
        let params = RwParams { seed, ..self.params };
        let transcript = two_stage_identify(&params, |pool| {
            pool.iter().any(|j| hidden.contains(*j))
        })?;
        Ok(TrialReport {
            seed,
            hidden: hidden.clone(),
            transcript,
        })
    }
}

fn run_batch<F>(trials: usize, parallel: bool, run_one: F) -> Result<Vec<TrialReport>>
where
    F: Fn(usize) -> Result<TrialReport> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return (0..trials).into_par_iter().map(run_one).collect();
    }
    let _ = parallel;
    (0..trials).map(run_one).collect()
}

/// Distinct hidden items for trial `index`, drawn from a substream
/// independent of the matrix seeds.
pub fn draw_hidden(base_seed: u64, index: u64, n: u64, size: usize) -> DefectiveSet {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed ^ 0x9e37_79b9_7f4a_7c15);
    rng.set_stream(index);
    let mut items = Vec::with_capacity(size);
    while items.len() < size {
        let candidate = uniform(&mut rng, n);
        if !items.contains(&candidate) {
            items.push(candidate);
        }
    }
    DefectiveSet::new(items)
}
