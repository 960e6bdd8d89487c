//! Chinese Remainder Sieve construction.
//!
//! Tests are residue classes modulo a set of prime powers whose product is
//! at least n^d. Any item is determined by its residues modulo a sub-product
//! that reaches n, so negative elimination identifies up to d defectives
//! exactly. The module provides the exponent-1 baseline plan, the
//! backtracking exponent optimization, matrix emission, and the analytic
//! test-count bounds.

use num_bigint::BigUint;
use num_traits::One;

use crate::bignum::ln_big;
use crate::error::{Error, Result};
use crate::matrix::{MethodParams, TestMatrix};
use crate::primes::PrimeStream;

/// One modulus of a plan: prime and exponent (exponent >= 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimePower {
    pub prime: u64,
    pub exponent: u32,
}

impl PrimePower {
    pub fn value(&self) -> u64 {
        self.prime.pow(self.exponent)
    }
}

/// Chosen prime powers with product >= n^d. The cost (sum of the powers)
/// equals the row count of the matrix the plan generates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimePowerPlan {
    entries: Vec<PrimePower>,
    target_n: BigUint,
    target_d: u32,
}

impl PrimePowerPlan {
    /// Assemble a plan from explicit entries, checking the product
    /// requirement under exact arithmetic.
    pub fn new(entries: Vec<PrimePower>, target_n: BigUint, target_d: u32) -> Result<Self> {
        if target_d == 0 {
            return Err(Error::input("d must be at least 1"));
        }
        for w in entries.windows(2) {
            if w[0].prime >= w[1].prime {
                return Err(Error::input("plan primes must be distinct and ascending"));
            }
        }
        if entries.iter().any(|e| e.exponent == 0) {
            return Err(Error::input("plan exponents must be at least 1"));
        }
        let plan = PrimePowerPlan {
            entries,
            target_n,
            target_d,
        };
        if plan.product() < plan.target() {
            return Err(Error::input(format!(
                "plan product {} is below the n^d target",
                plan.product()
            )));
        }
        Ok(plan)
    }

    pub fn entries(&self) -> &[PrimePower] {
        &self.entries
    }

    pub fn target_n(&self) -> &BigUint {
        &self.target_n
    }

    pub fn target_d(&self) -> u32 {
        self.target_d
    }

    /// n^d, the product the plan must reach.
    pub fn target(&self) -> BigUint {
        self.target_n.pow(self.target_d)
    }

    /// Exact product of the prime powers.
    pub fn product(&self) -> BigUint {
        self.entries
            .iter()
            .map(|e| BigUint::from(e.prime).pow(e.exponent))
            .product()
    }

    /// Total number of tests: the sum of the prime powers.
    pub fn cost(&self) -> u64 {
        self.entries.iter().map(|e| e.value()).sum()
    }

    /// Largest prime appearing in the plan.
    pub fn largest_prime(&self) -> Option<u64> {
        self.entries.last().map(|e| e.prime)
    }
}

/// The exponent-1 baseline: the smallest prefix of the primes whose product
/// reaches n^d. (The product threshold is `>= n^d`, the form the decoding
/// argument needs, not the strict `>` of the driver loop it replaces.)
pub fn select_prime_plan(n: &BigUint, d: u32) -> Result<PrimePowerPlan> {
    if d == 0 {
        return Err(Error::input("d must be at least 1"));
    }
    if BigUint::from(d) >= *n {
        return Err(Error::input(format!("d={d} must be smaller than n={n}")));
    }
    let target = n.pow(d);
    let mut entries = Vec::new();
    let mut product = BigUint::one();
    for p in PrimeStream::new() {
        entries.push(PrimePower {
            prime: p,
            exponent: 1,
        });
        product *= p;
        if product >= target {
            break;
        }
    }
    Ok(PrimePowerPlan {
        entries,
        target_n: n.clone(),
        target_d: d,
    })
}

/// Result of the exponent search: one exponent per input prime (zero means
/// the prime is unused) and the total cost over the used powers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExponentSearch {
    pub exponents: Vec<u32>,
    pub cost: u64,
}

/// Find exponents e_j >= 0 with each p_j^{e_j} <= maxpow and product over
/// the used powers at least `target`, minimizing the sum of the used powers.
/// Cost ties break toward the lexicographically smallest exponent list
/// (smallest-prime exponent first), matching the recursive search this
/// implements. The search is exact; admissible cost/capacity pruning only
/// discards branches that provably cannot reach the optimum.
pub fn optimize_exponents(
    primes: &[u64],
    maxpow: u64,
    target: &BigUint,
) -> Result<ExponentSearch> {
    for w in primes.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::input("primes must be distinct and ascending"));
        }
    }
    if target <= &BigUint::one() {
        return Ok(ExponentSearch {
            exponents: vec![0; primes.len()],
            cost: 0,
        });
    }
    let searcher = Searcher::new(primes, maxpow, target);
    searcher.run().ok_or_else(|| {
        Error::NoSolution(format!(
            "no exponents of {} primes with powers <= {maxpow} reach the target",
            primes.len()
        ))
    })
}

/// The full backtracking pipeline: take the baseline plan's primes, cap each
/// power at the largest baseline prime, and search for the cheapest exponent
/// assignment reaching n^d.
pub fn optimize_plan(plan: &PrimePowerPlan) -> Result<PrimePowerPlan> {
    let primes: Vec<u64> = plan.entries().iter().map(|e| e.prime).collect();
    let maxpow = plan
        .largest_prime()
        .ok_or_else(|| Error::input("empty plan"))?;
    let target = plan.target();
    let search = optimize_exponents(&primes, maxpow, &target)?;
    let entries = primes
        .iter()
        .zip(&search.exponents)
        .filter(|(_, &e)| e > 0)
        .map(|(&p, &e)| PrimePower {
            prime: p,
            exponent: e,
        })
        .collect();
    PrimePowerPlan::new(entries, plan.target_n().clone(), plan.target_d())
}

struct Searcher {
    primes: Vec<u64>,
    maxpow: u64,
    target: BigUint,
    /// capacity[m]: product of the largest allowed power of each of the
    /// first m primes; a subproblem on the first m primes is infeasible
    /// when its target exceeds this.
    capacity: Vec<BigUint>,
    /// Fractional covering bounds per prefix length: increments (cost,
    /// log-coverage) sorted by cost per unit coverage, as prefix sums.
    lp: Vec<LpTable>,
}

struct LpTable {
    cost_prefix: Vec<f64>,
    cov_prefix: Vec<f64>,
    ratio: Vec<f64>,
}

impl LpTable {
    /// Minimum fractional cost to assemble `need` units of log-coverage,
    /// or None when even the full table falls short.
    fn bound(&self, need: f64) -> Option<f64> {
        if need <= 0.0 {
            return Some(0.0);
        }
        let k = self.cov_prefix.partition_point(|&c| c < need);
        if k == self.cov_prefix.len() {
            return None;
        }
        let (prev_cost, prev_cov) = if k == 0 {
            (0.0, 0.0)
        } else {
            (self.cost_prefix[k - 1], self.cov_prefix[k - 1])
        };
        Some(prev_cost + (need - prev_cov) * self.ratio[k])
    }
}

impl Searcher {
    fn new(primes: &[u64], maxpow: u64, target: &BigUint) -> Self {
        let mut capacity = Vec::with_capacity(primes.len() + 1);
        capacity.push(BigUint::one());
        for &p in primes {
            let cap = max_power_leq(p, maxpow);
            let prev = capacity.last().unwrap().clone();
            capacity.push(prev * BigUint::from(cap));
        }

        // increments (j, e-1 -> e): cost p^e - p^(e-1) (level 1 costs p),
        // coverage ln p; ratios increase with e, so a greedy fractional
        // cover never takes a level before its predecessor
        let mut lp = Vec::with_capacity(primes.len() + 1);
        lp.push(LpTable {
            cost_prefix: vec![],
            cov_prefix: vec![],
            ratio: vec![],
        });
        let mut items: Vec<(f64, f64)> = Vec::new(); // (ratio, cost)
        for &p in primes {
            let lnp = (p as f64).ln();
            let mut level = 1u32;
            let mut prev = 1u64;
            while let Some(val) = p.checked_pow(level) {
                if val > maxpow {
                    break;
                }
                let cost = (val - prev) as f64;
                items.push((cost / lnp, cost));
                prev = val;
                level += 1;
            }
            let mut sorted = items.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut cost_prefix = Vec::with_capacity(sorted.len());
            let mut cov_prefix = Vec::with_capacity(sorted.len());
            let mut ratio = Vec::with_capacity(sorted.len());
            let (mut cacc, mut vacc) = (0.0, 0.0);
            for (r, c) in &sorted {
                cacc += c;
                vacc += c / r;
                cost_prefix.push(cacc);
                cov_prefix.push(vacc);
                ratio.push(*r);
            }
            lp.push(LpTable {
                cost_prefix,
                cov_prefix,
                ratio,
            });
        }

        Searcher {
            primes: primes.to_vec(),
            maxpow,
            target: target.clone(),
            capacity,
            lp,
        }
    }

    fn run(mut self) -> Option<ExponentSearch> {
        let mut best: Option<(u64, Vec<u32>)> = None;
        let mut exponents = vec![0u32; self.primes.len()];
        let target = self.target.clone();
        self.descend(self.primes.len(), &target, 0, &mut exponents, &mut best);
        best.map(|(cost, exponents)| ExponentSearch { exponents, cost })
    }

    /// Decide the exponent of prime m-1 (largest remaining); `target` is the
    /// residual product requirement under iterated ceiling division, which
    /// preserves the exact product constraint.
    fn descend(
        &mut self,
        m: usize,
        target: &BigUint,
        cost: u64,
        exponents: &mut Vec<u32>,
        best: &mut Option<(u64, Vec<u32>)>,
    ) {
        if target.is_one() {
            for e in exponents.iter_mut().take(m) {
                *e = 0;
            }
            consider(best, cost, exponents);
            return;
        }
        if m == 0 || self.capacity[m] < *target {
            return;
        }
        if let Some((best_cost, _)) = best {
            let need = ln_big(target) * (1.0 - 1e-12);
            // cushion absorbs float error; only strictly-worse branches are
            // cut, so cost ties still reach the lexicographic compare. A
            // None bound is left to the exact capacity check above.
            if let Some(lb) = self.lp[m].bound(need) {
                if cost as f64 + lb * (1.0 - 1e-9) - 1.0 > *best_cost as f64 {
                    return;
                }
            }
        }

        let p = self.primes[m - 1];
        // exponent 1 first: the all-ones completion is feasible whenever the
        // caller passes a baseline plan, which seeds the incumbent early
        self.try_exponent(m, p, 1, target, cost, exponents, best);
        self.try_exponent(m, p, 0, target, cost, exponents, best);
        let mut e = 2u32;
        while let Some(val) = p.checked_pow(e) {
            if val > self.maxpow {
                break;
            }
            self.try_exponent(m, p, e, target, cost, exponents, best);
            e += 1;
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn try_exponent(
        &mut self,
        m: usize,
        p: u64,
        e: u32,
        target: &BigUint,
        cost: u64,
        exponents: &mut Vec<u32>,
        best: &mut Option<(u64, Vec<u32>)>,
    ) {
        let value = match p.checked_pow(e) {
            Some(v) if v <= self.maxpow => v,
            _ => return,
        };
        let added = if e == 0 { 0 } else { value };
        let residual = ceil_div(target, value);
        exponents[m - 1] = e;
        self.descend(m - 1, &residual, cost + added, exponents, best);
    }
}

/// Keep the (cost, exponent list) minimum, comparing cost first and the
/// exponent list lexicographically on ties.
fn consider(best: &mut Option<(u64, Vec<u32>)>, cost: u64, exponents: &[u32]) {
    let better = match best {
        None => true,
        Some((bc, bv)) => cost < *bc || (cost == *bc && exponents < bv.as_slice()),
    };
    if better {
        *best = Some((cost, exponents.to_vec()));
    }
}

fn ceil_div(target: &BigUint, divisor: u64) -> BigUint {
    if divisor == 1 {
        return target.clone();
    }
    (target + BigUint::from(divisor - 1)) / BigUint::from(divisor)
}

fn max_power_leq(p: u64, maxpow: u64) -> u64 {
    let mut best = 1u64;
    let mut e = 1u32;
    while let Some(val) = p.checked_pow(e) {
        if val > maxpow {
            break;
        }
        best = val;
        e += 1;
    }
    best
}

/// Emit the residue-class matrix of a plan: one submatrix per prime power,
/// one row per residue x in [0, p^e), each row holding the items congruent
/// to x. Row order follows the plan; residues ascend within a submatrix.
pub fn build_crs_matrix(n: u64, plan: &PrimePowerPlan) -> Result<TestMatrix> {
    if n < 2 {
        return Err(Error::input("need at least two items"));
    }
    if plan.product() < BigUint::from(n).pow(plan.target_d()) {
        return Err(Error::input(
            "plan product does not reach n^d for the requested n",
        ));
    }
    let mut rows = Vec::with_capacity(plan.cost() as usize);
    for entry in plan.entries() {
        let modulus = entry.value();
        for x in 0..modulus {
            let row: Vec<u64> = (x..n).step_by(modulus as usize).collect();
            rows.push(row);
        }
    }
    let prime_powers = plan
        .entries()
        .iter()
        .map(|e| (e.prime, e.exponent))
        .collect();
    TestMatrix::new(
        n,
        plan.target_d(),
        rows,
        MethodParams::Crs { prime_powers },
    )
}

/// Closed-form bound on the prime sum: x^2 / (2 ln x) * (1 + 1.2762/ln x),
/// from the prime-counting estimate pi(x) < x/ln x (1 + 1.2762/ln x) and the
/// average of the first primes being half the largest. The exact sigma(x)
/// stays strictly below it for every integer x >= 2.
pub fn sigma_bound(x: u64) -> Result<f64> {
    if x < 2 {
        return Err(Error::input("sigma bound requires x >= 2"));
    }
    let x = x as f64;
    let lnx = x.ln();
    Ok(x * x / (2.0 * lnx) * (1.0 + 1.2762 / lnx))
}

/// Closed-form bound on the exponent-1 test count: the sigma bound evaluated
/// at ceil(2 d ln n), the point where the product of all primes up to it
/// reaches n^d.
pub fn test_count_bound(n: &BigUint, d: u32) -> Result<f64> {
    let x = (2.0 * d as f64 * ln_big(n)).ceil();
    if x < 2.0 {
        return Err(Error::input(
            "test count bound requires ceil(2 d ln n) >= 2",
        ));
    }
    sigma_bound(x as u64)
}

/// Analytic bounds next to the realized plan cost.
#[derive(Debug, Clone)]
pub struct BoundReport {
    /// Prime-sum bound at the plan's largest prime (bounds the exponent-1
    /// cost).
    pub sigma_bound: f64,
    /// Test-count bound from (n, d) alone.
    pub count_bound: f64,
    /// Tests the plan actually uses.
    pub actual_t: u64,
    /// Tests any single item appears in: one per modulus.
    pub sampling_rate: usize,
}

pub fn bound_report(plan: &PrimePowerPlan) -> Result<BoundReport> {
    let largest = plan
        .largest_prime()
        .ok_or_else(|| Error::input("empty plan"))?;
    Ok(BoundReport {
        sigma_bound: sigma_bound(largest.max(2))?,
        count_bound: test_count_bound(plan.target_n(), plan.target_d())?,
        actual_t: plan.cost(),
        sampling_rate: plan.entries().len(),
    })
}
