//! Incremental prime generation and prime-sum helpers.
//!
//! The generator is the classic incremental sieve: a map from each known
//! composite to the primes that witness it, advanced one integer at a time.
//! It needs no precomputed bound, which suits plan construction where the
//! required number of primes depends on a running product.

use std::collections::HashMap;

/// Unbounded ascending stream of primes: 2, 3, 5, 7, 11, ...
pub struct PrimeStream {
    // composite -> primes whose multiple it is; each witness moves to its
    // next multiple when the composite is reached
    witnesses: HashMap<u64, Vec<u64>>,
    next: u64,
}

impl PrimeStream {
    pub fn new() -> Self {
        PrimeStream {
            witnesses: HashMap::new(),
            next: 2,
        }
    }
}

impl Default for PrimeStream {
    fn default() -> Self {
        Self::new()
    }
}

impl Iterator for PrimeStream {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        loop {
            let q = self.next;
            self.next += 1;
            match self.witnesses.remove(&q) {
                None => {
                    // q is prime; its first interesting multiple is q*q
                    self.witnesses.entry(q * q).or_default().push(q);
                    return Some(q);
                }
                Some(ps) => {
                    for p in ps {
                        self.witnesses.entry(q + p).or_default().push(p);
                    }
                }
            }
        }
    }
}

/// All primes `<= limit`, ascending.
pub fn primes_upto(limit: u64) -> Vec<u64> {
    PrimeStream::new().take_while(|&p| p <= limit).collect()
}

/// The first `count` primes, ascending.
pub fn first_primes(count: usize) -> Vec<u64> {
    PrimeStream::new().take(count).collect()
}

/// Exact prime summation sigma(x): the sum of all primes `<= x`.
pub fn sigma_exact(x: u64) -> u64 {
    PrimeStream::new().take_while(|&p| p <= x).sum()
}
