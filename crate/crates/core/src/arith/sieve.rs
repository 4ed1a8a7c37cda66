//! Segmented sieve of Eratosthenes.
//!
//! Base primes up to `sqrt(hi)` are sieved once; the range is then processed
//! in fixed-size windows, so memory stays `O(sqrt(hi) + segment)`.

use crate::error::{Error, Result};

/// Default largest limit [`sieve_primes`] accepts.
pub const DEFAULT_SIEVE_BUDGET: u64 = 1 << 31;

/// Default window length, in integers.
pub const DEFAULT_SEGMENT: u64 = 1 << 22;

/// Plain sieve for small limits; used for base primes.
pub(crate) fn simple_sieve(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Iterator over the primes of `[lo, hi]`, one window at a time.
#[derive(Debug, Clone)]
pub struct PrimeSegments {
    base: Vec<u64>,
    next_lo: u64,
    hi: u64,
    segment: u64,
    mark: Vec<bool>,
}

impl PrimeSegments {
    pub fn new(lo: u64, hi: u64, segment: u64) -> Self {
        let segment = segment.max(64);
        let root = (hi as f64).sqrt() as u64 + 1;
        PrimeSegments {
            base: simple_sieve(root),
            next_lo: lo.max(2),
            hi,
            segment,
            mark: Vec::new(),
        }
    }

    /// Primes of `[lo, hi]` as one flat iterator.
    pub fn flatten_primes(self) -> impl Iterator<Item = u64> {
        self.flatten()
    }
}

impl Iterator for PrimeSegments {
    /// Primes of the next window.
    type Item = Vec<u64>;

    fn next(&mut self) -> Option<Vec<u64>> {
        if self.next_lo > self.hi {
            return None;
        }
        let lo = self.next_lo;
        let hi = self.hi.min(lo.saturating_add(self.segment - 1));
        match hi.checked_add(1) {
            Some(n) if hi < self.hi => self.next_lo = n,
            _ => self.hi = 0,
        }

        let len = (hi - lo + 1) as usize;
        self.mark.clear();
        self.mark.resize(len, true);
        for &q in &self.base {
            if q * q > hi {
                break;
            }
            let mut start = (lo.div_ceil(q) * q).max(q * q);
            while start <= hi {
                self.mark[(start - lo) as usize] = false;
                start += q;
            }
        }
        let primes = self
            .mark
            .iter()
            .enumerate()
            .filter(|&(_, &is_p)| is_p)
            .map(|(i, _)| lo + i as u64)
            .collect();
        Some(primes)
    }
}

/// All primes `<= limit`, ascending.
pub fn sieve_primes(limit: u64) -> Result<Vec<u64>> {
    sieve_primes_with(limit, DEFAULT_SIEVE_BUDGET, DEFAULT_SEGMENT)
}

pub fn sieve_primes_with(limit: u64, budget: u64, segment: u64) -> Result<Vec<u64>> {
    if limit < 2 {
        return Err(Error::domain(format!("sieve limit {limit} is below 2")));
    }
    if limit > budget {
        return Err(Error::resource("prime sieve limit", limit as u128, budget as u128));
    }
    Ok(PrimeSegments::new(2, limit, segment).flatten().collect())
}
