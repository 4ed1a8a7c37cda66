use serde::{Deserialize, Serialize};

use super::modular::is_prime;
use crate::error::{Error, Result};

/// Default cap on the number of divisors [`FactoredInteger::divisors`] will list.
pub const DEFAULT_DIVISOR_CAP: u64 = 1 << 20;

/// A positive integer together with its prime factorization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactoredInteger {
    value: u64,
    factors: Vec<(u64, u32)>,
}

impl FactoredInteger {
    /// Builds from a factor list, checking that the primes are increasing,
    /// actually prime, and multiply out to `value`.
    pub fn from_factors(value: u64, factors: Vec<(u64, u32)>) -> Result<Self> {
        let mut product: u128 = 1;
        let mut last = 1;
        for &(q, e) in &factors {
            if q <= last || e == 0 || !is_prime(q) {
                return Err(Error::domain(format!("invalid factor {q}^{e} of {value}")));
            }
            last = q;
            product = product.saturating_mul((q as u128).saturating_pow(e));
        }
        if value == 0 || product != value as u128 {
            return Err(Error::domain(format!("factors do not multiply to {value}")));
        }
        Ok(FactoredInteger { value, factors })
    }

    pub(crate) fn from_parts_unchecked(value: u64, factors: Vec<(u64, u32)>) -> Self {
        FactoredInteger { value, factors }
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    /// Number of distinct prime divisors.
    pub fn omega(&self) -> usize {
        self.factors.len()
    }

    /// Number of divisors.
    pub fn tau(&self) -> u64 {
        self.factors.iter().map(|&(_, e)| e as u64 + 1).product()
    }

    pub fn largest_prime_factor(&self) -> Option<u64> {
        self.factors.last().map(|&(q, _)| q)
    }

    pub fn euler_phi(&self) -> u64 {
        self.factors
            .iter()
            .map(|&(q, e)| (q - 1) * q.pow(e - 1))
            .product()
    }

    /// All divisors in ascending order.
    pub fn divisors(&self) -> Result<Vec<u64>> {
        self.divisors_capped(DEFAULT_DIVISOR_CAP)
    }

    pub fn divisors_capped(&self, cap: u64) -> Result<Vec<u64>> {
        let mut out: Vec<u64> = self.divisors_with_phi_capped(cap)?.into_iter().map(|(d, _)| d).collect();
        out.sort_unstable();
        Ok(out)
    }

    /// Every divisor `d` paired with `phi(d)`, in generation order (not sorted).
    pub fn divisors_with_phi(&self) -> Result<Vec<(u64, u64)>> {
        self.divisors_with_phi_capped(DEFAULT_DIVISOR_CAP)
    }

    fn divisors_with_phi_capped(&self, cap: u64) -> Result<Vec<(u64, u64)>> {
        let tau = self.tau();
        if tau > cap {
            return Err(Error::resource("divisor enumeration", tau as u128, cap as u128));
        }
        let mut out = Vec::with_capacity(tau as usize);
        out.push((1u64, 1u64));
        for &(q, e) in &self.factors {
            let len = out.len();
            let mut qk = 1;
            for k in 1..=e {
                let phi_qk = if k == 1 { q - 1 } else { qk * (q - 1) };
                qk *= q;
                for i in 0..len {
                    let (d, phi) = out[i];
                    out.push((d * qk, phi * phi_qk));
                }
            }
        }
        Ok(out)
    }
}

/// Factorization of `n >= 1` by trial division.
pub fn factorize(n: u64) -> FactoredInteger {
    assert!(n >= 1, "factorize needs n >= 1");
    let mut factors = Vec::new();
    let mut m = n;
    let mut push = |m: &mut u64, q: u64| {
        let mut e = 0;
        while *m % q == 0 {
            *m /= q;
            e += 1;
        }
        if e > 0 {
            factors.push((q, e));
        }
    };
    push(&mut m, 2);
    push(&mut m, 3);
    let mut q = 5;
    let mut step = 2;
    while q * q <= m {
        push(&mut m, q);
        q += step;
        step = 6 - step;
    }
    if m > 1 {
        factors.push((m, 1));
    }
    FactoredInteger::from_parts_unchecked(n, factors)
}

/// Trial-division factorizer over a precomputed prime table.
///
/// Exact for every `n` up to the square of the largest tabled prime.
#[derive(Debug, Clone)]
pub struct Factorizer {
    primes: Vec<u64>,
}

impl Factorizer {
    /// Table covering all `n <= limit`.
    pub fn new(limit: u64) -> Self {
        // Bertrand: some prime lies in (root, 2 root], so the last tabled
        // prime squared exceeds `limit`.
        let root = (limit as f64).sqrt() as u64 + 2;
        let primes = super::sieve::simple_sieve(2 * root);
        Factorizer { primes }
    }

    pub fn factorize(&self, n: u64) -> FactoredInteger {
        assert!(n >= 1, "factorize needs n >= 1");
        let mut factors = Vec::new();
        let mut m = n;
        for &q in &self.primes {
            if q * q > m {
                break;
            }
            if m % q == 0 {
                let mut e = 0;
                while m % q == 0 {
                    m /= q;
                    e += 1;
                }
                factors.push((q, e));
            }
        }
        if m > 1 {
            debug_assert!(
                self.primes.last().map_or(true, |&l| l * l >= m),
                "{n} is beyond the factorizer's range"
            );
            factors.push((m, 1));
        }
        FactoredInteger::from_parts_unchecked(n, factors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(factorize(12).factors(), &[(2, 2), (3, 1)]);
        assert!(factorize(1).factors().is_empty());
        assert_eq!(factorize(58).factors(), &[(2, 1), (29, 1)]);
        assert_eq!(factorize(12).divisors().unwrap(), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(factorize(1).divisors().unwrap(), vec![1]);
        assert_eq!(factorize(10).divisors().unwrap(), vec![1, 2, 5, 10]);
        assert_eq!(factorize(5).euler_phi(), 4);
        assert_eq!(factorize(6).euler_phi(), 2);
        assert_eq!(factorize(1).euler_phi(), 1);
    }

    #[test]
    fn divisor_cap() {
        let f = factorize(720_720);
        assert_eq!(f.tau(), 240);
        assert!(matches!(f.divisors_capped(100), Err(Error::Resource { .. })));
    }

    #[test]
    fn from_factors_validates() {
        assert!(FactoredInteger::from_factors(12, vec![(2, 2), (3, 1)]).is_ok());
        assert!(FactoredInteger::from_factors(12, vec![(3, 1), (2, 2)]).is_err());
        assert!(FactoredInteger::from_factors(16, vec![(4, 2)]).is_err());
        assert!(FactoredInteger::from_factors(13, vec![(2, 2), (3, 1)]).is_err());
    }

    #[test]
    fn factorizer_matches_plain_trial_division() {
        let fz = Factorizer::new(1_000_000);
        for n in (1..1_000_000).step_by(997) {
            assert_eq!(fz.factorize(n), factorize(n));
        }
        assert_eq!(fz.factorize(999_983), factorize(999_983));
    }
}
