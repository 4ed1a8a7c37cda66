//! Fixed points of `psi_p(x) = x^x mod p`.
//!
//! A unit `x` is fixed exactly when `x^(x-1) = 1`, i.e. when its multiplicative
//! order `d` divides `x - 1`. The census kernel therefore walks the divisors
//! `d` of `p - 1` and, for each one, looks only at the elements of order `d`
//! that are `1 mod d`. Per divisor it picks the cheaper of two routes:
//!
//! - walk the cyclic subgroup of order `d` (`d` multiplications), or
//! - walk the progression `x = 1 + j d` and test `x^d = 1` (`(p-2)/d`
//!   exponentiations).
//!
//! The cost is roughly `sum_d min(d, (p/d) log d)` per prime instead of
//! `p log p` for the definition.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{
    add_mod, factorize, gcd, inv_mod, is_prime, is_qth_power_residue, mod_pow, mul_mod, primitive_root,
    FactoredInteger, Factorizer, PrimeSegments, DEFAULT_SEGMENT,
};
use crate::error::{Error, Result};

/// Largest prime [`image_census`] will materialize a value table for.
pub const DEFAULT_IMAGE_LIMIT: u64 = 1 << 26;

/// Distinct values and colliding pairs of `psi_p` on `[1, p-1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageCensus {
    pub image_size: u64,
    /// `#{(x, y) : x^x = y^y}`, diagonal included.
    pub collision_count: u64,
    /// Multiplicity of the value 1.
    pub preimages_of_one: u64,
}

/// Per-prime census row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeCensusRecord {
    pub p: u64,
    pub fixed_point_count: u64,
    pub in_a: bool,
    pub special: bool,
    /// Present only for primes at or below the scan's image limit.
    pub image: Option<ImageCensus>,
}

pub fn psi(x: u64, p: u64) -> Result<u64> {
    if x == 0 || x >= p {
        return Err(Error::domain(format!("{x} is outside [1, {}]", p - 1)));
    }
    Ok(mod_pow(x, x, p))
}

/// Sorted fixed points of `psi_p`, given the factorization of `p - 1`.
pub fn fixed_points_with(p: u64, p_minus_1: &FactoredInteger) -> Vec<u64> {
    debug_assert_eq!(p_minus_1.value(), p - 1);
    let mut found = vec![1];
    if p < 5 {
        return found;
    }
    let g = primitive_root(p, p_minus_1);
    let divisors = p_minus_1
        .divisors_with_phi()
        .expect("p - 1 below 2^64 has far fewer divisors than the cap");

    for (d, _) in divisors {
        // d = 2 gives x = p - 1 (never fixed); d = p - 1 leaves no room for x = 1 + d.
        if d < 3 || d >= p - 1 {
            continue;
        }
        let steps = (p - 2) / d;
        let bits = 64 - d.leading_zeros() as u64;
        if d <= steps * (bits + bits / 2 + 2) {
            let h = mod_pow(g, (p - 1) / d, p);
            let mut y = 1;
            for k in 1..d {
                y = mul_mod(y, h, p);
                if y % d == 1 && gcd(k, d) == 1 {
                    found.push(y);
                }
            }
        } else {
            let order_primes: Vec<u64> = p_minus_1
                .factors()
                .iter()
                .map(|&(q, _)| q)
                .filter(|q| d % q == 0)
                .collect();
            for j in 1..=steps {
                let x = 1 + j * d;
                if mod_pow(x, d, p) == 1 && order_primes.iter().all(|&q| mod_pow(x, d / q, p) != 1) {
                    found.push(x);
                }
            }
        }
    }
    found.sort_unstable();
    found
}

/// `F(p)`: number of `x` in `[1, p-1]` with `x^x = x mod p`.
pub fn count_fixed_points(p: u64) -> u64 {
    if p < 3 {
        return 1;
    }
    fixed_points_with(p, &factorize(p - 1)).len() as u64
}

/// `F(p)` straight from the definition.
pub fn count_fixed_points_direct(p: u64) -> u64 {
    (1..p).filter(|&x| mod_pow(x, x, p) == x).count() as u64
}

/// `p = 3 mod 8` with `(p - 1)/2` prime; such primes have no nontrivial fixed point.
pub fn is_special_prime(p: u64) -> bool {
    p % 8 == 3 && is_prime((p - 1) / 2)
}

/// Checks one instance of the `q`-th power construction.
///
/// With `x = 1 + beta (p-1)/q`, returns `(x^(x-1) = 1, (q - beta)/q is a q-th power)`;
/// the two always agree.
pub fn constructive_check(p: u64, q: u64, beta: u64) -> Result<(bool, bool)> {
    if q < 2 || (p - 1) % q != 0 {
        return Err(Error::domain(format!("{q} does not divide {p} - 1")));
    }
    if beta == 0 || beta >= q {
        return Err(Error::domain(format!("beta = {beta} is outside [1, {}]", q - 1)));
    }
    let x = 1 + beta * ((p - 1) / q);
    let direct = mod_pow(x, x - 1, p) == 1;
    let q_inv = inv_mod(q % p, p).ok_or_else(|| Error::domain(format!("{q} is not invertible mod {p}")))?;
    let candidate = mul_mod(q - beta, q_inv, p);
    let criterion = is_qth_power_residue(candidate, p, q)?;
    Ok((direct, criterion))
}

/// Value multiplicities of `psi_p`, indexed by residue.
pub fn image_multiplicities(p: u64, limit: u64) -> Result<Vec<u32>> {
    if p > limit {
        return Err(Error::resource("image census prime", p as u128, limit as u128));
    }
    let mut mult = vec![0u32; p as usize];
    for x in 1..p {
        mult[mod_pow(x, x, p) as usize] += 1;
    }
    Ok(mult)
}

pub fn image_census(p: u64) -> Result<ImageCensus> {
    image_census_with(p, DEFAULT_IMAGE_LIMIT)
}

pub fn image_census_with(p: u64, limit: u64) -> Result<ImageCensus> {
    let mult = image_multiplicities(p, limit)?;
    let mut image_size = 0;
    let mut collision_count = 0;
    for &m in &mult {
        if m > 0 {
            image_size += 1;
            collision_count += m as u64 * m as u64;
        }
    }
    Ok(ImageCensus {
        image_size,
        collision_count,
        preimages_of_one: mult.get(1).copied().unwrap_or(0) as u64,
    })
}

/// `T_f(p) = #{x in [1, p-1] : x^f(x) = 1 mod p}`.
///
/// `coeffs` lists `f` constant term first. The exponent is reduced mod
/// `p - 1`, so negative coefficients are allowed.
pub fn count_power_congruence(p: u64, coeffs: &[i64]) -> u64 {
    // p = 2 has the single unit 1, whose every power is 1.
    let m = (p - 1).max(1);
    let lifted: Vec<u64> = coeffs.iter().map(|&c| c.rem_euclid(m as i64) as u64).collect();
    (1..p)
        .filter(|&x| {
            let xm = x % m;
            let e = lifted.iter().rev().fold(0u64, |acc, &c| add_mod(mul_mod(acc, xm, m), c, m));
            mod_pow(x, e, p) == 1
        })
        .count() as u64
}

/// Census record for one prime.
pub fn census_record(p: u64, p_minus_1: &FactoredInteger, image_limit: u64) -> PrimeCensusRecord {
    let fixed_point_count = if p < 3 { 1 } else { fixed_points_with(p, p_minus_1).len() as u64 };
    let image = if p >= 3 && p <= image_limit {
        image_census_with(p, image_limit).ok()
    } else {
        None
    };
    PrimeCensusRecord {
        p,
        fixed_point_count,
        in_a: fixed_point_count == 1,
        special: p >= 3 && is_special_prime(p),
        image,
    }
}

/// Options for [`scan_census`].
#[derive(Debug, Clone, Copy)]
pub struct CensusConfig {
    /// First prime considered (inclusive).
    pub start: u64,
    pub n_max: u64,
    pub segment: u64,
    /// Primes up to this bound also get an [`ImageCensus`]; `0` disables it.
    pub image_limit: u64,
}

impl CensusConfig {
    pub fn new(n_max: u64) -> Self {
        CensusConfig {
            start: 2,
            n_max,
            segment: DEFAULT_SEGMENT,
            image_limit: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CensusSummary {
    pub primes: u64,
    pub in_a: u64,
    pub nontrivial_fixed_points: u64,
}

/// Visits every prime in `[start, n_max]` in ascending order.
///
/// Each sieve window is processed in parallel on the ambient rayon pool and
/// handed to `emit` in ascending `p`, so the output does not depend on the
/// worker count. The first error from `emit` stops the scan.
pub fn scan_census<E, F>(config: &CensusConfig, mut emit: F) -> std::result::Result<CensusSummary, E>
where
    F: FnMut(&PrimeCensusRecord) -> std::result::Result<(), E>,
{
    let mut summary = CensusSummary::default();
    if config.n_max < 2 {
        return Ok(summary);
    }
    let factorizer = Factorizer::new(config.n_max);
    for window in PrimeSegments::new(config.start, config.n_max, config.segment) {
        let records: Vec<PrimeCensusRecord> = window
            .par_iter()
            .with_min_len(64)
            .map(|&p| census_record(p, &factorizer.factorize(p - 1), config.image_limit))
            .collect();
        for rec in &records {
            summary.primes += 1;
            summary.in_a += rec.in_a as u64;
            summary.nontrivial_fixed_points += rec.fixed_point_count - 1;
            emit(rec)?;
        }
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::sieve_primes;

    #[test]
    fn psi_examples() {
        assert_eq!(psi(1, 101).unwrap(), 1);
        assert_eq!(psi(2, 5).unwrap(), 4);
        assert_eq!(psi(4, 5).unwrap(), 1);
        assert!(psi(0, 5).is_err());
        assert!(psi(5, 5).is_err());
    }

    #[test]
    fn fixed_point_examples() {
        assert_eq!(count_fixed_points(3), 1);
        assert_eq!(count_fixed_points(11), 1);
        assert_eq!(count_fixed_points(13), 2);
        assert_eq!(fixed_points_with(13, &factorize(12)), vec![1, 5]);
    }

    #[test]
    fn kernel_matches_definition() {
        for p in sieve_primes(10_000).unwrap() {
            assert_eq!(count_fixed_points(p), count_fixed_points_direct(p), "p = {p}");
        }
    }

    #[test]
    fn kernel_lists_exactly_the_fixed_points() {
        for p in sieve_primes(3000).unwrap() {
            let want: Vec<u64> = (1..p).filter(|&x| mod_pow(x, x, p) == x).collect();
            assert_eq!(fixed_points_with(p, &factorize(p - 1)), want, "p = {p}");
        }
    }

    #[test]
    fn special_primes() {
        assert!(is_special_prime(11));
        assert!(is_special_prime(59));
        assert!(!is_special_prime(13));
        assert!(!is_special_prime(7));
    }

    #[test]
    fn constructive_examples() {
        for beta in 1..3 {
            let (d, c) = constructive_check(13, 3, beta).unwrap();
            assert_eq!(d, c);
        }
        for beta in 1..5 {
            let (d, c) = constructive_check(11, 5, beta).unwrap();
            assert_eq!(d, c);
        }
        assert!(constructive_check(13, 5, 1).is_err());
        assert!(constructive_check(13, 3, 3).is_err());
    }

    #[test]
    fn image_example_p5() {
        let c = image_census(5).unwrap();
        assert_eq!(c.image_size, 3);
        assert_eq!(c.collision_count, 6);
        assert_eq!(c.preimages_of_one, 2);
        assert!(matches!(image_census_with(101, 100), Err(Error::Resource { .. })));
    }

    #[test]
    fn power_congruence_examples() {
        assert_eq!(count_power_congruence(13, &[-1, 1]), 2);
        assert_eq!(count_power_congruence(13, &[0]), 12);
        assert_eq!(count_power_congruence(13, &[]), 12);
        assert_eq!(count_power_congruence(13, &[1]), 1);
        assert_eq!(count_power_congruence(2, &[-1, 1]), 1);
    }

    #[test]
    fn scan_emits_in_order_and_propagates_errors() {
        let mut seen = Vec::new();
        let cfg = CensusConfig { segment: 100, ..CensusConfig::new(1000) };
        let summary = scan_census::<(), _>(&cfg, |r| {
            seen.push(r.p);
            Ok(())
        })
        .unwrap();
        assert_eq!(seen, sieve_primes(1000).unwrap());
        assert_eq!(summary.primes, 168);

        let mut n = 0;
        let err = scan_census(&cfg, |_| {
            n += 1;
            if n == 10 { Err("sink full") } else { Ok(()) }
        });
        assert_eq!(err, Err("sink full"));
    }
}
