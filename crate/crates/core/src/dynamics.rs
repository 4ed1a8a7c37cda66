//! Orbit statistics of `psi_p` against the `x^2 + 1` baseline, and the
//! random-endomorphism model of the multiplicative group.

use std::fmt;
use std::str::FromStr;

use rand_core::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{factorize, gcd, mod_pow, mul_mod, multiplicative_order, FactoredInteger, PrimeSegments, DEFAULT_SEGMENT};
use crate::error::{Error, Result};
use crate::rng::{substream, uniform_below, DOMAIN_ENDO, DOMAIN_ORBITS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapId {
    /// `x -> x^x mod p` on `[1, p-1]`.
    SelfPower,
    /// `x -> x^2 + 1 mod p` on `[0, p-1]`.
    QuadPlusOne,
}

impl MapId {
    #[inline]
    pub fn step(self, x: u64, p: u64) -> u64 {
        match self {
            MapId::SelfPower => mod_pow(x, x, p),
            MapId::QuadPlusOne => (mul_mod(x, x, p) + 1) % p,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MapId::SelfPower => "self_power",
            MapId::QuadPlusOne => "quad_plus_one",
        }
    }
}

impl fmt::Display for MapId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MapId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "self_power" | "self" | "psi" => Ok(MapId::SelfPower),
            "quad_plus_one" | "quad" => Ok(MapId::QuadPlusOne),
            _ => Err(Error::domain(format!("unknown map `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub map: MapId,
    pub p: u64,
    pub x0: u64,
    pub tail: u64,
    pub cycle: u64,
    /// Distinct elements visited, `tail + cycle`.
    pub orbit_size: u64,
}

pub const ORBIT_CSV_HEADER: &str = "map,p,x0,tail,cycle,orbit_size";

impl OrbitRecord {
    pub fn csv_line(&self) -> String {
        format!("{},{},{},{},{},{}", self.map, self.p, self.x0, self.tail, self.cycle, self.orbit_size)
    }
}

/// Tail and cycle length of the orbit of `x0`.
///
/// Brent's power-of-two search finds the cycle length; a second pass with
/// two pointers `cycle` apart then finds the tail. Memory is constant.
pub fn orbit_stats(map: MapId, p: u64, x0: u64) -> Result<OrbitRecord> {
    let lo = match map {
        MapId::SelfPower => 1,
        MapId::QuadPlusOne => 0,
    };
    if p < 2 || x0 < lo || x0 >= p {
        return Err(Error::domain(format!("start {x0} is outside [{lo}, {}] for {map}", p.saturating_sub(1))));
    }
    let f = |x| map.step(x, p);

    let mut power = 1u64;
    let mut cycle = 1u64;
    let mut tortoise = x0;
    let mut hare = f(x0);
    while tortoise != hare {
        if power == cycle {
            tortoise = hare;
            power *= 2;
            cycle = 0;
        }
        hare = f(hare);
        cycle += 1;
    }

    let mut tortoise = x0;
    let mut hare = x0;
    for _ in 0..cycle {
        hare = f(hare);
    }
    let mut tail = 0;
    while tortoise != hare {
        tortoise = f(tortoise);
        hare = f(hare);
        tail += 1;
    }

    Ok(OrbitRecord {
        map,
        p,
        x0,
        tail,
        cycle,
        orbit_size: tail + cycle,
    })
}

/// One or more orbits per prime in `[lo, hi]`, starts drawn uniformly from
/// `[1, p-1]` on the substream `(master_seed, orbits, p)`.
///
/// Records come back ordered by `(p, draw index)` whatever the pool size.
pub fn sample_orbits(map: MapId, lo: u64, hi: u64, per_prime_starts: u32, master_seed: u64) -> Result<Vec<OrbitRecord>> {
    if per_prime_starts == 0 {
        return Err(Error::domain("per_prime_starts must be at least 1"));
    }
    let mut out = Vec::new();
    for window in PrimeSegments::new(lo.max(3), hi, DEFAULT_SEGMENT) {
        let batch: Vec<Vec<OrbitRecord>> = window
            .par_iter()
            .map(|&p| orbits_for_prime(map, p, per_prime_starts, master_seed))
            .collect();
        out.extend(batch.into_iter().flatten());
    }
    Ok(out)
}

pub fn orbits_for_prime(map: MapId, p: u64, starts: u32, master_seed: u64) -> Vec<OrbitRecord> {
    let mut rng = substream(master_seed, DOMAIN_ORBITS, p);
    (0..starts)
        .map(|_| {
            let x0 = 1 + uniform_below(&mut rng, p - 1);
            orbit_stats(map, p, x0).expect("start drawn inside the domain")
        })
        .collect()
}

/// Normalizations of orbit size used by the histograms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitStatistic {
    /// `log(orbit_size) / log p`.
    LogRatio,
    /// `orbit_size / sqrt(p)`.
    SqrtNormalized,
    /// `orbit_size^2 / (2p)`.
    BirthdayScaled,
}

impl OrbitStatistic {
    pub fn apply(self, rec: &OrbitRecord) -> f64 {
        let n = rec.orbit_size as f64;
        let p = rec.p as f64;
        match self {
            OrbitStatistic::LogRatio => n.ln() / p.ln(),
            OrbitStatistic::SqrtNormalized => n / p.sqrt(),
            OrbitStatistic::BirthdayScaled => n * n / (2.0 * p),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            OrbitStatistic::LogRatio => "log_orbit_over_log_p",
            OrbitStatistic::SqrtNormalized => "orbit_over_sqrt_p",
            OrbitStatistic::BirthdayScaled => "orbit_sq_over_2p",
        }
    }

    /// Default histogram range.
    pub fn default_range(self) -> (f64, f64) {
        match self {
            OrbitStatistic::LogRatio => (0.0, 1.0),
            OrbitStatistic::SqrtNormalized => (0.0, 5.0),
            OrbitStatistic::BirthdayScaled => (0.0, 5.0),
        }
    }
}

pub const DEFAULT_BINS: usize = 60;

/// Equal-width histogram with a fitted normal (sample mean and variance).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub statistic: String,
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub sample_count: u64,
    pub fitted_mean: f64,
    /// Unbiased sample variance; 0 for a single value.
    pub fitted_variance: f64,
}

pub const HISTOGRAM_CSV_HEADER: &str = "bin_lo,bin_hi,count";

impl Histogram {
    /// Values outside `[lo, hi]` land in the end bins.
    pub fn from_values(statistic: &str, values: &[f64], bins: usize, lo: f64, hi: f64) -> Result<Self> {
        if bins == 0 || !(lo < hi) {
            return Err(Error::domain(format!("need bins >= 1 and lo < hi, got {bins} over [{lo}, {hi}]")));
        }
        if values.is_empty() {
            return Err(Error::domain("histogram of an empty sample"));
        }
        let width = (hi - lo) / bins as f64;
        let bin_edges: Vec<f64> = (0..=bins).map(|i| if i == bins { hi } else { lo + width * i as f64 }).collect();
        let mut counts = vec![0u64; bins];
        for &v in values {
            let idx = ((v - lo) / width).floor();
            let idx = if idx.is_nan() || idx < 0.0 { 0 } else { (idx as usize).min(bins - 1) };
            counts[idx] += 1;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let variance = if values.len() > 1 {
            values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Ok(Histogram {
            statistic: statistic.to_string(),
            bin_edges,
            counts,
            sample_count: values.len() as u64,
            fitted_mean: mean,
            fitted_variance: variance,
        })
    }

    pub fn csv_lines(&self) -> impl Iterator<Item = String> + '_ {
        self.counts
            .iter()
            .enumerate()
            .map(|(i, c)| format!("{},{},{}", self.bin_edges[i], self.bin_edges[i + 1], c))
    }
}

/// Kolmogorov distance between the empirical law of `values` and `Exp(1)`.
pub fn ks_distance_exponential(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let cdf = 1.0 - (-x.max(0.0)).exp();
            (cdf - i as f64 / n).abs().max(((i + 1) as f64 / n - cdf).abs())
        })
        .fold(0.0, f64::max)
}

/// A composition of random power maps `y -> y^u` on `F_p^*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndoTrajectory {
    pub p: u64,
    pub steps: u64,
    pub x0: u64,
    pub initial_order: u64,
    /// Order of the final element, i.e. the size of the smallest subgroup
    /// containing it.
    pub final_order: u64,
    pub final_element: u64,
}

/// Runs `steps` random endomorphisms from `x0`.
///
/// Exponents `u` are uniform on `[1, p-1]`, which makes `gcd(p-1, u) = d`
/// occur with probability `phi((p-1)/d)/(p-1)`. The order is updated as
/// `o <- o / gcd(o, u)`, and the element itself is carried along.
pub fn endo_trajectory<R: RngCore + ?Sized>(
    p: u64,
    p_minus_1: &FactoredInteger,
    steps: u64,
    x0: u64,
    rng: &mut R,
) -> Result<EndoTrajectory> {
    if x0 == 0 || x0 >= p {
        return Err(Error::domain(format!("start {x0} is outside [1, {}]", p - 1)));
    }
    let initial_order = multiplicative_order(x0, p, p_minus_1)?;
    let mut order = initial_order;
    let mut x = x0;
    for _ in 0..steps {
        let u = 1 + uniform_below(rng, p - 1);
        order /= gcd(order, u);
        x = mod_pow(x, u, p);
    }
    Ok(EndoTrajectory {
        p,
        steps,
        x0,
        initial_order,
        final_order: order,
        final_element: x,
    })
}

/// Trajectory `trial` of a batch, on substream `(master_seed, endo, trial)`.
/// With `x0 = None` the start is drawn uniformly from `[1, p-1]` first.
pub fn endo_trial(p: u64, p_minus_1: &FactoredInteger, steps: u64, x0: Option<u64>, master_seed: u64, trial: u64) -> Result<EndoTrajectory> {
    let mut rng = substream(master_seed, DOMAIN_ENDO, trial);
    let x0 = match x0 {
        Some(x) => x,
        None => 1 + uniform_below(&mut rng, p - 1),
    };
    endo_trajectory(p, p_minus_1, steps, x0, &mut rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndoSummary {
    pub p: u64,
    pub steps: u64,
    pub trials: u64,
    /// Mean size of the smallest subgroup containing the final element.
    pub mean_final_order: f64,
    pub mean_initial_order: f64,
}

pub fn simulate_endo(p: u64, steps: u64, trials: u64, x0: Option<u64>, master_seed: u64) -> Result<(EndoSummary, Vec<EndoTrajectory>)> {
    let pm1 = factorize(p - 1);
    let runs: Vec<EndoTrajectory> = (0..trials)
        .into_par_iter()
        .map(|t| endo_trial(p, &pm1, steps, x0, master_seed, t))
        .collect::<Result<_>>()?;
    let n = trials.max(1) as f64;
    let summary = EndoSummary {
        p,
        steps,
        trials,
        mean_final_order: runs.iter().map(|r| r.final_order as f64).sum::<f64>() / n,
        mean_initial_order: runs.iter().map(|r| r.initial_order as f64).sum::<f64>() / n,
    };
    Ok((summary, runs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{primitive_root, sieve_primes};
    use std::collections::HashMap;

    /// Reference: record first-visit times until a repeat.
    fn orbit_by_enumeration(map: MapId, p: u64, x0: u64) -> (u64, u64) {
        let mut seen = HashMap::new();
        let mut x = x0;
        let mut n = 0u64;
        loop {
            if let Some(&first) = seen.get(&x) {
                return (first, n - first);
            }
            seen.insert(x, n);
            x = map.step(x, p);
            n += 1;
        }
    }

    #[test]
    fn orbit_examples() {
        let r = orbit_stats(MapId::SelfPower, 5, 2).unwrap();
        assert_eq!((r.tail, r.cycle, r.orbit_size), (2, 1, 3));
        let r = orbit_stats(MapId::SelfPower, 101, 1).unwrap();
        assert_eq!((r.tail, r.cycle, r.orbit_size), (0, 1, 1));
        let r = orbit_stats(MapId::QuadPlusOne, 7, 0).unwrap();
        assert_eq!((r.tail, r.cycle, r.orbit_size), (3, 1, 4));
        assert!(orbit_stats(MapId::SelfPower, 7, 0).is_err());
        assert!(orbit_stats(MapId::QuadPlusOne, 7, 7).is_err());
    }

    #[test]
    fn brent_matches_enumeration_small() {
        for p in sieve_primes(300).unwrap() {
            for x0 in 1..p {
                for map in [MapId::SelfPower, MapId::QuadPlusOne] {
                    let r = orbit_stats(map, p, x0).unwrap();
                    assert_eq!((r.tail, r.cycle), orbit_by_enumeration(map, p, x0), "{map} p={p} x0={x0}");
                }
            }
        }
    }

    #[test]
    fn self_power_stays_in_cyclic_subgroup() {
        for p in sieve_primes(2000).unwrap().into_iter().skip(1) {
            let pm1 = factorize(p - 1);
            for x in 1..p {
                let ox = multiplicative_order(x, p, &pm1).unwrap();
                let oy = multiplicative_order(mod_pow(x, x, p), p, &pm1).unwrap();
                assert_eq!(ox % oy, 0, "p={p} x={x}");
            }
        }
    }

    #[test]
    fn sampling_is_deterministic_and_ordered() {
        let a = sample_orbits(MapId::SelfPower, 1000, 3000, 2, 42).unwrap();
        let b = sample_orbits(MapId::SelfPower, 1000, 3000, 2, 42).unwrap();
        assert_eq!(a, b);
        assert!(a.windows(2).all(|w| w[0].p <= w[1].p));
        assert_eq!(a.len(), 2 * (sieve_primes(3000).unwrap().len() - 168));
        let one = sample_orbits(MapId::QuadPlusOne, 101, 101, 1, 0).unwrap();
        assert_eq!(one.len(), 1);
        assert!(sample_orbits(MapId::QuadPlusOne, 101, 101, 0, 0).is_err());
    }

    #[test]
    fn histogram_basics() {
        let h = Histogram::from_values("t", &[0.5], 2, 0.0, 1.0).unwrap();
        assert_eq!(h.counts, vec![0, 1]);
        let vals = [-1.0, 0.0, 0.2, 0.999, 1.0, 7.0];
        let h = Histogram::from_values("t", &vals, 4, 0.0, 1.0).unwrap();
        assert_eq!(h.counts.iter().sum::<u64>(), vals.len() as u64);
        assert_eq!(h.counts, vec![3, 0, 0, 3]);
        assert!(Histogram::from_values("t", &[], 4, 0.0, 1.0).is_err());
        assert!(Histogram::from_values("t", &[1.0], 0, 0.0, 1.0).is_err());
        assert!(Histogram::from_values("t", &[1.0], 3, 1.0, 1.0).is_err());
    }

    #[test]
    fn endo_basics() {
        let p = 1009;
        let pm1 = factorize(p - 1);
        let g = primitive_root(p, &pm1);
        let mut rng = substream(0, DOMAIN_ENDO, 0);
        let t = endo_trajectory(p, &pm1, 0, g, &mut rng).unwrap();
        assert_eq!(t.final_order, t.initial_order);
        assert_eq!(t.initial_order, p - 1);
        for trial in 0..200 {
            let t = endo_trial(p, &pm1, 7, None, 3, trial).unwrap();
            assert_eq!(t.initial_order % t.final_order, 0);
            assert_eq!((p - 1) % t.initial_order, 0);
            assert_eq!(multiplicative_order(t.final_element, p, &pm1).unwrap(), t.final_order);
        }
    }

    #[test]
    fn exponent_law_sums_to_group_order() {
        for n in [12u64, 100, 1008, 4096] {
            let f = factorize(n);
            let total: u64 = f.divisors().unwrap().iter().map(|&d| factorize(n / d).euler_phi()).sum();
            assert_eq!(total, n);
            let by_gcd = (1..=n).fold(HashMap::new(), |mut m, u| {
                *m.entry(gcd(n, u)).or_insert(0u64) += 1;
                m
            });
            for d in f.divisors().unwrap() {
                assert_eq!(by_gcd[&d], factorize(n / d).euler_phi());
            }
        }
    }

    #[test]
    fn ks_distance_sanity() {
        let v: Vec<f64> = (0..1000).map(|i| -(1.0 - (i as f64 + 0.5) / 1000.0).ln()).collect();
        assert!(ks_distance_exponential(&v) < 0.001);
    }
}
