//! Random-model predictors for the fixed-point census.
//!
//! For a divisor `d` of `p - 1` with `2 < d < p - 1`, an element of order `d`
//! is fixed when `d | x - 1`; with `x - 1` treated as uniform on `[1, p-3]`
//! that happens with probability `r_d = floor((p-3)/d)/(p-3)`. Assuming
//! independence over all such elements gives
//!
//! ```text
//! P(no nontrivial fixed point) = prod_d (1 - r_d)^phi(d) = exp(-Delta_p)
//! E(nontrivial fixed points)   = sum_d phi(d) r_d
//! ```
//!
//! Summing over primes `p <= N` yields the predictors `H(N)` and `K(N)`.
//! All prime sums include the endpoint `N`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{factorize, FactoredInteger, Factorizer, PrimeSegments, DEFAULT_SEGMENT};
use crate::fixedpoints::{census_record, PrimeCensusRecord};

/// Per-prime heuristic quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrimeHeuristics {
    pub p: u64,
    /// `exp(-Delta_p)`, computed as the product over divisors.
    pub no_fixed_point_probability: f64,
    pub delta: f64,
    /// `sum phi(d) r_d` over `2 < d < p - 1`.
    pub expected_nontrivial: f64,
    /// `sum phi(d)/d` over all `d | p - 1` with `d > 2`.
    pub divisor_density: f64,
}

/// `floor((p-3)/d)/(p-3)` for `d | p - 1`, `2 < d < p - 1`.
fn hit_probability(p: u64, d: u64) -> f64 {
    ((p - 3) / d) as f64 / (p - 3) as f64
}

pub fn prime_heuristics(p: u64, p_minus_1: &FactoredInteger) -> PrimeHeuristics {
    let mut out = PrimeHeuristics {
        p,
        no_fixed_point_probability: 1.0,
        delta: 0.0,
        expected_nontrivial: 0.0,
        divisor_density: 0.0,
    };
    if p < 3 {
        return out;
    }
    for (d, phi) in p_minus_1.divisors_with_phi().expect("divisor count below cap") {
        if d <= 2 {
            continue;
        }
        out.divisor_density += phi as f64 / d as f64;
        if d < p - 1 {
            let r = hit_probability(p, d);
            // (1 - r)^phi through ln_1p: `1.0 - r` alone loses the low bits of
            // small r, and phi can be as large as p.
            let log_factor = phi as f64 * (-r).ln_1p();
            out.no_fixed_point_probability *= log_factor.exp();
            out.delta -= log_factor;
            out.expected_nontrivial += phi as f64 * r;
        }
    }
    out
}

pub fn no_fixed_point_probability(p: u64) -> f64 {
    prime_heuristics(p, &factorize(p.max(2) - 1)).no_fixed_point_probability
}

pub fn delta_p(p: u64) -> f64 {
    prime_heuristics(p, &factorize(p.max(2) - 1)).delta
}

/// Per-prime heuristics for all primes `<= n`, ascending.
fn heuristics_upto(n: u64) -> impl Iterator<Item = PrimeHeuristics> {
    let factorizer = Factorizer::new(n.max(2));
    PrimeSegments::new(2, n, DEFAULT_SEGMENT).flat_map(move |window| {
        window
            .par_iter()
            .with_min_len(256)
            .map(|&p| prime_heuristics(p, &factorizer.factorize(p - 1)))
            .collect::<Vec<_>>()
    })
}

/// `H(N)`: predicted number of primes `p <= N` without a nontrivial fixed point.
pub fn h_sum(n: u64) -> f64 {
    heuristics_upto(n).map(|h| h.no_fixed_point_probability).sum()
}

/// `K(N) = sum_{p <= N} sum_{d | p-1, d > 2} phi(d)/d`, the closed form with
/// `1/d` in place of the exact hit probability.
pub fn k_sum(n: u64) -> f64 {
    heuristics_upto(n).map(|h| h.divisor_density).sum()
}

/// Predicted total of nontrivial fixed points over `p <= N`, using the exact
/// hit probabilities `r_d`. This is the predictor the total-fixed-point table
/// reports.
pub fn k_expected_sum(n: u64) -> f64 {
    heuristics_upto(n).map(|h| h.expected_nontrivial).sum()
}

/// The iterated logarithm with `log x = max(ln x, 2)`; `depth = 1` is `log`.
pub fn clamped_log_iter(x: f64, depth: u32) -> f64 {
    (0..depth).fold(x, |acc, _| acc.ln().max(2.0))
}

/// `N/(log N)^2 * exp(log_3 N * log_4 N / ln 2)`, the conjectured growth of
/// the exceptional-prime count with the `o(1)` term dropped.
pub fn an_lower_bound(n: f64) -> f64 {
    let log1 = clamped_log_iter(n, 1);
    let log3 = clamped_log_iter(n, 3);
    let log4 = clamped_log_iter(n, 4);
    n / (log1 * log1) * (log3 * log4 / std::f64::consts::LN_2).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub n: u64,
    pub observed: u64,
    pub predicted: f64,
    pub relative_error: f64,
}

impl PredictionRow {
    pub fn new(n: u64, observed: u64, predicted: f64) -> Self {
        PredictionRow {
            n,
            observed,
            predicted,
            relative_error: (observed as f64 - predicted) / predicted,
        }
    }

    /// `N,observed,predicted,relative_error` with 1 and 4 decimals.
    pub fn csv_line(&self) -> String {
        format!("{},{},{:.1},{:.4}", self.n, self.observed, self.predicted, self.relative_error)
    }
}

pub const TABLE_CSV_HEADER: &str = "N,observed,predicted,relative_error";

/// Both comparison tables.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PredictionTables {
    /// `#{p <= N : F(p) = 1}` against `H(N)`.
    pub no_fixed_points: Vec<PredictionRow>,
    /// `sum_{p <= N} F(p)` against the exact-probability `K(N)`.
    pub total_fixed_points: Vec<PredictionRow>,
}

/// Accumulates both tables from per-prime data fed in ascending `p`.
///
/// The total-fixed-point column counts every fixed point, the trivial
/// `x = 1` included; this is the quantity whose published values the table
/// reproduces.
#[derive(Debug, Clone)]
pub struct TableAccumulator {
    thresholds: Vec<u64>,
    next: usize,
    in_a: u64,
    fixed_points: u64,
    h: f64,
    k: f64,
    tables: PredictionTables,
}

impl TableAccumulator {
    pub fn new(mut thresholds: Vec<u64>) -> Self {
        thresholds.sort_unstable();
        thresholds.dedup();
        TableAccumulator {
            thresholds,
            next: 0,
            in_a: 0,
            fixed_points: 0,
            h: 0.0,
            k: 0.0,
            tables: PredictionTables::default(),
        }
    }

    fn close_thresholds_below(&mut self, p: u64) {
        while self.next < self.thresholds.len() && self.thresholds[self.next] < p {
            let n = self.thresholds[self.next];
            self.tables.no_fixed_points.push(PredictionRow::new(n, self.in_a, self.h));
            self.tables
                .total_fixed_points
                .push(PredictionRow::new(n, self.fixed_points, self.k));
            self.next += 1;
        }
    }

    pub fn push(&mut self, p: u64, fixed_point_count: u64, heuristics: &PrimeHeuristics) {
        debug_assert_eq!(p, heuristics.p);
        self.close_thresholds_below(p);
        self.in_a += (fixed_point_count == 1) as u64;
        self.fixed_points += fixed_point_count;
        self.h += heuristics.no_fixed_point_probability;
        self.k += heuristics.expected_nontrivial;
    }

    pub fn finish(mut self) -> PredictionTables {
        self.close_thresholds_below(u64::MAX);
        self.tables
    }
}

/// One ascending pass over primes `<= max(thresholds)` computing census
/// records and heuristics together. `emit` sees every census record in order.
pub fn scan_tables<E, F>(thresholds: &[u64], image_limit: u64, mut emit: F) -> Result<PredictionTables, E>
where
    F: FnMut(&PrimeCensusRecord, &PrimeHeuristics) -> Result<(), E>,
{
    let n = thresholds.iter().copied().max().unwrap_or(0);
    let mut acc = TableAccumulator::new(thresholds.to_vec());
    if n >= 2 {
        let factorizer = Factorizer::new(n);
        for window in PrimeSegments::new(2, n, DEFAULT_SEGMENT) {
            let rows: Vec<(PrimeCensusRecord, PrimeHeuristics)> = window
                .par_iter()
                .with_min_len(64)
                .map(|&p| {
                    let pm1 = factorizer.factorize(p - 1);
                    (census_record(p, &pm1, image_limit), prime_heuristics(p, &pm1))
                })
                .collect();
            for (rec, h) in &rows {
                acc.push(rec.p, rec.fixed_point_count, h);
                emit(rec, h)?;
            }
        }
    }
    Ok(acc.finish())
}

pub fn prediction_tables(thresholds: &[u64]) -> PredictionTables {
    scan_tables::<(), _>(thresholds, 0, |_, _| Ok(())).expect("infallible sink")
}

pub fn table_no_fixed_points(thresholds: &[u64]) -> Vec<PredictionRow> {
    prediction_tables(thresholds).no_fixed_points
}

pub fn table_total_fixed_points(thresholds: &[u64]) -> Vec<PredictionRow> {
    prediction_tables(thresholds).total_fixed_points
}
