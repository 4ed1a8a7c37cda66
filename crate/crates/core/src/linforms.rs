//! The exponent-vector linear forms over `F_q`.
//!
//! Index the primes `p_1 < ... < p_d` below `q`. Each `n` in `[1, q-1]`
//! factors as `prod p_i^(a_i)` and defines the form `L_n(v) = sum a_i v_i`.
//! `c(q)` is the fraction of `v` in `F_q^d` for which no `L_n(v)` equals a
//! fixed `x0`. Forms are completely additive (`L_mn = L_m + L_n`), so all of
//! them are evaluated in `O(q)` from the smallest-prime-factor table.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::is_prime;
use crate::error::{Error, Result};
use crate::rng::{substream, uniform_below, DOMAIN_LINFORMS};

pub const DEFAULT_EXACT_BUDGET: u64 = 100_000_000;

const MC_BATCH: u64 = 1 << 16;
const NOT_PRIME: usize = usize::MAX;

#[derive(Debug, Clone)]
pub struct LinearFormSystem {
    q: u64,
    /// `spf[n]` for `n < q`; `spf[0] = spf[1] = 0`.
    spf: Vec<u32>,
    /// Coordinate of each prime `n < q`, `NOT_PRIME` otherwise.
    prime_index: Vec<usize>,
    primes: Vec<u64>,
    composites: Vec<u64>,
}

impl LinearFormSystem {
    pub fn new(q: u64) -> Result<Self> {
        if q < 3 || !is_prime(q) {
            return Err(Error::domain(format!("{q} is not an odd prime")));
        }
        let n = q as usize;
        let mut spf = vec![0u32; n];
        let mut prime_index = vec![NOT_PRIME; n];
        let mut primes = Vec::new();
        let mut composites = Vec::new();
        for i in 2..n {
            if spf[i] == 0 {
                spf[i] = i as u32;
                prime_index[i] = primes.len();
                primes.push(i as u64);
                let mut j = i * i;
                while j < n {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            } else {
                composites.push(i as u64);
            }
        }
        Ok(LinearFormSystem {
            q,
            spf,
            prime_index,
            primes,
            composites,
        })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// `d`, the number of primes below `q`.
    pub fn dimension(&self) -> usize {
        self.primes.len()
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn smallest_prime_factor(&self, n: u64) -> u64 {
        self.spf[n as usize] as u64
    }

    /// Exponent vector of `n`, `1 <= n < q`.
    pub fn exponent_vector(&self, n: u64) -> Vec<u32> {
        let mut alpha = vec![0; self.dimension()];
        let mut m = n as usize;
        while m > 1 {
            let s = self.spf[m] as usize;
            alpha[self.prime_index[s]] += 1;
            m /= s;
        }
        alpha
    }

    fn check_vector(&self, v: &[u64]) -> Result<()> {
        if v.len() != self.dimension() {
            return Err(Error::domain(format!("vector has length {}, expected {}", v.len(), self.dimension())));
        }
        Ok(())
    }

    /// `L_1(v), ..., L_{q-1}(v)`; entry `n - 1` holds `L_n(v)`.
    pub fn evaluate_all_forms(&self, v: &[u64]) -> Result<Vec<u64>> {
        self.check_vector(v)?;
        let q = self.q;
        let mut out = vec![0u64; (q - 1) as usize];
        for n in 2..q as usize {
            let s = self.spf[n] as usize;
            out[n - 1] = if s == n {
                v[self.prime_index[n]] % q
            } else {
                (out[n / s - 1] + out[s - 1]) % q
            };
        }
        Ok(out)
    }

    /// Whether `L_n(v) != x0` for every `n`. Reuses `forms` as scratch.
    ///
    /// Checks `n = 1`, then the primes (plain coordinates), then composites in
    /// ascending order, stopping at the first hit.
    fn avoids(&self, v: &[u64], x0: u64, forms: &mut [u64]) -> bool {
        if x0 == 0 {
            return false;
        }
        let q = self.q;
        for (i, &p) in self.primes.iter().enumerate() {
            let val = v[i];
            if val == x0 {
                return false;
            }
            forms[p as usize] = val;
        }
        for &n in &self.composites {
            let n = n as usize;
            let s = self.spf[n] as usize;
            let val = (forms[n / s] + forms[s]) % q;
            if val == x0 {
                return false;
            }
            forms[n] = val;
        }
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CqMethod {
    Exact,
    MonteCarlo,
    UpperBound,
}

impl fmt::Display for CqMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CqMethod::Exact => "exact",
            CqMethod::MonteCarlo => "monte_carlo",
            CqMethod::UpperBound => "upper_bound",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CqEstimate {
    pub q: u64,
    pub d: usize,
    pub x0: u64,
    pub method: CqMethod,
    pub value: f64,
    /// Avoiding vectors found (`N_q` for exact runs).
    pub hits: u64,
    /// `q^d` for exact runs, the sample count for Monte Carlo, 0 for bounds.
    pub trials: u64,
    pub samples: u64,
    pub stderr: f64,
}

pub const CQ_CSV_HEADER: &str = "q,d,x0,method,value,samples,stderr";

impl CqEstimate {
    pub fn csv_line(&self) -> String {
        format!("{},{},{},{},{},{},{}", self.q, self.d, self.x0, self.method, self.value, self.samples, self.stderr)
    }

    /// `hits/trials` in lowest terms, for exact runs.
    pub fn as_fraction(&self) -> Option<(u64, u64)> {
        if self.method != CqMethod::Exact {
            return None;
        }
        let g = crate::arith::gcd(self.hits, self.trials).max(1);
        Some((self.hits / g, self.trials / g))
    }
}

fn check_x0(q: u64, x0: u64) -> Result<()> {
    if x0 >= q {
        return Err(Error::domain(format!("x0 = {x0} is not a residue mod {q}")));
    }
    Ok(())
}

pub fn cq_exact(q: u64, x0: u64) -> Result<CqEstimate> {
    cq_exact_with(q, x0, DEFAULT_EXACT_BUDGET)
}

/// Exhaustive `N_q / q^d`. The space is split on the leading coordinate and
/// partial counts are summed in coordinate order.
pub fn cq_exact_with(q: u64, x0: u64, budget: u64) -> Result<CqEstimate> {
    let sys = LinearFormSystem::new(q)?;
    check_x0(q, x0)?;
    let d = sys.dimension();
    let total = (q as u128).checked_pow(d as u32).unwrap_or(u128::MAX);
    if total > budget as u128 {
        return Err(Error::Resource {
            what: "exhaustive c(q) enumeration",
            requested: total,
            budget: budget as u128,
            hint: "; use the Monte Carlo estimator instead",
        });
    }
    let total = total as u64;

    let hits: u64 = (0..q)
        .into_par_iter()
        .map(|lead| {
            let mut v = vec![0u64; d];
            v[0] = lead;
            let mut forms = vec![0u64; q as usize];
            let mut count = 0u64;
            loop {
                count += sys.avoids(&v, x0, &mut forms) as u64;
                // odometer over coordinates 1..d
                let mut i = 1;
                while i < d {
                    v[i] += 1;
                    if v[i] < q {
                        break;
                    }
                    v[i] = 0;
                    i += 1;
                }
                if i >= d {
                    break;
                }
            }
            count
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();

    Ok(CqEstimate {
        q,
        d,
        x0,
        method: CqMethod::Exact,
        value: hits as f64 / total as f64,
        hits,
        trials: total,
        samples: 0,
        stderr: 0.0,
    })
}

/// Uniform-sampling estimate of `c(q)` with binomial standard error.
///
/// Batch `b` of `2^16` draws uses substream `(master_seed, linforms, q << 32 | b)`.
pub fn cq_monte_carlo(q: u64, x0: u64, samples: u64, master_seed: u64) -> Result<CqEstimate> {
    let sys = LinearFormSystem::new(q)?;
    check_x0(q, x0)?;
    if samples == 0 {
        return Err(Error::domain("Monte Carlo needs at least one sample"));
    }
    if x0 == 0 {
        return Err(Error::domain("x0 = 0 is avoided by no vector since L_1 = 0"));
    }
    let d = sys.dimension();
    let batches = samples.div_ceil(MC_BATCH);
    let hits: u64 = (0..batches)
        .into_par_iter()
        .map(|b| {
            let n = MC_BATCH.min(samples - b * MC_BATCH);
            let mut rng = substream(master_seed, DOMAIN_LINFORMS, (q << 32) | b);
            let mut v = vec![0u64; d];
            let mut forms = vec![0u64; q as usize];
            let mut count = 0;
            for _ in 0..n {
                for c in v.iter_mut() {
                    *c = uniform_below(&mut rng, q);
                }
                count += sys.avoids(&v, x0, &mut forms) as u64;
            }
            count
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    let value = hits as f64 / samples as f64;
    Ok(CqEstimate {
        q,
        d,
        x0,
        method: CqMethod::MonteCarlo,
        value,
        hits,
        trials: samples,
        samples,
        stderr: (value * (1.0 - value) / samples as f64).sqrt(),
    })
}

/// Number of square-free `n` in `[2, q-1]`.
pub fn squarefree_count(q: u64) -> u64 {
    let n = q as usize;
    let mut squarefree = vec![true; n];
    let mut k = 2;
    while k * k < n {
        let mut j = k * k;
        while j < n {
            squarefree[j] = false;
            j += k * k;
        }
        k += 1;
    }
    (2..n).filter(|&i| squarefree[i]).count() as u64
}

/// `1 - M/q + C(M, 2)/q^2` with `M` square-free forms, clamped to `[0, 1]`.
pub fn cq_upper_bound(q: u64) -> f64 {
    let m = squarefree_count(q) as f64;
    let q = q as f64;
    (1.0 - m / q + m * (m - 1.0) / 2.0 / (q * q)).clamp(0.0, 1.0)
}

pub fn cq_upper_bound_estimate(q: u64, x0: u64) -> Result<CqEstimate> {
    let sys = LinearFormSystem::new(q)?;
    check_x0(q, x0)?;
    Ok(CqEstimate {
        q,
        d: sys.dimension(),
        x0,
        method: CqMethod::UpperBound,
        value: cq_upper_bound(q),
        hits: 0,
        trials: 0,
        samples: 0,
        stderr: 0.0,
    })
}

/// `(6 pi^2 - 18)/pi^4 = 1/zeta(2) - 1/(2 zeta(2)^2)`.
pub fn theta_constant() -> f64 {
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    (6.0 * pi2 - 18.0) / (pi2 * pi2)
}
