//! Interpolation degree of `psi_p` over `F_p`, and its quadratic character.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::arith::{inv_mod, legendre_symbol, mod_pow, mul_mod, sub_mod};
use crate::error::{Error, Result};

/// Largest prime interpolated by default (the Newton table is quadratic).
pub const DEFAULT_INTERP_BUDGET: u64 = 10_000;

/// Which nodes the interpolant passes through.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// Nodes `1..=p-1`, where the map is defined; degree at most `p - 2`.
    Domain1ToPm1,
    /// Nodes `0..=p-1` with `0^0 = 1`; degree at most `p - 1`.
    DomainFullWithZero,
}

impl Convention {
    fn first_node(self) -> u64 {
        match self {
            Convention::Domain1ToPm1 => 1,
            Convention::DomainFullWithZero => 0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Convention::Domain1ToPm1 => "domain_1_to_pm1",
            Convention::DomainFullWithZero => "domain_full_with_zero",
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "domain_1_to_pm1" | "units" => Ok(Convention::Domain1ToPm1),
            "domain_full_with_zero" | "full" => Ok(Convention::DomainFullWithZero),
            _ => Err(Error::domain(format!("unknown convention `{s}`"))),
        }
    }
}

/// Newton form `c_0 + c_1 (X - s) + c_2 (X - s)(X - s - 1) + ...` over
/// consecutive nodes starting at `s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewtonInterpolant {
    p: u64,
    start: u64,
    coeffs: Vec<u64>,
}

impl NewtonInterpolant {
    /// Divided differences of `values` at nodes `start, start + 1, ...`.
    ///
    /// Nodes at distance `k` differ by exactly `k`, so each level of the table
    /// is one multiplication by `k^-1`.
    pub fn fit(p: u64, start: u64, values: &[u64]) -> Self {
        let mut c = values.to_vec();
        for k in 1..c.len() {
            let inv_k = inv_mod(k as u64, p).expect("node gaps are below p");
            for i in (k..c.len()).rev() {
                c[i] = mul_mod(sub_mod(c[i], c[i - 1], p), inv_k, p);
            }
        }
        NewtonInterpolant { p, start, coeffs: c }
    }

    pub fn newton_coefficients(&self) -> &[u64] {
        &self.coeffs
    }

    /// Index of the last nonzero Newton coefficient (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|&c| c != 0).unwrap_or(0)
    }

    pub fn eval(&self, x: u64) -> u64 {
        let p = self.p;
        let n = self.coeffs.len();
        let mut acc = 0;
        for k in (0..n).rev() {
            let node = (self.start + k as u64) % p;
            acc = mul_mod(acc, sub_mod(x % p, node, p), p);
            acc = (acc + self.coeffs[k]) % p;
        }
        acc
    }

    /// Monomial coefficients, constant term first, trailing zeros dropped.
    pub fn to_monomial(&self) -> Vec<u64> {
        let p = self.p;
        let mut poly: Vec<u64> = Vec::new();
        for k in (0..self.coeffs.len()).rev() {
            let node = (self.start + k as u64) % p;
            // poly <- poly * (X - node) + c_k
            let mut next = vec![0u64; poly.len() + 1];
            for (i, &a) in poly.iter().enumerate() {
                next[i + 1] = (next[i + 1] + a) % p;
                next[i] = sub_mod(next[i], mul_mod(a, node, p), p);
            }
            next[0] = (next[0] + self.coeffs[k]) % p;
            poly = next;
        }
        while poly.len() > 1 && *poly.last().unwrap() == 0 {
            poly.pop();
        }
        poly
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterpolationResult {
    pub p: u64,
    pub convention: Convention,
    pub degree: u64,
    pub qnr_count: u64,
}

pub const INTERP_CSV_HEADER: &str = "p,convention,degree,degree_over_sqrt_p,qnr_count,qnr_deviation";

impl InterpolationResult {
    pub fn csv_line(&self) -> String {
        let p = self.p as f64;
        format!(
            "{},{},{},{},{},{}",
            self.p,
            self.convention,
            self.degree,
            self.degree as f64 / p.sqrt(),
            self.qnr_count,
            self.qnr_count as f64 - p / 4.0
        )
    }
}

/// Values of `psi_p` at the convention's nodes.
pub fn node_values(p: u64, convention: Convention) -> Vec<u64> {
    (convention.first_node()..p)
        .map(|x| if x == 0 { 1 } else { mod_pow(x, x, p) })
        .collect()
}

pub fn interpolate(p: u64, convention: Convention, budget: u64) -> Result<NewtonInterpolant> {
    if p > budget {
        return Err(Error::resource("interpolation prime", p as u128, budget as u128));
    }
    if p < 2 {
        return Err(Error::domain(format!("{p} is not prime")));
    }
    Ok(NewtonInterpolant::fit(p, convention.first_node(), &node_values(p, convention)))
}

pub fn interpolation_degree(p: u64, convention: Convention) -> Result<InterpolationResult> {
    interpolation_degree_with(p, convention, DEFAULT_INTERP_BUDGET)
}

pub fn interpolation_degree_with(p: u64, convention: Convention, budget: u64) -> Result<InterpolationResult> {
    let f = interpolate(p, convention, budget)?;
    let qnr_count = if p > 2 { qnr_census(p).0 } else { 0 };
    Ok(InterpolationResult {
        p,
        convention,
        degree: f.degree() as u64,
        qnr_count,
    })
}

/// `#{x : psi_p(x) is a non-residue}` and whether that happens exactly when
/// `x` is odd and a non-residue.
pub fn qnr_census(p: u64) -> (u64, bool) {
    let mut count = 0;
    let mut holds = true;
    for x in 1..p {
        let image_qnr = legendre_symbol(mod_pow(x, x, p), p) == -1;
        let predicted = x % 2 == 1 && legendre_symbol(x, p) == -1;
        count += image_qnr as u64;
        holds &= image_qnr == predicted;
    }
    (count, holds)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_degrees() {
        let r = interpolation_degree(3, Convention::Domain1ToPm1).unwrap();
        assert_eq!(r.degree, 0);
        let f = interpolate(5, Convention::Domain1ToPm1, 100).unwrap();
        assert_eq!(f.degree(), 3);
        assert_eq!(f.to_monomial(), vec![2, 4, 4, 1]);
        for x in 1..5 {
            assert_eq!(f.eval(x), mod_pow(x, x, 5));
        }
    }

    #[test]
    fn budget() {
        assert!(matches!(
            interpolation_degree_with(10_007, Convention::Domain1ToPm1, 10_000),
            Err(Error::Resource { .. })
        ));
    }

    #[test]
    fn qnr_p7() {
        assert_eq!(qnr_census(7), (2, true));
    }

    #[test]
    fn full_domain_uses_zero_to_the_zero() {
        let f = interpolate(7, Convention::DomainFullWithZero, 100).unwrap();
        assert_eq!(f.eval(0), 1);
        for x in 1..7 {
            assert_eq!(f.eval(x), mod_pow(x, x, 7));
        }
        assert!(f.degree() <= 6);
    }
}
