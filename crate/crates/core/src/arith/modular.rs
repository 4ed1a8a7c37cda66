//! Modular arithmetic on machine words.
//!
//! Products are formed in 128 bits whenever the modulus does not fit in 32
//! bits, so residues up to 2^63 never overflow.

use super::factor::FactoredInteger;
use crate::error::{Error, Result};

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    if m <= u32::MAX as u64 {
        (a * b) % m
    } else {
        ((a as u128 * b as u128) % m as u128) as u64
    }
}

#[inline]
pub fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    let (s, carry) = a.overflowing_add(b);
    if carry || s >= m {
        s.wrapping_sub(m)
    } else {
        s
    }
}

#[inline]
pub fn sub_mod(a: u64, b: u64, m: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        m - (b - a)
    }
}

/// `base^exp mod modulus` by left-to-right square-and-multiply.
///
/// `exp = 0` yields 1 for every base, including 0.
pub fn mod_pow(base: u64, mut exp: u64, modulus: u64) -> u64 {
    debug_assert!(modulus >= 2);
    let mut result = 1 % modulus;
    let mut b = base % modulus;
    while exp > 0 {
        if exp & 1 == 1 {
            result = mul_mod(result, b, modulus);
        }
        exp >>= 1;
        if exp > 0 {
            b = mul_mod(b, b, modulus);
        }
    }
    result
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        0
    } else {
        a / gcd(a, b) * b
    }
}

/// Inverse of `a` modulo `m`, if `gcd(a, m) = 1`.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

/// Deterministic Miller-Rabin for the full `u64` range.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    // These twelve bases are sufficient below 3.3 * 10^24.
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = mod_pow(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Multiplicative order of `a` modulo the prime `p`.
///
/// Starts from `p - 1` and divides out each prime factor for as long as the
/// power stays 1.
pub fn multiplicative_order(a: u64, p: u64, p_minus_1: &FactoredInteger) -> Result<u64> {
    debug_assert_eq!(p_minus_1.value(), p - 1);
    if a % p == 0 {
        return Err(Error::domain(format!("{a} has no multiplicative order mod {p}")));
    }
    Ok(order_dividing(a % p, p, p - 1, p_minus_1.factors()))
}

/// Order of `a` mod `p`, given that it divides `n = prod(factors)`.
pub(crate) fn order_dividing(a: u64, p: u64, n: u64, factors: &[(u64, u32)]) -> u64 {
    let mut order = n;
    for &(q, _) in factors {
        while order % q == 0 && mod_pow(a, order / q, p) == 1 {
            order /= q;
        }
    }
    order
}

/// Legendre symbol `(a / p)` for an odd prime `p`, via Euler's criterion.
pub fn legendre_symbol(a: u64, p: u64) -> i8 {
    let a = a % p;
    if a == 0 {
        return 0;
    }
    if mod_pow(a, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

/// Whether `a` is a `q`-th power modulo the prime `p`, for a prime `q | p - 1`.
pub fn is_qth_power_residue(a: u64, p: u64, q: u64) -> Result<bool> {
    if q == 0 || (p - 1) % q != 0 {
        return Err(Error::domain(format!("{q} does not divide {p} - 1")));
    }
    if a % p == 0 {
        return Err(Error::domain(format!("{a} is not a unit mod {p}")));
    }
    Ok(mod_pow(a % p, (p - 1) / q, p) == 1)
}

/// Smallest primitive root modulo the prime `p`.
pub fn primitive_root(p: u64, p_minus_1: &FactoredInteger) -> u64 {
    if p == 2 {
        return 1;
    }
    (2..p)
        .find(|&g| {
            p_minus_1
                .factors()
                .iter()
                .all(|&(q, _)| mod_pow(g, (p - 1) / q, p) != 1)
        })
        .expect("every prime has a primitive root")
}
