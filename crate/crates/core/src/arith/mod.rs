//! Integer and modular arithmetic shared by every experiment.

mod factor;
mod modular;
mod sieve;

pub use factor::{factorize, FactoredInteger, Factorizer, DEFAULT_DIVISOR_CAP};
pub use modular::{
    add_mod, gcd, inv_mod, is_prime, is_qth_power_residue, lcm, legendre_symbol, mod_pow,
    mul_mod, multiplicative_order, primitive_root, sub_mod,
};
pub use sieve::{sieve_primes, sieve_primes_with, PrimeSegments, DEFAULT_SEGMENT, DEFAULT_SIEVE_BUDGET};
