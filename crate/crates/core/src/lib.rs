//! Fixed points and dynamics of the self-power map `x -> x^x mod p`.
//!
//! The crate is organised by experiment:
//!
//! - [`arith`]: sieving, factoring and modular arithmetic.
//! - [`fixedpoints`]: exact fixed-point census and the exceptional primes
//!   with no nontrivial fixed point.
//! - [`heuristics`]: closed-form predictors for those counts and the
//!   observed-vs-predicted tables.
//! - [`dynamics`]: orbit statistics against the `x^2 + 1` baseline and the
//!   random-endomorphism model.
//! - [`linforms`]: the linear-form system over `F_q` and its avoidance
//!   constant `c(q)`.
//! - [`interp`]: interpolation degree of the map and its quadratic-residue
//!   census.

pub mod arith;
mod error;
pub mod fixedpoints;
pub mod dynamics;
pub mod heuristics;
pub mod interp;
pub mod linforms;
pub mod rng;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
