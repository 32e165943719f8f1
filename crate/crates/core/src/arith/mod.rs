//! Rational-integer arithmetic: factorization, primality and numeric helpers.

pub mod bigutil;
pub mod factor;
pub mod rational;

pub use factor::{is_prime, Factorization, Factorizer, DEFAULT_RHO_BUDGET, TRIAL_LIMIT};
