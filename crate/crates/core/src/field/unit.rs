//! Fundamental units of real quadratic fields and the constructive unit approximation.

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::{FieldSpec, FieldTag, NFElement};
use crate::arith::bigutil::ln_rational;
use crate::constants::a3;
use crate::error::{Error, Result};

/// Smallest unit ε > 1 of O, read off the continued fraction of −ω̄.
///
/// −ω̄ is √D or (√D − 1)/2. A convergent p/q with N(p + qω) = ±1 gives ε = p + qω.
pub(crate) fn fundamental_unit(tag: FieldTag) -> NFElement {
    let d = tag.radicand();
    assert!(d > 1, "fundamental unit needs a real quadratic field");
    let dd = BigInt::from(d);
    let s = BigInt::from(d.sqrt());
    // θ = (P + √D)/Q
    let (mut p_, mut q_) = if tag.half_integral_basis() {
        (BigInt::from(-1), BigInt::from(2))
    } else {
        (BigInt::zero(), BigInt::one())
    };
    let (mut h_prev, mut h) = (BigInt::zero(), BigInt::one());
    let (mut k_prev, mut k) = (BigInt::one(), BigInt::zero());
    loop {
        let num = if q_.is_positive() { &p_ + &s } else { &p_ + &s + 1 };
        let a = num.div_floor(&q_);
        let h_next = &a * &h + &h_prev;
        let k_next = &a * &k + &k_prev;
        h_prev = std::mem::replace(&mut h, h_next);
        k_prev = std::mem::replace(&mut k, k_next);
        if k.is_positive() && !h.is_negative() {
            let cand = NFElement::new(
                tag,
                num_rational::BigRational::from_integer(h.clone()),
                num_rational::BigRational::from_integer(k.clone()),
            );
            if cand.norm().abs().is_one() {
                return cand;
            }
        }
        let p_next = &a * &q_ - &p_;
        let q_next = (&dd - &p_next * &p_next) / &q_;
        p_ = p_next;
        q_ = q_next;
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct UnitApproximation {
    pub epsilon: NFElement,
    /// ε = ε₁^{−exponent}; 0 at rank 0.
    pub exponent: i64,
    /// max over archimedean v of |log|εⁿx|_v − (1/d) log Nm(x)|.
    pub deviation: f64,
    /// The same quantity for x itself, before any unit is applied.
    pub initial_deviation: f64,
    /// ½·A₃·n·d²·R, or 0 at rank 0.
    pub bound: f64,
}

impl UnitApproximation {
    pub fn slack(&self) -> f64 {
        self.bound - self.deviation
    }
}

fn archimedean_deviation(field: &FieldSpec, y: &NFElement, ln_nm_over_d: f64) -> f64 {
    (0..field.archimedean_count())
        .map(|i| (y.ln_abs_embedding(i) - ln_nm_over_d).abs())
        .fold(0.0, f64::max)
}

/// Unit ε with |log|εⁿx|_v − (1/d)log Nm(x)| ≤ ½A₃nd²R at every archimedean v.
pub fn approximate_by_unit(field: &FieldSpec, x: &NFElement, n: u32) -> Result<UnitApproximation> {
    field.owns(x)?;
    if x.is_zero() {
        return Err(Error::ZeroInput("approximate_by_unit"));
    }
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    let d = field.degree as f64;
    let ln_nm_over_d = ln_rational(&x.norm()) / d;
    let Some(eps1) = &field.fundamental_unit else {
        let deviation = archimedean_deviation(field, x, ln_nm_over_d);
        return Ok(UnitApproximation {
            epsilon: NFElement::one(field.tag),
            exponent: 0,
            deviation,
            initial_deviation: deviation,
            bound: 0.0,
        });
    };
    let m1 = eps1.ln_abs_embedding(0);
    let v1 = x.ln_abs_embedding(0) - ln_nm_over_d;
    let x1 = v1 / m1;
    let nf = n as f64;
    let y = (x1 / nf - 0.5).ceil() as i64;
    let epsilon = eps1.pow_signed(-y)?;
    let approx = &epsilon.pow(n as u64) * x;
    let deviation = archimedean_deviation(field, &approx, ln_nm_over_d);
    let bound = 0.5 * a3(field)? * nf * d * d * field.regulator;
    Ok(UnitApproximation {
        epsilon,
        exponent: y,
        deviation,
        initial_deviation: archimedean_deviation(field, x, ln_nm_over_d),
        bound,
    })
}
