//! Rational arithmetic that stays fast on integers and on operands of very different sizes.
//!
//! `num-bigint`'s gcd is binary (Stein), which is quadratic in the larger operand even
//! when the other is tiny; orbit iterates hit that case constantly.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// gcd by remainder steps until both operands are small enough for the library gcd.
pub fn gcd_big(a: &BigUint, b: &BigUint) -> BigUint {
    let (mut x, mut y) = if a >= b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
    while !y.is_zero() {
        if x.bits() <= 2 * y.bits() + 64 && x.bits() < 4096 {
            return x.gcd(&y);
        }
        let r = &x % &y;
        x = y;
        y = r;
    }
    x
}

/// Nonnegative lcm of two integers.
pub fn lcm_int(a: &BigInt, b: &BigInt) -> BigInt {
    if a.is_zero() || b.is_zero() {
        return BigInt::zero();
    }
    let g = gcd_int(a, b);
    BigInt::from((a.magnitude() / g.magnitude()) * b.magnitude())
}

fn gcd_int(a: &BigInt, b: &BigInt) -> BigInt {
    BigInt::from(gcd_big(a.magnitude(), b.magnitude()))
}

fn reduced(num: BigInt, den: BigInt) -> BigRational {
    if den.is_one() {
        return BigRational::from_integer(num);
    }
    let g = gcd_int(&num, &den);
    let (mut n, mut d) = if g.is_one() { (num, den) } else { (num / &g, den / &g) };
    if d < BigInt::zero() {
        n = -n;
        d = -d;
    }
    BigRational::new_raw(n, d)
}

pub fn add(x: &BigRational, y: &BigRational) -> BigRational {
    if x.is_integer() && y.is_integer() {
        return BigRational::from_integer(x.numer() + y.numer());
    }
    if x.denom() == y.denom() {
        return reduced(x.numer() + y.numer(), x.denom().clone());
    }
    reduced(
        x.numer() * y.denom() + y.numer() * x.denom(),
        x.denom() * y.denom(),
    )
}

pub fn sub(x: &BigRational, y: &BigRational) -> BigRational {
    add(x, &neg(y))
}

pub fn neg(x: &BigRational) -> BigRational {
    BigRational::new_raw(-x.numer(), x.denom().clone())
}

pub fn mul(x: &BigRational, y: &BigRational) -> BigRational {
    if x.is_integer() && y.is_integer() {
        return BigRational::from_integer(x.numer() * y.numer());
    }
    if x.is_zero() || y.is_zero() {
        return BigRational::zero();
    }
    // cross-cancel so the product is already in lowest terms
    let g1 = gcd_int(x.numer(), y.denom());
    let g2 = gcd_int(y.numer(), x.denom());
    let n = (x.numer() / &g1) * (y.numer() / &g2);
    let d = (x.denom() / &g2) * (y.denom() / &g1);
    if d.is_one() {
        BigRational::from_integer(n)
    } else {
        BigRational::new_raw(n, d)
    }
}

pub fn mul_int(x: &BigRational, k: i64) -> BigRational {
    mul(x, &BigRational::from_integer(BigInt::from(k)))
}

/// x / y for y ≠ 0.
pub fn div(x: &BigRational, y: &BigRational) -> BigRational {
    assert!(!y.is_zero(), "division by zero");
    let (n, d) = if y.numer() < &BigInt::zero() {
        (-y.denom(), -y.numer())
    } else {
        (y.denom().clone(), y.numer().clone())
    };
    mul(x, &BigRational::new_raw(n, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    proptest! {
        #[test]
        fn agrees_with_library(a in -500i64..500, b in 1i64..60, c in -500i64..500, e in 1i64..60) {
            let (x, y) = (q(a, b), q(c, e));
            prop_assert_eq!(add(&x, &y), &x + &y);
            prop_assert_eq!(sub(&x, &y), &x - &y);
            prop_assert_eq!(mul(&x, &y), &x * &y);
            if c != 0 {
                prop_assert_eq!(div(&x, &y), &x / &y);
            }
        }
    }

    #[test]
    fn unbalanced_gcd() {
        let big = BigUint::from(3u32).pow(40_000) * 10u32;
        assert_eq!(gcd_big(&big, &BigUint::from(4u32)), BigUint::from(2u32));
        assert_eq!(gcd_big(&BigUint::zero(), &BigUint::from(9u32)), BigUint::from(9u32));
    }
}
