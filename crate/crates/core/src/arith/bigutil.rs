//! Small numeric helpers shared by the field and height code.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Natural log of |n|; `-inf` for zero. Accurate for arbitrarily large inputs.
pub fn ln_biguint(n: &BigUint) -> f64 {
    if n.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn ln_bigint(n: &BigInt) -> f64 {
    ln_biguint(n.magnitude())
}

/// Natural log of |q|.
pub fn ln_rational(q: &BigRational) -> f64 {
    ln_bigint(q.numer()) - ln_bigint(q.denom())
}

/// log(e^a + e^b) without overflow.
pub fn logaddexp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// log⁺x = max(log x, 0), with log⁺0 = 0. Takes log x as input.
pub fn log_plus_of_ln(ln_x: f64) -> f64 {
    if ln_x > 0.0 {
        ln_x
    } else {
        0.0
    }
}

/// log* x = max(log x, 1), with log* 0 = 1.
pub fn log_star(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    x.ln().max(1.0)
}

/// p-adic valuation of a nonzero integer, dividing it out in place.
pub fn remove_factor(n: &mut BigUint, p: &BigUint) -> u32 {
    if n.is_zero() || *p <= BigUint::one() {
        return 0;
    }
    // Divide by p, p², p⁴, ... while they divide, then greedily back down.
    let mut powers = vec![p.clone()];
    let mut k = 0u32;
    loop {
        let top = powers.last().expect("nonempty");
        let (q, r) = n.div_rem(top);
        if !r.is_zero() {
            break;
        }
        *n = q;
        k += 1 << (powers.len() - 1);
        let sq = top * top;
        if sq.bits() > n.bits() {
            break;
        }
        powers.push(sq);
    }
    for (i, pw) in powers.iter().enumerate().rev() {
        let (q, r) = n.div_rem(pw);
        if r.is_zero() {
            *n = q;
            k += 1 << i;
        }
    }
    k
}

pub fn valuation(n: &BigInt, p: &BigUint) -> u32 {
    let mut m = n.magnitude().clone();
    remove_factor(&mut m, p)
}

/// Jacobi symbol (a/n) for odd positive n.
pub fn jacobi(a: &BigInt, n: &BigUint) -> i32 {
    assert!(n.is_odd(), "jacobi symbol needs odd modulus");
    let n_int = BigInt::from_biguint(Sign::Plus, n.clone());
    let mut a = a.mod_floor(&n_int).to_biguint().unwrap();
    let mut n = n.clone();
    let mut result = 1;
    let three = BigUint::from(3u32);
    let eight = BigUint::from(8u32);
    let four = BigUint::from(4u32);
    while !a.is_zero() {
        while a.is_even() {
            a >>= 1;
            let r = (&n % &eight).to_u32().unwrap();
            if r == 3 || r == 5 {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if &a % &four == three && &n % &four == three {
            result = -result;
        }
        a %= &n;
    }
    if n.is_one() {
        result
    } else {
        0
    }
}

/// A square root of `a` modulo the odd prime `p` (Tonelli–Shanks), if one exists.
pub fn sqrt_mod_prime(a: &BigInt, p: &BigUint) -> Option<BigUint> {
    let p_int = BigInt::from_biguint(Sign::Plus, p.clone());
    let a = a.mod_floor(&p_int).to_biguint().unwrap();
    if a.is_zero() {
        return Some(BigUint::zero());
    }
    if jacobi(&BigInt::from(a.clone()), p) != 1 {
        return None;
    }
    let one = BigUint::one();
    let p_minus_1 = p - &one;
    let mut q = p_minus_1.clone();
    let mut s = 0u32;
    while q.is_even() {
        q >>= 1;
        s += 1;
    }
    if s == 1 {
        let e = (p + &one) >> 2;
        return Some(a.modpow(&e, p));
    }
    let mut z = BigUint::from(2u32);
    while jacobi(&BigInt::from(z.clone()), p) != -1 {
        z += 1u32;
    }
    let mut m = s;
    let mut c = z.modpow(&q, p);
    let mut t = a.modpow(&q, p);
    let mut r = a.modpow(&((&q + &one) >> 1), p);
    while !t.is_one() {
        let mut i = 0;
        let mut tt = t.clone();
        while !tt.is_one() {
            tt = (&tt * &tt) % p;
            i += 1;
            if i == m {
                return None;
            }
        }
        let b = c.modpow(&(BigUint::one() << (m - i - 1)), p);
        m = i;
        c = (&b * &b) % p;
        t = (&t * &c) % p;
        r = (&r * &b) % p;
    }
    Some(r)
}

pub fn is_squarefree(n: i64) -> bool {
    if n == 0 {
        return false;
    }
    let mut m = n.unsigned_abs();
    let mut p = 2u64;
    while p * p <= m {
        if m.is_multiple_of(p) {
            m /= p;
            if m.is_multiple_of(p) {
                return false;
            }
        }
        p += 1;
    }
    true
}

/// Squarefree kernel of a nonzero integer, keeping the sign: n = s·k² with s squarefree.
pub fn squarefree_part(n: &BigInt) -> BigInt {
    let sign = n.sign();
    let mut m = n.magnitude().clone();
    let mut out = BigUint::one();
    let mut p = BigUint::from(2u32);
    loop {
        if &p * &p > m {
            break;
        }
        let e = remove_factor(&mut m, &p);
        if e % 2 == 1 {
            out *= &p;
        }
        p += 1u32;
    }
    out *= m;
    BigInt::from_biguint(if sign == Sign::Minus { Sign::Minus } else { Sign::Plus }, out)
}

pub fn is_perfect_square(n: &BigInt) -> bool {
    if n.is_negative() {
        return false;
    }
    let r = n.sqrt();
    &r * &r == *n
}

/// Least common multiple of the denominators of the given rationals.
pub fn common_denominator<'a>(qs: impl IntoIterator<Item = &'a BigRational>) -> BigInt {
    qs.into_iter()
        .fold(BigInt::one(), |acc, q| crate::arith::rational::lcm_int(&acc, q.denom()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valuations_by_repeated_squaring() {
        let p = BigUint::from(3u32);
        for v in [0u32, 1, 2, 7, 64, 1000, 4097] {
            let mut n = num_traits::Pow::pow(&p, v) * BigUint::from(1_000_001u32);
            assert_eq!(remove_factor(&mut n, &p), v);
            assert_eq!(n, BigUint::from(1_000_001u32));
        }
        let mut pure = num_traits::Pow::pow(&p, 77u32);
        assert_eq!(remove_factor(&mut pure, &p), 77);
        assert!(pure.is_one());
    }

    #[test]
    fn ln_of_huge_integer() {
        let n = BigUint::one() << 5000u32;
        let expected = 5000.0 * std::f64::consts::LN_2;
        assert!((ln_biguint(&n) - expected).abs() < 1e-9);
        assert_eq!(ln_biguint(&BigUint::zero()), f64::NEG_INFINITY);
    }

    #[test]
    fn log_star_conventions() {
        assert_eq!(log_star(0.0), 1.0);
        assert_eq!(log_star(2.0), 1.0);
        assert!((log_star(10.0) - 10f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn jacobi_small() {
        let p = BigUint::from(7u32);
        assert_eq!(jacobi(&BigInt::from(2), &p), 1);
        assert_eq!(jacobi(&BigInt::from(3), &p), -1);
        assert_eq!(jacobi(&BigInt::from(14), &p), 0);
    }

    #[test]
    fn tonelli_shanks_roots() {
        for p in [7u32, 13, 17, 41, 97, 7681] {
            let pb = BigUint::from(p);
            for a in 1..p.min(60) {
                let ai = BigInt::from(a);
                if let Some(r) = sqrt_mod_prime(&ai, &pb) {
                    assert_eq!((&r * &r) % &pb, BigUint::from(a % p));
                } else {
                    assert_eq!(jacobi(&ai, &pb), -1);
                }
            }
        }
    }

    #[test]
    fn squarefree_helpers() {
        assert!(is_squarefree(-5));
        assert!(!is_squarefree(12));
        assert!(!is_squarefree(0));
        assert_eq!(squarefree_part(&BigInt::from(-72)), BigInt::from(-2));
        assert_eq!(squarefree_part(&BigInt::from(49)), BigInt::from(1));
    }
}
