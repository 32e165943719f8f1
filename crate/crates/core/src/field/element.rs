//! Exact elements of ℚ or ℚ(√D) in coordinates over the integral basis {1, ω}.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use crate::arith::bigutil::{common_denominator, ln_rational, logaddexp};
use crate::arith::rational as qa;
use crate::error::{Error, Result};

/// Identifies the field an element lives in. A radicand of 1 means ℚ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldTag {
    radicand: i64,
}

impl FieldTag {
    pub const RATIONAL: FieldTag = FieldTag { radicand: 1 };

    /// Caller guarantees `d` squarefree and ≠ 0, 1.
    pub(crate) fn quadratic(d: i64) -> Self {
        FieldTag { radicand: d }
    }

    pub fn is_rational(&self) -> bool {
        self.radicand == 1
    }

    pub fn radicand(&self) -> i64 {
        self.radicand
    }

    pub fn degree(&self) -> u32 {
        if self.is_rational() {
            1
        } else {
            2
        }
    }

    /// True when ω = (1+√D)/2.
    pub fn half_integral_basis(&self) -> bool {
        !self.is_rational() && self.radicand.rem_euclid(4) == 1
    }

    /// (t, n) with ω² = tω + n.
    pub fn omega_relation(&self) -> (i64, i64) {
        if self.half_integral_basis() {
            (1, (self.radicand - 1) / 4)
        } else {
            (0, self.radicand)
        }
    }

    pub fn discriminant(&self) -> i64 {
        if self.is_rational() {
            1
        } else if self.half_integral_basis() {
            self.radicand
        } else {
            4 * self.radicand
        }
    }

    pub fn is_real(&self) -> bool {
        self.radicand > 0
    }
}

impl fmt::Display for FieldTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            write!(f, "Q")
        } else {
            write!(f, "Q(sqrt({}))", self.radicand)
        }
    }
}

/// a + b·ω with exact rational coordinates. `b = 0` over ℚ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NFElement {
    a: BigRational,
    b: BigRational,
    tag: FieldTag,
}

// Coordinates are always reduced with positive denominators, so hashing the raw
// parts agrees with `Eq`. `BigRational`'s own hash recurses once per
// continued-fraction term and overflows the stack on large orbit iterates.
impl Hash for NFElement {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.tag.hash(state);
        for q in [&self.a, &self.b] {
            q.numer().hash(state);
            q.denom().hash(state);
        }
    }
}

fn rat(n: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(n.into())
}

impl NFElement {
    pub fn new(tag: FieldTag, a: BigRational, b: BigRational) -> Self {
        assert!(
            !tag.is_rational() || b.is_zero(),
            "rational elements have no ω coordinate"
        );
        NFElement { a, b, tag }
    }

    pub fn from_int(tag: FieldTag, n: impl Into<BigInt>) -> Self {
        NFElement::new(tag, rat(n), BigRational::zero())
    }

    pub fn from_ints(tag: FieldTag, a: impl Into<BigInt>, b: impl Into<BigInt>) -> Self {
        NFElement::new(tag, rat(a), rat(b))
    }

    pub fn from_rational(tag: FieldTag, q: BigRational) -> Self {
        NFElement::new(tag, q, BigRational::zero())
    }

    pub fn zero(tag: FieldTag) -> Self {
        Self::from_int(tag, 0)
    }

    pub fn one(tag: FieldTag) -> Self {
        Self::from_int(tag, 1)
    }

    pub fn omega(tag: FieldTag) -> Self {
        Self::from_ints(tag, 0, 1)
    }

    pub fn tag(&self) -> FieldTag {
        self.tag
    }

    pub fn a(&self) -> &BigRational {
        &self.a
    }

    pub fn b(&self) -> &BigRational {
        &self.b
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.a.is_one() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    /// Both integral-basis coordinates are integers.
    pub fn is_integral(&self) -> bool {
        self.a.is_integer() && self.b.is_integer()
    }

    /// Smallest positive integer `m` with `m·x ∈ O`.
    pub fn denominator(&self) -> BigInt {
        common_denominator([&self.a, &self.b])
    }

    /// Integer coordinates of `denominator()·x`.
    pub fn scaled_integral_coords(&self) -> (BigInt, BigInt, BigInt) {
        let den = self.denominator();
        let a = (&self.a * rat(den.clone())).to_integer();
        let b = (&self.b * rat(den.clone())).to_integer();
        (a, b, den)
    }

    /// Power-basis coordinates (A, B) with x = A + B√D.
    pub fn power_basis(&self) -> (BigRational, BigRational) {
        if self.tag.half_integral_basis() {
            let half = BigRational::new(BigInt::one(), BigInt::from(2));
            (&self.a + &self.b * &half, &self.b * &half)
        } else {
            (self.a.clone(), self.b.clone())
        }
    }

    fn check(&self, other: &NFElement) -> Result<()> {
        if self.tag == other.tag {
            Ok(())
        } else {
            Err(Error::FieldMismatch)
        }
    }

    pub fn try_add(&self, other: &NFElement) -> Result<NFElement> {
        self.check(other)?;
        Ok(NFElement::new(self.tag, qa::add(&self.a, &other.a), qa::add(&self.b, &other.b)))
    }

    pub fn try_sub(&self, other: &NFElement) -> Result<NFElement> {
        self.check(other)?;
        Ok(NFElement::new(self.tag, qa::sub(&self.a, &other.a), qa::sub(&self.b, &other.b)))
    }

    pub fn try_mul(&self, other: &NFElement) -> Result<NFElement> {
        self.check(other)?;
        if self.tag.is_rational() {
            return Ok(NFElement::from_rational(self.tag, qa::mul(&self.a, &other.a)));
        }
        let (t, n) = self.tag.omega_relation();
        let bb = qa::mul(&self.b, &other.b);
        let a = qa::add(&qa::mul(&self.a, &other.a), &qa::mul_int(&bb, n));
        let cross = qa::add(&qa::mul(&self.a, &other.b), &qa::mul(&self.b, &other.a));
        let b = qa::add(&cross, &qa::mul_int(&bb, t));
        Ok(NFElement::new(self.tag, a, b))
    }

    /// The nontrivial automorphism; the identity on ℚ.
    pub fn conj(&self) -> NFElement {
        if self.tag.is_rational() {
            return self.clone();
        }
        let (t, _) = self.tag.omega_relation();
        NFElement::new(self.tag, qa::add(&self.a, &qa::mul_int(&self.b, t)), qa::neg(&self.b))
    }

    /// Signed field norm.
    pub fn norm(&self) -> BigRational {
        if self.tag.is_rational() {
            return self.a.clone();
        }
        let (t, n) = self.tag.omega_relation();
        let ab = qa::mul(&self.a, &self.b);
        let lead = qa::add(&qa::mul(&self.a, &self.a), &qa::mul_int(&ab, t));
        qa::sub(&lead, &qa::mul_int(&qa::mul(&self.b, &self.b), n))
    }

    pub fn trace(&self) -> BigRational {
        if self.tag.is_rational() {
            return self.a.clone();
        }
        let (t, _) = self.tag.omega_relation();
        qa::add(&qa::mul_int(&self.a, 2), &qa::mul_int(&self.b, t))
    }

    pub fn inv(&self) -> Result<NFElement> {
        if self.is_zero() {
            return Err(Error::ZeroInput("inverse"));
        }
        if self.tag.is_rational() {
            return Ok(NFElement::from_rational(self.tag, qa::div(&BigRational::one(), &self.a)));
        }
        let nm = self.norm();
        let c = self.conj();
        Ok(NFElement::new(self.tag, qa::div(&c.a, &nm), qa::div(&c.b, &nm)))
    }

    pub fn try_div(&self, other: &NFElement) -> Result<NFElement> {
        self.try_mul(&other.inv()?)
    }

    pub fn pow(&self, mut e: u64) -> NFElement {
        let mut base = self.clone();
        let mut acc = NFElement::one(self.tag);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn pow_signed(&self, e: i64) -> Result<NFElement> {
        if e >= 0 {
            Ok(self.pow(e as u64))
        } else {
            Ok(self.inv()?.pow(e.unsigned_abs()))
        }
    }

    /// Bit length of the largest numerator/denominator among the coordinates.
    pub fn bit_size(&self) -> u64 {
        [
            self.a.numer(),
            self.a.denom(),
            self.b.numer(),
            self.b.denom(),
        ]
        .iter()
        .map(|n| n.bits())
        .max()
        .unwrap_or(0)
    }

    /// log|σ(x)| for the archimedean embedding `index`.
    ///
    /// Real fields: index 0 sends √D ↦ +√D, index 1 sends √D ↦ −√D. Imaginary
    /// fields have the single complex embedding (index 0). Returns −∞ at zero.
    pub fn ln_abs_embedding(&self, index: usize) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        if self.tag.is_rational() {
            return ln_rational(&self.a);
        }
        if !self.tag.is_real() {
            return 0.5 * ln_rational(&self.norm());
        }
        let (pa, pb) = self.power_basis();
        let pb = if index == 0 { pb } else { -pb };
        let half_ln_d = 0.5 * (self.tag.radicand as f64).ln();
        if pa.is_zero() {
            return ln_rational(&pb) + half_ln_d;
        }
        if pb.is_zero() {
            return ln_rational(&pa);
        }
        let big = logaddexp(ln_rational(&pa), ln_rational(&pb) + half_ln_d);
        if pa.is_positive() == pb.is_positive() {
            big
        } else {
            // |A − |B|√D| = |N| / (|A| + |B|√D) avoids cancellation.
            ln_rational(&self.norm()) - big
        }
    }

    /// Numerical value of a real embedding (ℚ or real quadratic).
    pub fn embed_real(&self, index: usize) -> f64 {
        let ln = self.ln_abs_embedding(index);
        let sign = if self.tag.is_rational() {
            self.a.is_negative()
        } else {
            let (pa, pb) = self.power_basis();
            let pb = if index == 0 { pb } else { -pb };
            let approx = ln_to_f64_signed(&pa) + ln_to_f64_signed(&pb) * (self.tag.radicand as f64).sqrt();
            approx < 0.0
        };
        let v = ln.exp();
        if sign {
            -v
        } else {
            v
        }
    }
}

fn ln_to_f64_signed(q: &BigRational) -> f64 {
    if q.is_zero() {
        return 0.0;
    }
    let v = ln_rational(q).exp();
    if q.is_negative() {
        -v
    } else {
        v
    }
}

impl fmt::Display for NFElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        let b = if self.b.is_one() {
            "w".to_string()
        } else if (-&self.b).is_one() {
            "-w".to_string()
        } else {
            format!("{}*w", self.b)
        };
        if self.a.is_zero() {
            write!(f, "{b}")
        } else if b.starts_with('-') {
            write!(f, "{}{}", self.a, b)
        } else {
            write!(f, "{}+{}", self.a, b)
        }
    }
}

impl Serialize for NFElement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Parses "a", "a/b", "a+b*w", "a-w", "b*w" in integral-basis coordinates.
pub fn parse_element(tag: FieldTag, text: &str) -> Result<NFElement> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(Error::invalid("empty element"));
    }
    let parse_q = |t: &str| -> Result<BigRational> {
        t.parse::<BigRational>()
            .map_err(|_| Error::invalid(format!("bad rational '{t}' in '{text}'")))
    };
    let Some(wpos) = s.find('w') else {
        return Ok(NFElement::from_rational(tag, parse_q(&s)?));
    };
    if tag.is_rational() {
        return Err(Error::invalid(format!("'{text}' uses w over Q")));
    }
    if wpos != s.len() - 1 {
        return Err(Error::invalid(format!("w must come last in '{text}'")));
    }
    let head = &s[..wpos];
    let head = head.strip_suffix('*').unwrap_or(head);
    let split = head
        .char_indices()
        .skip(1)
        .filter(|&(i, c)| (c == '+' || c == '-') && !head[..i].ends_with('/'))
        .map(|(i, _)| i)
        .last();
    let (a_txt, b_txt) = match split {
        Some(i) => (&head[..i], &head[i..]),
        None => ("0", head),
    };
    let b = match b_txt {
        "" | "+" => BigRational::one(),
        "-" => -BigRational::one(),
        t => parse_q(t.strip_prefix('+').unwrap_or(t))?,
    };
    Ok(NFElement::new(tag, parse_q(a_txt)?, b))
}

impl Add for &NFElement {
    type Output = NFElement;
    fn add(self, rhs: &NFElement) -> NFElement {
        self.try_add(rhs).expect("field mismatch in add")
    }
}

impl Sub for &NFElement {
    type Output = NFElement;
    fn sub(self, rhs: &NFElement) -> NFElement {
        self.try_sub(rhs).expect("field mismatch in sub")
    }
}

impl Mul for &NFElement {
    type Output = NFElement;
    fn mul(self, rhs: &NFElement) -> NFElement {
        self.try_mul(rhs).expect("field mismatch in mul")
    }
}

impl Neg for &NFElement {
    type Output = NFElement;
    fn neg(self) -> NFElement {
        NFElement::new(self.tag, qa::neg(&self.a), qa::neg(&self.b))
    }
}

/// Operation selector for `element_arith`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Mul,
    Pow(u64),
    Conj,
    Inv,
}

pub fn element_arith(x: &NFElement, y: Option<&NFElement>, op: ArithOp) -> Result<NFElement> {
    let need_y = || y.ok_or_else(|| Error::invalid("binary operation needs two operands"));
    match op {
        ArithOp::Add => x.try_add(need_y()?),
        ArithOp::Mul => x.try_mul(need_y()?),
        ArithOp::Pow(e) => Ok(x.pow(e)),
        ArithOp::Conj => Ok(x.conj()),
        ArithOp::Inv => x.inv(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q2() -> FieldTag {
        FieldTag::quadratic(2)
    }

    #[test]
    fn hashing_long_continued_fractions() {
        // F(n+1)/F(n) has n partial quotients
        let (mut f0, mut f1) = (BigInt::one(), BigInt::one());
        for _ in 0..100_000 {
            let next = &f0 + &f1;
            f0 = std::mem::replace(&mut f1, next);
        }
        let x = NFElement::from_rational(FieldTag::RATIONAL, BigRational::new(f1, f0));
        let mut set = std::collections::HashSet::new();
        set.insert(x.clone());
        assert!(set.contains(&x));
    }

    #[test]
    fn fundamental_unit_norm() {
        let u = NFElement::from_ints(q2(), 1, 1);
        let v = NFElement::from_ints(q2(), 1, -1);
        assert_eq!(&u * &v, NFElement::from_int(q2(), -1));
        assert_eq!(u.norm(), rat(-1));
    }

    #[test]
    fn conjugation_and_inverse() {
        let x = NFElement::from_ints(q2(), 3, 1);
        assert_eq!(x.conj(), NFElement::from_ints(q2(), 3, -1));
        let q = NFElement::from_rational(FieldTag::RATIONAL, BigRational::new(2.into(), 3.into()));
        assert_eq!(
            q.inv().unwrap(),
            NFElement::from_rational(FieldTag::RATIONAL, BigRational::new(3.into(), 2.into()))
        );
        assert!(NFElement::zero(q2()).inv().is_err());
        assert_eq!(x.norm(), rat(7));
    }

    #[test]
    fn golden_basis_multiplication() {
        let t = FieldTag::quadratic(5);
        let w = NFElement::omega(t);
        // ω² = ω + 1
        assert_eq!(&w * &w, NFElement::from_ints(t, 1, 1));
        assert_eq!(w.norm(), rat(-1));
        assert_eq!(w.conj(), NFElement::from_ints(t, 1, -1));
    }

    #[test]
    fn mismatch_is_error() {
        let x = NFElement::one(q2());
        let y = NFElement::one(FieldTag::RATIONAL);
        assert_eq!(x.try_add(&y), Err(Error::FieldMismatch));
    }

    #[test]
    fn embeddings_without_cancellation() {
        let x = NFElement::from_ints(q2(), 3, 1);
        assert!((x.embed_real(0) - (3.0 + 2f64.sqrt())).abs() < 1e-12);
        assert!((x.embed_real(1) - (3.0 - 2f64.sqrt())).abs() < 1e-12);
        // (1+√2)^-40 is tiny at the first embedding; exact route must keep precision.
        let u = NFElement::from_ints(q2(), 1, 1).pow(40).inv().unwrap();
        let expected = -40.0 * (1.0 + 2f64.sqrt()).ln();
        assert!((u.ln_abs_embedding(0) - expected).abs() < 1e-10);
        assert!((u.ln_abs_embedding(1) + expected).abs() < 1e-10);
    }

    #[test]
    fn parse_round_trip() {
        let t = q2();
        for s in ["3", "-1/2", "3+w", "3-w", "2*w", "-5/3+7/2*w", "-w"] {
            let x = parse_element(t, s).unwrap();
            assert_eq!(parse_element(t, &x.to_string()).unwrap(), x, "{s}");
        }
        assert!(parse_element(FieldTag::RATIONAL, "1+w").is_err());
    }
}
