//! Polynomials over K and the splitting data used by the bound formulas.

use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use crate::arith::bigutil::common_denominator;
use crate::arith::Factorizer;
use crate::constants::CParams;
use crate::error::{Error, Result};
use crate::field::{make_field, FieldKind, FieldSpec, FieldTag, NFElement};
use crate::orbits::{is_zero_periodic, Periodicity};

/// f = Σ aᵢ xⁱ with coefficients stored lowest degree first, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    tag: FieldTag,
    coeffs: Vec<NFElement>,
}

impl Poly {
    pub fn new(tag: FieldTag, mut coeffs: Vec<NFElement>) -> Result<Poly> {
        if coeffs.iter().any(|c| c.tag() != tag) {
            return Err(Error::FieldMismatch);
        }
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Ok(Poly { tag, coeffs })
    }

    pub fn from_ints(field: &FieldSpec, coeffs: &[i64]) -> Poly {
        Poly::new(field.tag, coeffs.iter().map(|&c| field.int(c)).collect()).expect("same field")
    }

    pub fn from_bigints(field: &FieldSpec, coeffs: &[BigInt]) -> Poly {
        Poly::new(field.tag, coeffs.iter().map(|c| field.int(c.clone())).collect()).expect("same field")
    }

    /// Π (x − rᵢ).
    pub fn from_roots(field: &FieldSpec, roots: &[NFElement]) -> Result<Poly> {
        let mut p = Poly::new(field.tag, vec![field.int(1)])?;
        for r in roots {
            field.owns(r)?;
            p = p.mul(&Poly::new(field.tag, vec![-r, field.int(1)])?);
        }
        Ok(p)
    }

    pub fn tag(&self) -> FieldTag {
        self.tag
    }

    pub fn coeffs(&self) -> &[NFElement] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> NFElement {
        self.coeffs.last().cloned().unwrap_or_else(|| NFElement::zero(self.tag))
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(NFElement::is_integral)
    }

    pub fn has_rational_coeffs(&self) -> bool {
        self.coeffs.iter().all(NFElement::is_rational)
    }

    pub fn eval(&self, x: &NFElement) -> NFElement {
        let mut acc = NFElement::zero(self.tag);
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * x) + c;
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * &NFElement::from_int(self.tag, i as i64))
            .collect();
        Poly::new(self.tag, coeffs).expect("same field")
    }

    fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::new(self.tag, vec![]).unwrap();
        }
        let mut out = vec![NFElement::zero(self.tag); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        Poly::new(self.tag, out).unwrap()
    }

    fn rem(&self, other: &Poly) -> Poly {
        let lead_inv = other.leading().inv().expect("nonzero divisor");
        let mut r = self.coeffs.clone();
        let dn = other.coeffs.len();
        while r.len() >= dn && !r.is_empty() {
            let q = &r[r.len() - 1] * &lead_inv;
            let shift = r.len() - dn;
            for (i, c) in other.coeffs.iter().enumerate() {
                r[shift + i] = &r[shift + i] - &(&q * c);
            }
            r.pop();
            while r.last().is_some_and(|c| c.is_zero()) {
                r.pop();
            }
        }
        Poly::new(self.tag, r).unwrap()
    }

    /// Monic gcd over K.
    pub fn gcd(&self, other: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            return a;
        }
        let inv = a.leading().inv().unwrap();
        Poly::new(self.tag, a.coeffs.iter().map(|c| c * &inv).collect()).unwrap()
    }

    /// deg f − deg gcd(f, f′).
    pub fn distinct_root_count(&self) -> usize {
        if self.degree() == 0 {
            return 0;
        }
        self.degree() - self.gcd(&self.derivative()).degree()
    }

    /// Rational coefficients, lowest first (requires `has_rational_coeffs`).
    fn rational_coeffs(&self) -> Vec<BigRational> {
        self.coeffs.iter().map(|c| c.a().clone()).collect()
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => "x".to_string(),
                _ => format!("x^{i}"),
            };
            let (neg, body) = if c.is_rational() {
                let a = c.a();
                let mag = a.abs();
                let body = if mag.is_one() && i > 0 {
                    mono.clone()
                } else if i > 0 {
                    format!("{mag}*{mono}")
                } else {
                    mag.to_string()
                };
                (a.is_negative(), body)
            } else if i > 0 {
                (false, format!("({c})*{mono}"))
            } else {
                (false, format!("({c})"))
            };
            match (first, neg) {
                (true, true) => write!(f, "-{body}")?,
                (true, false) => write!(f, "{body}")?,
                (false, true) => write!(f, " - {body}")?,
                (false, false) => write!(f, " + {body}")?,
            }
            first = false;
        }
        Ok(())
    }
}

impl Serialize for Poly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Integer coefficients after clearing denominators, lowest first.
fn integer_coeffs(cs: &[BigRational]) -> Vec<BigInt> {
    let den = common_denominator(cs.iter());
    cs.iter()
        .map(|c| (c * BigRational::from_integer(den.clone())).to_integer())
        .collect()
}

fn divisors(n: &BigUint, fz: &mut Factorizer) -> Result<Vec<BigInt>> {
    let fac = fz.factor(n)?;
    let mut out = vec![BigUint::one()];
    for (p, e) in &fac.factors {
        let mut next = Vec::new();
        for d in &out {
            let mut m = d.clone();
            for _ in 0..=*e {
                next.push(m.clone());
                m *= p;
            }
        }
        out = next;
    }
    Ok(out.into_iter().map(|d| BigInt::from_biguint(Sign::Plus, d)).collect())
}

fn eval_q(cs: &[BigRational], x: &BigRational) -> BigRational {
    cs.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
}

/// Some rational root, if any (rational root test).
fn rational_root(cs: &[BigRational], fz: &mut Factorizer) -> Result<Option<BigRational>> {
    let ints = integer_coeffs(cs);
    if ints[0].is_zero() {
        return Ok(Some(BigRational::zero()));
    }
    let ps = divisors(ints[0].magnitude(), fz)?;
    let qs = divisors(ints.last().unwrap().magnitude(), fz)?;
    for p in &ps {
        for q in &qs {
            for s in [p.clone(), -p.clone()] {
                let r = BigRational::new(s, q.clone());
                if eval_q(cs, &r).is_zero() {
                    return Ok(Some(r));
                }
            }
        }
    }
    Ok(None)
}

/// Synthetic division by (x − r).
fn deflate(cs: &[BigRational], r: &BigRational) -> Vec<BigRational> {
    let n = cs.len() - 1;
    let mut out = vec![BigRational::zero(); n];
    let mut carry = BigRational::zero();
    for i in (1..=n).rev() {
        carry = &carry * r + &cs[i];
        out[i - 1] = carry.clone();
    }
    out
}

fn discriminant(cs: &[BigRational]) -> BigRational {
    match cs.len() {
        3 => &cs[1] * &cs[1] - BigRational::from_integer(4.into()) * &cs[2] * &cs[0],
        4 => {
            let (d, c, b, a) = (&cs[0], &cs[1], &cs[2], &cs[3]);
            let n = |k: i64| BigRational::from_integer(k.into());
            b * b * c * c - n(4) * a * c * c * c - n(4) * b * b * b * d - n(27) * a * a * d * d
                + n(18) * a * b * c * d
        }
        _ => unreachable!("discriminant for degree 2 or 3 only"),
    }
}

/// Whether the rational q is a square in K.
fn is_square_in(tag: FieldTag, q: &BigRational, fz: &mut Factorizer) -> Result<bool> {
    if q.is_zero() {
        return Ok(true);
    }
    let kernel = squarefree_kernel(&(q.numer() * q.denom()), fz)?;
    Ok(kernel.is_one() || (!tag.is_rational() && kernel == BigInt::from(tag.radicand())))
}

/// Signed squarefree kernel of a nonzero integer via factorization.
pub(crate) fn squarefree_kernel(n: &BigInt, fz: &mut Factorizer) -> Result<BigInt> {
    let fac = fz.factor(n.magnitude())?;
    let mut k = BigUint::one();
    for (p, e) in &fac.factors {
        if e % 2 == 1 {
            k *= p;
        }
    }
    let k = BigInt::from_biguint(Sign::Plus, k);
    Ok(if n.is_negative() { -k } else { k })
}

/// [L : K] for a polynomial of degree ≤ 3 with rational coefficients.
pub fn splitting_degree_small(tag: FieldTag, f: &Poly, fz: &mut Factorizer) -> Result<u32> {
    if !f.has_rational_coeffs() || f.degree() > 3 {
        return Err(Error::precondition("splitting degree needs rational coefficients and degree ≤ 3"));
    }
    let mut cs = f.rational_coeffs();
    while cs.len() > 3 {
        match rational_root(&cs, fz)? {
            Some(r) => cs = deflate(&cs, &r),
            None => break,
        }
    }
    Ok(match cs.len() {
        0..=2 => 1,
        3 => {
            if is_square_in(tag, &discriminant(&cs), fz)? {
                1
            } else {
                2
            }
        }
        _ => {
            // irreducible cubic over ℚ stays irreducible over a quadratic field
            if is_square_in(tag, &discriminant(&cs), fz)? {
                3
            } else {
                6
            }
        }
    })
}

/// Values for [L : K], ℏ_L and R_L that cannot be derived and must come from configuration.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SplittingOverrides {
    pub degree: Option<u32>,
    pub class_number: Option<u64>,
    pub regulator: Option<f64>,
}

/// f together with everything the bound formulas need to know about it.
#[derive(Debug, Clone, Serialize)]
pub struct PolySpec {
    pub poly: Poly,
    pub degree: usize,
    pub distinct_root_count: usize,
    pub splitting_degree: Option<u32>,
    pub class_number_l: Option<u64>,
    pub regulator_l: Option<f64>,
    pub zero_periodic: Periodicity,
    pub c_params: CParams,
}

impl PolySpec {
    pub fn new(
        field: &FieldSpec,
        poly: Poly,
        c_params: CParams,
        overrides: &SplittingOverrides,
        fz: &mut Factorizer,
    ) -> Result<PolySpec> {
        Self::build(field, poly, c_params, overrides, false, fz)
    }

    /// f = Π (x − rᵢ), which splits over K.
    pub fn from_roots(
        field: &FieldSpec,
        roots: &[NFElement],
        c_params: CParams,
        fz: &mut Factorizer,
    ) -> Result<PolySpec> {
        let poly = Poly::from_roots(field, roots)?;
        Self::build(field, poly, c_params, &SplittingOverrides::default(), true, fz)
    }

    fn build(
        field: &FieldSpec,
        poly: Poly,
        c_params: CParams,
        ov: &SplittingOverrides,
        known_split: bool,
        fz: &mut Factorizer,
    ) -> Result<PolySpec> {
        if poly.tag() != field.tag {
            return Err(Error::FieldMismatch);
        }
        if !poly.is_integral() {
            return Err(Error::precondition("polynomial coefficients must be integral"));
        }
        let computed = if known_split || poly.degree() <= 1 {
            Some(1)
        } else if poly.has_rational_coeffs() && poly.degree() <= 3 {
            Some(splitting_degree_small(field.tag, &poly, fz)?)
        } else {
            None
        };
        let splitting_degree = computed.or(ov.degree);
        let (mut class_number_l, mut regulator_l) = (None, None);
        match splitting_degree {
            Some(1) => {
                class_number_l = Some(field.class_number);
                regulator_l = Some(field.regulator);
            }
            Some(2) if field.is_rational() && poly.degree() >= 2 => {
                if let Some(l) = quadratic_splitting_field(&poly, fz)? {
                    class_number_l = Some(l.class_number);
                    regulator_l = Some(l.regulator);
                }
            }
            _ => {}
        }
        let zero_periodic = if poly.degree() >= 2 {
            is_zero_periodic(field, &poly)?
        } else {
            Periodicity::Unknown(0)
        };
        Ok(PolySpec {
            degree: poly.degree(),
            distinct_root_count: poly.distinct_root_count(),
            splitting_degree,
            class_number_l: class_number_l.or(ov.class_number),
            regulator_l: regulator_l.or(ov.regulator),
            zero_periodic,
            poly,
            c_params,
        })
    }

    pub fn d_split(&self) -> Result<u32> {
        self.splitting_degree
            .ok_or_else(|| Error::MissingConfig("splitting_degree".into()))
    }

    pub fn h_l(&self) -> Result<u64> {
        self.class_number_l
            .ok_or_else(|| Error::MissingConfig("splitting_class_number".into()))
    }

    pub fn r_l(&self) -> Result<f64> {
        self.regulator_l
            .ok_or_else(|| Error::MissingConfig("splitting_regulator".into()))
    }

    pub fn splits_over_base(&self) -> bool {
        self.splitting_degree == Some(1)
    }

    /// The "at least 3 distinct roots" hypothesis.
    pub fn require_three_roots(&self) -> Result<()> {
        if self.distinct_root_count >= 3 {
            Ok(())
        } else {
            Err(Error::precondition(format!(
                "f = {} has {} distinct roots; at least 3 are required",
                self.poly, self.distinct_root_count
            )))
        }
    }
}

/// ℚ(√Δ′) where Δ′ is the squarefree part of the discriminant of the quadratic factor of f.
pub(crate) fn quadratic_splitting_field(f: &Poly, fz: &mut Factorizer) -> Result<Option<FieldSpec>> {
    let mut cs = f.rational_coeffs();
    while cs.len() > 3 {
        match rational_root(&cs, fz)? {
            Some(r) => cs = deflate(&cs, &r),
            None => return Ok(None),
        }
    }
    if cs.len() != 3 {
        return Ok(None);
    }
    let disc = discriminant(&cs);
    let kernel = squarefree_kernel(&(disc.numer() * disc.denom()), fz)?;
    if kernel.is_one() {
        return Ok(None);
    }
    let d: i64 = kernel
        .try_into()
        .map_err(|_| Error::invalid("splitting field discriminant out of range"))?;
    make_field(FieldKind::Quadratic, Some(d)).map(Some)
}
