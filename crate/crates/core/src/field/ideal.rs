//! Prime ideals of O, exact valuations and ideal factorization of elements.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use super::{FieldSpec, FieldTag, NFElement};
use crate::arith::bigutil::{jacobi, sqrt_mod_prime, valuation};
use crate::arith::{is_prime, Factorizer};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrimeKind {
    SplitA,
    SplitB,
    Inert,
    Ramified,
    Rational,
}

/// A nonzero prime ideal of O, stored as (p, ω − c) when it has degree one over a quadratic field.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PrimeIdeal {
    tag: FieldTag,
    p: BigUint,
    kind: PrimeKind,
    root: Option<BigUint>,
}

impl PrimeIdeal {
    pub fn p(&self) -> &BigUint {
        &self.p
    }

    pub fn kind(&self) -> PrimeKind {
        self.kind
    }

    pub fn tag(&self) -> FieldTag {
        self.tag
    }

    /// The residue c with ω ≡ c modulo the ideal (degree-one quadratic ideals only).
    pub fn root(&self) -> Option<&BigUint> {
        self.root.as_ref()
    }

    pub fn e(&self) -> u32 {
        if self.kind == PrimeKind::Ramified {
            2
        } else {
            1
        }
    }

    pub fn f(&self) -> u32 {
        if self.kind == PrimeKind::Inert {
            2
        } else {
            1
        }
    }

    pub fn local_degree(&self) -> u32 {
        self.e() * self.f()
    }

    pub fn norm(&self) -> BigUint {
        Pow::pow(&self.p, self.f())
    }

    /// log Nm(𝐩).
    pub fn ln_norm(&self) -> f64 {
        self.f() as f64 * self.p.to_f64().expect("prime fits in f64").ln()
    }

    /// Short label: "p" for a single ideal above p, "p.a"/"p.b" for split ideals.
    pub fn label(&self) -> String {
        match self.kind {
            PrimeKind::SplitA => format!("{}.a", self.p),
            PrimeKind::SplitB => format!("{}.b", self.p),
            _ => self.p.to_string(),
        }
    }

    /// ord_𝐩(x) for nonzero x, exact.
    pub fn ord(&self, x: &NFElement) -> Result<i64> {
        if x.tag() != self.tag {
            return Err(Error::FieldMismatch);
        }
        if x.is_zero() {
            return Err(Error::ZeroInput("ord"));
        }
        let (a, b, den) = x.scaled_integral_coords();
        let e = self.e() as i64;
        let den_part = e * valuation(&den, &self.p) as i64;
        Ok(self.ord_integral(&a, &b) - den_part)
    }

    /// ord_𝐩(A + Bω) for integral, nonzero A + Bω.
    pub(crate) fn ord_integral(&self, a: &BigInt, b: &BigInt) -> i64 {
        let p = BigInt::from_biguint(Sign::Plus, self.p.clone());
        if self.kind == PrimeKind::Rational {
            return valuation(a, &self.p) as i64;
        }
        let k = if a.is_zero() {
            valuation(b, &self.p)
        } else if b.is_zero() {
            valuation(a, &self.p)
        } else {
            valuation(a, &self.p).min(valuation(b, &self.p))
        };
        let pk = Pow::pow(&p, k);
        let (a1, b1) = (a / &pk, b / &pk);
        let k = k as i64;
        match self.kind {
            PrimeKind::Inert => k,
            PrimeKind::Ramified => 2 * k + norm_valuation(self.tag, &a1, &b1, &self.p),
            PrimeKind::SplitA | PrimeKind::SplitB => {
                let c = BigInt::from_biguint(Sign::Plus, self.root.clone().expect("split ideal has a root"));
                if (&a1 + &b1 * c).mod_floor(&p).is_zero() {
                    k + norm_valuation(self.tag, &a1, &b1, &self.p)
                } else {
                    k
                }
            }
            PrimeKind::Rational => unreachable!(),
        }
    }

    pub fn is_principal_rational(&self) -> bool {
        matches!(self.kind, PrimeKind::Rational | PrimeKind::Inert)
    }
}

fn integral_norm(tag: FieldTag, a: &BigInt, b: &BigInt) -> BigInt {
    let (t, n) = tag.omega_relation();
    a * a + a * b * t - b * b * n
}

fn norm_valuation(tag: FieldTag, a: &BigInt, b: &BigInt, p: &BigUint) -> i64 {
    valuation(&integral_norm(tag, a, b), p) as i64
}

impl PartialOrd for PrimeIdeal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PrimeIdeal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.norm()
            .cmp(&other.norm())
            .then_with(|| self.p.cmp(&other.p))
            .then_with(|| self.kind.cmp(&other.kind))
            .then_with(|| self.tag.cmp(&other.tag))
    }
}

impl fmt::Display for PrimeIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.kind, &self.root) {
            (PrimeKind::Rational | PrimeKind::Inert, _) => write!(f, "({})", self.p),
            (_, Some(c)) if c.is_zero() => write!(f, "({}, w)", self.p),
            (_, Some(c)) => write!(f, "({}, w-{})", self.p, c),
            (_, None) => write!(f, "({})", self.p),
        }
    }
}

impl Serialize for PrimeIdeal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Roots of x² − tx − n modulo p, ascending.
fn omega_roots_mod(tag: FieldTag, p: &BigUint) -> Vec<BigUint> {
    let (t, n) = tag.omega_relation();
    let pi = BigInt::from_biguint(Sign::Plus, p.clone());
    if p == &BigUint::from(2u32) {
        return (0u32..2)
            .filter(|&x| {
                let x = BigInt::from(x);
                (&x * &x - &x * t - n).mod_floor(&pi).is_zero()
            })
            .map(BigUint::from)
            .collect();
    }
    let disc = BigInt::from(t * t + 4 * n);
    let Some(r) = sqrt_mod_prime(&disc, p) else {
        return Vec::new();
    };
    let inv2: BigInt = (&pi + 1u32) / 2u32;
    let r = BigInt::from_biguint(Sign::Plus, r);
    let mut roots: Vec<BigUint> = [&r, &(-&r)]
        .iter()
        .map(|s: &&BigInt| ((BigInt::from(t) + *s) * &inv2).mod_floor(&pi).to_biguint().unwrap())
        .collect();
    roots.sort();
    roots.dedup();
    roots
}

/// Kronecker symbol (Δ/p) for a prime p.
fn kronecker(disc: i64, p: &BigUint) -> i32 {
    if p == &BigUint::from(2u32) {
        if disc.rem_euclid(2) == 0 {
            0
        } else if disc.rem_euclid(8) == 1 {
            1
        } else {
            -1
        }
    } else {
        jacobi(&BigInt::from(disc), p)
    }
}

/// The prime ideals above the rational prime p, in canonical order.
pub fn factor_rational_prime(field: &FieldSpec, p: &BigUint) -> Result<Vec<PrimeIdeal>> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p.clone()));
    }
    Ok(primes_above(field.tag, p))
}

pub(crate) fn primes_above(tag: FieldTag, p: &BigUint) -> Vec<PrimeIdeal> {
    let mk = |kind, root| PrimeIdeal {
        tag,
        p: p.clone(),
        kind,
        root,
    };
    if tag.is_rational() {
        return vec![mk(PrimeKind::Rational, None)];
    }
    match kronecker(tag.discriminant(), p) {
        0 => {
            let roots = omega_roots_mod(tag, p);
            debug_assert_eq!(roots.len(), 1);
            vec![mk(PrimeKind::Ramified, roots.into_iter().next())]
        }
        1 => {
            let roots = omega_roots_mod(tag, p);
            debug_assert_eq!(roots.len(), 2);
            vec![
                mk(PrimeKind::SplitA, Some(roots[0].clone())),
                mk(PrimeKind::SplitB, Some(roots[1].clone())),
            ]
        }
        _ => vec![mk(PrimeKind::Inert, None)],
    }
}

/// Finds an ideal above p from its label ("7", "7.a", "7.b").
pub fn ideal_from_label(field: &FieldSpec, label: &str) -> Result<PrimeIdeal> {
    let (p_txt, sel) = match label.split_once('.') {
        Some((p, s)) => (p, Some(s)),
        None => (label, None),
    };
    let p: BigUint = p_txt
        .trim()
        .parse()
        .map_err(|_| Error::invalid(format!("bad prime in ideal label '{label}'")))?;
    let above = factor_rational_prime(field, &p)?;
    match sel {
        None if above.len() == 1 => Ok(above[0].clone()),
        None => Err(Error::invalid(format!("{p} splits; use {p}.a or {p}.b"))),
        Some(s) => above
            .into_iter()
            .find(|i| i.label() == format!("{p}.{s}"))
            .ok_or_else(|| Error::invalid(format!("no ideal '{label}'"))),
    }
}

/// The fractional ideal [x] as a map from prime ideals to nonzero exponents.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IdealFactorization {
    entries: Vec<(PrimeIdeal, i64)>,
}

impl IdealFactorization {
    pub fn from_entries(mut entries: Vec<(PrimeIdeal, i64)>) -> Self {
        entries.retain(|(_, e)| *e != 0);
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        IdealFactorization { entries }
    }

    pub fn entries(&self) -> &[(PrimeIdeal, i64)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn exponent(&self, ideal: &PrimeIdeal) -> i64 {
        self.entries
            .iter()
            .find(|(i, _)| i == ideal)
            .map_or(0, |(_, e)| *e)
    }

    /// Π Nm(𝐩)^e as an exact rational.
    pub fn norm_product(&self) -> BigRational {
        let mut num = BigInt::one();
        let mut den = BigInt::one();
        for (ideal, e) in &self.entries {
            let nm = BigInt::from_biguint(Sign::Plus, Pow::pow(ideal.norm(), e.unsigned_abs()));
            if *e > 0 {
                num *= nm;
            } else {
                den *= nm;
            }
        }
        BigRational::new(num, den)
    }

    /// Prime ideals with positive exponent.
    pub fn support(&self) -> impl Iterator<Item = &PrimeIdeal> {
        self.entries.iter().filter(|(_, e)| *e > 0).map(|(i, _)| i)
    }
}

impl Serialize for IdealFactorization {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(self.entries.len()))?;
        for (i, e) in &self.entries {
            seq.serialize_element(&(i.to_string(), e))?;
        }
        seq.end()
    }
}

/// Factor [x] for nonzero x; fractional inputs give negative exponents.
pub fn factor_element_ideal(
    field: &FieldSpec,
    x: &NFElement,
    fz: &mut Factorizer,
) -> Result<IdealFactorization> {
    field.owns(x)?;
    if x.is_zero() {
        return Err(Error::ZeroInput("factor_element_ideal"));
    }
    let (a, b, den) = x.scaled_integral_coords();
    let nm = integral_norm(field.tag, &a, &b).abs().to_biguint().unwrap();
    let mut primes: Vec<BigUint> = fz.factor(&nm)?.primes().cloned().collect();
    primes.extend(fz.factor(den.magnitude())?.primes().cloned());
    primes.sort();
    primes.dedup();
    let mut entries = Vec::new();
    for p in &primes {
        for ideal in primes_above(field.tag, p) {
            let e = ideal.ord(x)?;
            if e != 0 {
                entries.push((ideal, e));
            }
        }
    }
    let fac = IdealFactorization::from_entries(entries);
    debug_assert_eq!(fac.norm_product(), x.norm().abs());
    Ok(fac)
}

/// A generator of 𝐩^h, searched over elements of norm ±Nm(𝐩)^h.
///
/// `b_cap` bounds the ω-coordinate enumeration in real fields.
pub fn principal_generator(
    field: &FieldSpec,
    ideal: &PrimeIdeal,
    h: u32,
    b_cap: u64,
) -> Result<NFElement> {
    if ideal.tag != field.tag {
        return Err(Error::FieldMismatch);
    }
    let pb = BigInt::from_biguint(Sign::Plus, ideal.p.clone());
    if ideal.is_principal_rational() {
        return Ok(NFElement::from_int(field.tag, Pow::pow(pb, h)));
    }
    if h > 1 {
        if let Some(g) = search_generator(field, ideal, 1, b_cap)? {
            return Ok(g.pow(h as u64));
        }
    }
    search_generator(field, ideal, h, b_cap)?.ok_or_else(|| Error::GeneratorNotFound {
        ideal: format!("{ideal}^{h}"),
        bound: b_cap,
    })
}

fn search_generator(
    field: &FieldSpec,
    ideal: &PrimeIdeal,
    h: u32,
    b_cap: u64,
) -> Result<Option<NFElement>> {
    let target = BigInt::from_biguint(Sign::Plus, Pow::pow(ideal.norm(), h));
    let disc = BigInt::from(field.discriminant);
    let (t, _) = field.tag.omega_relation();
    let b_max: BigInt = if field.is_real() {
        // A generator can be moved by units so both embeddings are ≤ √(N·ε).
        let ln_bound = 0.5 * (crate::arith::bigutil::ln_bigint(&target) + field.regulator)
            - 0.5 * (field.discriminant as f64).ln()
            + std::f64::consts::LN_2;
        if ln_bound > (b_cap as f64).ln() {
            return Err(Error::GeneratorNotFound {
                ideal: format!("{ideal}^{h}"),
                bound: b_cap,
            });
        }
        BigInt::from(ln_bound.exp().ceil() as u64 + 1)
    } else {
        // (2a + tb)² − Δb² = 4N with Δ < 0
        (BigInt::from(4) * &target / disc.abs()).sqrt() + 1
    };
    let signs: &[i64] = if field.is_real() { &[1, -1] } else { &[1] };
    let mut b = BigInt::zero();
    while b <= b_max {
        let bs: Vec<BigInt> = if b.is_zero() {
            vec![b.clone()]
        } else {
            vec![b.clone(), -&b]
        };
        for bb in &bs {
            for &s in signs {
                // (2a + tb)² = Δb² ± 4N
                let sq = &disc * bb * bb + BigInt::from(4 * s) * &target;
                if sq.is_negative() {
                    continue;
                }
                let r = sq.sqrt();
                if &r * &r != sq {
                    continue;
                }
                for rr in [r.clone(), -r.clone()] {
                    let twice: BigInt = rr - bb * BigInt::from(t);
                    if !twice.is_even() {
                        continue;
                    }
                    let a: BigInt = twice / 2u32;
                    if a.is_zero() && bb.is_zero() {
                        continue;
                    }
                    if ideal.ord_integral(&a, bb) == h as i64 {
                        let g = NFElement::new(
                            field.tag,
                            BigRational::from_integer(a),
                            BigRational::from_integer(bb.clone()),
                        );
                        return Ok(Some(g));
                    }
                }
            }
        }
        b += 1;
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn splitting_examples() {
        let k = FieldSpec::quadratic(2).unwrap();
        let above7 = factor_rational_prime(&k, &big(7)).unwrap();
        assert_eq!(above7.len(), 2);
        assert_eq!(above7[0].to_string(), "(7, w-3)");
        assert_eq!(above7[1].to_string(), "(7, w-4)");
        assert!(above7.iter().all(|i| i.norm() == big(7)));
        let above2 = factor_rational_prime(&k, &big(2)).unwrap();
        assert_eq!(above2.len(), 1);
        assert_eq!(above2[0].kind(), PrimeKind::Ramified);
        assert_eq!(above2[0].to_string(), "(2, w)");
        let q = FieldSpec::rational();
        let r = factor_rational_prime(&q, &big(5)).unwrap();
        assert_eq!((r[0].e(), r[0].f()), (1, 1));
        assert!(matches!(factor_rational_prime(&q, &big(6)), Err(Error::NotPrime(_))));
    }

    #[test]
    fn splitting_completeness() {
        for d in [2, 3, 5, -1, -3, -5, 10, 13, -23, 79] {
            let k = FieldSpec::quadratic(d).unwrap();
            let mut p = 2u64;
            while p <= 1000 {
                if is_prime(&big(p)) {
                    let s: u32 = factor_rational_prime(&k, &big(p))
                        .unwrap()
                        .iter()
                        .map(|i| i.e() * i.f())
                        .sum();
                    assert_eq!(s, 2, "D={d}, p={p}");
                }
                p += 1;
            }
        }
    }

    #[test]
    fn element_factorizations() {
        let mut fz = Factorizer::default();
        let q = FieldSpec::rational();
        let f = factor_element_ideal(&q, &q.int(720), &mut fz).unwrap();
        let got: Vec<(String, i64)> = f.entries().iter().map(|(i, e)| (i.to_string(), *e)).collect();
        assert_eq!(got, vec![("(2)".into(), 4), ("(3)".into(), 2), ("(5)".into(), 1)]);

        let k = FieldSpec::quadratic(2).unwrap();
        let f = factor_element_ideal(&k, &k.element(3, 1), &mut fz).unwrap();
        assert_eq!(f.entries().len(), 1);
        assert_eq!(f.entries()[0].0.to_string(), "(7, w-4)");
        // 3 + √2 ≡ 0 modulo (7, √2 + 3) = (7, √2 − 4)
        assert!(factor_element_ideal(&k, &k.element(1, 1), &mut fz).unwrap().is_empty());

        let x = k.parse("1/9+2/3*w").unwrap();
        let f = factor_element_ideal(&k, &x, &mut fz).unwrap();
        assert_eq!(f.norm_product(), x.norm().abs());
    }

    #[test]
    fn generators_in_class_number_two() {
        let k = FieldSpec::quadratic(-5).unwrap();
        let above2 = factor_rational_prime(&k, &big(2)).unwrap();
        assert!(search_generator(&k, &above2[0], 1, 1000).unwrap().is_none());
        let g = principal_generator(&k, &above2[0], 2, 1000).unwrap();
        assert_eq!(g.norm().abs(), BigRational::from_integer(4.into()));
        assert_eq!(above2[0].ord(&g).unwrap(), 2);

        let k = FieldSpec::quadratic(10).unwrap();
        for p in [3u64, 13, 37] {
            for ideal in factor_rational_prime(&k, &big(p)).unwrap() {
                let g = principal_generator(&k, &ideal, 2, 1_000_000).unwrap();
                assert_eq!(ideal.ord(&g).unwrap(), 2);
                assert_eq!(g.norm().abs(), BigRational::from_integer(BigInt::from(ideal.norm()).pow(2u32)));
            }
        }
    }
}
