//! Places of K and finite place sets S ⊇ M_K^∞.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use super::ideal::primes_above;
use super::{FieldSpec, FieldTag, PrimeIdeal};
use crate::arith::bigutil::log_star;
use crate::arith::is_prime;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Place {
    /// Embedding `index`; ℓ_v = 1 for real places and 2 for the complex one.
    Archimedean {
        tag: FieldTag,
        index: usize,
        local_degree: u32,
    },
    Finite(PrimeIdeal),
}

impl Place {
    pub fn archimedean_places(field: &FieldSpec) -> Vec<Place> {
        let ell = if field.is_rational() || field.is_real() { 1 } else { 2 };
        (0..field.archimedean_count())
            .map(|index| Place::Archimedean {
                tag: field.tag,
                index,
                local_degree: ell,
            })
            .collect()
    }

    pub fn local_degree(&self) -> u32 {
        match self {
            Place::Archimedean { local_degree, .. } => *local_degree,
            Place::Finite(p) => p.local_degree(),
        }
    }

    pub fn tag(&self) -> FieldTag {
        match self {
            Place::Archimedean { tag, .. } => *tag,
            Place::Finite(p) => p.tag(),
        }
    }

    pub fn is_archimedean(&self) -> bool {
        matches!(self, Place::Archimedean { .. })
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Archimedean { index, .. } => write!(f, "inf{index}"),
            Place::Finite(p) => write!(f, "{p}"),
        }
    }
}

impl Serialize for Place {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// A finite set of places containing every archimedean place.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SSet {
    tag: FieldTag,
    archimedean: Vec<Place>,
    finite: Vec<PrimeIdeal>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SSetParams {
    pub s: usize,
    pub t: usize,
    #[serde(serialize_with = "crate::ser::big_as_str")]
    pub p_max: BigUint,
    #[serde(serialize_with = "crate::ser::big_as_str")]
    pub q: BigUint,
    /// Σ log*(log Nm 𝐩) over the finite places.
    pub t_sum: f64,
}

impl SSetParams {
    pub fn ln_p(&self) -> f64 {
        crate::arith::bigutil::ln_biguint(&self.p_max)
    }

    pub fn ln_q(&self) -> f64 {
        crate::arith::bigutil::ln_biguint(&self.q)
    }
}

impl SSet {
    /// S = M_K^∞.
    pub fn archimedean(field: &FieldSpec) -> SSet {
        SSet {
            tag: field.tag,
            archimedean: Place::archimedean_places(field),
            finite: Vec::new(),
        }
    }

    pub fn from_ideals(field: &FieldSpec, ideals: impl IntoIterator<Item = PrimeIdeal>) -> Result<SSet> {
        let mut finite: Vec<PrimeIdeal> = ideals.into_iter().collect();
        if finite.iter().any(|i| i.tag() != field.tag) {
            return Err(Error::FieldMismatch);
        }
        finite.sort();
        finite.dedup();
        Ok(SSet {
            tag: field.tag,
            archimedean: Place::archimedean_places(field),
            finite,
        })
    }

    /// Archimedean places plus every ideal above each listed rational prime.
    pub fn above_primes(field: &FieldSpec, primes: &[u64]) -> Result<SSet> {
        let mut ideals = Vec::new();
        for &p in primes {
            let p = BigUint::from(p);
            if !is_prime(&p) {
                return Err(Error::NotPrime(p));
            }
            ideals.extend(primes_above(field.tag, &p));
        }
        SSet::from_ideals(field, ideals)
    }

    /// Builds S from an explicit list of places, which must include M_K^∞.
    pub fn from_places(field: &FieldSpec, places: &[Place]) -> Result<SSet> {
        let arch = Place::archimedean_places(field);
        if !arch.iter().all(|a| places.contains(a)) {
            return Err(Error::MissingArchimedean);
        }
        let finite = places.iter().filter_map(|p| match p {
            Place::Finite(i) => Some(i.clone()),
            _ => None,
        });
        SSet::from_ideals(field, finite)
    }

    pub fn tag(&self) -> FieldTag {
        self.tag
    }

    pub fn finite(&self) -> &[PrimeIdeal] {
        &self.finite
    }

    pub fn places(&self) -> Vec<Place> {
        let mut v = self.archimedean.clone();
        v.extend(self.finite.iter().cloned().map(Place::Finite));
        v
    }

    pub fn contains(&self, ideal: &PrimeIdeal) -> bool {
        self.finite.binary_search(ideal).is_ok()
    }

    /// Rational primes lying under the finite part, ascending.
    pub fn rational_primes(&self) -> Vec<BigUint> {
        let mut ps: Vec<BigUint> = self.finite.iter().map(|i| i.p().clone()).collect();
        ps.sort();
        ps.dedup();
        ps
    }

    pub fn params(&self) -> SSetParams {
        let t = self.finite.len();
        let p_max = self.finite.iter().map(|i| i.norm()).max().unwrap_or_else(BigUint::one);
        let q = self.finite.iter().map(|i| i.norm()).product();
        let t_sum = self.finite.iter().map(|i| log_star(i.ln_norm())).fold(0.0, |a, b| a + b);
        SSetParams {
            s: self.archimedean.len() + t,
            t,
            p_max,
            q,
            t_sum,
        }
    }
}

impl fmt::Display for SSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.places().iter().map(|p| p.to_string()).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

impl Serialize for SSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.places().iter().map(|p| p.to_string()))
    }
}

/// (s, t, P, Q, 𝔗) of S.
pub fn sset_params(field: &FieldSpec, places: &[Place]) -> Result<SSetParams> {
    Ok(SSet::from_places(field, places)?.params())
}

/// S^X = M_K^∞ together with every prime ideal of norm at most X.
pub fn build_sx(field: &FieldSpec, x: f64) -> Result<SSet> {
    if !(x >= 1.0) {
        return Err(Error::invalid(format!("X must be at least 1, got {x}")));
    }
    let limit = x.floor().to_u64().unwrap_or(u64::MAX);
    let mut ideals = Vec::new();
    for p in 2..=limit {
        let pb = BigUint::from(p);
        if !is_prime(&pb) {
            continue;
        }
        ideals.extend(
            primes_above(field.tag, &pb)
                .into_iter()
                .filter(|i| i.norm() <= BigUint::from(limit)),
        );
    }
    SSet::from_ideals(field, ideals)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn place_degree_sum() {
        for k in [
            FieldSpec::rational(),
            FieldSpec::quadratic(2).unwrap(),
            FieldSpec::quadratic(-5).unwrap(),
            FieldSpec::quadratic(-3).unwrap(),
        ] {
            let s: u32 = Place::archimedean_places(&k).iter().map(Place::local_degree).sum();
            assert_eq!(s, k.degree);
        }
    }

    #[test]
    fn sx_examples() {
        let q = FieldSpec::rational();
        assert_eq!(build_sx(&q, 1.0).unwrap().params().t, 0);
        let s = build_sx(&q, 10.0).unwrap();
        assert_eq!(s.rational_primes(), [2u32, 3, 5, 7].map(BigUint::from).to_vec());
        let k = FieldSpec::quadratic(2).unwrap();
        let s = build_sx(&k, 7.0).unwrap();
        let labels: Vec<String> = s.finite().iter().map(|i| i.label()).collect();
        assert_eq!(labels, ["2", "7.a", "7.b"]);
        assert!(build_sx(&q, 0.5).is_err());
    }

    #[test]
    fn params_examples() {
        let q = FieldSpec::rational();
        let p = SSet::archimedean(&q).params();
        assert_eq!((p.s, p.t, p.p_max.clone(), p.q.clone(), p.t_sum), (1, 0, BigUint::one(), BigUint::one(), 0.0));
        let p = SSet::above_primes(&q, &[2, 3]).unwrap().params();
        assert_eq!((p.s, p.t), (3, 2));
        assert_eq!((p.p_max, p.q), (BigUint::from(3u32), BigUint::from(6u32)));
        assert_eq!(p.t_sum, 2.0);
        let k = FieldSpec::quadratic(2).unwrap();
        let p = SSet::above_primes(&k, &[2]).unwrap().params();
        assert_eq!((p.t, p.p_max.clone(), p.q), (1, BigUint::from(2u32), BigUint::from(2u32)));
        assert!(matches!(sset_params(&q, &[]), Err(Error::MissingArchimedean)));
    }
}
