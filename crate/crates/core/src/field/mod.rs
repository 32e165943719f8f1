//! The base field K = ℚ or ℚ(√D): construction, elements, ideals and places.

mod classno;
pub mod element;
pub mod ideal;
pub mod place;
pub mod unit;

use serde::{Serialize, Serializer};

use crate::arith::bigutil::is_squarefree;
use crate::constants::voutier_delta;
use crate::error::{Error, Result};

pub use element::{element_arith, parse_element, ArithOp, FieldTag, NFElement};
pub use ideal::{
    factor_element_ideal, factor_rational_prime, IdealFactorization, PrimeIdeal, PrimeKind,
};
pub use place::{build_sx, Place, SSet, SSetParams};
pub use unit::{approximate_by_unit, UnitApproximation};

/// Default cap on |discriminant| accepted by `make_field`.
pub const DEFAULT_DISC_CAP: i64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Rational,
    Quadratic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldSpec {
    #[serde(serialize_with = "tag_as_string")]
    pub tag: FieldTag,
    pub kind: FieldKind,
    pub degree: u32,
    pub discriminant: i64,
    pub unit_rank: u32,
    pub fundamental_unit: Option<NFElement>,
    pub torsion_order: u32,
    pub class_number: u64,
    /// log of the fundamental unit's larger embedding; 1 at rank 0.
    pub regulator: f64,
    pub delta: f64,
}

fn tag_as_string<S: Serializer>(tag: &FieldTag, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&tag.to_string())
}

impl FieldSpec {
    pub fn rational() -> FieldSpec {
        FieldSpec {
            tag: FieldTag::RATIONAL,
            kind: FieldKind::Rational,
            degree: 1,
            discriminant: 1,
            unit_rank: 0,
            fundamental_unit: None,
            torsion_order: 2,
            class_number: 1,
            regulator: 1.0,
            delta: voutier_delta(1).expect("d = 1 is valid"),
        }
    }

    pub fn quadratic(d: i64) -> Result<FieldSpec> {
        make_field_capped(FieldKind::Quadratic, Some(d), DEFAULT_DISC_CAP)
    }

    pub fn is_rational(&self) -> bool {
        self.tag.is_rational()
    }

    pub fn is_real(&self) -> bool {
        self.tag.is_real()
    }

    pub fn d(&self) -> u32 {
        self.degree
    }

    pub fn radicand(&self) -> Option<i64> {
        (!self.is_rational()).then(|| self.tag.radicand())
    }

    /// Number of archimedean places.
    pub fn archimedean_count(&self) -> usize {
        if self.is_rational() || !self.is_real() {
            1
        } else {
            2
        }
    }

    pub fn element(&self, a: i64, b: i64) -> NFElement {
        NFElement::from_ints(self.tag, a, b)
    }

    pub fn int(&self, n: impl Into<num_bigint::BigInt>) -> NFElement {
        NFElement::from_int(self.tag, n)
    }

    pub fn parse(&self, text: &str) -> Result<NFElement> {
        parse_element(self.tag, text)
    }

    pub fn owns(&self, x: &NFElement) -> Result<()> {
        if x.tag() == self.tag {
            Ok(())
        } else {
            Err(Error::FieldMismatch)
        }
    }
}

pub fn make_field(kind: FieldKind, d: Option<i64>) -> Result<FieldSpec> {
    make_field_capped(kind, d, DEFAULT_DISC_CAP)
}

pub fn make_field_capped(kind: FieldKind, d: Option<i64>, disc_cap: i64) -> Result<FieldSpec> {
    match kind {
        FieldKind::Rational => Ok(FieldSpec::rational()),
        FieldKind::Quadratic => {
            let d = d.ok_or_else(|| Error::MissingConfig("D".into()))?;
            if d == 1 || !is_squarefree(d) {
                return Err(Error::NotSquarefree(d));
            }
            let tag = FieldTag::quadratic(d);
            let disc = tag.discriminant();
            if disc.abs() > disc_cap {
                return Err(Error::FieldTooLarge { disc, cap: disc_cap });
            }
            let (unit_rank, fundamental_unit, regulator) = if d > 0 {
                let eps = unit::fundamental_unit(tag);
                let r = eps.ln_abs_embedding(0).max(eps.ln_abs_embedding(1));
                (1, Some(eps), r)
            } else {
                (0, None, 1.0)
            };
            let class_number = match &fundamental_unit {
                Some(eps) => classno::real_class_number(disc, eps.norm() < num_traits::Zero::zero()),
                None => classno::imaginary_class_number(disc),
            };
            let torsion_order = match d {
                -1 => 4,
                -3 => 6,
                _ => 2,
            };
            Ok(FieldSpec {
                tag,
                kind,
                degree: 2,
                discriminant: disc,
                unit_rank,
                fundamental_unit,
                torsion_order,
                class_number,
                regulator,
                delta: voutier_delta(2).expect("d = 2 is valid"),
            })
        }
    }
}
