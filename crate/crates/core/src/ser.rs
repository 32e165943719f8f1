//! Serde helpers for big integers.

use num_bigint::BigUint;
use serde::Serializer;

pub fn big_as_str<S: Serializer>(n: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&n.to_string())
}
