//! Exact heights, S-heights, explicit bound constants, S-part witnesses and
//! orbit dependence search over ℚ and quadratic fields.

pub mod arith;
pub mod constants;
pub mod error;
pub mod field;
pub mod heights;
pub mod orbits;
pub mod poly;
pub mod search;
mod ser;
pub mod stepper;

pub use arith::{Factorization, Factorizer};
pub use constants::CParams;
pub use error::{Error, Result};
pub use field::{
    build_sx, make_field, make_field_capped, FieldKind, FieldSpec, FieldTag, IdealFactorization, NFElement,
    Place, PrimeIdeal, PrimeKind, SSet, SSetParams,
};
pub use orbits::{DependenceWitness, Periodicity, SPartWitness, WitnessKind, ZsigmondyResult};
pub use poly::{Poly, PolySpec, SplittingOverrides};
pub use search::{CampaignReport, SearchConfig};
pub use stepper::OrbitStepper;
