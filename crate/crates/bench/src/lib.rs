//! Shared inputs for the criterion benches.

use orbitforge_core::{CParams, FieldSpec, Factorizer, Poly, PolySpec, SSet, SearchConfig, SplittingOverrides};

pub fn poly_spec(field: &FieldSpec, coeffs: &[i64]) -> PolySpec {
    let poly = Poly::from_ints(field, coeffs);
    PolySpec::new(field, poly, CParams::default(), &SplittingOverrides::default(), &mut Factorizer::default())
        .expect("valid polynomial")
}

/// x³ − x + 3 over ℚ with S = {2, 3, 5} and H = log 50.
pub fn small_campaign(shards: usize) -> SearchConfig {
    let q = FieldSpec::rational();
    let s = SSet::above_primes(&q, &[2, 3, 5]).expect("primes");
    let mut cfg = SearchConfig::new(q.clone(), poly_spec(&q, &[3, -1, 0, 1]), s, 50f64.ln());
    cfg.m_max = 4;
    cfg.shard_count = shards;
    cfg
}
