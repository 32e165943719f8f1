use num_bigint::BigUint;
use num_traits::Signed;
use orbitforge_core::field::{approximate_by_unit, factor_element_ideal};
use orbitforge_core::heights::{
    height_complement, height_s, height_value, is_s_integer, is_s_unit, one_step_bound,
};
use orbitforge_core::orbits::{check_power_dependence, spart_witness_for, GENERATOR_SEARCH_CAP};
use orbitforge_core::{Factorizer, FieldSpec, NFElement, Poly, SSet};
use proptest::prelude::*;

fn fields() -> Vec<FieldSpec> {
    vec![
        FieldSpec::rational(),
        FieldSpec::quadratic(2).unwrap(),
        FieldSpec::quadratic(-5).unwrap(),
        FieldSpec::quadratic(5).unwrap(),
    ]
}

fn element(k: &FieldSpec, a: i64, b: i64) -> NFElement {
    if k.is_rational() {
        k.int(a)
    } else {
        k.element(a, b)
    }
}

fn s_from_mask(k: &FieldSpec, mask: u8) -> SSet {
    let primes: Vec<u64> = [2u64, 3, 5, 7, 11]
        .iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, p)| *p)
        .collect();
    SSet::above_primes(k, &primes).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn height_is_inversion_invariant(fi in 0usize..4, a in -400i64..400, b in -400i64..400, den in 1i64..40) {
        let k = &fields()[fi];
        let x = element(k, a, b);
        prop_assume!(!x.is_zero());
        let x = x.try_div(&k.int(den)).unwrap();
        let h = height_value(k, &x);
        let hi = height_value(k, &x.inv().unwrap());
        prop_assert!((h - hi).abs() <= 1e-9 * h.max(1.0));
    }

    #[test]
    fn decomposition_identity(fi in 0usize..4, a in -2000i64..2000, b in -2000i64..2000, mask in 0u8..32) {
        let k = &fields()[fi];
        let x = element(k, a, b);
        prop_assume!(!x.is_zero());
        let s = s_from_mask(k, mask);
        let mut fz = Factorizer::default();
        let inv = x.inv().unwrap();
        let sum = height_complement(k, &inv, &s, &mut fz).unwrap() + height_s(k, &inv, &s).unwrap();
        let h = height_value(k, &x);
        prop_assert!((sum - h).abs() <= 1e-9 * h.max(1.0), "{} vs {}", sum, h);
    }

    #[test]
    fn ideal_factorization_recombines(fi in 0usize..4, a in -5000i64..5000, b in -5000i64..5000) {
        let k = &fields()[fi];
        let x = element(k, a, b);
        prop_assume!(!x.is_zero());
        let mut fz = Factorizer::default();
        let fac = factor_element_ideal(k, &x, &mut fz).unwrap();
        prop_assert_eq!(fac.norm_product(), x.norm().abs());
        for (p, e) in fac.entries() {
            prop_assert_eq!(p.ord(&x).unwrap(), *e);
        }
    }

    #[test]
    fn ord_is_additive(fi in 0usize..4, a in -300i64..300, b in -300i64..300, c in -300i64..300, d in -300i64..300) {
        let k = &fields()[fi];
        let (x, y) = (element(k, a, b), element(k, c, d));
        prop_assume!(!x.is_zero() && !y.is_zero());
        let xy = &x * &y;
        for p in [2u64, 3, 5, 7] {
            for ideal in orbitforge_core::field::factor_rational_prime(k, &BigUint::from(p)).unwrap() {
                prop_assert_eq!(ideal.ord(&xy).unwrap(), ideal.ord(&x).unwrap() + ideal.ord(&y).unwrap());
            }
        }
    }

    #[test]
    fn s_unit_test_agrees_with_factorization(fi in 0usize..4, a in -3000i64..3000, b in -3000i64..3000, den in 1i64..200, mask in 0u8..32) {
        let k = &fields()[fi];
        let x = element(k, a, b);
        prop_assume!(!x.is_zero());
        let x = x.try_div(&k.int(den)).unwrap();
        let s = s_from_mask(k, mask);
        let mut fz = Factorizer::default();
        let fac = factor_element_ideal(k, &x, &mut fz).unwrap();
        let outside: Vec<i64> = fac.entries().iter().filter(|(p, _)| !s.contains(p)).map(|(_, e)| *e).collect();
        prop_assert_eq!(is_s_integer(k, &x, &s).unwrap(), outside.iter().all(|&e| e >= 0));
        prop_assert_eq!(is_s_unit(k, &x, &s).unwrap(), outside.is_empty());
    }

    #[test]
    fn one_step_bound_holds(ci in 0usize..4, p in -300i64..300, q in 1i64..300) {
        let k = FieldSpec::rational();
        let cs: [&[i64]; 4] = [&[1, 0, 1], &[-1, 0, 1], &[3, -1, 0, 1], &[-2, 0, 5]];
        let f = Poly::from_ints(&k, cs[ci]);
        let b = one_step_bound(&k, &f).unwrap();
        let x = k.parse(&format!("{p}/{q}")).unwrap();
        let gap = height_value(&k, &f.eval(&x)) - f.degree() as f64 * height_value(&k, &x);
        prop_assert!(gap.abs() <= b + 1e-9);
    }

    #[test]
    fn unit_approximation_within_bound(fi in 0usize..4, a in -10_000i64..10_000, b in -10_000i64..10_000, n in 1u32..4) {
        let k = &fields()[fi];
        let x = element(k, a, b);
        prop_assume!(!x.is_zero());
        let r = approximate_by_unit(k, &x, n).unwrap();
        prop_assert!(r.deviation <= r.bound + 1e-9, "{} > {}", r.deviation, r.bound);
        prop_assert!(r.epsilon.is_integral() && r.epsilon.norm().abs() == num_rational::BigRational::from_integer(1.into()));
    }

    #[test]
    fn spart_witness_holds(fi in 0usize..3, a in -3000i64..3000, b in -3000i64..3000, mask in 0u8..32, df in 1u32..5) {
        let k = &fields()[fi];
        let x = element(k, a, b);
        prop_assume!(!x.is_zero());
        let s = s_from_mask(k, mask);
        let w = spart_witness_for(k, &x, df, &s, GENERATOR_SEARCH_CAP).unwrap();
        prop_assert!(w.holds(), "{:?}", w);
        for e in &w.entries {
            prop_assert!(e.r_i >= 0 && e.r_i < (df as u64 * k.class_number) as i64);
        }
    }

    #[test]
    fn power_witnesses_resubstitute(c in -3i64..4, alpha in -6i64..7, mask in 0u8..32) {
        let k = FieldSpec::rational();
        let f = Poly::from_ints(&k, &[c, 0, 1]);
        let s = s_from_mask(&k, mask);
        for (m, n) in [(2, 1), (3, 1), (3, 2)] {
            if let Ok(Some(w)) = check_power_dependence(&k, &f, &k.int(alpha), m, n, &s) {
                prop_assert!(w.verified);
                prop_assert!(is_s_unit(&k, w.u.as_ref().unwrap(), &s).unwrap());
            }
        }
    }
}
