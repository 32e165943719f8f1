//! Weil heights, T-heights, support statistics and the canonical height.
//!
//! All heights are in nats. Finite-place parts come from exact orders; only
//! archimedean logarithms are floating point.

use std::collections::HashSet;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::arith::bigutil::{ln_bigint, ln_biguint, ln_rational, log_plus_of_ln, logaddexp};
use crate::arith::Factorizer;
use crate::error::{Error, Result};
use crate::field::ideal::primes_above;
use crate::field::{factor_element_ideal, FieldSpec, NFElement, Place, PrimeIdeal, SSet};
use crate::poly::Poly;
use crate::stepper::OrbitStepper;

/// Default bit-length cap for iterates.
pub const DEFAULT_BIT_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalAbs {
    /// log|x|_v.
    pub ln_abs: f64,
    /// ord_𝐩(x) at finite places.
    pub ord: Option<i64>,
}

impl LocalAbs {
    pub fn value(&self) -> f64 {
        self.ln_abs.exp()
    }
}

fn check_place(field: &FieldSpec, x: &NFElement, v: &Place) -> Result<()> {
    field.owns(x)?;
    if v.tag() != field.tag {
        return Err(Error::PlaceMismatch);
    }
    Ok(())
}

/// |x|_v, normalised so that |x|_v = p^{−ord_𝐩 x / e} at finite places.
pub fn local_abs(field: &FieldSpec, x: &NFElement, v: &Place) -> Result<LocalAbs> {
    check_place(field, x, v)?;
    match v {
        Place::Archimedean { index, .. } => Ok(LocalAbs {
            ln_abs: x.ln_abs_embedding(*index),
            ord: None,
        }),
        Place::Finite(p) => {
            let ord = p.ord(x)?;
            let ln_p = ln_biguint(p.p());
            Ok(LocalAbs {
                ln_abs: -(ord as f64) * ln_p / p.e() as f64,
                ord: Some(ord),
            })
        }
    }
}

/// (ℓ_v/d)·log⁺|x|_v, which is 0 at x = 0.
fn weighted_log_plus(field: &FieldSpec, x: &NFElement, v: &Place) -> Result<f64> {
    if x.is_zero() {
        check_place(field, x, v)?;
        return Ok(0.0);
    }
    let d = field.degree as f64;
    match v {
        Place::Archimedean { index, local_degree, .. } => {
            check_place(field, x, v)?;
            Ok(*local_degree as f64 / d * log_plus_of_ln(x.ln_abs_embedding(*index)))
        }
        Place::Finite(p) => {
            check_place(field, x, v)?;
            Ok(finite_contribution(field, p, p.ord(x)?))
        }
    }
}

/// (ℓ_𝐩/d)·log⁺ p^{−ord/e} = f·max(0, −ord)·log p / d.
fn finite_contribution(field: &FieldSpec, p: &PrimeIdeal, ord: i64) -> f64 {
    if ord >= 0 {
        0.0
    } else {
        p.f() as f64 * (-ord) as f64 * ln_biguint(p.p()) / field.degree as f64
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HeightBreakdown {
    pub contributions: Vec<(Place, f64)>,
    pub total: f64,
}

/// h(x) with its per-place contributions; only places with nonzero
/// contribution are listed besides the archimedean ones.
pub fn height(field: &FieldSpec, x: &NFElement, fz: &mut Factorizer) -> Result<HeightBreakdown> {
    field.owns(x)?;
    let mut contributions = Vec::new();
    for v in Place::archimedean_places(field) {
        let c = weighted_log_plus(field, x, &v)?;
        contributions.push((v, c));
    }
    if !x.is_zero() {
        let den = x.denominator();
        for p in fz.factor(den.magnitude())?.primes() {
            for ideal in primes_above(field.tag, p) {
                let c = finite_contribution(field, &ideal, ideal.ord(x)?);
                if c > 0.0 {
                    contributions.push((Place::Finite(ideal), c));
                }
            }
        }
    }
    let total = contributions.iter().map(|(_, c)| c).fold(0.0, |a, b| a + b);
    Ok(HeightBreakdown { contributions, total })
}

/// h(x) via the Mahler measure of its minimal polynomial over ℤ; no factoring.
pub fn height_value(field: &FieldSpec, x: &NFElement) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    if x.is_rational() {
        let q = x.a();
        return ln_bigint(q.numer()).max(ln_bigint(q.denom()));
    }
    // x ∉ ℚ: minimal polynomial a₀(X² − Tr X + Nm) with a₀ = lcm of denominators.
    let a0 = crate::arith::rational::lcm_int(x.trace().denom(), x.norm().denom());
    let arch: f64 = if field.is_real() {
        log_plus_of_ln(x.ln_abs_embedding(0)) + log_plus_of_ln(x.ln_abs_embedding(1))
    } else {
        2.0 * log_plus_of_ln(x.ln_abs_embedding(0))
    };
    (ln_bigint(&a0) + arch) / field.degree as f64
}

/// h_T(x) = Σ_{v∈T} (ℓ_v/d) log⁺|x|_v.
pub fn height_t(field: &FieldSpec, x: &NFElement, t: &[Place]) -> Result<f64> {
    let mut seen = HashSet::new();
    let mut total = 0.0;
    for v in t {
        if seen.insert(v) {
            total += weighted_log_plus(field, x, v)?;
        }
    }
    Ok(total)
}

/// h_S(x).
pub fn height_s(field: &FieldSpec, x: &NFElement, s: &SSet) -> Result<f64> {
    height_t(field, x, &s.places())
}

/// h_{M∖S}(x) from the full ideal factorization of x.
pub fn height_complement(
    field: &FieldSpec,
    x: &NFElement,
    s: &SSet,
    fz: &mut Factorizer,
) -> Result<f64> {
    if x.is_zero() {
        return Ok(0.0);
    }
    let fac = factor_element_ideal(field, x, fz)?;
    Ok(fac
        .entries()
        .iter()
        .filter(|(p, _)| !s.contains(p))
        .map(|(p, e)| finite_contribution(field, p, *e))
        .fold(0.0, |a, b| a + b))
}

/// h_{M∖S}(b⁻¹) for integral nonzero b: (log Nm b − Σ_{𝐩∈S} f·ord_𝐩(b)·log p)/d.
pub fn height_outside_of_inverse(field: &FieldSpec, b: &NFElement, s: &SSet) -> Result<f64> {
    field.owns(b)?;
    if b.is_zero() {
        return Err(Error::ZeroInput("height_outside_of_inverse"));
    }
    if !b.is_integral() {
        return Err(Error::precondition("b must be integral"));
    }
    let mut ln = ln_rational(&b.norm());
    for p in s.finite() {
        ln -= p.f() as f64 * p.ord(b)? as f64 * ln_biguint(p.p());
    }
    Ok((ln / field.degree as f64).max(0.0))
}

#[derive(Debug, Clone, Serialize)]
pub struct SupportStats {
    pub sigma: Vec<PrimeIdeal>,
    #[serde(serialize_with = "crate::ser::big_as_str")]
    pub lambda: BigUint,
}

/// σ(x) = {𝐩 : ord_𝐩 x > 0} and λ(x) = max Nm over σ (1 when empty).
pub fn support_lambda(field: &FieldSpec, x: &NFElement, fz: &mut Factorizer) -> Result<SupportStats> {
    let fac = factor_element_ideal(field, x, fz)?;
    let sigma: Vec<PrimeIdeal> = fac.support().cloned().collect();
    let lambda = sigma.iter().map(|p| p.norm()).max().unwrap_or_else(BigUint::one);
    Ok(SupportStats { sigma, lambda })
}

fn require_map(f: &Poly) -> Result<()> {
    if f.degree() < 2 {
        return Err(Error::precondition("deg f must be at least 2"));
    }
    if !f.is_integral() {
        return Err(Error::precondition("coefficients of f must be integral"));
    }
    Ok(())
}

/// log|a|_v at archimedean place `index`; −∞ for a = 0.
fn ln_abs_at(a: &NFElement, index: usize) -> f64 {
    a.ln_abs_embedding(index)
}

/// B with |h(f(x)) − (deg f)·h(x)| ≤ B for every x ∈ K.
///
/// Upper direction: Σ_∞ (ℓ_v/d) log⁺ Σᵢ|aᵢ|_v (finite places add nothing for
/// integral coefficients). Lower direction: at a finite place the deficit is at
/// most −n log|aₙ|_v, and at an archimedean place it is at most
/// max(0, n log T_v, −log(|aₙ|_v/2)) with T_v = max(1, 2Σ_{i<n}|aᵢ|_v/|aₙ|_v).
pub fn one_step_bound(field: &FieldSpec, f: &Poly) -> Result<f64> {
    require_map(f)?;
    let n = f.degree() as f64;
    let d = field.degree as f64;
    let places = Place::archimedean_places(field);
    let coeffs = f.coeffs();
    let lead = f.leading();
    let mut upper = 0.0;
    let mut lower = 0.0;
    for v in &places {
        let (index, ell) = match v {
            Place::Archimedean { index, local_degree, .. } => (*index, *local_degree as f64),
            Place::Finite(_) => unreachable!(),
        };
        let ln_all = coeffs
            .iter()
            .map(|c| ln_abs_at(c, index))
            .fold(f64::NEG_INFINITY, logaddexp);
        upper += ell / d * log_plus_of_ln(ln_all);
        let ln_lead = ln_abs_at(&lead, index);
        let ln_rest = coeffs[..coeffs.len() - 1]
            .iter()
            .map(|c| ln_abs_at(c, index))
            .fold(f64::NEG_INFINITY, logaddexp);
        let l_v = if ln_rest == f64::NEG_INFINITY {
            (-ln_lead).max(0.0)
        } else {
            let ln_t = (std::f64::consts::LN_2 + ln_rest - ln_lead).max(0.0);
            (n * ln_t).max(std::f64::consts::LN_2 - ln_lead).max(0.0)
        };
        lower += ell / d * l_v;
    }
    lower += n / d * ln_rational(&lead.norm()).abs();
    Ok(upper.max(lower))
}

#[derive(Debug, Clone, Serialize)]
pub struct CanonicalHeightResult {
    pub value: f64,
    pub error_bound: f64,
    pub iterations_used: u32,
    pub one_step_bound: f64,
    /// The orbit revisited a value, so x is preperiodic and ĥ = 0 exactly.
    pub preperiodic: bool,
    /// The bit cap stopped iteration before `tol` was reached.
    pub capped: bool,
}

/// ĥ_f(x) ≈ h(f⁽ᴺ⁾(x))/dᴺ with |ĥ − h(f⁽ᴺ⁾(x))/dᴺ| ≤ B/((d−1)dᴺ).
pub fn canonical_height(
    field: &FieldSpec,
    f: &Poly,
    x: &NFElement,
    tol: f64,
    bit_cap: u64,
) -> Result<CanonicalHeightResult> {
    require_map(f)?;
    field.owns(x)?;
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let b = one_step_bound(field, f)?;
    let deg = f.degree() as f64;
    let c6 = b / (deg - 1.0);
    let target = if c6 <= tol {
        0
    } else {
        ((c6 / tol).ln() / deg.ln()).ceil().to_u32().unwrap_or(u32::MAX)
    };
    let mut seen = HashSet::new();
    let mut orbit = OrbitStepper::new(f, x, &mut Factorizer::default());
    let mut n = 0u32;
    let mut capped = false;
    loop {
        if !seen.insert(orbit.current()) {
            return Ok(CanonicalHeightResult {
                value: 0.0,
                error_bound: 0.0,
                iterations_used: n,
                one_step_bound: b,
                preperiodic: true,
                capped: false,
            });
        }
        if n >= target {
            break;
        }
        let prev = orbit.clone();
        orbit.step();
        if orbit.bit_size() > bit_cap {
            orbit = prev;
            capped = true;
            break;
        }
        n += 1;
    }
    let scale = deg.powi(n as i32);
    Ok(CanonicalHeightResult {
        value: (orbit.height(field) / scale).max(0.0),
        error_bound: c6 / scale,
        iterations_used: n,
        one_step_bound: b,
        preperiodic: false,
        capped,
    })
}

/// C₇ used in the two-sided bound d^ℓ C₇⁻¹ h(α) < h(f⁽ℓ⁾(α)) < d^ℓ C₇ h(α).
pub const SANDWICH_C7: f64 = 2.0;

/// Height above which the C₇ = 2 sandwich holds for every ℓ ≥ 1: 3B/(d−1).
pub fn sandwich_threshold(field: &FieldSpec, f: &Poly) -> Result<f64> {
    let b = one_step_bound(field, f)?;
    Ok(3.0 * b / (f.degree() as f64 - 1.0))
}

#[derive(Debug, Clone, Serialize)]
pub struct SandwichCheck {
    pub ell: u32,
    pub h_alpha: f64,
    pub h_iterate: f64,
    pub lower: f64,
    pub upper: f64,
    pub holds: bool,
}

/// Evaluates both sides of the sandwich at f⁽ℓ⁾(α).
pub fn sandwich(field: &FieldSpec, f: &Poly, alpha: &NFElement, ell: u32) -> Result<SandwichCheck> {
    require_map(f)?;
    let mut orbit = OrbitStepper::new(f, alpha, &mut Factorizer::default());
    for _ in 0..ell {
        orbit.step();
    }
    let h_alpha = height_value(field, alpha);
    let h_iterate = orbit.height(field);
    let scale = (f.degree() as f64).powi(ell as i32);
    let lower = scale / SANDWICH_C7 * h_alpha;
    let upper = scale * SANDWICH_C7 * h_alpha;
    Ok(SandwichCheck {
        ell,
        h_alpha,
        h_iterate,
        lower,
        upper,
        holds: lower < h_iterate && h_iterate < upper,
    })
}

/// True when x is an S-integer: ord_𝐩 x ≥ 0 for every finite 𝐩 ∉ S. No factoring.
pub fn is_s_integer(field: &FieldSpec, x: &NFElement, s: &SSet) -> Result<bool> {
    field.owns(x)?;
    if x.is_zero() {
        return Ok(true);
    }
    let den = x.denominator();
    let mut rest = den.magnitude().clone();
    let s_primes = s.rational_primes();
    for p in &s_primes {
        crate::arith::bigutil::remove_factor(&mut rest, p);
    }
    if !rest.is_one() {
        return Ok(false);
    }
    // Only primes under S can divide the denominator; check the ideals above them that are not in S.
    for p in &s_primes {
        if den.magnitude().is_multiple_of(p) {
            for ideal in primes_above(field.tag, p) {
                if !s.contains(&ideal) && ideal.ord(x)? < 0 {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// True when x is an S-unit (x and 1/x are S-integers).
pub fn is_s_unit(field: &FieldSpec, x: &NFElement, s: &SSet) -> Result<bool> {
    if x.is_zero() {
        return Ok(false);
    }
    Ok(is_s_integer(field, x, s)? && is_s_integer(field, &x.inv()?, s)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::factor_rational_prime;
    use num_rational::BigRational;

    fn q() -> FieldSpec {
        FieldSpec::rational()
    }

    fn fin(field: &FieldSpec, p: u64) -> Place {
        Place::Finite(factor_rational_prime(field, &BigUint::from(p)).unwrap()[0].clone())
    }

    #[test]
    fn local_abs_examples() {
        let k = q();
        let a = local_abs(&k, &k.int(720), &fin(&k, 2)).unwrap();
        assert_eq!(a.ord, Some(4));
        assert!((a.value() - 1.0 / 16.0).abs() < 1e-15);
        let x = k.parse("1/9").unwrap();
        let a = local_abs(&k, &x, &fin(&k, 3)).unwrap();
        assert_eq!(a.ord, Some(-2));
        assert!((a.value() - 9.0).abs() < 1e-12);
        let k2 = FieldSpec::quadratic(2).unwrap();
        let arch = Place::archimedean_places(&k2);
        let x = k2.element(3, 1);
        assert!((local_abs(&k2, &x, &arch[0]).unwrap().value() - 4.41421356).abs() < 1e-7);
        assert!((local_abs(&k2, &x, &arch[1]).unwrap().value() - 1.58578644).abs() < 1e-7);
        assert_eq!(local_abs(&k2, &x, &fin(&k, 2)), Err(Error::PlaceMismatch));
    }

    #[test]
    fn height_examples() {
        let mut fz = Factorizer::default();
        let k = q();
        let h = height(&k, &k.parse("3/2").unwrap(), &mut fz).unwrap();
        assert!((h.total - 3f64.ln()).abs() < 1e-12);
        assert_eq!(height(&k, &k.int(-1), &mut fz).unwrap().total, 0.0);
        let k2 = FieldSpec::quadratic(2).unwrap();
        let h = height(&k2, &k2.element(1, 1), &mut fz).unwrap();
        assert!((h.total - 0.440686793509772).abs() < 1e-12);
        assert_eq!(height(&k, &k.int(0), &mut fz).unwrap().total, 0.0);
    }

    #[test]
    fn mahler_and_placewise_agree() {
        let mut fz = Factorizer::default();
        for d in [2, -5, 5, -3] {
            let k = FieldSpec::quadratic(d).unwrap();
            for s in ["7/3+1/6*w", "-5/4*w", "12/35", "1/2+1/2*w", "100-3/7*w"] {
                let x = k.parse(s).unwrap();
                let a = height(&k, &x, &mut fz).unwrap().total;
                let b = height_value(&k, &x);
                assert!((a - b).abs() < 1e-10 * a.max(1.0), "{d} {s}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn t_height_examples() {
        let mut fz = Factorizer::default();
        let k = q();
        let s = SSet::above_primes(&k, &[2, 3]).unwrap();
        let inv = k.parse("1/720").unwrap();
        let hs = height_s(&k, &inv, &s).unwrap();
        assert!((hs - 144f64.ln()).abs() < 1e-12);
        assert_eq!(height_t(&k, &inv, &[]).unwrap(), 0.0);
        let hc = height_complement(&k, &inv, &s, &mut fz).unwrap();
        assert!((hc - 5f64.ln()).abs() < 1e-12);
        assert!((hs + hc - 720f64.ln()).abs() < 1e-12);
        let fast = height_outside_of_inverse(&k, &k.int(720), &s).unwrap();
        assert!((fast - 5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn support_examples() {
        let mut fz = Factorizer::default();
        let k = q();
        let s = support_lambda(&k, &k.int(12), &mut fz).unwrap();
        assert_eq!(s.sigma.len(), 2);
        assert_eq!(s.lambda, BigUint::from(3u32));
        assert_eq!(support_lambda(&k, &k.int(-1), &mut fz).unwrap().lambda, BigUint::one());
        let x = NFElement::from_rational(k.tag, BigRational::new(26.into(), 2.into()));
        assert_eq!(support_lambda(&k, &x, &mut fz).unwrap().lambda, BigUint::from(13u32));
        let k2 = FieldSpec::quadratic(2).unwrap();
        assert!(support_lambda(&k2, &k2.element(1, 1), &mut fz).unwrap().sigma.is_empty());
    }

    #[test]
    fn one_step_bound_examples() {
        let k = q();
        assert_eq!(one_step_bound(&k, &Poly::from_ints(&k, &[0, 0, 1])).unwrap(), 0.0);
        for cs in [&[1, 0, 1][..], &[3, -1, 0, 1]] {
            let f = Poly::from_ints(&k, cs);
            let b = one_step_bound(&k, &f).unwrap();
            let n = f.degree() as f64;
            for p in -50i64..=50 {
                for qd in 1i64..=50 {
                    let x = NFElement::from_rational(k.tag, BigRational::new(p.into(), qd.into()));
                    let gap = height_value(&k, &f.eval(&x)) - n * height_value(&k, &x);
                    assert!(gap.abs() <= b + 1e-9, "{f} at {p}/{qd}: {gap} > {b}");
                }
            }
        }
        assert!(one_step_bound(&k, &Poly::from_ints(&k, &[1, 1])).is_err());
    }

    #[test]
    fn canonical_height_examples() {
        let k = q();
        let sq = Poly::from_ints(&k, &[0, 0, 1]);
        let r = canonical_height(&k, &sq, &k.int(3), 1e-9, DEFAULT_BIT_CAP).unwrap();
        assert_eq!(r.error_bound, 0.0);
        assert!((r.value - 3f64.ln()).abs() < 1e-12);
        let f = Poly::from_ints(&k, &[1, 0, 1]);
        let r = canonical_height(&k, &f, &k.int(2), 1e-5, DEFAULT_BIT_CAP).unwrap();
        assert!((r.value - 0.8147).abs() < 1e-3);
        assert!(!r.capped && r.error_bound <= 1e-5);
        let g = Poly::from_ints(&k, &[-1, 0, 1]);
        let r = canonical_height(&k, &g, &k.int(-1), 1e-6, DEFAULT_BIT_CAP).unwrap();
        assert!(r.preperiodic && r.value == 0.0 && r.error_bound == 0.0);
    }

    #[test]
    fn bit_cap_degrades_error() {
        let k = q();
        let f = Poly::from_ints(&k, &[1, 0, 1]);
        let r = canonical_height(&k, &f, &k.int(2), 1e-12, 200).unwrap();
        assert!(r.capped);
        assert!(r.error_bound > 1e-12);
        assert!((r.value - 0.8147).abs() <= r.error_bound + 1e-3);
    }

    #[test]
    fn s_integer_tests() {
        let k2 = FieldSpec::quadratic(2).unwrap();
        let above7 = factor_rational_prime(&k2, &BigUint::from(7u32)).unwrap();
        let s_a = SSet::from_ideals(&k2, [above7[0].clone()]).unwrap();
        // 1/(3 + √2) has a pole only at the ideal (7, w-4).
        let x = k2.element(3, 1).inv().unwrap();
        assert!(!is_s_integer(&k2, &x, &s_a).unwrap());
        let s_b = SSet::from_ideals(&k2, [above7[1].clone()]).unwrap();
        assert!(is_s_integer(&k2, &x, &s_b).unwrap());
        assert!(is_s_unit(&k2, &x, &s_b).unwrap());
        assert!(!is_s_unit(&k2, &x, &s_a).unwrap());
        let both = SSet::above_primes(&k2, &[7]).unwrap();
        assert!(is_s_unit(&k2, &k2.int(49), &both).unwrap());
    }
}
