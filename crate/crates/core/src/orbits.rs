//! Orbits of polynomial maps and the dynamical predicates built on them.

use std::collections::HashSet;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Pow, Signed, Zero};
use serde::Serialize;

use crate::arith::bigutil::{ln_biguint, remove_factor};
use crate::arith::Factorizer;
use crate::constants::a3;
use crate::error::{Error, Result};
use crate::field::ideal::{primes_above, principal_generator};
use crate::field::{approximate_by_unit, factor_element_ideal, FieldSpec, IdealFactorization, NFElement, PrimeIdeal, SSet};
use crate::heights::{
    height_outside_of_inverse, height_s, height_value, is_s_integer, is_s_unit, one_step_bound,
    DEFAULT_BIT_CAP,
};
use crate::poly::{Poly, PolySpec};
use crate::stepper::OrbitStepper;

/// Steps of exact cycle detection before giving up.
pub const PERIODICITY_CAP: u32 = 64;

/// Default bound on the ω-coordinate search for ideal generators.
pub const GENERATOR_SEARCH_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase", tag = "status", content = "cap")]
pub enum Periodicity {
    True,
    False,
    Unknown(u32),
}

#[derive(Debug, Clone, Serialize)]
pub struct OrbitRecord {
    pub alpha: NFElement,
    pub iterates: Vec<NFElement>,
    /// Iteration stopped at the bit cap before reaching the requested length.
    pub truncated: bool,
}

impl OrbitRecord {
    pub fn heights(&self, field: &FieldSpec) -> Vec<f64> {
        self.iterates.iter().map(|x| height_value(field, x)).collect()
    }

    /// Ideal factorizations of the nonzero iterates (None at zero).
    pub fn factorizations(
        &self,
        field: &FieldSpec,
        fz: &mut Factorizer,
    ) -> Vec<Result<Option<IdealFactorization>>> {
        self.iterates
            .iter()
            .map(|x| {
                if x.is_zero() {
                    Ok(None)
                } else {
                    factor_element_ideal(field, x, fz).map(Some)
                }
            })
            .collect()
    }
}

/// α, f(α), …, f⁽ᵐ⁾(α), stopping early if an iterate exceeds `bit_cap` bits.
pub fn iterate_orbit(field: &FieldSpec, f: &Poly, alpha: &NFElement, m: usize, bit_cap: u64) -> Result<OrbitRecord> {
    field.owns(alpha)?;
    if f.tag() != field.tag {
        return Err(Error::FieldMismatch);
    }
    let mut iterates = vec![alpha.clone()];
    let mut truncated = false;
    let mut orbit = OrbitStepper::new(f, alpha, &mut Factorizer::default());
    for _ in 0..m {
        orbit.step();
        if orbit.bit_size() > bit_cap {
            truncated = true;
            break;
        }
        iterates.push(orbit.current());
    }
    Ok(OrbitRecord {
        alpha: alpha.clone(),
        iterates,
        truncated,
    })
}

/// Cycle detection on the orbit of α plus the height refutation h(f⁽ᵏ⁾(α)) > B/(d−1).
///
/// With `periodic_only`, a cycle counts only when it returns to α itself.
fn orbit_status(field: &FieldSpec, f: &Poly, alpha: &NFElement, periodic_only: bool) -> Result<Periodicity> {
    let c6 = if f.degree() >= 2 && f.is_integral() {
        Some(one_step_bound(field, f)? / (f.degree() as f64 - 1.0))
    } else {
        None
    };
    let mut seen = HashSet::new();
    seen.insert(alpha.clone());
    let mut orbit = OrbitStepper::new(f, alpha, &mut Factorizer::default());
    for _ in 0..PERIODICITY_CAP {
        if let Some(c6) = c6 {
            if orbit.height(field) > c6 {
                return Ok(Periodicity::False);
            }
        }
        orbit.step();
        if orbit.bit_size() > DEFAULT_BIT_CAP {
            break;
        }
        let cur = orbit.current();
        if &cur == alpha {
            return Ok(Periodicity::True);
        }
        if !seen.insert(cur.clone()) {
            // entered a cycle that avoids α
            return Ok(if periodic_only { Periodicity::False } else { Periodicity::True });
        }
    }
    Ok(Periodicity::Unknown(PERIODICITY_CAP))
}

/// Whether 0 is a periodic point of f.
pub fn is_zero_periodic(field: &FieldSpec, f: &Poly) -> Result<Periodicity> {
    orbit_status(field, f, &NFElement::zero(field.tag), true)
}

/// Whether α has a finite forward orbit under f.
pub fn is_preperiodic(field: &FieldSpec, f: &Poly, alpha: &NFElement) -> Result<Periodicity> {
    field.owns(alpha)?;
    orbit_status(field, f, alpha, false)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    SIntegerRatio,
    PowerRelation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DependenceWitness {
    pub kind: WitnessKind,
    pub alpha: NFElement,
    pub m: usize,
    pub n: usize,
    /// f⁽ⁿ⁾(α) = v·f⁽ᵐ⁾(α).
    pub v: Option<NFElement>,
    /// (f⁽ᵐ⁾(α))^r = u·(f⁽ⁿ⁾(α))^s.
    pub r: Option<i64>,
    pub s: Option<i64>,
    pub u: Option<NFElement>,
    pub verified: bool,
}

fn orbit_values(f: &Poly, alpha: &NFElement, upto: usize) -> Vec<NFElement> {
    let mut out = vec![alpha.clone()];
    for _ in 0..upto {
        let next = f.eval(out.last().unwrap());
        out.push(next);
    }
    out
}

/// Ratio witness from precomputed values x_n = f⁽ⁿ⁾(α), x_m = f⁽ᵐ⁾(α).
pub(crate) fn ratio_witness(
    field: &FieldSpec,
    alpha: &NFElement,
    (m, xm): (usize, &NFElement),
    (n, xn): (usize, &NFElement),
    s: &SSet,
) -> Result<Option<DependenceWitness>> {
    if xm.is_zero() {
        return Err(Error::ZeroInput("f^(m)(alpha)"));
    }
    let v = xn.try_div(xm)?;
    if !is_s_integer(field, &v, s)? {
        return Ok(None);
    }
    let verified = &(&v * xm) == xn;
    Ok(Some(DependenceWitness {
        kind: WitnessKind::SIntegerRatio,
        alpha: alpha.clone(),
        m,
        n,
        v: Some(v),
        r: None,
        s: None,
        u: None,
        verified,
    }))
}

fn check_indices(m: usize, n: usize, min_n: usize) -> Result<()> {
    if m <= n || n < min_n {
        return Err(Error::precondition(format!("need m > n ≥ {min_n}, got m={m}, n={n}")));
    }
    Ok(())
}

/// f⁽ⁿ⁾(α) = v·f⁽ᵐ⁾(α) with v ∈ O_S, if such v exists.
pub fn check_s_integer_ratio(
    field: &FieldSpec,
    f: &Poly,
    alpha: &NFElement,
    m: usize,
    n: usize,
    s: &SSet,
) -> Result<Option<DependenceWitness>> {
    check_indices(m, n, 0)?;
    field.owns(alpha)?;
    let xs = orbit_values(f, alpha, m);
    ratio_witness(field, alpha, (m, &xs[m]), (n, &xs[n]), s)
}

/// Pairwise coprime integers c_j > 1 such that every input is a product of powers of them.
pub(crate) fn coprime_base(values: &[BigUint]) -> Vec<BigUint> {
    let mut set: Vec<BigUint> = values.iter().filter(|v| !v.is_one() && !v.is_zero()).cloned().collect();
    set.sort();
    set.dedup();
    'outer: loop {
        for i in 0..set.len() {
            for j in i + 1..set.len() {
                let g = crate::arith::rational::gcd_big(&set[i], &set[j]);
                if !g.is_one() {
                    let (a, b) = (&set[i] / &g, &set[j] / &g);
                    let mut next: Vec<BigUint> = set
                        .iter()
                        .enumerate()
                        .filter(|&(k, _)| k != i && k != j)
                        .map(|(_, v)| v.clone())
                        .collect();
                    next.extend([a, b, g].into_iter().filter(|v| !v.is_one()));
                    next.sort();
                    next.dedup();
                    set = next;
                    continue 'outer;
                }
            }
        }
        return set;
    }
}

/// Norm-level exponent vector of a nonzero integral-or-fractional x outside S.
///
/// Entries: exact ords at ideals above S-primes that are not in S, then
/// exponents of |Nm| (numerator minus denominator, S-primes removed) over `base`.
fn outside_vector(field: &FieldSpec, x: &NFElement, s: &SSet, base: &[BigUint]) -> Result<Vec<i64>> {
    let mut v = Vec::new();
    for p in s.rational_primes() {
        for ideal in primes_above(field.tag, &p) {
            if !s.contains(&ideal) {
                v.push(ideal.ord(x)?);
            }
        }
    }
    let (num, den) = stripped_norm_parts(x, s);
    for c in base {
        let mut a = num.clone();
        let mut b = den.clone();
        v.push(remove_factor(&mut a, c) as i64 - remove_factor(&mut b, c) as i64);
    }
    Ok(v)
}

fn stripped_norm_parts(x: &NFElement, s: &SSet) -> (BigUint, BigUint) {
    let nm = x.norm();
    let mut num = nm.numer().magnitude().clone();
    let mut den = nm.denom().magnitude().clone();
    for p in s.rational_primes() {
        remove_factor(&mut num, &p);
        remove_factor(&mut den, &p);
    }
    (num, den)
}

/// (r, s) ≠ (0, 0) with r·X = s·Y, canonicalised; None if X, Y are not proportional.
fn proportional(x: &[i64], y: &[i64]) -> Option<(i64, i64)> {
    let xz = x.iter().all(|&e| e == 0);
    let yz = y.iter().all(|&e| e == 0);
    match (xz, yz) {
        (true, true) | (true, false) => Some((1, 0)),
        (false, true) => Some((0, 1)),
        (false, false) => {
            let i = x.iter().position(|&e| e != 0)?;
            if y[i] == 0 {
                return None;
            }
            // r·x_i = s·y_i
            let g = x[i].gcd(&y[i]);
            let (mut r, mut s) = (y[i] / g, x[i] / g);
            if r < 0 {
                r = -r;
                s = -s;
            }
            x.iter()
                .zip(y)
                .all(|(&a, &b)| r * a == s * b)
                .then_some((r, s))
        }
    }
}

/// (f⁽ᵐ⁾(α))^r = u·(f⁽ⁿ⁾(α))^s with u an S-unit, if such (r, s) ≠ (0, 0) exists.
pub fn check_power_dependence(
    field: &FieldSpec,
    f: &Poly,
    alpha: &NFElement,
    m: usize,
    n: usize,
    s: &SSet,
) -> Result<Option<DependenceWitness>> {
    check_indices(m, n, 1)?;
    field.owns(alpha)?;
    let xs = orbit_values(f, alpha, m);
    power_witness(field, alpha, (m, &xs[m]), (n, &xs[n]), s)
}

pub(crate) fn power_witness(
    field: &FieldSpec,
    alpha: &NFElement,
    (m, xm): (usize, &NFElement),
    (n, xn): (usize, &NFElement),
    s: &SSet,
) -> Result<Option<DependenceWitness>> {
    if xm.is_zero() || xn.is_zero() {
        return Err(Error::ZeroInput("power dependence"));
    }
    let (a1, b1) = stripped_norm_parts(xm, s);
    let (a2, b2) = stripped_norm_parts(xn, s);
    let base = coprime_base(&[a1, b1, a2, b2]);
    let vx = outside_vector(field, xm, s, &base)?;
    let vy = outside_vector(field, xn, s, &base)?;
    let Some((r, sx)) = proportional(&vx, &vy) else {
        return Ok(None);
    };
    let u = xm.pow_signed(r)?.try_div(&xn.pow_signed(sx)?)?;
    if !is_s_unit(field, &u, s)? {
        return Ok(None);
    }
    let verified = xm.pow_signed(r)? == &u * &xn.pow_signed(sx)?;
    Ok(Some(DependenceWitness {
        kind: WitnessKind::PowerRelation,
        alpha: alpha.clone(),
        m,
        n,
        v: None,
        r: Some(r),
        s: Some(sx),
        u: Some(u),
        verified,
    }))
}

/// 𝔶_S([f⁽ᵐ⁾(α)]) divides [f⁽ᵏ⁾(0)] with k = m − n, i.e. f⁽ᵏ⁾(0)/f⁽ᵐ⁾(α) ∈ O_S.
pub fn divisibility_transfer_holds(
    field: &FieldSpec,
    f: &Poly,
    alpha: &NFElement,
    m: usize,
    n: usize,
    s: &SSet,
) -> Result<bool> {
    check_indices(m, n, 0)?;
    let xm = orbit_values(f, alpha, m).pop().unwrap();
    let fk0 = orbit_values(f, &NFElement::zero(field.tag), m - n).pop().unwrap();
    if xm.is_zero() {
        return Err(Error::ZeroInput("f^(m)(alpha)"));
    }
    is_s_integer(field, &fk0.try_div(&xm)?, s)
}

#[derive(Debug, Clone, Serialize)]
pub struct ZsigmondyResult {
    pub m: usize,
    pub window: usize,
    pub primitive_prime: Option<PrimeIdeal>,
    /// Iterate indices the prime must avoid.
    pub excluded: Vec<usize>,
}

/// A prime ideal dividing f⁽ᵐ⁾(α) and none of f⁽ʲ⁾(α), max(0, m−k) ≤ j < m.
pub fn find_primitive_divisor(
    field: &FieldSpec,
    f: &Poly,
    alpha: &NFElement,
    m: usize,
    k: usize,
    fz: &mut Factorizer,
) -> Result<ZsigmondyResult> {
    if m < 1 {
        return Err(Error::precondition("m must be at least 1"));
    }
    field.owns(alpha)?;
    let xs = orbit_values(f, alpha, m);
    primitive_from_values(field, &xs, m, k, fz)
}

pub(crate) fn primitive_from_values(
    field: &FieldSpec,
    xs: &[NFElement],
    m: usize,
    k: usize,
    fz: &mut Factorizer,
) -> Result<ZsigmondyResult> {
    let xm = &xs[m];
    if xm.is_zero() || xm.norm().abs().is_one() && xm.is_integral() {
        return Err(Error::precondition("f^(m)(alpha) must be a nonzero nonunit"));
    }
    let excluded: Vec<usize> = (m.saturating_sub(k)..m).collect();
    let fac = factor_element_ideal(field, xm, fz)?;
    let mut candidates: Vec<PrimeIdeal> = fac.support().cloned().collect();
    candidates.sort();
    let window_has_zero = excluded.iter().any(|&j| xs[j].is_zero());
    let mut primitive = None;
    if !window_has_zero {
        'cand: for p in candidates {
            for &j in &excluded {
                if p.ord(&xs[j])? > 0 {
                    continue 'cand;
                }
            }
            primitive = Some(p);
            break;
        }
    }
    Ok(ZsigmondyResult {
        m,
        window: k,
        primitive_prime: primitive,
        excluded,
    })
}

fn require_zero_not_periodic(field: &FieldSpec, f: &Poly) -> Result<()> {
    match is_zero_periodic(field, f)? {
        Periodicity::False => Ok(()),
        Periodicity::True => Err(Error::precondition("0 is periodic for f")),
        Periodicity::Unknown(c) => Err(Error::precondition(format!(
            "periodicity of 0 undecided within {c} steps"
        ))),
    }
}

/// S_k = M_K^∞ ∪ {𝐩 : 𝐩 | f⁽ʲ⁾(0) for some 1 ≤ j ≤ k}.
pub fn build_sk(field: &FieldSpec, f: &Poly, k: usize, fz: &mut Factorizer) -> Result<SSet> {
    if k < 1 {
        return Err(Error::precondition("k must be at least 1"));
    }
    require_zero_not_periodic(field, f)?;
    let xs = orbit_values(f, &NFElement::zero(field.tag), k);
    let mut ideals = Vec::new();
    for x in &xs[1..] {
        ideals.extend(factor_element_ideal(field, x, fz)?.support().cloned());
    }
    SSet::from_ideals(field, ideals)
}

#[derive(Debug, Clone, Serialize)]
pub struct SPartEntry {
    pub ideal: PrimeIdeal,
    /// b_i = d_f·ℏ·q_i + r_i.
    pub b_i: i64,
    pub q_i: i64,
    pub r_i: i64,
    /// Generator of 𝐩_i^ℏ; computed only when q_i > 0.
    pub generator: Option<NFElement>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SPartWitness {
    pub b: NFElement,
    pub degree_f: u32,
    pub class_number: u64,
    pub entries: Vec<SPartEntry>,
    /// Nm(𝐚) for the S-free part 𝐚 of [b].
    #[serde(serialize_with = "crate::ser::big_as_str")]
    pub norm_free_part: BigUint,
    pub c: NFElement,
    pub epsilon: NFElement,
    pub recombines: bool,
    pub c_ideal_matches: bool,
    pub slack_lower: f64,
    pub slack_upper: f64,
}

impl SPartWitness {
    pub fn holds(&self) -> bool {
        self.recombines && self.c_ideal_matches && self.slack_lower >= -1e-9 && self.slack_upper >= -1e-9
    }
}

/// Builds the S-part witness for b = f(α).
pub fn spart_witness(
    field: &FieldSpec,
    f: &PolySpec,
    alpha: &NFElement,
    s: &SSet,
) -> Result<SPartWitness> {
    field.owns(alpha)?;
    if !alpha.is_integral() {
        return Err(Error::precondition("alpha must be integral"));
    }
    if !f.splits_over_base() {
        return Err(Error::precondition("f must split over K"));
    }
    let b = f.poly.eval(alpha);
    spart_witness_for(field, &b, f.degree as u32, s, GENERATOR_SEARCH_CAP)
}

/// The witness construction for an integral b ≠ 0 and degree d_f.
pub fn spart_witness_for(
    field: &FieldSpec,
    b: &NFElement,
    d_f: u32,
    s: &SSet,
    generator_cap: u64,
) -> Result<SPartWitness> {
    field.owns(b)?;
    if b.is_zero() {
        return Err(Error::ZeroInput("f(alpha)"));
    }
    if !b.is_integral() {
        return Err(Error::precondition("b must be integral"));
    }
    if d_f < 1 {
        return Err(Error::precondition("deg f must be positive"));
    }
    let h = field.class_number;
    let modulus = d_f as i64 * h as i64;
    let mut entries = Vec::new();
    let mut divisor = NFElement::one(field.tag);
    let mut divisor_q = NFElement::one(field.tag);
    let mut norm_s = BigUint::one();
    for ideal in s.finite() {
        let b_i = ideal.ord(b)?;
        let (q_i, r_i) = b_i.div_mod_floor(&modulus);
        let generator = if q_i > 0 {
            let g = principal_generator(field, ideal, h as u32, generator_cap)?;
            divisor = &divisor * &g.pow((d_f as i64 * q_i) as u64);
            divisor_q = &divisor_q * &g.pow(q_i as u64);
            Some(g)
        } else {
            None
        };
        norm_s *= Pow::pow(ideal.norm(), b_i as u64);
        entries.push(SPartEntry {
            ideal: ideal.clone(),
            b_i,
            q_i,
            r_i,
            generator,
        });
    }
    let nm_b = b.norm().abs().to_integer().magnitude().clone();
    let (norm_free_part, rem) = nm_b.div_rem(&norm_s);
    let recombines = rem.is_zero() && &norm_free_part * &norm_s == nm_b;
    let c = b.try_div(&divisor)?;
    let mut c_ideal_matches = c.is_integral();
    if c_ideal_matches {
        for e in &entries {
            if e.ideal.ord(&c)? != e.r_i {
                c_ideal_matches = false;
            }
        }
    }
    let approx = approximate_by_unit(field, &c, d_f)?;
    let eps = approx.epsilon;

    let d = field.degree as f64;
    let dff = d_f as f64;
    let ln_q = ln_biguint(&s.params().q);
    let unit_term = match a3(field) {
        Ok(a) => 0.5 * a * d * d * field.regulator,
        Err(Error::A3Undefined) => 0.0,
        Err(e) => return Err(e),
    };
    let b_inv = b.inv()?;
    let h_s = height_s(field, &b_inv, s)?;
    let h_out = height_outside_of_inverse(field, b, s)?;
    let lhs_lower = height_value(field, &eps.try_div(&divisor_q)?);
    let slack_lower = lhs_lower - (h_s / dff - h as f64 * ln_q - unit_term);
    let lhs_upper = height_value(field, &(&eps.pow(d_f as u64) * &c));
    let slack_upper = h_out + dff * h as f64 / d * ln_q + dff * unit_term - lhs_upper;
    Ok(SPartWitness {
        b: b.clone(),
        degree_f: d_f,
        class_number: h,
        entries,
        norm_free_part,
        c,
        epsilon: eps,
        recombines,
        c_ideal_matches,
        slack_lower,
        slack_upper,
    })
}

/// f⁽ᵏ⁾(0).
pub fn iterate_zero(f: &Poly, k: usize) -> NFElement {
    orbit_values(f, &NFElement::zero(f.tag()), k).pop().unwrap()
}
