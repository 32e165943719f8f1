//! Orbit iteration for integral maps in integer arithmetic.
//!
//! When f has integral coefficients, the denominator of every iterate of x₀ is
//! supported on the primes dividing the denominator of x₀. Iterates are held as
//! (A + Bω)/D with D a product of those primes, so a step is integer Horner
//! followed by stripping common factors at that fixed prime set.

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, Zero};

use crate::arith::bigutil::{ln_bigint, log_plus_of_ln, logaddexp, remove_factor};
use crate::arith::Factorizer;
use crate::field::ideal::primes_above;
use crate::field::{FieldSpec, FieldTag, NFElement};
use crate::heights::height_value;
use crate::poly::Poly;

#[derive(Debug, Clone)]
enum State {
    /// x = (a + bω)/d with d = Π pᵢ^exps[i] and gcd(a, b, d) = 1.
    Scaled {
        primes: Vec<BigUint>,
        exps: Vec<u64>,
        a: BigInt,
        b: BigInt,
        d: BigInt,
    },
    /// Rational arithmetic, used when f is not integral.
    Plain(NFElement),
}

#[derive(Debug, Clone)]
pub struct OrbitStepper {
    f: Poly,
    coeffs: Vec<(BigInt, BigInt)>,
    state: State,
}

fn min_valuation(n: &BigInt, p: &BigUint, cap: u64) -> u64 {
    if n.is_zero() {
        return cap;
    }
    let mut m = n.magnitude().clone();
    (remove_factor(&mut m, p) as u64).min(cap)
}

fn prime_power_product(primes: &[BigUint], exps: &[u64]) -> BigUint {
    primes
        .iter()
        .zip(exps)
        .filter(|(_, &e)| e > 0)
        .fold(BigUint::one(), |acc, (p, &e)| acc * Pow::pow(p, e))
}

impl OrbitStepper {
    /// Starts at `x0`. Falls back to rational arithmetic when f is not integral
    /// or the denominator of `x0` cannot be factored.
    pub fn new(f: &Poly, x0: &NFElement, fz: &mut Factorizer) -> OrbitStepper {
        let plain = |f: &Poly| OrbitStepper { f: f.clone(), coeffs: Vec::new(), state: State::Plain(x0.clone()) };
        if !f.is_integral() || x0.tag() != f.tag() {
            return plain(f);
        }
        let (a, b, d) = x0.scaled_integral_coords();
        let Ok(fac) = fz.factor(d.magnitude()) else {
            return plain(f);
        };
        let (primes, exps) = fac.factors.iter().map(|(p, e)| (p.clone(), *e as u64)).unzip();
        let coeffs = f.coeffs().iter().map(|c| (c.a().to_integer(), c.b().to_integer())).collect();
        OrbitStepper { f: f.clone(), coeffs, state: State::Scaled { primes, exps, a, b, d } }
    }

    pub fn step(&mut self) {
        let tag = self.f.tag();
        match &mut self.state {
            State::Plain(x) => *x = self.f.eval(x),
            State::Scaled { primes, exps, a, b, d } => {
                let n = self.coeffs.len().saturating_sub(1) as u64;
                let (t, m) = tag.omega_relation();
                let (t, m) = (BigInt::from(t), BigInt::from(m));
                // Σ cᵢ (a + bω)ⁱ dⁿ⁻ⁱ by Horner.
                let (mut fa, mut fb) = self.coeffs.last().cloned().unwrap_or_default();
                let mut dpow = BigInt::one();
                for (ca, cb) in self.coeffs.iter().rev().skip(1) {
                    dpow *= &*d;
                    let bb = &fb * &*b;
                    let na = &fa * &*a + &bb * &m + ca * &dpow;
                    let nb = &fa * &*b + &fb * &*a + &bb * &t + cb * &dpow;
                    fa = na;
                    fb = nb;
                }
                let mut strip = BigUint::one();
                for (p, e) in primes.iter().zip(exps.iter_mut()) {
                    let full = *e * n;
                    let k = min_valuation(&fa, p, full).min(min_valuation(&fb, p, full));
                    if k > 0 {
                        strip *= Pow::pow(p, k);
                    }
                    *e = full - k;
                }
                let strip = BigInt::from_biguint(Sign::Plus, strip);
                *a = fa / &strip;
                *b = fb / &strip;
                *d = BigInt::from_biguint(Sign::Plus, prime_power_product(primes, exps));
            }
        }
    }

    /// The current iterate in reduced coordinates.
    pub fn current(&self) -> NFElement {
        match &self.state {
            State::Plain(x) => x.clone(),
            State::Scaled { primes, exps, a, b, d } => {
                let coord = |c: &BigInt| {
                    if c.is_zero() {
                        return BigRational::zero();
                    }
                    let ks: Vec<u64> = primes.iter().zip(exps).map(|(p, &e)| min_valuation(c, p, e)).collect();
                    let g = BigInt::from_biguint(Sign::Plus, prime_power_product(primes, &ks));
                    BigRational::new_raw(c / &g, d / &g)
                };
                NFElement::new(self.f.tag(), coord(a), coord(b))
            }
        }
    }

    /// Bit length of the largest of A, B and D.
    pub fn bit_size(&self) -> u64 {
        match &self.state {
            State::Plain(x) => x.bit_size(),
            State::Scaled { a, b, d, .. } => a.bits().max(b.bits()).max(d.bits()),
        }
    }

    /// h of the current iterate, read off the scaled form without gcds.
    pub fn height(&self, field: &FieldSpec) -> f64 {
        let State::Scaled { primes, exps, a, b, d } = &self.state else {
            return height_value(field, &self.current());
        };
        if a.is_zero() && b.is_zero() {
            return 0.0;
        }
        if b.is_zero() {
            return ln_bigint(a).max(ln_bigint(d));
        }
        let tag = field.tag;
        // log of the leading coefficient of the primitive minimal polynomial:
        // Σ_𝐩 max(0, −ord_𝐩 x) log Nm 𝐩 over 𝐩 above the denominator primes.
        let mut finite = 0.0;
        for (p, &e) in primes.iter().zip(exps) {
            if e == 0 {
                continue;
            }
            for ideal in primes_above(tag, p) {
                let neg = ideal.e() as i64 * e as i64 - ideal.ord_integral(a, b);
                if neg > 0 {
                    finite += neg as f64 * ideal.ln_norm();
                }
            }
        }
        let arch = arch_log_plus(tag, a, b, d);
        (finite + arch) / 2.0
    }
}

/// Σ over embeddings of log⁺|σ((a + bω)/d)| for a quadratic field, b ≠ 0.
fn arch_log_plus(tag: FieldTag, a: &BigInt, b: &BigInt, d: &BigInt) -> f64 {
    // σ(x) = (P ± Q√r)/E in the power basis.
    let r = tag.radicand();
    let (p, q, e) = if tag.half_integral_basis() {
        (BigInt::from(2) * a + b, b.clone(), BigInt::from(2) * d)
    } else {
        (a.clone(), b.clone(), d.clone())
    };
    let norm = &p * &p - BigInt::from(r) * &q * &q;
    let ln_e = ln_bigint(&e);
    if r < 0 {
        return 2.0 * log_plus_of_ln(0.5 * ln_bigint(&norm) - ln_e);
    }
    let half_ln_r = 0.5 * (r as f64).ln();
    let ln_q = ln_bigint(&q) + half_ln_r;
    let ln_sigma = |sign_q: bool| {
        if p.is_zero() {
            return ln_q;
        }
        let big = logaddexp(ln_bigint(&p), ln_q);
        if p.is_positive() == sign_q {
            big
        } else {
            ln_bigint(&norm) - big
        }
    };
    let plus = ln_sigma(q.is_positive()) - ln_e;
    let minus = ln_sigma(!q.is_positive()) - ln_e;
    log_plus_of_ln(plus) + log_plus_of_ln(minus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_field, FieldKind};

    fn check_against_rational(field: &FieldSpec, f: &Poly, x0: &NFElement, steps: usize) {
        let mut fz = Factorizer::default();
        let mut orbit = OrbitStepper::new(f, x0, &mut fz);
        let mut x = x0.clone();
        for _ in 0..steps {
            assert_eq!(orbit.current(), x);
            let (h, g) = (orbit.height(field), height_value(field, &x));
            assert!((h - g).abs() <= 1e-9 * g.max(1.0), "{h} vs {g} at {x}");
            orbit.step();
            x = f.eval(&x);
        }
    }

    #[test]
    fn agrees_with_rational_iteration() {
        let q = FieldSpec::rational();
        let x = |t: &str| q.parse(t).unwrap();
        let f = Poly::from_ints(&q, &[0, -1, 0, 1]);
        check_against_rational(&q, &f, &x("1/3"), 4);
        check_against_rational(&q, &f, &x("-5/12"), 4);
        let g = Poly::from_ints(&q, &[1, 0, 1]);
        check_against_rational(&q, &g, &x("7/6"), 5);
        check_against_rational(&q, &g, &x("3"), 5);
    }

    #[test]
    fn agrees_in_quadratic_fields() {
        for d in [2, -1, 5, -7, 3] {
            let k = make_field(FieldKind::Quadratic, Some(d)).unwrap();
            let x = |t: &str| k.parse(t).unwrap();
            let f = Poly::from_ints(&k, &[0, -1, 0, 1]);
            check_against_rational(&k, &f, &x("1/3+w"), 3);
            check_against_rational(&k, &Poly::from_ints(&k, &[2, 0, 1]), &x("1/2+3/4*w"), 3);
            check_against_rational(&k, &f, &x("0"), 2);
        }
    }

    #[test]
    fn ramified_denominators_cancel() {
        // (1 + √2)/2 has ord −1 at the prime above 2, not −2.
        let k = make_field(FieldKind::Quadratic, Some(2)).unwrap();
        let x0 = k.parse("1/2+1/2*w").unwrap();
        check_against_rational(&k, &Poly::from_ints(&k, &[1, 2, 1]), &x0, 4);
    }

    #[test]
    fn non_integral_maps_fall_back() {
        let q = FieldSpec::rational();
        let f = Poly::new(q.tag, vec![q.parse("1/2").unwrap(), q.int(0), q.int(1)]).unwrap();
        check_against_rational(&q, &f, &q.parse("2/5").unwrap(), 4);
    }
}
