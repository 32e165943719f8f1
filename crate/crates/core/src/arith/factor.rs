//! Integer factorization: trial division, Miller–Rabin and Brent's variant of
//! Pollard rho under an explicit step budget.
//!
//! Below 3.317·10²⁴ the Miller–Rabin bases {2, …, 41} are deterministic.
//! Above that bound a cofactor passing 24 strong-pseudoprime rounds is taken
//! as prime.

use std::collections::HashMap;
use std::sync::OnceLock;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Trial division stops at this bound.
pub const TRIAL_LIMIT: u32 = 1_000_000;

/// Default number of rho iterations allowed per `factor` call.
pub const DEFAULT_RHO_BUDGET: u64 = 4_000_000;

const MR_BASES: [u32; 24] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
];

fn small_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let n = TRIAL_LIMIT as usize;
        let mut sieve = vec![true; n + 1];
        sieve[0] = false;
        sieve[1] = false;
        let mut i = 2;
        while i * i <= n {
            if sieve[i] {
                let mut j = i * i;
                while j <= n {
                    sieve[j] = false;
                    j += i;
                }
            }
            i += 1;
        }
        sieve
            .iter()
            .enumerate()
            .filter_map(|(k, &p)| p.then_some(k as u32))
            .collect()
    })
}

/// Complete factorization of a positive integer as sorted (prime, exponent) pairs.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Factorization {
    pub factors: Vec<(BigUint, u32)>,
}

impl Factorization {
    pub fn product(&self) -> BigUint {
        self.factors
            .iter()
            .fold(BigUint::one(), |acc, (p, e)| acc * p.pow(*e))
    }

    pub fn primes(&self) -> impl Iterator<Item = &BigUint> {
        self.factors.iter().map(|(p, _)| p)
    }

    fn from_map(map: HashMap<BigUint, u32>) -> Self {
        let mut factors: Vec<_> = map.into_iter().collect();
        factors.sort();
        Factorization { factors }
    }
}

fn mulmod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn powmod_u64(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod_u64(r, b, m);
        }
        b = mulmod_u64(b, b, m);
        e >>= 1;
    }
    r
}

fn strong_probable_prime_u64(n: u64, a: u64) -> bool {
    let a = a % n;
    if a == 0 {
        return true;
    }
    let mut d = n - 1;
    let s = d.trailing_zeros();
    d >>= s;
    let mut x = powmod_u64(a, d, n);
    if x == 1 || x == n - 1 {
        return true;
    }
    for _ in 1..s {
        x = mulmod_u64(x, x, n);
        if x == n - 1 {
            return true;
        }
    }
    false
}

fn strong_probable_prime(n: &BigUint, a: u32) -> bool {
    let a = BigUint::from(a) % n;
    if a.is_zero() {
        return true;
    }
    let one = BigUint::one();
    let n1 = n - &one;
    let s = n1.trailing_zeros().unwrap_or(0);
    let d = &n1 >> s;
    let mut x = a.modpow(&d, n);
    if x == one || x == n1 {
        return true;
    }
    for _ in 1..s {
        x = (&x * &x) % n;
        if x == n1 {
            return true;
        }
    }
    false
}

/// Primality test: deterministic below 3.317·10²⁴, 24 strong rounds above.
pub fn is_prime(n: &BigUint) -> bool {
    if let Some(small) = n.to_u64() {
        if small < 2 {
            return false;
        }
        for &p in &MR_BASES[..12] {
            let p = p as u64;
            if small == p {
                return true;
            }
            if small % p == 0 {
                return false;
            }
        }
        return MR_BASES[..12]
            .iter()
            .all(|&a| strong_probable_prime_u64(small, a as u64));
    }
    for &p in &MR_BASES {
        if (n % p).is_zero() {
            return false;
        }
    }
    MR_BASES.iter().all(|&a| strong_probable_prime(n, a))
}

fn rho_u64(n: u64, c: u64, budget: &mut u64) -> Option<u64> {
    let f = |x: u64| (mulmod_u64(x, x, n) + c) % n;
    let mut y = 2u64;
    let mut r = 1u64;
    let mut q = 1u64;
    let mut x;
    let mut ys;
    let m = 128u64;
    loop {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        let mut k = 0;
        while k < r {
            ys = y;
            let steps = m.min(r - k);
            for _ in 0..steps {
                y = f(y);
                q = mulmod_u64(q, x.abs_diff(y), n);
            }
            if *budget < steps {
                return None;
            }
            *budget -= steps;
            let g = q.gcd(&n);
            if g != 1 {
                if g == n {
                    loop {
                        ys = f(ys);
                        let g = x.abs_diff(ys).gcd(&n);
                        if g != 1 {
                            return (g != n).then_some(g);
                        }
                    }
                }
                return Some(g);
            }
            k += m;
        }
        r *= 2;
    }
}

fn rho_big(n: &BigUint, c: u32, budget: &mut u64) -> Option<BigUint> {
    let c = BigUint::from(c);
    let f = |x: &BigUint| (x * x + &c) % n;
    let mut y = BigUint::from(2u32);
    let mut r = 1u64;
    let mut q = BigUint::one();
    let mut x;
    let mut ys;
    let m = 128u64;
    let diff = |a: &BigUint, b: &BigUint| if a > b { a - b } else { b - a };
    loop {
        x = y.clone();
        for _ in 0..r {
            y = f(&y);
        }
        let mut k = 0;
        while k < r {
            ys = y.clone();
            let steps = m.min(r - k);
            for _ in 0..steps {
                y = f(&y);
                q = (&q * diff(&x, &y)) % n;
            }
            if *budget < steps {
                return None;
            }
            *budget -= steps;
            let g = q.gcd(n);
            if !g.is_one() {
                if &g == n {
                    loop {
                        ys = f(&ys);
                        let g = diff(&x, &ys).gcd(n);
                        if !g.is_one() {
                            return (&g != n).then_some(g);
                        }
                    }
                }
                return Some(g);
            }
            k += m;
        }
        r *= 2;
    }
}

/// Exact k-th root when `n` is a perfect k-th power for some k ≥ 2.
fn perfect_power(n: &BigUint) -> Option<(BigUint, u32)> {
    let bits = n.bits() as u32;
    for &k in small_primes().iter().take_while(|&&k| k <= bits) {
        let r = n.nth_root(k);
        if r > BigUint::one() && r.pow(k) == *n {
            return Some((r, k));
        }
    }
    None
}

/// Memoizing factorization service with a per-call rho budget.
///
/// Each worker owns its own instance; `fresh_entries` lists the keys computed
/// since construction so a persistent cache can append them.
#[derive(Debug, Clone)]
pub struct Factorizer {
    pub rho_budget: u64,
    cache: HashMap<BigUint, Factorization>,
    fresh: Vec<BigUint>,
}

impl Default for Factorizer {
    fn default() -> Self {
        Self::new(DEFAULT_RHO_BUDGET)
    }
}

impl Factorizer {
    pub fn new(rho_budget: u64) -> Self {
        Factorizer {
            rho_budget,
            cache: HashMap::new(),
            fresh: Vec::new(),
        }
    }

    /// Seeds the cache with a known factorization; the record must re-multiply to `n`.
    pub fn insert_known(&mut self, n: BigUint, fac: Factorization) -> Result<()> {
        if fac.product() != n {
            return Err(Error::invalid(format!(
                "cached factorization does not multiply back to {n}"
            )));
        }
        self.cache.insert(n, fac);
        Ok(())
    }

    pub fn is_cached(&self, n: &BigUint) -> bool {
        self.cache.contains_key(n)
    }

    pub fn fresh_entries(&self) -> impl Iterator<Item = (&BigUint, &Factorization)> {
        self.fresh
            .iter()
            .filter_map(move |k| self.cache.get(k).map(|f| (k, f)))
    }

    pub fn clear_fresh(&mut self) {
        self.fresh.clear();
    }

    /// Factor a positive integer. `n = 1` yields the empty factorization.
    pub fn factor(&mut self, n: &BigUint) -> Result<Factorization> {
        if n.is_zero() {
            return Err(Error::ZeroInput("factor"));
        }
        if let Some(f) = self.cache.get(n) {
            return Ok(f.clone());
        }
        let mut found: HashMap<BigUint, u32> = HashMap::new();
        let mut rest = n.clone();
        for &p in small_primes() {
            let pb = BigUint::from(p);
            if &pb * &pb > rest {
                break;
            }
            if (&rest % p).is_zero() {
                let e = crate::arith::bigutil::remove_factor(&mut rest, &pb);
                found.insert(pb, e);
            }
        }
        let mut budget = self.rho_budget;
        let mut pending = Vec::new();
        if !rest.is_one() {
            pending.push((rest, 1u32));
        }
        let limit_sq = BigUint::from(TRIAL_LIMIT as u64 * TRIAL_LIMIT as u64);
        while let Some((m, mult)) = pending.pop() {
            if m < limit_sq || is_prime(&m) {
                *found.entry(m).or_insert(0) += mult;
                continue;
            }
            if let Some((root, k)) = perfect_power(&m) {
                pending.push((root, mult * k));
                continue;
            }
            match self.split(&m, &mut budget) {
                Some(d) => {
                    let other = &m / &d;
                    pending.push((d, mult));
                    pending.push((other, mult));
                }
                None => {
                    let cofactor = pending
                        .iter()
                        .fold(m.pow(mult), |acc, (q, e)| acc * q.pow(*e));
                    return Err(Error::IncompleteFactorization {
                        n: n.clone(),
                        found: Factorization::from_map(found).factors,
                        cofactor,
                    });
                }
            }
        }
        let fac = Factorization::from_map(found);
        debug_assert_eq!(fac.product(), *n);
        self.cache.insert(n.clone(), fac.clone());
        self.fresh.push(n.clone());
        Ok(fac)
    }

    fn split(&self, m: &BigUint, budget: &mut u64) -> Option<BigUint> {
        for c in 1u32..64 {
            if *budget == 0 {
                return None;
            }
            let d = match m.to_u64() {
                Some(small) => rho_u64(small, c as u64, budget).map(BigUint::from),
                None => rho_big(m, c, budget),
            };
            if d.is_some() {
                return d;
            }
        }
        None
    }
}
