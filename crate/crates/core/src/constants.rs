//! Explicit constants and bound shapes: A₁, A₂, A₃, δ_K, η₁, η₂, Győry–Yu shapes,
//! Northcott bounds, the λ lower-bound shape and the Zsigmondy window.
//!
//! The unprinted effective constants c₁…c₇, C₁, C₂, C₄, C₅ are parameters
//! ([`CParams`], default 1), so every value here is a bound *shape*.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::arith::bigutil::{ln_biguint, log_star};
use crate::error::{Error, Result};
use crate::field::{FieldSpec, SSet, SSetParams};
use crate::orbits::Periodicity;
use crate::poly::PolySpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CParams {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    pub c6: f64,
    pub c7: f64,
    /// C₁(K,F) and C₂(K,F) of the decomposable-form bounds.
    pub gy_c1: f64,
    pub gy_c2: f64,
    /// C₄(K,f), C₅(K,f) of the parameter transfer to L.
    pub transfer_c4: f64,
    pub transfer_c5: f64,
}

impl Default for CParams {
    fn default() -> Self {
        CParams {
            c1: 1.0,
            c2: 1.0,
            c3: 1.0,
            c4: 1.0,
            c5: 1.0,
            c6: 1.0,
            c7: 1.0,
            gy_c1: 1.0,
            gy_c2: 1.0,
            transfer_c4: 1.0,
            transfer_c5: 1.0,
        }
    }
}

impl CParams {
    pub const NAMES: [&'static str; 11] = [
        "c1", "c2", "c3", "c4", "c5", "c6", "c7", "gy_c1", "gy_c2", "transfer_c4", "transfer_c5",
    ];

    pub fn get_mut(&mut self, name: &str) -> Option<&mut f64> {
        Some(match name {
            "c1" => &mut self.c1,
            "c2" => &mut self.c2,
            "c3" => &mut self.c3,
            "c4" => &mut self.c4,
            "c5" => &mut self.c5,
            "c6" => &mut self.c6,
            "c7" => &mut self.c7,
            "gy_c1" => &mut self.gy_c1,
            "gy_c2" => &mut self.gy_c2,
            "transfer_c4" => &mut self.transfer_c4,
            "transfer_c5" => &mut self.transfer_c5,
            _ => return None,
        })
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        let mut copy = *self;
        copy.get_mut(name).map(|v| *v)
    }
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive and finite, got {x}")))
    }
}

/// A₁(u,v) = v^{2v+3.5} 2^{7v} log(2v) u^{2v}.
pub fn a1(u: f64, v: f64) -> Result<f64> {
    check_positive("u", u)?;
    check_positive("v", v)?;
    let ln = (2.0 * v + 3.5) * v.ln() + 7.0 * v * std::f64::consts::LN_2 + 2.0 * v * u.ln();
    Ok(ln.exp() * (2.0 * v).ln())
}

/// A₂(u,v) = (2048u)^v v^{3.5}.
pub fn a2(u: f64, v: f64) -> Result<f64> {
    check_positive("u", u)?;
    check_positive("v", v)?;
    Ok((2048.0 * u).powf(v) * v.powf(3.5))
}

/// δ_K: log 2/d for d ≤ 2, otherwise ¼(log log d / log d)³.
pub fn voutier_delta(d: u32) -> Result<f64> {
    match d {
        0 => Err(Error::invalid("degree must be at least 1")),
        1 | 2 => Ok(std::f64::consts::LN_2 / d as f64),
        _ => {
            let l = (d as f64).ln();
            Ok(0.25 * (l.ln() / l).powi(3))
        }
    }
}

/// A₃(K) = (r!)²/(2^{r−1} d^r) · (δ_K/d)^{1−r}.
pub fn a3(field: &FieldSpec) -> Result<f64> {
    let r = field.unit_rank;
    if r == 0 {
        return Err(Error::A3Undefined);
    }
    let d = field.degree as f64;
    let fact: f64 = (1..=r).map(f64::from).product();
    Ok(fact * fact / (2f64.powi(r as i32 - 1) * d.powi(r as i32))
        * (field.delta / d).powi(1 - r as i32))
}

/// Π log*(Nm 𝐩ᵢ)^D; the flag reports whether log* differed from log on some factor.
fn log_norm_product(params_finite: &[BigUint], power: f64) -> (f64, bool) {
    let mut prod = 1.0;
    let mut substituted = false;
    for nm in params_finite {
        let l = ln_biguint(nm);
        if l < 1.0 {
            substituted = true;
        }
        prod *= l.max(1.0).powf(power);
    }
    (prod, substituted)
}

fn finite_norms(s: &SSet) -> Vec<BigUint> {
    s.finite().iter().map(|i| i.norm()).collect()
}

fn p_pow(params: &SSetParams, power: f64) -> f64 {
    (params.ln_p() * power).exp()
}

#[derive(Debug, Clone, Serialize)]
pub struct EtaValue {
    pub eta_inv: f64,
    pub eta: f64,
    /// log* replaced log in Π log Nm(𝐩ᵢ)^D for at least one ideal.
    pub log_star_substituted: bool,
}

impl EtaValue {
    fn from_inv(eta_inv: f64, log_star_substituted: bool) -> Self {
        EtaValue {
            eta_inv,
            eta: 1.0 / eta_inv,
            log_star_substituted,
        }
    }
}

/// η₁(K,f,S)⁻¹ = c₁ A₁(dD, sD) max{1,t} P^D (log*P + 𝔗) Π log*(Nm 𝐩ᵢ)^D.
pub fn eta1(field: &FieldSpec, f: &PolySpec, s: &SSet) -> Result<EtaValue> {
    f.require_three_roots()?;
    let dd = f.d_split()? as f64;
    let prm = s.params();
    let d = field.degree as f64;
    let (prod, sub) = log_norm_product(&finite_norms(s), dd);
    let inv = f.c_params.c1
        * a1(d * dd, prm.s as f64 * dd)?
        * (prm.t.max(1) as f64)
        * p_pow(&prm, dd)
        * (prm.ln_p().max(1.0) + prm.t_sum)
        * prod;
    Ok(EtaValue::from_inv(inv, sub))
}

/// η₂(K,f,S)⁻¹ = c₁ A₂(dDℏ_L, tD) t P^D Π log*(Nm 𝐩ᵢ)^D, for t > 0.
pub fn eta2(field: &FieldSpec, f: &PolySpec, s: &SSet) -> Result<EtaValue> {
    f.require_three_roots()?;
    let prm = s.params();
    if prm.t == 0 {
        return Err(Error::precondition("eta2 needs at least one finite place in S"));
    }
    let dd = f.d_split()? as f64;
    let hl = f.h_l()? as f64;
    let d = field.degree as f64;
    let (prod, sub) = log_norm_product(&finite_norms(s), dd);
    let inv = f.c_params.c1
        * a2(d * dd * hl, prm.t as f64 * dd)?
        * prm.t as f64
        * p_pow(&prm, dd)
        * prod;
    Ok(EtaValue::from_inv(inv, sub))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GyoryYuVariant {
    One,
    Two,
}

#[derive(Debug, Clone, Serialize)]
pub struct GyoryYuValue {
    pub value: f64,
    pub log_star_substituted: bool,
}

/// Right-hand side of the decomposable-form height bound (variant 1 or 2).
pub fn gyory_yu_height_bound(
    variant: GyoryYuVariant,
    field: &FieldSpec,
    s: &SSet,
    h_beta: f64,
    c: &CParams,
) -> Result<GyoryYuValue> {
    if !(h_beta >= 0.0) {
        return Err(Error::invalid("h(beta) must be nonnegative"));
    }
    let prm = s.params();
    let d = field.degree as f64;
    let ls_p = prm.ln_p().max(1.0);
    let ls_q = prm.ln_q().max(1.0);
    let p = prm.p_max.to_f64().unwrap_or(f64::INFINITY);
    let (prod, sub) = log_norm_product(&finite_norms(s), 1.0);
    let value = match variant {
        GyoryYuVariant::One => {
            c.gy_c1 * a1(d, prm.s as f64)? * (ls_q + h_beta) * p * (1.0 + prm.t_sum / ls_p) * prod
        }
        GyoryYuVariant::Two => {
            if prm.t == 0 {
                return Err(Error::precondition("variant 2 needs t > 0"));
            }
            c.gy_c2
                * a2(d * field.class_number as f64, prm.t as f64)?
                * (ls_q + h_beta)
                * (p / ls_p)
                * prod
        }
    };
    Ok(GyoryYuValue {
        value,
        log_star_substituted: sub,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct NorthcottBound {
    pub variant1: f64,
    pub variant2: Option<f64>,
}

/// c₂·η⁻¹ for both variants (the second only when t > 0).
pub fn northcott_bound(field: &FieldSpec, f: &PolySpec, s: &SSet) -> Result<NorthcottBound> {
    match f.zero_periodic {
        Periodicity::False => {}
        Periodicity::True => return Err(Error::precondition("0 is periodic for f")),
        Periodicity::Unknown(cap) => {
            return Err(Error::precondition(format!(
                "periodicity of 0 undecided within {cap} steps"
            )))
        }
    }
    let variant1 = f.c_params.c2 * eta1(field, f, s)?.eta_inv;
    let variant2 = if s.params().t > 0 {
        Some(f.c_params.c2 * eta2(field, f, s)?.eta_inv)
    } else {
        None
    };
    Ok(NorthcottBound { variant1, variant2 })
}

/// c₄ · L log*L / log*log*L.
pub fn lambda_bound_shape(l: f64, c: &CParams) -> Result<f64> {
    if !(l >= 0.0) {
        return Err(Error::invalid("L must be nonnegative"));
    }
    let ls = log_star(l);
    Ok(c.c4 * l * ls / log_star(ls))
}

/// k = ⌊c₆ log λ⌋.
pub fn zsigmondy_window(lambda: &BigUint, c: &CParams) -> Result<u64> {
    if lambda == &BigUint::from(0u32) {
        return Err(Error::invalid("lambda must be at least 1"));
    }
    let k = (c.c6 * ln_biguint(lambda)).floor();
    Ok(if k > 0.0 { k as u64 } else { 0 })
}

/// The parameter transfer from K to L when L is a quadratic extension of ℚ.
#[derive(Debug, Clone, Serialize)]
pub struct TransferReport {
    pub d_l: u32,
    pub t_l: usize,
    pub s_l: usize,
    #[serde(serialize_with = "crate::ser::big_as_str")]
    pub p_l: BigUint,
    pub t_sum_l: f64,
    pub log_norm_product_l: f64,
    pub d_l_ok: bool,
    pub t_l_ok: bool,
    pub s_l_ok: bool,
    pub p_l_ok: bool,
    pub t_sum_ok: bool,
    /// Π_T log Nm 𝐪 ≤ C₅ Π_S (log Nm 𝐩)^D, informational.
    pub product_ok: bool,
}

/// Compares S over K = ℚ with T (places of L above S).
pub fn transfer_check(k: &FieldSpec, l: &FieldSpec, s: &SSet, c: &CParams) -> Result<TransferReport> {
    if !k.is_rational() {
        return Err(Error::precondition("transfer check implemented for K = Q"));
    }
    let dd = l.degree / k.degree;
    let primes: Vec<u64> = s
        .rational_primes()
        .iter()
        .map(|p| p.to_u64().ok_or_else(|| Error::invalid("prime too large")))
        .collect::<Result<_>>()?;
    let t = SSet::above_primes(l, &primes)?;
    let (ps, pt) = (s.params(), t.params());
    let prod_l: f64 = t.finite().iter().map(|i| i.ln_norm()).product();
    let prod_k: f64 = s.finite().iter().map(|i| i.ln_norm().powi(dd as i32)).product();
    let ddf = dd as f64;
    Ok(TransferReport {
        d_l: l.degree,
        t_l: pt.t,
        s_l: pt.s,
        p_l: pt.p_max.clone(),
        t_sum_l: pt.t_sum,
        log_norm_product_l: prod_l,
        d_l_ok: l.degree == dd * k.degree,
        t_l_ok: pt.t <= dd as usize * ps.t,
        s_l_ok: pt.s <= dd as usize * ps.s,
        p_l_ok: pt.p_max <= num_traits::Pow::pow(&ps.p_max, dd),
        t_sum_ok: pt.t_sum <= ddf * ps.t_sum + c.transfer_c4,
        product_ok: prod_l <= c.transfer_c5 * prod_k,
    })
}

/// All bound values for (K, f, S), as written to the `constants` report.
#[derive(Debug, Clone, Serialize)]
pub struct EffectiveBoundReport {
    pub field: String,
    pub f: String,
    pub s: SSet,
    pub s_params: SSetParams,
    pub c_params: CParams,
    pub a3: Option<f64>,
    pub delta: f64,
    pub eta1: Option<EtaValue>,
    pub eta2: Option<EtaValue>,
    pub northcott: Option<NorthcottBound>,
    pub notes: Vec<String>,
}

pub fn effective_bound_report(field: &FieldSpec, f: &PolySpec, s: &SSet) -> EffectiveBoundReport {
    let mut notes = Vec::new();
    let mut keep = |r: Result<EtaValue>, name: &str| match r {
        Ok(v) => Some(v),
        Err(e) => {
            notes.push(format!("{name}: {e}"));
            None
        }
    };
    let e1 = keep(eta1(field, f, s), "eta1");
    let e2 = keep(eta2(field, f, s), "eta2");
    let northcott = match northcott_bound(field, f, s) {
        Ok(v) => Some(v),
        Err(e) => {
            notes.push(format!("northcott: {e}"));
            None
        }
    };
    if e1.as_ref().is_some_and(|e| e.log_star_substituted) {
        notes.push("log* used in place of log for norm-2 ideals in the S-product".into());
    }
    EffectiveBoundReport {
        field: field.tag.to_string(),
        f: f.poly.to_string(),
        s: s.clone(),
        s_params: s.params(),
        c_params: f.c_params,
        a3: a3(field).ok(),
        delta: field.delta,
        eta1: e1,
        eta2: e2,
        northcott,
        notes,
    }
}
