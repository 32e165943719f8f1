//! Bounded search and empirical verification campaigns.

use std::cmp::Ordering;
use std::thread;

use num_bigint::BigUint;
use num_traits::One;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::arith::{Factorizer, DEFAULT_RHO_BUDGET};
use crate::constants::{eta1, eta2, lambda_bound_shape, northcott_bound, CParams, NorthcottBound};
use crate::error::{Error, Result};
use crate::field::{factor_element_ideal, FieldSpec, NFElement, SSet};
use crate::heights::{height_s, height_value, is_s_unit, DEFAULT_BIT_CAP};
use crate::orbits::{power_witness, ratio_witness, DependenceWitness, Periodicity};
use crate::poly::PolySpec;

pub const DEFAULT_M_MAX: usize = 8;
pub const DEFAULT_ELEMENT_CAP: usize = 10_000_000;

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub field: FieldSpec,
    pub f: PolySpec,
    pub s: SSet,
    pub height_cap: f64,
    pub m_max: usize,
    pub bit_cap: u64,
    pub element_cap: usize,
    pub rho_budget: u64,
    pub shard_count: usize,
}

impl SearchConfig {
    pub fn new(field: FieldSpec, f: PolySpec, s: SSet, height_cap: f64) -> SearchConfig {
        SearchConfig {
            field,
            f,
            s,
            height_cap,
            m_max: DEFAULT_M_MAX,
            bit_cap: DEFAULT_BIT_CAP,
            element_cap: DEFAULT_ELEMENT_CAP,
            rho_budget: DEFAULT_RHO_BUDGET,
            shard_count: 1,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.height_cap >= 0.0) || !self.height_cap.is_finite() {
            return Err(Error::invalid("height cap must be a finite nonnegative number"));
        }
        if self.m_max < 1 {
            return Err(Error::invalid("m_max must be at least 1"));
        }
        if self.f.poly.tag() != self.field.tag || self.s.tag() != self.field.tag {
            return Err(Error::FieldMismatch);
        }
        Ok(())
    }

    fn require_zero_not_periodic(&self) -> Result<()> {
        match self.f.zero_periodic {
            Periodicity::False => Ok(()),
            Periodicity::True => Err(Error::precondition("0 is periodic for f")),
            Periodicity::Unknown(c) => Err(Error::precondition(format!(
                "periodicity of 0 undecided within {c} steps"
            ))),
        }
    }
}

/// Config echo embedded in every report.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub version: &'static str,
    pub field: String,
    pub f: String,
    pub s: SSet,
    pub height_cap: f64,
    pub m_max: usize,
    pub bit_cap: u64,
    pub c_params: CParams,
}

impl Provenance {
    fn of(cfg: &SearchConfig) -> Provenance {
        Provenance {
            version: env!("CARGO_PKG_VERSION"),
            field: cfg.field.tag.to_string(),
            f: cfg.f.poly.to_string(),
            s: cfg.s.clone(),
            height_cap: cfg.height_cap,
            m_max: cfg.m_max,
            bit_cap: cfg.bit_cap,
            c_params: cfg.f.c_params,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkipRow {
    pub alpha: NFElement,
    pub m: Option<usize>,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct LambdaRow {
    pub m: usize,
    pub n: usize,
    #[serde(serialize_with = "crate::ser::big_as_str")]
    pub lambda: BigUint,
    pub l: f64,
    pub shape: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EmpiricalEta {
    pub samples: usize,
    /// Draws that landed on a root of f; f(α) = 0 has no S-part and is not counted.
    pub roots_drawn: usize,
    pub max_rho: Option<f64>,
    pub argmax: Option<NFElement>,
    pub eta_emp: Option<f64>,
    pub eta1: Option<f64>,
    pub eta2: Option<f64>,
    /// "empirical", "formula" or "undefined".
    pub larger: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct SUnitValue {
    pub alpha: NFElement,
    pub n: usize,
    pub value: NFElement,
}

#[derive(Debug, Clone, Serialize)]
pub struct CampaignReport {
    pub provenance: Provenance,
    pub domain_size: usize,
    pub domain_truncated: bool,
    pub witnesses: Vec<DependenceWitness>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub sunit_values: Vec<SUnitValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub empirical_eta: Option<EmpiricalEta>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub lambda_rows: Vec<LambdaRow>,
    pub northcott: Option<NorthcottBound>,
    pub notes: Vec<String>,
    pub skips: Vec<SkipRow>,
    pub partial: bool,
}

impl CampaignReport {
    fn new(cfg: &SearchConfig) -> CampaignReport {
        CampaignReport {
            provenance: Provenance::of(cfg),
            domain_size: 0,
            domain_truncated: false,
            witnesses: Vec::new(),
            sunit_values: Vec::new(),
            empirical_eta: None,
            lambda_rows: Vec::new(),
            northcott: None,
            notes: Vec::new(),
            skips: Vec::new(),
            partial: false,
        }
    }

    fn finish(mut self) -> CampaignReport {
        self.partial = !self.skips.is_empty() || self.domain_truncated;
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

fn coord_cmp(x: &NFElement, y: &NFElement) -> Ordering {
    x.a().cmp(y.a()).then_with(|| x.b().cmp(y.b()))
}

/// All α ∈ O with h(α) ≤ H, ordered by (h, a, b). The flag reports truncation at `cap`.
pub fn enumerate_ring_elements(field: &FieldSpec, h: f64, cap: usize) -> Result<(Vec<NFElement>, bool)> {
    if !(h >= 0.0) || !h.is_finite() {
        return Err(Error::invalid("H must be a finite nonnegative number"));
    }
    let slack = 1e-12;
    let d = field.degree as f64;
    // every archimedean |σ(α)| is at most e^{dH}
    let r = (d * h).exp() * (1.0 + slack);
    let mut out = Vec::new();
    let mut truncated = false;
    let push = |x: NFElement, out: &mut Vec<NFElement>| -> bool {
        if height_value(field, &x) <= h + slack {
            if out.len() >= cap {
                return false;
            }
            out.push(x);
        }
        true
    };
    if field.is_rational() {
        let n = r.floor() as i64;
        for a in -n..=n {
            if !push(field.int(a), &mut out) {
                truncated = true;
                break;
            }
        }
    } else {
        let (t, _) = field.tag.omega_relation();
        let dd = field.radicand().unwrap();
        // |ω − ω̄| = √|D| (t = 1) or 2√|D| (t = 0)
        let gap = (dd.unsigned_abs() as f64).sqrt() * if t == 0 { 2.0 } else { 1.0 };
        let bmax = (2.0 * r / gap).floor() as i64;
        'outer: for b in -bmax..=bmax {
            // |2a + tb| ≤ 2R
            let lo = ((-2.0 * r - (t * b) as f64) / 2.0).ceil() as i64;
            let hi = ((2.0 * r - (t * b) as f64) / 2.0).floor() as i64;
            for a in lo..=hi {
                if !push(field.element(a, b), &mut out) {
                    truncated = true;
                    break 'outer;
                }
            }
        }
    }
    let mut keyed: Vec<(f64, NFElement)> = out.into_iter().map(|x| (height_value(field, &x), x)).collect();
    keyed.sort_by(|(h1, x), (h2, y)| h1.total_cmp(h2).then_with(|| coord_cmp(x, y)));
    Ok((keyed.into_iter().map(|(_, x)| x).collect(), truncated))
}

fn kind_rank(w: &DependenceWitness) -> crate::orbits::WitnessKind {
    w.kind
}

/// Orbit of α up to m_max; a shorter vector means the bit cap stopped it.
fn capped_orbit(cfg: &SearchConfig, alpha: &NFElement, m_max: usize) -> Vec<NFElement> {
    let mut xs = vec![alpha.clone()];
    while xs.len() <= m_max {
        let next = cfg.f.poly.eval(xs.last().unwrap());
        if next.bit_size() > cfg.bit_cap {
            break;
        }
        xs.push(next);
    }
    xs
}

struct ShardOutput {
    witnesses: Vec<(usize, DependenceWitness)>,
    skips: Vec<(usize, SkipRow)>,
}

fn scan_alpha(cfg: &SearchConfig, idx: usize, alpha: &NFElement, out: &mut ShardOutput) -> Result<()> {
    let xs = capped_orbit(cfg, alpha, cfg.m_max);
    if xs.len() <= cfg.m_max {
        out.skips.push((
            idx,
            SkipRow {
                alpha: alpha.clone(),
                m: Some(xs.len()),
                reason: format!("iterate exceeds {} bits", cfg.bit_cap),
            },
        ));
    }
    for m in 1..xs.len() {
        if xs[m].is_zero() {
            continue;
        }
        for n in 0..m {
            if let Some(w) = ratio_witness(&cfg.field, alpha, (m, &xs[m]), (n, &xs[n]), &cfg.s)? {
                out.witnesses.push((idx, w));
            }
            if n >= 1 && !xs[n].is_zero() {
                if let Some(w) = power_witness(&cfg.field, alpha, (m, &xs[m]), (n, &xs[n]), &cfg.s)? {
                    out.witnesses.push((idx, w));
                }
            }
        }
    }
    Ok(())
}

/// Runs `work` over α-shards in parallel and merges by α index.
fn sharded<T: Send>(
    cfg: &SearchConfig,
    domain: &[NFElement],
    work: impl Fn(usize, &NFElement, &mut Factorizer, &mut Vec<(usize, T)>, &mut Vec<(usize, SkipRow)>) -> Result<()>
        + Sync,
) -> Result<(Vec<(usize, T)>, Vec<(usize, SkipRow)>)> {
    let shards = cfg.shard_count.max(1);
    let results: Vec<Result<(Vec<(usize, T)>, Vec<(usize, SkipRow)>)>> = thread::scope(|scope| {
        let handles: Vec<_> = (0..shards)
            .map(|k| {
                let work = &work;
                scope.spawn(move || {
                    let mut fz = Factorizer::new(cfg.rho_budget);
                    let mut items = Vec::new();
                    let mut skips = Vec::new();
                    for (idx, alpha) in domain.iter().enumerate().skip(k).step_by(shards) {
                        work(idx, alpha, &mut fz, &mut items, &mut skips)?;
                    }
                    Ok((items, skips))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("shard panicked")).collect()
    });
    let mut items = Vec::new();
    let mut skips = Vec::new();
    for r in results {
        let (i, s) = r?;
        items.extend(i);
        skips.extend(s);
    }
    skips.sort_by_key(|(i, s)| (*i, s.m));
    Ok((items, skips))
}

fn domain_for(cfg: &SearchConfig, report: &mut CampaignReport) -> Result<Vec<NFElement>> {
    let (domain, truncated) = enumerate_ring_elements(&cfg.field, cfg.height_cap, cfg.element_cap)?;
    report.domain_size = domain.len();
    report.domain_truncated = truncated;
    if truncated {
        report
            .notes
            .push(format!("domain truncated at {} elements", cfg.element_cap));
    }
    Ok(domain)
}

/// Every ratio and power witness for α with h(α) ≤ H and m_max ≥ m > n ≥ 0.
pub fn search_dependence(cfg: &SearchConfig) -> Result<CampaignReport> {
    cfg.validate()?;
    cfg.require_zero_not_periodic()?;
    let mut report = CampaignReport::new(cfg);
    match northcott_bound(&cfg.field, &cfg.f, &cfg.s) {
        Ok(b) => report.northcott = Some(b),
        Err(e) => report.notes.push(format!("northcott: {e}")),
    }
    let domain = domain_for(cfg, &mut report)?;
    let (mut found, skips) = sharded(cfg, &domain, |idx, alpha, _fz, items, skips| {
        let mut out = ShardOutput {
            witnesses: Vec::new(),
            skips: Vec::new(),
        };
        scan_alpha(cfg, idx, alpha, &mut out)?;
        items.extend(out.witnesses);
        skips.extend(out.skips);
        Ok(())
    })?;
    found.sort_by(|(i, a), (j, b)| i.cmp(j).then(a.m.cmp(&b.m)).then(a.n.cmp(&b.n)).then(kind_rank(a).cmp(&kind_rank(b))));
    let unverified = found.iter().filter(|(_, w)| !w.verified).count();
    if unverified > 0 {
        report.notes.push(format!("{unverified} witnesses failed re-substitution"));
    }
    report.witnesses = found.into_iter().map(|(_, w)| w).collect();
    report.skips = skips.into_iter().map(|(_, s)| s).collect();
    Ok(report.finish())
}

/// All (α, n) with 1 ≤ n ≤ n_max and f⁽ⁿ⁾(α) ∈ O_S^*.
pub fn search_sunit_orbit_values(cfg: &SearchConfig, n_max: usize) -> Result<CampaignReport> {
    cfg.validate()?;
    cfg.require_zero_not_periodic()?;
    let mut report = CampaignReport::new(cfg);
    let domain = domain_for(cfg, &mut report)?;
    let (mut found, skips) = sharded(cfg, &domain, |idx, alpha, _fz, items, skips| {
        let xs = capped_orbit(cfg, alpha, n_max);
        if xs.len() <= n_max {
            skips.push((
                idx,
                SkipRow {
                    alpha: alpha.clone(),
                    m: Some(xs.len()),
                    reason: format!("iterate exceeds {} bits", cfg.bit_cap),
                },
            ));
        }
        for (n, x) in xs.iter().enumerate().skip(1) {
            if !x.is_zero() && is_s_unit(&cfg.field, x, &cfg.s)? {
                items.push((
                    idx,
                    SUnitValue {
                        alpha: alpha.clone(),
                        n,
                        value: x.clone(),
                    },
                ));
            }
        }
        Ok(())
    })?;
    found.sort_by(|(i, a), (j, b)| i.cmp(j).then(a.n.cmp(&b.n)));
    report.sunit_values = found.into_iter().map(|(_, v)| v).collect();
    report.skips = skips.into_iter().map(|(_, s)| s).collect();
    Ok(report.finish())
}

/// Samples α from the height-H domain and reports max h_S(f(α)⁻¹)/(h(f(α)) + 1).
pub fn verify_spart_empirical(cfg: &SearchConfig, sample_count: usize, seed: u64) -> Result<CampaignReport> {
    cfg.validate()?;
    cfg.f.require_three_roots()?;
    let mut report = CampaignReport::new(cfg);
    let domain = domain_for(cfg, &mut report)?;
    let formula = |r: Result<crate::constants::EtaValue>, name: &str, notes: &mut Vec<String>| match r {
        Ok(v) => Some(v.eta),
        Err(e) => {
            notes.push(format!("{name}: {e}"));
            None
        }
    };
    let e1 = formula(eta1(&cfg.field, &cfg.f, &cfg.s), "eta1", &mut report.notes);
    let e2 = if cfg.s.params().t > 0 {
        formula(eta2(&cfg.field, &cfg.f, &cfg.s), "eta2", &mut report.notes)
    } else {
        None
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, NFElement)> = None;
    let mut taken = 0;
    let mut roots_drawn = 0;
    if !domain.is_empty() {
        for _ in 0..sample_count {
            let alpha = domain.choose(&mut rng).unwrap();
            let b = cfg.f.poly.eval(alpha);
            if b.is_zero() {
                roots_drawn += 1;
                continue;
            }
            taken += 1;
            let rho = height_s(&cfg.field, &b.inv()?, &cfg.s)? / (height_value(&cfg.field, &b) + 1.0);
            if best.as_ref().is_none_or(|(r, _)| rho > *r) {
                best = Some((rho, alpha.clone()));
            }
        }
    }
    let eta_emp = best.as_ref().map(|(r, _)| 1.0 - r);
    let formula_eta = e1.into_iter().chain(e2).fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))));
    let larger = match (eta_emp, formula_eta) {
        (Some(a), Some(b)) if a >= b => "empirical",
        (Some(_), Some(_)) => "formula",
        _ => "undefined",
    };
    report.empirical_eta = Some(EmpiricalEta {
        samples: taken,
        roots_drawn,
        max_rho: best.as_ref().map(|(r, _)| *r),
        argmax: best.map(|(_, a)| a),
        eta_emp,
        eta1: e1,
        eta2: e2,
        larger,
    });
    Ok(report.finish())
}

/// Per m in (n, m_max]: λ(f⁽ᵐ⁾(α)/f⁽ⁿ⁾(α)), L and the shape value at the configured c₄.
pub fn lambda_growth_report(
    field: &FieldSpec,
    f: &PolySpec,
    alpha: &NFElement,
    n: usize,
    m_max: usize,
    fz: &mut Factorizer,
) -> Result<(Vec<LambdaRow>, Vec<SkipRow>)> {
    if m_max <= n {
        return Err(Error::precondition(format!("need m > n, got m_max={m_max}, n={n}")));
    }
    field.owns(alpha)?;
    let mut xs = vec![alpha.clone()];
    for _ in 0..m_max {
        let next = f.poly.eval(xs.last().unwrap());
        xs.push(next);
    }
    if xs[n].is_zero() {
        return Err(Error::ZeroInput("f^(n)(alpha)"));
    }
    let hn = height_value(field, &xs[n]);
    let mut rows = Vec::new();
    let mut skips = Vec::new();
    for m in n + 1..=m_max {
        if xs[m].is_zero() {
            return Err(Error::ZeroInput("f^(m)(alpha)"));
        }
        if xs[m].bit_size() > DEFAULT_BIT_CAP {
            skips.push(SkipRow {
                alpha: alpha.clone(),
                m: Some(m),
                reason: format!("iterate exceeds {DEFAULT_BIT_CAP} bits"),
            });
            continue;
        }
        let q = xs[m].try_div(&xs[n])?;
        let fac = match factor_element_ideal(field, &q, fz) {
            Ok(fac) => fac,
            Err(e @ Error::IncompleteFactorization { .. }) => {
                skips.push(SkipRow {
                    alpha: alpha.clone(),
                    m: Some(m),
                    reason: e.to_string(),
                });
                continue;
            }
            Err(e) => return Err(e),
        };
        let lambda = fac.support().map(|p| p.norm()).max().unwrap_or_else(BigUint::one);
        let l = crate::arith::bigutil::log_star(height_value(field, &xs[m]) / (hn + 1.0));
        let shape = lambda_bound_shape(l, &f.c_params)?;
        let ratio = crate::arith::bigutil::ln_biguint(&lambda).exp() / shape;
        rows.push(LambdaRow {
            m,
            n,
            lambda,
            l,
            shape,
            ratio,
        });
    }
    Ok((rows, skips))
}
