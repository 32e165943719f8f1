use clap::ValueEnum;
use serde_json::{json, Value};

use orbitforge_core::constants::effective_bound_report;
use orbitforge_core::heights::{
    canonical_height, height, height_complement, height_s, height_value, support_lambda,
};
use orbitforge_core::orbits::{
    check_power_dependence, check_s_integer_ratio, divisibility_transfer_holds, find_primitive_divisor,
    iterate_orbit, spart_witness,
};
use orbitforge_core::search::{
    lambda_growth_report, search_dependence, search_sunit_orbit_values, verify_spart_empirical,
};
use orbitforge_core::{CampaignReport, Error, FieldSpec, NFElement, SearchConfig, WitnessKind};

use crate::cache::FactorCache;
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{to_value, Output};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Heights,
    Constants,
    Orbit,
    Witness,
    SearchDependence,
    SunitScan,
    PrimitiveDivisors,
    LambdaReport,
    VerifySpart,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Heights => "heights",
            Command::Constants => "constants",
            Command::Orbit => "orbit",
            Command::Witness => "witness",
            Command::SearchDependence => "search-dependence",
            Command::SunitScan => "sunit-scan",
            Command::PrimitiveDivisors => "primitive-divisors",
            Command::LambdaReport => "lambda-report",
            Command::VerifySpart => "verify-spart",
        }
    }
}

/// The record for an exhausted factorization budget, or `None` for other errors.
pub fn factor_error_record(e: &Error) -> Option<Value> {
    match e {
        Error::IncompleteFactorization { n, found, cofactor } => Some(json!({
            "n": n.to_string(),
            "found": found.iter().map(|(p, e)| json!([p.to_string(), e])).collect::<Vec<_>>(),
            "cofactor": cofactor.to_string(),
            "cofactor_composite": true,
            "message": e.to_string(),
        })),
        _ => None,
    }
}

fn pick(v: &Value, columns: &[String]) -> Vec<Value> {
    columns.iter().map(|c| v.get(c).cloned().unwrap_or(Value::Null)).collect()
}

pub fn run_command(cmd: Command, cfg: &RunConfig, cache: &mut FactorCache) -> CliResult<Output> {
    let field = cfg.field_spec()?;
    match cmd {
        Command::Heights => heights(cfg, &field, cache),
        Command::Constants => constants(cfg, &field, cache),
        Command::Orbit => orbit(cfg, &field),
        Command::Witness => witness(cfg, &field, cache),
        Command::SearchDependence => {
            let sc = search_config(cfg, &field, cache)?;
            let mut out = Output::new("witness", &["alpha", "kind", "m", "n", "v", "r", "s", "u", "verified"]);
            let report = search_dependence(&sc)?;
            for w in &report.witnesses {
                out.row(pick(&to_value(w), &out.columns));
            }
            campaign_tail(&mut out, &report);
            Ok(out)
        }
        Command::SunitScan => {
            let sc = search_config(cfg, &field, cache)?;
            let n_max = cfg.command.n_max.unwrap_or(cfg.caps.m_max);
            let mut out = Output::new("sunit", &["alpha", "n", "value"]);
            let report = search_sunit_orbit_values(&sc, n_max)?;
            for v in &report.sunit_values {
                out.row(pick(&to_value(v), &out.columns));
            }
            campaign_tail(&mut out, &report);
            Ok(out)
        }
        Command::PrimitiveDivisors => primitive_divisors(cfg, &field, cache),
        Command::LambdaReport => lambda_report(cfg, &field, cache),
        Command::VerifySpart => {
            let sc = search_config(cfg, &field, cache)?;
            sc.f.require_three_roots()
                .map_err(|e| CliError::validation("polynomial.f", e.to_string()))?;
            let mut out = Output::new("eta", &["samples", "roots_drawn", "max_rho", "argmax", "eta_emp", "eta1", "eta2", "larger"]);
            let report = verify_spart_empirical(&sc, cfg.command.samples, cfg.command.seed)?;
            if let Some(e) = &report.empirical_eta {
                out.row(pick(&to_value(e), &out.columns));
            }
            campaign_tail(&mut out, &report);
            Ok(out)
        }
    }
}

fn search_config(cfg: &RunConfig, field: &FieldSpec, cache: &mut FactorCache) -> CliResult<SearchConfig> {
    let f = cfg.poly_spec(field, &mut cache.fz)?;
    let mut sc = SearchConfig::new(field.clone(), f, cfg.s_set(field)?, cfg.height_cap()?);
    sc.m_max = cfg.caps.m_max;
    sc.bit_cap = cfg.caps.bits;
    sc.element_cap = cfg.caps.element_cap;
    sc.rho_budget = cfg.caps.rho_budget;
    sc.shard_count = cfg.caps.shards;
    Ok(sc)
}

fn campaign_tail(out: &mut Output, report: &CampaignReport) {
    for s in &report.skips {
        out.skip(to_value(s));
    }
    out.partial |= report.partial;
    out.record(
        "campaign",
        json!({
            "provenance": to_value(&report.provenance),
            "domain_size": report.domain_size,
            "domain_truncated": report.domain_truncated,
            "northcott": to_value(&report.northcott),
            "notes": report.notes,
            "partial": report.partial,
        }),
    );
}

fn inputs_x(cfg: &RunConfig, field: &FieldSpec) -> CliResult<Vec<NFElement>> {
    if cfg.command.x.is_empty() {
        return Ok(vec![cfg.alpha(field)?]);
    }
    cfg.command.x.iter().map(|t| cfg.element(field, "command.x", t)).collect()
}

fn heights(cfg: &RunConfig, field: &FieldSpec, cache: &mut FactorCache) -> CliResult<Output> {
    let poly = cfg.poly(field)?;
    let s = cfg.s_set(field)?;
    let mut out = Output::new(
        "height",
        &["x", "h", "h_s_inv", "h_out_inv", "hhat", "hhat_error", "hhat_iterations", "hhat_capped", "lambda"],
    );
    for x in inputs_x(cfg, field)? {
        let h = height_value(field, &x);
        let (h_s_inv, h_out_inv) = if x.is_zero() {
            (Value::Null, Value::Null)
        } else {
            let inv = x.inv()?;
            (json!(height_s(field, &inv, &s)?), json!(height_complement(field, &inv, &s, &mut cache.fz)?))
        };
        let hhat = if poly.degree() >= 2 {
            Some(canonical_height(field, &poly, &x, cfg.command.tol, cfg.caps.bits)?)
        } else {
            None
        };
        let lambda = if x.is_integral() && !x.is_zero() {
            match support_lambda(field, &x, &mut cache.fz) {
                Ok(st) => json!(st.lambda.to_string()),
                Err(e) => match factor_error_record(&e) {
                    Some(rec) => {
                        out.record("error", rec);
                        out.skip(json!({"x": x, "reason": e.to_string()}));
                        Value::Null
                    }
                    None => return Err(e.into()),
                },
            }
        } else {
            Value::Null
        };
        out.record("places", json!({"x": x, "breakdown": to_value(&height(field, &x, &mut cache.fz)?)}));
        out.row(vec![
            json!(x),
            json!(h),
            h_s_inv,
            h_out_inv,
            json!(hhat.as_ref().map(|r| r.value)),
            json!(hhat.as_ref().map(|r| r.error_bound)),
            json!(hhat.as_ref().map(|r| r.iterations_used)),
            json!(hhat.as_ref().map(|r| r.capped)),
            lambda,
        ]);
    }
    Ok(out)
}

fn constants(cfg: &RunConfig, field: &FieldSpec, cache: &mut FactorCache) -> CliResult<Output> {
    let f = cfg.poly_spec(field, &mut cache.fz)?;
    let s = cfg.s_set(field)?;
    let report = effective_bound_report(field, &f, &s);
    let mut out = Output::new("constant", &["name", "value"]);
    let prm = &report.s_params;
    let entries: [(&str, Value); 11] = [
        ("a3", json!(report.a3)),
        ("delta", json!(report.delta)),
        ("eta1_inv", json!(report.eta1.as_ref().map(|e| e.eta_inv))),
        ("eta2_inv", json!(report.eta2.as_ref().map(|e| e.eta_inv))),
        ("northcott_variant1", json!(report.northcott.as_ref().map(|n| n.variant1))),
        ("northcott_variant2", json!(report.northcott.as_ref().and_then(|n| n.variant2))),
        ("s", json!(prm.s)),
        ("t", json!(prm.t)),
        ("t_sum", json!(prm.t_sum)),
        ("ln_p", json!(prm.ln_p())),
        ("ln_q", json!(prm.ln_q())),
    ];
    for (name, v) in entries {
        out.row(vec![json!(name), v]);
    }
    out.record("bounds", to_value(&report));
    Ok(out)
}

fn single_m(cfg: &RunConfig) -> CliResult<usize> {
    let m = cfg.command.m.ok_or_else(|| CliError::validation("command.m", "required by this command"))?;
    m.single()
        .ok_or_else(|| CliError::validation("command.m", "this command takes a single index"))
}

fn orbit(cfg: &RunConfig, field: &FieldSpec) -> CliResult<Output> {
    let poly = cfg.poly(field)?;
    let alpha = cfg.alpha(field)?;
    let rec = iterate_orbit(field, &poly, &alpha, single_m(cfg)?, cfg.caps.bits)?;
    let mut out = Output::new("iterate", &["k", "value", "height", "bits"]);
    for (k, x) in rec.iterates.iter().enumerate() {
        out.row(vec![json!(k), json!(x), json!(height_value(field, x)), json!(x.bit_size())]);
    }
    if rec.truncated {
        out.skip(json!({"alpha": alpha, "m": rec.iterates.len(), "reason": format!("iterate exceeds {} bits", cfg.caps.bits)}));
    }
    Ok(out)
}

fn witness(cfg: &RunConfig, field: &FieldSpec, cache: &mut FactorCache) -> CliResult<Output> {
    let f = cfg.poly_spec(field, &mut cache.fz)?;
    let s = cfg.s_set(field)?;
    let alpha = cfg.alpha(field)?;
    let (m, n) = (single_m(cfg)?, cfg.command.n);
    let mut out = Output::new("witness", &["kind", "m", "n", "found", "v", "r", "s", "u", "verified", "transfer"]);
    let ratio = check_s_integer_ratio(field, &f.poly, &alpha, m, n, &s)?;
    let transfer = match &ratio {
        Some(_) => json!(divisibility_transfer_holds(field, &f.poly, &alpha, m, n, &s)?),
        None => Value::Null,
    };
    let row = |kind: WitnessKind, w: Option<Value>, transfer: Value| {
        let mut v = w.clone().unwrap_or_else(|| json!({}));
        v["kind"] = to_value(&kind);
        v["m"] = json!(m);
        v["n"] = json!(n);
        v["found"] = json!(w.is_some());
        v["transfer"] = transfer;
        if w.is_none() {
            v["verified"] = Value::Null;
        }
        let cols = ["kind", "m", "n", "found", "v", "r", "s", "u", "verified", "transfer"].map(String::from);
        pick(&v, &cols)
    };
    let r1 = row(WitnessKind::SIntegerRatio, ratio.as_ref().map(to_value), transfer);
    out.row(r1);
    if n >= 1 {
        let power = check_power_dependence(field, &f.poly, &alpha, m, n, &s)?;
        let r2 = row(WitnessKind::PowerRelation, power.as_ref().map(to_value), Value::Null);
        out.row(r2);
    }
    if f.splits_over_base() && alpha.is_integral() && !f.poly.eval(&alpha).is_zero() {
        let w = spart_witness(field, &f, &alpha, &s)?;
        out.record("spart", json!({"holds": w.holds(), "witness": to_value(&w)}));
    } else {
        out.record("note", json!({"text": "S-part witness needs f split over K, alpha integral and f(alpha) != 0"}));
    }
    Ok(out)
}

fn primitive_divisors(cfg: &RunConfig, field: &FieldSpec, cache: &mut FactorCache) -> CliResult<Output> {
    let poly = cfg.poly(field)?;
    let alpha = cfg.alpha(field)?;
    let range = cfg.command.m.ok_or_else(|| CliError::validation("command.m", "required by this command"))?;
    let mut out = Output::new("primitive", &["m", "k", "prime", "norm"]);
    for m in range.lo.max(1)..=range.hi {
        let k = cfg.command.k.unwrap_or(m);
        match find_primitive_divisor(field, &poly, &alpha, m, k, &mut cache.fz) {
            Ok(r) => out.row(vec![
                json!(m),
                json!(r.window),
                json!(r.primitive_prime.as_ref().map(|p| p.to_string())),
                json!(r.primitive_prime.as_ref().map(|p| p.norm().to_string())),
            ]),
            Err(e) => match factor_error_record(&e) {
                Some(rec) => {
                    out.record("error", rec);
                    out.skip(json!({"alpha": alpha, "m": m, "reason": e.to_string()}));
                }
                None => return Err(e.into()),
            },
        }
    }
    Ok(out)
}

fn lambda_report(cfg: &RunConfig, field: &FieldSpec, cache: &mut FactorCache) -> CliResult<Output> {
    let f = cfg.poly_spec(field, &mut cache.fz)?;
    let alpha = cfg.alpha(field)?;
    let m_max = cfg.command.m.map_or(cfg.caps.m_max, |r| r.hi);
    let (rows, skips) = lambda_growth_report(field, &f, &alpha, cfg.command.n, m_max, &mut cache.fz)?;
    let mut out = Output::new("lambda", &["m", "n", "lambda", "l", "shape", "ratio"]);
    for r in &rows {
        out.row(pick(&to_value(r), &out.columns));
    }
    for s in skips {
        out.skip(to_value(&s));
    }
    Ok(out)
}
