//! Persistent factorization cache.
//!
//! One record per line, `n = p1^e1 * p2 * ...`, after a version header. Records
//! are re-multiplied and their primes re-tested on load; new factorizations are
//! appended when the run finishes.

use std::collections::HashSet;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_bigint::BigUint;

use orbitforge_core::arith::is_prime;
use orbitforge_core::{Factorization, Factorizer};

use crate::error::{CliError, CliResult};

pub const CACHE_HEADER: &str = "# orbitforge factor cache v1";
pub const CACHE_ENV: &str = "ORBITFORGE_CACHE";

pub fn format_record(n: &BigUint, f: &Factorization) -> String {
    let parts: Vec<String> = f
        .factors
        .iter()
        .map(|(p, e)| if *e == 1 { p.to_string() } else { format!("{p}^{e}") })
        .collect();
    format!("{n} = {}", parts.join(" * "))
}

/// Parses and checks one record.
pub fn parse_record(line: &str) -> Result<(BigUint, Factorization), String> {
    let (lhs, rhs) = line.split_once('=').ok_or("missing '='")?;
    let n: BigUint = lhs.trim().parse().map_err(|_| format!("bad integer '{}'", lhs.trim()))?;
    if n < BigUint::from(2u32) {
        return Err(format!("key {n} is below 2"));
    }
    let mut factors = Vec::new();
    for term in rhs.split('*') {
        let term = term.trim();
        let (p, e) = match term.split_once('^') {
            Some((p, e)) => (p.trim(), e.trim().parse::<u32>().map_err(|_| format!("bad exponent in '{term}'"))?),
            None => (term, 1),
        };
        let p: BigUint = p.parse().map_err(|_| format!("bad prime '{p}'"))?;
        if e == 0 || !is_prime(&p) {
            return Err(format!("'{term}' is not a prime power"));
        }
        factors.push((p, e));
    }
    factors.sort();
    if factors.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err("repeated prime".into());
    }
    let f = Factorization { factors };
    if f.product() != n {
        return Err(format!("factors multiply to {}, not {n}", f.product()));
    }
    Ok((n, f))
}

/// A [`Factorizer`] seeded from, and flushed back to, a cache file.
pub struct FactorCache {
    path: Option<PathBuf>,
    pub fz: Factorizer,
    pub loaded: usize,
}

impl FactorCache {
    /// `$ORBITFORGE_CACHE` when set and nonempty, else the configured path.
    pub fn resolve_path(configured: Option<&Path>) -> Option<PathBuf> {
        match std::env::var_os(CACHE_ENV) {
            Some(v) if !v.is_empty() => Some(PathBuf::from(v)),
            _ => configured.map(Path::to_path_buf),
        }
    }

    pub fn in_memory(rho_budget: u64) -> FactorCache {
        FactorCache { path: None, fz: Factorizer::new(rho_budget), loaded: 0 }
    }

    /// Loads `path` if it exists; a missing file starts an empty cache.
    pub fn open(path: Option<PathBuf>, rho_budget: u64) -> CliResult<FactorCache> {
        let mut cache = FactorCache { path: None, fz: Factorizer::new(rho_budget), loaded: 0 };
        let Some(path) = path else { return Ok(cache) };
        if path.exists() {
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
            let err = |line: usize, msg: String| CliError::Cache { path: path.clone(), line, msg };
            let mut lines = text.lines().enumerate();
            match lines.next() {
                Some((_, h)) if h.trim() == CACHE_HEADER => {}
                Some((_, h)) => return Err(err(1, format!("expected header '{CACHE_HEADER}', found '{h}'"))),
                None => return Err(err(1, "empty file".into())),
            }
            let mut seen = HashSet::new();
            for (i, line) in lines {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (n, f) = parse_record(line).map_err(|m| err(i + 1, m))?;
                if !seen.insert(n.clone()) {
                    return Err(err(i + 1, format!("duplicate key {n}")));
                }
                cache.fz.insert_known(n, f).map_err(|e| err(i + 1, e.to_string()))?;
                cache.loaded += 1;
            }
        }
        cache.path = Some(path);
        Ok(cache)
    }

    /// Returns the factorization and whether it was already cached.
    pub fn lookup_or_factor(&mut self, n: &BigUint) -> orbitforge_core::Result<(Factorization, bool)> {
        let hit = self.fz.is_cached(n);
        Ok((self.fz.factor(n)?, hit))
    }

    /// Appends factorizations computed since the last flush; returns how many.
    pub fn flush(&mut self) -> CliResult<usize> {
        let Some(path) = &self.path else { return Ok(0) };
        let two = BigUint::from(2u32);
        let mut fresh: Vec<_> = self.fz.fresh_entries().filter(|(n, _)| **n >= two).collect();
        if fresh.is_empty() {
            return Ok(0);
        }
        fresh.sort_by(|a, b| a.0.cmp(b.0));
        let mut body = String::new();
        if !path.exists() {
            body.push_str(CACHE_HEADER);
            body.push('\n');
        }
        for (n, f) in &fresh {
            body.push_str(&format_record(n, f));
            body.push('\n');
        }
        let count = fresh.len();
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| CliError::io(path, e))?;
        file.write_all(body.as_bytes()).map_err(|e| CliError::io(path, e))?;
        self.fz.clear_fresh();
        Ok(count)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_format() {
        let (n, f) = parse_record("720 = 2^4 * 3^2 * 5").unwrap();
        assert_eq!(n, BigUint::from(720u32));
        assert_eq!(format_record(&n, &f), "720 = 2^4 * 3^2 * 5");
        assert!(parse_record("2 = 2").is_ok());
        assert!(parse_record("721 = 2^4 * 3^2 * 5").unwrap_err().contains("multiply"));
        assert!(parse_record("16 = 4^2").unwrap_err().contains("prime"));
        assert!(parse_record("1 = ").is_err());
    }
}
