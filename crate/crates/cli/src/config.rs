//! INI run configuration.
//!
//! ```ini
//! [field]
//! kind = quadratic      ; rational | quadratic
//! d = 2
//!
//! [polynomial]
//! f = 3, -1, 0, 1       ; lowest degree first
//!
//! [s]
//! primes = 2, 3, 5      ; every ideal above each prime
//! ideals = 7.a          ; or single ideals by label
//! ```
//!
//! Keys given before the first section header may use the short names
//! `field`, `d`, `f`, `S` and `H`.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use serde::Serialize;

use orbitforge_core::arith::{Factorizer, DEFAULT_RHO_BUDGET};
use orbitforge_core::constants::CParams;
use orbitforge_core::field::ideal::ideal_from_label;
use orbitforge_core::field::DEFAULT_DISC_CAP;
use orbitforge_core::heights::DEFAULT_BIT_CAP;
use orbitforge_core::search::{DEFAULT_ELEMENT_CAP, DEFAULT_M_MAX};
use orbitforge_core::{
    make_field_capped, FieldKind, FieldSpec, NFElement, Poly, PolySpec, SSet, SplittingOverrides,
};

use crate::error::{CliError, CliResult};

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_SAMPLES: usize = 1000;
pub const DEFAULT_OUT_DIR: &str = "orbitforge-out";

/// An inclusive range of iterate indices; `m = 3` or `m = 2..10`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IndexRange {
    pub lo: usize,
    pub hi: usize,
}

impl IndexRange {
    pub fn single(&self) -> Option<usize> {
        (self.lo == self.hi).then_some(self.lo)
    }
}

impl fmt::Display for IndexRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.single() {
            Some(m) => write!(f, "{m}"),
            None => write!(f, "{}..{}", self.lo, self.hi),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldSection {
    pub kind: FieldKind,
    pub d: Option<i64>,
    pub disc_cap: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolySection {
    /// Coefficients as written, lowest degree first.
    pub f: Vec<String>,
    pub splitting: SplittingOverrides,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SSection {
    pub primes: Vec<u64>,
    pub ideals: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Caps {
    pub height: Option<f64>,
    pub m_max: usize,
    pub bits: u64,
    pub rho_budget: u64,
    pub element_cap: usize,
    pub shards: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommandOptions {
    pub alpha: Option<String>,
    pub x: Vec<String>,
    pub m: Option<IndexRange>,
    pub n: usize,
    pub k: Option<usize>,
    pub tol: f64,
    pub n_max: Option<usize>,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub cache: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub field: FieldSection,
    pub polynomial: PolySection,
    pub s: SSection,
    pub c_params: CParams,
    pub caps: Caps,
    pub command: CommandOptions,
    pub output: OutputSection,
}

const SECTIONS: [(&str, &[&str]); 7] = [
    ("field", &["kind", "d", "disc_cap"]),
    (
        "polynomial",
        &["f", "splitting_degree", "splitting_class_number", "splitting_regulator"],
    ),
    ("s", &["primes", "ideals"]),
    ("c_params", &CParams::NAMES),
    ("caps", &["height", "m_max", "bits", "rho_budget", "element_cap", "shards"]),
    ("command", &["alpha", "x", "m", "n", "k", "tol", "n_max", "samples", "seed"]),
    ("output", &["dir", "cache"]),
];

fn short_key(key: &str) -> Option<(&'static str, &'static str)> {
    Some(match key {
        "field" => ("field", "kind"),
        "d" => ("field", "d"),
        "f" => ("polynomial", "f"),
        "S" | "s" => ("s", "primes"),
        "H" => ("caps", "height"),
        _ => return None,
    })
}

/// Raw `section.key → (line, value)` pairs.
type Entries = BTreeMap<String, (usize, String)>;

fn strip_comment(line: &str) -> &str {
    let mut cut = line.len();
    for (i, ch) in line.char_indices() {
        if (ch == ';' || ch == '#') && (i == 0 || line[..i].ends_with(char::is_whitespace)) {
            cut = i;
            break;
        }
    }
    line[..cut].trim()
}

fn read_entries(text: &str, origin: &str) -> CliResult<Entries> {
    let err = |line: usize, msg: String| CliError::Parse { path: origin.to_string(), line, msg };
    let mut entries = Entries::new();
    let mut section: Option<&'static str> = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| err(line_no, format!("malformed section header '{line}'")))?
                .trim();
            section = Some(
                SECTIONS
                    .iter()
                    .find(|(s, _)| *s == name)
                    .map(|(s, _)| *s)
                    .ok_or_else(|| err(line_no, format!("unknown section [{name}]")))?,
            );
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(line_no, format!("expected 'key = value', found '{line}'")))?;
        let (key, value) = (key.trim(), value.trim());
        let full = match section {
            None => match short_key(key) {
                Some((s, k)) => format!("{s}.{k}"),
                None => return Err(err(line_no, format!("unknown key '{key}' outside any section"))),
            },
            Some(s) => {
                let keys = SECTIONS.iter().find(|(n, _)| *n == s).unwrap().1;
                if !keys.contains(&key) {
                    return Err(err(line_no, format!("unknown key '{key}' in section [{s}]")));
                }
                format!("{s}.{key}")
            }
        };
        if let Some((first, _)) = entries.get(&full) {
            return Err(err(line_no, format!("duplicate key {full} (first set on line {first})")));
        }
        entries.insert(full, (line_no, value.to_string()));
    }
    Ok(entries)
}

struct Reader<'a> {
    entries: &'a Entries,
    origin: &'a str,
}

impl Reader<'_> {
    fn raw(&self, key: &str) -> Option<&(usize, String)> {
        self.entries.get(key)
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> CliResult<Option<T>>
    where
        T::Err: fmt::Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some((line, v)) => v.parse::<T>().map(Some).map_err(|e| CliError::Parse {
                path: self.origin.to_string(),
                line: *line,
                msg: format!("{key}: cannot parse '{v}': {e}"),
            }),
        }
    }

    fn list<T: std::str::FromStr>(&self, key: &str) -> CliResult<Vec<T>>
    where
        T::Err: fmt::Display,
    {
        let Some((line, v)) = self.raw(key) else { return Ok(Vec::new()) };
        split_list(v)
            .into_iter()
            .map(|item| {
                item.parse::<T>().map_err(|e| CliError::Parse {
                    path: self.origin.to_string(),
                    line: *line,
                    msg: format!("{key}: cannot parse '{item}': {e}"),
                })
            })
            .collect()
    }

    fn range(&self, key: &str) -> CliResult<Option<IndexRange>> {
        let Some((line, v)) = self.raw(key) else { return Ok(None) };
        let bad = |msg: String| CliError::Parse { path: self.origin.to_string(), line: *line, msg };
        let num = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|e| bad(format!("{key}: cannot parse '{t}': {e}")))
        };
        let r = match v.split_once("..") {
            Some((lo, hi)) => IndexRange { lo: num(lo)?, hi: num(hi)? },
            None => {
                let m = num(v)?;
                IndexRange { lo: m, hi: m }
            }
        };
        if r.lo > r.hi {
            return Err(bad(format!("{key}: empty range {v}")));
        }
        Ok(Some(r))
    }
}

fn split_list(v: &str) -> Vec<String> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Parses and validates; `origin` names the source in error messages.
    pub fn parse(text: &str, origin: &str) -> CliResult<RunConfig> {
        let entries = read_entries(text, origin)?;
        let r = Reader { entries: &entries, origin };
        let kind = match r.raw("field.kind").map(|(l, v)| (*l, v.as_str())) {
            None | Some((_, "rational")) => FieldKind::Rational,
            Some((_, "quadratic")) => FieldKind::Quadratic,
            Some((line, other)) => {
                return Err(CliError::Parse {
                    path: origin.to_string(),
                    line,
                    msg: format!("field.kind must be 'rational' or 'quadratic', found '{other}'"),
                })
            }
        };
        let mut c_params = CParams::default();
        for name in CParams::NAMES {
            if let Some(v) = r.parsed::<f64>(&format!("c_params.{name}"))? {
                *c_params.get_mut(name).unwrap() = v;
            }
        }
        let cfg = RunConfig {
            field: FieldSection {
                kind,
                d: r.parsed("field.d")?,
                disc_cap: r.parsed("field.disc_cap")?.unwrap_or(DEFAULT_DISC_CAP),
            },
            polynomial: PolySection {
                f: r.raw("polynomial.f").map(|(_, v)| split_list(v)).unwrap_or_default(),
                splitting: SplittingOverrides {
                    degree: r.parsed("polynomial.splitting_degree")?,
                    class_number: r.parsed("polynomial.splitting_class_number")?,
                    regulator: r.parsed("polynomial.splitting_regulator")?,
                },
            },
            s: SSection { primes: r.list("s.primes")?, ideals: r.list("s.ideals")? },
            c_params,
            caps: Caps {
                height: r.parsed("caps.height")?,
                m_max: r.parsed("caps.m_max")?.unwrap_or(DEFAULT_M_MAX),
                bits: r.parsed("caps.bits")?.unwrap_or(DEFAULT_BIT_CAP),
                rho_budget: r.parsed("caps.rho_budget")?.unwrap_or(DEFAULT_RHO_BUDGET),
                element_cap: r.parsed("caps.element_cap")?.unwrap_or(DEFAULT_ELEMENT_CAP),
                shards: r.parsed("caps.shards")?.unwrap_or(1),
            },
            command: CommandOptions {
                alpha: r.raw("command.alpha").map(|(_, v)| v.clone()),
                x: r.raw("command.x").map(|(_, v)| split_list(v)).unwrap_or_default(),
                m: r.range("command.m")?,
                n: r.parsed("command.n")?.unwrap_or(0),
                k: r.parsed("command.k")?,
                tol: r.parsed("command.tol")?.unwrap_or(DEFAULT_TOL),
                n_max: r.parsed("command.n_max")?,
                samples: r.parsed("command.samples")?.unwrap_or(DEFAULT_SAMPLES),
                seed: r.parsed("command.seed")?.unwrap_or(0),
            },
            output: OutputSection {
                dir: r.parsed::<PathBuf>("output.dir")?.unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR)),
                cache: r.parsed("output.cache")?,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Semantic checks that need no arithmetic beyond building the field.
    pub fn validate(&self) -> CliResult<()> {
        let field = self.field_spec()?;
        if self.polynomial.f.is_empty() {
            return Err(CliError::validation("polynomial.f", "no coefficients given"));
        }
        self.poly(&field)?;
        self.s_set(&field)?;
        for name in CParams::NAMES {
            let v = self.c_params.get(name).unwrap();
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::validation(&format!("c_params.{name}"), format!("must be positive, got {v}")));
            }
        }
        if let Some(h) = self.caps.height {
            if !(h > 0.0 && h.is_finite()) {
                return Err(CliError::validation("caps.height", format!("must be positive, got {h}")));
            }
        }
        if self.caps.m_max < 1 {
            return Err(CliError::validation("caps.m_max", "must be at least 1"));
        }
        if self.caps.shards < 1 {
            return Err(CliError::validation("caps.shards", "must be at least 1"));
        }
        if !(self.command.tol > 0.0) {
            return Err(CliError::validation("command.tol", "must be positive"));
        }
        if let Some(a) = &self.command.alpha {
            self.element(&field, "command.alpha", a)?;
        }
        for x in &self.command.x {
            self.element(&field, "command.x", x)?;
        }
        Ok(())
    }

    pub fn field_spec(&self) -> CliResult<FieldSpec> {
        if self.field.kind == FieldKind::Rational && self.field.d.is_some() {
            return Err(CliError::validation("field.d", "only meaningful for quadratic fields"));
        }
        make_field_capped(self.field.kind, self.field.d, self.field.disc_cap).map_err(|e| {
            let key = if self.field.d.is_none() { "field.kind" } else { "field.d" };
            CliError::validation(key, e.to_string())
        })
    }

    pub fn element(&self, field: &FieldSpec, key: &str, text: &str) -> CliResult<NFElement> {
        field.parse(text).map_err(|e| CliError::validation(key, format!("'{text}': {e}")))
    }

    pub fn poly(&self, field: &FieldSpec) -> CliResult<Poly> {
        let coeffs = self
            .polynomial
            .f
            .iter()
            .map(|c| self.element(field, "polynomial.f", c))
            .collect::<CliResult<Vec<_>>>()?;
        let p = Poly::new(field.tag, coeffs).map_err(|e| CliError::validation("polynomial.f", e.to_string()))?;
        if !p.is_integral() {
            return Err(CliError::validation("polynomial.f", "coefficients must be integral"));
        }
        Ok(p)
    }

    pub fn poly_spec(&self, field: &FieldSpec, fz: &mut Factorizer) -> CliResult<PolySpec> {
        let p = self.poly(field)?;
        PolySpec::new(field, p, self.c_params, &self.polynomial.splitting, fz)
            .map_err(|e| CliError::validation("polynomial.f", e.to_string()))
    }

    pub fn s_set(&self, field: &FieldSpec) -> CliResult<SSet> {
        let mut ideals = SSet::above_primes(field, &self.s.primes)
            .map_err(|e| CliError::validation("s.primes", e.to_string()))?
            .finite()
            .to_vec();
        for label in &self.s.ideals {
            ideals.push(ideal_from_label(field, label).map_err(|e| CliError::validation("s.ideals", e.to_string()))?);
        }
        SSet::from_ideals(field, ideals).map_err(|e| CliError::validation("s", e.to_string()))
    }

    pub fn alpha(&self, field: &FieldSpec) -> CliResult<NFElement> {
        let text = self
            .command
            .alpha
            .as_deref()
            .ok_or_else(|| CliError::validation("command.alpha", "required by this command"))?;
        self.element(field, "command.alpha", text)
    }

    pub fn height_cap(&self) -> CliResult<f64> {
        self.caps.height.ok_or_else(|| CliError::validation("caps.height", "required by this command"))
    }

    /// Canonical INI text; `parse(to_ini())` reproduces `self`.
    pub fn to_ini(&self) -> String {
        let mut out = String::new();
        let join = |v: &[String]| v.join(", ");
        let kind = match self.field.kind {
            FieldKind::Rational => "rational",
            FieldKind::Quadratic => "quadratic",
        };
        let _ = writeln!(out, "[field]\nkind = {kind}");
        if let Some(d) = self.field.d {
            let _ = writeln!(out, "d = {d}");
        }
        let _ = writeln!(out, "disc_cap = {}", self.field.disc_cap);
        let _ = writeln!(out, "\n[polynomial]\nf = {}", join(&self.polynomial.f));
        let sp = &self.polynomial.splitting;
        if let Some(v) = sp.degree {
            let _ = writeln!(out, "splitting_degree = {v}");
        }
        if let Some(v) = sp.class_number {
            let _ = writeln!(out, "splitting_class_number = {v}");
        }
        if let Some(v) = sp.regulator {
            let _ = writeln!(out, "splitting_regulator = {v}");
        }
        let _ = writeln!(out, "\n[s]");
        if !self.s.primes.is_empty() {
            let ps: Vec<String> = self.s.primes.iter().map(u64::to_string).collect();
            let _ = writeln!(out, "primes = {}", join(&ps));
        }
        if !self.s.ideals.is_empty() {
            let _ = writeln!(out, "ideals = {}", join(&self.s.ideals));
        }
        let _ = writeln!(out, "\n[c_params]");
        for name in CParams::NAMES {
            let _ = writeln!(out, "{name} = {}", self.c_params.get(name).unwrap());
        }
        let c = &self.caps;
        let _ = writeln!(out, "\n[caps]");
        if let Some(h) = c.height {
            let _ = writeln!(out, "height = {h}");
        }
        let _ = writeln!(
            out,
            "m_max = {}\nbits = {}\nrho_budget = {}\nelement_cap = {}\nshards = {}",
            c.m_max, c.bits, c.rho_budget, c.element_cap, c.shards
        );
        let o = &self.command;
        let _ = writeln!(out, "\n[command]");
        if let Some(a) = &o.alpha {
            let _ = writeln!(out, "alpha = {a}");
        }
        if !o.x.is_empty() {
            let _ = writeln!(out, "x = {}", join(&o.x));
        }
        if let Some(m) = o.m {
            let _ = writeln!(out, "m = {m}");
        }
        let _ = writeln!(out, "n = {}", o.n);
        if let Some(k) = o.k {
            let _ = writeln!(out, "k = {k}");
        }
        let _ = writeln!(out, "tol = {}", o.tol);
        if let Some(v) = o.n_max {
            let _ = writeln!(out, "n_max = {v}");
        }
        let _ = writeln!(out, "samples = {}\nseed = {}", o.samples, o.seed);
        let _ = writeln!(out, "\n[output]\ndir = {}", self.output.dir.display());
        if let Some(p) = &self.output.cache {
            let _ = writeln!(out, "cache = {}", p.display());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "field = rational\nf = 3,-1,0,1\nS = 2,3,5\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let c = RunConfig::parse(MINIMAL, "mem").unwrap();
        assert_eq!(c.field.kind, FieldKind::Rational);
        assert_eq!(c.polynomial.f, ["3", "-1", "0", "1"]);
        assert_eq!(c.s.primes, [2, 3, 5]);
        assert_eq!(c.c_params, CParams::default());
        assert_eq!(c.caps.m_max, DEFAULT_M_MAX);
        assert_eq!(c.caps.bits, DEFAULT_BIT_CAP);
        assert_eq!(c.caps.height, None);
        assert_eq!(c.command.tol, DEFAULT_TOL);
    }

    #[test]
    fn c_param_passthrough() {
        let c = RunConfig::parse(&format!("{MINIMAL}[c_params]\nc4 = 0.5\n"), "mem").unwrap();
        assert_eq!(c.c_params.c4, 0.5);
        assert_eq!(c.c_params.c1, 1.0);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = RunConfig::parse("field = rational\n\n[caps]\nbogus = 1\n", "cfg.ini").unwrap_err();
        assert!(e.to_string().starts_with("cfg.ini:4:"), "{e}");
        let e = RunConfig::parse("[caps]\nm_max = two\n", "cfg.ini").unwrap_err();
        assert!(e.to_string().starts_with("cfg.ini:2:"), "{e}");
        let e = RunConfig::parse("f = 1,0,1\nf = 2\n", "cfg.ini").unwrap_err();
        assert!(e.to_string().contains("duplicate"), "{e}");
        let e = RunConfig::parse("[nowhere]\n", "cfg.ini").unwrap_err();
        assert!(e.to_string().starts_with("cfg.ini:1:"), "{e}");
    }

    #[test]
    fn semantic_errors_name_the_key() {
        let e = RunConfig::parse("field = quadratic\nd = 12\nf = 1,0,1\n", "mem").unwrap_err();
        assert!(matches!(&e, CliError::Validation { key, .. } if key == "field.d"), "{e}");
        let e = RunConfig::parse("f = 1,0,1\nS = 4\n", "mem").unwrap_err();
        assert!(matches!(&e, CliError::Validation { key, .. } if key == "s.primes"), "{e}");
        let e = RunConfig::parse("f = 1/2,0,1\n", "mem").unwrap_err();
        assert!(matches!(&e, CliError::Validation { key, .. } if key == "polynomial.f"), "{e}");
    }

    #[test]
    fn ini_round_trip() {
        let text = "[field]\nkind = quadratic\nd = -5\n[polynomial]\nf = 1+w, 0, 1 ; comment\nsplitting_degree = 2\n\
                    [s]\nprimes = 2\nideals = 3.a\n[c_params]\nc4 = 0.25\n[caps]\nheight = 2.5\nshards = 3\n\
                    [command]\nalpha = 2-w\nm = 2..6\nk = 3\nx = 1/3, w\n[output]\ndir = out\ncache = f.cache\n";
        let c = RunConfig::parse(text, "mem").unwrap();
        assert_eq!(c.command.m, Some(IndexRange { lo: 2, hi: 6 }));
        assert_eq!(c.s.ideals, ["3.a"]);
        let again = RunConfig::parse(&c.to_ini(), "echo").unwrap();
        assert_eq!(again, c);
        let min = RunConfig::parse(MINIMAL, "mem").unwrap();
        assert_eq!(RunConfig::parse(&min.to_ini(), "echo").unwrap(), min);
    }
}
