use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use num_bigint::BigUint;
use serde_json::Value;
use tempfile::TempDir;

use orbitforge_cli::cache::{FactorCache, CACHE_ENV, CACHE_HEADER};
use orbitforge_cli::config::RunConfig;
use orbitforge_cli::output::csv_cell;

struct Run {
    code: i32,
    stderr: String,
    records: Vec<Value>,
    csv: Option<(Vec<String>, Vec<Vec<String>>)>,
}

impl Run {
    fn table(&self) -> Vec<&Value> {
        let kind = self.records[0]["command"].as_str().unwrap();
        let table = table_kind(kind);
        self.records.iter().filter(|r| r["record"] == table).collect()
    }

    fn of_kind(&self, kind: &str) -> Vec<&Value> {
        self.records.iter().filter(|r| r["record"] == kind).collect()
    }
}

fn table_kind(command: &str) -> &'static str {
    match command {
        "heights" => "height",
        "constants" => "constant",
        "orbit" => "iterate",
        "primitive-divisors" => "primitive",
        "search-dependence" | "witness" => "witness",
        "sunit-scan" => "sunit",
        "lambda-report" => "lambda",
        "verify-spart" => "eta",
        other => panic!("no table for {other}"),
    }
}

fn write_config(dir: &Path, ini: &str) -> PathBuf {
    let path = dir.join("run.ini");
    fs::write(&path, ini).unwrap();
    path
}

fn run_in(dir: &Path, command: &str, ini: &str, extra: &[&str]) -> Run {
    let config = write_config(dir, ini);
    let out = dir.join("out");
    let output = Command::new(env!("CARGO_BIN_EXE_orbitforge"))
        .arg(command)
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .args(extra)
        .env_remove(CACHE_ENV)
        .output()
        .expect("binary runs");
    let jsonl = out.join(format!("{command}.jsonl"));
    let records = fs::read_to_string(&jsonl)
        .map(|t| t.lines().map(|l| serde_json::from_str(l).unwrap()).collect())
        .unwrap_or_default();
    let csv = fs::read(out.join(format!("{command}.csv"))).ok().map(|bytes| {
        let mut r = csv::Reader::from_reader(bytes.as_slice());
        let header = r.headers().unwrap().iter().map(String::from).collect();
        let rows = r.records().map(|row| row.unwrap().iter().map(String::from).collect()).collect();
        (header, rows)
    });
    Run {
        code: output.status.code().expect("exit code"),
        stderr: String::from_utf8_lossy(&output.stderr).into_owned(),
        records,
        csv,
    }
}

fn run(command: &str, ini: &str, extra: &[&str]) -> Run {
    let dir = TempDir::new().unwrap();
    run_in(dir.path(), command, ini, extra)
}

fn constant(run: &Run, name: &str) -> Value {
    run.table().into_iter().find(|r| r["name"] == name).unwrap()["value"].clone()
}

#[test]
fn constants_over_q_with_archimedean_s() {
    let r = run("constants", "field = rational\nf = -6, 11, -6, 1\n", &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let eta1_inv = constant(&r, "eta1_inv").as_f64().unwrap();
    assert!((eta1_inv - 128.0 * 2f64.ln()).abs() < 1e-9, "{eta1_inv}");
    assert_eq!(constant(&r, "t"), 0);
    assert_eq!(constant(&r, "t_sum").as_f64(), Some(0.0));
    assert!(!constant(&r, "t_sum").to_string().starts_with('-'));
}

#[test]
fn primitive_divisor_of_the_third_iterate() {
    // 1 → 2 → 5 → 26 under x² + 1: 13 divides f³(1) and none of 2, 5.
    let r = run("primitive-divisors", "f = 1, 0, 1\n[command]\nalpha = 1\nm = 3\nk = 3\n", &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rows = r.table();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["prime"], "(13)");
    assert_eq!(rows[0]["norm"], "13");
}

#[test]
fn orbit_with_zero_steps_is_the_start_point() {
    let r = run("orbit", "f = 1, 0, 1\n[command]\nalpha = 1\nm = 0\n", &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rows = r.table();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["value"], "1");
    assert_eq!(rows[0]["k"], 0);
}

#[test]
fn non_integral_points_in_a_quadratic_field() {
    // x³ − x keeps 1/3 inside (−1, 1) with denominator 3^(3^n), so ĥ(1/3) = log 3.
    let ini = "field = quadratic\nd = 2\nf = 0, -1, 0, 1\nS = 2, 7\n[command]\nx = 1/3, 3+w\n";
    let r = run("heights", ini, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rows = r.table();
    let hhat = rows[0]["hhat"].as_f64().unwrap();
    let err = rows[0]["hhat_error"].as_f64().unwrap();
    assert!((hhat - 3f64.ln()).abs() <= err + 1e-12, "{hhat} ± {err}");
    assert_eq!(rows[1]["lambda"], "7");
}

#[test]
fn csv_and_jsonl_carry_the_same_values() {
    let ini = "f = 1, 0, 1\n[command]\nalpha = 1\nm = 2..6\n";
    let r = run("primitive-divisors", ini, &[]);
    let (header, rows) = r.csv.as_ref().expect("csv twin");
    let table = r.table();
    assert_eq!(rows.len(), table.len());
    for (row, rec) in rows.iter().zip(table) {
        for (col, cell) in header.iter().zip(row) {
            assert_eq!(&csv_cell(&rec[col]), cell, "column {col}");
        }
    }
    let h = run("heights", "f = 0, -1, 0, 1\nS = 2, 3\n[command]\nx = 720, 1/3, 0\n", &[]);
    let (header, rows) = h.csv.as_ref().unwrap();
    for (row, rec) in rows.iter().zip(h.table()) {
        for (col, cell) in header.iter().zip(row) {
            assert_eq!(&csv_cell(&rec[col]), cell, "column {col}");
        }
    }
}

#[test]
fn provenance_echo_reloads_to_the_same_config() {
    let ini = "field = quadratic\nd = -5\nf = 1, 0, 1\nS = 3\n[c_params]\nc4 = 0.5\n[command]\nalpha = 1+w\nm = 2\n";
    let r = run("orbit", ini, &["--seed", "11"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let head = &r.records[0];
    assert_eq!(head["record"], "provenance");
    assert_eq!(head["command"], "orbit");
    assert_eq!(head["version"], env!("CARGO_PKG_VERSION"));
    let echoed = head["config_ini"].as_str().unwrap();
    let reloaded = RunConfig::parse(echoed, "echo").unwrap();
    assert_eq!(serde_json::to_value(&reloaded).unwrap(), head["config"]);
    assert_eq!(head["config"]["command"]["seed"], 11);
}

#[test]
fn exit_codes() {
    let ok = run("orbit", "f = 1, 0, 1\n[command]\nalpha = 1\nm = 3\n", &[]);
    assert_eq!(ok.code, 0);

    let bad = run("orbit", "f = 1, 0, 1\n[command]\nalpha = 1\nm = 3\nwidth = 2\n", &[]);
    assert_eq!(bad.code, 1);
    assert!(bad.stderr.contains("run.ini:5:"), "{}", bad.stderr);

    let ini = "f = 1, 0, 1\nS = 2, 5\nH = 1.0986122886681098\n[caps]\nelement_cap = 3\n[command]\nn_max = 2\n";
    let partial = run("sunit-scan", ini, &[]);
    assert_eq!(partial.code, 2, "{}", partial.stderr);
    let campaign = partial.of_kind("campaign");
    assert_eq!(campaign[0]["domain_truncated"], true);

    let capped = run("orbit", "f = 1, 0, 1\n[caps]\nbits = 40\n[command]\nalpha = 1\nm = 9\n", &[]);
    assert_eq!(capped.code, 2);
    assert_eq!(capped.of_kind("skip").len(), 1);
}

#[test]
fn repeated_roots_are_rejected_before_sampling() {
    let r = run("verify-spart", "f = 0, 0, 1\nS = 2\nH = 2\n", &[]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("polynomial.f"), "{}", r.stderr);
    assert_eq!(r.of_kind("error").len(), 1);
}

#[test]
fn verify_spart_counts_roots_instead_of_skipping() {
    let r = run("verify-spart", "f = -6, 11, -6, 1\nS = 2, 3\nH = 2\n[command]\nsamples = 200\n", &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let row = r.table()[0];
    let drawn = row["samples"].as_u64().unwrap() + row["roots_drawn"].as_u64().unwrap();
    assert_eq!(drawn, 200);
    assert!(row["roots_drawn"].as_u64().unwrap() > 0);
}

#[test]
fn shards_do_not_change_results() {
    let ini = "f = 3, -1, 0, 1\nS = 2, 3, 5\nH = 3.912023005428146\n[caps]\nm_max = 4\n";
    let one = run("search-dependence", ini, &["--shards", "1"]);
    let four = run("search-dependence", ini, &["--shards", "4"]);
    assert_eq!(one.code, four.code);
    assert!(!one.table().is_empty());
    assert_eq!(one.records[1..], four.records[1..]);
    assert_eq!(one.csv, four.csv);
}

#[test]
fn cache_hits_after_reload() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("factors.txt");
    let n = BigUint::from(210066388901u64);

    let mut cache = FactorCache::open(Some(path.clone()), 1 << 20).unwrap();
    let (f, hit) = cache.lookup_or_factor(&n).unwrap();
    assert!(!hit);
    let primes: Vec<String> = f.factors.iter().map(|(p, e)| format!("{p}^{e}")).collect();
    assert_eq!(primes, ["41^1", "1277^1", "4012193^1"]);
    let (_, again) = cache.lookup_or_factor(&n).unwrap();
    assert!(again);
    assert!(cache.flush().unwrap() >= 1);

    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next(), Some(CACHE_HEADER));
    assert!(text.contains("210066388901 = 41 * 1277 * 4012193"));

    let mut reloaded = FactorCache::open(Some(path.clone()), 1 << 20).unwrap();
    assert!(reloaded.loaded >= 1);
    let (g, hit) = reloaded.lookup_or_factor(&n).unwrap();
    assert!(hit);
    assert_eq!(g, f);
    assert_eq!(reloaded.flush().unwrap(), 0);
    assert_eq!(fs::read_to_string(&path).unwrap(), text);
}

#[test]
fn corrupted_cache_lines_are_named() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("factors.txt");
    fs::write(&path, format!("{CACHE_HEADER}\n720 = 2^4 * 3^2 * 5\n721 = 7 * 101\n")).unwrap();
    let err = FactorCache::open(Some(path.clone()), 1 << 20).err().expect("rejected");
    assert!(err.to_string().contains(":3:"), "{err}");

    let ini = format!("f = 1, 0, 1\n[command]\nalpha = 1\nm = 3\n[output]\ncache = {}\n", path.display());
    let r = run("primitive-divisors", &ini, &[]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("factors.txt:3:"), "{}", r.stderr);
}

#[test]
fn cli_runs_fill_the_cache_and_env_overrides_config() {
    let dir = TempDir::new().unwrap();
    let configured = dir.path().join("configured.txt");
    let from_env = dir.path().join("env.txt");
    let ini = format!(
        "f = 1, 0, 1\n[command]\nalpha = 1\nm = 2..6\n[output]\ncache = {}\n",
        configured.display()
    );
    let config = write_config(dir.path(), &ini);
    let status = Command::new(env!("CARGO_BIN_EXE_orbitforge"))
        .args(["primitive-divisors", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(dir.path().join("out"))
        .env(CACHE_ENV, &from_env)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(!configured.exists());
    let cached = FactorCache::open(Some(from_env), 1 << 20).unwrap();
    assert!(cached.loaded > 0);

    let r = run_in(dir.path(), "primitive-divisors", &ini, &[]);
    assert_eq!(r.code, 0);
    assert!(FactorCache::open(Some(configured), 1 << 20).unwrap().loaded > 0);
}
