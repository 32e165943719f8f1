use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;
use serde_json::json;

use crate::cache::FactorCache;
use crate::commands::{factor_error_record, run_command, Command};
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{to_value, Output};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_PARTIAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "orbitforge", version, about = "Heights, S-part witnesses and orbit dependence search")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// INI run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (overrides [output] dir).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for campaigns (overrides [caps] shards).
    #[arg(long)]
    pub shards: Option<usize>,
    /// RNG seed (overrides [command] seed).
    #[arg(long)]
    pub seed: Option<u64>,
}

pub fn load(cli: &Cli) -> CliResult<RunConfig> {
    let mut cfg = RunConfig::load(&cli.config)?;
    if let Some(out) = &cli.out {
        cfg.output.dir = out.clone();
    }
    if let Some(s) = cli.shards {
        cfg.caps.shards = s;
    }
    if let Some(s) = cli.seed {
        cfg.command.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn header(cmd: Command, cfg: &RunConfig) -> serde_json::Value {
    json!({
        "record": "provenance",
        "version": env!("CARGO_PKG_VERSION"),
        "command": cmd.name(),
        "config": to_value(cfg),
        "config_ini": cfg.to_ini(),
    })
}

/// Runs one command and returns the process exit code.
pub fn execute(cli: &Cli) -> i32 {
    let cfg = match load(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("orbitforge: {e}");
            return EXIT_ERROR;
        }
    };
    let cache_path = FactorCache::resolve_path(cfg.output.cache.as_deref());
    let mut cache = match FactorCache::open(cache_path, cfg.caps.rho_budget) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("orbitforge: {e}");
            return EXIT_ERROR;
        }
    };
    let result = run_command(cli.command, &cfg, &mut cache);
    if let Err(e) = cache.flush() {
        eprintln!("orbitforge: {e}");
    }
    let (out, code) = match result {
        Ok(out) => {
            let code = if out.partial { EXIT_PARTIAL } else { EXIT_OK };
            (out, code)
        }
        Err(e) => {
            eprintln!("orbitforge: {e}");
            let mut out = Output::default();
            let body = match &e {
                CliError::Core(core) => factor_error_record(core).unwrap_or_else(|| json!({"message": e.to_string()})),
                _ => json!({"message": e.to_string()}),
            };
            out.record("error", body);
            (out, EXIT_ERROR)
        }
    };
    match out.write(&cfg.output.dir, cli.command.name(), &header(cli.command, &cfg)) {
        Ok(paths) => {
            let names: Vec<String> = paths.iter().map(|p| p.display().to_string()).collect();
            eprintln!("orbitforge {}: {} records -> {}", cli.command.name(), out.records().len(), names.join(", "));
            code
        }
        Err(e) => {
            eprintln!("orbitforge: {e}");
            EXIT_ERROR
        }
    }
}

pub fn main_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_ERROR
            } else {
                EXIT_OK
            }
        }
    }
}
