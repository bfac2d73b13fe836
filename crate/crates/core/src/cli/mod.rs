//! Batch experiment runner behind the `rdmlab` binary.
//!
//! A run validates its configuration, executes one experiment and writes
//! `summary.json`, `manifest.json` and the experiment's CSV files to the
//! output directory. Feeding `manifest.json` back as `--config` repeats the
//! run exactly.

pub mod config;
pub mod experiments;
pub mod output;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Parser;
use serde_json::{json, Value};

pub use config::{validate, Experiment, Overrides, Params, RunConfig, ValidationReport};
pub use output::{sha256_hex, to_json_bytes};

use crate::error::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub const DEFAULT_OUTPUT_DIR: &str = "out";

#[derive(Debug, Parser)]
#[command(name = "rdmlab", version, about = "Seeded batch runs of the wave-packet, RDM, relativity and AC-phase experiments")]
pub struct Args {
    /// TOML configuration file, or a manifest.json from an earlier run.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Seed, overriding the file.
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Output directory (default: output_dir from the file, else "out").
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Experiment, overriding the file.
    #[arg(long, value_name = "NAME")]
    pub experiment: Option<String>,
    /// Suppress progress and warning messages.
    #[arg(long)]
    pub quiet: bool,
    /// Worker threads (results do not depend on this).
    #[arg(long, value_name = "N")]
    pub threads: Option<usize>,
}

/// Paths written by a run and the summary record.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub summary: Value,
    pub manifest: Value,
    pub files: Vec<PathBuf>,
}

/// SHA-256 of the resolved configuration.
pub fn config_hash(config: &RunConfig) -> String {
    sha256_hex(&config.resolved).expect("resolved config is plain JSON")
}

/// Executes `config` and writes every artifact into `out_dir`.
pub fn run(config: &RunConfig, out_dir: &Path) -> Result<RunArtifacts> {
    let outcome = experiments::execute(&config.params, &config.units, config.seed)?;
    let hash = config_hash(config);
    let summary = json!({
        "experiment": config.experiment.as_str(),
        "seed": config.seed,
        "config_hash": hash,
        "results": outcome.results,
    });
    let manifest = json!({
        "config": config.resolved,
        "config_hash": hash,
        "seed": config.seed,
        "experiment": config.experiment.as_str(),
        "versions": {
            "rdmlab": env!("CARGO_PKG_VERSION"),
            "manifest_format": 1,
        },
        "warnings": config.warnings,
    });
    fs::create_dir_all(out_dir)?;
    let mut files = Vec::new();
    let encode = |v: &Value| to_json_bytes(v).map_err(|e| Error::Config(e.to_string()));
    let mut payloads = outcome.files;
    payloads.push(("summary.json".into(), encode(&summary)?));
    payloads.push(("manifest.json".into(), encode(&manifest)?));
    for (name, bytes) in payloads {
        let path = out_dir.join(name);
        fs::write(&path, bytes)?;
        files.push(path);
    }
    Ok(RunArtifacts {
        summary,
        manifest,
        files,
    })
}

/// Full command-line entry point; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let source = match &args.config {
        Some(path) => match fs::read_to_string(path) {
            Ok(s) => s,
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", path.display());
                return EXIT_USAGE;
            }
        },
        None => String::new(),
    };
    let overrides = Overrides {
        experiment: args.experiment.clone(),
        seed: args.seed,
    };
    let config = match validate(&source, &overrides) {
        Ok(c) => c,
        Err(report) => {
            eprintln!("invalid configuration:");
            for e in &report.errors {
                eprintln!("  {e}");
            }
            return EXIT_USAGE;
        }
    };
    if !args.quiet {
        for w in &config.warnings {
            eprintln!("warning: {w}");
        }
    }
    let out_dir = args
        .out
        .clone()
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.threads {
        if n == 0 {
            eprintln!("error: --threads must be >= 1");
            return EXIT_USAGE;
        }
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return EXIT_RUNTIME;
        }
    };
    match pool.install(|| run(&config, &out_dir)) {
        Ok(artifacts) => {
            if !args.quiet {
                eprintln!(
                    "{} (seed {}) wrote {} files to {}",
                    config.experiment,
                    config.seed,
                    artifacts.files.len(),
                    out_dir.display()
                );
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
    }
}
