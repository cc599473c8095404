//! Batch front-end for the loglap library.
//!
//! The tool reads a JSON run configuration, dispatches to one of the
//! command drivers, and writes deterministic CSV and JSON reports into the
//! output directory.  A manifest echoing the resolved configuration is
//! written even when a stage fails part-way, so every report directory is
//! self-describing.
//!
//! Exit codes: 0 when every check passed, 1 when the run completed but a
//! check failed, 2 for configuration (including regime) errors, 3 when a
//! solver did not converge, 4 when the output directory is unwritable.

mod commands;
mod config;
mod output;

use std::fs;
use std::path::PathBuf;

use clap::Parser;

use config::{resolve, Overrides, RunConfig};
use output::Bundle;

#[derive(Parser)]
#[command(
    name = "loglap",
    version,
    about = "Discretize, solve, and verify the logarithmic-Laplacian model problems",
    after_help = "The configuration file is a JSON object; its \"command\" field selects one \
                  of: constants, eigen, solve-log, solve-frac, asymptotics, verify, all.  \
                  Set LOGLAP_THREADS to cap the worker-thread count."
)]
struct Cli {
    /// Path to the JSON run configuration.
    config: PathBuf,
    /// Override the grid size from the configuration.
    #[arg(long)]
    n: Option<usize>,
    /// Override the random seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn configure_threads() {
    if let Ok(text) = std::env::var("LOGLAP_THREADS") {
        match text.trim().parse::<usize>() {
            Ok(k) if k >= 1 => {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(k)
                    .build_global()
                    .ok();
            }
            _ => eprintln!("ignoring LOGLAP_THREADS={text:?}: expected a positive integer"),
        }
    }
}

fn run() -> i32 {
    let cli = Cli::parse();
    configure_threads();

    let text = match fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("config error: {}: {e}", cli.config.display());
            return 2;
        }
    };
    let raw: RunConfig = match serde_json::from_str(&text) {
        Ok(r) => r,
        Err(e) => {
            // The serde message already carries the location; keep only the
            // reason and report the location uniformly in the prefix.
            let msg = e.to_string();
            let reason = msg.split(" at line ").next().unwrap_or(&msg).to_string();
            eprintln!(
                "config error at line {}, column {}: {reason}",
                e.line(),
                e.column()
            );
            return 2;
        }
    };
    let over = Overrides {
        n: cli.n,
        seed: cli.seed,
        out: cli.out,
    };
    let cfg = match resolve(raw, &over) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("config error: {msg}");
            return 2;
        }
    };
    if let Err(e) = fs::create_dir_all(&cfg.out_dir) {
        eprintln!("output error: {}: {e}", cfg.out_dir.display());
        return 4;
    }

    let mut bundle = Bundle::new();
    let code = match commands::run(&cfg, &mut bundle) {
        Ok(()) => {
            if bundle.overall_pass() {
                0
            } else {
                1
            }
        }
        Err(failure) => {
            eprintln!("{failure}");
            bundle.error = Some(failure.to_string());
            failure.exit_code()
        }
    };
    if let Err(failure) = bundle.write_manifest(&cfg) {
        eprintln!("{failure}");
        return 4;
    }
    println!(
        "overall: {} ({} checks passed, {} failed)",
        if bundle.overall_pass() { "PASS" } else { "FAIL" },
        bundle.checks_passed,
        bundle.checks_failed
    );
    code
}

fn main() {
    std::process::exit(run());
}
