//! Deterministic report writing: CSV tables with full-fidelity floats, the
//! JSON manifest, and the failure type that maps onto process exit codes.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use loglap::verify::CheckReport;

use crate::config::Resolved;

/// Everything that can end a run early, tagged with the exit code the
/// process should report.
#[derive(Debug)]
pub enum Failure {
    Lib(loglap::Error),
    Io { path: PathBuf, source: std::io::Error },
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Lib(loglap::Error::NonConvergence { .. }) => 3,
            Failure::Lib(_) => 2,
            Failure::Io { .. } => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Lib(e) => write!(f, "{e}"),
            Failure::Io { path, source } => {
                write!(f, "output error: {}: {source}", path.display())
            }
        }
    }
}

impl From<loglap::Error> for Failure {
    fn from(e: loglap::Error) -> Failure {
        Failure::Lib(e)
    }
}

/// 17 significant digits: the shortest fixed width that reparses to the
/// identical 64-bit value for every finite float.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    fmt_f64(x.unwrap_or(f64::NAN))
}

/// Writes one CSV table: header first, LF line endings, quoting only where
/// the payload demands it.
pub fn write_csv(
    dir: &Path,
    name: &str,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<(), Failure> {
    let path = dir.join(name);
    let io_err = |source| Failure::Io {
        path: path.clone(),
        source,
    };
    let file = File::create(&path).map_err(io_err)?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(header).map_err(csv_io(&path))?;
    for row in rows {
        w.write_record(row).map_err(csv_io(&path))?;
    }
    w.flush().map_err(io_err)
}

fn csv_io(path: &Path) -> impl Fn(csv::Error) -> Failure + '_ {
    move |e| Failure::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e),
    }
}

pub fn write_json(dir: &Path, name: &str, value: &serde_json::Value) -> Result<(), Failure> {
    let path = dir.join(name);
    let io_err = |source| Failure::Io {
        path: path.clone(),
        source,
    };
    let mut out = BufWriter::new(File::create(&path).map_err(io_err)?);
    let text = serde_json::to_string_pretty(value).expect("report values serialize");
    out.write_all(text.as_bytes()).map_err(io_err)?;
    out.write_all(b"\n").map_err(io_err)
}

/// The standard row shape shared by every verification table.
pub const CHECK_HEADER: [&str; 6] = ["name", "param_json", "lhs", "rhs", "margin", "pass"];

pub fn check_row(rep: &CheckReport, params: &serde_json::Value) -> Vec<String> {
    vec![
        rep.name.clone(),
        params.to_string(),
        fmt_f64(rep.lhs),
        fmt_f64(rep.rhs),
        fmt_f64(rep.margin),
        rep.pass.to_string(),
    ]
}

/// Run-wide bookkeeping: which tables were written, whether every check
/// passed, and how long each stage took.  The manifest is emitted from
/// here even when a stage failed part-way.
pub struct Bundle {
    started: Instant,
    pub tables: Vec<String>,
    pub checks_passed: usize,
    pub checks_failed: usize,
    pub error: Option<String>,
    stage_times: Vec<(String, u128)>,
}

impl Bundle {
    pub fn new() -> Bundle {
        Bundle {
            started: Instant::now(),
            tables: Vec::new(),
            checks_passed: 0,
            checks_failed: 0,
            error: None,
            stage_times: Vec::new(),
        }
    }

    pub fn overall_pass(&self) -> bool {
        self.checks_failed == 0 && self.error.is_none()
    }

    pub fn record_table(&mut self, name: &str) {
        self.tables.push(name.to_string());
        println!("wrote {name}");
    }

    pub fn record_check(&mut self, pass: bool) {
        if pass {
            self.checks_passed += 1;
        } else {
            self.checks_failed += 1;
        }
    }

    pub fn record_stage(&mut self, name: &str, started: Instant) {
        self.stage_times
            .push((name.to_string(), started.elapsed().as_millis()));
    }

    /// The manifest carries the resolved configuration, tool versions, the
    /// table list, the verdict, and wall times.  Wall times are the one
    /// field exempt from the byte-identical determinism contract.
    pub fn write_manifest(&self, cfg: &Resolved) -> Result<(), Failure> {
        let mut times = serde_json::Map::new();
        for (name, ms) in &self.stage_times {
            times.insert(name.clone(), serde_json::json!(ms));
        }
        times.insert(
            "total".to_string(),
            serde_json::json!(self.started.elapsed().as_millis()),
        );
        let manifest = serde_json::json!({
            "tool": {
                "name": env!("CARGO_PKG_NAME"),
                "version": env!("CARGO_PKG_VERSION"),
                "library": loglap_version(),
            },
            "config": serde_json::to_value(cfg.echo()).expect("config echo serializes"),
            "tables": self.tables,
            "checks": {
                "passed": self.checks_passed,
                "failed": self.checks_failed,
            },
            "overall_pass": self.overall_pass(),
            "error": self.error,
            "wall_times_ms": serde_json::Value::Object(times),
        });
        write_json(&cfg.out_dir, "manifest.json", &manifest)
    }
}

fn loglap_version() -> &'static str {
    // The library crate is compiled into this binary; its version moves in
    // lockstep with the workspace.
    env!("CARGO_PKG_VERSION")
}
