//! Run configuration: the JSON schema the tool accepts, its validation,
//! and the resolution of optional fields against the built-in defaults and
//! command-line overrides.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use loglap::{DiscreteFunction, Grid1D};
use serde::{Deserialize, Serialize};

/// Defaults mirroring the reference experiments: the unit-radius interval,
/// a desk-scale grid, and the standard decreasing schedule of orders.
pub const DEFAULT_N: usize = 256;
pub const DEFAULT_DOMAIN: [f64; 2] = [-1.0, 1.0];
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_S_LIST: [f64; 4] = [0.1, 0.05, 0.025, 0.0125];
pub const DEFAULT_P1: f64 = 1.0;
pub const DEFAULT_OUT_DIR: &str = "loglap-out";

pub const CHECK_NAMES: [&str; 8] = [
    "hypotheses",
    "expansion",
    "diaz-saa",
    "log-sobolev",
    "frac-sobolev",
    "pohozaev",
    "boundary",
    "obstruction",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Constants,
    Eigen,
    SolveLog,
    SolveFrac,
    Asymptotics,
    Verify,
    All,
}

/// The raw JSON schema.  Unknown keys are rejected so that a typo in a
/// field name cannot silently fall back to a default.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub check: Option<String>,
    pub n: Option<usize>,
    pub domain: Option<[f64; 2]>,
    pub lambda: Option<f64>,
    pub omega: Option<String>,
    pub s_list: Option<Vec<f64>>,
    pub p1: Option<f64>,
    pub seed: Option<u64>,
    pub tol: Option<BTreeMap<String, f64>>,
    pub out_dir: Option<PathBuf>,
}

/// Weight specification: constant, or affine between the two endpoint
/// values.
#[derive(Debug, Clone, Copy)]
pub enum OmegaSpec {
    Const(f64),
    Linear(f64, f64),
}

impl OmegaSpec {
    pub fn parse(text: &str) -> Result<OmegaSpec, String> {
        if let Some(v) = text.strip_prefix("const:") {
            let value: f64 = v
                .trim()
                .parse()
                .map_err(|_| format!("omega constant {v:?} is not a number"))?;
            if !value.is_finite() {
                return Err(format!("omega constant {value} is not finite"));
            }
            return Ok(OmegaSpec::Const(value));
        }
        if let Some(rest) = text.strip_prefix("linear:") {
            let parts: Vec<&str> = rest.split(',').collect();
            if parts.len() != 2 {
                return Err(format!(
                    "omega spec {text:?} needs exactly two endpoint values"
                ));
            }
            let v0: f64 = parts[0]
                .trim()
                .parse()
                .map_err(|_| format!("omega endpoint {:?} is not a number", parts[0]))?;
            let v1: f64 = parts[1]
                .trim()
                .parse()
                .map_err(|_| format!("omega endpoint {:?} is not a number", parts[1]))?;
            if !v0.is_finite() || !v1.is_finite() {
                return Err(format!("omega endpoints ({v0}, {v1}) must be finite"));
            }
            return Ok(OmegaSpec::Linear(v0, v1));
        }
        Err(format!(
            "omega spec {text:?} must be \"const:<v>\" or \"linear:<v0>,<v1>\""
        ))
    }

    /// Cell values of the weight on the grid.
    pub fn materialize(&self, grid: &Arc<Grid1D>) -> DiscreteFunction {
        match *self {
            OmegaSpec::Const(v) => DiscreteFunction::constant(grid, v),
            OmegaSpec::Linear(v0, v1) => {
                let (a, b) = (grid.a, grid.b);
                DiscreteFunction::from_fn(grid, |x| v0 + (v1 - v0) * (x - a) / (b - a))
            }
        }
    }

    /// Spatial derivative of the weight, when it is not constant.
    pub fn derivative(&self, grid: &Arc<Grid1D>) -> Option<DiscreteFunction> {
        match *self {
            OmegaSpec::Const(_) => None,
            OmegaSpec::Linear(v0, v1) => {
                let slope = (v1 - v0) / (grid.b - grid.a);
                Some(DiscreteFunction::constant(grid, slope))
            }
        }
    }

    pub fn spec_string(&self) -> String {
        match *self {
            OmegaSpec::Const(v) => format!("const:{v}"),
            OmegaSpec::Linear(v0, v1) => format!("linear:{v0},{v1}"),
        }
    }
}

/// A fully resolved run: every optional field replaced by its default or
/// override, the weight parsed, and the tolerance table split out.
#[derive(Debug)]
pub struct Resolved {
    pub command: Command,
    pub check: Option<String>,
    pub n: usize,
    pub domain: [f64; 2],
    pub lambda: Option<f64>,
    pub omega: OmegaSpec,
    pub s_list: Vec<f64>,
    pub p1: f64,
    pub seed: u64,
    pub tol_grad: Option<f64>,
    pub tol_constraint: Option<f64>,
    pub out_dir: PathBuf,
}

/// The configuration echo embedded in the manifest: plain JSON mirroring
/// the resolved run, so a report can be reproduced from its manifest alone.
#[derive(Debug, Serialize)]
pub struct ConfigEcho {
    pub command: Command,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub check: Option<String>,
    pub n: usize,
    pub domain: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub omega: String,
    pub s_list: Vec<f64>,
    pub p1: f64,
    pub seed: u64,
    pub tol: BTreeMap<String, f64>,
    pub out_dir: String,
}

/// Command-line overrides for the most frequently swept fields.
#[derive(Debug, Default)]
pub struct Overrides {
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

pub fn resolve(raw: RunConfig, over: &Overrides) -> Result<Resolved, String> {
    let s_list = raw
        .s_list
        .unwrap_or_else(|| DEFAULT_S_LIST.to_vec());
    if s_list.is_empty() {
        return Err("s_list must not be empty".into());
    }
    for &s in &s_list {
        if !s.is_finite() || s <= 0.0 || s >= 0.5 {
            return Err(format!("order s = {s} outside the admissible range (0, 0.5)"));
        }
    }
    if !s_list.windows(2).all(|w| w[1] < w[0]) {
        return Err("s_list must be strictly decreasing".into());
    }

    let mut tol_grad = None;
    let mut tol_constraint = None;
    if let Some(table) = &raw.tol {
        for (key, &value) in table {
            if !value.is_finite() || value <= 0.0 {
                return Err(format!("tolerance {key:?} must be positive, got {value}"));
            }
            match key.as_str() {
                "grad" => tol_grad = Some(value),
                "constraint" => tol_constraint = Some(value),
                other => {
                    return Err(format!(
                        "unknown tolerance key {other:?}; known keys are \"grad\" and \"constraint\""
                    ))
                }
            }
        }
    }

    let omega_text = raw.omega.unwrap_or_else(|| "const:0".into());
    let omega = OmegaSpec::parse(&omega_text)?;

    if let Some(check) = &raw.check {
        if raw.command != Command::Verify {
            return Err("the \"check\" field applies only to the verify command".into());
        }
        if !CHECK_NAMES.contains(&check.as_str()) {
            return Err(format!(
                "unknown check {check:?}; available checks: {}",
                CHECK_NAMES.join(", ")
            ));
        }
    }

    if raw.command == Command::SolveLog && raw.lambda.is_none() {
        return Err("solve-log requires a \"lambda\" value".into());
    }
    if let Some(l) = raw.lambda {
        if !l.is_finite() {
            return Err(format!("lambda must be finite, got {l}"));
        }
    }

    let p1 = raw.p1.unwrap_or(DEFAULT_P1);
    if !p1.is_finite() || p1 == 0.0 {
        return Err(format!("p1 must be finite and nonzero, got {p1}"));
    }

    let domain = raw.domain.unwrap_or(DEFAULT_DOMAIN);
    Ok(Resolved {
        command: raw.command,
        check: raw.check,
        n: over.n.or(raw.n).unwrap_or(DEFAULT_N),
        domain,
        lambda: raw.lambda,
        omega,
        s_list,
        p1,
        seed: over.seed.or(raw.seed).unwrap_or(DEFAULT_SEED),
        tol_grad,
        tol_constraint,
        out_dir: over
            .out
            .clone()
            .or(raw.out_dir)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR)),
    })
}

impl Resolved {
    pub fn echo(&self) -> ConfigEcho {
        let mut tol = BTreeMap::new();
        if let Some(g) = self.tol_grad {
            tol.insert("grad".to_string(), g);
        }
        if let Some(c) = self.tol_constraint {
            tol.insert("constraint".to_string(), c);
        }
        ConfigEcho {
            command: self.command,
            check: self.check.clone(),
            n: self.n,
            domain: self.domain,
            lambda: self.lambda,
            omega: self.omega.spec_string(),
            s_list: self.s_list.clone(),
            p1: self.p1,
            seed: self.seed,
            tol,
            out_dir: self.out_dir.display().to_string(),
        }
    }

    pub fn solve_opts(&self) -> loglap::SolveOpts {
        let mut opts = loglap::SolveOpts::default();
        if let Some(g) = self.tol_grad {
            opts.tol_grad = Some(g);
        }
        if let Some(c) = self.tol_constraint {
            opts.tol_constraint = c;
        }
        opts
    }
}
