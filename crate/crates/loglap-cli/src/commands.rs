//! The seven run commands: closed-form constants, eigenvalue asymptotics,
//! the two solvers, the small-order studies, the verification checks, and
//! the combined batch.  Each command writes its tables into the output
//! directory and records pass/fail verdicts in the bundle.

use std::sync::Arc;
use std::time::Instant;

use loglap::constants::{dimension_constants, frac_constants, kappa_limit_check};
use loglap::forms::{assemble_fractional, assemble_log_laplacian, expansion_check};
use loglap::problem::{FracProblem, LogRegime, WeightFamily};
use loglap::solve::{default_init_frac, default_init_log, SignPattern};
use loglap::spectral::eig_asymptotics;
use loglap::verify::{
    boundary_rate_fit, critical_obstruction_check, diaz_saa_check, frac_sobolev_check,
    hypothesis_check, log_sobolev_check, pohozaev_residual, random_function,
    random_positive_pair, sublinear_asymptotics, superlinear_asymptotics, AsymptoticsReport,
};
use loglap::{
    build_grid, solve_frac, solve_sublinear, solve_superlinear, DiscreteFunction, Grid1D,
    LogProblem, SolveReport,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::{Command, Resolved, CHECK_NAMES};
use crate::output::{check_row, fmt_f64, fmt_opt, write_csv, write_json, Bundle, Failure, CHECK_HEADER};

pub fn run(cfg: &Resolved, bundle: &mut Bundle) -> Result<(), Failure> {
    match cfg.command {
        Command::Constants => staged(cfg, bundle, "constants", constants_cmd),
        Command::Eigen => staged(cfg, bundle, "eigen", eigen_cmd),
        Command::SolveLog => staged(cfg, bundle, "solve_log", |c, b| {
            let lambda = c.lambda.expect("validated during resolution");
            let row = solve_log_one(c, b, lambda, "")?;
            write_csv(&c.out_dir, "solve_log.csv", &SOLVE_LOG_HEADER, &[row])?;
            b.record_table("solve_log.csv");
            Ok(())
        }),
        Command::SolveFrac => staged(cfg, bundle, "solve_frac", solve_frac_cmd),
        Command::Asymptotics => staged(cfg, bundle, "asymptotics", |c, b| {
            asymptotics_one(c, b, c.p1, "")
        }),
        Command::Verify => verify_cmd(cfg, bundle),
        Command::All => all_cmd(cfg, bundle),
    }
}

fn staged(
    cfg: &Resolved,
    bundle: &mut Bundle,
    name: &str,
    body: impl FnOnce(&Resolved, &mut Bundle) -> Result<(), Failure>,
) -> Result<(), Failure> {
    let t0 = Instant::now();
    let outcome = body(cfg, bundle);
    bundle.record_stage(name, t0);
    outcome
}

fn grid_of(cfg: &Resolved) -> Result<Arc<Grid1D>, Failure> {
    Ok(build_grid(cfg.domain[0], cfg.domain[1], cfg.n)?)
}

fn sign_str(pattern: SignPattern) -> &'static str {
    match pattern {
        SignPattern::Nonnegative => "nonnegative",
        SignPattern::Nonpositive => "nonpositive",
        SignPattern::Mixed => "mixed",
    }
}

fn solution_rows(u: &DiscreteFunction) -> Vec<Vec<String>> {
    u.grid
        .midpoints
        .iter()
        .zip(&u.values)
        .map(|(&x, &v)| vec![fmt_f64(x), fmt_f64(v)])
        .collect()
}

// ---------------------------------------------------------------------------
// constants

fn constants_cmd(cfg: &Resolved, bundle: &mut Bundle) -> Result<(), Failure> {
    let mut dimension = Vec::new();
    for n_dim in 1..=3u32 {
        let d = dimension_constants(n_dim)?;
        dimension.push(json!({
            "n_dim": d.n_dim,
            "c_n": d.c_n,
            "rho_n": d.rho_n,
            "a_n": d.a_n,
            "kappa_n": d.kappa_n,
        }));
    }
    let mut fractional = Vec::new();
    for n_dim in 1..=3u32 {
        for &s in &cfg.s_list {
            let f = frac_constants(n_dim, s)?;
            fractional.push(json!({
                "n_dim": f.n_dim,
                "s": f.s,
                "c_ns": f.c_ns,
                "kappa_ns": f.kappa_ns,
                "two_star": f.two_star,
            }));
        }
    }
    let mut kappa_limit = Vec::new();
    for n_dim in 1..=3u32 {
        let rep = kappa_limit_check(n_dim, &cfg.s_list)?;
        kappa_limit.push(json!({
            "n_dim": n_dim,
            "rows": rep.rows.iter()
                .map(|&(s, v)| json!({"s": s, "kappa_power": v}))
                .collect::<Vec<_>>(),
            "kappa_n": rep.kappa_n,
            "final_gap": rep.final_gap,
        }));
    }
    let value = json!({
        "dimension": dimension,
        "fractional": fractional,
        "kappa_limit": kappa_limit,
    });
    write_json(&cfg.out_dir, "constants.json", &value)?;
    bundle.record_table("constants.json");
    println!(
        "{}",
        serde_json::to_string_pretty(&value).expect("constants serialize")
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// eigen

fn eigen_cmd(cfg: &Resolved, bundle: &mut Bundle) -> Result<(), Failure> {
    let grid = grid_of(cfg)?;
    let rep = eig_asymptotics(&grid, &cfg.s_list)?;
    let rows: Vec<Vec<String>> = rep
        .rows
        .iter()
        .map(|r| {
            vec![
                fmt_f64(r.s),
                fmt_f64(r.lambda_1s),
                fmt_f64(r.diff_quotient),
                fmt_f64(r.ln_lambda_1s),
                fmt_f64(rep.lambda_1l),
                fmt_f64(r.eigfun_l2_gap),
            ]
        })
        .collect();
    write_csv(
        &cfg.out_dir,
        "eigen.csv",
        &[
            "s",
            "lambda1s",
            "diff_quotient",
            "ln_lambda1s",
            "lambda1L",
            "eigfun_l2_gap",
        ],
        &rows,
    )?;
    bundle.record_table("eigen.csv");
    Ok(())
}

// ---------------------------------------------------------------------------
// solve-log

const SOLVE_LOG_HEADER: [&str; 9] = [
    "lambda",
    "n",
    "energy",
    "grad_norm",
    "constraint_residual",
    "iterations",
    "sup_norm",
    "energy_identity_gap",
    "sign_pattern",
];

fn solve_log_problem(cfg: &Resolved, lambda: f64) -> Result<(LogProblem, SolveReport), Failure> {
    let grid = grid_of(cfg)?;
    let omega = cfg.omega.materialize(&grid);
    let prob = LogProblem::new(&grid, lambda, omega, cfg.omega.derivative(&grid))?;
    let init = default_init_log(&prob)?;
    let opts = cfg.solve_opts();
    let rep = match prob.regime() {
        LogRegime::Sublinear => solve_sublinear(&prob, &init, &opts)?,
        // The critical gate inside the solver reports the regime error.
        _ => solve_superlinear(&prob, &init, &opts)?,
    };
    Ok((prob, rep))
}

fn solve_log_one(
    cfg: &Resolved,
    bundle: &mut Bundle,
    lambda: f64,
    tag: &str,
) -> Result<Vec<String>, Failure> {
    let (_, rep) = solve_log_problem(cfg, lambda)?;
    let name = format!("solution_log{tag}.csv");
    write_csv(
        &cfg.out_dir,
        &name,
        &["midpoint", "value"],
        &solution_rows(&rep.solution),
    )?;
    bundle.record_table(&name);
    Ok(vec![
        fmt_f64(lambda),
        cfg.n.to_string(),
        fmt_f64(rep.energy),
        fmt_f64(rep.grad_norm),
        fmt_f64(rep.constraint_residual),
        rep.iterations.to_string(),
        fmt_f64(rep.sup_norm),
        fmt_f64(rep.energy_identity_gap),
        sign_str(rep.sign_pattern).to_string(),
    ])
}

// ---------------------------------------------------------------------------
// solve-frac

fn solve_frac_cmd(cfg: &Resolved, bundle: &mut Bundle) -> Result<(), Failure> {
    let grid = grid_of(cfg)?;
    let omega = cfg.omega.materialize(&grid);
    let family = WeightFamily::new(cfg.p1, omega, None)?;
    let opts = cfg.solve_opts();
    let mut rows = Vec::new();
    for (i, &s) in cfg.s_list.iter().enumerate() {
        let prob = FracProblem::new(&grid, s, family.p_of_s(s), family.a_of_s(s)?)?;
        let init = default_init_frac(&prob)?;
        let rep = solve_frac(&prob, &init, &opts)?;
        let name = format!("solution_frac_{i}.csv");
        write_csv(
            &cfg.out_dir,
            &name,
            &["midpoint", "value"],
            &solution_rows(&rep.solution),
        )?;
        bundle.record_table(&name);
        rows.push(vec![
            fmt_f64(s),
            fmt_f64(prob.p),
            fmt_f64(rep.energy),
            fmt_f64(rep.grad_norm),
            fmt_f64(rep.constraint_residual),
            rep.iterations.to_string(),
            fmt_f64(rep.sup_norm),
            fmt_f64(rep.energy_identity_gap),
            sign_str(rep.sign_pattern).to_string(),
        ]);
    }
    write_csv(
        &cfg.out_dir,
        "solve_frac.csv",
        &[
            "s",
            "p",
            "energy",
            "grad_norm",
            "constraint_residual",
            "iterations",
            "sup_norm",
            "energy_identity_gap",
            "sign_pattern",
        ],
        &rows,
    )?;
    bundle.record_table("solve_frac.csv");
    Ok(())
}

// ---------------------------------------------------------------------------
// asymptotics

fn asymptotics_one(
    cfg: &Resolved,
    bundle: &mut Bundle,
    p1: f64,
    tag: &str,
) -> Result<(), Failure> {
    let grid = grid_of(cfg)?;
    let omega = cfg.omega.materialize(&grid);
    let family = WeightFamily::new(p1, omega, None)?;
    let opts = cfg.solve_opts();
    let rep: AsymptoticsReport = if p1 > 0.0 {
        superlinear_asymptotics(&family, &grid, &cfg.s_list, &opts)?
    } else {
        sublinear_asymptotics(&family, &grid, &cfg.s_list, &opts)?
    };

    let rows: Vec<Vec<String>> = rep
        .rows
        .iter()
        .map(|r| {
            vec![
                fmt_f64(r.s),
                fmt_f64(r.energy_over_s),
                fmt_f64(r.norm_s),
                fmt_f64(r.l2_gap),
                fmt_f64(r.sup_norm),
                fmt_opt(r.t_s),
                fmt_opt(r.a_const),
            ]
        })
        .collect();
    let table = format!("asymptotics{tag}.csv");
    write_csv(
        &cfg.out_dir,
        &table,
        &[
            "s",
            "energy_over_s",
            "norm_s",
            "l2_gap",
            "sup_norm",
            "t_s",
            "a_const",
        ],
        &rows,
    )?;
    bundle.record_table(&table);

    let params = json!({"p1": p1, "n": cfg.n});
    let check_rows: Vec<Vec<String>> = rep
        .checks
        .iter()
        .map(|c| {
            bundle.record_check(c.pass);
            check_row(c, &params)
        })
        .collect();
    let checks_table = format!("asymptotics{tag}_checks.csv");
    write_csv(&cfg.out_dir, &checks_table, &CHECK_HEADER, &check_rows)?;
    bundle.record_table(&checks_table);

    let limit_table = format!("solution_limit{tag}.csv");
    write_csv(
        &cfg.out_dir,
        &limit_table,
        &["midpoint", "value"],
        &solution_rows(&rep.limit.solution),
    )?;
    bundle.record_table(&limit_table);
    Ok(())
}

// ---------------------------------------------------------------------------
// verify

fn verify_cmd(cfg: &Resolved, bundle: &mut Bundle) -> Result<(), Failure> {
    let names: Vec<&str> = match &cfg.check {
        Some(c) => vec![c.as_str()],
        None => CHECK_NAMES.to_vec(),
    };
    for name in names {
        let t0 = Instant::now();
        verify_one(cfg, bundle, name)?;
        bundle.record_stage(&format!("verify_{}", name.replace('-', "_")), t0);
    }
    Ok(())
}

fn raw_row(
    name: &str,
    params: &serde_json::Value,
    lhs: f64,
    rhs: f64,
    margin: f64,
    pass: bool,
) -> Vec<String> {
    vec![
        name.to_string(),
        params.to_string(),
        fmt_f64(lhs),
        fmt_f64(rhs),
        fmt_f64(margin),
        pass.to_string(),
    ]
}

fn verify_one(cfg: &Resolved, bundle: &mut Bundle, check: &str) -> Result<(), Failure> {
    let grid = grid_of(cfg)?;
    let table = format!("verify_{}.csv", check.replace('-', "_"));
    let mut rows: Vec<Vec<String>> = Vec::new();

    match check {
        "hypotheses" => {
            let family = WeightFamily::new(cfg.p1, cfg.omega.materialize(&grid), None)?;
            let rep = hypothesis_check(&family, &cfg.s_list, None)?;
            let params = json!({"p1": cfg.p1, "omega": cfg.omega.spec_string()});
            bundle.record_check(rep.pass);
            rows.push(check_row(&rep, &params));
        }
        "expansion" => {
            // Fixed profiles in the normalized coordinate of the interval.
            let profiles: [(&str, fn(f64) -> f64); 3] = [
                ("tent", |t| 1.0 - t.abs()),
                ("parabola", |t| 1.0 - t * t),
                ("half_cosine", |t| (std::f64::consts::FRAC_PI_2 * t).cos()),
            ];
            let (a, b) = (grid.a, grid.b);
            for (name, profile) in profiles {
                let u = DiscreteFunction::from_fn(&grid, |x| {
                    profile((2.0 * x - a - b) / (b - a))
                });
                let rep = expansion_check(&grid, &u, &cfg.s_list)?;
                let pass = rep.slope >= 1.6;
                bundle.record_check(pass);
                rows.push(raw_row(
                    "expansion_slope",
                    &json!({"profile": name, "n": cfg.n}),
                    rep.slope,
                    1.6,
                    rep.slope - 1.6,
                    pass,
                ));
            }
        }
        "diaz-saa" => {
            let el = assemble_log_laplacian(&grid);
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            for i in 0..100 {
                let (w1, w2) = random_positive_pair(&grid, &mut rng);
                let rep = diaz_saa_check(&el, &w1, &w2)?;
                bundle.record_check(rep.pass);
                rows.push(check_row(&rep, &json!({"i": i, "seed": cfg.seed})));
            }
        }
        "log-sobolev" => {
            let el = assemble_log_laplacian(&grid);
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            for i in 0..100 {
                let u = random_function(&grid, &mut rng);
                let rep = log_sobolev_check(&el, &u)?;
                bundle.record_check(rep.pass);
                rows.push(check_row(&rep, &json!({"i": i, "seed": cfg.seed})));
            }
        }
        "frac-sobolev" => {
            let s = cfg.s_list[0];
            let es = assemble_fractional(&grid, s)?;
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            for i in 0..100 {
                let u = random_function(&grid, &mut rng);
                let rep = frac_sobolev_check(&es, &u)?;
                bundle.record_check(rep.pass);
                rows.push(check_row(&rep, &json!({"i": i, "s": s, "seed": cfg.seed})));
            }
        }
        "pohozaev" => {
            let lambdas = match cfg.lambda {
                Some(l) => vec![l],
                None => vec![1.0, -1.0],
            };
            for lambda in lambdas {
                let (prob, rep) = solve_log_problem(cfg, lambda)?;
                let check = pohozaev_residual(&prob, &rep.solution)?;
                bundle.record_check(check.pass);
                rows.push(check_row(&check, &json!({"lambda": lambda, "n": cfg.n})));
            }
        }
        "boundary" => {
            let lambda = match cfg.lambda {
                Some(l) if l < 0.0 => l,
                _ => -1.0,
            };
            let (_, rep) = solve_log_problem(cfg, lambda)?;
            let (slope, scale) = boundary_rate_fit(&rep.solution)?;
            let pass = (0.85..=1.15).contains(&slope);
            bundle.record_check(pass);
            rows.push(raw_row(
                "boundary_rate",
                &json!({"lambda": lambda, "n": cfg.n, "scale": scale}),
                slope,
                1.0,
                slope - 1.0,
                pass,
            ));
        }
        "obstruction" => {
            // At the threshold the interior side of the integral identity
            // turns nonpositive against a positive boundary term; the check
            // passes when that contradiction is detected.
            let omega = cfg.omega.materialize(&grid);
            let prob = LogProblem::new(&grid, 4.0, omega, cfg.omega.derivative(&grid))?;
            let (a, b) = (grid.a, grid.b);
            let bump = DiscreteFunction::from_fn(&grid, |x| {
                let t = (2.0 * x - a - b) / (b - a);
                1.0 - t * t
            });
            let rep = critical_obstruction_check(&prob, &bump)?;
            let detected = !rep.pass;
            bundle.record_check(detected);
            rows.push(raw_row(
                "obstruction_detected",
                &json!({"lambda": 4.0, "n": cfg.n}),
                rep.lhs,
                rep.rhs,
                rep.margin,
                detected,
            ));
        }
        other => {
            return Err(Failure::Lib(loglap::Error::Usage(format!(
                "unknown check {other:?}"
            ))))
        }
    }

    write_csv(&cfg.out_dir, &table, &CHECK_HEADER, &rows)?;
    bundle.record_table(&table);
    Ok(())
}

// ---------------------------------------------------------------------------
// all

fn all_cmd(cfg: &Resolved, bundle: &mut Bundle) -> Result<(), Failure> {
    staged(cfg, bundle, "constants", constants_cmd)?;
    staged(cfg, bundle, "eigen", eigen_cmd)?;

    let lambda_mag = cfg.lambda.map(f64::abs).unwrap_or(1.0);
    staged(cfg, bundle, "solve_log", |c, b| {
        let pos = solve_log_one(c, b, lambda_mag, "_pos")?;
        let neg = solve_log_one(c, b, -lambda_mag, "_neg")?;
        write_csv(&c.out_dir, "solve_log.csv", &SOLVE_LOG_HEADER, &[pos, neg])?;
        b.record_table("solve_log.csv");
        Ok(())
    })?;

    let p1_mag = cfg.p1.abs();
    staged(cfg, bundle, "asymptotics_super", |c, b| {
        asymptotics_one(c, b, p1_mag, "_super")
    })?;
    staged(cfg, bundle, "asymptotics_sub", |c, b| {
        asymptotics_one(c, b, -p1_mag, "_sub")
    })?;

    verify_cmd(cfg, bundle)
}
