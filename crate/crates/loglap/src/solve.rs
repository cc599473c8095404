//! Energy minimization for both models.  The superlinear problems are
//! minimized over their natural constraint set by projected gradient
//! descent: each iterate steps along the negative mass-metric gradient and
//! is pulled back onto the constraint by the closed-form ray projection.
//! The sublinear problems are coercive and use plain Armijo descent.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{xlnx, DiscreteFunction};
use crate::problem::{FracProblem, FracRegime, LogProblem, LogRegime};
use crate::spectral::smallest_eig;

/// Tunables for the descent loops.
#[derive(Debug, Clone)]
pub struct SolveOpts {
    /// Euclidean gradient-norm target; `None` means 1e−9·√n.
    pub tol_grad: Option<f64>,
    /// Absolute tolerance on the constraint residual in the final report.
    pub tol_constraint: f64,
    pub max_iter: usize,
    pub armijo_init: f64,
    pub armijo_factor: f64,
    pub armijo_slope: f64,
    /// Attempt minimization even at or beyond the critical threshold.
    pub allow_critical: bool,
    /// Record the accepted energy at every iteration.
    pub record_trace: bool,
    /// Magnitude of the energy's constituent sums, calibrating the rounding
    /// floor of the line search.  The energy value itself is a poor proxy
    /// when it comes from cancellation of much larger terms; solvers raise
    /// this automatically where they know the term scale.
    pub energy_scale: f64,
}

impl Default for SolveOpts {
    fn default() -> SolveOpts {
        SolveOpts {
            tol_grad: None,
            tol_constraint: 1e-9,
            max_iter: 20_000,
            armijo_init: 1.0,
            armijo_factor: 0.5,
            armijo_slope: 1e-4,
            allow_critical: false,
            record_trace: false,
            energy_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignPattern {
    Nonnegative,
    Nonpositive,
    Mixed,
}

/// Outcome of a converged minimization.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solution: DiscreteFunction,
    pub energy: f64,
    /// Euclidean norm of the mass-metric gradient at the solution.
    pub grad_norm: f64,
    /// |⟨u,u⟩ − ∫ f(x,u) u| at the solution.
    pub constraint_residual: f64,
    pub iterations: usize,
    pub sign_pattern: SignPattern,
    pub sup_norm: f64,
    /// Distance from the energy identity that holds at critical points.
    pub energy_identity_gap: f64,
    pub energy_trace: Vec<f64>,
}

/// Total energy of the logarithmic model:
/// ½⟨u,u⟩_L − ½∫ω u² − (λ/4)∫u²(ln u² − 1).
pub fn energy_log(prob: &LogProblem, u: &DiscreteFunction) -> f64 {
    let quad = prob.el.quad(u);
    let h = u.h();
    let mut pot = 0.0;
    let mut ent = 0.0;
    for (w, &v) in prob.omega.values.iter().zip(&u.values) {
        pot += w * v * v;
        // u²(ln u² − 1) = 2u·(u ln|u|) − u² with the 0·ln 0 = 0 convention.
        ent += 2.0 * v * xlnx(v) - v * v;
    }
    0.5 * quad - 0.5 * h * pot - 0.25 * prob.lambda * h * ent
}

/// Mass-metric gradient of the logarithmic energy:
/// g = (K u)/h − ω u − λ u ln|u|.
pub fn grad_log(prob: &LogProblem, u: &DiscreteFunction) -> DiscreteFunction {
    let mut g = prob.el.apply(u);
    let h = u.h();
    for ((gi, &ui), wi) in g
        .values
        .iter_mut()
        .zip(&u.values)
        .zip(&prob.omega.values)
    {
        *gi = *gi / h - wi * ui - prob.lambda * xlnx(ui);
    }
    g
}

/// Constraint residual |⟨u,u⟩_L − ∫ω u² − λ∫u² ln|u||.
pub fn nehari_residual_log(prob: &LogProblem, u: &DiscreteFunction) -> f64 {
    let quad = prob.el.quad(u);
    let h = u.h();
    let mut rhs = 0.0;
    for (w, &v) in prob.omega.values.iter().zip(&u.values) {
        rhs += w * v * v + prob.lambda * v * xlnx(v);
    }
    (quad - h * rhs).abs()
}

/// Closed-form stationary ray parameter of the fibering map:
/// r = exp((⟨w,w⟩_L − ∫ω w² − λ∫w² ln|w|) / (λ‖w‖₂²)).
/// In the superlinear regime this is the ray maximum (the projection onto
/// the natural constraint); in the sublinear regime the ray minimum.
pub fn nehari_project_log(
    prob: &LogProblem,
    w: &DiscreteFunction,
) -> Result<(f64, DiscreteFunction)> {
    if w.is_zero() {
        return Err(Error::Domain(
            "cannot project the zero function onto the constraint set".into(),
        ));
    }
    let h = w.h();
    let mut pot = 0.0;
    for (om, &v) in prob.omega.values.iter().zip(&w.values) {
        pot += om * v * v;
    }
    let r = ((prob.el.quad(w) - h * pot - prob.lambda * w.integral_u2_ln_u())
        / (prob.lambda * w.l2_norm_sq()))
    .exp();
    if !r.is_finite() || r <= 0.0 {
        return Err(Error::NonConvergence {
            context: "ray projection produced a degenerate parameter".into(),
            last_residual: r,
        });
    }
    Ok((r, w.scale(r)))
}

/// A sampled point of the fibering map r ↦ energy(r·w).
#[derive(Debug, Clone, Copy)]
pub struct FiberingPoint {
    pub r: f64,
    pub value: f64,
    pub derivative: f64,
}

/// Samples the fibering map and its exact radial derivative
/// n′_w(r) = r[⟨w,w⟩_L − ∫ω w² − λ ln r ‖w‖₂² − λ∫w² ln|w|].
pub fn fibering_profile(
    prob: &LogProblem,
    w: &DiscreteFunction,
    r_list: &[f64],
) -> Result<Vec<FiberingPoint>> {
    if w.is_zero() {
        return Err(Error::Domain("fibering map of the zero function".into()));
    }
    let h = w.h();
    let mut pot = 0.0;
    for (om, &v) in prob.omega.values.iter().zip(&w.values) {
        pot += om * v * v;
    }
    let quad = prob.el.quad(w);
    let l2 = w.l2_norm_sq();
    let ent = w.integral_u2_ln_u();
    r_list
        .iter()
        .map(|&r| {
            if !(r > 0.0) {
                return Err(Error::Domain(format!(
                    "fibering parameter must be positive, got {r}"
                )));
            }
            Ok(FiberingPoint {
                r,
                value: energy_log(prob, &w.scale(r)),
                derivative: r
                    * (quad - h * pot - prob.lambda * r.ln() * l2 - prob.lambda * ent),
            })
        })
        .collect()
}

/// Energy of the weighted fractional model: ½⟨u,u⟩_s − (1/p)∫a|u|^p.
pub fn energy_frac(prob: &FracProblem, u: &DiscreteFunction) -> f64 {
    0.5 * prob.es.quad(u) - prob.weighted_power_integral(u) / prob.p
}

/// Mass-metric gradient g = (K_s u)/h − a |u|^{p−2} u.
pub fn grad_frac(prob: &FracProblem, u: &DiscreteFunction) -> DiscreteFunction {
    let mut g = prob.es.apply(u);
    let h = u.h();
    let pm1 = prob.p - 1.0;
    for ((gi, &ui), ai) in g.values.iter_mut().zip(&u.values).zip(&prob.a.values) {
        let power = if ui == 0.0 {
            0.0
        } else {
            ui.signum() * ui.abs().powf(pm1)
        };
        *gi = *gi / h - ai * power;
    }
    g
}

pub fn nehari_residual_frac(prob: &FracProblem, u: &DiscreteFunction) -> f64 {
    (prob.es.quad(u) - prob.weighted_power_integral(u)).abs()
}

/// Ray projection for the fractional model:
/// r = (⟨w,w⟩_s / ∫a|w|^p)^{1/(p−2)}.
pub fn nehari_project_frac(
    prob: &FracProblem,
    w: &DiscreteFunction,
) -> Result<(f64, DiscreteFunction)> {
    if w.is_zero() {
        return Err(Error::Domain(
            "cannot project the zero function onto the constraint set".into(),
        ));
    }
    let num = prob.es.quad(w);
    let den = prob.weighted_power_integral(w);
    if !(den > 0.0) {
        return Err(Error::Domain(
            "weighted power integral vanished during projection".into(),
        ));
    }
    let r = (num / den).powf(1.0 / (prob.p - 2.0));
    if !r.is_finite() || r <= 0.0 {
        return Err(Error::NonConvergence {
            context: "ray projection produced a degenerate parameter".into(),
            last_residual: r,
        });
    }
    Ok((r, w.scale(r)))
}

fn sign_pattern(u: &DiscreteFunction) -> SignPattern {
    let tol = 1e-12 * u.sup_norm().max(1.0);
    if u.min_value() >= -tol {
        SignPattern::Nonnegative
    } else if u.max_value() <= tol {
        SignPattern::Nonpositive
    } else {
        SignPattern::Mixed
    }
}

/// Shared Armijo descent driver.  `retract` maps a trial point back to the
/// feasible set (the identity for unconstrained problems); `energy` and
/// `grad` close over the problem.  Acceptance allows a rounding-level
/// plateau once the predicted decrease falls below the noise floor of the
/// energy evaluation.
fn descend(
    mut u: DiscreteFunction,
    opts: &SolveOpts,
    energy: &dyn Fn(&DiscreteFunction) -> f64,
    grad: &dyn Fn(&DiscreteFunction) -> DiscreteFunction,
    retract: &dyn Fn(&DiscreteFunction) -> Result<DiscreteFunction>,
) -> Result<(DiscreteFunction, usize, f64, Vec<f64>)> {
    let n = u.n() as f64;
    let h = u.h();
    let tol = opts.tol_grad.unwrap_or(1e-9 * n.sqrt());
    let mut trace = Vec::new();
    let mut e0 = energy(&u);
    if opts.record_trace {
        trace.push(e0);
    }
    let mut t_warm = opts.armijo_init;
    let mut gn = f64::INFINITY;
    for iter in 0..opts.max_iter {
        let g = grad(&u);
        let gn2: f64 = g.values.iter().map(|x| x * x).sum();
        gn = gn2.sqrt();
        if gn <= tol {
            return Ok((u, iter, gn, trace));
        }
        let mut t = t_warm;
        let mut accepted = false;
        for _ in 0..80 {
            let trial = u.add_scaled(-t, &g);
            if trial.is_zero() {
                t *= opts.armijo_factor;
                continue;
            }
            let candidate = retract(&trial)?;
            let ew = energy(&candidate);
            let decrease = opts.armijo_slope * t * h * gn2;
            let floor = 8.0 * f64::EPSILON * (opts.energy_scale.max(1.0) + e0.abs());
            let take = if decrease > floor {
                ew <= e0 - decrease
            } else if ew <= e0 + floor {
                // The predicted decrease is below the rounding floor of the
                // energy, so certify progress by the gradient instead: the
                // descent map contracts it near a minimum.
                let gw = grad(&candidate);
                let gwn = gw.values.iter().map(|x| x * x).sum::<f64>().sqrt();
                gwn <= gn * (1.0 - 1e-4) || gwn <= tol
            } else {
                false
            };
            if take {
                u = candidate;
                e0 = ew;
                t_warm = (2.0 * t).min(opts.armijo_init);
                accepted = true;
                break;
            }
            t *= opts.armijo_factor;
        }
        if !accepted {
            return Err(Error::NonConvergence {
                context: format!("line search stalled at iteration {iter}"),
                last_residual: gn,
            });
        }
        if opts.record_trace {
            trace.push(e0);
        }
    }
    Err(Error::NonConvergence {
        context: format!("energy descent hit the iteration cap {}", opts.max_iter),
        last_residual: gn,
    })
}

fn log_report(
    prob: &LogProblem,
    u: DiscreteFunction,
    iterations: usize,
    grad_norm: f64,
    trace: Vec<f64>,
) -> SolveReport {
    let energy = energy_log(prob, &u);
    let identity = (energy - 0.25 * prob.lambda * u.l2_norm_sq()).abs();
    SolveReport {
        energy,
        grad_norm,
        constraint_residual: nehari_residual_log(prob, &u),
        iterations,
        sign_pattern: sign_pattern(&u),
        sup_norm: u.sup_norm(),
        energy_identity_gap: identity,
        energy_trace: trace,
        solution: u,
    }
}

fn gate_log_regime(prob: &LogProblem, opts: &SolveOpts, want: LogRegime) -> Result<()> {
    match (prob.regime(), want) {
        (LogRegime::CriticalOrSupercritical, _) if !opts.allow_critical => {
            Err(Error::Regime(format!(
                "lambda = {} is at or beyond the critical threshold 4/N = 4; \
                 nonnegative nontrivial solutions do not exist there",
                prob.lambda
            )))
        }
        (LogRegime::CriticalOrSupercritical, _) => Ok(()),
        (have, w) if have == w => Ok(()),
        (LogRegime::Sublinear, LogRegime::Superlinear) => Err(Error::Usage(
            "problem is sublinear; use the global-descent solver".into(),
        )),
        _ => Err(Error::Usage(
            "problem is superlinear; use the constrained solver".into(),
        )),
    }
}

/// Minimizes the superlinear logarithmic energy over its natural constraint
/// by projected descent from `init`.
pub fn solve_superlinear(
    prob: &LogProblem,
    init: &DiscreteFunction,
    opts: &SolveOpts,
) -> Result<SolveReport> {
    gate_log_regime(prob, opts, LogRegime::Superlinear)?;
    let (_, start) = nehari_project_log(prob, init)?;
    let (u, iters, gn, trace) = descend(
        start,
        opts,
        &|u| energy_log(prob, u),
        &|u| grad_log(prob, u),
        &|w| nehari_project_log(prob, w).map(|(_, v)| v),
    )?;
    let report = log_report(prob, u, iters, gn, trace);
    if report.constraint_residual > opts.tol_constraint.max(1e-10 * report.energy.abs().max(1.0)) {
        return Err(Error::NonConvergence {
            context: "constraint residual did not settle".into(),
            last_residual: report.constraint_residual,
        });
    }
    Ok(report)
}

/// Minimizes the coercive sublinear logarithmic energy by plain descent.
pub fn solve_sublinear(
    prob: &LogProblem,
    init: &DiscreteFunction,
    opts: &SolveOpts,
) -> Result<SolveReport> {
    gate_log_regime(prob, opts, LogRegime::Sublinear)?;
    let (u, iters, gn, trace) = descend(
        init.clone(),
        opts,
        &|u| energy_log(prob, u),
        &|u| grad_log(prob, u),
        &|w| Ok(w.clone()),
    )?;
    Ok(log_report(prob, u, iters, gn, trace))
}

/// Minimizes the weighted fractional energy: projected descent for p > 2,
/// global descent for p < 2.
pub fn solve_frac(
    prob: &FracProblem,
    init: &DiscreteFunction,
    opts: &SolveOpts,
) -> Result<SolveReport> {
    // The landscape flattens linearly in s (the quadratic form tends to the
    // mass form and the nonlinearity to the identity), so the descent runs
    // on E_s/s: same minimizer, order-one curvature uniformly in s.
    let inv = 1.0 / prob.s;
    // The scaled energy is a small difference of sums whose terms carry the
    // factor 1/s, so the rounding floor of the line search is calibrated
    // from the term magnitude at the start, not from the energy value.
    let calibrated = |start: &DiscreteFunction| {
        let terms = 0.5 * prob.es.quad(start).abs()
            + prob.weighted_power_integral(start).abs() / prob.p;
        let mut o = opts.clone();
        o.energy_scale = o.energy_scale.max(inv * (start.n() as f64).sqrt() * terms);
        o
    };
    let (u, iters, gn, mut trace) = match prob.regime() {
        FracRegime::Superlinear => {
            let (_, start) = nehari_project_frac(prob, init)?;
            let o = calibrated(&start);
            descend(
                start,
                &o,
                &|u| inv * energy_frac(prob, u),
                &|u| grad_frac(prob, u).scale(inv),
                &|w| nehari_project_frac(prob, w).map(|(_, v)| v),
            )?
        }
        FracRegime::Sublinear => {
            let o = calibrated(init);
            descend(
                init.clone(),
                &o,
                &|u| inv * energy_frac(prob, u),
                &|u| grad_frac(prob, u).scale(inv),
                &|w| Ok(w.clone()),
            )?
        }
    };
    for e in trace.iter_mut() {
        *e *= prob.s;
    }
    let energy = energy_frac(prob, &u);
    let identity =
        (energy - (0.5 - 1.0 / prob.p) * prob.weighted_power_integral(&u)).abs();
    Ok(SolveReport {
        energy,
        grad_norm: gn * prob.s,
        constraint_residual: nehari_residual_frac(prob, &u),
        iterations: iters,
        sign_pattern: sign_pattern(&u),
        sup_norm: u.sup_norm(),
        energy_identity_gap: identity,
        energy_trace: trace,
        solution: u,
    })
}

/// First eigenfunction of the problem's form, made nonnegative, then either
/// projected onto the constraint (superlinear) or scaled so that its sup
/// norm is half the explicit solution bound (sublinear).
pub fn default_init_log(prob: &LogProblem) -> Result<DiscreteFunction> {
    let pair = smallest_eig(&prob.el, &prob.mass)?;
    let phi = pair.vector.abs();
    match prob.regime() {
        LogRegime::Superlinear => Ok(nehari_project_log(prob, &phi)?.1),
        LogRegime::Sublinear => {
            let bound = crate::constants::linf_bound_log(
                prob.lambda,
                prob.omega_sup(),
                prob.grid.measure(),
                1,
            )?;
            Ok(phi.scale(0.5 * bound / phi.sup_norm()))
        }
        LogRegime::CriticalOrSupercritical => Ok(phi),
    }
}

/// First eigenfunction of the fractional form, made nonnegative, projected
/// (superlinear) or normalized to unit sup norm (sublinear).
pub fn default_init_frac(prob: &FracProblem) -> Result<DiscreteFunction> {
    let pair = smallest_eig(&prob.es, &prob.mass)?;
    let phi = pair.vector.abs();
    match prob.regime() {
        FracRegime::Superlinear => Ok(nehari_project_frac(prob, &phi)?.1),
        FracRegime::Sublinear => Ok(phi.scale(1.0 / phi.sup_norm())),
    }
}

/// Outcome of repeated sublinear solves from independent random starts.
#[derive(Debug)]
pub struct MultistartReport {
    /// Largest pairwise mass-norm gap between |u| of converged runs; NaN
    /// when fewer than two runs converged.
    pub max_gap: f64,
    pub converged: usize,
    pub failed: usize,
    pub reports: Vec<Option<SolveReport>>,
}

/// Solves the sublinear problem from `k` random positive initial profiles
/// (independent cell values in [0.1, 2.0], seeded deterministically from
/// `seed` and the run index) and measures how far apart the results are.
pub fn multistart_uniqueness(
    prob: &LogProblem,
    k: usize,
    seed: u64,
    opts: &SolveOpts,
) -> Result<MultistartReport> {
    if prob.regime() != LogRegime::Sublinear {
        return Err(Error::Usage(
            "the uniqueness study applies to the sublinear regime".into(),
        ));
    }
    if k < 2 {
        return Err(Error::Usage("need at least two runs to compare".into()));
    }
    let reports: Vec<Option<SolveReport>> = (0..k)
        .into_par_iter()
        .map(|i| {
            let run_seed = seed.wrapping_add((i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let mut rng = ChaCha8Rng::seed_from_u64(run_seed);
            let values: Vec<f64> = (0..prob.grid.n)
                .map(|_| rng.gen_range(0.1..2.0))
                .collect();
            let init = DiscreteFunction {
                grid: std::sync::Arc::clone(&prob.grid),
                values,
            };
            solve_sublinear(prob, &init, opts).ok()
        })
        .collect();
    let solutions: Vec<DiscreteFunction> = reports
        .iter()
        .flatten()
        .map(|r| r.solution.abs())
        .collect();
    let converged = solutions.len();
    let mut max_gap = f64::NAN;
    if converged >= 2 {
        max_gap = 0.0;
        for i in 0..converged {
            for j in (i + 1)..converged {
                max_gap = max_gap.max(solutions[i].l2_gap(&solutions[j]));
            }
        }
    }
    Ok(MultistartReport {
        max_gap,
        converged,
        failed: k - converged,
        reports,
    })
}
