//! Numerical verification of the identities, inequalities, and small-order
//! limits that the solutions and forms are predicted to satisfy: the
//! integral identity with its boundary term, the nonexistence obstruction
//! at and beyond the critical threshold, hidden convexity, the two
//! Sobolev-type inequalities, hypothesis audits for the weight family, and
//! the small-order solution asymptotics in both regimes.

use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;

use crate::constants::{
    dimension_constants, ell, frac_constants, linf_bound_frac, validate_schedule,
};
use crate::error::{Error, Result};
use crate::forms::{
    assemble_log_kernel, log_log_slope, ExpansionReport, FormKind, SymmetricForm,
};
use crate::grid::{xlnx, DiscreteFunction, Grid1D};
use crate::problem::{FracProblem, LogProblem, LogRegime, WeightFamily};
use crate::solve::{
    default_init_frac, default_init_log, energy_frac, energy_log, nehari_project_frac,
    nehari_project_log, solve_frac, solve_sublinear, solve_superlinear, SolveOpts, SolveReport,
};
use crate::spectral::smallest_eig;

/// One verified statement: the two sides that were compared, their margin,
/// and whether the comparison passed, with free-form context.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
    pub context: Vec<(String, String)>,
}

impl CheckReport {
    fn new(name: &str, lhs: f64, rhs: f64, margin: f64, pass: bool) -> CheckReport {
        CheckReport {
            name: name.into(),
            lhs,
            rhs,
            margin,
            pass,
            context: Vec::new(),
        }
    }

    fn with(mut self, key: &str, value: String) -> CheckReport {
        self.context.push((key.into(), value));
        self
    }
}

const BOUNDARY_FIT_CELLS: usize = 8;
const RATE_FIT_CELLS: usize = 16;

/// Boundary functional 2(c_a·(−a) + c_b·b), where c_a, c_b are least-squares
/// coefficients of the model u² ≈ c·ℓ(dist(·, ∂Ω)) over the outermost cells
/// of each side.
pub fn boundary_term(u: &DiscreteFunction) -> Result<f64> {
    let grid = &u.grid;
    if grid.n < 2 * BOUNDARY_FIT_CELLS {
        return Err(Error::Usage(format!(
            "boundary fit needs at least {} cells",
            2 * BOUNDARY_FIT_CELLS
        )));
    }
    let fit = |idx: Box<dyn Iterator<Item = usize>>| -> Result<f64> {
        let mut num = 0.0;
        let mut den = 0.0;
        for i in idx {
            let l = ell(grid.delta[i])?;
            num += l * u.values[i] * u.values[i];
            den += l * l;
        }
        Ok(num / den)
    };
    let c_left = fit(Box::new(0..BOUNDARY_FIT_CELLS))?;
    let c_right = fit(Box::new((grid.n - BOUNDARY_FIT_CELLS)..grid.n))?;
    Ok(2.0 * (c_left * (-grid.a) + c_right * grid.b))
}

/// Least-squares fit of ln u against ln ℓ^{1/2}(dist(·, ∂Ω)) over the
/// outermost cells of both sides.  Returns (slope, prefactor); a solution
/// with the predicted boundary behaviour shows slope ≈ 1.
pub fn boundary_rate_fit(u: &DiscreteFunction) -> Result<(f64, f64)> {
    let grid = &u.grid;
    if grid.n < 2 * RATE_FIT_CELLS {
        return Err(Error::Usage(format!(
            "rate fit needs at least {} cells",
            2 * RATE_FIT_CELLS
        )));
    }
    let mut pts = Vec::with_capacity(2 * RATE_FIT_CELLS);
    for i in (0..RATE_FIT_CELLS).chain((grid.n - RATE_FIT_CELLS)..grid.n) {
        let v = u.values[i];
        if !(v > 0.0) {
            return Err(Error::Usage(format!(
                "rate fit needs positive values near the boundary (cell {i} has {v})"
            )));
        }
        pts.push((0.5 * ell(grid.delta[i])?.ln(), v.ln()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    Ok((slope, intercept.exp()))
}

/// Interior side of the integral identity:
/// N∫(2F(x,u) − u f(x,u)) + 2∫x·∂F/∂x + 2‖u‖₂².
fn pohozaev_interior(prob: &LogProblem, u: &DiscreteFunction) -> Result<f64> {
    let h = u.h();
    let mut bulk = 0.0;
    for (i, &v) in u.values.iter().enumerate() {
        bulk += 2.0 * prob.big_f_at(i, v) - v * prob.f_at(i, v);
    }
    let fx_term = if prob.omega_prime.is_some() {
        let mut acc = 0.0;
        for (i, &v) in u.values.iter().enumerate() {
            acc += prob.grid.midpoints[i] * prob.big_f_x_at(i, v)?;
        }
        2.0 * h * acc
    } else if prob.omega_is_constant() {
        0.0
    } else {
        return Err(Error::Usage(
            "the identity with a varying weight needs the weight derivative".into(),
        ));
    };
    Ok(h * bulk + fx_term + 2.0 * u.l2_norm_sq())
}

/// Integral identity audit for a computed solution: the interior side must
/// match the fitted boundary term.  The boundary fit is first-order in the
/// mesh, so the tolerance is a declared 25% of the larger side.
pub fn pohozaev_residual(prob: &LogProblem, u: &DiscreteFunction) -> Result<CheckReport> {
    let lhs = pohozaev_interior(prob, u)?;
    let rhs = boundary_term(u)?;
    let margin = lhs - rhs;
    let pass = margin.abs() <= 0.25 * lhs.abs().max(rhs.abs()) + 1e-12;
    Ok(CheckReport::new("pohozaev", lhs, rhs, margin, pass)
        .with("lambda", format!("{}", prob.lambda))
        .with("n", format!("{}", u.n())))
}

/// At or beyond the critical threshold the interior side is nonpositive for
/// any nontrivial candidate while the boundary side stays positive, so the
/// identity cannot hold; `pass` is false exactly when that sign
/// contradiction manifests.
pub fn critical_obstruction_check(
    prob: &LogProblem,
    u: &DiscreteFunction,
) -> Result<CheckReport> {
    let lhs = pohozaev_interior(prob, u)?;
    let rhs = boundary_term(u)?;
    let critical = prob.regime() == LogRegime::CriticalOrSupercritical;
    let contradiction = critical && !u.is_zero() && lhs <= 0.0 && rhs > 1e-12;
    let report = CheckReport::new(
        "critical_obstruction",
        lhs,
        rhs,
        rhs - lhs,
        !contradiction,
    )
    .with("lambda", format!("{}", prob.lambda))
    .with(
        "note",
        if contradiction {
            "interior side nonpositive against a positive boundary term".into()
        } else if critical {
            "no contradiction detected for this candidate".into()
        } else {
            "subcritical parameter, identity is consistent".into()
        },
    );
    Ok(report)
}

fn check_positive_pair(w1: &DiscreteFunction, w2: &DiscreteFunction) -> Result<()> {
    if w1.n() != w2.n() {
        return Err(Error::Usage("pair on different grids".into()));
    }
    if !(w1.min_value() > 0.0) || !(w2.min_value() > 0.0) {
        return Err(Error::Domain(
            "comparison pair must be strictly positive".into(),
        ));
    }
    Ok(())
}

/// Hidden-convexity comparison for a strictly positive pair:
/// ⟨w1, (w1²−w2²)/w1⟩_L − ⟨w2, (w1²−w2²)/w2⟩_L ≥ 0.
pub fn diaz_saa_check(
    el: &SymmetricForm,
    w1: &DiscreteFunction,
    w2: &DiscreteFunction,
) -> Result<CheckReport> {
    check_positive_pair(w1, w2)?;
    let mut ratio: f64 = 0.0;
    for (a, b) in w1.values.iter().zip(&w2.values) {
        ratio = ratio.max(a / b).max(b / a);
    }
    if ratio > 1e6 {
        return Err(Error::Domain(format!(
            "pair ratio {ratio:.3e} too extreme for a stable comparison"
        )));
    }
    let grid = &w1.grid;
    let diff: Vec<f64> = w1
        .values
        .iter()
        .zip(&w2.values)
        .map(|(a, b)| a * a - b * b)
        .collect();
    let t1 = DiscreteFunction {
        grid: Arc::clone(grid),
        values: diff.iter().zip(&w1.values).map(|(d, w)| d / w).collect(),
    };
    let t2 = DiscreteFunction {
        grid: Arc::clone(grid),
        values: diff.iter().zip(&w2.values).map(|(d, w)| d / w).collect(),
    };
    let lhs = el.bilin(w1, &t1);
    let rhs = el.bilin(w2, &t2);
    let margin = lhs - rhs;
    Ok(
        CheckReport::new("diaz_saa", lhs, rhs, margin, margin >= -1e-10)
            .with("max_ratio", format!("{ratio:.6e}")),
    )
}

/// Samples θ ↦ Φ(θ) = ½⟨√v_θ, √v_θ⟩_L along the segment
/// v_θ = (1−θ)w1² + θw2², together with the exact derivative
/// Φ′(θ) = ½⟨√v_θ, (w2²−w1²)/√v_θ⟩_L.  Convexity of Φ is the hidden
/// convexity of the form.
pub fn ray_convexity_profile(
    el: &SymmetricForm,
    w1: &DiscreteFunction,
    w2: &DiscreteFunction,
    theta_list: &[f64],
) -> Result<Vec<(f64, f64, f64)>> {
    check_positive_pair(w1, w2)?;
    let grid = &w1.grid;
    theta_list
        .iter()
        .map(|&theta| {
            if !(0.0..=1.0).contains(&theta) {
                return Err(Error::Domain(format!(
                    "segment parameter {theta} outside [0, 1]"
                )));
            }
            let sq: Vec<f64> = w1
                .values
                .iter()
                .zip(&w2.values)
                .map(|(a, b)| ((1.0 - theta) * a * a + theta * b * b).sqrt())
                .collect();
            let root = DiscreteFunction {
                grid: Arc::clone(grid),
                values: sq.clone(),
            };
            let tangent = DiscreteFunction {
                grid: Arc::clone(grid),
                values: w1
                    .values
                    .iter()
                    .zip(&w2.values)
                    .zip(&sq)
                    .map(|((a, b), r)| (b * b - a * a) / r)
                    .collect(),
            };
            Ok((
                theta,
                0.5 * el.quad(&root),
                0.5 * el.bilin(&root, &tangent),
            ))
        })
        .collect()
}

/// Logarithmic Sobolev inequality with the sharp constant:
/// ⟨u,u⟩_L + (4/N) ln‖u‖₂ ‖u‖₂² + a_N ‖u‖₂² ≥ (4/N)∫u² ln|u|.
pub fn log_sobolev_check(el: &SymmetricForm, u: &DiscreteFunction) -> Result<CheckReport> {
    if u.is_zero() {
        return Err(Error::Domain(
            "the inequality is trivial for the zero function".into(),
        ));
    }
    let a_n = dimension_constants(1)?.a_n;
    let l2 = u.l2_norm_sq();
    let lhs = el.quad(u) + 4.0 * u.l2_norm().ln() * l2 + a_n * l2;
    let rhs = 4.0 * u.integral_u2_ln_u();
    let margin = lhs - rhs;
    Ok(CheckReport::new(
        "log_sobolev",
        lhs,
        rhs,
        margin,
        margin >= -1e-9,
    ))
}

/// Fractional Sobolev inequality with the sharp constant:
/// κ_{N,s}⟨u,u⟩_s ≥ ‖u‖²_{2*_s}.
pub fn frac_sobolev_check(es: &SymmetricForm, u: &DiscreteFunction) -> Result<CheckReport> {
    if es.kind != FormKind::Fractional {
        return Err(Error::Usage(
            "the fractional inequality needs a fractional form".into(),
        ));
    }
    if u.is_zero() {
        return Err(Error::Domain(
            "the inequality is trivial for the zero function".into(),
        ));
    }
    let s = es.s.expect("fractional form carries its order");
    let fc = frac_constants(1, s)?;
    let lhs = fc.kappa_ns * es.quad(u);
    let rhs = u.lp_norm(fc.two_star).powi(2);
    let margin = lhs - rhs;
    Ok(
        CheckReport::new("frac_sobolev", lhs, rhs, margin, margin >= -1e-9)
            .with("s", format!("{s}")),
    )
}

/// Small-order expansion of the weighted power integral:
/// ∫a(s)|u|^{p(s)} = ‖u‖₂² + s(∫ω u² + p1 ∫u² ln|u|) + O(s²).
pub fn weighted_expansion_check(
    family: &WeightFamily,
    u: &DiscreteFunction,
    s_list: &[f64],
) -> Result<ExpansionReport> {
    validate_schedule(s_list, 1, 0.25)?;
    let h = u.h();
    let base = u.l2_norm_sq();
    let mut deriv = 0.0;
    for (w, &v) in family.omega.values.iter().zip(&u.values) {
        deriv += w * v * v + family.p1 * v * xlnx(v);
    }
    deriv *= h;
    let rows: Vec<(f64, f64)> = s_list
        .iter()
        .map(|&s| {
            let a = family.a_of_s(s)?;
            let p = family.p_of_s(s);
            let mut val = 0.0;
            for (ai, &v) in a.values.iter().zip(&u.values) {
                val += ai * v.abs().powf(p);
            }
            Ok((s, (h * val - base - s * deriv).abs()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExpansionReport {
        slope: log_log_slope(&rows),
        rows,
    })
}

/// Audits the standing hypotheses on the weight family along a schedule:
/// normalization at s = 0, bounded norm brackets, finite weight slope,
/// the uniform bound on ‖a(s)‖_∞^{1/s}, and the integrability window for
/// β(s).  Failures are reported, not thrown; `beta_override` substitutes a
/// different integrability exponent to probe the window.
pub fn hypothesis_check(
    family: &WeightFamily,
    s_list: &[f64],
    beta_override: Option<&(dyn Fn(f64) -> f64 + Sync)>,
) -> Result<CheckReport> {
    validate_schedule(s_list, 1, 0.25)?;
    let m_a = family.m_a();
    let mut min_window_margin = f64::INFINITY;
    let mut window_ok = true;
    let mut bracket_lo = f64::INFINITY;
    let mut bracket_hi = f64::NEG_INFINITY;
    let mut sup_ratio = f64::NEG_INFINITY;
    for &s in s_list {
        let floor = family.beta_floor(s)?;
        let beta = match beta_override {
            Some(f) => f(s),
            None => family.beta_of_s(s)?,
        };
        let margin = beta - floor;
        min_window_margin = min_window_margin.min(margin);
        if !(margin > 0.0) {
            window_ok = false;
        }
        let p = family.p_of_s(s);
        let v = family.ln_weight_norm(s, beta)? / (p - 2.0);
        bracket_lo = bracket_lo.min(v.exp());
        bracket_hi = bracket_hi.max(v.exp());
        // ‖a(s)‖_∞^{1/s} against its uniform bound.
        let sup_a = family.a_of_s(s)?.values.iter().fold(0.0f64, |m, &x| m.max(x));
        sup_ratio = sup_ratio.max((sup_a.ln() / s).exp());
    }
    let bracket_ok = bracket_lo >= 1e-6 && bracket_hi <= 1e6;
    let sup_ok = sup_ratio <= m_a * (1.0 + 1e-12);
    let omega_sup = family.omega_sup();
    let pass = window_ok && bracket_ok && sup_ok && omega_sup.is_finite();
    Ok(CheckReport::new(
        "hypotheses",
        min_window_margin,
        0.0,
        min_window_margin,
        pass,
    )
    .with("normalization_at_zero", "exact by construction".into())
    .with(
        "norm_bracket",
        format!("[{bracket_lo:.6e}, {bracket_hi:.6e}] ok={bracket_ok}"),
    )
    .with("weight_slope_sup", format!("{omega_sup:.6e}"))
    .with(
        "sup_norm_power",
        format!("max={sup_ratio:.12e} bound={m_a:.12e} ok={sup_ok}"),
    )
    .with(
        "integrability_window",
        format!("min margin={min_window_margin:.6e} ok={window_ok}"),
    ))
}

/// |r_s − r_0| along the schedule: the fractional ray projection of a fixed
/// profile converges to the logarithmic one of the induced limit problem.
pub fn projection_limit_gaps(
    family: &WeightFamily,
    grid: &Arc<Grid1D>,
    s_list: &[f64],
    w: &DiscreteFunction,
) -> Result<Vec<f64>> {
    validate_schedule(s_list, 1, 0.25)?;
    let prob0 = LogProblem::new(grid, family.p1, family.omega.clone(), None)?;
    let (r0, _) = nehari_project_log(&prob0, w)?;
    s_list
        .iter()
        .map(|&s| {
            let fp = FracProblem::new(grid, s, family.p_of_s(s), family.a_of_s(s)?)?;
            let (rs, _) = nehari_project_frac(&fp, w)?;
            Ok((rs - r0).abs())
        })
        .collect()
}

/// One scheduled order of a small-order solution study.
#[derive(Debug, Clone)]
pub struct AsymptoticsRow {
    pub s: f64,
    /// E_s(u_s)/s, converging to the limit energy.
    pub energy_over_s: f64,
    /// ⟨u_s, u_s⟩_s^{1/2}.
    pub norm_s: f64,
    /// ‖u_s − u_0‖₂ after sign alignment.
    pub l2_gap: f64,
    pub sup_norm: f64,
    /// Eigenfunction ray parameter of the comparison candidate
    /// (sublinear studies only).
    pub t_s: Option<f64>,
    /// Explicit small-order floor constant (sublinear studies only).
    pub a_const: Option<f64>,
}

/// Full outcome of a small-order study: the limit solve, the per-order
/// rows, and the derived convergence checks.
#[derive(Debug)]
pub struct AsymptoticsReport {
    pub limit: SolveReport,
    pub rows: Vec<AsymptoticsRow>,
    pub checks: Vec<CheckReport>,
}

fn decreasing_check(name: &str, errs: &[f64]) -> CheckReport {
    let pass = errs.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let first = errs.first().copied().unwrap_or(f64::NAN);
    let last = errs.last().copied().unwrap_or(f64::NAN);
    let shown: Vec<String> = errs.iter().map(|e| format!("{e:.3e}")).collect();
    CheckReport::new(name, last, first, first - last, pass)
        .with("sequence", shown.join(", "))
}

fn align_to(u: DiscreteFunction, anchor: &DiscreteFunction) -> DiscreteFunction {
    if u.dot(anchor) < 0.0 {
        u.scale(-1.0)
    } else {
        u
    }
}

/// Small-order study in the superlinear regime (0 < p1 < 4): solves the
/// weighted fractional problems along the schedule and the logarithmic
/// limit problem, then checks energy, norm, and profile convergence, the
/// uniform Nehari floor, and the uniform energy bound.
pub fn superlinear_asymptotics(
    family: &WeightFamily,
    grid: &Arc<Grid1D>,
    s_list: &[f64],
    opts: &SolveOpts,
) -> Result<AsymptoticsReport> {
    if !(family.p1 > 0.0 && family.p1 < 4.0) {
        return Err(Error::Usage(format!(
            "superlinear study needs 0 < p1 < 4, got {}",
            family.p1
        )));
    }
    validate_schedule(s_list, 2, 0.25)?;
    let prob0 = LogProblem::new(grid, family.p1, family.omega.clone(), None)?;
    let limit = solve_superlinear(&prob0, &default_init_log(&prob0)?, opts)?;
    let u0 = &limit.solution;
    let e_form = assemble_log_kernel(grid);
    let cap = 4.0 * e_form.quad(u0).max(1.0);
    let m_floor = family.m_bound()?;

    struct Bundle {
        row: AsymptoticsRow,
        e_quad: f64,
    }
    let bundles: Vec<Bundle> = s_list
        .par_iter()
        .map(|&s| {
            let fp = FracProblem::new(grid, s, family.p_of_s(s), family.a_of_s(s)?)?;
            let rep = solve_frac(&fp, &default_init_frac(&fp)?, opts)?;
            let us = align_to(rep.solution, u0);
            Ok(Bundle {
                row: AsymptoticsRow {
                    s,
                    energy_over_s: rep.energy / s,
                    norm_s: fp.es.quad(&us).sqrt(),
                    l2_gap: us.l2_gap(u0),
                    sup_norm: us.sup_norm(),
                    t_s: None,
                    a_const: None,
                },
                e_quad: e_form.quad(&us),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let rows: Vec<AsymptoticsRow> = bundles.iter().map(|b| b.row.clone()).collect();
    let gaps: Vec<f64> = rows.iter().map(|r| r.l2_gap).collect();
    let e_errs: Vec<f64> = rows
        .iter()
        .map(|r| (r.energy_over_s - limit.energy).abs())
        .collect();
    let n_errs: Vec<f64> = rows
        .iter()
        .map(|r| (r.norm_s - u0.l2_norm()).abs())
        .collect();
    let min_norm = rows.iter().map(|r| r.norm_s).fold(f64::INFINITY, f64::min);
    let max_e = bundles.iter().map(|b| b.e_quad).fold(0.0f64, f64::max);

    let checks = vec![
        decreasing_check("l2_gap_decreasing", &gaps),
        decreasing_check("energy_rate_to_limit", &e_errs),
        decreasing_check("seminorm_to_mass_norm", &n_errs),
        CheckReport::new(
            "nehari_floor",
            min_norm,
            m_floor,
            min_norm - m_floor,
            min_norm >= m_floor,
        ),
        CheckReport::new(
            "uniform_energy_bound",
            max_e,
            cap,
            cap - max_e,
            max_e <= cap,
        ),
    ];
    Ok(AsymptoticsReport {
        limit,
        rows,
        checks,
    })
}

/// Small-order study in the sublinear regime (p1 < 0): solves the weighted
/// fractional problems and the logarithmic limit problem, then checks
/// profile convergence in several norms, the two-sided norm bracket from
/// the eigenfunction candidate, the explicit small-order floor, the
/// uniform sup-norm bound, and the uniform energy bound.
pub fn sublinear_asymptotics(
    family: &WeightFamily,
    grid: &Arc<Grid1D>,
    s_list: &[f64],
    opts: &SolveOpts,
) -> Result<AsymptoticsReport> {
    if !(family.p1 < 0.0) {
        return Err(Error::Usage(format!(
            "sublinear study needs p1 < 0, got {}",
            family.p1
        )));
    }
    validate_schedule(s_list, 2, 0.25)?;
    let prob0 = LogProblem::new(grid, family.p1, family.omega.clone(), None)?;
    let limit = solve_sublinear(&prob0, &default_init_log(&prob0)?, opts)?;
    let u0 = &limit.solution;
    let e_form = assemble_log_kernel(grid);
    let cap = 4.0 * e_form.quad(u0).max(1.0);
    let pair_l = smallest_eig(&prob0.el, &prob0.mass)?;
    let phi_l = pair_l.vector.abs();
    // Explicit floor constant from the limit eigenpair.
    let mut coupling = 0.0;
    for (w, &v) in family.omega.values.iter().zip(&phi_l.values) {
        coupling += w * v * v + family.p1 * v * xlnx(v);
    }
    coupling *= grid.h;
    let a_const =
        (1.0 + 2.0 * pair_l.value / family.p1 - (2.0 / family.p1) * coupling).exp();
    let floor = 0.9 * 0.5 * std::f64::consts::LN_2 * a_const;
    let sup_bound = linf_bound_frac(family.p1, family.m_a(), grid.diameter(), 1)?;
    let m_a = family.m_a();
    let measure = grid.measure();
    let limit_energy_at = |phi: &DiscreteFunction| energy_log(&prob0, phi);
    let phi_limit_energy = limit_energy_at(&phi_l);

    struct Bundle {
        row: AsymptoticsRow,
        e_quad: f64,
        norm_sq: f64,
        lower: f64,
        upper: f64,
        gap1: f64,
        gap4: f64,
        rate_err: f64,
    }
    let bundles: Vec<Bundle> = s_list
        .par_iter()
        .map(|&s| {
            let p = family.p_of_s(s);
            let fp = FracProblem::new(grid, s, p, family.a_of_s(s)?)?;
            let pair_s = smallest_eig(&fp.es, &fp.mass)?;
            let phi_s = pair_s.vector.abs();
            // Eigenfunction ray parameter in log space.
            let num = 2.0 * fp.weighted_power_integral(&phi_s);
            let den = p * pair_s.value * phi_s.l2_norm_sq();
            let t_s = ((num.ln() - den.ln()) / (2.0 - p)).exp();
            let rep = solve_frac(&fp, &default_init_frac(&fp)?, opts)?;
            let us = align_to(rep.solution, u0);
            let norm_sq = fp.es.quad(&us);
            let lower =
                (2.0 * p / (p - 2.0)) * energy_frac(&fp, &phi_s.scale(0.5 * t_s));
            let ln_cs = -0.5 * pair_s.value.ln() + ((2.0 - p) / (2.0 * p)) * measure.ln();
            let upper = ((2.0 / (2.0 - p)) * (s * m_a.ln() + p * ln_cs)).exp();
            let diff = us.add_scaled(-1.0, u0);
            let rate_err = (energy_frac(&fp, &phi_l) / s - phi_limit_energy).abs();
            Ok(Bundle {
                row: AsymptoticsRow {
                    s,
                    energy_over_s: rep.energy / s,
                    norm_s: norm_sq.sqrt(),
                    l2_gap: us.l2_gap(u0),
                    sup_norm: us.sup_norm(),
                    t_s: Some(t_s),
                    a_const: Some(a_const),
                },
                e_quad: e_form.quad(&us),
                norm_sq,
                lower,
                upper,
                gap1: diff.lp_norm(1.0),
                gap4: diff.lp_norm(4.0),
                rate_err,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let rows: Vec<AsymptoticsRow> = bundles.iter().map(|b| b.row.clone()).collect();
    let bracket_margin = bundles
        .iter()
        .map(|b| (b.norm_sq - b.lower).min(b.upper - b.norm_sq))
        .fold(f64::INFINITY, f64::min);
    let bracket_scale = bundles
        .iter()
        .map(|b| b.norm_sq.abs())
        .fold(1.0f64, f64::max);
    let last = bundles.last().expect("nonempty schedule");
    let max_sup = rows.iter().map(|r| r.sup_norm).fold(0.0f64, f64::max);
    let max_e = bundles.iter().map(|b| b.e_quad).fold(0.0f64, f64::max);

    let mut checks = vec![
        decreasing_check(
            "l1_gap_decreasing",
            &bundles.iter().map(|b| b.gap1).collect::<Vec<_>>(),
        ),
        decreasing_check(
            "l2_gap_decreasing",
            &rows.iter().map(|r| r.l2_gap).collect::<Vec<_>>(),
        ),
        decreasing_check(
            "l4_gap_decreasing",
            &bundles.iter().map(|b| b.gap4).collect::<Vec<_>>(),
        ),
        decreasing_check(
            "small_order_energy_limit",
            &bundles.iter().map(|b| b.rate_err).collect::<Vec<_>>(),
        ),
        CheckReport::new(
            "norm_bracket",
            bracket_margin,
            0.0,
            bracket_margin,
            bracket_margin >= -1e-9 * bracket_scale,
        ),
        CheckReport::new(
            "small_order_floor",
            last.norm_sq,
            floor,
            last.norm_sq - floor,
            last.norm_sq >= floor,
        ),
        CheckReport::new(
            "sup_norm_bound",
            max_sup,
            1.05 * sup_bound,
            1.05 * sup_bound - max_sup,
            max_sup <= 1.05 * sup_bound,
        ),
        CheckReport::new(
            "limit_sup_norm_bound",
            limit.sup_norm,
            1.05 * sup_bound,
            1.05 * sup_bound - limit.sup_norm,
            limit.sup_norm <= 1.05 * sup_bound,
        ),
        CheckReport::new(
            "uniform_energy_bound",
            max_e,
            cap,
            cap - max_e,
            max_e <= cap,
        ),
    ];
    for c in checks.iter_mut() {
        c.context.push(("p1".into(), format!("{}", family.p1)));
    }
    Ok(AsymptoticsReport {
        limit,
        rows,
        checks,
    })
}

/// Uniform sample in (−1, 1) per cell.
pub fn random_function(grid: &Arc<Grid1D>, rng: &mut impl Rng) -> DiscreteFunction {
    DiscreteFunction {
        grid: Arc::clone(grid),
        values: (0..grid.n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
    }
}

/// Strictly positive pair with cellwise ratio in [1/4, 4]: the base profile
/// is uniform in (0.5, 1.5) and the partner is a random multiple of it.
pub fn random_positive_pair(
    grid: &Arc<Grid1D>,
    rng: &mut impl Rng,
) -> (DiscreteFunction, DiscreteFunction) {
    let mut w1 = Vec::with_capacity(grid.n);
    let mut w2 = Vec::with_capacity(grid.n);
    for _ in 0..grid.n {
        let base: f64 = rng.gen_range(0.5..1.5);
        let ratio: f64 = rng.gen_range(0.25..4.0);
        w2.push(base);
        w1.push(base * ratio);
    }
    (
        DiscreteFunction {
            grid: Arc::clone(grid),
            values: w1,
        },
        DiscreteFunction {
            grid: Arc::clone(grid),
            values: w2,
        },
    )
}
