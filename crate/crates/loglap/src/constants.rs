//! Closed-form scalar constants for the logarithmic Laplacian and the
//! small-order fractional Laplacian: kernel normalizers, the zero-order
//! constant, sharp Sobolev-type constants, the critical exponent, the
//! boundary rate function, and explicit solution bounds.

use std::f64::consts::{LN_2, PI};

use crate::error::{Error, Result};
use crate::special::{digamma, gamma, ln_gamma, EULER_GAMMA};

/// Constants that depend only on the space dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionConstants {
    pub n_dim: u32,
    /// Kernel normalizer c_N = π^{−N/2} Γ(N/2).
    pub c_n: f64,
    /// Zero-order constant ρ_N = 2 ln 2 + ψ(N/2) − γ.
    pub rho_n: f64,
    /// Sharp constant in the logarithmic Sobolev inequality,
    /// a_N = (2/N) ln(Γ(N)/Γ(N/2)) − ln(4π) − 2ψ(N/2).
    pub a_n: f64,
    /// Limit of κ_{N,s}^{1/s} as s → 0⁺,
    /// κ_N = (1/4π) (Γ(N)/Γ(N/2))^{2/N} e^{−2ψ(N/2)}.
    pub kappa_n: f64,
}

/// Constants attached to the fractional Laplacian of order 2s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracConstants {
    pub n_dim: u32,
    pub s: f64,
    /// Kernel normalizer c_{N,s} = 2^{2s} π^{−N/2} s Γ((N+2s)/2) / Γ(1−s).
    pub c_ns: f64,
    /// Sharp fractional Sobolev constant κ_{N,s}.
    pub kappa_ns: f64,
    /// Critical exponent 2*_s = 2N/(N−2s).
    pub two_star: f64,
}

/// Rows of a κ_{N,s}^{1/s} convergence study, with the distance of the
/// final entry to the limit κ_N.
#[derive(Debug, Clone)]
pub struct KappaLimitReport {
    /// Pairs (s, κ_{N,s}^{1/s}) in schedule order.
    pub rows: Vec<(f64, f64)>,
    pub kappa_n: f64,
    pub final_gap: f64,
}

pub fn dimension_constants(n_dim: u32) -> Result<DimensionConstants> {
    if n_dim == 0 {
        return Err(Error::Domain(
            "space dimension must be a positive integer".into(),
        ));
    }
    let nf = f64::from(n_dim);
    let half = nf / 2.0;
    let c_n = PI.powf(-half) * gamma(half);
    let rho_n = 2.0 * LN_2 + digamma(half) - EULER_GAMMA;
    let a_n = (2.0 / nf) * (ln_gamma(nf) - ln_gamma(half)) - (4.0 * PI).ln() - 2.0 * digamma(half);
    let kappa_n =
        (0.25 / PI) * ((ln_gamma(nf) - ln_gamma(half)) * (2.0 / nf) - 2.0 * digamma(half)).exp();
    Ok(DimensionConstants {
        n_dim,
        c_n,
        rho_n,
        a_n,
        kappa_n,
    })
}

/// Natural log of κ_{N,s}, assembled from log-gamma terms so that callers
/// working near s = 0 can stay in log space.
pub fn ln_kappa_frac(n_dim: u32, s: f64) -> Result<f64> {
    check_frac_order(n_dim, s)?;
    let nf = f64::from(n_dim);
    Ok(-2.0 * s * LN_2 - s * PI.ln() + ln_gamma((nf - 2.0 * s) / 2.0)
        - ln_gamma((nf + 2.0 * s) / 2.0)
        + (2.0 * s / nf) * (ln_gamma(nf) - ln_gamma(nf / 2.0)))
}

pub fn frac_constants(n_dim: u32, s: f64) -> Result<FracConstants> {
    check_frac_order(n_dim, s)?;
    let nf = f64::from(n_dim);
    let c_ns = (2.0f64).powf(2.0 * s) * PI.powf(-nf / 2.0) * s * gamma((nf + 2.0 * s) / 2.0)
        / gamma(1.0 - s);
    let kappa_ns = ln_kappa_frac(n_dim, s)?.exp();
    let two_star = 2.0 * nf / (nf - 2.0 * s);
    Ok(FracConstants {
        n_dim,
        s,
        c_ns,
        kappa_ns,
        two_star,
    })
}

fn check_frac_order(n_dim: u32, s: f64) -> Result<()> {
    if n_dim == 0 {
        return Err(Error::Domain(
            "space dimension must be a positive integer".into(),
        ));
    }
    let upper = 1.0f64.min(f64::from(n_dim) / 2.0);
    if !(s > 0.0 && s < upper) || !s.is_finite() {
        return Err(Error::Domain(format!(
            "fractional order s = {s} must lie in (0, {upper})"
        )));
    }
    Ok(())
}

/// Evaluates κ_{N,s}^{1/s} along a decreasing schedule and reports the gap
/// of the last value to the limit κ_N.  The power is taken in log space,
/// which keeps the result accurate even for s near machine scale.
pub fn kappa_limit_check(n_dim: u32, s_list: &[f64]) -> Result<KappaLimitReport> {
    if s_list.is_empty() {
        return Err(Error::Usage("empty schedule of fractional orders".into()));
    }
    validate_schedule(s_list, 1, 0.25)?;
    let kappa_n = dimension_constants(n_dim)?.kappa_n;
    let rows = s_list
        .iter()
        .map(|&s| Ok((s, (ln_kappa_frac(n_dim, s)? / s).exp())))
        .collect::<Result<Vec<_>>>()?;
    let final_gap = (rows.last().unwrap().1 - kappa_n).abs();
    Ok(KappaLimitReport {
        rows,
        kappa_n,
        final_gap,
    })
}

/// Boundary rate function ℓ(r) = −1/ln(min{r, 1/10}), extended continuously
/// by ℓ(0) = 0.
pub fn ell(r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::Domain(format!(
            "the rate function is defined for nonnegative arguments, got {r}"
        )));
    }
    if r == 0.0 {
        return Ok(0.0);
    }
    Ok(-1.0 / r.min(0.1).ln())
}

/// Explicit sup-norm bound for nonnegative solutions in the sublinear
/// regime: exp((ω_sup + 2(c_N |Ω| − ρ_N)) / λ) for λ < 0.
pub fn linf_bound_log(
    lambda: f64,
    omega_sup: f64,
    domain_measure: f64,
    n_dim: u32,
) -> Result<f64> {
    if !(lambda < 0.0) {
        return Err(Error::Domain(format!(
            "the sup-norm bound applies to the sublinear regime only (lambda = {lambda} must be negative)"
        )));
    }
    if !(omega_sup >= 0.0) {
        return Err(Error::Domain("omega_sup must be nonnegative".into()));
    }
    if !(domain_measure > 0.0) {
        return Err(Error::Domain("domain measure must be positive".into()));
    }
    let d = dimension_constants(n_dim)?;
    Ok(((omega_sup + 2.0 * (d.c_n * domain_measure - d.rho_n)) / lambda).exp())
}

/// Uniform sup-norm bound for the weighted fractional family with sublinear
/// growth: M_a (R² e^{1/2 − ρ_N})^{−1/p1} with R = 2 diam(Ω).
pub fn linf_bound_frac(p1: f64, m_a: f64, domain_diameter: f64, n_dim: u32) -> Result<f64> {
    if !(p1 < 0.0) {
        return Err(Error::Domain(format!(
            "the fractional sup-norm bound requires a sublinear family (p1 = {p1} must be negative)"
        )));
    }
    if !(m_a > 0.0) || !(domain_diameter > 0.0) {
        return Err(Error::Domain(
            "weight bound and domain diameter must be positive".into(),
        ));
    }
    let rho_n = dimension_constants(n_dim)?.rho_n;
    let r = 2.0 * domain_diameter;
    let ln_base = 2.0 * r.ln() + 0.5 - rho_n;
    Ok(m_a * (-ln_base / p1).exp())
}

/// Lower bound c₁ on the mass norm of every function in the Nehari set of
/// the superlinear problem:
/// c₁ = exp((N(1−ζ)/(4ζ)) λ_{1,L} − (N/4) a_N − N ω_sup/(4ζ)), ζ = λN/4.
///
/// The subcritical range is open on the right, but the bound degenerates
/// gracefully at ζ = 1, so λ = 4/N is accepted as well.
pub fn nehari_l2_lower_bound(
    lambda: f64,
    omega_sup: f64,
    lambda_1l: f64,
    n_dim: u32,
) -> Result<f64> {
    let nf = f64::from(dimension_constants(n_dim)?.n_dim);
    let zeta = lambda * nf / 4.0;
    if !(zeta > 0.0 && zeta <= 1.0) {
        return Err(Error::Domain(format!(
            "lambda = {lambda} must lie in (0, 4/N] for the Nehari lower bound"
        )));
    }
    if !(omega_sup >= 0.0) {
        return Err(Error::Domain("omega_sup must be nonnegative".into()));
    }
    let a_n = dimension_constants(n_dim)?.a_n;
    Ok(
        ((nf * (1.0 - zeta) / (4.0 * zeta)) * lambda_1l
            - (nf / 4.0) * a_n
            - nf * omega_sup / (4.0 * zeta))
            .exp(),
    )
}

/// Checks that a schedule of fractional orders is strictly decreasing, has
/// at least `min_len` entries, and lies in (0, upper].
pub(crate) fn validate_schedule(s_list: &[f64], min_len: usize, upper: f64) -> Result<()> {
    if s_list.len() < min_len {
        return Err(Error::Usage(format!(
            "schedule needs at least {min_len} entries, got {}",
            s_list.len()
        )));
    }
    for &s in s_list {
        if !(s > 0.0 && s <= upper) {
            return Err(Error::Domain(format!(
                "schedule entry {s} outside (0, {upper}]"
            )));
        }
    }
    for w in s_list.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::Usage(
                "schedule of fractional orders must be strictly decreasing".into(),
            ));
        }
    }
    Ok(())
}
