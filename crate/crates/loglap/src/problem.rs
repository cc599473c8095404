//! Problem data: the logarithmic model with its regime classification, the
//! weighted fractional model, and the one-parameter family of weights and
//! exponents driving the small-order studies.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::forms::{assemble_fractional, assemble_log_laplacian, assemble_mass, SymmetricForm};
use crate::grid::{DiscreteFunction, Grid1D};

/// Sign of the logarithmic nonlinearity parameter relative to the critical
/// threshold 4/N.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogRegime {
    /// 0 < λ < 4/N.
    Superlinear,
    /// λ < 0.
    Sublinear,
    /// λ ≥ 4/N: no nontrivial nonnegative solutions.
    CriticalOrSupercritical,
}

/// Dirichlet problem for the logarithmic operator with nonlinearity
/// f(x, t) = ω(x) t + λ t ln|t|.
#[derive(Debug, Clone)]
pub struct LogProblem {
    pub grid: Arc<Grid1D>,
    pub lambda: f64,
    pub omega: DiscreteFunction,
    /// Spatial derivative of ω, needed only by identities with an x·∇ term.
    pub omega_prime: Option<DiscreteFunction>,
    pub el: SymmetricForm,
    pub mass: SymmetricForm,
}

impl LogProblem {
    pub fn new(
        grid: &Arc<Grid1D>,
        lambda: f64,
        omega: DiscreteFunction,
        omega_prime: Option<DiscreteFunction>,
    ) -> Result<LogProblem> {
        if !lambda.is_finite() || lambda == 0.0 {
            return Err(Error::Domain(format!(
                "lambda must be finite and nonzero, got {lambda}"
            )));
        }
        if omega.n() != grid.n {
            return Err(Error::Usage(
                "weight does not live on the problem grid".into(),
            ));
        }
        if let Some(op) = &omega_prime {
            if op.n() != grid.n {
                return Err(Error::Usage(
                    "weight derivative does not live on the problem grid".into(),
                ));
            }
        }
        Ok(LogProblem {
            grid: Arc::clone(grid),
            lambda,
            omega,
            omega_prime,
            el: assemble_log_laplacian(grid),
            mass: assemble_mass(grid),
        })
    }

    pub fn regime(&self) -> LogRegime {
        if self.lambda < 0.0 {
            LogRegime::Sublinear
        } else if self.lambda < 4.0 {
            LogRegime::Superlinear
        } else {
            LogRegime::CriticalOrSupercritical
        }
    }

    pub fn omega_sup(&self) -> f64 {
        self.omega.sup_norm()
    }

    /// f(x_i, t) = ω_i t + λ t ln|t|, extended by 0 at t = 0.
    pub fn f_at(&self, i: usize, t: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        self.omega.values[i] * t + self.lambda * t * t.abs().ln()
    }

    /// Primitive F(x_i, t) = ∫₀ᵗ f(x_i, τ) dτ
    ///                     = ω_i t²/2 + (λ/2) t² ln|t| − λ t²/4.
    pub fn big_f_at(&self, i: usize, t: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        0.5 * self.omega.values[i] * t * t + 0.5 * self.lambda * t * t * t.abs().ln()
            - 0.25 * self.lambda * t * t
    }

    /// ∂F/∂x (x_i, t) = ω′(x_i) t²/2; requires the weight derivative.
    pub fn big_f_x_at(&self, i: usize, t: f64) -> Result<f64> {
        match &self.omega_prime {
            Some(op) => Ok(0.5 * op.values[i] * t * t),
            None => Err(Error::Usage(
                "the identity with an x-derivative term needs the weight derivative".into(),
            )),
        }
    }

    /// True when ω is constant up to rounding, in which case ∂F/∂x ≡ 0.
    pub fn omega_is_constant(&self) -> bool {
        let lo = self.omega.min_value();
        let hi = self.omega.max_value();
        hi - lo <= 1e-13 * hi.abs().max(lo.abs()).max(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FracRegime {
    /// 2 < p < 2N/(N−2s).
    Superlinear,
    /// 1 < p < 2.
    Sublinear,
}

/// Dirichlet problem for the fractional operator of order 2s with weighted
/// power nonlinearity a(x) |t|^{p−2} t.
#[derive(Debug, Clone)]
pub struct FracProblem {
    pub grid: Arc<Grid1D>,
    pub s: f64,
    pub p: f64,
    pub a: DiscreteFunction,
    pub es: SymmetricForm,
    pub mass: SymmetricForm,
}

impl FracProblem {
    pub fn new(grid: &Arc<Grid1D>, s: f64, p: f64, a: DiscreteFunction) -> Result<FracProblem> {
        let es = assemble_fractional(grid, s)?;
        let two_star = 2.0 / (1.0 - 2.0 * s);
        if !(p > 1.0) || p == 2.0 || p >= two_star {
            return Err(Error::Domain(format!(
                "exponent p = {p} must lie in (1, 2) or (2, {two_star:.6}) for order s = {s}"
            )));
        }
        if a.n() != grid.n {
            return Err(Error::Usage(
                "weight does not live on the problem grid".into(),
            ));
        }
        if a.min_value() <= 0.0 {
            return Err(Error::Domain("weight must be strictly positive".into()));
        }
        Ok(FracProblem {
            grid: Arc::clone(grid),
            s,
            p,
            a,
            es,
            mass: assemble_mass(grid),
        })
    }

    pub fn regime(&self) -> FracRegime {
        if self.p > 2.0 {
            FracRegime::Superlinear
        } else {
            FracRegime::Sublinear
        }
    }

    /// ∫ a |u|^p.
    pub fn weighted_power_integral(&self, u: &DiscreteFunction) -> f64 {
        assert_eq!(u.n(), self.grid.n, "grid mismatch");
        self.grid.h
            * self
                .a
                .values
                .iter()
                .zip(&u.values)
                .map(|(a, u)| a * u.abs().powf(self.p))
                .sum::<f64>()
    }
}

/// One-parameter family p(s) = 2 + p1·s, a(s, x) = 1 + s·ω(x) feeding the
/// small-order limit studies.  The auxiliary split parameter γ ∈ (0, δ),
/// δ = 1 − p1/4, enters only through the integrability exponent β(s).
#[derive(Debug, Clone)]
pub struct WeightFamily {
    pub p1: f64,
    pub omega: DiscreteFunction,
    pub delta: f64,
    pub gamma: f64,
}

impl WeightFamily {
    pub fn new(p1: f64, omega: DiscreteFunction, gamma: Option<f64>) -> Result<WeightFamily> {
        if !p1.is_finite() || p1 == 0.0 {
            return Err(Error::Domain(format!(
                "exponent slope p1 must be finite and nonzero, got {p1}"
            )));
        }
        let delta = 1.0 - p1 / 4.0;
        if !(delta > 0.0) {
            return Err(Error::Domain(format!(
                "exponent slope p1 = {p1} leaves the subcritical range"
            )));
        }
        let gamma = gamma.unwrap_or(delta / 2.0);
        if !(gamma > 0.0 && gamma < delta) {
            return Err(Error::Domain(format!(
                "split parameter gamma = {gamma} must lie in (0, {delta})"
            )));
        }
        Ok(WeightFamily {
            p1,
            omega,
            delta,
            gamma,
        })
    }

    pub fn p_of_s(&self, s: f64) -> f64 {
        2.0 + self.p1 * s
    }

    pub fn two_star(s: f64) -> f64 {
        2.0 / (1.0 - 2.0 * s)
    }

    /// Weight a(s, ·) = 1 + s·ω as a grid function; strict positivity is
    /// required for the weighted problems.
    pub fn a_of_s(&self, s: f64) -> Result<DiscreteFunction> {
        let vals: Vec<f64> = self.omega.values.iter().map(|w| 1.0 + s * w).collect();
        if vals.iter().any(|&v| v <= 0.0) {
            return Err(Error::Domain(format!(
                "weight 1 + s·ω loses positivity at s = {s}"
            )));
        }
        DiscreteFunction::new(&self.omega.grid, vals)
    }

    /// Integrability exponent β(s) = 2·max{2*_s/(2*_s − p(s)),
    /// 1 + (1−2s)/(2s(δ−γ))}; the factor 2 keeps it strictly above the
    /// minimal admissible value.
    pub fn beta_of_s(&self, s: f64) -> Result<f64> {
        if !(s > 0.0 && s < 0.5) {
            return Err(Error::Domain(format!("order s = {s} outside (0, 1/2)")));
        }
        let p = self.p_of_s(s);
        let ts = Self::two_star(s);
        if p >= ts {
            return Err(Error::Domain(format!(
                "exponent p({s}) = {p} is not subcritical"
            )));
        }
        let first = ts / (ts - p);
        let second = 1.0 + (1.0 - 2.0 * s) / (2.0 * s * (self.delta - self.gamma));
        Ok(2.0 * first.max(second))
    }

    /// Smallest admissible exponent that β(s) must exceed.
    pub fn beta_floor(&self, s: f64) -> Result<f64> {
        let p = self.p_of_s(s);
        let ts = Self::two_star(s);
        if p >= ts {
            return Err(Error::Domain(format!(
                "exponent p({s}) = {p} is not subcritical"
            )));
        }
        let first = ts / (ts - p);
        let second = 1.0 + (1.0 - 2.0 * s) / (2.0 * s * (self.delta - self.gamma));
        Ok(first.max(second))
    }

    pub fn omega_sup(&self) -> f64 {
        self.omega.sup_norm()
    }

    /// sup over s of ‖a(s, ·)‖_∞^{1/s}.  For the affine family the supremum
    /// is the s → 0⁺ limit e^{sup ω}: positivity gives ‖a(s)‖_∞ = 1 + s·sup ω
    /// and ln(1 + x)/x is decreasing.
    pub fn m_a(&self) -> f64 {
        self.omega.max_value().exp()
    }

    /// ln ‖a(s, ·)‖_β with the β-th powers summed in log space, so very
    /// large exponents stay finite.
    pub fn ln_weight_norm(&self, s: f64, beta: f64) -> Result<f64> {
        let a = self.a_of_s(s)?;
        let h = a.grid.h;
        let logs: Vec<f64> = a.values.iter().map(|v| v.ln()).collect();
        let m = logs.iter().fold(f64::NEG_INFINITY, |acc, &v| acc.max(v));
        let sum: f64 = logs.iter().map(|&l| (beta * (l - m)).exp()).sum();
        Ok((h.ln() + beta * m + sum.ln()) / beta)
    }

    /// Uniform Nehari floor sup_s M(s), where
    /// M(s) = (‖a(s)‖_{β(s)} |Ω|^{1−1/β(s)−p(s)/2*_s} κ_{1,s}^{p(s)/2})^{1/(2−p(s))},
    /// evaluated in log space over a fine schedule accumulating at 0.
    pub fn m_bound(&self) -> Result<f64> {
        let measure = self.omega.grid.measure();
        let mut sup_ln = f64::NEG_INFINITY;
        let mut grid_s: Vec<f64> = (1..=256).map(|j| 0.25 * j as f64 / 256.0).collect();
        for k in 1..=40 {
            grid_s.push(0.25 * (2.0f64).powi(-k));
        }
        for &s in &grid_s {
            let p = self.p_of_s(s);
            let ts = Self::two_star(s);
            if p >= ts || p <= 1.0 {
                continue;
            }
            let beta = self.beta_of_s(s)?;
            let ln_norm = self.ln_weight_norm(s, beta)?;
            let ln_kappa = crate::constants::ln_kappa_frac(1, s)?;
            let bracket =
                ln_norm + (1.0 - 1.0 / beta - p / ts) * measure.ln() + 0.5 * p * ln_kappa;
            sup_ln = sup_ln.max(bracket / (2.0 - p));
        }
        if !sup_ln.is_finite() {
            return Err(Error::Domain(
                "no admissible orders for the uniform Nehari floor".into(),
            ));
        }
        Ok(sup_ln.exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;

    fn grid() -> Arc<Grid1D> {
        build_grid(-1.0, 1.0, 32).unwrap()
    }

    #[test]
    fn regime_classification() {
        let g = grid();
        let w = DiscreteFunction::zeros(&g);
        let mk = |l: f64| LogProblem::new(&g, l, w.clone(), None).unwrap().regime();
        assert_eq!(mk(1.0), LogRegime::Superlinear);
        assert_eq!(mk(3.9), LogRegime::Superlinear);
        assert_eq!(mk(-1.0), LogRegime::Sublinear);
        assert_eq!(mk(4.0), LogRegime::CriticalOrSupercritical);
        assert_eq!(mk(7.0), LogRegime::CriticalOrSupercritical);
        assert!(LogProblem::new(&g, 0.0, w.clone(), None).is_err());
    }

    #[test]
    fn nonlinearity_primitive_matches_derivative() {
        let g = grid();
        let w = DiscreteFunction::from_fn(&g, |x| 0.3 * x);
        let prob = LogProblem::new(&g, 1.7, w, None).unwrap();
        // Central differences of F reproduce f away from the origin.
        for &t in &[0.3f64, 1.0, 2.5, -0.7] {
            let d = 1e-6;
            let fd = (prob.big_f_at(5, t + d) - prob.big_f_at(5, t - d)) / (2.0 * d);
            assert!(
                (fd - prob.f_at(5, t)).abs() < 1e-7 * (1.0 + prob.f_at(5, t).abs()),
                "t={t}"
            );
        }
        assert_eq!(prob.f_at(0, 0.0), 0.0);
        assert_eq!(prob.big_f_at(0, 0.0), 0.0);
    }

    #[test]
    fn weight_derivative_is_optional() {
        let g = grid();
        let w = DiscreteFunction::from_fn(&g, |x| x);
        let prob = LogProblem::new(&g, 1.0, w, None).unwrap();
        assert!(!prob.omega_is_constant());
        assert!(prob.big_f_x_at(3, 1.0).is_err());
        let wp = DiscreteFunction::constant(&g, 1.0);
        let prob = LogProblem::new(
            &g,
            1.0,
            DiscreteFunction::from_fn(&g, |x| x),
            Some(wp),
        )
        .unwrap();
        assert!((prob.big_f_x_at(3, 2.0).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn frac_problem_exponent_window() {
        let g = grid();
        let a = DiscreteFunction::constant(&g, 1.0);
        assert!(FracProblem::new(&g, 0.1, 2.1, a.clone()).is_ok());
        assert!(FracProblem::new(&g, 0.1, 1.9, a.clone()).is_ok());
        assert!(FracProblem::new(&g, 0.1, 2.0, a.clone()).is_err());
        // 2*_s = 2.5 at s = 0.1.
        assert!(FracProblem::new(&g, 0.1, 2.5, a.clone()).is_err());
        assert!(FracProblem::new(&g, 0.1, 0.9, a.clone()).is_err());
        let bad = DiscreteFunction::zeros(&g);
        assert!(FracProblem::new(&g, 0.1, 2.1, bad).is_err());
    }

    #[test]
    fn family_accessors() {
        let g = grid();
        let fam = WeightFamily::new(1.0, DiscreteFunction::zeros(&g), None).unwrap();
        assert_eq!(fam.p_of_s(0.1), 2.1);
        assert_eq!(fam.delta, 0.75);
        assert_eq!(fam.gamma, 0.375);
        assert_eq!(fam.m_a(), 1.0);
        let a = fam.a_of_s(0.2).unwrap();
        assert!(a.values.iter().all(|&v| v == 1.0));
        // β(s) stays strictly above the admissibility floor.
        for &s in &[0.25, 0.1, 0.01, 1e-4] {
            let beta = fam.beta_of_s(s).unwrap();
            assert!(beta > fam.beta_floor(s).unwrap());
        }
        assert!(WeightFamily::new(0.0, DiscreteFunction::zeros(&g), None).is_err());
        assert!(WeightFamily::new(4.0, DiscreteFunction::zeros(&g), None).is_err());
    }

    #[test]
    fn family_weight_norm_in_log_space() {
        let g = grid();
        let fam = WeightFamily::new(1.0, DiscreteFunction::constant(&g, 1.0), None).unwrap();
        // ‖a(s)‖_β = (1 + s)·|Ω|^{1/β} for a constant weight.
        let s = 0.1;
        let beta = 1e5;
        let ln = fam.ln_weight_norm(s, beta).unwrap();
        let expect = (1.0 + s).ln() + 2.0f64.ln() / beta;
        assert!((ln - expect).abs() < 1e-12);
        // m_a is the small-order limit e^{sup ω}.
        assert!((fam.m_a() - 1.0f64.exp()).abs() < 1e-15);
    }

    #[test]
    fn family_positivity_guard() {
        let g = grid();
        let fam = WeightFamily::new(-1.0, DiscreteFunction::constant(&g, -9.0), None).unwrap();
        assert!(fam.a_of_s(0.2).is_err());
        assert!(fam.a_of_s(0.05).is_ok());
    }

    #[test]
    fn nehari_floor_for_default_family() {
        let g = build_grid(-1.0, 1.0, 64).unwrap();
        let fam = WeightFamily::new(1.0, DiscreteFunction::zeros(&g), None).unwrap();
        let m = fam.m_bound().unwrap();
        assert!(m > 0.0 && m < 1.0, "floor = {m}");
        let fam_sub = WeightFamily::new(-1.0, DiscreteFunction::zeros(&g), None).unwrap();
        assert!(fam_sub.m_bound().unwrap() > 0.0);
    }
}
