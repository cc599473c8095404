//! Smallest eigenpairs of the assembled forms relative to the mass form,
//! computed by shifted inverse iteration, together with the small-order
//! eigenvalue study and the Poincaré-type constant of the truncated form.

use std::sync::Arc;

use rayon::prelude::*;

use crate::constants::validate_schedule;
use crate::error::{Error, Result};
use crate::forms::{
    assemble_fractional, assemble_log_kernel, assemble_log_laplacian, assemble_mass, SymmetricForm,
};
use crate::grid::{DiscreteFunction, Grid1D};

/// The smallest eigenvalue of K v = λ M v with its eigenfunction.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: f64,
    /// Mass-normalized (‖·‖₂ = 1) eigenfunction with nonnegative mean.
    pub vector: DiscreteFunction,
    /// ‖K v − λ M v‖ / ‖v‖ in coefficient norms.
    pub residual: f64,
    pub iterations: usize,
}

const MAX_ITER: usize = 500;
const VALUE_TOL: f64 = 1e-12;
const RESIDUAL_TOL: f64 = 1e-10;

/// Shifted inverse iteration on the pencil (K, M) with M positive definite.
/// The shift sits strictly below the spectrum (Gershgorin bound − 1), so the
/// factored matrix is positive definite and the iteration converges to the
/// smallest eigenvalue.
pub fn smallest_eig(k: &SymmetricForm, m: &SymmetricForm) -> Result<EigenPair> {
    let n = k.matrix.n();
    if m.matrix.n() != n {
        return Err(Error::Usage("pencil matrices of different sizes".into()));
    }
    let g_k = k.matrix.gershgorin_lower();
    let m_lo = m.matrix.gershgorin_lower();
    if !(m_lo > 0.0) {
        return Err(Error::Domain(
            "mass matrix is not safely positive definite".into(),
        ));
    }
    let m_hi = (0..n)
        .map(|i| (0..n).map(|j| m.matrix.get(i, j).abs()).sum::<f64>())
        .fold(0.0f64, |a, b| a.max(b));
    let bound = if g_k >= 0.0 { g_k / m_hi } else { g_k / m_lo };
    let sigma = bound - 1.0;
    let shifted = k.matrix.add_scaled(-sigma, &m.matrix);
    let chol = shifted.cholesky()?;

    let mut v = vec![1.0; n];
    let mnorm = m.matrix.quad(&v).sqrt();
    for x in v.iter_mut() {
        *x /= mnorm;
    }
    let mut value = k.matrix.quad(&v);
    let mut residual = f64::INFINITY;
    for iter in 1..=MAX_ITER {
        let mv = m.matrix.matvec(&v);
        let y = chol.solve(&mv);
        let ny = m.matrix.quad(&y).sqrt();
        if !(ny > 0.0) || !ny.is_finite() {
            return Err(Error::NonConvergence {
                context: "inverse iteration degenerated".into(),
                last_residual: residual,
            });
        }
        let vn: Vec<f64> = y.iter().map(|x| x / ny).collect();
        let new_value = k.matrix.quad(&vn);
        let kv = k.matrix.matvec(&vn);
        let mvn = m.matrix.matvec(&vn);
        let mut rr = 0.0;
        let mut vv = 0.0;
        for i in 0..n {
            let r = kv[i] - new_value * mvn[i];
            rr += r * r;
            vv += vn[i] * vn[i];
        }
        residual = (rr / vv).sqrt();
        let settled = (new_value - value).abs() <= VALUE_TOL * new_value.abs().max(1.0);
        value = new_value;
        v = vn;
        if settled && residual <= RESIDUAL_TOL {
            if v.iter().sum::<f64>() < 0.0 {
                for x in v.iter_mut() {
                    *x = -*x;
                }
            }
            return Ok(EigenPair {
                value,
                vector: DiscreteFunction {
                    grid: Arc::clone(&k.grid),
                    values: v,
                },
                residual,
                iterations: iter,
            });
        }
    }
    Err(Error::NonConvergence {
        context: "inverse iteration for the smallest eigenpair".into(),
        last_residual: residual,
    })
}

/// One order of the eigenvalue study.
#[derive(Debug, Clone)]
pub struct EigenRow {
    pub s: f64,
    pub lambda_1s: f64,
    /// (λ_{1,s} − 1)/s, the discrete derivative toward the limit.
    pub diff_quotient: f64,
    pub ln_lambda_1s: f64,
    /// ‖φ_{1,s} − φ_{1,L}‖₂ after sign alignment.
    pub eigfun_l2_gap: f64,
}

/// Eigenvalue asymptotics along a decreasing schedule of orders, against
/// the limiting logarithmic eigenpair.
#[derive(Debug, Clone)]
pub struct EigenAsymptotics {
    pub lambda_1l: f64,
    pub eigfun_l: DiscreteFunction,
    pub rows: Vec<EigenRow>,
}

pub fn eig_asymptotics(grid: &Arc<Grid1D>, s_list: &[f64]) -> Result<EigenAsymptotics> {
    validate_schedule(s_list, 3, 0.25)?;
    let mass = assemble_mass(grid);
    let el = assemble_log_laplacian(grid);
    let limit = smallest_eig(&el, &mass)?;
    let rows: Vec<EigenRow> = s_list
        .par_iter()
        .map(|&s| {
            let es = assemble_fractional(grid, s)?;
            let pair = smallest_eig(&es, &mass)?;
            let mut phi = pair.vector;
            if phi.dot(&limit.vector) < 0.0 {
                phi = phi.scale(-1.0);
            }
            Ok(EigenRow {
                s,
                lambda_1s: pair.value,
                diff_quotient: (pair.value - 1.0) / s,
                ln_lambda_1s: pair.value.ln(),
                eigfun_l2_gap: phi.l2_gap(&limit.vector),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EigenAsymptotics {
        lambda_1l: limit.value,
        eigfun_l: limit.vector,
        rows,
    })
}

/// Poincaré-type constant of the truncated form: the reciprocal of its
/// smallest eigenvalue relative to the mass form.
pub fn poincare_sln(grid: &Arc<Grid1D>) -> Result<f64> {
    let e = assemble_log_kernel(grid);
    let mass = assemble_mass(grid);
    let pair = smallest_eig(&e, &mass)?;
    if !(pair.value > 0.0) {
        return Err(Error::Domain(
            "truncated form unexpectedly not positive definite".into(),
        ));
    }
    Ok(1.0 / pair.value)
}
