//! Galerkin matrices for the quadratic forms on piecewise-constant
//! functions: the truncated logarithmic kernel form, the far-field form,
//! the mass form, the full logarithmic-Laplacian form, and the fractional
//! form of order 2s.
//!
//! Every pair integral over a cell pair reduces to a second difference
//! Φ(d+h) − 2Φ(d) + Φ(|d−h|) of an explicit second antiderivative Φ of the
//! radial kernel, and every exterior integral to a first difference, so the
//! entries are exact up to rounding.  No quadrature is involved.

use std::io::{Read, Write};
use std::sync::Arc;

use rayon::prelude::*;

use crate::constants::{dimension_constants, frac_constants, validate_schedule};
use crate::error::{Error, Result};
use crate::grid::{DiscreteFunction, Grid1D};
use crate::matrix::SymMatrix;

/// Which continuum form a matrix discretizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormKind {
    Mass,
    LogKernel,
    FarField,
    LogLaplacian,
    Fractional,
}

impl FormKind {
    pub fn tag(self) -> u32 {
        match self {
            FormKind::Mass => 0,
            FormKind::LogKernel => 1,
            FormKind::FarField => 2,
            FormKind::LogLaplacian => 3,
            FormKind::Fractional => 4,
        }
    }

    pub fn from_tag(tag: u32) -> Result<FormKind> {
        Ok(match tag {
            0 => FormKind::Mass,
            1 => FormKind::LogKernel,
            2 => FormKind::FarField,
            3 => FormKind::LogLaplacian,
            4 => FormKind::Fractional,
            _ => return Err(Error::Usage(format!("unknown form tag {tag}"))),
        })
    }
}

/// A symmetric bilinear form on a fixed grid.
#[derive(Debug, Clone)]
pub struct SymmetricForm {
    pub kind: FormKind,
    pub grid: Arc<Grid1D>,
    /// Fractional order for [`FormKind::Fractional`], `None` otherwise.
    pub s: Option<f64>,
    pub matrix: SymMatrix,
}

fn check_same_grid(g: &Grid1D, u: &DiscreteFunction) {
    assert!(
        g.n == u.grid.n && g.a == u.grid.a && g.b == u.grid.b,
        "grid function does not live on the form's grid"
    );
}

impl SymmetricForm {
    /// The bilinear form applied to one argument twice.
    pub fn quad(&self, u: &DiscreteFunction) -> f64 {
        check_same_grid(&self.grid, u);
        self.matrix.quad(&u.values)
    }

    pub fn bilin(&self, u: &DiscreteFunction, v: &DiscreteFunction) -> f64 {
        check_same_grid(&self.grid, u);
        check_same_grid(&self.grid, v);
        self.matrix.bilin(&u.values, &v.values)
    }

    /// Matrix action as a grid function (no mass scaling).
    pub fn apply(&self, u: &DiscreteFunction) -> DiscreteFunction {
        check_same_grid(&self.grid, u);
        DiscreteFunction {
            grid: Arc::clone(&self.grid),
            values: self.matrix.matvec(&u.values),
        }
    }

    /// Serializes as magic `LLAP`, cell count (u32 LE), form tag (u32 LE),
    /// fractional order or 0.0 (f64 LE), then the row-major entries (f64 LE).
    pub fn write_binary<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        w.write_all(b"LLAP")?;
        w.write_all(&(self.matrix.n() as u32).to_le_bytes())?;
        w.write_all(&self.kind.tag().to_le_bytes())?;
        w.write_all(&self.s.unwrap_or(0.0).to_le_bytes())?;
        for v in self.matrix.raw() {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }
}

/// Reads back a matrix written by [`SymmetricForm::write_binary`].  The grid
/// is not part of the payload, so only the matrix and its labels return.
pub fn read_binary<R: Read>(r: &mut R) -> Result<(FormKind, f64, SymMatrix)> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|e| Error::Usage(format!("truncated matrix header: {e}")))?;
    if &magic != b"LLAP" {
        return Err(Error::Usage("bad magic in matrix payload".into()));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)
        .map_err(|e| Error::Usage(format!("truncated matrix header: {e}")))?;
    let n = u32::from_le_bytes(b4) as usize;
    r.read_exact(&mut b4)
        .map_err(|e| Error::Usage(format!("truncated matrix header: {e}")))?;
    let kind = FormKind::from_tag(u32::from_le_bytes(b4))?;
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)
        .map_err(|e| Error::Usage(format!("truncated matrix header: {e}")))?;
    let s = f64::from_le_bytes(b8);
    let mut data = vec![0.0; n * n];
    for v in data.iter_mut() {
        r.read_exact(&mut b8)
            .map_err(|e| Error::Usage(format!("truncated matrix payload: {e}")))?;
        *v = f64::from_le_bytes(b8);
    }
    Ok((kind, s, SymMatrix::from_raw(n, data)?))
}

/// Second antiderivative of the truncated logarithmic kernel z ↦ 1_{z≤1}/z:
/// z ln z − z on [0, 1], continued C¹ by the constant −1 beyond the cutoff.
fn phi_log_kernel(z: f64) -> f64 {
    if z <= 0.0 {
        0.0
    } else if z < 1.0 {
        z * z.ln() - z
    } else {
        -1.0
    }
}

/// Second antiderivative of the far-field kernel z ↦ 1_{z>1}/z:
/// 0 on [0, 1] and z ln z − z + 1 beyond the cutoff (C¹ at the cutoff).
fn phi_far_field(z: f64) -> f64 {
    if z <= 1.0 {
        0.0
    } else {
        z * z.ln() - z + 1.0
    }
}

/// Second antiderivative of z ↦ z^{−1−2s}: −z^{1−2s}/(2s(1−2s)), which
/// vanishes at 0 for s < 1/2.
fn phi_fractional(z: f64, s: f64) -> f64 {
    if z <= 0.0 {
        0.0
    } else {
        -z.powf(1.0 - 2.0 * s) / (2.0 * s * (1.0 - 2.0 * s))
    }
}

/// ∬ over a cell pair at midpoint distance d of a radial kernel with second
/// antiderivative Φ, via the tent-weight identity.
fn tent(phi: &impl Fn(f64) -> f64, d: f64, h: f64) -> f64 {
    phi(d + h) - 2.0 * phi(d) + phi((d - h).abs())
}

/// Difference-type form (c/2)∬(u(x)−u(y))(v(x)−v(y))κ(|x−y|) over ℝ×ℝ with
/// exterior values zero.  Off-diagonal entries are −c·P_k with P_k the pair
/// integral at lag k; the diagonal collects the same row plus the two
/// exterior tails, whose same-cell divergences cancel exactly.
fn assemble_difference_form(
    grid: &Arc<Grid1D>,
    phi: impl Fn(f64) -> f64 + Sync,
    coeff: f64,
) -> SymMatrix {
    let n = grid.n;
    let h = grid.h;
    // Pair integrals depend only on the lag.
    let p: Vec<f64> = (0..n)
        .map(|k| if k == 0 { 0.0 } else { tent(&phi, k as f64 * h, h) })
        .collect();
    let mut cum = vec![0.0; n];
    for k in 1..n {
        cum[k] = cum[k - 1] + p[k];
    }
    let mut m = SymMatrix::zeros(n);
    m.raw_mut()
        .par_chunks_mut(n)
        .enumerate()
        .for_each(|(i, row)| {
            for (j, slot) in row.iter_mut().enumerate() {
                if j != i {
                    *slot = -coeff * p[i.abs_diff(j)];
                }
            }
            let dl = i as f64 * h;
            let dr = (n - 1 - i) as f64 * h;
            let exterior = (phi(dl) - phi(dl + h)) + (phi(dr) - phi(dr + h));
            row[i] = coeff * (cum[i] + cum[n - 1 - i] + exterior);
        });
    m
}

/// Product-type form ∬ u(x) v(y) κ(|x−y|), including the diagonal.
fn assemble_product_form(grid: &Arc<Grid1D>, phi: impl Fn(f64) -> f64 + Sync) -> SymMatrix {
    let n = grid.n;
    let h = grid.h;
    let p: Vec<f64> = (0..n).map(|k| tent(&phi, k as f64 * h, h)).collect();
    let mut m = SymMatrix::zeros(n);
    m.raw_mut()
        .par_chunks_mut(n)
        .enumerate()
        .for_each(|(i, row)| {
            for (j, slot) in row.iter_mut().enumerate() {
                *slot = p[i.abs_diff(j)];
            }
        });
    m
}

/// Mass form ∫ u v = h·I on cell values.
pub fn assemble_mass(grid: &Arc<Grid1D>) -> SymmetricForm {
    SymmetricForm {
        kind: FormKind::Mass,
        grid: Arc::clone(grid),
        s: None,
        matrix: SymMatrix::diagonal(grid.n, grid.h),
    }
}

/// Truncated-kernel form (c_N/2)∬ (u(x)−u(y))(v(x)−v(y)) 1_{|x−y|≤1}/|x−y|.
pub fn assemble_log_kernel(grid: &Arc<Grid1D>) -> SymmetricForm {
    let c = dimension_constants(1).expect("dimension 1").c_n;
    SymmetricForm {
        kind: FormKind::LogKernel,
        grid: Arc::clone(grid),
        s: None,
        matrix: assemble_difference_form(grid, phi_log_kernel, c),
    }
}

/// Far-field pairing ∬ u(x) v(y) 1_{|x−y|>1}/|x−y|.
pub fn assemble_far_field(grid: &Arc<Grid1D>) -> SymmetricForm {
    SymmetricForm {
        kind: FormKind::FarField,
        grid: Arc::clone(grid),
        s: None,
        matrix: assemble_product_form(grid, phi_far_field),
    }
}

/// Full logarithmic-Laplacian form: truncated part − c_N·(far field)
/// + ρ_N·(mass).
pub fn assemble_log_laplacian(grid: &Arc<Grid1D>) -> SymmetricForm {
    let d = dimension_constants(1).expect("dimension 1");
    let e = assemble_log_kernel(grid);
    let j = assemble_far_field(grid);
    let mass = assemble_mass(grid);
    let matrix = e
        .matrix
        .add_scaled(-d.c_n, &j.matrix)
        .add_scaled(d.rho_n, &mass.matrix);
    SymmetricForm {
        kind: FormKind::LogLaplacian,
        grid: Arc::clone(grid),
        s: None,
        matrix,
    }
}

/// Fractional form (c_{N,s}/2)∬ (u(x)−u(y))(v(x)−v(y)) |x−y|^{−1−2s} for
/// orders 0 < s < 1/2.
pub fn assemble_fractional(grid: &Arc<Grid1D>, s: f64) -> Result<SymmetricForm> {
    if !(s > 0.0 && s < 0.5) {
        return Err(Error::Domain(format!(
            "fractional order s = {s} must lie in (0, 1/2) for the cellwise assembly"
        )));
    }
    let c = frac_constants(1, s)?.c_ns;
    Ok(SymmetricForm {
        kind: FormKind::Fractional,
        grid: Arc::clone(grid),
        s: Some(s),
        matrix: assemble_difference_form(grid, move |z| phi_fractional(z, s), c),
    })
}

/// Rows (s, defect) of the small-order expansion study together with the
/// fitted log-log slope of the defect.
#[derive(Debug, Clone)]
pub struct ExpansionReport {
    pub rows: Vec<(f64, f64)>,
    /// Least-squares slope of ln(defect) against ln(s); NaN when fewer than
    /// two positive defects are available.
    pub slope: f64,
}

/// Measures |⟨u,u⟩_s − ‖u‖₂² − s·⟨u,u⟩_L| along a decreasing schedule of
/// orders.  First-order accuracy of the expansion shows as a slope near 2.
pub fn expansion_check(
    grid: &Arc<Grid1D>,
    u: &DiscreteFunction,
    s_list: &[f64],
) -> Result<ExpansionReport> {
    validate_schedule(s_list, 1, 0.5 - f64::EPSILON)?;
    check_same_grid(grid, u);
    let el = assemble_log_laplacian(grid);
    let base = u.l2_norm_sq();
    let first = el.quad(u);
    let rows: Vec<(f64, f64)> = s_list
        .par_iter()
        .map(|&s| {
            let es = assemble_fractional(grid, s).expect("validated order");
            (s, (es.quad(u) - base - s * first).abs())
        })
        .collect();
    Ok(ExpansionReport {
        slope: log_log_slope(&rows),
        rows,
    })
}

/// Least-squares slope of ln y against ln x over the points with y > 0.
pub(crate) fn log_log_slope(rows: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|(_, y)| *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    sxy / sxx
}
