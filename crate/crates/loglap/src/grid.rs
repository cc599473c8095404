//! Uniform midpoint grids on an open interval and piecewise-constant
//! functions living on them.  All integrals are exact midpoint sums, so a
//! grid function is identified with its vector of cell values.

use std::sync::Arc;

use crate::error::{Error, Result};

/// A uniform partition of (a, b) into n cells, carrying midpoints and the
/// distance of each midpoint to the boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    pub a: f64,
    pub b: f64,
    pub n: usize,
    pub h: f64,
    pub midpoints: Vec<f64>,
    /// dist(x_i, ∂Ω) for each midpoint.
    pub delta: Vec<f64>,
}

impl Grid1D {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Grid1D> {
        if !a.is_finite() || !b.is_finite() || !(a < b) {
            return Err(Error::Domain(format!(
                "interval endpoints must be finite with a < b, got ({a}, {b})"
            )));
        }
        if n < 4 || n % 2 != 0 {
            return Err(Error::Domain(format!(
                "cell count must be even and at least 4, got {n}"
            )));
        }
        let h = (b - a) / n as f64;
        let midpoints: Vec<f64> = (0..n).map(|i| a + (i as f64 + 0.5) * h).collect();
        let delta = midpoints.iter().map(|&x| (x - a).min(b - x)).collect();
        Ok(Grid1D {
            a,
            b,
            n,
            h,
            midpoints,
            delta,
        })
    }

    pub fn measure(&self) -> f64 {
        self.b - self.a
    }

    pub fn diameter(&self) -> f64 {
        self.b - self.a
    }
}

/// Builds a shared grid handle; every form and grid function on the same
/// mesh holds a clone of this handle.
pub fn build_grid(a: f64, b: f64, n: usize) -> Result<Arc<Grid1D>> {
    Ok(Arc::new(Grid1D::new(a, b, n)?))
}

/// A piecewise-constant function on a [`Grid1D`], stored as cell values.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteFunction {
    pub grid: Arc<Grid1D>,
    pub values: Vec<f64>,
}

/// t ln|t| extended by 0 at t = 0.
pub fn xlnx(t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t * t.abs().ln()
    }
}

impl DiscreteFunction {
    pub fn new(grid: &Arc<Grid1D>, values: Vec<f64>) -> Result<DiscreteFunction> {
        if values.len() != grid.n {
            return Err(Error::Usage(format!(
                "value vector has {} entries but the grid has {} cells",
                values.len(),
                grid.n
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Usage("grid function values must be finite".into()));
        }
        Ok(DiscreteFunction {
            grid: Arc::clone(grid),
            values,
        })
    }

    pub fn zeros(grid: &Arc<Grid1D>) -> DiscreteFunction {
        DiscreteFunction {
            grid: Arc::clone(grid),
            values: vec![0.0; grid.n],
        }
    }

    pub fn constant(grid: &Arc<Grid1D>, c: f64) -> DiscreteFunction {
        DiscreteFunction {
            grid: Arc::clone(grid),
            values: vec![c; grid.n],
        }
    }

    /// Samples a pointwise function at the cell midpoints.
    pub fn from_fn(grid: &Arc<Grid1D>, f: impl Fn(f64) -> f64) -> DiscreteFunction {
        DiscreteFunction {
            grid: Arc::clone(grid),
            values: grid.midpoints.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn h(&self) -> f64 {
        self.grid.h
    }

    /// ∫ u v (midpoint rule, exact for cellwise-constant integrands).
    pub fn dot(&self, other: &DiscreteFunction) -> f64 {
        assert_eq!(self.n(), other.n(), "grid functions on different meshes");
        self.h()
            * self
                .values
                .iter()
                .zip(&other.values)
                .map(|(u, v)| u * v)
                .sum::<f64>()
    }

    /// ‖u‖₂² = ∫ u².
    pub fn l2_norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// ‖u‖_q = (∫ |u|^q)^{1/q} for q ≥ 1.
    pub fn lp_norm(&self, q: f64) -> f64 {
        assert!(q >= 1.0, "Lebesgue exponent must be at least 1");
        (self.h()
            * self
                .values
                .iter()
                .map(|u| u.abs().powf(q))
                .sum::<f64>())
        .powf(1.0 / q)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn l2_gap(&self, other: &DiscreteFunction) -> f64 {
        assert_eq!(self.n(), other.n(), "grid functions on different meshes");
        (self.h()
            * self
                .values
                .iter()
                .zip(&other.values)
                .map(|(u, v)| (u - v) * (u - v))
                .sum::<f64>())
        .sqrt()
    }

    /// ∫ u² ln|u| with the integrand extended by 0 where u vanishes.
    pub fn integral_u2_ln_u(&self) -> f64 {
        self.h()
            * self
                .values
                .iter()
                .map(|&u| u * xlnx(u))
                .sum::<f64>()
    }

    /// ∫ g(x, u(x)) by the midpoint rule.
    pub fn integral_with(&self, g: impl Fn(f64, f64) -> f64) -> f64 {
        self.h()
            * self
                .grid
                .midpoints
                .iter()
                .zip(&self.values)
                .map(|(&x, &u)| g(x, u))
                .sum::<f64>()
    }

    pub fn scale(&self, c: f64) -> DiscreteFunction {
        DiscreteFunction {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    /// self + c · other.
    pub fn add_scaled(&self, c: f64, other: &DiscreteFunction) -> DiscreteFunction {
        assert_eq!(self.n(), other.n(), "grid functions on different meshes");
        DiscreteFunction {
            grid: Arc::clone(&self.grid),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(u, v)| u + c * v)
                .collect(),
        }
    }

    pub fn abs(&self) -> DiscreteFunction {
        DiscreteFunction {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|v| v.abs()).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }
}
