//! Dense symmetric matrices in row-major storage, with the few kernels the
//! rest of the crate needs: matrix-vector products, quadratic and bilinear
//! forms, and a Cholesky factorization for shifted solves.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> SymMatrix {
        SymMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn diagonal(n: usize, d: f64) -> SymMatrix {
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = d;
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Mutable view of the full row-major buffer, for parallel assembly
    /// over disjoint row chunks.
    pub fn raw_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let row = self.row(i);
            let mut acc = 0.0;
            for j in 0..self.n {
                acc += row[j] * x[j];
            }
            y[i] = acc;
        }
        y
    }

    /// xᵀ A x, accumulated row by row in a fixed order.
    pub fn quad(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.n);
        let mut acc = 0.0;
        for i in 0..self.n {
            let row = self.row(i);
            let mut r = 0.0;
            for j in 0..self.n {
                r += row[j] * x[j];
            }
            acc += x[i] * r;
        }
        acc
    }

    /// xᵀ A y.
    pub fn bilin(&self, x: &[f64], y: &[f64]) -> f64 {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        let mut acc = 0.0;
        for i in 0..self.n {
            let row = self.row(i);
            let mut r = 0.0;
            for j in 0..self.n {
                r += row[j] * y[j];
            }
            acc += x[i] * r;
        }
        acc
    }

    /// self + c · other.
    pub fn add_scaled(&self, c: f64, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.n, other.n);
        SymMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + c * b)
                .collect(),
        }
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest |A_ij − A_ji| over all pairs.
    pub fn symmetry_defect(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                d = d.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        d
    }

    /// Smallest Gershgorin disc endpoint, a lower bound on the spectrum.
    pub fn gershgorin_lower(&self) -> f64 {
        let mut lo = f64::INFINITY;
        for i in 0..self.n {
            let mut radius = 0.0;
            for j in 0..self.n {
                if j != i {
                    radius += self.get(i, j).abs();
                }
            }
            lo = lo.min(self.get(i, i) - radius);
        }
        lo
    }

    /// Lower-triangular Cholesky factor of a positive definite matrix.
    pub fn cholesky(&self) -> Result<CholeskyFactor> {
        let n = self.n;
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = self.get(i, j);
                for k in 0..j {
                    sum -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if sum <= 0.0 || !sum.is_finite() {
                        return Err(Error::Domain(format!(
                            "matrix is not positive definite (pivot {sum:.3e} at index {i})"
                        )));
                    }
                    l[i * n + i] = sum.sqrt();
                } else {
                    l[i * n + j] = sum / l[j * n + j];
                }
            }
        }
        Ok(CholeskyFactor { n, l })
    }

    pub fn raw(&self) -> &[f64] {
        &self.data
    }

    pub fn from_raw(n: usize, data: Vec<f64>) -> Result<SymMatrix> {
        if data.len() != n * n {
            return Err(Error::Usage(format!(
                "matrix payload has {} entries, expected {}",
                data.len(),
                n * n
            )));
        }
        Ok(SymMatrix { n, data })
    }
}

/// Lower-triangular factor L with A = L Lᵀ.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    n: usize,
    l: Vec<f64>,
}

impl CholeskyFactor {
    /// Solves A x = b by forward and back substitution.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut sum = y[i];
            for k in 0..i {
                sum -= self.l[i * n + k] * y[k];
            }
            y[i] = sum / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut sum = y[i];
            for k in (i + 1)..n {
                sum -= self.l[k * n + i] * y[k];
            }
            y[i] = sum / self.l[i * n + i];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SymMatrix {
        let mut m = SymMatrix::zeros(3);
        let vals = [[4.0, 1.0, 0.5], [1.0, 3.0, -0.25], [0.5, -0.25, 5.0]];
        for i in 0..3 {
            for j in 0..3 {
                m.set(i, j, vals[i][j]);
            }
        }
        m
    }

    #[test]
    fn quad_and_bilin_agree() {
        let m = sample();
        let x = [1.0, -2.0, 0.5];
        let y = m.matvec(&x);
        let q: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        assert!((m.quad(&x) - q).abs() < 1e-14);
        assert!((m.bilin(&x, &x) - q).abs() < 1e-14);
    }

    #[test]
    fn cholesky_solves() {
        let m = sample();
        let f = m.cholesky().unwrap();
        let b = [1.0, 2.0, 3.0];
        let x = f.solve(&b);
        let r = m.matvec(&x);
        for i in 0..3 {
            assert!((r[i] - b[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let mut m = SymMatrix::diagonal(2, 1.0);
        m.set(1, 1, -2.0);
        assert!(m.cholesky().is_err());
    }

    #[test]
    fn gershgorin_bounds_spectrum() {
        let m = sample();
        let lo = m.gershgorin_lower();
        // All eigenvalues of this diagonally dominant matrix exceed the bound.
        let x = [1.0, 1.0, 1.0];
        let rayleigh = m.quad(&x) / 3.0;
        assert!(lo <= rayleigh);
        assert!(lo >= 1.0); // 3 − 1.25
    }

    #[test]
    fn symmetry_defect_detects_asymmetry() {
        let mut m = sample();
        assert_eq!(m.symmetry_defect(), 0.0);
        // A dyadic perturbation keeps the arithmetic exact.
        let eps = 2.0f64.powi(-30);
        m.set(0, 1, 1.0 + eps);
        assert_eq!(m.symmetry_defect(), eps);
    }
}
