//! Small dense/banded kernels shared by the solvers.

use std::f64::consts::PI;

/// Symmetric tridiagonal system, `off[i]` couples rows `i` and `i+1`.
#[derive(Debug, Clone)]
pub(crate) struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(n: usize) -> Self {
        Self {
            diag: vec![0.0; n],
            off: vec![0.0; n.saturating_sub(1)],
        }
    }

    /// Thomas algorithm; returns `None` on a zero pivot.
    pub fn solve(&self, rhs: &[f64]) -> Option<Vec<f64>> {
        let n = self.diag.len();
        debug_assert_eq!(rhs.len(), n);
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut pivot = self.diag[0];
        if pivot == 0.0 || !pivot.is_finite() {
            return None;
        }
        c[0] = if n > 1 { self.off[0] / pivot } else { 0.0 };
        d[0] = rhs[0] / pivot;
        for i in 1..n {
            pivot = self.diag[i] - self.off[i - 1] * c[i - 1];
            if pivot == 0.0 || !pivot.is_finite() {
                return None;
            }
            if i + 1 < n {
                c[i] = self.off[i] / pivot;
            }
            d[i] = (rhs[i] - self.off[i - 1] * d[i - 1]) / pivot;
        }
        for i in (0..n - 1).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        Some(d)
    }
}

/// Orthonormal type-I sine transform of length `m`, stored densely.
/// It is symmetric and its own inverse.
#[derive(Debug, Clone)]
pub(crate) struct SineTransform {
    m: usize,
    matrix: Vec<f64>,
    /// Eigenvalues of `tridiag(-1, 2, -1)` in the sine basis.
    pub eigenvalues: Vec<f64>,
}

impl SineTransform {
    pub fn new(m: usize) -> Self {
        let norm = (2.0 / (m + 1) as f64).sqrt();
        let mut matrix = vec![0.0; m * m];
        for k in 0..m {
            for j in 0..m {
                matrix[k * m + j] = norm * (PI * ((k + 1) * (j + 1)) as f64 / (m + 1) as f64).sin();
            }
        }
        let eigenvalues = (0..m)
            .map(|k| 2.0 - 2.0 * (PI * (k + 1) as f64 / (m + 1) as f64).cos())
            .collect();
        Self {
            m,
            matrix,
            eigenvalues,
        }
    }

    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let m = self.m;
        for k in 0..m {
            let row = &self.matrix[k * m..(k + 1) * m];
            out[k] = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }
}
