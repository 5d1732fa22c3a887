//! Radial discretization of radially symmetric functions on ℝ³.
//!
//! Nodes `r_i = i·h`, `i = 0..=N`, `h = R_max/N`. Node `i` owns the spherical
//! shell `[r_i - h/2, r_i + h/2] ∩ [0, R_max]`, whose exact volume is the
//! quadrature weight. Gradients live on edges `(i, i+1)` with coefficient
//! `4π r_{i+1/2}² / h`. The Laplacian is the weighted adjoint of that
//! gradient, so discrete integration by parts holds exactly and the
//! energy gradients used by the solvers are exact derivatives of the
//! discrete energies.

use crate::error::{precondition, Error, Result};
use std::f64::consts::PI;
use std::fmt::Write as _;

pub const MIN_INTERVALS: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    r_max: f64,
    n: usize,
    weights: Vec<f64>,
    edges: Vec<f64>,
}

impl RadialGrid {
    pub fn new(r_max: f64, n: usize) -> Result<Self> {
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(precondition(format!("R_max must be positive, got {r_max}")));
        }
        if n < MIN_INTERVALS {
            return Err(precondition(format!("need N >= {MIN_INTERVALS}, got {n}")));
        }
        let h = r_max / n as f64;
        let ball = |r: f64| 4.0 * PI / 3.0 * r * r * r;
        let weights = (0..=n)
            .map(|i| {
                let r = i as f64 * h;
                let lo = (r - 0.5 * h).max(0.0);
                let hi = (r + 0.5 * h).min(r_max);
                ball(hi) - ball(lo)
            })
            .collect();
        let edges = (0..n)
            .map(|i| {
                let mid = (i as f64 + 0.5) * h;
                4.0 * PI * mid * mid / h
            })
            .collect();
        Ok(Self {
            r_max,
            n,
            weights,
            edges,
        })
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// Number of intervals `N`; there are `N + 1` nodes.
    pub fn intervals(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn h(&self) -> f64 {
        self.r_max / self.n as f64
    }

    #[inline]
    pub fn r(&self, i: usize) -> f64 {
        i as f64 * self.h()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n).map(move |i| self.r(i))
    }

    /// Shell volumes owned by each node.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Edge coefficients `4π r_{i+1/2}²/h`, `i = 0..N`.
    pub fn edge_coefficients(&self) -> &[f64] {
        &self.edges
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got: len,
            });
        }
        Ok(())
    }

    /// `∫_{ℝ³} f(|x|) dx` over the ball of radius `R_max`.
    pub fn integrate(&self, f: &[f64]) -> Result<f64> {
        self.check_len(f.len())?;
        Ok(self.integrate_unchecked(f))
    }

    #[inline]
    pub(crate) fn integrate_unchecked(&self, f: &[f64]) -> f64 {
        self.weights.iter().zip(f).map(|(w, v)| w * v).sum()
    }

    /// `∫ u²`.
    pub(crate) fn mass2(&self, u: &[f64]) -> f64 {
        self.weights.iter().zip(u).map(|(w, v)| w * v * v).sum()
    }

    /// `∫ |∇u|²` from first differences.
    pub(crate) fn grad2(&self, u: &[f64]) -> f64 {
        self.edges
            .iter()
            .zip(u.windows(2))
            .map(|(c, p)| {
                let d = p[1] - p[0];
                c * d * d
            })
            .sum()
    }

    /// `∂/∂u_i` of `½∫|∇u|²`, i.e. the stiffness matrix applied to `u`.
    pub(crate) fn stiffness_apply(&self, u: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (i, c) in self.edges.iter().enumerate() {
            let flux = c * (u[i + 1] - u[i]);
            out[i] -= flux;
            out[i + 1] += flux;
        }
    }

    /// Discrete `△u`; zero at the Dirichlet node `r = R_max`. At `r = 0` it
    /// reduces to `6(u₁ - u₀)/h²`, the regular limit `3u''(0)` with `u'(0) = 0`.
    pub fn laplacian(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_len(u.len())?;
        if self.n < 3 {
            return Err(precondition("laplacian needs N >= 3"));
        }
        let mut out = vec![0.0; u.len()];
        self.laplacian_into(u, &mut out);
        Ok(out)
    }

    pub(crate) fn laplacian_into(&self, u: &[f64], out: &mut [f64]) {
        self.stiffness_apply(u, out);
        for (o, w) in out.iter_mut().zip(&self.weights) {
            *o = -*o / w;
        }
        out[self.n] = 0.0;
    }

    /// `∫ |∇u|²` contribution from an exterior harmonic tail `A/r` matching
    /// `u(R_max)`: `4π R_max u(R_max)²`.
    pub(crate) fn exterior_tail(&self, boundary_value: f64) -> f64 {
        4.0 * PI * self.r_max * boundary_value * boundary_value
    }
}

/// A nonnegative radial profile `u(r)` vanishing at `R_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    grid: RadialGrid,
    values: Vec<f64>,
}

impl RadialProfile {
    pub fn new(grid: RadialGrid, values: Vec<f64>) -> Result<Self> {
        grid.check_len(values.len())?;
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
            return Err(precondition(format!(
                "profile value {v} at node {i} is not >= 0"
            )));
        }
        if values[grid.n] != 0.0 {
            return Err(precondition("profile must vanish at R_max"));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` on the grid, clipping negatives to 0 and forcing `u(R_max) = 0`.
    pub fn from_fn(grid: RadialGrid, f: impl Fn(f64) -> f64) -> Self {
        let n = grid.n;
        let values = (0..=n)
            .map(|i| if i == n { 0.0 } else { f(grid.r(i)).max(0.0) })
            .collect();
        Self { grid, values }
    }

    pub fn zeros(grid: RadialGrid) -> Self {
        let values = vec![0.0; grid.len()];
        Self { grid, values }
    }

    pub(crate) fn from_raw(grid: RadialGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(grid.len(), values.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// `‖u‖²_{L²}`.
    pub fn mass2(&self) -> f64 {
        self.grid.mass2(&self.values)
    }

    /// `∫|∇u|²`.
    pub fn grad2(&self) -> f64 {
        self.grid.grad2(&self.values)
    }

    pub fn laplacian(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.values.len()];
        self.grid.laplacian_into(&self.values, &mut out);
        out
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor >= 0.0) {
            return Err(precondition("scale factor must be >= 0"));
        }
        Ok(Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
        })
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Radius containing the given fraction of `∫u²`.
    pub fn mass_radius(&self, fraction: f64) -> f64 {
        let w = self.grid.weights();
        let total = self.mass2();
        let mut acc = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            acc += w[i] * v * v;
            if acc >= fraction * total {
                return self.grid.r(i);
            }
        }
        self.grid.r_max()
    }

    /// Relative L² distance `‖u - v‖/‖v‖` on a shared grid.
    pub fn relative_l2_distance(&self, other: &RadialProfile) -> Result<f64> {
        other.grid.check_len(self.values.len())?;
        let diff: Vec<f64> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Ok((self.grid.mass2(&diff) / other.mass2()).sqrt())
    }

    /// CSV with header `r,<column>`.
    pub fn to_csv(&self, column: &str) -> String {
        profile_csv(&self.grid, &self.values, column)
    }
}

pub(crate) fn profile_csv(grid: &RadialGrid, values: &[f64], column: &str) -> String {
    let mut s = String::with_capacity(values.len() * 48);
    let _ = writeln!(s, "r,{column}");
    for (i, v) in values.iter().enumerate() {
        let _ = writeln!(s, "{:.15e},{:.15e}", grid.r(i), v);
    }
    s
}
