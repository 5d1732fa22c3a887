//! Axisymmetric vortices `ψ = u(r, z)e^{i(ℓθ - ωt)}` of the NLKG equation.
//!
//! The profile lives on a uniform `(r, z)` grid with measure `2πr dr dz`.
//! Node `(i, j)` owns the cell `[r_i ± h_r/2] × [z_j ± h_z/2]`, of volume
//! `2πr_i h_r h_z`. The profile vanishes on the axis and on the outer
//! boundary; the axis condition is what makes `∫(ℓ²/r²)u²` finite.

use crate::error::{precondition, Error, Result};
use crate::gauge::GaugePotential;
use crate::linalg::{SineTransform, SymTridiagonal};
use crate::minimize::{
    descend, diagnose, DescentProblem, SolitonResult, SolveOptions, SolveStatus, Stationary,
    StationaryKind,
};
use crate::model::NonlinearSpec;
use std::f64::consts::PI;
use std::fmt::Write as _;

/// `r_i = i·h_r`, `i = 0..=N_r`; `z_j = -Z + j·h_z`, `j = 0..=N_z`.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisymGrid {
    r_max: f64,
    z_max: f64,
    nr: usize,
    nz: usize,
}

impl AxisymGrid {
    pub fn new(r_max: f64, z_max: f64, nr: usize, nz: usize) -> Result<Self> {
        if !(r_max > 0.0 && z_max > 0.0 && r_max.is_finite() && z_max.is_finite()) {
            return Err(precondition("vortex grid extents must be positive"));
        }
        if nr < 4 || nz < 4 {
            return Err(precondition(format!(
                "vortex grid needs at least 4 intervals per axis, got {nr}x{nz}"
            )));
        }
        Ok(Self {
            r_max,
            z_max,
            nr,
            nz,
        })
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn z_max(&self) -> f64 {
        self.z_max
    }

    /// Interval counts `(N_r, N_z)`.
    pub fn intervals(&self) -> (usize, usize) {
        (self.nr, self.nz)
    }

    pub fn hr(&self) -> f64 {
        self.r_max / self.nr as f64
    }

    pub fn hz(&self) -> f64 {
        2.0 * self.z_max / self.nz as f64
    }

    pub fn r(&self, i: usize) -> f64 {
        i as f64 * self.hr()
    }

    pub fn z(&self, j: usize) -> f64 {
        -self.z_max + j as f64 * self.hz()
    }

    pub fn len(&self) -> usize {
        (self.nr + 1) * (self.nz + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * (self.nz + 1) + j
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || i == self.nr || j == 0 || j == self.nz
    }

    fn cell_volume(&self, i: usize) -> f64 {
        2.0 * PI * self.r(i) * self.hr() * self.hz()
    }

    /// Nodal quadrature weights `2πr h_r h_z`; the first variation is the
    /// energy gradient divided by these.
    pub fn weights(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.len()];
        for i in 0..=self.nr {
            let v = self.cell_volume(i);
            for j in 0..=self.nz {
                w[self.index(i, j)] = v;
            }
        }
        w
    }
}

/// Nonnegative `u(r, z)` with winding number `ℓ`.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisymProfile {
    grid: AxisymGrid,
    values: Vec<f64>,
    ell: i32,
}

impl AxisymProfile {
    pub fn new(grid: AxisymGrid, values: Vec<f64>, ell: i32) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| !(*v >= 0.0)) {
            return Err(precondition("vortex profile must be nonnegative"));
        }
        let (nr, nz) = grid.intervals();
        for i in 0..=nr {
            for j in 0..=nz {
                if grid.is_boundary(i, j) && values[grid.index(i, j)] != 0.0 {
                    return Err(precondition(
                        "vortex profile must vanish on the axis and outer boundary",
                    ));
                }
            }
        }
        Ok(Self { grid, values, ell })
    }

    /// Samples `f(r, z)`, clipping negatives and zeroing boundary nodes.
    pub fn from_fn(grid: AxisymGrid, ell: i32, f: impl Fn(f64, f64) -> f64) -> Self {
        let (nr, nz) = grid.intervals();
        let mut values = vec![0.0; grid.len()];
        for i in 0..=nr {
            for j in 0..=nz {
                if !grid.is_boundary(i, j) {
                    values[grid.index(i, j)] = f(grid.r(i), grid.z(j)).max(0.0);
                }
            }
        }
        Self { grid, values, ell }
    }

    /// Torus `s₁·exp(-((r - r₀)² + z²)/w²)`.
    pub fn torus(grid: AxisymGrid, ell: i32, s1: f64, r0: f64, width: f64) -> Self {
        Self::from_fn(grid, ell, |r, z| {
            s1 * (-((r - r0).powi(2) + z * z) / (width * width)).exp()
        })
    }

    pub fn grid(&self) -> &AxisymGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn ell(&self) -> i32 {
        self.ell
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    /// `∫u² 2πr dr dz`.
    pub fn mass2(&self) -> f64 {
        let (nr, nz) = self.grid.intervals();
        (0..=nr)
            .map(|i| {
                self.grid.cell_volume(i) * (0..=nz).map(|j| self.at(i, j).powi(2)).sum::<f64>()
            })
            .sum()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Largest value on the axis `r = 0`.
    pub fn axis_max(&self) -> f64 {
        (0..=self.grid.nz)
            .map(|j| self.at(0, j))
            .fold(0.0, f64::max)
    }

    /// `max_z u(r₁, z)/max u` at the first node off the axis.
    pub fn near_axis_ratio(&self) -> f64 {
        let m = self.max_value();
        if m == 0.0 {
            return 0.0;
        }
        (0..=self.grid.nz)
            .map(|j| self.at(1, j))
            .fold(0.0, f64::max)
            / m
    }

    /// `(r, z)` of the maximum.
    pub fn peak_location(&self) -> (f64, f64) {
        let (k, _) = self
            .values
            .iter()
            .enumerate()
            .fold(
                (0, f64::MIN),
                |acc, (k, &v)| if v > acc.1 { (k, v) } else { acc },
            );
        let i = k / (self.grid.nz + 1);
        let j = k % (self.grid.nz + 1);
        (self.grid.r(i), self.grid.z(j))
    }

    /// CSV with header `r,z,u`.
    pub fn to_csv(&self) -> String {
        let (nr, nz) = self.grid.intervals();
        let mut s = String::with_capacity(self.values.len() * 72);
        s.push_str("r,z,u\n");
        for i in 0..=nr {
            for j in 0..=nz {
                let _ = writeln!(
                    s,
                    "{:.15e},{:.15e},{:.15e}",
                    self.grid.r(i),
                    self.grid.z(j),
                    self.at(i, j)
                );
            }
        }
        s
    }
}

/// Reduced vortex energy on the grid.
struct VortexProblem<'a> {
    grid: &'a AxisymGrid,
    spec: &'a NonlinearSpec,
    sigma: f64,
    ell2: f64,
    weights: Vec<f64>,
    transform: SineTransform,
}

impl<'a> VortexProblem<'a> {
    fn new(grid: &'a AxisymGrid, spec: &'a NonlinearSpec, sigma: f64, ell: i32) -> Self {
        Self {
            grid,
            spec,
            sigma,
            ell2: (ell as f64).powi(2),
            weights: grid.weights(),
            transform: SineTransform::new(grid.nz - 1),
        }
    }

    /// `½∫|∇u|² + ½ℓ²∫u²/r² + ∫W(u)` and `∫u²`.
    fn parts(&self, u: &[f64]) -> (f64, f64) {
        let g = self.grid;
        let (nr, nz) = g.intervals();
        let (hr, hz) = (g.hr(), g.hz());
        let mut grad = 0.0;
        let mut rest = 0.0;
        let mut k = 0.0;
        for i in 0..=nr {
            let ri = g.r(i);
            let rh = (i as f64 + 0.5) * hr;
            for j in 0..=nz {
                let v = u[g.index(i, j)];
                if i < nr {
                    let d = u[g.index(i + 1, j)] - v;
                    grad += 2.0 * PI * rh * hz / hr * d * d;
                }
                if j < nz {
                    let d = u[g.index(i, j + 1)] - v;
                    grad += 2.0 * PI * ri * hr / hz * d * d;
                }
                if i > 0 {
                    let w = self.weights[g.index(i, j)];
                    rest += w * (0.5 * self.ell2 * v * v / (ri * ri) + self.spec.w(v));
                    k += w * v * v;
                }
            }
        }
        (0.5 * grad + rest, k)
    }
}

impl DescentProblem for VortexProblem<'_> {
    fn len(&self) -> usize {
        self.grid.len()
    }

    fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn is_fixed(&self, k: usize) -> bool {
        let nz1 = self.grid.nz + 1;
        self.grid.is_boundary(k / nz1, k % nz1)
    }

    fn energy(&self, u: &[f64]) -> Result<f64> {
        let (base, k) = self.parts(u);
        if !(k > 0.0) {
            return Err(Error::Infeasible("iterate has zero mass".into()));
        }
        Ok(base + self.sigma * self.sigma / (2.0 * k))
    }

    fn gradient(&self, u: &[f64], out: &mut [f64]) -> Result<f64> {
        let (base, k) = self.parts(u);
        if !(k > 0.0) {
            return Err(Error::Infeasible("iterate has zero mass".into()));
        }
        let omega2 = self.sigma * self.sigma / (k * k);
        let g = self.grid;
        let (nr, nz) = g.intervals();
        let (hr, hz) = (g.hr(), g.hz());
        out.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..=nr {
            let ri = g.r(i);
            let rh = (i as f64 + 0.5) * hr;
            for j in 0..=nz {
                let a = g.index(i, j);
                if i < nr {
                    let b = g.index(i + 1, j);
                    let flux = 2.0 * PI * rh * hz / hr * (u[b] - u[a]);
                    out[a] -= flux;
                    out[b] += flux;
                }
                if j < nz {
                    let b = g.index(i, j + 1);
                    let flux = 2.0 * PI * ri * hr / hz * (u[b] - u[a]);
                    out[a] -= flux;
                    out[b] += flux;
                }
            }
        }
        for i in 1..nr {
            let ri = g.r(i);
            for j in 1..nz {
                let a = g.index(i, j);
                let v = u[a];
                out[a] +=
                    self.weights[a] * (self.ell2 * v / (ri * ri) + self.spec.dw(v) - omega2 * v);
            }
        }
        for i in 0..=nr {
            for j in 0..=nz {
                if g.is_boundary(i, j) {
                    out[g.index(i, j)] = 0.0;
                }
            }
        }
        Ok(base + self.sigma * self.sigma / (2.0 * k))
    }

    fn precondition(&self, g_raw: &[f64], shift: f64) -> Vec<f64> {
        // (A + ℓ²W/r² + cW)d = g on interior nodes, divided by 2πh_r h_z:
        // radial tridiagonal L_r plus r_i·T_z/h_z², diagonalized by a sine
        // transform in z.
        let g = self.grid;
        let (nr, nz) = g.intervals();
        let (hr, hz) = (g.hr(), g.hz());
        let mi = nr - 1;
        let mj = nz - 1;
        let scale = 2.0 * PI * hr * hz;
        let mut spectral = vec![0.0; mi * mj];
        let mut col = vec![0.0; mj];
        let mut out_col = vec![0.0; mj];
        for i in 1..nr {
            for j in 1..nz {
                col[j - 1] = g_raw[g.index(i, j)] / scale;
            }
            self.transform.apply(&col, &mut out_col);
            spectral[(i - 1) * mj..i * mj].copy_from_slice(&out_col);
        }
        let mut result = vec![0.0; g.len()];
        let mut solved = vec![0.0; mi * mj];
        for kz in 0..mj {
            let mu = self.transform.eigenvalues[kz] / (hz * hz);
            let mut t = SymTridiagonal::new(mi);
            for a in 0..mi {
                let i = a + 1;
                let ri = g.r(i);
                let lo = (i as f64 - 0.5) * hr;
                let hi = (i as f64 + 0.5) * hr;
                t.diag[a] = (lo + hi) / (hr * hr) + self.ell2 / ri + shift * ri + mu * ri;
                if a + 1 < mi {
                    t.off[a] = -hi / (hr * hr);
                }
            }
            let rhs: Vec<f64> = (0..mi).map(|a| spectral[a * mj + kz]).collect();
            let x = t
                .solve(&rhs)
                .expect("vortex preconditioner is positive definite");
            for a in 0..mi {
                solved[a * mj + kz] = x[a];
            }
        }
        for i in 1..nr {
            col.copy_from_slice(&solved[(i - 1) * mj..i * mj]);
            self.transform.apply(&col, &mut out_col);
            for j in 1..nz {
                result[g.index(i, j)] = out_col[j - 1];
            }
        }
        result
    }

    fn boundary_mass_fraction(&self, u: &[f64]) -> f64 {
        let g = self.grid;
        let (nr, nz) = g.intervals();
        let mut total = 0.0;
        let mut outer = 0.0;
        for i in 1..nr {
            for j in 1..nz {
                let a = g.index(i, j);
                let m = self.weights[a] * u[a] * u[a];
                total += m;
                let near = i >= nr - nr / 8 || j <= nz / 8 || j >= nz - nz / 8;
                if near {
                    outer += m;
                }
            }
        }
        if total == 0.0 {
            0.0
        } else {
            outer / total
        }
    }
}

fn check_vortex_input(sigma: f64, ell: i32) -> Result<()> {
    if ell == 0 {
        return Err(precondition(
            "winding number must be nonzero; use minimize_nlkg for l = 0",
        ));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(precondition(format!(
            "charge must be positive, got {sigma}"
        )));
    }
    Ok(())
}

/// Minimizes `E_σ(u) = ∫(½|∇u|² + W(u) + ½(ℓ²/r²)u²) + σ²/(2∫u²)` with the
/// winding number of `init`.
pub fn minimize_vortex(
    spec: &NonlinearSpec,
    sigma: f64,
    init: &AxisymProfile,
    opts: &SolveOptions,
) -> Result<SolitonResult<AxisymProfile>> {
    let ell = init.ell;
    check_vortex_input(sigma, ell)?;
    if init.max_value() == 0.0 {
        return Err(precondition("initial profile is identically zero"));
    }
    let grid = &init.grid;
    let problem = VortexProblem::new(grid, spec, sigma, ell);
    let shift = opts
        .preconditioner_shift
        .unwrap_or(spec.mass() * spec.mass());
    let mut out = descend(&problem, init.values.clone(), opts, shift)?;
    let u = AxisymProfile {
        grid: grid.clone(),
        values: out.u.clone(),
        ell,
    };
    let energy = problem.energy(&u.values)?;
    let k = u.mass2();
    let omega = -sigma / k;
    let hylomorphy = energy / sigma;
    diagnose(&problem, &mut out, hylomorphy, spec.mass());
    let residual = u.stationary_residual(omega, None, spec, StationaryKind::Vortex(ell))?;
    Ok(SolitonResult {
        u,
        omega,
        phi: None,
        energy,
        sigma,
        charge: sigma,
        hylomorphy,
        residual,
        iterations: out.iterations,
        converged: out.status == SolveStatus::Converged,
        status: out.status,
    })
}

/// Reduced vortex energy `E_σ` of a profile.
pub fn vortex_reduced_energy(u: &AxisymProfile, sigma: f64, spec: &NonlinearSpec) -> Result<f64> {
    check_vortex_input(sigma, u.ell)?;
    VortexProblem::new(&u.grid, spec, sigma, u.ell).energy(&u.values)
}

/// L² first variation `-△u + (ℓ²/r² - ω*²)u + W'(u)` at `ω* = -σ/∫u²`,
/// zero on boundary nodes.
pub fn vortex_first_variation(
    u: &AxisymProfile,
    sigma: f64,
    spec: &NonlinearSpec,
) -> Result<Vec<f64>> {
    check_vortex_input(sigma, u.ell)?;
    let p = VortexProblem::new(&u.grid, spec, sigma, u.ell);
    let mut raw = vec![0.0; u.values.len()];
    p.gradient(&u.values, &mut raw)?;
    Ok(raw
        .iter()
        .zip(&p.weights)
        .map(|(g, w)| if *w > 0.0 { g / w } else { 0.0 })
        .collect())
}

impl Stationary for AxisymProfile {
    fn stationary_residual(
        &self,
        omega: f64,
        _phi: Option<&GaugePotential>,
        spec: &NonlinearSpec,
        kind: StationaryKind,
    ) -> Result<f64> {
        let StationaryKind::Vortex(ell) = kind else {
            return Err(precondition(
                "axisymmetric profiles only carry the vortex equation",
            ));
        };
        if self.max_value() == 0.0 {
            return Ok(0.0);
        }
        // the first variation at σ = -ωK has exactly this ω
        let p = VortexProblem::new(&self.grid, spec, -omega * self.mass2(), ell);
        let mut raw = vec![0.0; self.values.len()];
        p.gradient(&self.values, &mut raw)?;
        let s: f64 = raw
            .iter()
            .zip(&p.weights)
            .map(|(g, w)| if *w > 0.0 { g * g / w } else { 0.0 })
            .sum();
        Ok(s.sqrt())
    }
}

/// Charge and the axial angular momentum of a vortex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VortexObservables {
    pub charge: f64,
    /// `L₃ = ℓC`.
    pub angular_momentum: f64,
}

pub fn vortex_observables(result: &SolitonResult<AxisymProfile>, ell: i32) -> VortexObservables {
    VortexObservables {
        charge: result.charge,
        angular_momentum: ell as f64 * result.charge,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn dw() -> NonlinearSpec {
        NonlinearSpec::default_double_well()
    }

    fn small() -> AxisymGrid {
        AxisymGrid::new(8.0, 8.0, 24, 32).unwrap()
    }

    #[test]
    fn rejects_zero_winding() {
        let u = AxisymProfile::torus(small(), 0, 1.0, 3.0, 1.5);
        assert!(minimize_vortex(&dw(), 10.0, &u, &SolveOptions::default()).is_err());
        let u = AxisymProfile::torus(small(), 1, 1.0, 3.0, 1.5);
        assert!(minimize_vortex(&dw(), 0.0, &u, &SolveOptions::default()).is_err());
    }

    #[test]
    fn boundary_is_enforced() {
        let u = AxisymProfile::torus(small(), 1, 1.0, 3.0, 1.5);
        assert_eq!(u.axis_max(), 0.0);
        let mut v = u.values().to_vec();
        v[0] = 0.1;
        assert!(AxisymProfile::new(small(), v, 1).is_err());
    }

    #[test]
    fn first_variation_matches_finite_differences() {
        let u = AxisymProfile::torus(small(), 2, 0.9, 3.0, 1.8);
        let sigma = 40.0;
        let grad = vortex_first_variation(&u, sigma, &dw()).unwrap();
        let g = u.grid().clone();
        let w = g.weights();
        let dir: Vec<f64> = (0..g.len())
            .map(|k| {
                let (i, j) = (k / 33, k % 33);
                if g.is_boundary(i, j) {
                    0.0
                } else {
                    ((k as f64) * 0.77).sin()
                }
            })
            .collect();
        let eps = 1e-6;
        let e = |s: f64| {
            let vals: Vec<f64> = u
                .values()
                .iter()
                .zip(&dir)
                .map(|(a, b)| a + s * b)
                .collect();
            let p = AxisymProfile {
                values: vals,
                ..u.clone()
            };
            let spec = dw();
            VortexProblem::new(&g, &spec, sigma, 2)
                .energy(&p.values)
                .unwrap()
        };
        let fd = (e(eps) - e(-eps)) / (2.0 * eps);
        let exact: f64 = grad
            .iter()
            .zip(&dir)
            .zip(&w)
            .map(|((a, b), w)| a * b * w)
            .sum();
        assert_relative_eq!(fd, exact, max_relative = 1e-6);
    }

    #[test]
    fn preconditioner_inverts_operator() {
        let u = AxisymProfile::torus(small(), 1, 0.9, 3.0, 1.8);
        let spec = dw();
        let p = VortexProblem::new(u.grid(), &spec, 1.0, 1);
        let x: Vec<f64> = u.values().to_vec();
        // apply (A + ℓ²W/r² + cW) to x
        let g = u.grid();
        let mut ax = vec![0.0; g.len()];
        let lin = NonlinearSpec::power_deficit(1.0, 1e-300, 0.0, 3.0, 4.0).unwrap();
        let q = VortexProblem::new(g, &lin, 1e-300, 1);
        q.gradient(&x, &mut ax).unwrap();
        // the gradient of the near-linear problem is (A + ℓ²W/r² + m²W)x
        let y = p.precondition(&ax, 1.0);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-10, "{a} {b}");
        }
    }

    #[test]
    fn observables() {
        let u = AxisymProfile::torus(small(), 3, 0.9, 3.0, 1.8);
        let r = SolitonResult {
            u,
            omega: -0.5,
            phi: None,
            energy: 1.0,
            sigma: 7.0,
            charge: 7.0,
            hylomorphy: 1.0 / 7.0,
            residual: 0.0,
            iterations: 0,
            converged: true,
            status: SolveStatus::Converged,
        };
        let o = vortex_observables(&r, 3);
        assert_eq!(o.angular_momentum, 21.0);
        assert_eq!(vortex_observables(&r, 6).angular_momentum, 42.0);
    }
}
