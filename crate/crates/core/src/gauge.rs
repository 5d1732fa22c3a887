//! Electrostatic subproblem of the Klein–Gordon–Maxwell system.
//!
//! For a matter profile `u` and coupling `q > 0` the reduced potential `φ_u`
//! minimizes
//!
//! ```text
//! K(u, φ) = ∫(|∇φ|² + (qφ - 1)²u²)
//! ```
//!
//! and solves `-△φ + q²u²φ = qu²`. Outside `R_max` the potential is continued
//! harmonically as `φ(R)R/r`, which adds `4πRφ(R)²` to the Dirichlet integral
//! and closes the system with a Robin row. On the grid this makes the identities
//! `K(u, φ_u) = ∫(1 - qφ_u)u²` and `4πRφ_u(R) = qK(u)` exact, and the system
//! matrix an M-matrix, so `0 ≤ φ_u ≤ 1/q`.

use crate::error::{precondition, Error, Result};
use crate::functionals::{reduced_from_parts, remainder_integral, sigma_window, ChargeWindow};
use crate::grid::{profile_csv, RadialGrid, RadialProfile};
use crate::linalg::SymTridiagonal;
use crate::model::NonlinearSpec;

/// Slack allowed on the `0 ≤ φ ≤ 1/q` bounds after a solve.
const BOUND_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct GaugePotential {
    grid: RadialGrid,
    values: Vec<f64>,
    q: f64,
}

impl GaugePotential {
    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn coupling(&self) -> f64 {
        self.q
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Value at `R_max`, which sets the exterior `A/r` tail.
    pub fn boundary_value(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// CSV with header `r,phi`.
    pub fn to_csv(&self) -> String {
        profile_csv(&self.grid, &self.values, "phi")
    }
}

fn check_coupling(q: f64) -> Result<()> {
    if !(q > 0.0 && q.is_finite()) {
        return Err(precondition(format!(
            "coupling q must be positive, got {q}"
        )));
    }
    Ok(())
}

/// Solves `-△φ + q²u²φ = qu²` with the Robin closure at `R_max`.
pub fn solve_phi(u: &RadialProfile, q: f64) -> Result<GaugePotential> {
    check_coupling(q)?;
    let values = solve_phi_values(u.grid(), u.values(), q)?;
    Ok(GaugePotential {
        grid: u.grid().clone(),
        values,
        q,
    })
}

pub(crate) fn solve_phi_values(grid: &RadialGrid, u: &[f64], q: f64) -> Result<Vec<f64>> {
    let n = grid.len();
    let w = grid.weights();
    let c = grid.edge_coefficients();
    let mut a = SymTridiagonal::new(n);
    for (i, &ci) in c.iter().enumerate() {
        a.diag[i] += ci;
        a.diag[i + 1] += ci;
        a.off[i] = -ci;
    }
    let mut rhs = vec![0.0; n];
    for i in 0..n {
        let s = u[i] * u[i] * w[i];
        a.diag[i] += q * q * s;
        rhs[i] = q * s;
    }
    a.diag[n - 1] += 4.0 * std::f64::consts::PI * grid.r_max();
    let phi = a
        .solve(&rhs)
        .ok_or_else(|| Error::Invariant("singular gauge system".into()))?;
    let cap = 1.0 / q;
    if let Some((i, v)) = phi
        .iter()
        .enumerate()
        .find(|(_, &v)| !(v >= -BOUND_SLACK * cap && v <= cap * (1.0 + BOUND_SLACK)))
    {
        return Err(Error::Invariant(format!(
            "phi[{i}] = {v} violates 0 <= phi <= 1/q = {cap}"
        )));
    }
    Ok(phi)
}

/// `K(u, φ) = ∫(|∇φ|² + (qφ - 1)²u²)` including the exterior tail of `φ`.
/// At `φ = φ_u` this equals [`k_reduced`].
pub fn k_variational(u: &RadialProfile, phi: &GaugePotential) -> Result<f64> {
    if phi.grid != *u.grid() {
        return Err(precondition("u and phi live on different grids"));
    }
    let g = u.grid();
    let q = phi.q;
    let matter: f64 = g
        .weights()
        .iter()
        .zip(u.values().iter().zip(&phi.values))
        .map(|(w, (&v, &p))| {
            let d = q * p - 1.0;
            w * d * d * v * v
        })
        .sum();
    Ok(g.grad2(&phi.values) + g.exterior_tail(phi.boundary_value()) + matter)
}

/// `K(u) = ∫(1 - qφ_u)u²`.
pub fn k_reduced(u: &RadialProfile, phi: &GaugePotential) -> f64 {
    k_from_values(u.grid(), u.values(), &phi.values, phi.q)
}

pub(crate) fn k_from_values(grid: &RadialGrid, u: &[f64], phi: &[f64], q: f64) -> f64 {
    grid.weights()
        .iter()
        .zip(u.iter().zip(phi))
        .map(|(w, (&v, &p))| w * (1.0 - q * p) * v * v)
        .sum()
}

/// Reduced KGM functionals at charge `σ`; the physical charge is `qσ`.
#[derive(Debug, Clone)]
pub struct KgmFunctionals {
    pub k: f64,
    /// `I = K - ‖u‖²`, never positive.
    pub i: f64,
    pub j: f64,
    pub e_sigma: f64,
    pub omega: f64,
    pub phi: GaugePotential,
}

impl KgmFunctionals {
    /// Charge window `mK ± √(2K|J|)` when `J < 0`.
    pub fn window(&self, mass: f64) -> Option<ChargeWindow> {
        sigma_window(self.k, self.j, mass)
    }
}

/// Solves for `φ_u`, then evaluates `K`, `I`, `J = ∫(½|∇u|² + R(u) + ½m²qφ_u u²)`,
/// `ω = -σ/K` and `E_σ = J + ½(m²K + σ²/K)`.
pub fn kgm_functionals(
    u: &RadialProfile,
    sigma: f64,
    q: f64,
    spec: &NonlinearSpec,
) -> Result<KgmFunctionals> {
    if !(sigma > 0.0) {
        return Err(precondition(format!(
            "charge must be positive, got {sigma}"
        )));
    }
    let (mut f, _) = kgm_parts(u, q, spec)?;
    if !(f.k > 0.0) {
        return Err(Error::Infeasible(format!(
            "profile has zero mass, cannot carry charge {sigma}"
        )));
    }
    let m2 = spec.mass() * spec.mass();
    f.e_sigma = f.j + 0.5 * (m2 * f.k + sigma * sigma / f.k);
    f.omega = -sigma / f.k;
    Ok(f)
}

/// `K`, `I`, `J` and `φ_u` without a charge; also returns `‖u‖²`.
pub(crate) fn kgm_parts(
    u: &RadialProfile,
    q: f64,
    spec: &NonlinearSpec,
) -> Result<(KgmFunctionals, f64)> {
    let phi = solve_phi(u, q)?;
    let g = u.grid();
    let k = k_reduced(u, &phi);
    let norm2 = u.mass2();
    let m2 = spec.mass() * spec.mass();
    let coupling: f64 = g
        .weights()
        .iter()
        .zip(u.values().iter().zip(&phi.values))
        .map(|(w, (&v, &p))| w * p * v * v)
        .sum();
    let j = 0.5 * u.grad2() + remainder_integral(u, spec) + 0.5 * m2 * q * coupling;
    Ok((
        KgmFunctionals {
            k,
            i: k - norm2,
            j,
            e_sigma: f64::NAN,
            omega: f64::NAN,
            phi,
        },
        norm2,
    ))
}

/// L² first variation of the KGM reduced energy,
/// `-△u + W'(u) - ω²(1 - qφ_u)²u`, zero at the Dirichlet node.
pub fn kgm_gradient(
    u: &RadialProfile,
    sigma: f64,
    q: f64,
    spec: &NonlinearSpec,
) -> Result<Vec<f64>> {
    let f = kgm_functionals(u, sigma, q, spec)?;
    Ok(kgm_stationary_lhs(u, f.omega, &f.phi, spec))
}

/// `-△u - ω²(1 - qφ)²u + W'(u)` for a given `ω` and potential.
pub fn kgm_stationary_lhs(
    u: &RadialProfile,
    omega: f64,
    phi: &GaugePotential,
    spec: &NonlinearSpec,
) -> Vec<f64> {
    let lap = u.laplacian();
    let q = phi.q;
    let n = u.grid().intervals();
    let mut out: Vec<f64> = u
        .values()
        .iter()
        .zip(lap.iter().zip(&phi.values))
        .map(|(&v, (l, &p))| {
            let s = 1.0 - q * p;
            -l - omega * omega * s * s * v + spec.dw(v)
        })
        .collect();
    out[n] = 0.0;
    out
}

/// `-△φ + q²u²φ - qu²` with the Robin row at `R_max`; vanishes for `φ = φ_u`.
pub fn gauge_residual(u: &RadialProfile, phi: &GaugePotential) -> Vec<f64> {
    let g = u.grid();
    let q = phi.q;
    let mut s = vec![0.0; g.len()];
    g.stiffness_apply(&phi.values, &mut s);
    let n = g.intervals();
    s[n] += 4.0 * std::f64::consts::PI * g.r_max() * phi.values[n];
    s.iter()
        .zip(g.weights())
        .zip(u.values().iter().zip(&phi.values))
        .map(|((si, w), (&v, &p))| si / w + q * v * v * (q * p - 1.0))
        .collect()
}

/// Reduced KGM energy via `∫(½|∇u|² + W(u)) + σ²/(2K)`; agrees with
/// [`KgmFunctionals::e_sigma`] identically.
pub fn kgm_reduced_energy(
    u: &RadialProfile,
    sigma: f64,
    q: f64,
    spec: &NonlinearSpec,
) -> Result<f64> {
    check_coupling(q)?;
    let phi = solve_phi(u, q)?;
    let k = k_reduced(u, &phi);
    let base = 0.5 * u.grad2() + crate::functionals::potential_integral(u, spec);
    Ok(reduced_from_parts(base, k, sigma)?.energy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::{nlkg_first_variation, nlkg_j, reduced_energy_sigma};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn tent(s1: f64, r: f64, rmax: f64, n: usize) -> RadialProfile {
        let g = RadialGrid::new(rmax, n).unwrap();
        RadialProfile::from_fn(g, move |x| s1 * (r + 1.0 - x).clamp(0.0, 1.0))
    }

    fn dw() -> NonlinearSpec {
        NonlinearSpec::default_double_well()
    }

    #[test]
    fn zero_source_gives_zero_potential() {
        let g = RadialGrid::new(5.0, 100).unwrap();
        let phi = solve_phi(&RadialProfile::zeros(g), 1.0).unwrap();
        assert!(phi.values().iter().all(|&v| v == 0.0));
        assert!(solve_phi(&tent(1.0, 1.0, 5.0, 100), 0.0).is_err());
    }

    #[test]
    fn tent_potential_shape_and_far_field() {
        let u = tent(1.0, 1.0, 40.0, 4000);
        let phi = solve_phi(&u, 1.0).unwrap();
        let v = phi.values();
        assert!(v.windows(2).all(|p| p[1] <= p[0] + 1e-15));
        assert!(v.iter().all(|&p| (0.0..=1.0).contains(&p)));
        let k = k_reduced(&u, &phi);
        let far = 4.0 * PI * 40.0 * phi.boundary_value();
        assert_relative_eq!(far, k, max_relative = 1e-10);
        // r·φ(r) → qK/(4π) already well inside the domain
        let i = 2000;
        let rphi = u.grid().r(i) * v[i];
        assert_relative_eq!(rphi, k / (4.0 * PI), max_relative = 1e-2);
    }

    #[test]
    fn strong_coupling_bound() {
        let u = tent(1.0, 1.0, 10.0, 500);
        let phi = solve_phi(&u, 100.0).unwrap();
        assert!(phi.max_value() <= 0.01 * (1.0 + 1e-12));
    }

    #[test]
    fn two_forms_of_k_agree() {
        for q in [0.1, 1.0, 10.0] {
            let u = tent(1.0, 1.0, 12.0, 600);
            let phi = solve_phi(&u, q).unwrap();
            let a = k_variational(&u, &phi).unwrap();
            let b = k_reduced(&u, &phi);
            assert_relative_eq!(a, b, max_relative = 1e-10);
            assert!(b > 0.0 && b < u.mass2());
            let res = gauge_residual(&u, &phi);
            assert!(
                res.iter().all(|r| r.abs() < 1e-9),
                "{:?}",
                res.iter().fold(0.0f64, |a, b| a.max(b.abs()))
            );
        }
    }

    #[test]
    fn phi_minimizes_k() {
        let u = tent(1.0, 2.0, 8.0, 200);
        let phi = solve_phi(&u, 0.7).unwrap();
        let k0 = k_variational(&u, &phi).unwrap();
        for (i, eps) in [(3usize, 1e-3), (100, -2e-3), (199, 1e-2)] {
            let mut p = phi.clone();
            p.values[i] += eps;
            assert!(k_variational(&u, &p).unwrap() > k0);
        }
    }

    #[test]
    fn decoupling_limit() {
        let u = tent(1.0, 5.0, 10.0, 1000);
        let f = kgm_functionals(&u, 700.0, 1e-8, &dw()).unwrap();
        assert_relative_eq!(f.k, u.mass2(), max_relative = 1e-6);
        assert_relative_eq!(f.j, nlkg_j(&u, &dw()), max_relative = 1e-6);
        let e = reduced_energy_sigma(&u, 700.0, &dw()).unwrap().energy;
        assert_relative_eq!(f.e_sigma, e, max_relative = 1e-6);
        let g1 = kgm_gradient(&u, 700.0, 1e-8, &dw()).unwrap();
        let g0 = nlkg_first_variation(&u, 700.0, &dw()).unwrap();
        let scale = g0.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        for (a, b) in g1.iter().zip(&g0) {
            assert!((a - b).abs() < 1e-5 * scale);
        }
    }

    #[test]
    fn reduced_energy_identity_and_bounds() {
        let u = tent(1.0, 1.0, 10.0, 500);
        let f = kgm_functionals(&u, 1.0, 1.0, &dw()).unwrap();
        assert!(f.k > 0.0 && f.k < 52.0 * PI / 15.0);
        assert!(f.i < 0.0);
        let e = kgm_reduced_energy(&u, 1.0, 1.0, &dw()).unwrap();
        assert_relative_eq!(f.e_sigma, e, max_relative = 1e-12);
        assert!(kgm_functionals(&RadialProfile::zeros(u.grid().clone()), 1.0, 1.0, &dw()).is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let g = RadialGrid::new(8.0, 160).unwrap();
        let u = RadialProfile::from_fn(g.clone(), |r| {
            0.9 * (-0.3 * r * r).exp() + 0.2 * (-(r - 2.0).powi(2)).exp()
        });
        let (sigma, q) = (6.0, 0.4);
        let grad = kgm_gradient(&u, sigma, q, &dw()).unwrap();
        let v: Vec<f64> = (0..g.len())
            .map(|i| {
                if i == g.intervals() {
                    0.0
                } else {
                    (0.37 * i as f64).sin() * (-(g.r(i) / 4.0).powi(2)).exp()
                }
            })
            .collect();
        let eps = 1e-6;
        let shift = |s: f64| {
            let vals: Vec<f64> = u.values().iter().zip(&v).map(|(a, b)| a + s * b).collect();
            kgm_reduced_energy(&RadialProfile::from_raw(g.clone(), vals), sigma, q, &dw()).unwrap()
        };
        let fd = (shift(eps) - shift(-eps)) / (2.0 * eps);
        let exact: f64 = g
            .weights()
            .iter()
            .zip(grad.iter().zip(&v))
            .map(|(w, (a, b))| w * a * b)
            .sum();
        assert_relative_eq!(fd, exact, max_relative = 1e-6);
    }
}
