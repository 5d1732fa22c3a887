//! NLKG functionals on the standing-wave ansatz `ψ = u(x)e^{-iωt}`.
//!
//! With `K = ∫u²` the charge is `C = -ωK`. Fixing `C = σ` gives `ω* = -σ/K`
//! and the reduced energy
//!
//! ```text
//! E_σ(u) = ∫(½|∇u|² + W(u)) + σ²/(2K) = J(u) + ½(m²K + σ²/K)
//! ```
//!
//! where `J(u) = ∫(½|∇u|² + R(u))`. The hylomorphy ratio `Λ = E_σ/σ` is below
//! `m` exactly when `(σ - mK)² < 2K|J|`, which defines the charge window of `u`.

use crate::error::{Error, Result};
use crate::grid::RadialProfile;
use crate::model::NonlinearSpec;

/// A point `(u, ω)` of the standing-wave space.
#[derive(Debug, Clone)]
pub struct NlkgState {
    pub u: RadialProfile,
    pub omega: f64,
}

/// `∫W(u)`.
pub fn potential_integral(u: &RadialProfile, spec: &NonlinearSpec) -> f64 {
    let g = u.grid();
    g.weights()
        .iter()
        .zip(u.values())
        .map(|(w, &v)| w * spec.w(v))
        .sum()
}

/// `∫R(u)`.
pub fn remainder_integral(u: &RadialProfile, spec: &NonlinearSpec) -> f64 {
    let g = u.grid();
    g.weights()
        .iter()
        .zip(u.values())
        .map(|(w, &v)| w * spec.r(v))
        .sum()
}

/// `E(u, ω) = ∫(½|∇u|² + W(u) + ½ω²u²)`.
pub fn nlkg_energy(state: &NlkgState, spec: &NonlinearSpec) -> f64 {
    let u = &state.u;
    0.5 * u.grad2() + potential_integral(u, spec) + 0.5 * state.omega * state.omega * u.mass2()
}

/// `C(u, ω) = -ω∫u²`.
pub fn nlkg_charge(state: &NlkgState) -> f64 {
    -state.omega * state.u.mass2()
}

/// `J(u) = ∫(½|∇u|² + R(u))`; negative values place `u` in the set where
/// charge windows are nonempty.
pub fn nlkg_j(u: &RadialProfile, spec: &NonlinearSpec) -> f64 {
    0.5 * u.grad2() + remainder_integral(u, spec)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedEnergy {
    pub energy: f64,
    /// Frequency enforcing the charge constraint.
    pub omega: f64,
}

/// Energy on the fixed-charge manifold with `ω` eliminated.
pub fn reduced_energy_sigma(
    u: &RadialProfile,
    sigma: f64,
    spec: &NonlinearSpec,
) -> Result<ReducedEnergy> {
    let k = u.mass2();
    let base = 0.5 * u.grad2() + potential_integral(u, spec);
    reduced_from_parts(base, k, sigma)
}

pub(crate) fn reduced_from_parts(base: f64, k: f64, sigma: f64) -> Result<ReducedEnergy> {
    if sigma == 0.0 {
        return Ok(ReducedEnergy {
            energy: base,
            omega: 0.0,
        });
    }
    if !(k > 0.0) {
        return Err(Error::Infeasible(format!(
            "profile has zero mass, cannot carry charge {sigma}"
        )));
    }
    Ok(ReducedEnergy {
        energy: base + sigma * sigma / (2.0 * k),
        omega: -sigma / k,
    })
}

/// `Λ(u, σ) = E_σ(u)/σ`.
pub fn hylomorphy_ratio(u: &RadialProfile, sigma: f64, spec: &NonlinearSpec) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::Precondition(format!(
            "charge must be positive, got {sigma}"
        )));
    }
    Ok(reduced_energy_sigma(u, sigma, spec)?.energy / sigma)
}

/// Open interval of charges `σ` with `Λ(u, σ) < m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChargeWindow {
    pub lower: f64,
    pub upper: f64,
}

impl ChargeWindow {
    pub fn contains(&self, sigma: f64) -> bool {
        sigma > self.lower && sigma < self.upper
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// `(mK - √(2K|J|), mK + √(2K|J|))` when `J < 0`, otherwise `None`.
pub fn sigma_window(k: f64, j: f64, mass: f64) -> Option<ChargeWindow> {
    if !(j < 0.0) || !(k > 0.0) {
        return None;
    }
    let half = (2.0 * k * j.abs()).sqrt();
    Some(ChargeWindow {
        lower: mass * k - half,
        upper: mass * k + half,
    })
}

/// NLKG window of a profile, with `K = ∫u²` and `J = nlkg_j(u)`.
pub fn sigma_window_of(u: &RadialProfile, spec: &NonlinearSpec) -> Option<ChargeWindow> {
    sigma_window(u.mass2(), nlkg_j(u, spec), spec.mass())
}

/// L² first variation of `E_σ`: `-△u + W'(u) - ω*²u`, zero at `R_max`.
pub fn nlkg_first_variation(
    u: &RadialProfile,
    sigma: f64,
    spec: &NonlinearSpec,
) -> Result<Vec<f64>> {
    let omega = reduced_energy_sigma(u, sigma, spec)?.omega;
    Ok(stationary_lhs(u, omega, spec))
}

/// `-△u - ω²u + W'(u)` on the grid, zero at the Dirichlet node.
pub fn stationary_lhs(u: &RadialProfile, omega: f64, spec: &NonlinearSpec) -> Vec<f64> {
    let lap = u.laplacian();
    let n = u.grid().intervals();
    let mut out: Vec<f64> = u
        .values()
        .iter()
        .zip(&lap)
        .map(|(&v, l)| -l - omega * omega * v + spec.dw(v))
        .collect();
    out[n] = 0.0;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RadialGrid;
    use crate::oracle::tent_quadratures;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn tent(s1: f64, r: f64, rmax: f64, per_unit: usize) -> RadialProfile {
        let n = (rmax * per_unit as f64).round() as usize;
        let g = RadialGrid::new(rmax, n).unwrap();
        RadialProfile::from_fn(g, move |x| {
            if x <= r {
                s1
            } else if x <= r + 1.0 {
                s1 * (r + 1.0 - x)
            } else {
                0.0
            }
        })
    }

    fn dw() -> NonlinearSpec {
        NonlinearSpec::default_double_well()
    }

    #[test]
    fn zero_profile() {
        let g = RadialGrid::new(4.0, 64).unwrap();
        let u = RadialProfile::zeros(g);
        let st = NlkgState {
            u: u.clone(),
            omega: 0.7,
        };
        assert_eq!(nlkg_energy(&st, &dw()), 0.0);
        assert_eq!(nlkg_j(&u, &dw()), 0.0);
        assert!(matches!(
            reduced_energy_sigma(&u, 1.0, &dw()),
            Err(Error::Infeasible(_))
        ));
        assert!(sigma_window_of(&u, &dw()).is_none());
    }

    #[test]
    fn tent_charge_and_energy_match_closed_forms() {
        let u = tent(1.0, 1.0, 3.0, 1024);
        let q = tent_quadratures(1.0, 1.0, &dw()).unwrap();
        assert_relative_eq!(q.mass2, 52.0 * PI / 15.0, max_relative = 1e-12);
        let st = NlkgState {
            u: u.clone(),
            omega: -1.0,
        };
        assert_relative_eq!(nlkg_charge(&st), 52.0 * PI / 15.0, max_relative = 1e-3);

        let e0 = nlkg_energy(
            &NlkgState {
                u: u.clone(),
                omega: 0.0,
            },
            &dw(),
        );
        let m2 = dw().mass() * dw().mass();
        let expected = 0.5 * q.grad2 + q.r_int + 0.5 * m2 * q.mass2;
        assert_relative_eq!(e0, expected, max_relative = 1e-3);

        let flipped = nlkg_energy(
            &NlkgState {
                u: u.clone(),
                omega: 1.0,
            },
            &dw(),
        );
        assert_eq!(flipped, nlkg_energy(&st, &dw()));
    }

    #[test]
    fn tent_j_signs() {
        let spec = dw();
        let big = tent(1.0, 5.0, 7.0, 256);
        let q = tent_quadratures(1.0, 5.0, &spec).unwrap();
        let exact = 0.5 * q.grad2 + q.r_int;
        assert!(exact < -100.0 && exact > -140.0, "{exact}");
        assert_relative_eq!(nlkg_j(&big, &spec), exact, max_relative = 0.02);

        let small = tent(1.0, 1.0, 3.0, 256);
        assert!(nlkg_j(&small, &spec) > 0.0);
    }

    #[test]
    fn reduced_energy_cases() {
        let spec = dw();
        let u = tent(1.0, 1.0, 3.0, 1024);
        let at_zero = reduced_energy_sigma(&u, 0.0, &spec).unwrap();
        assert_eq!(at_zero.omega, 0.0);
        assert_relative_eq!(
            at_zero.energy,
            0.5 * u.grad2() + potential_integral(&u, &spec)
        );

        let sigma = 52.0 * PI / 15.0;
        let red = reduced_energy_sigma(&u, sigma, &spec).unwrap();
        assert_relative_eq!(red.omega, -1.0, max_relative = 1e-3);
    }

    #[test]
    fn hylomorphy_cases() {
        let spec = dw();
        let u = tent(1.0, 5.0, 7.0, 128);
        assert!(hylomorphy_ratio(&u, 0.0, &spec).is_err());
        assert!(hylomorphy_ratio(&u, -1.0, &spec).is_err());
        let k = u.mass2();
        let j = nlkg_j(&u, &spec);
        let lam = hylomorphy_ratio(&u, spec.mass() * k, &spec).unwrap();
        assert_relative_eq!(lam, 1.0 + j / k, max_relative = 1e-12);
        assert!(lam < 1.0);
        assert!(hylomorphy_ratio(&u, 1e-8, &spec).unwrap() > 1e8);
    }

    #[test]
    fn window_of_big_tent() {
        let spec = dw();
        let u = tent(1.0, 5.0, 7.0, 512);
        let q = tent_quadratures(1.0, 5.0, &spec).unwrap();
        let j = 0.5 * q.grad2 + q.r_int;
        let oracle = sigma_window(q.mass2, j, 1.0).unwrap();
        let w = sigma_window_of(&u, &spec).unwrap();
        assert_relative_eq!(w.lower, oracle.lower, max_relative = 2e-3);
        assert_relative_eq!(w.upper, oracle.upper, max_relative = 2e-3);
        assert_relative_eq!(w.center(), u.mass2(), max_relative = 1e-14);
        // product of endpoints K(m²K - 2|J|)
        let k = u.mass2();
        let jj = nlkg_j(&u, &spec);
        assert_relative_eq!(
            w.lower * w.upper,
            k * (k - 2.0 * jj.abs()),
            max_relative = 1e-10
        );
    }

    #[test]
    fn positive_j_has_no_window() {
        assert!(sigma_window(10.0, 0.0, 1.0).is_none());
        assert!(sigma_window(10.0, 3.0, 1.0).is_none());
    }

    /// Random nonnegative profile: a few positive bumps, zero at `R_max`.
    fn random_profile(coef: &[f64], rmax: f64) -> RadialProfile {
        let g = RadialGrid::new(rmax, 400).unwrap();
        let coef = coef.to_vec();
        RadialProfile::from_fn(g, move |r| {
            let x = r / rmax;
            coef.iter()
                .enumerate()
                .map(|(k, c)| c * (-(x * (k + 2) as f64).powi(2) * 4.0).exp())
                .sum::<f64>()
                * (1.0 - x)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn reduced_energy_identity(coef in prop::collection::vec(0.05f64..1.5, 3), rmax in 4.0f64..10.0, sigma in 0.1f64..200.0) {
            let spec = dw();
            let u = random_profile(&coef, rmax);
            let k = u.mass2();
            let e = reduced_energy_sigma(&u, sigma, &spec).unwrap();
            let via_j = nlkg_j(&u, &spec) + 0.5 * (k + sigma * sigma / k);
            prop_assert!((e.energy - via_j).abs() <= 1e-10 * e.energy.abs());
            let full = nlkg_energy(&NlkgState { u: u.clone(), omega: e.omega }, &spec);
            prop_assert!((full - e.energy).abs() <= 1e-12 * e.energy.abs());
            let charge = nlkg_charge(&NlkgState { u, omega: e.omega });
            prop_assert!((charge - sigma).abs() <= 1e-12 * sigma);
        }

        #[test]
        fn window_characterizes_ratio(coef in prop::collection::vec(0.5f64..1.2, 3), t in 0.0f64..1.0) {
            let spec = dw();
            let u = random_profile(&coef, 30.0);
            if let Some(w) = sigma_window_of(&u, &spec) {
                for k in 0..100 {
                    let s = (k as f64 + t) / 100.0 * 2.0 * w.upper + 1e-9;
                    let lam = hylomorphy_ratio(&u, s, &spec).unwrap();
                    let gap = (s - w.lower).abs().min((s - w.upper).abs());
                    if gap < 1e-9 * w.upper { continue; }
                    prop_assert_eq!(lam < spec.mass(), w.contains(s), "sigma {} lam {}", s, lam);
                }
            }
        }

        #[test]
        fn first_variation_matches_finite_differences(coef in prop::collection::vec(0.1f64..1.5, 3), dir in prop::collection::vec(-1.0f64..1.0, 3), sigma in 1.0f64..50.0) {
            let spec = dw();
            let u = random_profile(&coef, 8.0);
            let v = random_profile(&dir.iter().map(|d| d.abs() + 0.1).collect::<Vec<_>>(), 8.0);
            let grad = nlkg_first_variation(&u, sigma, &spec).unwrap();
            let w = u.grid().weights();
            let predicted: f64 = grad.iter().zip(v.values()).zip(w).map(|((g, v), w)| g * v * w).sum();
            let eps = 1e-6;
            let plus = RadialProfile::from_raw(u.grid().clone(), u.values().iter().zip(v.values()).map(|(a, b)| a + eps * b).collect());
            let minus = RadialProfile::from_raw(u.grid().clone(), u.values().iter().zip(v.values()).map(|(a, b)| a - eps * b).collect());
            let fd = (reduced_energy_sigma(&plus, sigma, &spec).unwrap().energy
                - reduced_energy_sigma(&minus, sigma, &spec).unwrap().energy) / (2.0 * eps);
            prop_assert!((fd - predicted).abs() <= 1e-5 * predicted.abs().max(1e-3), "fd {} predicted {}", fd, predicted);
        }
    }
}
