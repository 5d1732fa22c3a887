//! Descent on the reduced energies.
//!
//! All solvers minimize a function of the nodal values alone: the frequency is
//! eliminated through the charge constraint and, for KGM, the potential is
//! re-solved at every evaluation. The search direction is the raw gradient
//! preconditioned by the discrete operator `-△ + c` (a Sobolev gradient),
//! accelerated with Polak–Ribière conjugation and globalized by Armijo
//! backtracking on the clipped trial point `max(u + t·d, 0)`.

use crate::error::{precondition, Error, Result};
use crate::functionals::{potential_integral, reduced_energy_sigma, stationary_lhs};
use crate::gauge::{
    gauge_residual, k_from_values, kgm_stationary_lhs, solve_phi, solve_phi_values, GaugePotential,
};
use crate::grid::{RadialGrid, RadialProfile};
use crate::linalg::SymTridiagonal;
use crate::model::NonlinearSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    /// Convergence when the L² residual falls below `tol·(1 + ‖u‖)`.
    pub tol: f64,
    pub max_iters: usize,
    /// First trial step of the line search.
    pub initial_step: f64,
    /// Backtracking factor.
    pub shrink: f64,
    /// Armijo constant.
    pub sufficient_decrease: f64,
    /// Zeroth-order shift `c` of the `-△ + c` preconditioner; `None` uses `m²`.
    pub preconditioner_shift: Option<f64>,
    /// Use conjugate directions; plain preconditioned descent otherwise.
    pub conjugate: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iters: 50_000,
            initial_step: 1.0,
            shrink: 0.5,
            sufficient_decrease: 1e-4,
            preconditioner_shift: None,
            conjugate: true,
        }
    }
}

impl SolveOptions {
    fn validate(&self) -> Result<()> {
        let ok = self.tol > 0.0
            && self.max_iters > 0
            && self.initial_step > 0.0
            && self.shrink > 0.0
            && self.shrink < 1.0
            && self.sufficient_decrease > 0.0
            && self.sufficient_decrease < 1.0
            && self.preconditioner_shift.is_none_or(|c| c > 0.0);
        if ok {
            Ok(())
        } else {
            Err(precondition(format!("invalid solver options {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    /// The line search could not decrease the energy further.
    Stalled,
    /// The iterate spread to the boundary or vanished with `Λ ≥ m`; the charge
    /// is probably outside every admissible window.
    Collapsed,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIterations => "max_iterations",
            SolveStatus::Stalled => "stalled",
            SolveStatus::Collapsed => "collapsed",
        }
    }
}

/// Output of a charge-constrained solve.
#[derive(Debug, Clone)]
pub struct SolitonResult<P = RadialProfile> {
    pub u: P,
    pub omega: f64,
    pub phi: Option<GaugePotential>,
    /// Reduced energy `E_σ(u)`.
    pub energy: f64,
    pub sigma: f64,
    /// Physical charge: `σ` for NLKG, `qσ` for KGM.
    pub charge: f64,
    /// `Λ = E_σ/σ`.
    pub hylomorphy: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub status: SolveStatus,
}

impl<P> SolitonResult<P> {
    /// `Λ < m`: the descent ended strictly below the mass threshold.
    pub fn below_mass_threshold(&self, spec: &NonlinearSpec) -> bool {
        self.hylomorphy < spec.mass()
    }
}

/// A smooth energy of the nodal vector, with Dirichlet nodes held at zero.
pub(crate) trait DescentProblem {
    fn len(&self) -> usize;
    /// Quadrature weights; the residual is `gradient/weight` at each free node.
    fn weights(&self) -> &[f64];
    fn is_fixed(&self, i: usize) -> bool;
    fn energy(&self, u: &[f64]) -> Result<f64>;
    /// Writes `∂E/∂u_i` into `grad` and returns `E`.
    fn gradient(&self, u: &[f64], grad: &mut [f64]) -> Result<f64>;
    /// Solves `(A + c·diag(w)) d = g` with `A` the stiffness operator, fixed rows identity.
    fn precondition(&self, g: &[f64], shift: f64) -> Vec<f64>;
    /// Share of `∫u²` held in the outer quarter of the domain.
    fn boundary_mass_fraction(&self, u: &[f64]) -> f64;
}

pub(crate) struct DescentOutcome {
    pub u: Vec<f64>,
    pub iterations: usize,
    pub status: SolveStatus,
}

fn l2_residual<P: DescentProblem + ?Sized>(p: &P, grad: &[f64]) -> f64 {
    let w = p.weights();
    (0..p.len())
        .filter(|&i| !p.is_fixed(i))
        .map(|i| grad[i] * grad[i] / w[i])
        .sum::<f64>()
        .sqrt()
}

fn l2_norm<P: DescentProblem + ?Sized>(p: &P, u: &[f64]) -> f64 {
    p.weights()
        .iter()
        .zip(u)
        .map(|(w, v)| w * v * v)
        .sum::<f64>()
        .sqrt()
}

/// Energy differences below this are rounding noise.
fn noise(e: f64) -> f64 {
    64.0 * f64::EPSILON * e.abs().max(1.0)
}

pub(crate) fn descend<P: DescentProblem + ?Sized>(
    problem: &P,
    init: Vec<f64>,
    opts: &SolveOptions,
    shift: f64,
) -> Result<DescentOutcome> {
    let n = problem.len();
    let mut u = init;
    for i in 0..n {
        if problem.is_fixed(i) {
            u[i] = 0.0;
        }
        u[i] = u[i].max(0.0);
    }
    let mut grad = vec![0.0; n];
    let mut energy = problem.gradient(&u, &mut grad)?;
    let mut residual = l2_residual(problem, &grad);
    let mut precond = problem.precondition(&grad, shift);
    let mut dir: Vec<f64> = precond.iter().map(|v| -v).collect();
    let mut step = opts.initial_step;
    let mut trial = vec![0.0; n];
    let mut new_grad = vec![0.0; n];
    let mut iterations = 0;
    let mut status = SolveStatus::MaxIterations;

    while iterations < opts.max_iters {
        if residual < opts.tol * (1.0 + l2_norm(problem, &u)) {
            status = SolveStatus::Converged;
            break;
        }
        let slope: f64 = grad.iter().zip(&dir).map(|(g, d)| g * d).sum();
        if !(slope < 0.0) {
            // lost descent; restart along the preconditioned gradient
            dir.iter_mut().zip(&precond).for_each(|(d, p)| *d = -p);
        }
        let mut t = (2.0 * step).min(opts.initial_step.max(step));
        let mut accepted = None;
        let mut clipped = false;
        while t > 1e-16 * opts.initial_step {
            clipped = false;
            for i in 0..n {
                let v = u[i] + t * dir[i];
                trial[i] = if v < 0.0 {
                    clipped = true;
                    0.0
                } else {
                    v
                };
            }
            let predicted: f64 = grad
                .iter()
                .zip(trial.iter().zip(&u))
                .map(|(g, (a, b))| g * (a - b))
                .sum();
            match problem.energy(&trial) {
                Ok(e)
                    if e.is_finite()
                        && e <= energy
                            + opts.sufficient_decrease * predicted.min(0.0)
                            + noise(energy) =>
                {
                    accepted = Some(e);
                    break;
                }
                Ok(_) | Err(Error::Infeasible(_)) => t *= opts.shrink,
                Err(e) => return Err(e),
            }
        }
        let Some(_) = accepted else {
            status = SolveStatus::Stalled;
            break;
        };
        step = t;
        iterations += 1;
        let new_energy = problem.gradient(&trial, &mut new_grad)?;
        if new_energy > energy + noise(energy) {
            return Err(Error::Invariant(format!(
                "energy increased across an accepted step: {energy} -> {new_energy}"
            )));
        }
        let new_precond = problem.precondition(&new_grad, shift);
        // Polak–Ribière+ with preconditioning, reset after clipping
        let beta = if opts.conjugate && !clipped {
            let num: f64 = new_grad
                .iter()
                .zip(new_precond.iter().zip(&precond))
                .map(|(g, (a, b))| g * (a - b))
                .sum();
            let den: f64 = grad.iter().zip(&precond).map(|(g, p)| g * p).sum();
            if den > 0.0 {
                (num / den).max(0.0)
            } else {
                0.0
            }
        } else {
            0.0
        };
        for i in 0..n {
            dir[i] = -new_precond[i] + beta * dir[i];
        }
        std::mem::swap(&mut u, &mut trial);
        std::mem::swap(&mut grad, &mut new_grad);
        precond = new_precond;
        energy = new_energy;
        residual = l2_residual(problem, &grad);
    }
    Ok(DescentOutcome {
        u,
        iterations,
        status,
    })
}

/// Marks a finished descent as collapsed when the minimizing sequence ran off
/// the grid or vanished while staying at or above the mass threshold.
pub(crate) fn diagnose<P: DescentProblem + ?Sized>(
    problem: &P,
    outcome: &mut DescentOutcome,
    hylomorphy: f64,
    mass: f64,
) {
    let peak = outcome.u.iter().copied().fold(0.0, f64::max);
    let spread = problem.boundary_mass_fraction(&outcome.u) > 1e-3;
    if hylomorphy >= mass && (spread || peak < 1e-8) {
        outcome.status = SolveStatus::Collapsed;
    }
}

fn radial_preconditioner(grid: &RadialGrid, g: &[f64], shift: f64) -> Vec<f64> {
    let n = grid.len();
    let w = grid.weights();
    let c = grid.edge_coefficients();
    let mut a = SymTridiagonal::new(n);
    for (i, &ci) in c.iter().enumerate() {
        a.diag[i] += ci;
        a.diag[i + 1] += ci;
        a.off[i] = -ci;
    }
    for i in 0..n {
        a.diag[i] += shift * w[i];
    }
    let last = n - 1;
    a.diag[last] = 1.0;
    a.off[last - 1] = 0.0;
    let mut rhs = g.to_vec();
    rhs[last] = 0.0;
    a.solve(&rhs)
        .expect("shifted stiffness matrix is positive definite")
}

fn radial_boundary_mass(grid: &RadialGrid, u: &[f64]) -> f64 {
    let w = grid.weights();
    let total: f64 = w.iter().zip(u).map(|(w, v)| w * v * v).sum();
    if total == 0.0 {
        return 0.0;
    }
    let start = grid.len() - grid.len() / 4;
    let outer: f64 = (start..grid.len()).map(|i| w[i] * u[i] * u[i]).sum();
    outer / total
}

/// Reduced NLKG or KGM energy on a radial grid.
struct RadialProblem<'a> {
    grid: &'a RadialGrid,
    spec: &'a NonlinearSpec,
    sigma: f64,
    /// `None` for NLKG.
    coupling: Option<f64>,
}

impl RadialProblem<'_> {
    fn base(&self, u: &[f64]) -> f64 {
        let w = self.grid.weights();
        0.5 * self.grid.grad2(u)
            + w.iter()
                .zip(u)
                .map(|(w, &v)| w * self.spec.w(v))
                .sum::<f64>()
    }

    /// `K` and, for KGM, `φ_u`.
    fn charge_norm(&self, u: &[f64]) -> Result<(f64, Option<Vec<f64>>)> {
        match self.coupling {
            None => Ok((self.grid.mass2(u), None)),
            Some(q) => {
                let phi = solve_phi_values(self.grid, u, q)?;
                Ok((k_from_values(self.grid, u, &phi, q), Some(phi)))
            }
        }
    }

    fn constrained(&self, base: f64, k: f64) -> Result<f64> {
        if !(k > 0.0) {
            return Err(Error::Infeasible("iterate has zero charge norm".into()));
        }
        Ok(base + self.sigma * self.sigma / (2.0 * k))
    }
}

impl DescentProblem for RadialProblem<'_> {
    fn len(&self) -> usize {
        self.grid.len()
    }

    fn weights(&self) -> &[f64] {
        self.grid.weights()
    }

    fn is_fixed(&self, i: usize) -> bool {
        i == self.grid.intervals()
    }

    fn energy(&self, u: &[f64]) -> Result<f64> {
        let (k, _) = self.charge_norm(u)?;
        self.constrained(self.base(u), k)
    }

    fn gradient(&self, u: &[f64], grad: &mut [f64]) -> Result<f64> {
        let (k, phi) = self.charge_norm(u)?;
        let e = self.constrained(self.base(u), k)?;
        let w2 = self.sigma * self.sigma / (k * k);
        let w = self.grid.weights();
        self.grid.stiffness_apply(u, grad);
        for i in 0..u.len() {
            let screen = match (&phi, self.coupling) {
                (Some(p), Some(q)) => (1.0 - q * p[i]).powi(2),
                _ => 1.0,
            };
            grad[i] += w[i] * (self.spec.dw(u[i]) - w2 * screen * u[i]);
        }
        grad[self.grid.intervals()] = 0.0;
        Ok(e)
    }

    fn precondition(&self, g: &[f64], shift: f64) -> Vec<f64> {
        radial_preconditioner(self.grid, g, shift)
    }

    fn boundary_mass_fraction(&self, u: &[f64]) -> f64 {
        radial_boundary_mass(self.grid, u)
    }
}

fn check_init(sigma: f64, init: &RadialProfile) -> Result<()> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(precondition(format!(
            "charge must be positive, got {sigma}"
        )));
    }
    if init.is_zero() {
        return Err(precondition("initial profile is identically zero"));
    }
    Ok(())
}

/// Minimizes the NLKG reduced energy `E_σ` from `init`.
pub fn minimize_nlkg(
    spec: &NonlinearSpec,
    sigma: f64,
    init: &RadialProfile,
    opts: &SolveOptions,
) -> Result<SolitonResult> {
    check_init(sigma, init)?;
    opts.validate()?;
    let grid = init.grid();
    let problem = RadialProblem {
        grid,
        spec,
        sigma,
        coupling: None,
    };
    let shift = opts
        .preconditioner_shift
        .unwrap_or(spec.mass() * spec.mass());
    let mut out = descend(&problem, init.values().to_vec(), opts, shift)?;
    let u = RadialProfile::from_raw(grid.clone(), out.u.clone());
    let reduced = reduced_energy_sigma(&u, sigma, spec)?;
    let hylomorphy = reduced.energy / sigma;
    diagnose(&problem, &mut out, hylomorphy, spec.mass());
    let residual = residual_l2(grid, &stationary_lhs(&u, reduced.omega, spec));
    Ok(SolitonResult {
        u,
        omega: reduced.omega,
        phi: None,
        energy: reduced.energy,
        sigma,
        charge: sigma,
        hylomorphy,
        residual,
        iterations: out.iterations,
        converged: out.status == SolveStatus::Converged,
        status: out.status,
    })
}

/// Minimizes the KGM reduced energy at matter charge `σ` and coupling `q`;
/// the reported physical charge is `qσ`.
pub fn minimize_kgm(
    spec: &NonlinearSpec,
    sigma: f64,
    q: f64,
    init: &RadialProfile,
    opts: &SolveOptions,
) -> Result<SolitonResult> {
    check_init(sigma, init)?;
    opts.validate()?;
    if !(q > 0.0 && q.is_finite()) {
        return Err(precondition(format!(
            "coupling q must be positive, got {q}"
        )));
    }
    let grid = init.grid();
    let problem = RadialProblem {
        grid,
        spec,
        sigma,
        coupling: Some(q),
    };
    let shift = opts
        .preconditioner_shift
        .unwrap_or(spec.mass() * spec.mass());
    let mut out = descend(&problem, init.values().to_vec(), opts, shift)?;
    let u = RadialProfile::from_raw(grid.clone(), out.u.clone());
    let phi = solve_phi(&u, q)?;
    let k = crate::gauge::k_reduced(&u, &phi);
    if !(k > 0.0) {
        return Err(Error::Infeasible("solver returned a zero profile".into()));
    }
    let omega = -sigma / k;
    let energy = 0.5 * u.grad2() + potential_integral(&u, spec) + sigma * sigma / (2.0 * k);
    let hylomorphy = energy / sigma;
    diagnose(&problem, &mut out, hylomorphy, spec.mass());
    let residual = residual_l2(grid, &kgm_stationary_lhs(&u, omega, &phi, spec));
    Ok(SolitonResult {
        u,
        omega,
        phi: Some(phi),
        energy,
        sigma,
        charge: q * sigma,
        hylomorphy,
        residual,
        iterations: out.iterations,
        converged: out.status == SolveStatus::Converged,
        status: out.status,
    })
}

/// `(∫ f²)^{1/2}` on the radial grid.
pub(crate) fn residual_l2(grid: &RadialGrid, f: &[f64]) -> f64 {
    grid.mass2(f).sqrt()
}

/// Which stationary equation a residual refers to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StationaryKind {
    /// `-△u - ω²u + W'(u) = 0`
    Nlkg,
    /// `-△u - ω²(1 - qφ)²u + W'(u) = 0` together with the gauge equation.
    Kgm,
    /// `-△u + (ℓ²/r² - ω²)u + W'(u) = 0`
    Vortex(i32),
}

/// Profiles for which a stationary-equation residual is defined.
pub trait Stationary {
    fn stationary_residual(
        &self,
        omega: f64,
        phi: Option<&GaugePotential>,
        spec: &NonlinearSpec,
        kind: StationaryKind,
    ) -> Result<f64>;
}

impl Stationary for RadialProfile {
    fn stationary_residual(
        &self,
        omega: f64,
        phi: Option<&GaugePotential>,
        spec: &NonlinearSpec,
        kind: StationaryKind,
    ) -> Result<f64> {
        let grid = self.grid();
        match kind {
            StationaryKind::Nlkg => Ok(residual_l2(grid, &stationary_lhs(self, omega, spec))),
            StationaryKind::Kgm => {
                let phi =
                    phi.ok_or_else(|| precondition("KGM residual needs a gauge potential"))?;
                let matter = residual_l2(grid, &kgm_stationary_lhs(self, omega, phi, spec));
                let gauge = residual_l2(grid, &gauge_residual(self, phi));
                Ok(matter.max(gauge))
            }
            StationaryKind::Vortex(_) => Err(precondition(
                "vortex residual needs an axisymmetric profile",
            )),
        }
    }
}

/// Grid L² norm of the stationary equation's left side at the result's `(u, ω)`.
pub fn residual_stationary<P: Stationary>(
    result: &SolitonResult<P>,
    spec: &NonlinearSpec,
    kind: StationaryKind,
) -> Result<f64> {
    result
        .u
        .stationary_residual(result.omega, result.phi.as_ref(), spec, kind)
}
