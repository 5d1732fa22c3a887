//! Radial NLKG dynamics `ψ_tt - △ψ + W'(|ψ|)ψ/|ψ| = 0` and the diagnostics
//! used to tell solitary waves from dispersing ones.
//!
//! The integrator is velocity Verlet on the same finite-volume
//! discretization as the solvers. Because the force is `Sψ` (real symmetric)
//! plus a real multiple of `ψ`, the discrete charge `Im Σ w ψ̄ψ_t` is conserved
//! up to rounding, and the scheme is exactly time reversible.

use crate::error::{precondition, Error, Result};
use crate::grid::{RadialGrid, RadialProfile};
use crate::model::NonlinearSpec;
use num_complex::Complex64;
use std::fmt::Write as _;

/// Below this modulus the nonlinear force uses its limit `W''(0)ψ = m²ψ`.
const MODULUS_FLOOR: f64 = 1e-14;
/// Evolution aborts once `max|ψ|` exceeds this multiple of its initial value.
const BLOW_UP_FACTOR: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerRecord {
    pub t: f64,
    pub energy: f64,
    pub charge: f64,
    pub localization: f64,
    /// Distance to the reference soliton manifold, when one is set.
    pub distance: Option<f64>,
    pub max_modulus: f64,
}

/// Field, velocity and history on a radial grid.
#[derive(Debug, Clone)]
pub struct EvolutionState {
    grid: RadialGrid,
    pub psi: Vec<Complex64>,
    pub psi_t: Vec<Complex64>,
    pub t: f64,
    pub ledger: Vec<LedgerRecord>,
}

impl EvolutionState {
    pub fn new(grid: RadialGrid, psi: Vec<Complex64>, psi_t: Vec<Complex64>) -> Result<Self> {
        for v in [&psi, &psi_t] {
            if v.len() != grid.len() {
                return Err(Error::LengthMismatch {
                    expected: grid.len(),
                    got: v.len(),
                });
            }
        }
        let n = grid.intervals();
        if psi[n] != Complex64::new(0.0, 0.0) || psi_t[n] != Complex64::new(0.0, 0.0) {
            return Err(precondition("field must vanish at R_max"));
        }
        Ok(Self {
            grid,
            psi,
            psi_t,
            t: 0.0,
            ledger: Vec::new(),
        })
    }

    /// The standing wave `u e^{-iωt}` at `t = 0`: `ψ = u`, `ψ_t = -iωu`.
    pub fn standing_wave(u: &RadialProfile, omega: f64) -> Self {
        let psi: Vec<Complex64> = u.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let psi_t = psi
            .iter()
            .map(|p| Complex64::new(0.0, -omega) * p)
            .collect();
        Self {
            grid: u.grid().clone(),
            psi,
            psi_t,
            t: 0.0,
            ledger: Vec::new(),
        }
    }

    pub fn zeros(grid: RadialGrid) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); grid.len()];
        Self {
            grid,
            psi: z.clone(),
            psi_t: z,
            t: 0.0,
            ledger: Vec::new(),
        }
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn modulus(&self) -> Vec<f64> {
        self.psi.iter().map(|p| p.norm()).collect()
    }

    pub fn max_modulus(&self) -> f64 {
        self.psi.iter().map(|p| p.norm()).fold(0.0, f64::max)
    }

    /// Flips `ψ_t`; evolving forward afterwards runs the original motion backward.
    pub fn reverse_time(&mut self) {
        self.psi_t.iter_mut().for_each(|v| *v = -*v);
    }

    /// Multiplies the field (not the velocity) by `1 + δ`.
    pub fn scale_field(&mut self, delta: f64) {
        self.psi.iter_mut().for_each(|p| *p *= 1.0 + delta);
    }

    /// Adds `δ·e^{-(r - r₁)²}` to the field, keeping `ψ(R_max) = 0`.
    pub fn add_bump(&mut self, delta: f64, center: f64) {
        let n = self.grid.intervals();
        for i in 0..n {
            let r = self.grid.r(i);
            self.psi[i] += delta * (-(r - center).powi(2)).exp();
        }
    }

    /// Ledger as CSV `t,E,C,localization,distance,max_modulus`.
    pub fn ledger_csv(&self) -> String {
        let mut s = String::from("t,E,C,localization,distance,max_modulus\n");
        for r in &self.ledger {
            let d = r
                .distance
                .map_or(String::from("nan"), |d| format!("{d:.15e}"));
            let _ = writeln!(
                s,
                "{:.15e},{:.15e},{:.15e},{:.15e},{d},{:.15e}",
                r.t, r.energy, r.charge, r.localization, r.max_modulus
            );
        }
        s
    }
}

/// Which force drives the evolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForceMode {
    /// `W'(|ψ|)ψ/|ψ|`.
    Nonlinear,
    /// `m²ψ`: the free Klein–Gordon equation, used as a dispersion control.
    FreeLinear,
}

#[derive(Debug, Clone)]
pub struct EvolveOptions {
    /// Record the ledger every this many steps (and at the final time).
    pub ledger_every: usize,
    pub force: ForceMode,
    /// Radius for the localization fraction; `None` uses `R_max/2`.
    pub localization_radius: Option<f64>,
    /// Soliton `(u₀, ω₀)` whose manifold distance is tracked.
    pub reference: Option<(RadialProfile, f64)>,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            ledger_every: 100,
            force: ForceMode::Nonlinear,
            localization_radius: None,
            reference: None,
        }
    }
}

/// `f(s)` with force `f(|ψ|)ψ`.
fn force_factor(spec: &NonlinearSpec, mode: ForceMode, s: f64) -> f64 {
    let m2 = spec.mass() * spec.mass();
    match mode {
        ForceMode::FreeLinear => m2,
        ForceMode::Nonlinear if s < MODULUS_FLOOR => m2,
        ForceMode::Nonlinear => spec.dw(s) / s,
    }
}

fn potential(spec: &NonlinearSpec, mode: ForceMode, s: f64) -> f64 {
    match mode {
        ForceMode::FreeLinear => 0.5 * spec.mass() * spec.mass() * s * s,
        ForceMode::Nonlinear => spec.w(s),
    }
}

/// Real work vectors for applying the stiffness matrix to complex fields.
struct Scratch {
    re: Vec<f64>,
    im: Vec<f64>,
    buf: Vec<f64>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Self {
            re: vec![0.0; n],
            im: vec![0.0; n],
            buf: vec![0.0; n],
        }
    }

    /// `ψ_tt` at every node, zero at `R_max`.
    fn acceleration(
        &mut self,
        grid: &RadialGrid,
        spec: &NonlinearSpec,
        mode: ForceMode,
        psi: &[Complex64],
        out: &mut [Complex64],
    ) {
        let w = grid.weights();
        for (k, p) in psi.iter().enumerate() {
            self.re[k] = p.re;
            self.im[k] = p.im;
        }
        grid.stiffness_apply(&self.re, &mut self.buf);
        for k in 0..psi.len() {
            out[k].re = -self.buf[k] / w[k];
        }
        grid.stiffness_apply(&self.im, &mut self.buf);
        for k in 0..psi.len() {
            out[k].im = -self.buf[k] / w[k];
            out[k] -= force_factor(spec, mode, psi[k].norm()) * psi[k];
        }
        out[grid.intervals()] = Complex64::new(0.0, 0.0);
    }
}

/// `𝓔 = ∫(½|ψ_t|² + ½|∇ψ|² + W(|ψ|))` for the chosen force.
pub fn field_energy(state: &EvolutionState, spec: &NonlinearSpec, mode: ForceMode) -> f64 {
    let g = &state.grid;
    let re: Vec<f64> = state.psi.iter().map(|p| p.re).collect();
    let im: Vec<f64> = state.psi.iter().map(|p| p.im).collect();
    let kinetic: f64 = g
        .weights()
        .iter()
        .zip(&state.psi_t)
        .map(|(w, v)| w * v.norm_sqr())
        .sum();
    let pot: f64 = g
        .weights()
        .iter()
        .zip(&state.psi)
        .map(|(w, p)| w * potential(spec, mode, p.norm()))
        .sum();
    0.5 * kinetic + 0.5 * (g.grad2(&re) + g.grad2(&im)) + pot
}

/// `𝒞 = Im ∫ψ̄ψ_t`.
pub fn field_charge(state: &EvolutionState) -> f64 {
    state
        .grid
        .weights()
        .iter()
        .zip(state.psi.iter().zip(&state.psi_t))
        .map(|(w, (p, v))| w * (p.conj() * v).im)
        .sum()
}

/// Fraction of `∫|ψ|²` outside the ball of radius `R`; `0` for a zero field.
pub fn localization_fraction(state: &EvolutionState, radius: f64) -> Result<f64> {
    let g = &state.grid;
    if !(radius > 0.0 && radius <= g.r_max() * (1.0 + 1e-12)) {
        return Err(precondition(format!("radius {radius} outside (0, R_max]")));
    }
    let w = g.weights();
    let mut total = 0.0;
    let mut inner = 0.0;
    for (i, p) in state.psi.iter().enumerate() {
        let m = w[i] * p.norm_sqr();
        total += m;
        if g.r(i) <= radius + 1e-12 * g.r_max() {
            inner += m;
        }
    }
    if total == 0.0 {
        return Ok(0.0);
    }
    Ok((1.0 - inner / total).max(0.0))
}

/// Distance in `H¹ × L²` from `(ψ, ψ_t)` to the orbit `{(u₀e^{iθ}, -iω₀u₀e^{iθ})}`,
/// minimized over the phase `θ` in closed form.
pub fn manifold_distance(state: &EvolutionState, u0: &RadialProfile, omega0: f64) -> Result<f64> {
    let g = &state.grid;
    if u0.grid() != g {
        return Err(precondition("reference profile lives on a different grid"));
    }
    let u = u0.values();
    let w = g.weights();
    let c = g.edge_coefficients();
    let h1 = |a: &dyn Fn(usize) -> Complex64, b: &dyn Fn(usize) -> Complex64| -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..u.len() {
            s += w[i] * a(i).conj() * b(i);
        }
        for (i, ci) in c.iter().enumerate() {
            s += ci * (a(i + 1) - a(i)).conj() * (b(i + 1) - b(i));
        }
        s
    };
    let uc = |i: usize| Complex64::new(u[i], 0.0);
    let psi = |i: usize| state.psi[i];
    // ⟨T₀, Y⟩ with T₀ = (u₀, -iω₀u₀)
    let velocity: Complex64 = (0..u.len()).map(|i| w[i] * u[i] * state.psi_t[i]).sum();
    let overlap = h1(&uc, &psi) + Complex64::new(0.0, omega0) * velocity;
    let theta = if overlap.norm() > 0.0 {
        overlap.arg()
    } else {
        0.0
    };
    let rot = Complex64::from_polar(1.0, theta);
    let diff = |i: usize| state.psi[i] - rot * u[i];
    let dpos = h1(&diff, &diff).re;
    let target_v = Complex64::new(0.0, -omega0) * rot;
    let dvel: f64 = (0..u.len())
        .map(|i| w[i] * (state.psi_t[i] - target_v * u[i]).norm_sqr())
        .sum();
    Ok((dpos.max(0.0) + dvel).sqrt())
}

/// Largest stable Verlet step, `2/√λ_max` of the discrete `-△ + m²`,
/// from power iteration.
pub fn stable_time_step(grid: &RadialGrid, mass: f64) -> f64 {
    let n = grid.len();
    let w = grid.weights();
    let mut x: Vec<f64> = (0..n)
        .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
        .collect();
    x[n - 1] = 0.0;
    let mut y = vec![0.0; n];
    let mut lambda = 0.0;
    for _ in 0..200 {
        grid.stiffness_apply(&x, &mut y);
        for i in 0..n {
            y[i] /= w[i];
        }
        y[n - 1] = 0.0;
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let xn = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        lambda = norm / xn;
        for i in 0..n {
            x[i] = y[i] / norm;
        }
    }
    // power iteration approaches λ_max from below; keep a margin
    2.0 / (1.02 * lambda + mass * mass).sqrt()
}

fn record(
    state: &EvolutionState,
    spec: &NonlinearSpec,
    opts: &EvolveOptions,
    radius: f64,
) -> Result<LedgerRecord> {
    let distance = match &opts.reference {
        Some((u0, w0)) => Some(manifold_distance(state, u0, *w0)?),
        None => None,
    };
    Ok(LedgerRecord {
        t: state.t,
        energy: field_energy(state, spec, opts.force),
        charge: field_charge(state),
        localization: localization_fraction(state, radius)?,
        distance,
        max_modulus: state.max_modulus(),
    })
}

/// Advances `state` by `duration` with step `dt`, appending ledger records.
pub fn evolve_nlkg(
    mut state: EvolutionState,
    spec: &NonlinearSpec,
    duration: f64,
    dt: f64,
    opts: &EvolveOptions,
) -> Result<EvolutionState> {
    let g = state.grid.clone();
    if !(duration > 0.0 && dt > 0.0) {
        return Err(precondition("duration and dt must be positive"));
    }
    if !(dt < g.h()) {
        return Err(precondition(format!(
            "dt = {dt} must be below the grid spacing {}",
            g.h()
        )));
    }
    let limit = stable_time_step(&g, spec.mass());
    if dt > limit {
        return Err(precondition(format!(
            "dt = {dt} exceeds the stability limit {limit:.6e}"
        )));
    }
    if opts.ledger_every == 0 {
        return Err(precondition("ledger_every must be positive"));
    }
    let radius = opts.localization_radius.unwrap_or(0.5 * g.r_max());
    let steps = (duration / dt).round().max(1.0) as usize;
    let t0 = state.t;
    let initial_max = state.max_modulus();
    let threshold = BLOW_UP_FACTOR * initial_max.max(f64::MIN_POSITIVE);
    if state.ledger.last().is_none_or(|r| r.t < state.t) {
        let rec = record(&state, spec, opts, radius)?;
        state.ledger.push(rec);
    }

    let n = g.len();
    let mut acc = vec![Complex64::new(0.0, 0.0); n];
    let mut scratch = Scratch::new(n);
    scratch.acceleration(&g, spec, opts.force, &state.psi, &mut acc);
    for step in 1..=steps {
        for k in 0..n {
            state.psi_t[k] += 0.5 * dt * acc[k];
            state.psi[k] += dt * state.psi_t[k];
        }
        scratch.acceleration(&g, spec, opts.force, &state.psi, &mut acc);
        for k in 0..n {
            state.psi_t[k] += 0.5 * dt * acc[k];
        }
        state.t = t0 + step as f64 * dt;
        if step % opts.ledger_every == 0 || step == steps {
            let peak = state.max_modulus();
            if !(peak <= threshold) {
                return Err(Error::BlowUp {
                    t: state.t,
                    max_modulus: peak,
                });
            }
            let rec = record(&state, spec, opts, radius)?;
            state.ledger.push(rec);
        }
    }
    Ok(state)
}
