//! Admissible charge windows and the large-charge construction for KGM.
//!
//! Everything here is built on tent profiles `u_r`: a plateau of height `s₁`
//! on the ball of radius `r` followed by a unit-width linear ramp. A tent with
//! `J(u_r) < 0` certifies every charge in its window `(σ_g(u_r), σ_G(u_r))`.
//! [`construct_for_charge`] picks the tent and the coupling `q` so that the
//! window center `mK(u_r)` carries at least a requested electric charge.

use crate::error::{precondition, Error, Result};
use crate::functionals::{nlkg_j, sigma_window, ChargeWindow};
use crate::gauge::kgm_parts;
use crate::grid::{RadialGrid, RadialProfile};
use crate::model::{bisect, golden_section_min, Check, NonlinearSpec};
use std::f64::consts::PI;

/// Best constant `c₃` of `c₃‖φ‖₆² ≤ ‖∇φ‖₂²` on ℝ³, equal to `3(π/2)^{4/3}`.
/// [`bubble_rayleigh_quotient`] reproduces it from the extremal function.
pub const SOBOLEV_C3: f64 = 5.477_904_089_531_331;

pub fn sobolev_constant() -> f64 {
    SOBOLEV_C3
}

/// `‖∇φ‖₂²/‖φ‖₆²` for a radial profile, without any exterior tail.
pub fn rayleigh_quotient(phi: &RadialProfile) -> f64 {
    let g = phi.grid();
    let six: f64 = g
        .weights()
        .iter()
        .zip(phi.values())
        .map(|(w, v)| w * v.powi(6))
        .sum();
    phi.grad2() / six.cbrt()
}

/// Rayleigh quotient of the bubble `(1 + |x|²)^{-1/2}` on `[0, R_max]` with
/// `N` intervals, plus the exact contributions from `|x| > R_max`.
pub fn bubble_rayleigh_quotient(r_max: f64, n: usize) -> Result<f64> {
    let grid = RadialGrid::new(r_max, n)?;
    let values: Vec<f64> = grid.nodes().map(|r| 1.0 / (1.0 + r * r).sqrt()).collect();
    let grad = grid.grad2(&values);
    let six: f64 = grid
        .weights()
        .iter()
        .zip(&values)
        .map(|(w, v)| w * v.powi(6))
        .sum();
    // exterior tails from the large-r expansions of r⁴/(1+r²)³ and r²/(1+r²)³
    let r = r_max;
    let grad_tail = 4.0 * PI * (1.0 / r - 1.0 / r.powi(3) + 6.0 / (5.0 * r.powi(5)));
    let six_tail = 4.0 * PI * (1.0 / (3.0 * r.powi(3)) - 3.0 / (5.0 * r.powi(5)));
    Ok((grad + grad_tail) / (six + six_tail).cbrt())
}

/// The tent profile `u_r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TentProfile {
    pub s1: f64,
    pub r: f64,
}

impl TentProfile {
    pub fn new(s1: f64, r: f64) -> Result<Self> {
        if !(s1 > 0.0 && r > 0.0 && s1.is_finite() && r.is_finite()) {
            return Err(precondition(format!(
                "tent needs s1, r > 0, got ({s1}, {r})"
            )));
        }
        Ok(Self { s1, r })
    }

    pub fn value(&self, x: f64) -> f64 {
        self.s1 * (self.r + 1.0 - x).clamp(0.0, 1.0)
    }

    /// Samples the tent; the grid must reach `r + 1`.
    pub fn realize(&self, grid: RadialGrid) -> Result<RadialProfile> {
        if grid.r_max() < self.r + 1.0 {
            return Err(precondition(format!(
                "grid radius {} does not cover the tent support {}",
                grid.r_max(),
                self.r + 1.0
            )));
        }
        let t = *self;
        Ok(RadialProfile::from_fn(grid, move |x| t.value(x)))
    }

    /// Grid with `points_per_unit` nodes per unit length and room for the
    /// exterior of the support.
    pub fn default_grid(&self, points_per_unit: usize) -> Result<RadialGrid> {
        let r_max = self.r + 3.0;
        let n = ((r_max * points_per_unit as f64).ceil() as usize).max(crate::grid::MIN_INTERVALS);
        RadialGrid::new(r_max, n)
    }
}

/// `K`, `J` and window of one tent.
#[derive(Debug, Clone, Copy)]
pub struct TentWindow {
    pub tent: TentProfile,
    pub k: f64,
    pub j: f64,
    pub window: Option<ChargeWindow>,
}

/// `K` and `J` of a realized profile: NLKG for `q = 0`, KGM otherwise.
fn k_and_j(u: &RadialProfile, q: f64, spec: &NonlinearSpec) -> Result<(f64, f64)> {
    if q == 0.0 {
        Ok((u.mass2(), nlkg_j(u, spec)))
    } else {
        let (f, _) = kgm_parts(u, q, spec)?;
        Ok((f.k, f.j))
    }
}

pub fn tent_window(
    tent: TentProfile,
    q: f64,
    spec: &NonlinearSpec,
    points_per_unit: usize,
) -> Result<TentWindow> {
    if !(q >= 0.0 && q.is_finite()) {
        return Err(precondition(format!("coupling must be >= 0, got {q}")));
    }
    let u = tent.realize(tent.default_grid(points_per_unit)?)?;
    let (k, j) = k_and_j(&u, q, spec)?;
    Ok(TentWindow {
        tent,
        k,
        j,
        window: sigma_window(k, j, spec.mass()),
    })
}

/// Tents to scan.
#[derive(Debug, Clone, PartialEq)]
pub struct TentSearch {
    pub s1_values: Vec<f64>,
    pub r_values: Vec<f64>,
    pub points_per_unit: usize,
}

impl TentSearch {
    /// `count` values evenly spaced over each closed range.
    pub fn linear(s1: (f64, f64), s1_count: usize, r: (f64, f64), r_count: usize) -> Self {
        let spaced = |(a, b): (f64, f64), n: usize| -> Vec<f64> {
            if n <= 1 {
                return vec![a];
            }
            (0..n)
                .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
                .collect()
        };
        Self {
            s1_values: spaced(s1, s1_count),
            r_values: spaced(r, r_count),
            points_per_unit: 32,
        }
    }
}

/// The widest connected union of tent windows found by a search.
#[derive(Debug, Clone)]
pub struct WindowEstimate {
    /// Upper bound for the true lower threshold.
    pub lower: f64,
    /// Lower bound for the true upper threshold.
    pub upper: f64,
    /// Tent attaining `lower`.
    pub lower_witness: TentWindow,
    /// Tent attaining `upper`.
    pub upper_witness: TentWindow,
    /// Every tent whose window belongs to the returned interval.
    pub members: Vec<TentWindow>,
    pub scanned: usize,
}

impl WindowEstimate {
    pub fn window(&self) -> ChargeWindow {
        ChargeWindow {
            lower: self.lower,
            upper: self.upper,
        }
    }
}

/// Scans tents and returns the widest interval covered by overlapping windows,
/// or `None` when no scanned tent has `J < 0`.
pub fn estimate_admissible_window(
    spec: &NonlinearSpec,
    q: f64,
    search: &TentSearch,
) -> Result<Option<WindowEstimate>> {
    if search.s1_values.is_empty() || search.r_values.is_empty() {
        return Err(precondition("tent search grid is empty"));
    }
    let mut found = Vec::new();
    for &s1 in &search.s1_values {
        for &r in &search.r_values {
            let tw = tent_window(TentProfile::new(s1, r)?, q, spec, search.points_per_unit)?;
            if tw.window.is_some() {
                found.push(tw);
            }
        }
    }
    let scanned = search.s1_values.len() * search.r_values.len();
    if found.is_empty() {
        return Ok(None);
    }
    found.sort_by(|a, b| {
        let (wa, wb) = (a.window.unwrap(), b.window.unwrap());
        wa.lower.total_cmp(&wb.lower)
    });
    // sweep the sorted open intervals into connected components
    let mut best: Option<(usize, usize, f64, f64)> = None;
    let mut start = 0;
    let mut upper = found[0].window.unwrap().upper;
    for i in 1..=found.len() {
        let next = found.get(i).map(|t| t.window.unwrap());
        match next {
            Some(w) if w.lower < upper => upper = upper.max(w.upper),
            _ => {
                let lower = found[start].window.unwrap().lower;
                if best.is_none_or(|(_, _, lo, hi)| upper - lower > hi - lo) {
                    best = Some((start, i, lower, upper));
                }
                if let Some(w) = next {
                    start = i;
                    upper = w.upper;
                }
            }
        }
    }
    let (a, b, lower, upper) = best.expect("at least one component");
    let members = found[a..b].to_vec();
    let lower_witness = members[0];
    let upper_witness = *members
        .iter()
        .max_by(|x, y| x.window.unwrap().upper.total_cmp(&y.window.unwrap().upper))
        .unwrap();
    Ok(Some(WindowEstimate {
        lower,
        upper,
        lower_witness,
        upper_witness,
        members,
        scanned,
    }))
}

/// `(c₃/(48^{1/3}π^{2/3}))^{1/2}`, the constant in the coupling bound.
fn coupling_constant(c3: f64) -> f64 {
    (c3 / (48f64.cbrt() * PI.powf(2.0 / 3.0))).sqrt()
}

/// Hypotheses and conclusions of the tent criterion for `J < 0` at coupling `q`.
#[derive(Debug, Clone)]
pub struct TentCriterionReport {
    pub s1: f64,
    pub r: f64,
    pub h: f64,
    pub q: f64,
    /// `R(s₁) ≥ -½m²s₁²`.
    pub remainder_lower: Check,
    /// `R(s₁) < ½s₁²[(1 + m²h²)r³/(r+1)³ - (1 + m²)]`.
    pub remainder_upper: Check,
    /// `W` non-decreasing on `(0, s₁)`, sampled.
    pub w_monotone: Check,
    /// `(c₃/(48^{1/3}π^{2/3}))^{1/2}(1 - h)/(qh) > s₁r`.
    pub coupling_bound: Check,
    /// `m²h²r³ - 3r² - 3r - 1 > 0`; implied by the two remainder bounds.
    pub radius_necessary: Check,
    /// `J(u_r) < 0` computed on the grid.
    pub j_negative: Check,
    /// `I(u_r) ≥ (h² - 1)‖u_r‖²`.
    pub screening_bound: Check,
    /// `f'(ρ) > 0` on a ρ grid over `(0, r + 1)`.
    pub f_increasing: Check,
    pub j: f64,
    pub k: f64,
    pub i: f64,
    pub norm2: f64,
}

impl TentCriterionReport {
    pub fn hypotheses_pass(&self) -> bool {
        self.remainder_lower.passed
            && self.remainder_upper.passed
            && self.w_monotone.passed
            && self.coupling_bound.passed
    }

    pub fn conclusions_pass(&self) -> bool {
        self.j_negative.passed && self.screening_bound.passed && self.f_increasing.passed
    }

    pub fn checks(&self) -> [(&'static str, &Check); 8] {
        [
            ("remainder_lower", &self.remainder_lower),
            ("remainder_upper", &self.remainder_upper),
            ("w_monotone", &self.w_monotone),
            ("coupling_bound", &self.coupling_bound),
            ("radius_necessary", &self.radius_necessary),
            ("j_negative", &self.j_negative),
            ("screening_bound", &self.screening_bound),
            ("f_increasing", &self.f_increasing),
        ]
    }
}

fn check(passed: bool, detail: String) -> Check {
    Check { passed, detail }
}

/// Checks the tent criterion at `(s₁, r, h, q)` and evaluates its conclusion
/// on a grid with `points_per_unit` nodes per unit length.
pub fn verify_nuove_q(
    spec: &NonlinearSpec,
    s1: f64,
    r: f64,
    h: f64,
    q: f64,
    c3: f64,
    points_per_unit: usize,
) -> Result<TentCriterionReport> {
    if !(h > 0.0 && h < 1.0) {
        return Err(precondition(format!("h must lie in (0, 1), got {h}")));
    }
    if !(q > 0.0 && c3 > 0.0) {
        return Err(precondition("q and c3 must be positive"));
    }
    let tent = TentProfile::new(s1, r)?;
    let m2 = spec.mass() * spec.mass();
    let rs1 = spec.r(s1);
    let ratio = (r / (r + 1.0)).powi(3);
    let upper = 0.5 * s1 * s1 * ((1.0 + m2 * h * h) * ratio - (1.0 + m2));
    let remainder_lower = check(
        rs1 >= -0.5 * m2 * s1 * s1,
        format!("R(s1) = {rs1:.6e} >= {:.6e}", -0.5 * m2 * s1 * s1),
    );
    let remainder_upper = check(rs1 < upper, format!("R(s1) = {rs1:.6e} < {upper:.6e}"));

    let samples = 4000;
    let mut prev = 0.0f64;
    let mut worst: Option<f64> = None;
    for k in 1..=samples {
        let s = s1 * k as f64 / samples as f64;
        let w = spec.w(s);
        if w < prev - 1e-14 * prev.abs().max(1.0) {
            worst.get_or_insert(s);
        }
        prev = w;
    }
    let w_monotone = match worst {
        None => check(
            true,
            format!("W non-decreasing at {samples} samples on (0, s1]"),
        ),
        Some(s) => check(false, format!("W decreases near s = {s:.6}")),
    };

    let cc = coupling_constant(c3);
    let lhs = cc * (1.0 - h) / (q * h);
    let coupling_bound = check(lhs > s1 * r, format!("{lhs:.6e} > s1*r = {:.6e}", s1 * r));
    let nec = m2 * h * h * r.powi(3) - 3.0 * r * r - 3.0 * r - 1.0;
    let radius_necessary = check(nec > 0.0, format!("m^2h^2r^3 - 3r^2 - 3r - 1 = {nec:.6e}"));

    let u = tent.realize(tent.default_grid(points_per_unit)?)?;
    let (f, norm2) = kgm_parts(&u, q, spec)?;
    let j_negative = check(f.j < 0.0, format!("J(u_r) = {:.6e}", f.j));
    let bound = (h * h - 1.0) * norm2;
    let screening_bound = check(f.i >= bound, format!("I = {:.6e} >= {bound:.6e}", f.i));

    // f'(ρ) from the piecewise formula
    let slope = c3 * (4.0 * PI / 3.0).cbrt() * (1.0 - h).powi(2) / (q * q);
    let n_rho = 2000;
    let mut min_fp = f64::INFINITY;
    for k in 1..n_rho {
        let rho = (r + 1.0) * k as f64 / n_rho as f64;
        let sink = if rho < r {
            4.0 * PI * h * h * s1 * s1 * rho * rho
        } else {
            4.0 * PI * h * h * s1 * s1 * (r + 1.0 - rho).powi(2) * rho * rho
        };
        min_fp = min_fp.min(slope - sink);
    }
    let f_increasing = check(
        min_fp > 0.0,
        format!("min f'(rho) = {min_fp:.6e} on {n_rho} points"),
    );

    Ok(TentCriterionReport {
        s1,
        r,
        h,
        q,
        remainder_lower,
        remainder_upper,
        w_monotone,
        coupling_bound,
        radius_necessary,
        j_negative,
        screening_bound,
        f_increasing,
        j: f.j,
        k: f.k,
        i: f.i,
        norm2,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstructOptions {
    pub sobolev_c3: f64,
    pub points_per_unit: usize,
    /// The radius search fails past this value.
    pub r_cap: f64,
    /// Relative width to which the smallest sufficient radius is refined.
    pub r_tolerance: f64,
}

impl Default for ConstructOptions {
    fn default() -> Self {
        Self {
            sobolev_c3: SOBOLEV_C3,
            points_per_unit: 32,
            r_cap: 1e6,
            r_tolerance: 1e-2,
        }
    }
}

/// Tent, coupling and the charge they certify.
#[derive(Debug, Clone)]
pub struct ConstructionPlan {
    pub s1: f64,
    /// `W(s₁)/(½s₁²)`.
    pub lambda: f64,
    pub alpha: f64,
    pub h: f64,
    pub r: f64,
    pub q: f64,
    /// `(2π/3)(c₃/(48^{1/3}π^{2/3}))^{1/2}mh(1 - h)s₁r²`.
    pub predicted_charge_lb: f64,
    /// `qmK(u_r)` with `K` from the gauge solve.
    pub verified_charge: f64,
    pub k: f64,
    pub j: f64,
    /// Window of `u_r` at coupling `q`, in units of the matter charge `σ`.
    pub window: Option<ChargeWindow>,
    pub sobolev_c3: f64,
    pub doublings: usize,
    pub target_charge: f64,
}

impl ConstructionPlan {
    /// The matter charge `σ = mK(u_r)` at the window center.
    pub fn sigma(&self, mass: f64) -> f64 {
        mass * self.k
    }

    pub fn tent(&self) -> TentProfile {
        TentProfile {
            s1: self.s1,
            r: self.r,
        }
    }
}

/// Plateau height: the minimizer of `W(s)/(½s²)` over the range where `W`
/// is still non-decreasing.
fn plateau_height(spec: &NonlinearSpec) -> Result<(f64, f64)> {
    let scan_max = 10.0 * spec.amplitude_scale().max(1.0);
    let n = 20_000;
    let mut mono_end = scan_max;
    let mut prev = spec.dw(scan_max / n as f64);
    for k in 2..=n {
        let s = scan_max * k as f64 / n as f64;
        let d = spec.dw(s);
        if d < 0.0 && prev >= 0.0 {
            mono_end = bisect(|x| spec.dw(x), s - scan_max / n as f64, s, 1e-14);
            break;
        }
        prev = d;
    }
    let mut best = (mono_end, spec.lambda(mono_end));
    for k in 1..=n {
        let s = mono_end * k as f64 / n as f64;
        let l = spec.lambda(s);
        if l < best.1 {
            best = (s, l);
        }
    }
    let step = mono_end / n as f64;
    let s = golden_section_min(
        |x| spec.lambda(x),
        (best.0 - step).max(step * 1e-3),
        (best.0 + step).min(mono_end),
        1e-13,
    );
    let s = if spec.lambda(s) <= best.1 { s } else { best.0 };
    Ok((s, spec.lambda(s)))
}

/// Builds a tent and coupling whose certified electric charge `qmK(u_r)` is
/// at least `target`.
pub fn construct_for_charge(
    spec: &NonlinearSpec,
    target: f64,
    opts: &ConstructOptions,
) -> Result<ConstructionPlan> {
    if !(target > 0.0 && target.is_finite()) {
        return Err(precondition(format!(
            "target charge must be positive, got {target}"
        )));
    }
    if !(opts.sobolev_c3 > 0.0 && opts.r_cap > 0.0 && opts.r_tolerance > 0.0) {
        return Err(precondition("invalid construction options"));
    }
    let m = spec.mass();
    let m2 = m * m;
    let (s1, lambda) = plateau_height(spec)?;
    if !(lambda < m2) {
        return Err(precondition(format!(
            "no amplitude with W(s)/(s^2/2) < m^2 where W is non-decreasing (best {lambda} at s = {s1})"
        )));
    }
    let alpha = 0.5 * (m2 - lambda) / (m2 + 1.0);
    let h2_lo = (lambda + alpha) / (m2 * (1.0 - alpha));
    let h = (0.5 * (h2_lo + 1.0)).sqrt();
    let cc = coupling_constant(opts.sobolev_c3);
    let coupling = |r: f64| 0.5 * cc * (1.0 - h) / (h * s1 * r);
    let charge_at = |r: f64| -> Result<(f64, f64, f64)> {
        let q = coupling(r);
        let tent = TentProfile::new(s1, r)?;
        let u = tent.realize(tent.default_grid(opts.points_per_unit)?)?;
        let (f, _) = kgm_parts(&u, q, spec)?;
        Ok((q * m * f.k, f.k, f.j))
    };

    let r_start = 1.1 / ((1.0 - alpha).powf(-1.0 / 3.0) - 1.0);
    let mut r = r_start;
    let mut doublings = 0;
    let mut current = charge_at(r)?;
    while current.0 < target {
        if 2.0 * r > opts.r_cap {
            return Err(Error::SearchExhausted(format!(
                "charge {} below target {target} at the radius cap {}",
                current.0, opts.r_cap
            )));
        }
        r *= 2.0;
        doublings += 1;
        current = charge_at(r)?;
    }
    if doublings > 0 {
        // smallest sufficient radius between the last two doublings
        let (mut lo, mut hi) = (r / 2.0, r);
        while hi - lo > opts.r_tolerance * hi {
            let mid = 0.5 * (lo + hi);
            let c = charge_at(mid)?;
            if c.0 >= target {
                hi = mid;
                current = c;
            } else {
                lo = mid;
            }
        }
        r = hi;
    }
    let (verified_charge, k, j) = current;
    Ok(ConstructionPlan {
        s1,
        lambda,
        alpha,
        h,
        r,
        q: coupling(r),
        predicted_charge_lb: 2.0 * PI / 3.0 * cc * m * h * (1.0 - h) * s1 * r * r,
        verified_charge,
        k,
        j,
        window: sigma_window(k, j, m),
        sobolev_c3: opts.sobolev_c3,
        doublings,
        target_charge: target,
    })
}

/// Runs [`verify_nuove_q`] on a plan.
pub fn verify_plan(
    spec: &NonlinearSpec,
    plan: &ConstructionPlan,
    points_per_unit: usize,
) -> Result<TentCriterionReport> {
    verify_nuove_q(
        spec,
        plan.s1,
        plan.r,
        plan.h,
        plan.q,
        plan.sobolev_c3,
        points_per_unit,
    )
}
