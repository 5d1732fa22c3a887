//! Nonlinearity families `W(s) = ½m²s² + R(s)` and checks of the structural
//! assumptions the existence theory relies on.
//!
//! Assumptions, as checked here:
//!
//! - (W0) `m > 0` and `R(0) = R'(0) = R''(0) = 0`.
//! - (W1) `R(s) ≥ -½m²s²`, i.e. `W ≥ 0`.
//! - (W2) some `s₀ > 0` has `R(s₀) < 0`.
//! - (W3) `|R''(s)| ≤ c₁s^{p-2} + c₂s^{q-2}` with `2 < p, q < 6`.
//!
//! (W1)-(W3) are checked on samples only; a passing report is evidence, not proof.

use crate::error::{precondition, Result};
use serde::{Deserialize, Serialize};

/// Smallest and largest admissible growth exponents (open interval).
const EXPONENT_RANGE: (f64, f64) = (2.0, 6.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    DoubleWell,
    PowerDeficit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// `W(s) = ½s²(1 - s/s*)²`, mass fixed to 1.
    DoubleWell { scale: f64 },
    /// `R(s) = -a·s^p + b·s^q`.
    PowerDeficit { a: f64, b: f64, p: f64, q: f64 },
}

/// An immutable nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlinearSpec {
    mass: f64,
    family: Family,
}

impl NonlinearSpec {
    pub fn double_well(scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(precondition(format!(
                "double_well scale must be positive, got {scale}"
            )));
        }
        Ok(Self {
            mass: 1.0,
            family: Family::DoubleWell { scale },
        })
    }

    /// The default nonlinearity `½s²(1-s)²`.
    pub fn default_double_well() -> Self {
        Self {
            mass: 1.0,
            family: Family::DoubleWell { scale: 1.0 },
        }
    }

    pub fn power_deficit(mass: f64, a: f64, b: f64, p: f64, q: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(precondition(format!("mass must be positive, got {mass}")));
        }
        if !(a > 0.0) {
            return Err(precondition(format!("power_deficit needs a > 0, got {a}")));
        }
        if !(b >= 0.0) {
            return Err(precondition(format!("power_deficit needs b >= 0, got {b}")));
        }
        let inside = |e: f64| e > EXPONENT_RANGE.0 && e < EXPONENT_RANGE.1;
        if !inside(p) || !inside(q) {
            return Err(precondition(format!(
                "exponents must lie strictly inside (2, 6), got p = {p}, q = {q}"
            )));
        }
        if b > 0.0 && p >= q {
            return Err(precondition(format!(
                "power_deficit needs p < q, got p = {p}, q = {q}"
            )));
        }
        Ok(Self {
            mass,
            family: Family::PowerDeficit { a, b, p, q },
        })
    }

    /// Builds a spec from a family name and its parameter list, as written in
    /// run configurations. `mass` is ignored by `double_well`.
    pub fn from_parts(kind: FamilyKind, mass: f64, params: &[f64]) -> Result<Self> {
        match kind {
            FamilyKind::DoubleWell => match params {
                [scale] => Self::double_well(*scale),
                _ => Err(precondition(
                    "double_well takes exactly one parameter [scale]",
                )),
            },
            FamilyKind::PowerDeficit => match params {
                [a, b, p, q] => Self::power_deficit(mass, *a, *b, *p, *q),
                _ => Err(precondition("power_deficit takes parameters [a, b, p, q]")),
            },
        }
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn kind(&self) -> FamilyKind {
        match self.family {
            Family::DoubleWell { .. } => FamilyKind::DoubleWell,
            Family::PowerDeficit { .. } => FamilyKind::PowerDeficit,
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match self.family {
            Family::DoubleWell { scale } => vec![scale],
            Family::PowerDeficit { a, b, p, q } => vec![a, b, p, q],
        }
    }

    /// `W(s)`, `W'(s)` or `W''(s)` for `order` 0, 1, 2.
    pub fn eval(&self, s: f64, order: u8) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(precondition(format!("W is defined on s >= 0, got {s}")));
        }
        match order {
            0 => Ok(self.w(s)),
            1 => Ok(self.dw(s)),
            2 => Ok(self.d2w(s)),
            _ => Err(precondition(format!(
                "derivative order must be 0, 1 or 2, got {order}"
            ))),
        }
    }

    #[inline]
    pub fn w(&self, s: f64) -> f64 {
        match self.family {
            Family::DoubleWell { scale } => {
                let t = 1.0 - s / scale;
                0.5 * s * s * t * t
            }
            Family::PowerDeficit { .. } => 0.5 * self.mass * self.mass * s * s + self.r(s),
        }
    }

    #[inline]
    pub fn dw(&self, s: f64) -> f64 {
        match self.family {
            Family::DoubleWell { scale } => {
                let x = s / scale;
                s * (1.0 - x) * (1.0 - 2.0 * x)
            }
            Family::PowerDeficit { a, b, p, q } => {
                self.mass * self.mass * s - a * p * s.powf(p - 1.0) + b * q * s.powf(q - 1.0)
            }
        }
    }

    #[inline]
    pub fn d2w(&self, s: f64) -> f64 {
        match self.family {
            Family::DoubleWell { scale } => {
                let x = s / scale;
                1.0 - 6.0 * x + 6.0 * x * x
            }
            Family::PowerDeficit { a, b, p, q } => {
                self.mass * self.mass - a * p * (p - 1.0) * s.powf(p - 2.0)
                    + b * q * (q - 1.0) * s.powf(q - 2.0)
            }
        }
    }

    /// `R(s) = W(s) - ½m²s²`, evaluated from its own closed form.
    #[inline]
    pub fn r(&self, s: f64) -> f64 {
        self.remainder_terms()
            .iter()
            .map(|&(c, e)| c * s.powf(e))
            .sum()
    }

    #[inline]
    pub fn d2r(&self, s: f64) -> f64 {
        self.remainder_terms()
            .iter()
            .map(|&(c, e)| c * e * (e - 1.0) * s.powf(e - 2.0))
            .sum()
    }

    /// `R` as a sum of monomials `c·s^e`.
    pub fn remainder_terms(&self) -> Vec<(f64, f64)> {
        match self.family {
            // ½s²(1-s/k)² - ½s² = ½s⁴/k² - s³/k
            Family::DoubleWell { scale } => vec![(0.5 / (scale * scale), 4.0), (-1.0 / scale, 3.0)],
            Family::PowerDeficit { a, b, p, q } => {
                if b > 0.0 {
                    vec![(-a, p), (b, q)]
                } else {
                    vec![(-a, p)]
                }
            }
        }
    }

    /// Growth exponents `(p, q)` used in the (W3) bound.
    pub fn growth_exponents(&self) -> (f64, f64) {
        match self.family {
            Family::DoubleWell { .. } => (3.0, 4.0),
            Family::PowerDeficit { p, q, b, .. } => {
                if b > 0.0 {
                    (p, q)
                } else {
                    (p, p)
                }
            }
        }
    }

    /// `λ(s) = W(s)/(½s²)`; a value below `m²` means `R(s) < 0`.
    pub fn lambda(&self, s: f64) -> f64 {
        self.w(s) / (0.5 * s * s)
    }

    /// Natural amplitude scale of the family, used to size default searches.
    pub fn amplitude_scale(&self) -> f64 {
        match self.family {
            Family::DoubleWell { scale } => scale,
            Family::PowerDeficit { .. } => 1.0,
        }
    }
}

/// Outcome of a single sampled check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self {
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AssumptionReport {
    pub w0: Check,
    pub w1: Check,
    pub w2: Check,
    /// `s₀` with `R(s₀) < 0`, chosen to minimize `W(s)/(½s²)`.
    pub w2_witness: Option<f64>,
    pub w3: Check,
    /// Fitted `(c₁, c₂)` of the (W3) bound.
    pub w3_constants: Option<(f64, f64)>,
    pub s_max: f64,
    pub n_samples: usize,
    /// Always true: (W1)-(W3) were checked on a finite sample, not proved.
    pub sampled: bool,
}

impl AssumptionReport {
    pub fn all_passed(&self) -> bool {
        self.w0.passed && self.w1.passed && self.w2.passed && self.w3.passed
    }
}

pub fn validate_assumptions(
    spec: &NonlinearSpec,
    s_max: f64,
    n_samples: usize,
) -> Result<AssumptionReport> {
    if !(s_max > 0.0 && s_max.is_finite()) {
        return Err(precondition(format!("s_max must be positive, got {s_max}")));
    }
    if n_samples < 100 {
        return Err(precondition(format!(
            "need at least 100 samples, got {n_samples}"
        )));
    }
    let m2 = spec.mass() * spec.mass();
    let samples: Vec<f64> = (0..n_samples)
        .map(|i| s_max * i as f64 / (n_samples - 1) as f64)
        .collect();

    let r0 = spec.r(0.0);
    let dw0 = spec.dw(0.0);
    let d2r0 = spec.d2w(0.0) - m2;
    let w0_ok = spec.mass() > 0.0 && r0.abs() < 1e-12 && dw0.abs() < 1e-12 && d2r0.abs() < 1e-12;
    let w0 = Check::new(
        w0_ok,
        format!("R(0) = {r0:e}, W'(0) = {dw0:e}, W''(0) - m^2 = {d2r0:e}"),
    );

    // (W1)
    let worst = samples
        .iter()
        .map(|&s| (s, spec.r(s) + 0.5 * m2 * s * s))
        .fold(
            (0.0, f64::INFINITY),
            |acc, x| if x.1 < acc.1 { x } else { acc },
        );
    let w1 = Check::new(
        worst.1 >= -1e-12 * (1.0 + spec.w(worst.0).abs()),
        format!(
            "min of R(s) + m^2 s^2/2 on samples is {:e} at s = {}",
            worst.1, worst.0
        ),
    );

    // (W2): among negative samples take the one with smallest W/(½s²), then refine.
    let best = samples
        .iter()
        .copied()
        .filter(|&s| s > 0.0 && spec.r(s) < 0.0)
        .map(|s| (s, spec.lambda(s)))
        .fold(None, |acc: Option<(f64, f64)>, x| match acc {
            Some(a) if a.1 <= x.1 => Some(a),
            _ => Some(x),
        });
    let (w2, w2_witness) = match best {
        Some((s, _)) => {
            let step = s_max / (n_samples - 1) as f64;
            let lo = (s - step).max(step * 1e-3);
            let hi = (s + step).min(s_max);
            let refined = golden_section_min(|x| spec.lambda(x), lo, hi, 1e-12);
            let s0 = if spec.r(refined) < 0.0 { refined } else { s };
            (
                Check::new(true, format!("R({s0}) = {:e} < 0", spec.r(s0))),
                Some(s0),
            )
        }
        None => (Check::new(false, "no sample with R(s) < 0"), None),
    };

    // (W3)
    let (p, q) = spec.growth_exponents();
    let in_range = |e: f64| e > EXPONENT_RANGE.0 && e < EXPONENT_RANGE.1;
    let (w3, w3_constants) = if !in_range(p) || !in_range(q) {
        (
            Check::new(false, format!("exponents ({p}, {q}) outside (2, 6)")),
            None,
        )
    } else {
        let mut c1: f64 = 0.0;
        let mut c2: f64 = 0.0;
        for &s in samples.iter().filter(|&&s| s > 0.0) {
            let v = spec.d2r(s).abs();
            if s <= 1.0 {
                c1 = c1.max(v / s.powf(p - 2.0));
            } else {
                c2 = c2.max(v / s.powf(q - 2.0));
            }
        }
        let c1 = c1.max(f64::MIN_POSITIVE);
        let c2 = c2.max(f64::MIN_POSITIVE);
        let ok = samples.iter().all(|&s| {
            let bound = c1 * s.powf(p - 2.0) + c2 * s.powf(q - 2.0);
            spec.d2r(s).abs() <= bound * (1.0 + 1e-12) + 1e-300
        }) && c1.is_finite()
            && c2.is_finite();
        (
            Check::new(
                ok,
                format!(
                    "|R''(s)| <= {c1:.6e} s^{} + {c2:.6e} s^{} on samples",
                    p - 2.0,
                    q - 2.0
                ),
            ),
            Some((c1, c2)),
        )
    };

    Ok(AssumptionReport {
        w0,
        w1,
        w2,
        w2_witness,
        w3,
        w3_constants,
        s_max,
        n_samples,
        sampled: true,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails,
    /// The numeric estimate sits within the decision margin of a bound.
    Inconclusive,
}

#[derive(Debug, Clone)]
pub struct CriteriaReport {
    /// Criterion: `R < 0` on `(0, α)` and `|R(s)|/s^{2+ε}` bounded below with
    /// `ε ∈ (0, 4/3)`; when it holds, `σ_g = 0`.
    pub small_charge: Verdict,
    /// Fitted local exponent `ε` from `|R(s)| ~ s^{2+ε}` near zero.
    pub fitted_epsilon: Option<f64>,
    /// Largest sampled `α` with `R < 0` on `(0, α)`.
    pub alpha: Option<f64>,
    /// Criterion: some `s₁ > 0` with `W(s₁) = 0`.
    pub zero_of_w: Verdict,
    pub zero_witness: Option<f64>,
    pub search_max: f64,
}

/// Decision margin on the fitted exponent.
const EXPONENT_MARGIN: f64 = 0.1;

/// Evaluates the sufficient small-charge criterion and the existence of a
/// positive zero of `W`, searching `s ∈ (0, search_max]`.
pub fn classify_charge_criteria(spec: &NonlinearSpec, search_max: f64) -> Result<CriteriaReport> {
    if !(search_max > 0.0) {
        return Err(precondition("search_max must be positive"));
    }

    // log-log regression of |R| on s ∈ [1e-4, 1e-1]
    let n = 200;
    let pts: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let ls = -4.0 + 3.0 * i as f64 / (n - 1) as f64;
            10f64.powf(ls)
        })
        .map(|s| (s, spec.r(s)))
        .collect();
    let negative_near_zero = pts.iter().all(|&(_, r)| r < 0.0);
    let (fitted_epsilon, small_charge) = if negative_near_zero {
        let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.1.abs().ln()).collect();
        let slope = least_squares_slope(&xs, &ys);
        let eps = slope - 2.0;
        let upper = 4.0 / 3.0;
        let verdict =
            if (eps - 0.0).abs() <= EXPONENT_MARGIN || (eps - upper).abs() <= EXPONENT_MARGIN {
                Verdict::Inconclusive
            } else if eps > 0.0 && eps < upper {
                Verdict::Holds
            } else {
                Verdict::Fails
            };
        (Some(eps), verdict)
    } else {
        (None, Verdict::Fails)
    };

    let alpha = if negative_near_zero {
        let m = 4000;
        let step = search_max / m as f64;
        let first_nonneg = (1..=m).map(|i| i as f64 * step).find(|&s| spec.r(s) >= 0.0);
        Some(first_nonneg.unwrap_or(search_max))
    } else {
        None
    };

    // W ≥ 0 typically touches zero tangentially, so look for a minimum of W/(½s²).
    let m = 4000;
    let step = search_max / m as f64;
    let (s_best, _) = (1..=m)
        .map(|i| i as f64 * step)
        .map(|s| (s, spec.lambda(s)))
        .fold(
            (step, f64::INFINITY),
            |acc, x| if x.1 < acc.1 { x } else { acc },
        );
    let refined = golden_section_min(
        |x| spec.lambda(x),
        (s_best - step).max(step * 1e-3),
        (s_best + step).min(search_max),
        1e-13,
    );
    let lam = spec.lambda(refined);
    let (zero_of_w, zero_witness) = if lam.abs() < 1e-10 {
        (Verdict::Holds, Some(refined))
    } else if lam < 0.0 {
        // W changes sign; bracket the first root
        let root = (1..=m)
            .map(|i| i as f64 * step)
            .find(|&s| spec.w(s) < 0.0)
            .map(|hi| bisect(|x| spec.w(x), hi - step, hi, 1e-14));
        (Verdict::Holds, root)
    } else if lam < 1e-6 {
        (Verdict::Inconclusive, Some(refined))
    } else {
        (Verdict::Fails, None)
    };

    Ok(CriteriaReport {
        small_charge,
        fitted_epsilon,
        alpha,
        zero_of_w,
        zero_witness,
        search_max,
    })
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

pub(crate) fn golden_section_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= tol * (1.0 + a.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

pub(crate) fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        let c = 0.5 * (a + b);
        let fc = f(c);
        if (fc < 0.0) == (fa < 0.0) {
            a = c;
            fa = fc;
        } else {
            b = c;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn dw1() -> NonlinearSpec {
        NonlinearSpec::double_well(1.0).unwrap()
    }

    #[test]
    fn double_well_values() {
        let spec = dw1();
        assert_eq!(spec.eval(0.0, 0).unwrap(), 0.0);
        assert_eq!(spec.eval(1.0, 0).unwrap(), 0.0);
        // s(1-s)(1-2s) vanishes at s = 1
        assert_eq!(spec.eval(1.0, 1).unwrap(), 0.0);
        assert_relative_eq!(
            spec.eval(0.3, 1).unwrap(),
            0.3 * 0.7 * 0.4,
            max_relative = 1e-14
        );
        assert_eq!(spec.eval(0.0, 2).unwrap(), 1.0);
    }

    #[test]
    fn negative_argument_rejected() {
        assert!(dw1().eval(-0.1, 0).is_err());
        assert!(dw1().eval(0.1, 3).is_err());
    }

    #[test]
    fn constructor_validation() {
        assert!(NonlinearSpec::double_well(0.0).is_err());
        assert!(NonlinearSpec::power_deficit(1.0, 1.0, 1.0, 6.0, 5.0).is_err());
        assert!(NonlinearSpec::power_deficit(1.0, 1.0, 1.0, 4.0, 3.0).is_err());
        assert!(NonlinearSpec::power_deficit(1.0, 1.0, 0.0, 4.0, 5.0).is_ok());
        assert!(NonlinearSpec::from_parts(FamilyKind::DoubleWell, 1.0, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn double_well_passes_all_assumptions() {
        let rep = validate_assumptions(&dw1(), 3.0, 1000).unwrap();
        assert!(rep.all_passed(), "{rep:?}");
        let s0 = rep.w2_witness.unwrap();
        assert!((s0 - 1.0).abs() < 1e-6, "witness {s0}");
        // R(s) = ½s⁴ - s³, so R(1) = -½
        assert_relative_eq!(dw1().r(s0), -0.5, max_relative = 1e-9);
    }

    #[test]
    fn pure_power_deficit_fails_w1() {
        let spec = NonlinearSpec::power_deficit(1.0, 1.0, 0.0, 4.0, 5.0).unwrap();
        let rep = validate_assumptions(&spec, 3.0, 1000).unwrap();
        assert!(!rep.w1.passed);
        assert!(rep.w0.passed && rep.w2.passed);
    }

    #[test]
    fn empty_domain_rejected() {
        assert!(validate_assumptions(&dw1(), 0.0, 1000).is_err());
        assert!(validate_assumptions(&dw1(), 3.0, 99).is_err());
    }

    #[test]
    fn double_well_criteria() {
        let rep = classify_charge_criteria(&dw1(), 10.0).unwrap();
        assert_eq!(rep.zero_of_w, Verdict::Holds);
        assert!((rep.zero_witness.unwrap() - 1.0).abs() < 1e-6);
        // R ≈ -s³ near zero: ε = 1
        assert_eq!(rep.small_charge, Verdict::Holds);
        assert!((rep.fitted_epsilon.unwrap() - 1.0).abs() < 0.05);
        // R = s³(s/2 - 1) < 0 on (0, 2)
        assert!((rep.alpha.unwrap() - 2.0).abs() < 0.01);
    }

    #[test]
    fn power_deficit_criteria() {
        let spec = NonlinearSpec::power_deficit(1.0, 1.0, 1.0, 3.0, 4.0).unwrap();
        let rep = classify_charge_criteria(&spec, 10.0).unwrap();
        assert_eq!(rep.small_charge, Verdict::Holds);
        assert!((rep.fitted_epsilon.unwrap() - 1.0).abs() < 0.05);

        let steep = NonlinearSpec::power_deficit(1.0, 1.0, 1.0, 4.0, 5.0).unwrap();
        let rep = classify_charge_criteria(&steep, 10.0).unwrap();
        assert_eq!(rep.small_charge, Verdict::Fails);
        assert_eq!(rep.zero_of_w, Verdict::Fails);
    }

    #[test]
    fn lambda_matches_remainder_sign() {
        let spec = dw1();
        for s in [0.2, 0.5, 1.5, 2.5] {
            assert_eq!(spec.lambda(s) < 1.0, spec.r(s) < 0.0);
        }
    }

    fn specs() -> impl Strategy<Value = NonlinearSpec> {
        prop_oneof![
            (0.5f64..3.0).prop_map(|k| NonlinearSpec::double_well(k).unwrap()),
            (
                0.5f64..2.0,
                0.1f64..2.0,
                0.5f64..2.0,
                2.2f64..3.5,
                3.6f64..5.8
            )
                .prop_map(|(m, a, b, p, q)| NonlinearSpec::power_deficit(m, a, b, p, q).unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn decomposition_identity(spec in specs(), s in 0.0f64..3.0) {
            let m2 = spec.mass() * spec.mass();
            let lhs = spec.w(s) - 0.5 * m2 * s * s;
            prop_assert!((lhs - spec.r(s)).abs() <= 1e-12 * (1.0 + spec.w(s).abs() + m2 * s * s));
        }

        #[test]
        fn derivative_matches_central_difference(spec in specs(), s in 0.1f64..2.0) {
            let h = 1e-5;
            let fd = (spec.w(s + h) - spec.w(s - h)) / (2.0 * h);
            let exact = spec.dw(s);
            prop_assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1e-3), "fd {} exact {}", fd, exact);
            let fd2 = (spec.dw(s + h) - spec.dw(s - h)) / (2.0 * h);
            prop_assert!((fd2 - spec.d2w(s)).abs() <= 1e-6 * spec.d2w(s).abs().max(1e-3));
        }

        #[test]
        fn double_well_nonnegative(k in 0.5f64..3.0, s in 0.0f64..10.0) {
            prop_assert!(NonlinearSpec::double_well(k).unwrap().w(s) >= 0.0);
        }
    }
}
