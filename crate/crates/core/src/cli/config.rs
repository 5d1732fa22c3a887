//! Run configuration: sectioned `key = value` text (TOML).
//!
//! Every block is optional. [`RunConfig::resolve`] fills the defaults a
//! command uses so that the manifest can echo them back verbatim.

use crate::model::{FamilyKind, NonlinearSpec};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Validate,
    SolveNlkg,
    SolveKgm,
    SolveVortex,
    Window,
    Construct,
    Evolve,
    Stability,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::SolveNlkg => "solve-nlkg",
            Command::SolveKgm => "solve-kgm",
            Command::SolveVortex => "solve-vortex",
            Command::Window => "window",
            Command::Construct => "construct",
            Command::Evolve => "evolve",
            Command::Stability => "stability",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ForceChoice {
    Nonlinear,
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Perturbation {
    None,
    Scale,
    Bump,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Must match the command given on the command line when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub nonlinearity: NonlinearityConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub problem: ProblemConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearityConfig {
    #[serde(default = "default_family")]
    pub family: FamilyKind,
    #[serde(default = "default_mass")]
    pub mass: f64,
    /// `[scale]` for `double_well`, `[a, b, p, q]` for `power_deficit`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Vec<f64>>,
}

fn default_family() -> FamilyKind {
    FamilyKind::DoubleWell
}

fn default_mass() -> f64 {
    1.0
}

impl Default for NonlinearityConfig {
    fn default() -> Self {
        Self {
            family: default_family(),
            mass: default_mass(),
            params: None,
        }
    }
}

/// Grid sizes are signed so that a negative count is reported as a config
/// error rather than a type error.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    /// Radial intervals.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<i64>,
    /// Half-height of the vortex box.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nz: Option<i64>,
    /// Resolution of tent quadratures.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points_per_unit: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preconditioner_shift: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conjugate: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    /// Matter charge.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    /// Frequency for a shooting-initialized solve; `σ = |ω|‖u‖²`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell: Option<i64>,
    /// Target electric charge for `construct`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub charge: Option<f64>,
    /// Width of the Gaussian initial profile.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init_width: Option<f64>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search_max: Option<f64>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tent_s1: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tent_s1_count: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tent_r: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tent_r_count: Option<i64>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sobolev_c3: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_cap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_tolerance: Option<f64>,
    /// Whether `construct` follows the plan with a KGM solve.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve: Option<bool>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ledger_every: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub force: Option<ForceChoice>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<Perturbation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Bump center; drawn from the seed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bump_center: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub localization_radius: Option<f64>,
}

/// A configuration problem detected before any work is done.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

fn positive(name: &str, v: Option<f64>) -> Result<(), ConfigError> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => {
            Err(ConfigError(format!("{name} must be positive, got {x}")))
        }
        _ => Ok(()),
    }
}

fn positive_int(name: &str, v: Option<i64>) -> Result<(), ConfigError> {
    match v {
        Some(x) if x <= 0 => Err(ConfigError(format!("{name} must be positive, got {x}"))),
        _ => Ok(()),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks signs and ranges that do not depend on the command.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let g = &self.grid;
        let s = &self.solver;
        let p = &self.problem;
        positive("nonlinearity.mass", Some(self.nonlinearity.mass))?;
        positive("grid.r_max", g.r_max)?;
        positive("grid.z_max", g.z_max)?;
        positive_int("grid.n", g.n)?;
        positive_int("grid.nz", g.nz)?;
        positive_int("grid.points_per_unit", g.points_per_unit)?;
        positive("solver.tol", s.tol)?;
        positive_int("solver.max_iters", s.max_iters)?;
        positive("solver.preconditioner_shift", s.preconditioner_shift)?;
        for (name, v) in [
            ("problem.sigma", p.sigma),
            ("problem.charge", p.charge),
            ("problem.init_width", p.init_width),
            ("problem.s_max", p.s_max),
            ("problem.search_max", p.search_max),
            ("problem.sobolev_c3", p.sobolev_c3),
            ("problem.r_cap", p.r_cap),
            ("problem.r_tolerance", p.r_tolerance),
            ("problem.t_final", p.t_final),
            ("problem.dt", p.dt),
            ("problem.localization_radius", p.localization_radius),
        ] {
            positive(name, v)?;
        }
        for (name, v) in [
            ("problem.n_samples", p.n_samples),
            ("problem.tent_s1_count", p.tent_s1_count),
            ("problem.tent_r_count", p.tent_r_count),
            ("problem.ledger_every", p.ledger_every),
        ] {
            positive_int(name, v)?;
        }
        if let Some(q) = p.q {
            if !(q >= 0.0 && q.is_finite()) {
                return Err(ConfigError(format!(
                    "problem.q must be non-negative, got {q}"
                )));
            }
        }
        if let Some(w) = p.omega {
            if !(w != 0.0 && w.is_finite()) {
                return Err(ConfigError(format!(
                    "problem.omega must be nonzero, got {w}"
                )));
            }
        }
        for (name, v) in [
            ("problem.delta", p.delta),
            ("problem.bump_center", p.bump_center),
        ] {
            if let Some(x) = v {
                if !x.is_finite() {
                    return Err(ConfigError(format!("{name} must be finite")));
                }
            }
        }
        for (name, range) in [("problem.tent_s1", p.tent_s1), ("problem.tent_r", p.tent_r)] {
            if let Some([a, b]) = range {
                if !(a > 0.0 && b >= a && b.is_finite()) {
                    return Err(ConfigError(format!(
                        "{name} must be an increasing positive pair"
                    )));
                }
            }
        }
        Ok(())
    }

    /// The nonlinearity with its default parameters filled in.
    pub fn spec(&mut self) -> Result<NonlinearSpec, ConfigError> {
        let nl = &mut self.nonlinearity;
        if nl.params.is_none() {
            match nl.family {
                FamilyKind::DoubleWell => nl.params = Some(vec![1.0]),
                FamilyKind::PowerDeficit => {
                    return Err(ConfigError(
                        "power_deficit needs nonlinearity.params = [a, b, p, q]".into(),
                    ))
                }
            }
        }
        let spec =
            NonlinearSpec::from_parts(nl.family, nl.mass, nl.params.as_deref().unwrap_or_default())
                .map_err(|e| ConfigError(e.to_string()))?;
        // double_well fixes the mass; echo the one actually used
        nl.mass = spec.mass();
        Ok(spec)
    }

    /// Fills every default `command` reads, after checking the values it requires.
    pub fn resolve(&mut self, command: Command) -> Result<(), ConfigError> {
        if let Some(c) = self.command {
            if c != command {
                return Err(ConfigError(format!(
                    "config is for `{}` but `{}` was requested",
                    c.as_str(),
                    command.as_str()
                )));
            }
        }
        self.command = Some(command);
        self.seed.get_or_insert(0);
        let g = &mut self.grid;
        let s = &mut self.solver;
        let p = &mut self.problem;
        let solves = !matches!(command, Command::Validate | Command::Window);
        if solves {
            s.tol.get_or_insert(match command {
                Command::SolveVortex => 1e-7,
                Command::Evolve | Command::Stability => 1e-9,
                _ => 1e-6,
            });
            s.max_iters.get_or_insert(50_000);
            s.conjugate.get_or_insert(true);
            s.preconditioner_shift
                .get_or_insert(self.nonlinearity.mass.powi(2));
        }
        match command {
            Command::Validate => {
                p.s_max.get_or_insert(10.0);
                p.n_samples.get_or_insert(10_000);
                p.search_max.get_or_insert(10.0);
            }
            Command::SolveNlkg | Command::SolveKgm => {
                g.r_max.get_or_insert(40.0);
                g.n.get_or_insert(4096);
                if command == Command::SolveKgm && !p.q.is_some_and(|q| q > 0.0) {
                    return Err(ConfigError("solve-kgm needs problem.q > 0".into()));
                }
                match (p.sigma, p.omega) {
                    (Some(_), Some(_)) => {
                        return Err(ConfigError(
                            "give problem.sigma or problem.omega, not both".into(),
                        ))
                    }
                    (None, None) => {
                        return Err(ConfigError(
                            "problem.sigma or problem.omega is required".into(),
                        ))
                    }
                    (Some(_), None) => {
                        p.init_width.get_or_insert(4.0);
                    }
                    (None, Some(_)) => {}
                }
            }
            Command::SolveVortex => {
                let r = *g.r_max.get_or_insert(20.0);
                g.z_max.get_or_insert(r);
                g.n.get_or_insert(800);
                g.nz.get_or_insert(256);
                if p.sigma.is_none() {
                    return Err(ConfigError("solve-vortex needs problem.sigma".into()));
                }
                let ell = *p.ell.get_or_insert(1);
                if ell == 0 || ell.unsigned_abs() > i32::MAX as u64 {
                    return Err(ConfigError(format!(
                        "problem.ell must be a nonzero 32-bit integer, got {ell}"
                    )));
                }
            }
            Command::Window => {
                g.points_per_unit.get_or_insert(32);
                p.q.get_or_insert(0.0);
                p.tent_s1.get_or_insert([0.5, 1.5]);
                p.tent_s1_count.get_or_insert(11);
                p.tent_r.get_or_insert([1.0, 20.0]);
                p.tent_r_count.get_or_insert(39);
            }
            Command::Construct => {
                g.points_per_unit.get_or_insert(32);
                if p.charge.is_none() {
                    return Err(ConfigError("construct needs problem.charge".into()));
                }
                p.sobolev_c3.get_or_insert(crate::chargewin::SOBOLEV_C3);
                p.r_cap.get_or_insert(1e6);
                p.r_tolerance.get_or_insert(1e-2);
                p.solve.get_or_insert(true);
            }
            Command::Evolve | Command::Stability => {
                g.r_max.get_or_insert(40.0);
                g.n.get_or_insert(8192);
                match (p.sigma, p.omega) {
                    (Some(_), Some(_)) => {
                        return Err(ConfigError(
                            "give problem.sigma or problem.omega, not both".into(),
                        ))
                    }
                    (None, None) => {
                        p.omega = Some(0.5);
                    }
                    (Some(_), None) => {
                        p.init_width.get_or_insert(4.0);
                    }
                    (None, Some(_)) => {}
                }
                let h = g.r_max.unwrap() / g.n.unwrap() as f64;
                p.dt.get_or_insert(0.5 * h);
                p.t_final.get_or_insert(50.0);
                p.ledger_every.get_or_insert(100);
                p.delta.get_or_insert(0.01);
                if command == Command::Evolve {
                    p.force.get_or_insert(ForceChoice::Nonlinear);
                    p.perturbation.get_or_insert(Perturbation::None);
                }
            }
        }
        Ok(())
    }
}
