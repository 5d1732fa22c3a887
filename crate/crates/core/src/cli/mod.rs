//! The `hylomorph` experiment runner.
//!
//! `hylomorph <command> --config <path> [--out <dir>] [--seed <n>]` reads a
//! sectioned config, runs one experiment and writes `summary.txt`,
//! `manifest.txt` and the command's CSV files into one directory.
//!
//! Exit codes: `0` success, `2` config error (nothing written), `3` violated
//! precondition, `4` non-convergence or blow-up, `5` internal error.

pub mod config;
pub mod output;

pub use config::{Command, ConfigError, ForceChoice, Perturbation, RunConfig};
pub use output::{RunDir, Summary};

use crate::chargewin::{
    construct_for_charge, estimate_admissible_window, verify_plan, ConstructOptions, TentSearch,
};
use crate::error::Error;
use crate::evolve::{evolve_nlkg, EvolutionState, EvolveOptions, ForceMode};
use crate::grid::{RadialGrid, RadialProfile};
use crate::minimize::{
    minimize_kgm, minimize_nlkg, residual_stationary, SolitonResult, SolveOptions, StationaryKind,
};
use crate::model::{classify_charge_criteria, validate_assumptions, Check, NonlinearSpec};
use crate::oracle::{shoot_ground_state, ShootOptions};
use crate::vortex::{minimize_vortex, vortex_observables, AxisymGrid, AxisymProfile};
use clap::Parser;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;
use std::io;
use std::path::PathBuf;

#[derive(Debug, Clone, Parser)]
#[command(
    name = "hylomorph",
    version,
    about = "Charge-constrained soliton experiments"
)]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; defaults to `runs/<command>`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Solver(#[from] Error),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(e) => match e {
                Error::Precondition(_) | Error::LengthMismatch { .. } | Error::Infeasible(_) => 3,
                Error::Shooting(_) | Error::BlowUp { .. } | Error::SearchExhausted(_) => 4,
                Error::Invariant(_) => 5,
            },
            CliError::Io(_) => 5,
        }
    }
}

/// What a finished run produced.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub dir: PathBuf,
    pub summary: Summary,
    /// False when a solve stopped without converging; artifacts are still written.
    pub converged: bool,
    /// The config with every default it used filled in.
    pub resolved: RunConfig,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        if self.converged {
            0
        } else {
            4
        }
    }
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn main_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&args) {
        Ok(report) => {
            println!("{}", report.dir.join("summary.txt").display());
            if !report.converged {
                eprintln!("hylomorph: solver did not converge");
            }
            report.exit_code()
        }
        Err(e) => {
            eprintln!("hylomorph: {e}");
            e.exit_code()
        }
    }
}

/// Loads and resolves the config named in `args`, then runs the command.
pub fn run(args: &Args) -> Result<RunReport, CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", args.config.display())))?;
    let mut cfg = RunConfig::parse(&text)?;
    if let Some(seed) = args.seed {
        cfg.seed = Some(seed);
    }
    if let Some(out) = &args.out {
        cfg.out = Some(out.clone());
    }
    run_config(args.command, cfg)
}

/// Runs `command` with an in-memory config.
pub fn run_config(command: Command, mut cfg: RunConfig) -> Result<RunReport, CliError> {
    cfg.validate()?;
    let spec = cfg.spec()?;
    cfg.resolve(command)?;
    let out = cfg
        .out
        .get_or_insert_with(|| PathBuf::from("runs").join(command.as_str()))
        .clone();
    let mut dir = RunDir::new(&out);
    let mut summary = Summary::default();
    summary.text("command", command.as_str());
    let converged = match command {
        Command::Validate => validate(&cfg, &spec, &mut summary, &mut dir)?,
        Command::SolveNlkg => solve_radial(&cfg, &spec, false, &mut summary, &mut dir)?,
        Command::SolveKgm => solve_radial(&cfg, &spec, true, &mut summary, &mut dir)?,
        Command::SolveVortex => solve_vortex(&cfg, &spec, &mut summary, &mut dir)?,
        Command::Window => window(&cfg, &spec, &mut summary, &mut dir)?,
        Command::Construct => construct(&cfg, &spec, &mut summary, &mut dir)?,
        Command::Evolve => evolve(&mut cfg, &spec, &mut summary, &mut dir)?,
        Command::Stability => stability(&mut cfg, &spec, &mut summary, &mut dir)?,
    };
    summary.flag("converged", converged);
    dir.write("summary.txt", &summary.render())?;
    dir.write("manifest.txt", &manifest(&cfg))?;
    Ok(RunReport {
        dir: out,
        summary,
        converged,
        resolved: cfg,
    })
}

fn manifest(cfg: &RunConfig) -> String {
    format!(
        "# hylomorph {} resolved configuration; rerun with --config <this file>\n{}",
        env!("CARGO_PKG_VERSION"),
        cfg.to_toml()
    )
}

fn solve_options(cfg: &RunConfig) -> SolveOptions {
    let s = &cfg.solver;
    SolveOptions {
        tol: s.tol.unwrap_or(1e-6),
        max_iters: s.max_iters.unwrap_or(50_000) as usize,
        preconditioner_shift: s.preconditioner_shift,
        conjugate: s.conjugate.unwrap_or(true),
        ..SolveOptions::default()
    }
}

fn radial_grid(cfg: &RunConfig) -> Result<RadialGrid, Error> {
    RadialGrid::new(
        cfg.grid.r_max.unwrap_or(40.0),
        cfg.grid.n.unwrap_or(4096) as usize,
    )
}

fn put_check(summary: &mut Summary, report: &mut String, name: &str, c: &Check) {
    summary.flag(&format!("{name}_passed"), c.passed);
    let _ = writeln!(
        report,
        "{name}: {} ({})",
        if c.passed { "pass" } else { "FAIL" },
        c.detail
    );
}

fn put_result<P>(summary: &mut Summary, prefix: &str, r: &SolitonResult<P>, stationary: f64) {
    let key = |k: &str| format!("{prefix}{k}");
    summary
        .num(&key("sigma"), r.sigma)
        .num(&key("charge"), r.charge)
        .num(&key("omega"), r.omega)
        .num(&key("energy"), r.energy)
        .num(&key("hylomorphy"), r.hylomorphy)
        .num(&key("descent_residual"), r.residual)
        .num(&key("stationary_residual"), stationary)
        .int(&key("iterations"), r.iterations as i64)
        .text(&key("status"), r.status.as_str());
}

fn validate(
    cfg: &RunConfig,
    spec: &NonlinearSpec,
    summary: &mut Summary,
    dir: &mut RunDir,
) -> Result<bool, CliError> {
    let p = &cfg.problem;
    let a = validate_assumptions(
        spec,
        p.s_max.unwrap_or(10.0),
        p.n_samples.unwrap_or(10_000) as usize,
    )?;
    let c = classify_charge_criteria(spec, p.search_max.unwrap_or(10.0))?;
    let mut report = String::from("# structural assumptions (sampled)\n");
    for (name, check) in [("w0", &a.w0), ("w1", &a.w1), ("w2", &a.w2), ("w3", &a.w3)] {
        put_check(summary, &mut report, name, check);
    }
    summary.flag("assumptions_passed", a.all_passed());
    if let Some(s0) = a.w2_witness {
        summary.num("w2_witness", s0);
    }
    if let Some((c1, c2)) = a.w3_constants {
        summary.num("w3_c1", c1).num("w3_c2", c2);
    }
    let verdict = |v: crate::model::Verdict| format!("{v:?}").to_lowercase();
    summary.text("small_charge", &verdict(c.small_charge));
    summary.text("zero_of_w", &verdict(c.zero_of_w));
    let _ = writeln!(report, "\n# charge criteria");
    let _ = writeln!(report, "small_charge: {}", verdict(c.small_charge));
    if let Some(e) = c.fitted_epsilon {
        summary.num("fitted_epsilon", e);
        let _ = writeln!(report, "  fitted epsilon {e}");
    }
    let _ = writeln!(report, "zero_of_w: {}", verdict(c.zero_of_w));
    if let Some(s1) = c.zero_witness {
        summary.num("zero_witness", s1);
        let _ = writeln!(report, "  witness s1 = {s1}");
    }
    dir.write("report.txt", &report)?;
    Ok(true)
}

/// Ground state at `σ`, or at the `σ` of the shooting solution for `ω`.
fn radial_soliton(
    cfg: &RunConfig,
    spec: &NonlinearSpec,
    q: Option<f64>,
    summary: &mut Summary,
) -> Result<SolitonResult, CliError> {
    let grid = radial_grid(cfg)?;
    let opts = solve_options(cfg);
    let p = &cfg.problem;
    let (sigma, init) = match (p.sigma, p.omega) {
        (Some(sigma), _) => {
            let width = p.init_width.unwrap_or(4.0);
            let amp = spec.amplitude_scale();
            (
                sigma,
                RadialProfile::from_fn(grid, |r| amp * (-(r / width).powi(2)).exp()),
            )
        }
        (None, Some(omega)) => {
            let shot = shoot_ground_state(spec, omega.abs(), &grid, &ShootOptions::default())?;
            summary
                .num("shoot_u0", shot.u0)
                .num("shoot_tail_start", shot.tail_start)
                .flag("shoot_converged", shot.converged);
            (omega.abs() * shot.profile.mass2(), shot.profile)
        }
        (None, None) => unreachable!("resolve requires sigma or omega"),
    };
    let r = match q {
        Some(q) => minimize_kgm(spec, sigma, q, &init, &opts)?,
        None => minimize_nlkg(spec, sigma, &init, &opts)?,
    };
    Ok(r)
}

fn solve_radial(
    cfg: &RunConfig,
    spec: &NonlinearSpec,
    gauged: bool,
    summary: &mut Summary,
    dir: &mut RunDir,
) -> Result<bool, CliError> {
    let q = if gauged { cfg.problem.q } else { None };
    let r = radial_soliton(cfg, spec, q, summary)?;
    let kind = if gauged {
        StationaryKind::Kgm
    } else {
        StationaryKind::Nlkg
    };
    let stationary = residual_stationary(&r, spec, kind)?;
    put_result(summary, "", &r, stationary);
    summary
        .flag("below_mass_threshold", r.below_mass_threshold(spec))
        .num("u_max", r.u.max_value())
        .num("norm2", r.u.mass2())
        .num("r99", r.u.mass_radius(0.99));
    dir.write("profile.csv", &r.u.to_csv("u"))?;
    if let Some(phi) = &r.phi {
        let far = 4.0 * std::f64::consts::PI * phi.grid().r_max() * phi.boundary_value();
        summary
            .num("q", phi.coupling())
            .num("k", r.sigma / r.omega.abs())
            .num("phi_max", phi.max_value())
            .num("phi_far_field_moment", far);
        dir.write("phi.csv", &phi.to_csv())?;
    }
    Ok(r.converged)
}

fn solve_vortex(
    cfg: &RunConfig,
    spec: &NonlinearSpec,
    summary: &mut Summary,
    dir: &mut RunDir,
) -> Result<bool, CliError> {
    let g = &cfg.grid;
    let r_max = g.r_max.unwrap_or(20.0);
    let grid = AxisymGrid::new(
        r_max,
        g.z_max.unwrap_or(r_max),
        g.n.unwrap_or(800) as usize,
        g.nz.unwrap_or(256) as usize,
    )?;
    let ell = cfg.problem.ell.unwrap_or(1) as i32;
    let sigma = cfg.problem.sigma.expect("resolved");
    let init = AxisymProfile::torus(grid, ell, spec.amplitude_scale(), r_max / 3.0, r_max / 5.0);
    let r = minimize_vortex(spec, sigma, &init, &solve_options(cfg))?;
    let stationary = residual_stationary(&r, spec, StationaryKind::Vortex(ell))?;
    put_result(summary, "", &r, stationary);
    let obs = vortex_observables(&r, ell);
    let (pr, pz) = r.u.peak_location();
    summary
        .int("ell", ell as i64)
        .num("angular_momentum", obs.angular_momentum)
        .num("u_max", r.u.max_value())
        .num("axis_max", r.u.axis_max())
        .num("near_axis_ratio", r.u.near_axis_ratio())
        .num("peak_r", pr)
        .num("peak_z", pz);
    dir.write("profile.csv", &r.u.to_csv())?;
    Ok(r.converged)
}

fn window(
    cfg: &RunConfig,
    spec: &NonlinearSpec,
    summary: &mut Summary,
    dir: &mut RunDir,
) -> Result<bool, CliError> {
    let p = &cfg.problem;
    let [s_lo, s_hi] = p.tent_s1.unwrap_or([0.5, 1.5]);
    let [r_lo, r_hi] = p.tent_r.unwrap_or([1.0, 20.0]);
    let mut search = TentSearch::linear(
        (s_lo, s_hi),
        p.tent_s1_count.unwrap_or(11) as usize,
        (r_lo, r_hi),
        p.tent_r_count.unwrap_or(39) as usize,
    );
    search.points_per_unit = cfg.grid.points_per_unit.unwrap_or(32) as usize;
    let q = p.q.unwrap_or(0.0);
    let est = estimate_admissible_window(spec, q, &search)?;
    summary.num("q", q).flag("found", est.is_some());
    let mut csv = String::from("s1,r,K,J,lower,upper\n");
    if let Some(est) = est {
        summary
            .num("lower", est.lower)
            .num("upper", est.upper)
            .num("lower_witness_s1", est.lower_witness.tent.s1)
            .num("lower_witness_r", est.lower_witness.tent.r)
            .num("upper_witness_s1", est.upper_witness.tent.s1)
            .num("upper_witness_r", est.upper_witness.tent.r)
            .int("members", est.members.len() as i64)
            .int("scanned", est.scanned as i64);
        for m in &est.members {
            let w = m.window.expect("members have windows");
            let _ = writeln!(
                csv,
                "{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e}",
                m.tent.s1, m.tent.r, m.k, m.j, w.lower, w.upper
            );
        }
    }
    dir.write("window.csv", &csv)?;
    Ok(true)
}

fn construct(
    cfg: &RunConfig,
    spec: &NonlinearSpec,
    summary: &mut Summary,
    dir: &mut RunDir,
) -> Result<bool, CliError> {
    let p = &cfg.problem;
    let ppu = cfg.grid.points_per_unit.unwrap_or(32) as usize;
    let opts = ConstructOptions {
        sobolev_c3: p.sobolev_c3.unwrap_or(crate::chargewin::SOBOLEV_C3),
        points_per_unit: ppu,
        r_cap: p.r_cap.unwrap_or(1e6),
        r_tolerance: p.r_tolerance.unwrap_or(1e-2),
    };
    let plan = construct_for_charge(spec, p.charge.expect("resolved"), &opts)?;
    let checks = verify_plan(spec, &plan, ppu)?;
    summary
        .num("target_charge", plan.target_charge)
        .num("s1", plan.s1)
        .num("lambda", plan.lambda)
        .num("alpha", plan.alpha)
        .num("h", plan.h)
        .num("r", plan.r)
        .num("q", plan.q)
        .num("predicted_charge_lb", plan.predicted_charge_lb)
        .num("verified_charge", plan.verified_charge)
        .num("k", plan.k)
        .num("j", plan.j)
        .num("i", checks.i)
        .num("norm2", checks.norm2)
        .int("doublings", plan.doublings as i64);
    if let Some(w) = plan.window {
        summary
            .num("window_lower", w.lower)
            .num("window_upper", w.upper);
    }
    let mut report = String::from("# tent criterion at the constructed plan\n");
    for (name, c) in checks.checks() {
        put_check(summary, &mut report, name, c);
    }
    summary
        .flag("hypotheses_pass", checks.hypotheses_pass())
        .flag("conclusions_pass", checks.conclusions_pass());
    dir.write("report.txt", &report)?;

    if !p.solve.unwrap_or(true) {
        return Ok(true);
    }
    let tent = plan.tent();
    let u = tent.realize(tent.default_grid(ppu)?)?;
    let r = minimize_kgm(
        spec,
        plan.sigma(spec.mass()),
        plan.q,
        &u,
        &solve_options(cfg),
    )?;
    let stationary = residual_stationary(&r, spec, StationaryKind::Kgm)?;
    put_result(summary, "kgm_", &r, stationary);
    summary.flag("kgm_below_mass_threshold", r.below_mass_threshold(spec));
    dir.write("profile.csv", &r.u.to_csv("u"))?;
    if let Some(phi) = &r.phi {
        dir.write("phi.csv", &phi.to_csv())?;
    }
    Ok(r.converged)
}

/// Conservation and localization statistics of one ledger.
struct LedgerStats {
    energy_drift: f64,
    charge_drift: f64,
    localization_initial: f64,
    localization_max: f64,
    localization_final: f64,
    distance_initial: f64,
    distance_max: f64,
}

fn ledger_stats(state: &EvolutionState) -> LedgerStats {
    let l = &state.ledger;
    let first = l[0];
    let rel = |a: f64, b: f64| {
        if b == 0.0 {
            (a - b).abs()
        } else {
            ((a - b) / b).abs()
        }
    };
    LedgerStats {
        energy_drift: l
            .iter()
            .map(|r| rel(r.energy, first.energy))
            .fold(0.0, f64::max),
        charge_drift: l
            .iter()
            .map(|r| rel(r.charge, first.charge))
            .fold(0.0, f64::max),
        localization_initial: first.localization,
        localization_max: l.iter().map(|r| r.localization).fold(0.0, f64::max),
        localization_final: l[l.len() - 1].localization,
        distance_initial: first.distance.unwrap_or(f64::NAN),
        distance_max: l.iter().filter_map(|r| r.distance).fold(0.0, f64::max),
    }
}

fn put_stats(summary: &mut Summary, prefix: &str, s: &LedgerStats) {
    let key = |k: &str| format!("{prefix}{k}");
    summary
        .num(&key("energy_drift"), s.energy_drift)
        .num(&key("charge_drift"), s.charge_drift)
        .num(&key("localization_initial"), s.localization_initial)
        .num(&key("localization_max"), s.localization_max)
        .num(&key("localization_final"), s.localization_final)
        .num(&key("distance_initial"), s.distance_initial)
        .num(&key("distance_max"), s.distance_max)
        .num(&key("distance_ratio"), s.distance_max / s.distance_initial);
}

/// Evolves in `chunks` equal pieces, tracking `max|(|ψ| - u)|` at each boundary.
fn evolve_tracked(
    state: EvolutionState,
    spec: &NonlinearSpec,
    duration: f64,
    dt: f64,
    opts: &EvolveOptions,
    chunks: usize,
) -> Result<(EvolutionState, f64), Error> {
    let steps = (duration / dt).round() as usize;
    let reference = opts.reference.as_ref().map(|(u, _)| u.values().to_vec());
    let mut state = state;
    let mut deviation: f64 = 0.0;
    let mut done = 0;
    for c in 1..=chunks {
        let target = steps * c / chunks;
        if target > done {
            state = evolve_nlkg(state, spec, (target - done) as f64 * dt, dt, opts)?;
            done = target;
        }
        if let Some(u) = &reference {
            let d = state
                .psi
                .iter()
                .zip(u)
                .map(|(p, v)| (p.norm() - v).abs())
                .fold(0.0, f64::max);
            deviation = deviation.max(d);
        }
    }
    Ok((state, deviation))
}

struct Evolution {
    soliton: SolitonResult,
    dt: f64,
    t_final: f64,
    radius: f64,
    bump_center: f64,
}

/// Solves for the reference soliton and fills the evolution defaults that
/// depend on it.
fn prepare_evolution(
    cfg: &mut RunConfig,
    spec: &NonlinearSpec,
    summary: &mut Summary,
) -> Result<Evolution, CliError> {
    let soliton = radial_soliton(cfg, spec, None, summary)?;
    let stationary = residual_stationary(&soliton, spec, StationaryKind::Nlkg)?;
    put_result(summary, "soliton_", &soliton, stationary);
    let r99 = soliton.u.mass_radius(0.99);
    summary.num("soliton_r99", r99);
    let p = &mut cfg.problem;
    let radius = *p
        .localization_radius
        .get_or_insert((2.0 * r99).min(soliton.u.grid().r_max()));
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.unwrap_or(0));
    let drawn = rng.gen_range(0.25 * r99..r99);
    let bump_center = *p.bump_center.get_or_insert(drawn);
    Ok(Evolution {
        soliton,
        dt: p.dt.expect("resolved"),
        t_final: p.t_final.expect("resolved"),
        radius,
        bump_center,
    })
}

fn evolve_options(cfg: &RunConfig, ev: &Evolution, force: ForceMode) -> EvolveOptions {
    EvolveOptions {
        ledger_every: cfg.problem.ledger_every.unwrap_or(100) as usize,
        force,
        localization_radius: Some(ev.radius),
        reference: Some((ev.soliton.u.clone(), ev.soliton.omega)),
    }
}

fn evolve(
    cfg: &mut RunConfig,
    spec: &NonlinearSpec,
    summary: &mut Summary,
    dir: &mut RunDir,
) -> Result<bool, CliError> {
    let ev = prepare_evolution(cfg, spec, summary)?;
    dir.write("profile.csv", &ev.soliton.u.to_csv("u"))?;
    if !ev.soliton.converged {
        return Ok(false);
    }
    let p = &cfg.problem;
    let force = match p.force.unwrap_or(ForceChoice::Nonlinear) {
        ForceChoice::Nonlinear => ForceMode::Nonlinear,
        ForceChoice::Free => ForceMode::FreeLinear,
    };
    let delta = p.delta.unwrap_or(0.01);
    let mut state = EvolutionState::standing_wave(&ev.soliton.u, ev.soliton.omega);
    match p.perturbation.unwrap_or(Perturbation::None) {
        Perturbation::None => {}
        Perturbation::Scale => state.scale_field(delta),
        Perturbation::Bump => state.add_bump(delta, ev.bump_center),
    }
    let opts = evolve_options(cfg, &ev, force);
    let (state, deviation) = evolve_tracked(state, spec, ev.t_final, ev.dt, &opts, 50)?;
    put_stats(summary, "", &ledger_stats(&state));
    summary
        .num("modulus_deviation", deviation)
        .num("final_max_modulus", state.max_modulus())
        .num("t_final", state.t);
    dir.write("ledger.csv", &state.ledger_csv())?;
    let mut csv = String::from("r,re,im,modulus\n");
    for (i, psi) in state.psi.iter().enumerate() {
        let _ = writeln!(
            csv,
            "{:.15e},{:.15e},{:.15e},{:.15e}",
            state.grid().r(i),
            psi.re,
            psi.im,
            psi.norm()
        );
    }
    dir.write("state.csv", &csv)?;
    Ok(true)
}

fn stability(
    cfg: &mut RunConfig,
    spec: &NonlinearSpec,
    summary: &mut Summary,
    dir: &mut RunDir,
) -> Result<bool, CliError> {
    let ev = prepare_evolution(cfg, spec, summary)?;
    dir.write("profile.csv", &ev.soliton.u.to_csv("u"))?;
    if !ev.soliton.converged {
        return Ok(false);
    }
    let delta = cfg.problem.delta.unwrap_or(0.01);
    let base = EvolutionState::standing_wave(&ev.soliton.u, ev.soliton.omega);
    let mut scaled = base.clone();
    scaled.scale_field(delta);
    let mut bumped = base.clone();
    bumped.add_bump(delta, ev.bump_center);
    let nonlinear = evolve_options(cfg, &ev, ForceMode::Nonlinear);
    let free = evolve_options(cfg, &ev, ForceMode::FreeLinear);
    let (t, dt) = (ev.t_final, ev.dt);

    // independent runs, one thread each
    let runs = std::thread::scope(|s| {
        let a = s.spawn(|| evolve_tracked(base.clone(), spec, t, dt, &nonlinear, 50));
        let b = s.spawn(|| evolve_nlkg(scaled, spec, t, dt, &nonlinear));
        let c = s.spawn(|| evolve_nlkg(bumped, spec, t, dt, &nonlinear));
        let d = s.spawn(|| evolve_nlkg(base.clone(), spec, t, dt, &free));
        [
            a.join(),
            b.join().map(|r| r.map(|s| (s, f64::NAN))),
            c.join().map(|r| r.map(|s| (s, f64::NAN))),
            d.join().map(|r| r.map(|s| (s, f64::NAN))),
        ]
    });
    let mut states = Vec::with_capacity(4);
    for r in runs {
        let r = r.map_err(|_| Error::Invariant("evolution thread panicked".into()))?;
        states.push(r?);
    }
    let (unperturbed, deviation) = &states[0];

    let mut back = unperturbed.clone();
    back.ledger.clear();
    back.reverse_time();
    let quiet = EvolveOptions {
        ledger_every: usize::MAX,
        reference: None,
        ..nonlinear.clone()
    };
    let mut back = evolve_nlkg(back, spec, t, dt, &quiet)?;
    back.reverse_time();
    let reversal = back
        .psi
        .iter()
        .zip(&base.psi)
        .chain(back.psi_t.iter().zip(&base.psi_t))
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);

    let stats: Vec<LedgerStats> = states.iter().map(|(s, _)| ledger_stats(s)).collect();
    for (prefix, s) in ["unperturbed_", "scale_", "bump_", "free_"]
        .iter()
        .zip(&stats)
    {
        put_stats(summary, prefix, s);
    }
    summary
        .num("delta", delta)
        .num("bump_center", ev.bump_center)
        .num("localization_radius", ev.radius)
        .num("modulus_deviation", *deviation)
        .num("reversal_error", reversal)
        .num("free_final_max_modulus", states[3].0.max_modulus());
    let u = &stats[0];
    let ratio = |s: &LedgerStats| s.distance_max / s.distance_initial;
    summary
        .flag(
            "conservation_ok",
            u.energy_drift < 1e-6 && u.charge_drift < 1e-6,
        )
        .flag("modulus_ok", *deviation < 1e-4)
        .flag(
            "orbital_ok",
            ratio(&stats[1]) < 5.0 && ratio(&stats[2]) < 5.0,
        )
        .flag(
            "localization_ok",
            u.localization_max < 10.0 * u.localization_initial.max(f64::MIN_POSITIVE)
                && stats[3].localization_final > 0.5,
        )
        .flag("reversal_ok", reversal < 1e-8);
    for ((name, _), (s, _)) in [
        ("ledger.csv", 0),
        ("ledger_scale.csv", 1),
        ("ledger_bump.csv", 2),
        ("ledger_free.csv", 3),
    ]
    .iter()
    .zip(&states)
    {
        dir.write(name, &s.ledger_csv())?;
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_by_error_kind() {
        assert_eq!(CliError::Config(ConfigError("x".into())).exit_code(), 2);
        assert_eq!(
            CliError::Solver(Error::Precondition("x".into())).exit_code(),
            3
        );
        assert_eq!(CliError::Solver(Error::Shooting("x".into())).exit_code(), 4);
        assert_eq!(
            CliError::Solver(Error::Invariant("x".into())).exit_code(),
            5
        );
    }

    #[test]
    fn config_error_writes_nothing() {
        let tmp = tempfile::tempdir().unwrap();
        let out = tmp.path().join("run");
        let mut cfg = RunConfig::parse("[grid]\nn = -4096\n[problem]\nsigma = 100.0\n").unwrap();
        cfg.out = Some(out.clone());
        let err = run_config(Command::SolveNlkg, cfg).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(!out.exists());
    }
}
