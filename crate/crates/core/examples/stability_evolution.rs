//! Evolves a soliton, a 1%-perturbed soliton, and the same data under the free
//! Klein-Gordon equation, and prints what the ledgers show.

use hylomorph::evolve::{evolve_nlkg, EvolutionState, EvolveOptions, ForceMode};
use hylomorph::minimize::{minimize_nlkg, SolveOptions};
use hylomorph::oracle::{shoot_ground_state, ShootOptions};
use hylomorph::{NonlinearSpec, RadialGrid};

fn main() -> hylomorph::Result<()> {
    let spec = NonlinearSpec::default_double_well();
    let grid = RadialGrid::new(40.0, 4096)?;
    let shot = shoot_ground_state(&spec, 0.5, &grid, &ShootOptions::default())?;
    let sigma = 0.5 * shot.profile.mass2();
    let opts = SolveOptions {
        tol: 1e-9,
        ..SolveOptions::default()
    };
    let soliton = minimize_nlkg(&spec, sigma, &shot.profile, &opts)?;
    let radius = 2.0 * soliton.u.mass_radius(0.99);
    let dt = 0.5 * grid.h();

    let runs = [
        ("soliton", ForceMode::Nonlinear, 0.0),
        ("perturbed", ForceMode::Nonlinear, 0.01),
        ("free", ForceMode::FreeLinear, 0.0),
    ];
    for (name, force, delta) in runs {
        let mut state = EvolutionState::standing_wave(&soliton.u, soliton.omega);
        state.scale_field(delta);
        let evolve = EvolveOptions {
            ledger_every: 1000,
            force,
            localization_radius: Some(radius),
            reference: Some((soliton.u.clone(), soliton.omega)),
        };
        let state = evolve_nlkg(state, &spec, 50.0, dt, &evolve)?;
        println!("{name}:");
        for rec in state.ledger.iter().step_by(2) {
            println!(
                "  t = {:5.1}  E = {:.10}  C = {:.10}  outside R: {:.2e}  distance {:.3e}",
                rec.t,
                rec.energy,
                rec.charge,
                rec.localization,
                rec.distance.unwrap_or(f64::NAN)
            );
        }
    }
    Ok(())
}
