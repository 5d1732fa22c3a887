//! Ground state at frequency ω two ways: shooting on the radial ODE, and
//! energy minimization at the charge the shooting profile carries.

use hylomorph::minimize::{minimize_nlkg, residual_stationary, SolveOptions, StationaryKind};
use hylomorph::oracle::{shoot_ground_state, ShootOptions};
use hylomorph::{NonlinearSpec, RadialGrid, RadialProfile};

fn main() -> hylomorph::Result<()> {
    let spec = NonlinearSpec::default_double_well();
    let grid = RadialGrid::new(40.0, 4096)?;
    let omega = 0.5;

    let shot = shoot_ground_state(&spec, omega, &grid, &ShootOptions::default())?;
    let sigma = omega * shot.profile.mass2();
    println!(
        "shooting: u(0) = {:.10}, tail spliced at r = {:.3}",
        shot.u0, shot.tail_start
    );

    // start far from the answer: a wide Gaussian
    let init = RadialProfile::from_fn(grid.clone(), |r| (-(r / 6.0).powi(2)).exp());
    let result = minimize_nlkg(&spec, sigma, &init, &SolveOptions::default())?;
    let residual = residual_stationary(&result, &spec, StationaryKind::Nlkg)?;
    println!(
        "minimizer: {} after {} iterations, omega = {:.8}, E = {:.10}, Lambda = {:.6}",
        result.status.as_str(),
        result.iterations,
        result.omega,
        result.energy,
        result.hylomorphy
    );
    println!(
        "stationary residual {residual:.2e}, profile distance to shooting {:.2e}",
        result.u.relative_l2_distance(&shot.profile)?
    );
    Ok(())
}
