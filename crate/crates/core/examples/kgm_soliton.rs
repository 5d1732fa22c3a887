//! A charged soliton coupled to its electrostatic potential, and how its
//! frequency and energy move as the coupling grows.

use hylomorph::gauge::{k_reduced, k_variational, solve_phi};
use hylomorph::minimize::{minimize_kgm, minimize_nlkg, SolveOptions};
use hylomorph::{NonlinearSpec, RadialGrid, RadialProfile};
use std::f64::consts::PI;

fn main() -> hylomorph::Result<()> {
    let spec = NonlinearSpec::default_double_well();
    let grid = RadialGrid::new(40.0, 2048)?;
    let init = RadialProfile::from_fn(grid, |r| (-(r / 4.0).powi(2)).exp());
    let sigma = 100.0;
    let opts = SolveOptions::default();

    let free = minimize_nlkg(&spec, sigma, &init, &opts)?;
    println!(
        "q = 0      omega = {:+.6}  E = {:.6}",
        free.omega, free.energy
    );
    for q in [1e-3, 1e-2, 5e-2, 1e-1] {
        let r = minimize_kgm(&spec, sigma, q, &init, &opts)?;
        let phi = r.phi.as_ref().expect("KGM results carry the potential");
        println!(
            "q = {q:<7}  omega = {:+.6}  E = {:.6}  max phi = {:.4} (bound {:.1})  status {}",
            r.omega,
            r.energy,
            phi.max_value(),
            1.0 / q,
            r.status.as_str()
        );
    }

    // the electrostatic subproblem on its own
    let phi = solve_phi(&free.u, 0.1)?;
    let kv = k_variational(&free.u, &phi)?;
    println!(
        "K two ways: {kv:.10} / {:.10}; far field 4 pi R phi(R) = {:.6} vs qK = {:.6}",
        k_reduced(&free.u, &phi),
        4.0 * PI * phi.grid().r_max() * phi.boundary_value(),
        0.1 * kv
    );
    Ok(())
}
