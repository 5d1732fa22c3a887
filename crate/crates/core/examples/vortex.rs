//! Vortex rings with winding ±1 on a coarse axisymmetric grid, compared with
//! the spherical ground state at the same charge.

use hylomorph::minimize::{minimize_nlkg, SolveOptions};
use hylomorph::vortex::{minimize_vortex, vortex_observables, AxisymGrid, AxisymProfile};
use hylomorph::{NonlinearSpec, RadialGrid, RadialProfile};

fn main() -> hylomorph::Result<()> {
    let spec = NonlinearSpec::default_double_well();
    let sigma = 300.0;
    let opts = SolveOptions {
        tol: 1e-7,
        ..SolveOptions::default()
    };
    for ell in [1, -1] {
        let grid = AxisymGrid::new(16.0, 16.0, 128, 128)?;
        let init = AxisymProfile::torus(grid, ell, 1.0, 5.0, 3.0);
        let r = minimize_vortex(&spec, sigma, &init, &opts)?;
        let obs = vortex_observables(&r, ell);
        let (pr, pz) = r.u.peak_location();
        println!(
            "ell = {ell:+}: E = {:.8}, omega = {:.6}, L3 = {}, peak at (r, z) = ({pr:.2}, {pz:.2}), near-axis ratio {:.3}",
            r.energy,
            r.omega,
            obs.angular_momentum,
            r.u.near_axis_ratio()
        );
    }
    let grid = RadialGrid::new(16.0, 512)?;
    let init = RadialProfile::from_fn(grid, |r| (-(r / 4.0).powi(2)).exp());
    let ground = minimize_nlkg(&spec, sigma, &init, &opts)?;
    println!("ell =  0: E = {:.8}", ground.energy);
    Ok(())
}
