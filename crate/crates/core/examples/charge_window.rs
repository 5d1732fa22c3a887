//! Admissible charge windows: the exact window of one tent, a scan over many
//! tents, and the Sobolev constant that enters the coupling bound.

use hylomorph::chargewin::{
    bubble_rayleigh_quotient, estimate_admissible_window, tent_window, TentProfile, TentSearch,
    SOBOLEV_C3,
};
use hylomorph::functionals::reduced_energy_sigma;
use hylomorph::NonlinearSpec;

fn main() -> hylomorph::Result<()> {
    let spec = NonlinearSpec::default_double_well();

    let tent = TentProfile::new(1.0, 6.0)?;
    let tw = tent_window(tent, 0.0, &spec, 32)?;
    let window = tw.window.expect("J < 0 for this tent");
    println!(
        "tent (1, 6): K = {:.4}, J = {:.4}, window ({:.3}, {:.3})",
        tw.k, tw.j, window.lower, window.upper
    );
    let u = tent.realize(tent.default_grid(32)?)?;
    for sigma in [0.5 * window.lower, window.center(), 2.0 * window.upper] {
        let e = reduced_energy_sigma(&u, sigma, &spec)?;
        println!("  sigma = {sigma:10.3}: Lambda = {:.6}", e.energy / sigma);
    }

    for q in [0.0, 0.01, 0.05] {
        let search = TentSearch::linear((0.5, 1.5), 11, (1.0, 20.0), 39);
        match estimate_admissible_window(&spec, q, &search)? {
            Some(est) => println!(
                "q = {q:<5} window ({:.3}, {:.3}) from {} of {} tents",
                est.lower,
                est.upper,
                est.members.len(),
                est.scanned
            ),
            None => println!("q = {q:<5} no tent with J < 0"),
        }
    }

    println!(
        "S_3 = {SOBOLEV_C3:.12}, bubble quotient {:.12}",
        bubble_rayleigh_quotient(1e3, 200_000)?
    );
    Ok(())
}
