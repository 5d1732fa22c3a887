//! Builds tents and couplings certifying a prescribed electric charge, checks
//! the criterion at each plan, and solves the KGM problem from the tent.

use hylomorph::chargewin::{construct_for_charge, verify_plan, ConstructOptions};
use hylomorph::minimize::{minimize_kgm, SolveOptions};
use hylomorph::NonlinearSpec;

fn main() -> hylomorph::Result<()> {
    let spec = NonlinearSpec::default_double_well();
    let opts = ConstructOptions::default();
    for target in [10.0, 100.0, 1000.0] {
        let plan = construct_for_charge(&spec, target, &opts)?;
        let report = verify_plan(&spec, &plan, opts.points_per_unit)?;
        println!(
            "target {target:6}: s1 = {:.3}, h = {:.4}, r = {:.3}, q = {:.3e}, charge {:.3} (lower bound {:.3})",
            plan.s1, plan.h, plan.r, plan.q, plan.verified_charge, plan.predicted_charge_lb
        );
        for (name, check) in report.checks() {
            if !check.passed {
                println!("  {name} failed: {}", check.detail);
            }
        }
        println!(
            "  hypotheses {} conclusions {}",
            report.hypotheses_pass(),
            report.conclusions_pass()
        );

        let tent = plan.tent();
        let u = tent.realize(tent.default_grid(opts.points_per_unit)?)?;
        let r = minimize_kgm(
            &spec,
            plan.sigma(spec.mass()),
            plan.q,
            &u,
            &SolveOptions::default(),
        )?;
        println!(
            "  KGM solve: {} in {} iterations, charge {:.3}, Lambda = {:.4}",
            r.status.as_str(),
            r.iterations,
            r.charge,
            r.hylomorphy
        );
    }
    Ok(())
}
