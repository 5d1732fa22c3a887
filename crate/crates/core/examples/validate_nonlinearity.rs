//! Structural checks on two nonlinearities: the default double well, which
//! admits solitons, and a pure power deficit that is unbounded below.

use hylomorph::model::{classify_charge_criteria, validate_assumptions, FamilyKind};
use hylomorph::NonlinearSpec;

fn show(name: &str, spec: &NonlinearSpec) -> hylomorph::Result<()> {
    let report = validate_assumptions(spec, 10.0, 10_000)?;
    println!("{name}");
    for (label, check) in [
        ("W0", &report.w0),
        ("W1", &report.w1),
        ("W2", &report.w2),
        ("W3", &report.w3),
    ] {
        println!("  {label}: {:5} {}", check.passed, check.detail);
    }
    let criteria = classify_charge_criteria(spec, 10.0)?;
    println!(
        "  small-charge criterion: {:?}, zero of W: {:?} at {:?}",
        criteria.small_charge, criteria.zero_of_w, criteria.zero_witness
    );
    Ok(())
}

fn main() -> hylomorph::Result<()> {
    show("double_well(1)", &NonlinearSpec::default_double_well())?;
    // R(s) = -s^3 with no stabilizing term
    let deficit = NonlinearSpec::from_parts(FamilyKind::PowerDeficit, 1.0, &[1.0, 0.0, 3.0, 4.0])?;
    show("power_deficit(a=1, b=0)", &deficit)?;
    Ok(())
}
