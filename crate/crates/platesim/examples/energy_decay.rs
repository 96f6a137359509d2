//! Damped and undamped flows of the defocusing cubic plate on (0, π):
//! energy conservation, the dissipation identity, and the exponential decay
//! fit.
//!
//! Run with `cargo run --release --example energy_decay`.

use std::f64::consts::PI;
use std::sync::Arc;

use platesim::dynamics::{fit_energy_decay, Force, SimOptions, Simulator};
use platesim::model::{BoxRegion, DampingProfile, NonlinearityClass, NonlinearitySpec};
use platesim::spectral::{random_state, DomainKind, Geometry};

fn main() -> platesim::Result<()> {
    let geom = Arc::new(Geometry::build(DomainKind::HingedRectangle, 1, &[64], 0.0)?);
    let spec = NonlinearitySpec::polynomial(
        geom.clone(),
        &[0.0, 0.0, 1.0],
        NonlinearityClass::Defocusing { alpha: 0.0 },
    )?;
    let damping = DampingProfile::new(
        geom.clone(),
        vec![BoxRegion { lo: vec![PI / 4.0], hi: vec![3.0 * PI / 4.0] }],
        2.5,
        0.3,
    )?;
    let state0 = random_state(&geom, 1, 1.0);

    // undamped: the energy is a constant of motion
    let sim = Simulator::new(geom.clone(), Force::Nonlinear(spec.clone()), None)?;
    let traj = sim.simulate(&state0, &SimOptions::new(1e-3, 1.0))?;
    let e0 = traj.energy[0];
    let drift = traj.energy.iter().fold(0.0f64, |m, &e| m.max((e - e0).abs())) / e0;
    println!("undamped cubic, T = 1: relative energy drift {drift:.3e}");

    // damped: E(T) − E(0) + dissipated ≈ 0
    let sim = Simulator::new(geom.clone(), Force::Nonlinear(spec), Some(&damping))?;
    let traj = sim.simulate(&state0, &SimOptions::damped(1e-3, 20.0))?;
    let defect =
        (traj.energy.last().unwrap() - e0 + traj.total_dissipated()).abs() / e0;
    println!("damped run, T = 20: energy identity defect {defect:.3e}");

    let fit = fit_energy_decay(&traj.times, &traj.energy, 2.0, 20.0)?;
    println!(
        "log-energy fit on [2, 20]: rate {:.4}, r² {:.5}, E(20)/E(0) = {:.3e}",
        fit.rate,
        fit.r_squared,
        traj.energy.last().unwrap() / e0
    );
    Ok(())
}
