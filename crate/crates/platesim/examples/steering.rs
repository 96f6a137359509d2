//! Semiglobal steering through the attractor: drive the plate from the
//! equilibrium u ≡ 1 to u ≡ −1 (torus, f = u³ − 2u) by a double U-turn —
//! local control onto a recorded heteroclinic coast, backward replay to the
//! saddle, and a forward coast into the target well. The concatenated
//! control is certified by one end-to-end re-simulation.
//!
//! Run with `cargo run --release --example steering` (takes a minute).

use std::sync::Arc;

use ndarray::Array1;
use platesim::attractor::{enumerate_equilibria, plan_steering, NewtonOptions, PlanConfig};
use platesim::config::ScenarioConfig;
use platesim::model::{BoxRegion, DampingProfile, NonlinearityClass, NonlinearitySpec};
use platesim::spectral::{DomainKind, Geometry};

fn main() -> platesim::Result<()> {
    let geom = Arc::new(Geometry::build(DomainKind::Torus, 1, &[9], 1.0)?);
    let spec = NonlinearitySpec::polynomial(
        geom.clone(),
        &[-2.0, 0.0, 1.0],
        NonlinearityClass::AsymptoticDefocusing { radius: 2.0_f64.sqrt() },
    )?;
    let damping = DampingProfile::new(
        geom.clone(),
        vec![BoxRegion { lo: vec![1.0], hi: vec![3.5] }],
        2.0,
        0.5,
    )?;

    let seeds: Vec<Array1<f64>> = [-1.5, 0.0, 1.5]
        .iter()
        .map(|&c| ScenarioConfig::constant_guess(&geom, c))
        .collect();
    let mut eqs = enumerate_equilibria(&spec, &seeds, &NewtonOptions::default());

    let u0 = ScenarioConfig::constant_state(&geom, 1.0);
    let u1 = ScenarioConfig::constant_state(&geom, -1.0);
    let cfg = PlanConfig::new(2.0, 1e-3);
    let (plan, control, _traj) = plan_steering(&spec, &damping, &u0, &u1, &mut eqs, &cfg)?;

    println!("steering (u ≡ +1, 0) to (u ≡ −1, 0):");
    for (i, leg) in plan.legs.iter().enumerate() {
        println!(
            "  leg {i}: {:?} for {:.3} time units (ball {:?}, handoff {:.2e})",
            leg.kind, leg.duration, leg.equilibrium, leg.handoff_defect
        );
    }
    println!(
        "total duration {:.3} within the budget T_max = {:.3} \
         (T0 {:.2}, T_A {:.2}, τ {:.2}, N {})",
        plan.total_duration,
        plan.budget.t_max,
        plan.budget.t0,
        plan.budget.t_attractor,
        plan.budget.tau,
        plan.budget.n_equilibria
    );
    println!(
        "re-simulated terminal X-error {:.3e} over {} control segments",
        plan.terminal_error,
        control.segments.len()
    );
    Ok(())
}
