//! Linear null control by the Hilbert Uniqueness Method: conjugate gradients
//! on the duality operator produce the control g = γ²Φ that annihilates a
//! random state, certified by re-simulation.
//!
//! Run with `cargo run --release --example hum_control`.

use std::f64::consts::PI;
use std::sync::Arc;

use platesim::control::{HumConfig, HumProblem};
use platesim::model::{BoxRegion, DampingProfile};
use platesim::spectral::{random_state, DomainKind, Geometry};

fn main() -> platesim::Result<()> {
    let geom = Arc::new(Geometry::build(DomainKind::HingedRectangle, 1, &[24], 0.0)?);
    let damping = DampingProfile::new(
        geom.clone(),
        vec![BoxRegion { lo: vec![PI / 4.0], hi: vec![3.0 * PI / 4.0] }],
        1.5,
        0.3,
    )?;
    let hum = HumProblem::new(geom.clone(), &damping, None)?;

    let mut cfg = HumConfig::new(2.0, 1e-3);
    cfg.check_observability = true;
    println!("observability floor: mu_min = {:.3e}", hum.observability_mu(&cfg)?);

    // duality structure on random data
    let a = random_state(&geom, 3, 1.0);
    let b = random_state(&geom, 4, 1.0);
    let la = hum.apply_lambda(&a, &cfg)?;
    let lb = hum.apply_lambda(&b, &cfg)?;
    let defect = (a.dual_pairing(&lb) - b.dual_pairing(&la)).abs()
        / a.dual_pairing(&lb).abs().max(1e-300);
    println!("Λ symmetry defect on random data: {defect:.3e}");
    println!("Λ positivity: ⟨Φ, ΛΦ⟩ = {:.6e} >= 0", a.dual_pairing(&la));

    // null control of a random unit state
    let target = random_state(&geom, 7, 1.0);
    let sol = hum.solve(&target, &cfg)?;
    println!(
        "HUM solve: {} CG iterations, terminal X-norm {:.3e}, support leak {:.1e}",
        sol.iterations,
        sol.terminal_error,
        sol.support_leak(hum.gamma_sq())
    );
    Ok(())
}
