//! Nonlinear local control around the zero equilibrium of the defocusing
//! cubic: a Picard fixed point on B(Φ) = Λ⁻¹[(z0,z1) − K(Φ)] steers small
//! data to rest, certified by nonlinear re-simulation.
//!
//! Run with `cargo run --release --example local_control`.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::Array1;
use platesim::control::{local_control, probe_radius, PicardConfig};
use platesim::model::{BoxRegion, DampingProfile, NonlinearityClass, NonlinearitySpec};
use platesim::spectral::{random_state, DomainKind, Geometry, ModalState};

fn main() -> platesim::Result<()> {
    let geom = Arc::new(Geometry::build(DomainKind::HingedRectangle, 1, &[16], 0.0)?);
    let spec = NonlinearitySpec::polynomial(
        geom.clone(),
        &[0.0, 0.0, 1.0],
        NonlinearityClass::Defocusing { alpha: 0.0 },
    )?;
    let damping = DampingProfile::new(
        geom.clone(),
        vec![BoxRegion { lo: vec![PI / 4.0], hi: vec![3.0 * PI / 4.0] }],
        1.5,
        0.3,
    )?;
    let e = Array1::zeros(geom.mode_count());
    let cfg = PicardConfig::new(2.0, 1e-3);

    for norm in [1e-2, 5e-3] {
        let start = random_state(&geom, 11, norm);
        let end = ModalState::zero(geom.clone());
        let sol = local_control(&spec, &damping, &e, &start, &end, &cfg)?;
        println!(
            "data norm {norm:.1e}: {} Picard iterations, terminal X-error {:.3e}, \
             control duration {}",
            sol.iterations,
            sol.terminal_error,
            sol.duration()
        );
    }

    let r = probe_radius(&spec, &damping, &e, &cfg, 5)?;
    println!("probed controllability radius around (0, 0): {r}");
    Ok(())
}
