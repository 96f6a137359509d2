//! Observability constants from truncated Gramians: the Schrödinger group
//! observed from a quarter of the torus, the plate semigroup with a damping
//! weight, and the empirical nonlinear observability ratio.
//!
//! Run with `cargo run --release --example observability_gramian`.

use std::f64::consts::PI;
use std::sync::Arc;

use platesim::model::{
    indicator_field, BoxRegion, DampingProfile, NonlinearityClass, NonlinearitySpec,
};
use platesim::observability::{
    check_nonlinear_observability, plate_gramian, schrodinger_gramian, PlateObsMode,
};
use platesim::spectral::{DomainKind, Geometry};

fn main() -> platesim::Result<()> {
    // Schrödinger group on the torus, observed from (0, π/2)
    for n in [17usize, 33] {
        let geom = Arc::new(Geometry::build(DomainKind::Torus, 1, &[n], 1.0)?);
        let weight =
            indicator_field(geom.base(), &[BoxRegion { lo: vec![0.0], hi: vec![PI / 2.0] }]);
        let rep = schrodinger_gramian(&geom, &weight, 2.0 * PI, 1e-3)?;
        println!(
            "Schrödinger Gramian, |k| <= {:2}: mu_min = {:.6}, C_obs = {:.3}",
            n / 2,
            rep.mu_min,
            rep.c_obs
        );
    }

    // plate semigroup on the rectangle observed through a damping weight
    let geom = Arc::new(Geometry::build(DomainKind::HingedRectangle, 1, &[16], 0.0)?);
    let damping = DampingProfile::new(
        geom.clone(),
        vec![BoxRegion { lo: vec![PI / 4.0], hi: vec![3.0 * PI / 4.0] }],
        1.0,
        0.3,
    )?;
    let weight = damping.gamma_sq().mapv(f64::sqrt);
    for t in [1.0, 2.0, 4.0] {
        let rep = plate_gramian(&geom, &weight, t, None, PlateObsMode::DampedField, 0.0, 1e-3)?;
        println!("plate Gramian, T = {t}: mu_min = {:.6e}", rep.mu_min);
    }

    // empirical nonlinear observability constant for the damped cubic
    let spec = NonlinearitySpec::polynomial(
        geom.clone(),
        &[0.0, 0.0, 1.0],
        NonlinearityClass::Defocusing { alpha: 0.0 },
    )?;
    let damping = DampingProfile::new(
        geom.clone(),
        vec![BoxRegion { lo: vec![PI / 4.0], hi: vec![3.0 * PI / 4.0] }],
        2.0,
        0.3,
    )?;
    let rep = check_nonlinear_observability(&spec, &damping, 1.0, 10, 2.0, 1e-3, 42)?;
    println!(
        "nonlinear observability over {} samples at E0 = 1: max ratio {:.4}",
        rep.samples.len(),
        rep.max_ratio
    );
    Ok(())
}
