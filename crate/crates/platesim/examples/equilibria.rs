//! Equilibria of u³ − 2u on the torus (the roots of e³ − e with β = 1) and
//! the LaSalle behavior of the damped flow: every trajectory coasts into a
//! controllability ball around one of them.
//!
//! Run with `cargo run --release --example equilibria`.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::Array1;
use platesim::attractor::{
    enumerate_equilibria, equilibrium_bound, lasalle_coast, linear_decay_rate, CoastOptions,
    NewtonOptions,
};
use platesim::model::{BoxRegion, DampingProfile, NonlinearityClass, NonlinearitySpec};
use platesim::spectral::{random_state, DomainKind, Geometry};

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

    let sqrt_measure = (2.0 * PI).sqrt();
    let seeds: Vec<Array1<f64>> = [-1.5, 0.0, 1.5]
        .iter()
        .map(|&c| {
            let mut e = Array1::zeros(geom.mode_count());
            e[0] = c * sqrt_measure;
            e
        })
        .collect();
    let mut eqs = enumerate_equilibria(&spec, &seeds, &NewtonOptions::default());
    println!("found {} equilibria:", eqs.len());
    for eq in &eqs {
        let (lhs, rhs) = equilibrium_bound(&spec, &eq.e_hat)?;
        println!(
            "  e ≡ {:+.6}  residual {:.2e}  a priori bound {:.3} <= {:.3}",
            eq.e_hat[0] / sqrt_measure,
            eq.residual,
            lhs,
            rhs
        );
    }

    let fit = linear_decay_rate(&geom, &damping, 1e-3, 20.0, 1)?;
    println!("linear damped decay rate {:.3} (r² {:.4})", fit.rate, fit.r_squared);

    for eq in eqs.iter_mut() {
        eq.radius = Some(0.1);
    }
    // reaching ‖∂t u‖ ≤ 1e-4 from E0 ≈ 1 takes about 18 energy
    // time-constants, so the certified coast gets a longer horizon than the
    // 10x cap used for steering legs
    let opts = CoastOptions {
        dt: 1e-3,
        max_duration: 25.0 / fit.rate.max(1e-3),
        ball_fraction: 0.5,
        velocity_ceiling: Some(1e-4),
    };
    for seed in 0..5 {
        let state = random_state(&geom, seed, 1.0);
        let out = lasalle_coast(&spec, &damping, &state, &eqs, &opts)?;
        println!(
            "seed {seed}: coasted {:.2} time units into the ball of e ≡ {:+.2} \
             (final ‖∂t u‖ = {:.2e})",
            out.duration,
            eqs[out.equilibrium].e_hat[0] / sqrt_measure,
            out.final_velocity_norm
        );
    }
    Ok(())
}
