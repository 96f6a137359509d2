//! Plate states as paired coefficient arrays, energy-space norms, and the
//! duality pairing used by the control machinery.

use std::sync::Arc;

use ndarray::Array1;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::spectral::Geometry;

/// Sobolev exponent together with its precomputed modal weights
/// `w_k = (1 + λ_k)^{s/2}`.
#[derive(Debug, Clone)]
pub struct SobolevIndex {
    pub s: f64,
    pub weights: Array1<f64>,
}

impl SobolevIndex {
    pub fn new(geom: &Geometry, s: f64) -> SobolevIndex {
        let weights =
            Array1::from_iter(geom.eigenvalues().iter().map(|&l| (1.0 + l).powf(s / 2.0)));
        SobolevIndex { s, weights }
    }
}

/// One plate state `(u, ∂t u)` over a truncated eigenbasis, with its geometry
/// and simulation time stamp.
#[derive(Debug, Clone)]
pub struct ModalState {
    pub u: Array1<f64>,
    pub v: Array1<f64>,
    pub geom: Arc<Geometry>,
    pub t: f64,
}

impl ModalState {
    pub fn new(u: Array1<f64>, v: Array1<f64>, geom: Arc<Geometry>, t: f64) -> Result<ModalState> {
        let n = geom.mode_count();
        if u.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: u.len() });
        }
        if v.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: v.len() });
        }
        let state = ModalState { u, v, geom, t };
        state.check_finite()?;
        Ok(state)
    }

    pub fn zero(geom: Arc<Geometry>) -> ModalState {
        let n = geom.mode_count();
        ModalState { u: Array1::zeros(n), v: Array1::zeros(n), geom, t: 0.0 }
    }

    /// Hard error on any NaN/Inf entry.
    pub fn check_finite(&self) -> Result<()> {
        if self.u.iter().chain(self.v.iter()).all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite("modal state"))
        }
    }

    /// Energy-space norm `(‖Δu‖² + β‖u‖² + ‖v‖²)^{1/2}`, i.e. the X-norm in
    /// which the energy lower bound `E ≥ ½‖U‖²` holds with a defocusing
    /// nonlinearity. Equivalent to the `H_D² × L²` product norm on both
    /// geometries.
    pub fn x_norm(&self) -> f64 {
        let beta = self.geom.beta();
        let bending: f64 = self
            .u
            .iter()
            .zip(self.geom.eigenvalues().iter())
            .map(|(&c, &l)| (l * l + beta) * c * c)
            .sum();
        let kinetic: f64 = self.v.iter().map(|&c| c * c).sum();
        (bending + kinetic).sqrt()
    }

    pub fn x_dist(&self, other: &ModalState) -> f64 {
        let du = &self.u - &other.u;
        let dv = &self.v - &other.v;
        let beta = self.geom.beta();
        let bending: f64 = du
            .iter()
            .zip(self.geom.eigenvalues().iter())
            .map(|(&c, &l)| (l * l + beta) * c * c)
            .sum();
        let kinetic: f64 = dv.iter().map(|&c| c * c).sum();
        (bending + kinetic).sqrt()
    }

    /// Norm in `H_D^{s_u} × H_D^{s_v}`.
    pub fn pair_norm(&self, s_u: f64, s_v: f64) -> f64 {
        let a = self.geom.sobolev_norm(&self.u, s_u);
        let b = self.geom.sobolev_norm(&self.v, s_v);
        a.hypot(b)
    }

    /// Componentwise Riesz map between product Sobolev spaces: each
    /// coefficient of `u` is scaled by `(1+λ)^{(s_u − s_u')/2}` and likewise
    /// for `v`; an isometry from `H^{s_u}×H^{s_v}` onto `H^{s_u'}×H^{s_v'}`.
    pub fn riesz_map(&self, from: (f64, f64), to: (f64, f64)) -> ModalState {
        ModalState {
            u: self.geom.riesz_scale(&self.u, from.0, to.0),
            v: self.geom.riesz_scale(&self.v, from.1, to.1),
            geom: self.geom.clone(),
            t: self.t,
        }
    }

    /// Velocity sign flip `(u, v) ↦ (u, −v)`; an involution.
    pub fn flip_velocity(&self) -> ModalState {
        ModalState {
            u: self.u.clone(),
            v: self.v.iter().map(|&x| -x).collect(),
            geom: self.geom.clone(),
            t: self.t,
        }
    }

    /// Duality pairing `⟨(Φ0, Φ1), (v0, v1)⟩ = ⟨Φ1, v0⟩ − ⟨Φ0, v1⟩` between
    /// dual data (self) and an energy-space state, realized with plain modal
    /// dot products through the L² pivot.
    pub fn dual_pairing(&self, state: &ModalState) -> f64 {
        self.v.dot(&state.u) - self.u.dot(&state.v)
    }
}

/// Seeded spectral noise: coefficients `c_k ∝ ξ_k (1 + λ_k)^{−1}` with ξ
/// standard normal on both components, normalized to the requested X-norm.
pub fn random_state(geom: &Arc<Geometry>, seed: u64, x_norm: f64) -> ModalState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = geom.mode_count();
    let shape = |rng: &mut ChaCha8Rng| {
        Array1::from_iter(
            geom.eigenvalues()
                .iter()
                .map(|&l| standard_normal(rng) / (1.0 + l)),
        )
    };
    let u = shape(&mut rng);
    let v = shape(&mut rng);
    let mut state = ModalState { u, v, geom: clone_arc(geom), t: 0.0 };
    let norm = state.x_norm();
    if norm > 0.0 && x_norm > 0.0 {
        let scale = x_norm / norm;
        state.u *= scale;
        state.v *= scale;
    } else if x_norm == 0.0 {
        state.u = Array1::zeros(n);
        state.v = Array1::zeros(n);
    }
    state
}

fn clone_arc(geom: &Arc<Geometry>) -> Arc<Geometry> {
    Arc::clone(geom)
}

/// Box-Muller standard normal from the seeded stream.
fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    use rand::Rng;
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}
