//! Spectral toolkit for the nonlinear hinged plate equation
//!
//! ```text
//! u_tt + Δ²u + βu + γ²(x) u_t + f(x, u) = g(t, x)
//! ```
//!
//! posed on a hinged rectangle `(0, π)^d` (sine eigenbasis, `u = Δu = 0` on the
//! boundary) or a flat torus of side `2π` (real Fourier basis, `β > 0`), for
//! `d ≤ 3`. The bi-Laplacian diagonalizes in the Laplace eigenbasis, so states
//! are pairs of real coefficient arrays and the linear flow is an exact modal
//! rotation; nonlinear terms are evaluated pseudospectrally on a dealiased
//! grid.
//!
//! What the crate provides, module by module:
//!
//! - [`spectral`]: geometries, modal/physical transforms, Sobolev norms and
//!   Riesz maps on the scale `H_D^s`.
//! - [`model`]: polynomial nonlinearities `f(x, u)` with defocusing /
//!   asymptotic-defocusing class checks, smooth localized damping profiles
//!   `γ²(x)`, and the nonlinear energy functional.
//! - [`dynamics`]: Strang-split time integration of the undamped, damped and
//!   controlled flows, the adjoint system with potential, and the exact
//!   Schrödinger group.
//! - [`observability`]: truncated observability Gramians for the Schrödinger
//!   group and the plate semigroup, plus an empirical check of the nonlinear
//!   observability inequality.
//! - [`control`]: HUM linear control synthesis by conjugate gradients on the
//!   duality operator, and nonlinear local control around equilibria via a
//!   Picard fixed point.
//! - [`attractor`]: Newton-Krylov equilibrium solves, damped coasting into
//!   controllability balls, velocity U-turns, and a semiglobal steering
//!   planner that concatenates coasts and local controls.
//! - [`config`] / [`runner`]: a key-value scenario format and a runner that
//!   executes each mode and emits CSV/JSON artifacts (exposed by the
//!   `platesim` binary).
//!
//! Every major capability has a runnable example under `examples/`; start
//! with `energy_decay` and `steering`.

pub mod attractor;
pub mod config;
pub mod control;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod observability;
pub mod runner;
pub mod spectral;

pub use error::{Error, Result};
pub use spectral::{DomainKind, Geometry, ModalState};
