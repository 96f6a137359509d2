//! Eigenbasis management on the two supported flat geometries, transforms
//! between modal and physical representations, and Sobolev-scale norms.

mod geometry;
mod state;

pub use geometry::{DomainKind, Geometry, Transform};
pub use state::{random_state, ModalState, SobolevIndex};
