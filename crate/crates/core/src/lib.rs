//! Numerical laboratory for free-field electrodynamics.
//!
//! Everything lives on a periodic cubic lattice ([`grid::GridSpec`]). The
//! modules cross-check one another: the spectral propagator, the
//! Riemann–Silberstein evolution and the staggered dual-Maxwell solver solve
//! the same physics by independent routes.

pub mod brackets;
pub mod clebsch;
pub mod dualmaxwell;
pub mod error;
pub mod fields;
pub mod focksu2;
pub mod grid;
pub mod majorana;
pub mod propagator;
pub mod random;
mod reduce;
pub mod snapshot;
pub mod spectral;

pub use error::{Error, Result};
pub use grid::{GridSpec, ScalarFieldGrid, Vec3, VectorFieldGrid};
