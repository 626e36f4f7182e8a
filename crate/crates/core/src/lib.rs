//! Exact and approximate treatments of electron-nuclear-photon model
//! systems in optical cavities.
//!
//! The crate is organised bottom-up: [`state`] holds grids, bases,
//! wavefunctions and the operator contract; [`models`] builds the model
//! Hamiltonians; [`eigen`] diagonalizes them; [`cbo`] implements the
//! cavity Born-Oppenheimer workflow; [`spectra`], [`dynamics`] and
//! [`control`] provide observables, propagation and local optimal
//! control; [`experiments`] wires everything to declarative run configs.

pub mod cbo;
pub mod control;
pub mod dynamics;
pub mod eigen;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod models;
pub mod spectra;
pub mod state;

pub use error::{Error, Result};
