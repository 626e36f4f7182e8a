//! Model Hamiltonians: the cavity dimer, the two-dimensional Shin-Metiu
//! model, the extended Rabi model and the multimode two-level emitter.

pub mod dimer;
mod grid;
pub mod multimode;
pub mod rabi;
pub mod shin_metiu;

pub use dimer::{build_dimer, build_dimer_no_selfenergy, si3_grid, DimerParams};
pub use grid::{GridHamiltonian, PhotonCoupling};
pub use multimode::{build_multimode, MultimodeHamiltonian, MultimodeParams};
pub use rabi::{build_rabi, RabiHamiltonian, RabiParams};
pub use shin_metiu::{build_shin_metiu, ShinMetiuParams};

/// Speed of light in atomic units.
pub const SPEED_OF_LIGHT: f64 = 137.036;
/// Vacuum permittivity in atomic units, where 1/(4πε0) = 1.
pub const EPSILON_0: f64 = 1.0 / (4.0 * std::f64::consts::PI);
/// Proton mass in electron masses.
pub const PROTON_MASS: f64 = 1836.15267343;

/// Softened Coulomb interaction `Zi·Zj / sqrt(d² + 1)`.
#[inline]
pub fn soft_coulomb(d: f64, zi: f64, zj: f64) -> f64 {
    zi * zj / (d * d + 1.0).sqrt()
}
