//! Four-body dimer (two nuclei, two electrons) in internal Jacobi
//! coordinates.
//!
//! With `X = X₂ − X₁` the nuclear separation, `x = x₃ − x₄` the electronic
//! separation and `ξ` the electronic centre of mass relative to the
//! nuclear one, the centre-of-mass motion separates off and
//!
//! ```text
//! T = −1/(2μ) ∂²_X − ∂²_x − (2 + M)/(4M) ∂²_ξ,   μ = M₁M₂/M,  M = M₁ + M₂
//! R = −2ξ + X (M₁Z₂ − M₂Z₁)/M
//! ```

use serde::{Deserialize, Serialize};

use super::grid::{GridHamiltonian, PhotonCoupling};
use super::{soft_coulomb, PROTON_MASS};
use crate::error::{invalid, Error, Result};
use crate::state::{Axis, AxisKind, CavityMode, Grid, ModelKind, Stencil};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimerParams {
    pub m1: f64,
    pub m2: f64,
    pub z1: f64,
    pub z2: f64,
    /// Cavity frequency ω_α (hartree).
    pub omega: f64,
    /// Coupling strength λ_α.
    pub lambda: f64,
    pub photon_cap: usize,
    pub fd_order: usize,
}

impl Default for DimerParams {
    fn default() -> Self {
        Self {
            m1: PROTON_MASS,
            m2: PROTON_MASS,
            z1: 1.2,
            z2: 0.8,
            // First vibronic gap of this model on the default grid.
            omega: 0.012568,
            lambda: 0.0,
            photon_cap: 41,
            fd_order: 2,
        }
    }
}

impl DimerParams {
    pub fn with_g_over_omega(mut self, ratio: f64) -> Self {
        self.lambda = CavityMode::from_g_over_omega(self.omega, ratio).lambda;
        self
    }

    pub fn mode(&self) -> CavityMode {
        CavityMode::new(self.omega, self.lambda)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m1 > 0.0 && self.m2 > 0.0) {
            return Err(invalid("m1/m2", "nuclear masses must be positive"));
        }
        if !(self.omega > 0.0) {
            return Err(invalid("omega", "cavity frequency must be positive"));
        }
        if !self.z1.is_finite() || !self.z2.is_finite() || !self.lambda.is_finite() {
            return Err(invalid("z1/z2/lambda", "must be finite"));
        }
        Stencil::new(self.fd_order)?;
        Ok(())
    }

    fn total_mass(&self) -> f64 {
        self.m1 + self.m2
    }

    /// Kinetic prefactors `c` in `−c ∂²` for (X, x, ξ).
    pub fn kinetic_coefficients(&self) -> [f64; 3] {
        let m = self.total_mass();
        let mu = self.m1 * self.m2 / m;
        [0.5 / mu, 1.0, (2.0 + m) / (4.0 * m)]
    }

    /// Nuclear repulsion `Z₁Z₂ w(X)`.
    pub fn nuclear_repulsion(&self, big_x: f64) -> f64 {
        soft_coulomb(big_x, self.z1, self.z2)
    }

    /// Electron-electron and electron-nuclear interaction at fixed X.
    pub fn electronic_potential(&self, big_x: f64, x: f64, xi: f64) -> f64 {
        let m = self.total_mass();
        let a = self.m2 / m * big_x;
        let b = self.m1 / m * big_x;
        soft_coulomb(x, 1.0, 1.0)
            - soft_coulomb(xi + 0.5 * x + a, self.z1, 1.0)
            - soft_coulomb(xi + 0.5 * x - b, self.z2, 1.0)
            - soft_coulomb(xi - 0.5 * x + a, self.z1, 1.0)
            - soft_coulomb(xi - 0.5 * x - b, self.z2, 1.0)
    }

    pub fn potential(&self, big_x: f64, x: f64, xi: f64) -> f64 {
        self.electronic_potential(big_x, x, xi) + self.nuclear_repulsion(big_x)
    }

    /// Total dipole along the molecular axis.
    pub fn dipole(&self, big_x: f64, xi: f64) -> f64 {
        -2.0 * xi + big_x * (self.m1 * self.z2 - self.m2 * self.z1) / self.total_mass()
    }
}

/// Default grid: X on 61 points (dX = 0.08, starting at 0.4 bohr), x on
/// 41 points (dx = 0.5) and ξ on 51 points (dξ = 0.2), both centred.
pub fn si3_grid() -> Grid {
    Grid::new(vec![
        Axis::new(AxisKind::NuclearRelative, 61, 0.08, 0.4).expect("valid axis"),
        Axis::centered(AxisKind::ElectronRelative, 41, 0.5).expect("valid axis"),
        Axis::centered(AxisKind::ElectronNuclearCenter, 51, 0.2).expect("valid axis"),
    ])
    .expect("valid grid")
}

/// Electronic (x, ξ) grid of a full dimer grid.
pub fn electronic_grid(grid: &Grid) -> Result<Grid> {
    check_layout(grid)?;
    Grid::new(grid.axes()[1..].to_vec())
}

fn check_layout(grid: &Grid) -> Result<()> {
    let kinds: Vec<AxisKind> = grid.axes().iter().map(|a| a.kind).collect();
    if kinds != [AxisKind::NuclearRelative, AxisKind::ElectronRelative, AxisKind::ElectronNuclearCenter] {
        return Err(Error::InvalidGrid(format!(
            "dimer grid must be (X, x, xi), got {:?}",
            kinds.iter().map(|k| k.label()).collect::<Vec<_>>()
        )));
    }
    Ok(())
}

fn build(p: &DimerParams, grid: &Grid, self_energy: bool) -> Result<GridHamiltonian> {
    p.validate()?;
    check_layout(grid)?;
    let ax = grid.axes();
    let mut potential = Vec::with_capacity(grid.size());
    let mut dipole = Vec::with_capacity(grid.size());
    for i in 0..ax[0].points {
        let big_x = ax[0].coord(i);
        for j in 0..ax[1].points {
            let x = ax[1].coord(j);
            for k in 0..ax[2].points {
                let xi = ax[2].coord(k);
                potential.push(p.potential(big_x, x, xi));
                dipole.push(p.dipole(big_x, xi));
            }
        }
    }
    let photon = PhotonCoupling { mode: p.mode(), cap: p.photon_cap, dipole, self_energy };
    let kind = if self_energy { ModelKind::Dimer } else { ModelKind::DimerNoSelfEnergy };
    GridHamiltonian::new(
        grid.clone(),
        p.kinetic_coefficients().to_vec(),
        potential,
        Stencil::new(p.fd_order)?,
        Some(photon),
        kind,
    )
}

/// Dimer coupled to one cavity mode on the basis (X ⊗ x ⊗ ξ ⊗ Fock).
pub fn build_dimer(p: &DimerParams, grid: &Grid) -> Result<GridHamiltonian> {
    build(p, grid, true)
}

/// As [`build_dimer`] but without the dipole self-energy `½(λR)²`.
pub fn build_dimer_no_selfenergy(p: &DimerParams, grid: &Grid) -> Result<GridHamiltonian> {
    build(p, grid, false)
}
