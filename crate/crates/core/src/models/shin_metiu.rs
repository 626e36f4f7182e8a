//! Two-dimensional Shin-Metiu model: one electron and one mobile nucleus
//! moving in the plane of two fixed ions at (±L/2, 0).

use serde::{Deserialize, Serialize};

use super::grid::{GridHamiltonian, PhotonCoupling};
use super::PROTON_MASS;
use crate::error::{invalid, Error, Result};
use crate::state::{Axis, AxisKind, CavityMode, Grid, ModelKind, Stencil};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShinMetiuParams {
    /// Electron-nucleus softening.
    pub a: f64,
    /// Nucleus-nucleus softening.
    pub b: f64,
    /// Confinement radius of the mobile nucleus.
    pub r0: f64,
    /// Distance between the fixed ions.
    pub l: f64,
    pub nuclear_mass: f64,
    pub omega: f64,
    pub lambda: f64,
    pub polarization: [f64; 2],
    pub photon_cap: usize,
    pub fd_order: usize,
    /// Electron grid: points per dimension over [-extent, extent].
    pub electron_points: usize,
    pub electron_extent: f64,
    pub nuclear_points: usize,
    pub nuclear_extent: f64,
}

impl Default for ShinMetiuParams {
    fn default() -> Self {
        Self {
            a: 0.5,
            b: 10.0,
            r0: 3.5,
            l: 4.0 * 3f64.sqrt() / 5.0,
            nuclear_mass: PROTON_MASS,
            // Lowest vibrational gap of the ground surface (see experiments).
            omega: 0.00833,
            lambda: 0.0,
            polarization: [1.0, 0.0],
            photon_cap: 20,
            fd_order: 2,
            electron_points: 51,
            electron_extent: 6.0,
            nuclear_points: 51,
            nuclear_extent: 6.0,
        }
    }
}

impl ShinMetiuParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.b > 0.0) {
            return Err(invalid("a/b", "softening parameters must be positive"));
        }
        if !(self.r0 > 0.0 && self.nuclear_mass > 0.0) {
            return Err(invalid("r0/nuclear_mass", "must be positive"));
        }
        let n = (self.polarization[0].powi(2) + self.polarization[1].powi(2)).sqrt();
        if (n - 1.0).abs() > 1e-12 {
            return Err(invalid("polarization", format!("must be a unit vector, |e| = {n}")));
        }
        if !(self.omega > 0.0) {
            return Err(invalid("omega", "cavity frequency must be positive"));
        }
        Stencil::new(self.fd_order)?;
        Ok(())
    }

    pub fn mode(&self) -> CavityMode {
        CavityMode::new(self.omega, self.lambda).with_polarization(self.polarization)
    }

    pub fn with_g_over_omega(mut self, ratio: f64) -> Self {
        self.lambda = CavityMode::from_g_over_omega(self.omega, ratio).lambda;
        self
    }

    /// Electron-nucleus attraction `−1/sqrt(a + d²)`.
    pub fn v_en(&self, d2: f64) -> f64 {
        -1.0 / (self.a + d2).sqrt()
    }

    /// Nucleus-nucleus repulsion `1/sqrt(b + d²)`.
    pub fn v_nn(&self, d2: f64) -> f64 {
        1.0 / (self.b + d2).sqrt()
    }

    fn ions(&self) -> [[f64; 2]; 2] {
        [[0.5 * self.l, 0.0], [-0.5 * self.l, 0.0]]
    }

    /// Electron potential for the nucleus clamped at `nuc`.
    pub fn electronic_potential(&self, r: [f64; 2], nuc: [f64; 2]) -> f64 {
        let d2 = |p: [f64; 2]| (r[0] - p[0]).powi(2) + (r[1] - p[1]).powi(2);
        let [i1, i2] = self.ions();
        self.v_en(d2(i1)) + self.v_en(d2(i2)) + self.v_en(d2(nuc))
    }

    /// Nuclear repulsions, the constant fixed-ion term and the confinement.
    pub fn nuclear_repulsion(&self, nuc: [f64; 2]) -> f64 {
        let d2 = |p: [f64; 2]| (nuc[0] - p[0]).powi(2) + (nuc[1] - p[1]).powi(2);
        let [i1, i2] = self.ions();
        let rr = (nuc[0] * nuc[0] + nuc[1] * nuc[1]).sqrt();
        self.v_nn(d2(i1)) + self.v_nn(d2(i2)) + self.v_nn(self.l * self.l) + (rr / self.r0).powi(4)
    }

    /// Dipole `R_n − r_e` projected on the polarization.
    pub fn dipole(&self, r: [f64; 2], nuc: [f64; 2]) -> f64 {
        self.polarization[0] * (nuc[0] - r[0]) + self.polarization[1] * (nuc[1] - r[1])
    }

    pub fn electron_axes(&self) -> Result<[Axis; 2]> {
        let e = self.electron_extent;
        Ok([
            Axis::span(AxisKind::ElectronX, -e, e, self.electron_points)?,
            Axis::span(AxisKind::ElectronY, -e, e, self.electron_points)?,
        ])
    }

    pub fn nuclear_axes(&self) -> Result<[Axis; 2]> {
        let e = self.nuclear_extent;
        Ok([
            Axis::span(AxisKind::NuclearX, -e, e, self.nuclear_points)?,
            Axis::span(AxisKind::NuclearY, -e, e, self.nuclear_points)?,
        ])
    }

    /// Full (electron x, electron y, nucleus x, nucleus y) grid.
    pub fn grid(&self) -> Result<Grid> {
        let [ex, ey] = self.electron_axes()?;
        let [nx, ny] = self.nuclear_axes()?;
        Grid::new(vec![ex, ey, nx, ny])
    }
}

/// Full model on (electron x, electron y, nucleus x, nucleus y, Fock).
pub fn build_shin_metiu(p: &ShinMetiuParams, grid: &Grid) -> Result<GridHamiltonian> {
    p.validate()?;
    let kinds: Vec<AxisKind> = grid.axes().iter().map(|a| a.kind).collect();
    if kinds != [AxisKind::ElectronX, AxisKind::ElectronY, AxisKind::NuclearX, AxisKind::NuclearY] {
        return Err(Error::InvalidGrid("Shin-Metiu grid must be (ex, ey, nx, ny)".into()));
    }
    let n = grid.size();
    let mut potential = Vec::with_capacity(n);
    let mut dipole = Vec::with_capacity(n);
    for idx in 0..n {
        let c = grid.point(idx);
        let r = [c[0], c[1]];
        let nuc = [c[2], c[3]];
        potential.push(p.electronic_potential(r, nuc) + p.nuclear_repulsion(nuc));
        dipole.push(p.dipole(r, nuc));
    }
    let kn = 0.5 / p.nuclear_mass;
    GridHamiltonian::new(
        grid.clone(),
        vec![0.5, 0.5, kn, kn],
        potential,
        Stencil::new(p.fd_order)?,
        Some(PhotonCoupling { mode: p.mode(), cap: p.photon_cap, dipole, self_energy: true }),
        ModelKind::ShinMetiu,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{hermiticity_defect, Operator};

    #[test]
    fn closed_form_potentials() {
        let p = ShinMetiuParams::default();
        assert!((p.v_en(0.0) + 1.414214).abs() < 1e-6);
        assert!((p.v_nn(p.l * p.l) - 1.0 / 11.92f64.sqrt()).abs() < 1e-12);
        assert!((p.v_nn(p.l * p.l) - 0.289642).abs() < 1e-6);
    }

    #[test]
    fn polarization_must_be_unit() {
        let p = ShinMetiuParams { polarization: [1.0, 1.0], ..Default::default() };
        assert!(p.validate().is_err());
    }

    #[test]
    fn small_model_is_hermitian() {
        let p = ShinMetiuParams {
            electron_points: 4,
            nuclear_points: 3,
            photon_cap: 2,
            lambda: 0.3,
            polarization: [0.6, 0.8],
            ..Default::default()
        };
        let h = build_shin_metiu(&p, &p.grid().unwrap()).unwrap();
        assert_eq!(h.basis().dim(), 16 * 9 * 3);
        assert!(hermiticity_defect(&h, 20, 11) < 1e-12);
    }
}
