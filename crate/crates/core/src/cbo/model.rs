//! Models with clamped nuclear and photon coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::models::dimer::electronic_grid;
use crate::models::{DimerParams, GridHamiltonian, ShinMetiuParams};
use crate::state::{Axis, CavityMode, Grid, ModelKind, Stencil};

/// Nuclear coordinates and photon displacements held fixed during an
/// electronic solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParametricPoint {
    pub nuclear: Vec<f64>,
    pub photon: Vec<f64>,
}

impl ParametricPoint {
    pub fn new(nuclear: Vec<f64>, photon: Vec<f64>) -> Self {
        Self { nuclear, photon }
    }

    /// Flat coordinate list, nuclear first.
    pub fn coordinates(&self) -> Vec<f64> {
        self.nuclear.iter().chain(&self.photon).copied().collect()
    }
}

/// A model whose electronic problem can be solved at fixed
/// [`ParametricPoint`]s.
///
/// The clamped electronic Hamiltonian is
/// `T_e + V_e + ω q λR + ½(λR)²`, where the last term is kept only when
/// [`ClampedModel::self_energy`] is true and `R` is the total dipole
/// projected on the mode polarization.
pub trait ClampedModel: Sync {
    fn electronic_grid(&self) -> &Grid;
    fn electronic_kinetic(&self) -> Vec<f64>;
    fn stencil(&self) -> Stencil;
    /// Nuclear axes that span the full model.
    fn nuclear_axes(&self) -> Vec<Axis>;
    /// Prefactors `c` in `−c ∂²` for each nuclear axis.
    fn nuclear_kinetic(&self) -> Vec<f64>;
    fn mode(&self) -> Option<CavityMode>;
    fn self_energy(&self) -> bool;
    /// Electronic potential on the electronic grid.
    fn electronic_potential(&self, nuclear: &[f64]) -> Vec<f64>;
    /// Projected dipole on the electronic grid.
    fn dipole(&self, nuclear: &[f64]) -> Vec<f64>;
    /// Nucleus-nucleus interaction `W_nn`.
    fn nuclear_repulsion(&self, nuclear: &[f64]) -> f64;

    /// Electronic Hamiltonian at `point` as a banded grid operator.
    fn clamped_hamiltonian(&self, point: &ParametricPoint) -> Result<GridHamiltonian> {
        let grid = self.electronic_grid();
        if point.nuclear.len() != self.nuclear_axes().len() {
            return Err(Error::Dimension { expected: self.nuclear_axes().len(), found: point.nuclear.len() });
        }
        let mut v = self.electronic_potential(&point.nuclear);
        if let Some(mode) = self.mode() {
            if point.photon.len() > 1 {
                return Err(invalid("photon", "models couple to a single mode"));
            }
            let q = point.photon.first().copied().unwrap_or(0.0);
            let lam = mode.lambda;
            if lam != 0.0 {
                let r = self.dipole(&point.nuclear);
                let se = self.self_energy();
                for (vi, ri) in v.iter_mut().zip(&r) {
                    *vi += mode.omega * q * lam * ri;
                    if se {
                        *vi += 0.5 * (lam * ri) * (lam * ri);
                    }
                }
            }
        }
        GridHamiltonian::new(grid.clone(), self.electronic_kinetic(), v, self.stencil(), None, ModelKind::Electronic)
    }
}

/// The dimer with its nuclear separation clamped.
#[derive(Clone, Debug)]
pub struct DimerModel {
    pub params: DimerParams,
    grid: Grid,
    electronic: Grid,
    self_energy: bool,
}

impl DimerModel {
    /// `grid` is the full (X, x, ξ) grid.
    pub fn new(params: DimerParams, grid: &Grid, self_energy: bool) -> Result<Self> {
        params.validate()?;
        let electronic = electronic_grid(grid)?;
        Ok(Self { params, grid: grid.clone(), electronic, self_energy })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }
}

impl ClampedModel for DimerModel {
    fn electronic_grid(&self) -> &Grid {
        &self.electronic
    }

    fn electronic_kinetic(&self) -> Vec<f64> {
        self.params.kinetic_coefficients()[1..].to_vec()
    }

    fn stencil(&self) -> Stencil {
        Stencil::new(self.params.fd_order).expect("validated order")
    }

    fn nuclear_axes(&self) -> Vec<Axis> {
        vec![self.grid.axes()[0].clone()]
    }

    fn nuclear_kinetic(&self) -> Vec<f64> {
        vec![self.params.kinetic_coefficients()[0]]
    }

    fn mode(&self) -> Option<CavityMode> {
        Some(self.params.mode())
    }

    fn self_energy(&self) -> bool {
        self.self_energy
    }

    fn electronic_potential(&self, nuclear: &[f64]) -> Vec<f64> {
        let big_x = nuclear[0];
        let ax = self.electronic.axes();
        let mut v = Vec::with_capacity(self.electronic.size());
        for j in 0..ax[0].points {
            let x = ax[0].coord(j);
            for k in 0..ax[1].points {
                v.push(self.params.electronic_potential(big_x, x, ax[1].coord(k)));
            }
        }
        v
    }

    fn dipole(&self, nuclear: &[f64]) -> Vec<f64> {
        let ax = self.electronic.axes();
        let mut r = Vec::with_capacity(self.electronic.size());
        for _ in 0..ax[0].points {
            for k in 0..ax[1].points {
                r.push(self.params.dipole(nuclear[0], ax[1].coord(k)));
            }
        }
        r
    }

    fn nuclear_repulsion(&self, nuclear: &[f64]) -> f64 {
        self.params.nuclear_repulsion(nuclear[0])
    }
}

/// The Shin-Metiu model with the mobile nucleus clamped.
#[derive(Clone, Debug)]
pub struct ShinMetiuModel {
    pub params: ShinMetiuParams,
    electronic: Grid,
    nuclear: Vec<Axis>,
}

impl ShinMetiuModel {
    pub fn new(params: ShinMetiuParams) -> Result<Self> {
        params.validate()?;
        let [ex, ey] = params.electron_axes()?;
        let [nx, ny] = params.nuclear_axes()?;
        Ok(Self { params, electronic: Grid::new(vec![ex, ey])?, nuclear: vec![nx, ny] })
    }
}

impl ClampedModel for ShinMetiuModel {
    fn electronic_grid(&self) -> &Grid {
        &self.electronic
    }

    fn electronic_kinetic(&self) -> Vec<f64> {
        vec![0.5, 0.5]
    }

    fn stencil(&self) -> Stencil {
        Stencil::new(self.params.fd_order).expect("validated order")
    }

    fn nuclear_axes(&self) -> Vec<Axis> {
        self.nuclear.clone()
    }

    fn nuclear_kinetic(&self) -> Vec<f64> {
        vec![0.5 / self.params.nuclear_mass; 2]
    }

    fn mode(&self) -> Option<CavityMode> {
        Some(self.params.mode())
    }

    fn self_energy(&self) -> bool {
        true
    }

    fn electronic_potential(&self, nuclear: &[f64]) -> Vec<f64> {
        let nuc = [nuclear[0], nuclear[1]];
        (0..self.electronic.size())
            .map(|i| {
                let c = self.electronic.point(i);
                self.params.electronic_potential([c[0], c[1]], nuc)
            })
            .collect()
    }

    fn dipole(&self, nuclear: &[f64]) -> Vec<f64> {
        let nuc = [nuclear[0], nuclear[1]];
        (0..self.electronic.size())
            .map(|i| {
                let c = self.electronic.point(i);
                self.params.dipole([c[0], c[1]], nuc)
            })
            .collect()
    }

    fn nuclear_repulsion(&self, nuclear: &[f64]) -> f64 {
        self.params.nuclear_repulsion([nuclear[0], nuclear[1]])
    }
}

/// Mask of electronic grid points within `width` points of an edge.
pub fn edge_mask(grid: &Grid, width: usize) -> Vec<f64> {
    let dims = grid.dims();
    (0..grid.size())
        .map(|mut i| {
            let mut edge = false;
            for &d in dims.iter().rev() {
                let j = i % d;
                i /= d;
                edge |= j < width || j + width >= d;
            }
            if edge {
                1.0
            } else {
                0.0
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::si3_grid;
    use crate::state::{AxisKind, LinearOperator};

    #[test]
    fn dimer_clamped_potential_matches_full_model() {
        let p = DimerParams::default().with_g_over_omega(0.8);
        let m = DimerModel::new(p.clone(), &si3_grid(), true).unwrap();
        let big_x = 1.6;
        let q = 3.0;
        let h = m.clamped_hamiltonian(&ParametricPoint::new(vec![big_x], vec![q])).unwrap();
        let g = m.electronic_grid();
        let lam = p.lambda;
        for i in [0, 17, 1000, g.size() - 1] {
            let c = g.point(i);
            let r = p.dipole(big_x, c[1]);
            let want = p.electronic_potential(big_x, c[0], c[1]) + p.omega * q * lam * r + 0.5 * lam * lam * r * r;
            assert!((h.potential()[i] - want).abs() < 1e-14);
        }
        assert_eq!(h.dim(), 41 * 51);
    }

    #[test]
    fn edge_mask_counts_border() {
        let g = Grid::new(vec![
            Axis::centered(AxisKind::ElectronX, 5, 1.0).unwrap(),
            Axis::centered(AxisKind::ElectronY, 4, 1.0).unwrap(),
        ])
        .unwrap();
        let m = edge_mask(&g, 1);
        assert_eq!(m.iter().sum::<f64>(), 20.0 - 3.0 * 2.0);
    }
}
