use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SymmetricBand;
use crate::state::{
    CavityMode, DiagonalOperator, Factor, FockTruncation, Grid, LinearOperator, ModelDescriptor, ModelKind,
    Operator, ProductBasis, Stencil,
};

/// Dipole coupling of a grid model to one cavity mode in a Fock basis.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PhotonCoupling {
    pub mode: CavityMode,
    pub cap: usize,
    /// Dipole projected on the polarization, one value per grid point.
    pub dipole: Vec<f64>,
    /// Keep the quadratic dipole self-energy `½(λR)²`.
    pub self_energy: bool,
}

/// Grid Hamiltonian `Σ_a −c_a ∂²_a + V`, optionally times a photon mode.
///
/// With a photon the basis is the grid axes followed by the Fock factor,
/// and the photon part is `ω(n+½) + ωq̂λR + ½λ²R²`, i.e. the expanded
/// form of `½(p̂² + ω²(q̂ + λR/ω)²)`.
#[derive(Clone, Debug)]
pub struct GridHamiltonian {
    basis: Arc<ProductBasis>,
    descriptor: ModelDescriptor,
    grid: Grid,
    stencil: Stencil,
    kinetic: Vec<f64>,
    potential: Vec<f64>,
    photon: Option<PhotonCoupling>,
    dims: Vec<usize>,
}

impl GridHamiltonian {
    pub fn new(
        grid: Grid,
        kinetic: Vec<f64>,
        potential: Vec<f64>,
        stencil: Stencil,
        photon: Option<PhotonCoupling>,
        kind: ModelKind,
    ) -> Result<Self> {
        if kinetic.len() != grid.axes().len() {
            return Err(Error::Dimension { expected: grid.axes().len(), found: kinetic.len() });
        }
        if potential.len() != grid.size() {
            return Err(Error::Dimension { expected: grid.size(), found: potential.len() });
        }
        let mut extra = vec![];
        let mut modes = vec![];
        if let Some(p) = &photon {
            if p.dipole.len() != grid.size() {
                return Err(Error::Dimension { expected: grid.size(), found: p.dipole.len() });
            }
            if !(p.mode.omega > 0.0) {
                return Err(crate::error::invalid("omega", "cavity frequency must be positive"));
            }
            extra.push(Factor::Fock(FockTruncation::single(p.cap)));
            modes.push(p.mode);
        }
        let basis = Arc::new(ProductBasis::from_grid(&grid, extra)?);
        let dims = basis.dims().to_vec();
        Ok(Self { basis, descriptor: ModelDescriptor::new(kind, modes), grid, stencil, kinetic, potential, photon, dims })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn kinetic(&self) -> &[f64] {
        &self.kinetic
    }

    pub fn photon(&self) -> Option<&PhotonCoupling> {
        self.photon.as_ref()
    }

    pub fn stencil(&self) -> &Stencil {
        &self.stencil
    }

    /// Multiplicative dipole operator `R` on this basis.
    pub fn dipole_operator(&self) -> Result<DiagonalOperator> {
        let p = self
            .photon
            .as_ref()
            .ok_or_else(|| Error::UnknownModel("grid Hamiltonian without a dipole coupling".into()))?;
        let nph = p.cap + 1;
        let diag = p.dipole.iter().flat_map(|&r| std::iter::repeat(r).take(nph)).collect();
        DiagonalOperator::new(self.basis.clone(), diag, ModelKind::Dipole)
    }

    /// Banded form of the matter-only operator, ordered like the grid.
    pub fn banded(&self) -> Option<SymmetricBand> {
        if self.photon.is_some() {
            return None;
        }
        let dims = &self.dims;
        let strides = self.basis.strides();
        let h = self.stencil.half_width();
        let bw = h * strides[0];
        let n = self.basis.dim();
        let mut band = SymmetricBand::zeros(n, bw);
        let w = self.stencil.weights();
        for i in 0..n {
            band.add(i, i, self.potential[i]);
        }
        for (a, axis) in self.grid.axes().iter().enumerate() {
            let c = -self.kinetic[a] / (axis.spacing * axis.spacing);
            for i in 0..n {
                band.add(i, i, c * w[0]);
                let ia = (i / strides[a]) % dims[a];
                for off in 1..=h {
                    if ia + off < dims[a] {
                        band.add(i + off * strides[a], i, c * w[off]);
                    }
                }
            }
        }
        Some(band)
    }
}

impl LinearOperator for GridHamiltonian {
    fn dim(&self) -> usize {
        self.basis.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let nph = self.photon.as_ref().map_or(1, |p| p.cap + 1);
        for (p, v) in self.potential.iter().enumerate() {
            let row = p * nph;
            for k in row..row + nph {
                y[k] = v * x[k];
            }
        }
        for (a, axis) in self.grid.axes().iter().enumerate() {
            if self.kinetic[a] != 0.0 {
                self.stencil.add_second_derivative(x, y, &self.dims, a, axis.spacing, -self.kinetic[a]);
            }
        }
        if let Some(ph) = &self.photon {
            let w = ph.mode.omega;
            let lam = ph.mode.lambda;
            let ladder: Vec<f64> = (0..nph).map(|n| (n as f64 / (2.0 * w)).sqrt()).collect();
            for (p, r) in ph.dipole.iter().enumerate() {
                let row = p * nph;
                let c = w * lam * r;
                let se = if ph.self_energy { 0.5 * (lam * r) * (lam * r) } else { 0.0 };
                for n in 0..nph {
                    let k = row + n;
                    let mut acc = (w * (n as f64 + 0.5) + se) * x[k];
                    if n > 0 {
                        acc += c * ladder[n] * x[k - 1];
                    }
                    if n + 1 < nph {
                        acc += c * ladder[n + 1] * x[k + 1];
                    }
                    y[k] += acc;
                }
            }
        }
    }
}

impl Operator for GridHamiltonian {
    fn basis(&self) -> &Arc<ProductBasis> {
        &self.basis
    }

    fn descriptor(&self) -> &ModelDescriptor {
        &self.descriptor
    }
}
