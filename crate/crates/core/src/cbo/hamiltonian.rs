//! Nuclear-photon Hamiltonians on a scan grid: single-sheet (CBO) and
//! all-sheet contracted (exact within the retained electronic states).

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::model::ClampedModel;
use super::scan::{PotentialSurface, ScanGrid, SurfaceScan};
use crate::error::{Error, Result};
use crate::linalg::{dot, SymmetricBand};
use crate::state::{
    DiagonalOperator, Factor, LinearOperator, ModelDescriptor, ModelKind, Operator, ProductBasis, Stencil,
    WaveFunction,
};

/// Kinetic couplings between scan points: a per-point diagonal and the
/// upper-triangle off-diagonal list `(p, q, c)` with `p < q`.
fn kinetic_pattern(
    grid: &ScanGrid,
    kinetic: &[f64],
    stencil: &Stencil,
    photon: Option<&DMatrix<f64>>,
) -> (Vec<f64>, Vec<(usize, usize, f64)>) {
    let dims = grid.dims();
    let strides = grid.strides();
    let n = grid.size();
    let w = stencil.weights();
    let h = stencil.half_width();
    let mut diag = vec![0.0; n];
    let mut off = Vec::new();
    for p in 0..n {
        let mi = grid.multi_index(p);
        for (a, axis) in grid.nuclear.iter().enumerate() {
            let c = -kinetic[a] / (axis.spacing * axis.spacing);
            diag[p] += c * w[0];
            for o in 1..=h {
                if mi[a] + o < dims[a] {
                    off.push((p, p + o * strides[a], c * w[o]));
                }
            }
        }
        if let Some(k) = photon {
            let m = mi[grid.nuclear.len()];
            diag[p] += k[(m, m)];
            for m2 in m + 1..dims[grid.nuclear.len()] {
                off.push((p, p + (m2 - m), k[(m, m2)]));
            }
        }
    }
    (diag, off)
}

/// Symmetric operator made of `ns × ns` blocks on a point lattice.
#[derive(Clone, Debug)]
struct BlockOperator {
    ns: usize,
    diag: Vec<Vec<f64>>,
    off: Vec<(usize, usize, Vec<f64>)>,
}

impl BlockOperator {
    fn dim(&self) -> usize {
        self.diag.len() * self.ns
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let ns = self.ns;
        y.par_chunks_mut(ns).zip(x.par_chunks(ns)).zip(&self.diag).for_each(|((yp, xp), d)| {
            for a in 0..ns {
                yp[a] = (0..ns).map(|b| d[a * ns + b] * xp[b]).sum();
            }
        });
        for (p, q, blk) in &self.off {
            let (p, q) = (p * ns, q * ns);
            for a in 0..ns {
                let mut acc = 0.0;
                let xa = x[p + a];
                for b in 0..ns {
                    let v = blk[a * ns + b];
                    acc += v * x[q + b];
                    y[q + b] += v * xa;
                }
                y[p + a] += acc;
            }
        }
    }

    fn banded(&self) -> SymmetricBand {
        let ns = self.ns;
        let bw = self.off.iter().map(|(p, q, _)| (q - p) * ns + ns - 1).max().unwrap_or(ns - 1).max(ns - 1);
        let mut band = SymmetricBand::zeros(self.dim(), bw);
        for (p, d) in self.diag.iter().enumerate() {
            for a in 0..ns {
                for b in 0..=a {
                    band.add(p * ns + a, p * ns + b, d[a * ns + b]);
                }
            }
        }
        for (p, q, blk) in &self.off {
            for a in 0..ns {
                for b in 0..ns {
                    band.add(q * ns + b, p * ns + a, blk[a * ns + b]);
                }
            }
        }
        band
    }
}

/// Nuclei and photon moving on one CBO sheet:
/// `Σ_a −c_a ∂²_a + ½p̂² + V_j(X, q)`.
#[derive(Clone, Debug)]
pub struct NuclearPhotonHamiltonian {
    basis: Arc<ProductBasis>,
    descriptor: ModelDescriptor,
    op: BlockOperator,
}

impl NuclearPhotonHamiltonian {
    pub fn new(surface: &PotentialSurface, kinetic: &[f64], stencil: &Stencil) -> Result<Self> {
        let grid = &surface.grid;
        if kinetic.len() != grid.nuclear.len() {
            return Err(Error::Dimension { expected: grid.nuclear.len(), found: kinetic.len() });
        }
        if surface.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid("surface has failed points".into()));
        }
        let kp = grid.photon.as_ref().map(|d| d.kinetic());
        let (kd, off) = kinetic_pattern(grid, kinetic, stencil, kp.as_ref());
        let diag = kd.iter().zip(&surface.values).map(|(k, v)| vec![k + v]).collect();
        let off = off.into_iter().map(|(p, q, c)| (p, q, vec![c])).collect();
        Ok(Self {
            basis: Arc::new(grid.basis()?),
            descriptor: ModelDescriptor::new(ModelKind::NuclearPhoton, vec![]),
            op: BlockOperator { ns: 1, diag, off },
        })
    }

    pub fn banded(&self) -> SymmetricBand {
        self.op.banded()
    }
}

impl LinearOperator for NuclearPhotonHamiltonian {
    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.op.apply(x, y)
    }
}

impl Operator for NuclearPhotonHamiltonian {
    fn basis(&self) -> &Arc<ProductBasis> {
        &self.basis
    }

    fn descriptor(&self) -> &ModelDescriptor {
        &self.descriptor
    }
}

/// The full Hamiltonian in the adiabatic channel basis
/// `|scan point⟩ ⊗ |φ_k(point)⟩`, k < nstates.
///
/// Kinetic operators couple neighbouring points through the overlaps
/// `⟨φ_k(p)|φ_l(p')⟩`, which carries every non-adiabatic effect. With
/// all electronic states retained this is a unitary transform of the
/// grid Hamiltonian; with a few it is a controlled truncation.
#[derive(Clone, Debug)]
pub struct AdiabaticHamiltonian {
    basis: Arc<ProductBasis>,
    descriptor: ModelDescriptor,
    grid: Arc<ScanGrid>,
    op: BlockOperator,
    dipole: Vec<Vec<f64>>,
    edge: Vec<Vec<f64>>,
}

impl AdiabaticHamiltonian {
    pub fn new(model: &dyn ClampedModel, scan: &SurfaceScan) -> Result<Self> {
        let states = scan
            .states
            .as_ref()
            .ok_or_else(|| Error::InsufficientStates("scan did not retain electronic states".into()))?;
        if !scan.is_complete() {
            let f = &scan.failures[0];
            return Err(Error::InvalidGrid(format!("scan has {} failed points, first at {:?}", scan.failures.len(), f.point)));
        }
        let grid = scan.grid.clone();
        let ns = scan.nstates;
        let kfull = grid.photon.as_ref().map(|d| d.hamiltonian.clone());
        let (kd, off) = kinetic_pattern(&grid, &model.nuclear_kinetic(), &model.stencil(), kfull.as_ref());
        let diag = (0..grid.size())
            .map(|p| {
                let mut d = vec![0.0; ns * ns];
                for k in 0..ns {
                    d[k * ns + k] = scan.electronic[p][k] + scan.repulsion[p] + kd[p];
                }
                d
            })
            .collect();
        let off = off
            .into_par_iter()
            .map(|(p, q, c)| {
                let mut blk = vec![0.0; ns * ns];
                for a in 0..ns {
                    for b in 0..ns {
                        blk[a * ns + b] = c * dot(&states[p][a], &states[q][b]);
                    }
                }
                (p, q, blk)
            })
            .collect();
        let mut factors = grid.factors();
        factors.push(Factor::Channels(ns));
        let modes = model.mode().into_iter().collect();
        Ok(Self {
            basis: Arc::new(ProductBasis::new(factors)?),
            descriptor: ModelDescriptor::new(ModelKind::Contracted, modes),
            grid,
            op: BlockOperator { ns, diag, off },
            dipole: scan.dipole.clone(),
            edge: scan.edge.clone(),
        })
    }

    pub fn nstates(&self) -> usize {
        self.op.ns
    }

    pub fn grid(&self) -> &Arc<ScanGrid> {
        &self.grid
    }

    pub fn banded(&self) -> SymmetricBand {
        self.op.banded()
    }

    /// Total dipole as a block-diagonal operator on the channel basis.
    pub fn dipole_operator(&self) -> ChannelOperator {
        ChannelOperator::new(self.basis.clone(), self.op.ns, self.dipole.clone())
    }

    /// Probability of finding the electrons in the edge region of their
    /// grid.
    pub fn electronic_edge_weight(&self, psi: &[f64]) -> f64 {
        let ns = self.op.ns;
        psi.chunks(ns)
            .zip(&self.edge)
            .map(|(c, e)| {
                let mut acc = 0.0;
                for a in 0..ns {
                    for b in 0..ns {
                        acc += c[a] * e[a * ns + b] * c[b];
                    }
                }
                acc
            })
            .sum()
    }

    /// Probability within `width` points of a nuclear grid end.
    pub fn nuclear_edge_weight(&self, psi: &WaveFunction, width: usize) -> f64 {
        self.basis.edge_weight(&psi.density(), width)
    }
}

impl LinearOperator for AdiabaticHamiltonian {
    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.op.apply(x, y)
    }
}

impl Operator for AdiabaticHamiltonian {
    fn basis(&self) -> &Arc<ProductBasis> {
        &self.basis
    }

    fn descriptor(&self) -> &ModelDescriptor {
        &self.descriptor
    }
}

/// Block-diagonal electronic operator on a channel basis.
#[derive(Clone, Debug)]
pub struct ChannelOperator {
    basis: Arc<ProductBasis>,
    descriptor: ModelDescriptor,
    op: BlockOperator,
}

impl ChannelOperator {
    fn new(basis: Arc<ProductBasis>, ns: usize, blocks: Vec<Vec<f64>>) -> Self {
        Self {
            basis,
            descriptor: ModelDescriptor::new(ModelKind::Dipole, vec![]),
            op: BlockOperator { ns, diag: blocks, off: vec![] },
        }
    }
}

impl LinearOperator for ChannelOperator {
    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.op.apply(x, y)
    }
}

impl Operator for ChannelOperator {
    fn basis(&self) -> &Arc<ProductBasis> {
        &self.basis
    }

    fn descriptor(&self) -> &ModelDescriptor {
        &self.descriptor
    }
}

/// Dipole matrix as a diagonal operator on the scan grid for one sheet.
pub fn sheet_dipole(scan: &SurfaceScan, j: usize) -> Result<DiagonalOperator> {
    let k = scan.nstates;
    let d = scan.dipole.iter().map(|m| m[j * k + j]).collect();
    DiagonalOperator::new(Arc::new(scan.grid.basis()?), d, ModelKind::Dipole)
}
