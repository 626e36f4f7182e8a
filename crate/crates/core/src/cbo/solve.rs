//! Nuclear-photon eigenstates, BO-state assembly and comparisons with
//! the exact (contracted) states.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::hamiltonian::{AdiabaticHamiltonian, NuclearPhotonHamiltonian};
use super::model::ClampedModel;
use super::scan::{PotentialSurface, SurfaceScan};
use crate::eigen::{shift_invert_lowest, EigenResult};
use crate::error::{Error, Result};
use crate::state::{coordinate_expectation, AxisKind, ProductBasis, WaveFunction};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NuclearOptions {
    pub nstates: usize,
    pub tol: f64,
    pub seed: u64,
    /// Points counted as grid edge on each end of every scan axis.
    pub edge_width: usize,
    /// Largest tolerated ground-state probability in the edge region.
    pub edge_threshold: f64,
}

impl Default for NuclearOptions {
    fn default() -> Self {
        Self { nstates: 6, tol: 1e-10, seed: 0x5eed, edge_width: 2, edge_threshold: 1e-3 }
    }
}

/// Product state `χ_ij(X, q) φ_j(r; X, q)`.
#[derive(Clone, Debug)]
pub struct BOState {
    /// Electronic sheet j.
    pub electronic: usize,
    /// Nuclear-photon level i.
    pub index: usize,
    pub energy: f64,
    /// `χ_ij` on the scan grid.
    pub chi: WaveFunction,
}

impl BOState {
    /// The product state on a channel basis with `nstates` channels.
    pub fn to_channels(&self, basis: &Arc<ProductBasis>) -> Result<WaveFunction> {
        let npts = self.chi.dim();
        let ns = basis.dim() / npts.max(1);
        if ns * npts != basis.dim() || self.electronic >= ns {
            return Err(Error::BasisMismatch("channel basis does not match the scan grid".into()));
        }
        let mut amps = vec![Default::default(); basis.dim()];
        for (p, c) in self.chi.amplitudes().iter().enumerate() {
            amps[p * ns + self.electronic] = *c;
        }
        WaveFunction::new(basis.clone(), amps)
    }

    /// `⟨X⟩` over the nuclear-relative coordinate.
    pub fn bond_length(&self) -> Option<f64> {
        coordinate_expectation(&self.chi, AxisKind::NuclearRelative)
    }
}

/// Result of a nuclear-photon solve on one sheet.
#[derive(Clone, Debug)]
pub struct NuclearPhotonStates {
    pub states: Vec<BOState>,
    /// Ground-state probability in the grid-edge region.
    pub edge_weight: f64,
}

/// Lowest nuclear-photon eigenstates on a CBO sheet.
///
/// Fails with [`Error::Unbound`] when the ground density reaches the grid
/// edge beyond the configured threshold.
pub fn nuclear_photon_solve(
    model: &dyn ClampedModel,
    surface: &PotentialSurface,
    opts: &NuclearOptions,
) -> Result<NuclearPhotonStates> {
    let h = NuclearPhotonHamiltonian::new(surface, &model.nuclear_kinetic(), &model.stencil())?;
    let res = lowest_banded(&h, &h.banded(), opts.nstates, opts.tol, opts.seed)?;
    let basis = res.basis.clone();
    let states: Vec<BOState> = (0..res.len())
        .map(|i| BOState { electronic: surface.index, index: i, energy: res.values[i], chi: res.state(i) })
        .collect();
    let edge_weight = grid_edge_weight(&basis, &states[0].chi.density(), opts.edge_width);
    if edge_weight > opts.edge_threshold {
        return Err(Error::Unbound { weight: edge_weight, threshold: opts.edge_threshold });
    }
    Ok(NuclearPhotonStates { states, edge_weight })
}

/// Edge weight over every factor of a scan basis, photon points included.
fn grid_edge_weight(basis: &ProductBasis, density: &[f64], width: usize) -> f64 {
    let dims = basis.dims();
    let strides = basis.strides();
    density
        .iter()
        .enumerate()
        .filter(|(i, _)| {
            (0..dims.len()).any(|k| {
                let j = (i / strides[k]) % dims[k];
                j < width || j + width >= dims[k]
            })
        })
        .map(|(_, p)| p)
        .sum()
}

fn lowest_banded(
    h: &dyn crate::state::Operator,
    band: &crate::linalg::SymmetricBand,
    nev: usize,
    tol: f64,
    seed: u64,
) -> Result<EigenResult> {
    let p = shift_invert_lowest(h, band, nev.min(h.dim()), tol, &[], seed)?;
    Ok(EigenResult::from_pairs(h.basis().clone(), p))
}

/// Exact states of the contracted Hamiltonian with their diagnostics.
#[derive(Clone, Debug)]
pub struct ExactStates {
    pub eigen: EigenResult,
    /// Electronic edge weight of each state.
    pub electronic_edge: Vec<f64>,
    /// Nuclear edge weight of each state.
    pub nuclear_edge: Vec<f64>,
}

impl ExactStates {
    /// Largest ground-state edge probability.
    pub fn ground_edge_weight(&self) -> f64 {
        self.electronic_edge[0].max(self.nuclear_edge[0])
    }

    /// `Err(Unbound)` when the ground state leaks to a grid edge.
    pub fn check_bound(&self, threshold: f64) -> Result<()> {
        let w = self.ground_edge_weight();
        if w > threshold {
            return Err(Error::Unbound { weight: w, threshold });
        }
        Ok(())
    }
}

/// Lowest eigenstates of the contracted Hamiltonian.
pub fn exact_solve(h: &AdiabaticHamiltonian, nev: usize, tol: f64, seed: u64, edge_width: usize) -> Result<ExactStates> {
    let eigen = lowest_banded(h, &h.banded(), nev, tol, seed)?;
    let electronic_edge = eigen.vectors.iter().map(|v| h.electronic_edge_weight(v)).collect();
    let nuclear_edge = eigen.states().iter().map(|s| h.nuclear_edge_weight(s, edge_width)).collect();
    Ok(ExactStates { eigen, electronic_edge, nuclear_edge })
}

/// `|⟨Ψ_exact|Ψ_BO⟩|` for normalized states on a shared basis.
pub fn cbo_overlap(exact: &WaveFunction, bo: &WaveFunction) -> Result<f64> {
    let s = exact.inner(bo)?;
    Ok(s.norm() / (exact.norm() * bo.norm()))
}

/// `⟨X⟩` of a state on any basis with a nuclear-relative coordinate.
pub fn bond_length(psi: &WaveFunction) -> Result<f64> {
    coordinate_expectation(psi, AxisKind::NuclearRelative)
        .ok_or_else(|| Error::BasisMismatch("state has no nuclear-relative coordinate".into()))
}

/// Expands channel coefficients onto the full (nuclear, electronic,
/// Fock) grid of the model; the photon DVR is mapped back to the number
/// basis. `coeffs` are ordered like the channel basis of `scan`.
pub fn expand_channels(scan: &SurfaceScan, coeffs: &[f64]) -> Result<Vec<f64>> {
    let states = scan
        .states
        .as_ref()
        .ok_or_else(|| Error::InsufficientStates("scan did not retain electronic states".into()))?;
    let ns = scan.nstates;
    let npts = scan.grid.size();
    if coeffs.len() != npts * ns {
        return Err(Error::Dimension { expected: npts * ns, found: coeffs.len() });
    }
    let ne = states[0][0].len();
    let (nq, u) = match &scan.grid.photon {
        Some(d) => (d.len(), Some(&d.fock_to_dvr)),
        None => (1, None),
    };
    let nnuc = npts / nq;
    let mut out = vec![0.0; nnuc * ne * nq];
    for i in 0..nnuc {
        for m in 0..nq {
            let p = i * nq + m;
            for k in 0..ns {
                let c = coeffs[p * ns + k];
                if c == 0.0 {
                    continue;
                }
                for (e, phi) in states[p][k].iter().enumerate() {
                    let base = (i * ne + e) * nq;
                    match u {
                        Some(u) => {
                            for n in 0..nq {
                                out[base + n] += c * phi * u[(n, m)];
                            }
                        }
                        None => out[base] += c * phi,
                    }
                }
            }
        }
    }
    Ok(out)
}
