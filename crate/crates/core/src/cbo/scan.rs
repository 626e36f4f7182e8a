//! Electronic solves over a parametric (nuclear × photon) scan grid.

use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dvr::PhotonDvr;
use super::model::{edge_mask, ClampedModel, ParametricPoint};
use crate::eigen::shift_invert_lowest;
use crate::error::{invalid, Error, Result};
use crate::linalg::{dot, scale};
use crate::state::{Axis, AxisKind, Factor, ProductBasis};

/// Settings for the clamped electronic problem.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElectronicOptions {
    pub nstates: usize,
    pub tol: f64,
    pub seed: u64,
    /// Keep eigenvectors for every point (needed by the contracted
    /// exact Hamiltonian and by BO-state expansion).
    pub retain_states: bool,
    /// Width in points of the electronic edge region.
    pub edge_width: usize,
}

impl Default for ElectronicOptions {
    fn default() -> Self {
        Self { nstates: 4, tol: 1e-7, seed: 0x5eed, retain_states: false, edge_width: 2 }
    }
}

/// Electronic eigenpairs at one point.
#[derive(Clone, Debug)]
pub struct ElectronicStates {
    pub point: ParametricPoint,
    pub energies: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
}

/// Cold restarts tried after a failed electronic solve.
const RETRIES: u64 = 3;

/// Lowest electronic states at `point`, optionally warm-started.
///
/// Each state's sign is fixed by the model-independent convention of
/// [`crate::eigen`]; scans then re-align signs by parallel transport.
pub fn electronic_solve(
    model: &dyn ClampedModel,
    point: &ParametricPoint,
    opts: &ElectronicOptions,
    start: &[Vec<f64>],
) -> Result<ElectronicStates> {
    let wrap = |e: Error| Error::PointFailure { point: point.coordinates(), source: Box::new(e) };
    let h = model.clamped_hamiltonian(point).map_err(wrap)?;
    let band = h.banded().expect("electronic operator has no photon factor");
    // A stalled warm start (or an unlucky random block) is retried cold
    // with fresh seeds before the point is reported as failed.
    let mut attempt = shift_invert_lowest(&h, &band, opts.nstates, opts.tol, start, opts.seed);
    for k in 1..=RETRIES {
        if attempt.is_ok() {
            break;
        }
        let seed = opts.seed.wrapping_add(k.wrapping_mul(0x9e37_79b9_7f4a_7c15));
        attempt = shift_invert_lowest(&h, &band, opts.nstates, opts.tol, &[], seed);
    }
    let pairs = attempt.map_err(wrap)?;
    Ok(ElectronicStates { point: point.clone(), energies: pairs.values, states: pairs.vectors, residuals: pairs.residuals })
}

/// Tensor grid of clamped coordinates: nuclear axes followed by an
/// optional photon DVR, the last factor varying fastest.
#[derive(Clone, Debug)]
pub struct ScanGrid {
    pub nuclear: Vec<Axis>,
    pub photon: Option<PhotonDvr>,
}

impl ScanGrid {
    pub fn new(nuclear: Vec<Axis>, photon: Option<PhotonDvr>) -> Result<Self> {
        if nuclear.is_empty() {
            return Err(invalid("nuclear", "scan needs at least one nuclear axis"));
        }
        Ok(Self { nuclear, photon })
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self.nuclear.iter().map(|a| a.points).collect();
        if let Some(p) = &self.photon {
            d.push(p.len());
        }
        d
    }

    pub fn size(&self) -> usize {
        self.dims().iter().product()
    }

    pub fn strides(&self) -> Vec<usize> {
        let d = self.dims();
        let mut s = vec![1; d.len()];
        for k in (0..d.len().saturating_sub(1)).rev() {
            s[k] = s[k + 1] * d[k + 1];
        }
        s
    }

    pub fn multi_index(&self, mut i: usize) -> Vec<usize> {
        let d = self.dims();
        let mut out = vec![0; d.len()];
        for k in (0..d.len()).rev() {
            out[k] = i % d[k];
            i /= d[k];
        }
        out
    }

    pub fn point(&self, i: usize) -> ParametricPoint {
        let mi = self.multi_index(i);
        let nuclear = self.nuclear.iter().zip(&mi).map(|(a, &j)| a.coord(j)).collect();
        let photon = match &self.photon {
            Some(p) => vec![p.points[mi[self.nuclear.len()]]],
            None => vec![],
        };
        ParametricPoint { nuclear, photon }
    }

    /// Basis of functions on the scan grid.
    pub fn basis(&self) -> Result<ProductBasis> {
        ProductBasis::new(self.factors())
    }

    pub fn factors(&self) -> Vec<Factor> {
        let mut f: Vec<Factor> = self.nuclear.iter().cloned().map(Factor::Axis).collect();
        if let Some(p) = &self.photon {
            f.push(Factor::Points { kind: AxisKind::PhotonDisplacement, values: p.points.clone() });
        }
        f
    }

    pub fn labels(&self) -> Vec<&'static str> {
        let mut l: Vec<&'static str> = self.nuclear.iter().map(|a| a.kind.label()).collect();
        if self.photon.is_some() {
            l.push(AxisKind::PhotonDisplacement.label());
        }
        l
    }

    /// Number of points along the fastest axis.
    fn row_len(&self) -> usize {
        *self.dims().last().expect("non-empty")
    }
}

/// A point at which the electronic solve failed.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FailedPoint {
    pub index: usize,
    pub point: Vec<f64>,
    pub message: String,
}

/// All sheets of a scan, with optional retained electronic states.
#[derive(Clone, Debug)]
pub struct SurfaceScan {
    pub grid: Arc<ScanGrid>,
    pub nstates: usize,
    /// Electronic eigenvalues `E_j` per point.
    pub electronic: Vec<Vec<f64>>,
    /// Assembled sheets `V_j = E_j + W_nn + ½ω²q²` per point.
    pub values: Vec<Vec<f64>>,
    /// Nuclear repulsion per point.
    pub repulsion: Vec<f64>,
    pub residuals: Vec<Vec<f64>>,
    /// Electronic eigenvectors per point, sign-aligned across the grid.
    pub states: Option<Vec<Vec<Vec<f64>>>>,
    /// Dipole matrices `⟨φ_k|R|φ_l⟩` per point, row-major.
    pub dipole: Vec<Vec<f64>>,
    /// Electronic edge-region projector matrices per point, row-major.
    pub edge: Vec<Vec<f64>>,
    pub failures: Vec<FailedPoint>,
}

/// One sheet `V_j` over the scan grid.
#[derive(Clone, Debug)]
pub struct PotentialSurface {
    pub index: usize,
    pub grid: Arc<ScanGrid>,
    pub values: Vec<f64>,
    pub electronic: Vec<f64>,
    pub states: Option<Vec<Vec<f64>>>,
}

/// Assembles a sheet value from its parts.
#[inline]
pub fn assemble(e: f64, w_nn: f64, photon_potential: f64) -> f64 {
    e + w_nn + photon_potential
}

struct PointResult {
    energies: Vec<f64>,
    residuals: Vec<f64>,
    states: Vec<Vec<f64>>,
    dipole: Vec<f64>,
    edge: Vec<f64>,
    failure: Option<String>,
}

fn matrix_of(states: &[Vec<f64>], weight: &[f64]) -> Vec<f64> {
    let k = states.len();
    let mut m = vec![0.0; k * k];
    for a in 0..k {
        let wa: Vec<f64> = states[a].iter().zip(weight).map(|(x, w)| x * w).collect();
        for b in a..k {
            let v = dot(&wa, &states[b]);
            m[a * k + b] = v;
            m[b * k + a] = v;
        }
    }
    m
}

fn align(states: &mut [Vec<f64>], reference: &[Vec<f64>]) -> Vec<bool> {
    states
        .iter_mut()
        .zip(reference)
        .map(|(s, r)| {
            let flip = dot(s, r) < 0.0;
            if flip {
                scale(-1.0, s);
            }
            flip
        })
        .collect()
}

fn flip_matrix(m: &mut [f64], k: usize, flips: &[bool]) {
    for a in 0..k {
        for b in 0..k {
            if flips[a] != flips[b] {
                m[a * k + b] = -m[a * k + b];
            }
        }
    }
}

fn solve_row(model: &dyn ClampedModel, grid: &ScanGrid, row: usize, opts: &ElectronicOptions) -> Vec<PointResult> {
    let n = grid.row_len();
    let base = row * n;
    let centre = n / 2;
    let mask = edge_mask(model.electronic_grid(), opts.edge_width);
    let mut out: Vec<Option<PointResult>> = (0..n).map(|_| None).collect();
    let order: Vec<usize> = std::iter::once(centre).chain(centre + 1..n).chain((0..centre).rev()).collect();
    let mut centre_states: Vec<Vec<f64>> = vec![];
    let mut previous: Vec<Vec<f64>> = vec![];
    for &c in &order {
        if c + 1 == centre {
            previous = centre_states.clone();
        }
        let point = grid.point(base + c);
        let res = electronic_solve(model, &point, opts, &previous);
        let r = match res {
            Ok(mut s) => {
                if !previous.is_empty() {
                    align(&mut s.states, &previous);
                }
                let r = model.dipole(&point.nuclear);
                let pr = PointResult {
                    dipole: matrix_of(&s.states, &r),
                    edge: matrix_of(&s.states, &mask),
                    energies: s.energies,
                    residuals: s.residuals,
                    states: s.states,
                    failure: None,
                };
                previous = pr.states.clone();
                if c == centre {
                    centre_states = previous.clone();
                }
                pr
            }
            Err(e) => PointResult {
                energies: vec![f64::NAN; opts.nstates],
                residuals: vec![f64::NAN; opts.nstates],
                states: vec![],
                dipole: vec![f64::NAN; opts.nstates * opts.nstates],
                edge: vec![f64::NAN; opts.nstates * opts.nstates],
                failure: Some(e.to_string()),
            },
        };
        out[c] = Some(r);
    }
    out.into_iter().map(|r| r.expect("every point visited")).collect()
}

/// Solves the electronic problem at every scan point.
///
/// Rows along the fastest axis run in parallel on the current rayon
/// pool; inside a row the solve sweeps out from the centre, warm
/// starting each point from its neighbour. Results do not depend on the
/// pool size.
pub fn scan_surfaces(model: &dyn ClampedModel, grid: ScanGrid, opts: &ElectronicOptions) -> Result<SurfaceScan> {
    if opts.nstates == 0 {
        return Err(invalid("nstates", "need at least one state"));
    }
    let n_rows = grid.size() / grid.row_len();
    let rows: Vec<Vec<PointResult>> = (0..n_rows).into_par_iter().map(|r| solve_row(model, &grid, r, opts)).collect();
    let row_len = grid.row_len();
    let centre = row_len / 2;
    let k = opts.nstates;
    let mut points: Vec<PointResult> = Vec::with_capacity(grid.size());
    let mut reference: Vec<Vec<f64>> = vec![];
    for mut row in rows {
        // Parallel transport between row centres fixes the remaining
        // per-row sign freedom.
        if !reference.is_empty() && row[centre].failure.is_none() {
            let mut c = row[centre].states.clone();
            let flips = align(&mut c, &reference);
            if flips.iter().any(|&f| f) {
                for p in row.iter_mut().filter(|p| p.failure.is_none()) {
                    for (s, &f) in p.states.iter_mut().zip(&flips) {
                        if f {
                            scale(-1.0, s);
                        }
                    }
                    flip_matrix(&mut p.dipole, k, &flips);
                    flip_matrix(&mut p.edge, k, &flips);
                }
            }
        }
        if row[centre].failure.is_none() {
            reference = row[centre].states.clone();
        }
        points.extend(row);
    }
    let mut scan = SurfaceScan {
        nstates: k,
        electronic: Vec::with_capacity(points.len()),
        values: Vec::with_capacity(points.len()),
        repulsion: Vec::with_capacity(points.len()),
        residuals: Vec::with_capacity(points.len()),
        states: opts.retain_states.then(Vec::new),
        dipole: Vec::with_capacity(points.len()),
        edge: Vec::with_capacity(points.len()),
        failures: vec![],
        grid: Arc::new(grid),
    };
    let nn = scan.grid.nuclear.len();
    for (i, p) in points.into_iter().enumerate() {
        let pt = scan.grid.point(i);
        let w = model.nuclear_repulsion(&pt.nuclear);
        let vph = match &scan.grid.photon {
            Some(d) => d.potential(scan.grid.multi_index(i)[nn]),
            None => 0.0,
        };
        if let Some(msg) = p.failure {
            scan.failures.push(FailedPoint { index: i, point: pt.coordinates(), message: msg });
        }
        scan.values.push(p.energies.iter().map(|&e| assemble(e, w, vph)).collect());
        scan.electronic.push(p.energies);
        scan.repulsion.push(w);
        scan.residuals.push(p.residuals);
        scan.dipole.push(p.dipole);
        scan.edge.push(p.edge);
        if let Some(s) = scan.states.as_mut() {
            s.push(p.states);
        }
    }
    Ok(scan)
}

/// Convenience wrapper returning the single sheet `j`.
pub fn scan_surface(model: &dyn ClampedModel, grid: ScanGrid, j: usize, opts: &ElectronicOptions) -> Result<PotentialSurface> {
    let mut o = opts.clone();
    o.nstates = o.nstates.max(j + 1);
    scan_surfaces(model, grid, &o)?.surface(j)
}

impl SurfaceScan {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn surface(&self, j: usize) -> Result<PotentialSurface> {
        if j >= self.nstates {
            return Err(Error::InsufficientStates(format!("sheet {j} requested from a {}-state scan", self.nstates)));
        }
        Ok(PotentialSurface {
            index: j,
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v[j]).collect(),
            electronic: self.electronic.iter().map(|v| v[j]).collect(),
            states: self.states.as_ref().map(|s| s.iter().map(|p| p.get(j).cloned().unwrap_or_default()).collect()),
        })
    }

    /// Writes one record per point: coordinates then `V_0..V_{n−1}`.
    pub fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        let mut header: Vec<String> = self.grid.labels().iter().map(|s| s.to_string()).collect();
        header.extend((0..self.nstates).map(|j| format!("V{j}")));
        writeln!(out, "{}", header.join(","))?;
        for (i, v) in self.values.iter().enumerate() {
            let mut cols: Vec<String> = self.grid.point(i).coordinates().iter().map(|c| format!("{c:.10}")).collect();
            cols.extend(v.iter().map(|x| format!("{x:.12e}")));
            writeln!(out, "{}", cols.join(","))?;
        }
        Ok(())
    }
}
