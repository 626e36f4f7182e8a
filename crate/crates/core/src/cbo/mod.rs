//! Cavity Born-Oppenheimer workflow.
//!
//! The electronic problem is solved at clamped nuclear coordinates and
//! photon displacements, giving sheets `V_j(X, q)`. Nuclei and photons
//! then move on a single sheet, or, for the exact reference, on all
//! retained sheets at once with the full non-adiabatic coupling.

mod ci;
mod dvr;
mod hamiltonian;
mod model;
mod scan;
mod solve;

pub use ci::{locate_ci, CiSearch, CI_THRESHOLD};
pub use dvr::PhotonDvr;
pub use hamiltonian::{sheet_dipole, AdiabaticHamiltonian, ChannelOperator, NuclearPhotonHamiltonian};
pub use model::{edge_mask, ClampedModel, DimerModel, ParametricPoint, ShinMetiuModel};
pub use scan::{
    assemble, electronic_solve, scan_surface, scan_surfaces, ElectronicOptions, ElectronicStates, FailedPoint,
    PotentialSurface, ScanGrid, SurfaceScan,
};
pub use solve::{
    bond_length, cbo_overlap, exact_solve, expand_channels, nuclear_photon_solve, BOState, ExactStates,
    NuclearOptions, NuclearPhotonStates,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::dense_diag;
    use crate::models::{build_dimer, DimerParams};
    use crate::state::{expectation, Axis, AxisKind, Grid, LinearOperator, Operator, Stencil};

    fn tiny_grid() -> Grid {
        Grid::new(vec![
            Axis::new(AxisKind::NuclearRelative, 8, 0.2, 1.0).unwrap(),
            Axis::centered(AxisKind::ElectronRelative, 9, 0.8).unwrap(),
            Axis::centered(AxisKind::ElectronNuclearCenter, 9, 0.6).unwrap(),
        ])
        .unwrap()
    }

    fn tiny_params(ratio: f64, cap: usize) -> DimerParams {
        // A light reduced mass keeps the nuclear problem well resolved on
        // a coarse grid.
        DimerParams { m1: 20.0, m2: 20.0, omega: 0.05, photon_cap: cap, ..Default::default() }.with_g_over_omega(ratio)
    }

    fn scan_for(model: &DimerModel, cap: usize, nstates: usize) -> SurfaceScan {
        let grid = ScanGrid::new(model.nuclear_axes(), Some(PhotonDvr::new(model.params.omega, cap).unwrap())).unwrap();
        let opts = ElectronicOptions { nstates, tol: 1e-11, retain_states: true, ..Default::default() };
        scan_surfaces(model, grid, &opts).unwrap()
    }

    #[test]
    fn complete_channel_basis_reproduces_grid_hamiltonian() {
        let p = tiny_params(0.8, 3);
        let grid = Grid::new(vec![
            Axis::new(AxisKind::NuclearRelative, 6, 0.25, 1.0).unwrap(),
            Axis::centered(AxisKind::ElectronRelative, 7, 1.0).unwrap(),
            Axis::centered(AxisKind::ElectronNuclearCenter, 7, 0.7).unwrap(),
        ])
        .unwrap();
        let model = DimerModel::new(p.clone(), &grid, true).unwrap();
        let scan = scan_for(&model, 3, 49);
        let h = AdiabaticHamiltonian::new(&model, &scan).unwrap();
        let full = build_dimer(&p, &grid).unwrap();
        let want = dense_diag(&full).unwrap();
        let got = exact_solve(&h, 5, 1e-10, 1, 1).unwrap();
        for k in 0..5 {
            assert!((got.eigen.values[k] - want.values[k]).abs() < 1e-9, "{k}: {} vs {}", got.eigen.values[k], want.values[k]);
        }
        // The expanded ground state is the grid ground state.
        let psi = expand_channels(&scan, &got.eigen.vectors[0]).unwrap();
        let s: f64 = psi.iter().zip(&want.vectors[0]).map(|(a, b)| a * b).sum();
        assert!((s.abs() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn sheets_are_q_independent_without_coupling() {
        let model = DimerModel::new(tiny_params(0.0, 6), &tiny_grid(), true).unwrap();
        let scan = scan_for(&model, 6, 3);
        let nq = 7;
        for p in 0..scan.len() {
            let row = p / nq * nq;
            for j in 0..3 {
                assert!((scan.electronic[p][j] - scan.electronic[row][j]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn assembly_identity_is_exact() {
        let model = DimerModel::new(tiny_params(1.2, 4), &tiny_grid(), true).unwrap();
        let scan = scan_for(&model, 4, 2);
        let d = scan.grid.photon.as_ref().unwrap();
        for p in 0..scan.len() {
            let m = scan.grid.multi_index(p)[1];
            let w = model.nuclear_repulsion(&scan.grid.point(p).nuclear);
            for j in 0..2 {
                assert_eq!(scan.values[p][j], assemble(scan.electronic[p][j], w, d.potential(m)));
            }
            assert!(scan.values[p][0] <= scan.values[p][1]);
        }
    }

    #[test]
    fn hellmann_feynman_photon_derivative() {
        let p = tiny_params(1.0, 4);
        let model = DimerModel::new(p.clone(), &tiny_grid(), true).unwrap();
        let opts = ElectronicOptions { nstates: 1, tol: 1e-12, ..Default::default() };
        let (x, q, h) = (1.6, 2.0, 1e-3);
        let e = |q: f64| electronic_solve(&model, &ParametricPoint::new(vec![x], vec![q]), &opts, &[]).unwrap();
        let fd = (e(q + h).energies[0] - e(q - h).energies[0]) / (2.0 * h);
        let s = e(q);
        let r = model.dipole(&[x]);
        let mean_r: f64 = s.states[0].iter().zip(&r).map(|(c, r)| c * c * r).sum();
        // With the ½ω²q² term of the sheet added on both sides.
        let hf = p.omega * p.lambda * mean_r + p.omega * p.omega * q;
        assert!((fd + p.omega * p.omega * q - hf).abs() < 1e-5);
    }

    #[test]
    fn harmonic_sheet_gives_the_photon_ladder() {
        let omega = 0.04;
        let grid = ScanGrid::new(
            vec![Axis::new(AxisKind::NuclearRelative, 3, 0.1, 1.0).unwrap()],
            Some(PhotonDvr::new(omega, 30).unwrap()),
        )
        .unwrap();
        let d = grid.photon.clone().unwrap();
        let values: Vec<f64> = (0..grid.size()).map(|p| d.potential(grid.multi_index(p)[1])).collect();
        let surface = PotentialSurface {
            index: 0,
            grid: std::sync::Arc::new(grid),
            electronic: vec![0.0; values.len()],
            values,
            states: None,
        };
        let h = NuclearPhotonHamiltonian::new(&surface, &[0.0], &Stencil::new(2).unwrap()).unwrap();
        let e = dense_diag(&h).unwrap().values;
        for n in 0..6 {
            for k in 0..3 {
                assert!((e[3 * n + k] - omega * (n as f64 + 0.5)).abs() < 1e-8);
            }
        }
        let _ = h.dim();
    }

    #[test]
    fn bo_ground_state_is_variational_and_close() {
        let p = tiny_params(1.2, 5);
        let model = DimerModel::new(p, &tiny_grid(), true).unwrap();
        let scan = scan_for(&model, 5, 4);
        let h = AdiabaticHamiltonian::new(&model, &scan).unwrap();
        let exact = exact_solve(&h, 3, 1e-10, 2, 1).unwrap();
        let bo = nuclear_photon_solve(&model, &scan.surface(0).unwrap(), &NuclearOptions { edge_threshold: 1.0, ..Default::default() })
            .unwrap();
        let psi_bo = bo.states[0].to_channels(h.basis()).unwrap();
        let e_bo = expectation(&h, &psi_bo).unwrap();
        assert!(e_bo >= exact.eigen.values[0] - 1e-8);
        let ov = cbo_overlap(&exact.eigen.state(0), &psi_bo).unwrap();
        assert!(ov > 0.99 && ov <= 1.0 + 1e-12, "overlap {ov}");
        assert!((cbo_overlap(&psi_bo, &psi_bo).unwrap() - 1.0).abs() < 1e-12);
        let x = bond_length(&exact.eigen.state(0)).unwrap();
        assert!(x > 1.0 && x < 2.4);
    }

    #[test]
    fn scan_is_independent_of_pool_size() {
        let model = DimerModel::new(tiny_params(0.9, 3), &tiny_grid(), true).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| scan_for(&model, 3, 3))
        };
        let (a, b) = (run(1), run(3));
        assert_eq!(a.values, b.values);
        assert_eq!(a.states, b.states);
    }
}
