use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{invalid, Result};

/// Discrete-variable representation of one photon mode: the eigenbasis
/// of the truncated displacement operator `q̂ = (a + a†)/sqrt(2ω)`.
///
/// Because the transformation from the Fock basis is unitary, the
/// photon Hamiltonian `ω(n + ½)` in this basis is exactly the truncated
/// Fock-space one.
#[derive(Clone, Debug)]
pub struct PhotonDvr {
    pub omega: f64,
    /// Displacement eigenvalues `q_m`, ascending.
    pub points: Vec<f64>,
    /// `fock_to_dvr[(n, m)] = ⟨n|q_m⟩`.
    pub fock_to_dvr: DMatrix<f64>,
    /// `½p̂² + ½ω²q̂²` in the DVR basis.
    pub hamiltonian: DMatrix<f64>,
}

impl PhotonDvr {
    pub fn new(omega: f64, cap: usize) -> Result<Self> {
        if !(omega > 0.0) {
            return Err(invalid("omega", "mode frequency must be positive"));
        }
        let n = cap + 1;
        let mut q = DMatrix::zeros(n, n);
        for k in 1..n {
            let v = (k as f64 / (2.0 * omega)).sqrt();
            q[(k, k - 1)] = v;
            q[(k - 1, k)] = v;
        }
        let eig = SymmetricEigen::new(q);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let points: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut u = DMatrix::zeros(n, n);
        for (m, &i) in order.iter().enumerate() {
            let col = eig.eigenvectors.column(i);
            // The vacuum component never vanishes for a Jacobi matrix.
            let s = if col[0] < 0.0 { -1.0 } else { 1.0 };
            for k in 0..n {
                u[(k, m)] = s * col[k];
            }
        }
        let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |k, _| omega * (k as f64 + 0.5)));
        let hamiltonian = u.transpose() * diag * &u;
        Ok(Self { omega, points, fock_to_dvr: u, hamiltonian })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Photon kinetic part: the DVR Hamiltonian minus `½ω²q_m²`.
    pub fn kinetic(&self) -> DMatrix<f64> {
        let mut k = self.hamiltonian.clone();
        for (m, q) in self.points.iter().enumerate() {
            k[(m, m)] -= 0.5 * self.omega * self.omega * q * q;
        }
        k
    }

    pub fn potential(&self, m: usize) -> f64 {
        0.5 * self.omega * self.omega * self.points[m] * self.points[m]
    }
}
