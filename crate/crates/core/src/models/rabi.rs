//! Extended Rabi model
//!
//! ```text
//! H = −t₀σ_x + ω a†a + g (a† + a) σ_z + j(t)(a† + a) + v(t) σ_z
//! ```
//!
//! on the basis (site ⊗ Fock), site-major. The coupling is keyed on
//! g = sqrt(ω/2)·λ.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::state::{
    CavityMode, DiagonalOperator, Factor, FockTruncation, LinearOperator, ModelDescriptor, ModelKind, Operator,
    ProductBasis,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RabiParams {
    pub t0: f64,
    pub omega: f64,
    /// Coupling g = sqrt(ω/2)·λ.
    pub g: f64,
    pub photon_cap: usize,
}

impl Default for RabiParams {
    fn default() -> Self {
        Self { t0: 2.5, omega: 5.0, g: 0.0, photon_cap: 16 }
    }
}

impl RabiParams {
    pub fn lambda(&self) -> f64 {
        self.g / (0.5 * self.omega).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0) {
            return Err(invalid("omega", "mode frequency must be positive"));
        }
        if !self.t0.is_finite() || !self.g.is_finite() {
            return Err(invalid("t0/g", "must be finite"));
        }
        Ok(())
    }
}

/// Rabi Hamiltonian with the current values of the external signals.
#[derive(Clone, Debug)]
pub struct RabiHamiltonian {
    basis: Arc<ProductBasis>,
    descriptor: ModelDescriptor,
    params: RabiParams,
    /// External potential v(t) on σ_z.
    pub v: f64,
    /// External dipole j(t) on (a† + a).
    pub j: f64,
    ladder: Vec<f64>,
}

pub fn build_rabi(p: &RabiParams) -> Result<RabiHamiltonian> {
    p.validate()?;
    let basis = Arc::new(ProductBasis::new(vec![
        Factor::TwoLevel,
        Factor::Fock(FockTruncation::single(p.photon_cap)),
    ])?);
    let mode = CavityMode::new(p.omega, p.lambda());
    Ok(RabiHamiltonian {
        basis,
        descriptor: ModelDescriptor::new(ModelKind::Rabi, vec![mode]),
        params: p.clone(),
        v: 0.0,
        j: 0.0,
        ladder: (0..=p.photon_cap).map(|n| (n as f64).sqrt()).collect(),
    })
}

impl RabiHamiltonian {
    pub fn params(&self) -> &RabiParams {
        &self.params
    }

    pub fn with_drive(mut self, v: f64, j: f64) -> Self {
        self.v = v;
        self.j = j;
        self
    }

    pub fn set_drive(&mut self, v: f64, j: f64) {
        self.v = v;
        self.j = j;
    }

    fn nph(&self) -> usize {
        self.params.photon_cap + 1
    }

    /// σ_z on the site factor; this is also the (unit) dipole.
    pub fn sigma_z(&self) -> DiagonalOperator {
        let n = self.nph();
        let d = (0..2 * n).map(|k| if k < n { 1.0 } else { -1.0 }).collect();
        DiagonalOperator::new(self.basis.clone(), d, ModelKind::Dipole).expect("matching dimension")
    }

    pub fn dipole_operator(&self) -> DiagonalOperator {
        self.sigma_z()
    }

    /// `⟨σ_x⟩` of a real or complex amplitude vector.
    pub fn sigma_x_expectation(&self, psi: &[crate::state::C64]) -> f64 {
        let n = self.nph();
        (0..n).map(|k| 2.0 * (psi[k].conj() * psi[n + k]).re).sum()
    }

    pub fn sigma_z_expectation(&self, psi: &[crate::state::C64]) -> f64 {
        let n = self.nph();
        (0..n).map(|k| psi[k].norm_sqr() - psi[n + k].norm_sqr()).sum()
    }

    /// `⟨(a + a†) σ_x⟩`.
    pub fn field_sigma_x_expectation(&self, psi: &[crate::state::C64]) -> f64 {
        let n = self.nph();
        let mut acc = 0.0;
        for k in 0..n - 1 {
            let l = self.ladder[k + 1];
            // ⟨s1,k| (a+a†) σ_x |ψ⟩ pairs photon k with k+1 across sites.
            acc += 2.0 * l * ((psi[k].conj() * psi[n + k + 1]).re + (psi[n + k].conj() * psi[k + 1]).re);
        }
        acc
    }

    /// Photon number distribution.
    pub fn photon_distribution(&self, psi: &[crate::state::C64]) -> Vec<f64> {
        let n = self.nph();
        (0..n).map(|k| psi[k].norm_sqr() + psi[n + k].norm_sqr()).collect()
    }
}

impl LinearOperator for RabiHamiltonian {
    fn dim(&self) -> usize {
        self.basis.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.nph();
        let p = &self.params;
        for s in 0..2 {
            let sz = if s == 0 { 1.0 } else { -1.0 };
            let off = s * n;
            let other = (1 - s) * n;
            let field = p.g * sz + self.j;
            for k in 0..n {
                let mut acc = (p.omega * k as f64 + self.v * sz) * x[off + k] - p.t0 * x[other + k];
                if k > 0 {
                    acc += field * self.ladder[k] * x[off + k - 1];
                }
                if k + 1 < n {
                    acc += field * self.ladder[k + 1] * x[off + k + 1];
                }
                y[off + k] = acc;
            }
        }
    }
}

impl Operator for RabiHamiltonian {
    fn basis(&self) -> &Arc<ProductBasis> {
        &self.basis
    }

    fn descriptor(&self) -> &ModelDescriptor {
        &self.descriptor
    }
}
