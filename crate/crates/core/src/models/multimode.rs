//! Two-level emitter at position `x` in a one-dimensional cavity of
//! length `V` with `M` modes,
//!
//! ```text
//! H = −t₀σ_x + Σ_α ω_α a†_α a_α + Σ_α ω_α λ_α(x) q̂_α d σ_z
//! ω_α = c k_α,  k_α = απ/V,  λ_α(x) = sqrt(2/(ε0 V)) sin(k_α x)
//! ```
//!
//! truncated to at most two photons in distinct modes.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{EPSILON_0, SPEED_OF_LIGHT};
use crate::error::{invalid, Result};
use crate::state::{
    CavityMode, DiagonalOperator, Factor, FockTruncation, LinearOperator, ModelDescriptor, ModelKind, Operator,
    ProductBasis,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultimodeParams {
    pub t0: f64,
    pub d_eg: f64,
    pub modes: usize,
    /// Cavity length V (bohr).
    pub length: f64,
    /// Emitter position; `None` means the cavity centre.
    pub position: Option<f64>,
}

impl Default for MultimodeParams {
    fn default() -> Self {
        Self { t0: 0.197, d_eg: 1.034, modes: 400, length: length_for_coupling(0.0103), position: None }
    }
}

/// Cavity length for which the antinode coupling `sqrt(2/(ε0 V))` equals `lambda`.
pub fn length_for_coupling(lambda: f64) -> f64 {
    2.0 / (EPSILON_0 * lambda * lambda)
}

impl MultimodeParams {
    pub fn validate(&self) -> Result<()> {
        if self.modes == 0 {
            return Err(invalid("modes", "need at least one mode"));
        }
        if !(self.length > 0.0) {
            return Err(invalid("length", "cavity length must be positive"));
        }
        let x = self.x();
        if !(x > 0.0 && x < self.length) {
            return Err(invalid("position", "emitter must sit inside the cavity"));
        }
        Ok(())
    }

    pub fn x(&self) -> f64 {
        self.position.unwrap_or(0.5 * self.length)
    }

    /// Wave number of mode α (1-based).
    pub fn k(&self, alpha: usize) -> f64 {
        alpha as f64 * std::f64::consts::PI / self.length
    }

    pub fn omega(&self, alpha: usize) -> f64 {
        SPEED_OF_LIGHT * self.k(alpha)
    }

    /// Mode function coupling λ_α at position `x`.
    pub fn lambda_at(&self, alpha: usize, x: f64) -> f64 {
        (2.0 / (EPSILON_0 * self.length)).sqrt() * (self.k(alpha) * x).sin()
    }

    /// Coupling at the emitter; at the centre, even modes vanish exactly.
    pub fn lambda(&self, alpha: usize) -> f64 {
        if self.position.is_none() {
            let amp = (2.0 / (EPSILON_0 * self.length)).sqrt();
            return match alpha % 4 {
                1 => amp,
                3 => -amp,
                _ => 0.0,
            };
        }
        self.lambda_at(alpha, self.x())
    }

    /// Dimension with the full two-photon sector.
    pub fn dimension(&self) -> usize {
        let m = self.modes;
        2 * (1 + m + m * (m - 1) / 2)
    }

    /// Rescaled cavity: `modes` modes over a proportionally shorter length,
    /// keeping the mode spacing relative to the emitter unchanged in shape.
    pub fn rescaled(&self, modes: usize) -> Self {
        let f = modes as f64 / self.modes as f64;
        Self { modes, length: self.length * f, position: self.position.map(|x| x * f), ..self.clone() }
    }
}

/// Multimode Hamiltonian over a chosen subset of modes.
#[derive(Clone, Debug)]
pub struct MultimodeHamiltonian {
    basis: Arc<ProductBasis>,
    descriptor: ModelDescriptor,
    params: MultimodeParams,
    /// 1-based mode numbers kept in the basis.
    pub mode_numbers: Vec<usize>,
    pub omegas: Vec<f64>,
    /// Mode couplings λ_α at the emitter.
    pub lambdas: Vec<f64>,
    /// Ladder amplitudes f_α = ω_α λ_α d / sqrt(2ω_α).
    amps: Vec<f64>,
    sector: FockTruncation,
}

/// All `M` modes on (site ⊗ two-photon sector).
pub fn build_multimode(p: &MultimodeParams) -> Result<MultimodeHamiltonian> {
    let modes: Vec<usize> = (1..=p.modes).collect();
    MultimodeHamiltonian::with_modes(p, modes)
}

impl MultimodeHamiltonian {
    pub fn with_modes(p: &MultimodeParams, modes: Vec<usize>) -> Result<Self> {
        p.validate()?;
        if modes.is_empty() || modes.iter().any(|&a| a == 0 || a > p.modes) {
            return Err(invalid("modes", "mode numbers must lie in 1..=M"));
        }
        let sector = FockTruncation::total_excitation(2, modes.len())?;
        let basis = Arc::new(ProductBasis::new(vec![Factor::TwoLevel, Factor::Fock(sector.clone())])?);
        let omegas: Vec<f64> = modes.iter().map(|&a| p.omega(a)).collect();
        let lambdas: Vec<f64> = modes.iter().map(|&a| p.lambda(a)).collect();
        let amps = omegas.iter().zip(&lambdas).map(|(w, l)| w * l * p.d_eg / (2.0 * w).sqrt()).collect();
        let cavity = omegas.iter().zip(&lambdas).map(|(&w, &l)| CavityMode::new(w, l)).collect();
        Ok(Self {
            basis,
            descriptor: ModelDescriptor::new(ModelKind::Multimode, cavity),
            params: p.clone(),
            mode_numbers: modes,
            omegas,
            lambdas,
            amps,
            sector,
        })
    }

    /// Only the modes that couple to the emitter. Uncoupled modes stay in
    /// their vacuum for any initial state without photons in them.
    pub fn coupled(p: &MultimodeParams) -> Result<Self> {
        let scale = (2.0 / (EPSILON_0 * p.length)).sqrt();
        let modes = (1..=p.modes).filter(|&a| p.lambda(a).abs() > 1e-12 * scale).collect();
        Self::with_modes(p, modes)
    }

    pub fn params(&self) -> &MultimodeParams {
        &self.params
    }

    pub fn sector(&self) -> &FockTruncation {
        &self.sector
    }

    pub fn modes(&self) -> usize {
        self.omegas.len()
    }

    pub fn ladder_amplitudes(&self) -> &[f64] {
        &self.amps
    }

    /// `d σ_z` on this basis.
    pub fn dipole_operator(&self) -> DiagonalOperator {
        let n = self.sector.dim();
        let d = (0..2 * n).map(|k| if k < n { self.params.d_eg } else { -self.params.d_eg }).collect();
        DiagonalOperator::new(self.basis.clone(), d, ModelKind::Dipole).expect("matching dimension")
    }

    /// Eigenvalue of σ_x ⊗ (−1)^N on a sector state pair, used for the
    /// parity check: returns the photon-number parity of sector state `k`.
    pub fn photon_parity(&self, k: usize) -> f64 {
        if self.sector.total_photons(k) % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Photon energy of sector state `k` (no zero point).
    pub fn photon_energy(&self, k: usize) -> f64 {
        let m = self.modes();
        if k == 0 {
            0.0
        } else if k <= m {
            self.omegas[k - 1]
        } else {
            let occ = self.sector.occupations(k);
            occ.iter().zip(&self.omegas).map(|(&o, w)| o as f64 * w).sum()
        }
    }
}

impl LinearOperator for MultimodeHamiltonian {
    fn dim(&self) -> usize {
        self.basis.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.sector.dim();
        let m = self.modes();
        let t0 = self.params.t0;
        let f = &self.amps;
        // Diagonal photon energies and site hopping.
        for s in 0..2 {
            let off = s * n;
            let other = (1 - s) * n;
            y[off] = -t0 * x[other];
            for a in 0..m {
                y[off + 1 + a] = self.omegas[a] * x[off + 1 + a] - t0 * x[other + 1 + a];
            }
            let mut k = 1 + m;
            for a in 0..m {
                for b in a + 1..m {
                    y[off + k] = (self.omegas[a] + self.omegas[b]) * x[off + k] - t0 * x[other + k];
                    k += 1;
                }
            }
        }
        // Dipole coupling, sign σ_z = ±1 per site.
        for s in 0..2 {
            let sz = if s == 0 { 1.0 } else { -1.0 };
            let off = s * n;
            let vac = x[off];
            let mut acc_vac = 0.0;
            for a in 0..m {
                acc_vac += f[a] * x[off + 1 + a];
                y[off + 1 + a] += sz * f[a] * vac;
            }
            y[off] += sz * acc_vac;
            let mut k = off + 1 + m;
            for a in 0..m {
                let xa = x[off + 1 + a];
                let mut acc_a = 0.0;
                for b in a + 1..m {
                    let xb = x[off + 1 + b];
                    let xp = x[k];
                    y[k] += sz * (f[b] * xa + f[a] * xb);
                    acc_a += f[b] * xp;
                    y[off + 1 + b] += sz * f[a] * xp;
                    k += 1;
                }
                y[off + 1 + a] += sz * acc_a;
            }
        }
    }
}

impl Operator for MultimodeHamiltonian {
    fn basis(&self) -> &Arc<ProductBasis> {
        &self.basis
    }

    fn descriptor(&self) -> &ModelDescriptor {
        &self.descriptor
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{hermiticity_defect, to_dense};

    #[test]
    fn derived_cavity_length() {
        let p = MultimodeParams::default();
        assert!((p.length - 2.369e5).abs() / 2.369e5 < 1e-3);
        assert!((p.length / SPEED_OF_LIGHT - 1729.0).abs() < 2.0);
    }

    #[test]
    fn even_modes_vanish_at_centre() {
        let p = MultimodeParams::default();
        let amp = (2.0 / (EPSILON_0 * p.length)).sqrt();
        for a in 1..=400 {
            let l = p.lambda(a);
            if a % 2 == 0 {
                assert_eq!(l, 0.0);
            } else {
                assert!((l.abs() - amp).abs() < 1e-15);
                assert!((l - p.lambda_at(a, p.x())).abs() < 1e-9 * amp);
            }
        }
    }

    #[test]
    fn full_dimension() {
        let p = MultimodeParams::default();
        assert_eq!(p.dimension(), 160402);
        let h = MultimodeHamiltonian::with_modes(&p.rescaled(5), (1..=5).collect()).unwrap();
        assert_eq!(h.dim(), 2 * (1 + 5 + 10));
    }

    #[test]
    fn small_instance_hermitian_and_parity_conserving() {
        let p = MultimodeParams { modes: 6, position: Some(0.3 * 2.0e5), length: 2.0e5, ..Default::default() };
        let h = build_multimode(&p).unwrap();
        assert!(hermiticity_defect(&h, 20, 3) < 1e-12);
        // Parity eigenstates: (|s1⟩ ± |s2⟩)|k⟩ with eigenvalue ±(−1)^N_k.
        let a = to_dense(&h);
        let n = h.sector().dim();
        let par = |row: usize, col: usize| -> f64 {
            // ⟨p_i|H|p_j⟩ with p = (|s1,k⟩ + σ|s2,k⟩)/√2.
            let (ki, si) = (row % n, if row < n { 1.0 } else { -1.0 });
            let (kj, sj) = (col % n, if col < n { 1.0 } else { -1.0 });
            0.5 * (a[(ki, kj)] + sj * a[(ki, n + kj)] + si * a[(n + ki, kj)] + si * sj * a[(n + ki, n + kj)])
        };
        for i in 0..2 * n {
            for j in 0..2 * n {
                let pi = if i < n { 1.0 } else { -1.0 } * h.photon_parity(i % n);
                let pj = if j < n { 1.0 } else { -1.0 } * h.photon_parity(j % n);
                if pi != pj {
                    assert!(par(i, j).abs() < 1e-14);
                }
            }
        }
    }
}
