use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::models::{MultimodeHamiltonian, RabiHamiltonian};
use crate::state::{Operator, C64};

/// Classical-field description used by the mean-field propagator:
/// `H_m = −t₀σ_x + (v + Σ_α c_α q_α) σ_z`, with oscillators driven by
/// `q̈_α + ω_α² q_α = −c_α⟨σ_z⟩ − s_α j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldModel {
    pub t0: f64,
    pub omegas: Vec<f64>,
    /// σ_z coupling per mode.
    pub couplings: Vec<f64>,
    /// Coupling of the external dipole j per mode.
    pub drive: Vec<f64>,
}

/// Normal-ordered photon second moments
/// `N_αβ = 2 Re⟨a_α a_β⟩ + 2 Re⟨a†_α a_β⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct SecondMoments {
    pub omegas: Vec<f64>,
    pub normal: DMatrix<f64>,
}

impl SecondMoments {
    /// `⟨q̂_α q̂_β⟩` including the vacuum term.
    pub fn qq(&self, a: usize, b: usize) -> f64 {
        let vac = if a == b { 1.0 } else { 0.0 };
        (self.normal[(a, b)] + vac) / (2.0 * (self.omegas[a] * self.omegas[b]).sqrt())
    }

    /// Moments of a product of coherent states with amplitudes `q`.
    pub fn coherent(omegas: &[f64], q: &[f64]) -> Self {
        let m = omegas.len();
        let normal = DMatrix::from_fn(m, m, |a, b| 2.0 * (omegas[a] * omegas[b]).sqrt() * q[a] * q[b]);
        Self { omegas: omegas.to_vec(), normal }
    }
}

/// A two-site emitter coupled to photon modes through σ_z.
pub trait TwoSiteSystem: Operator {
    fn sigma_z(&self, psi: &[C64]) -> f64;
    /// `⟨q̂_α⟩` for every mode of the basis.
    fn mode_amplitudes(&self, psi: &[C64]) -> Vec<f64>;
    fn second_moments(&self, psi: &[C64]) -> SecondMoments;
    fn mode_frequencies(&self) -> Vec<f64>;
    /// Sets the external potential v and dipole j.
    fn set_signals(&mut self, v: f64, j: f64) -> Result<()>;
    fn mean_field(&self) -> MeanFieldModel;
}

impl TwoSiteSystem for RabiHamiltonian {
    fn sigma_z(&self, psi: &[C64]) -> f64 {
        self.sigma_z_expectation(psi)
    }

    fn mode_amplitudes(&self, psi: &[C64]) -> Vec<f64> {
        let n = self.params().photon_cap + 1;
        let mut a = C64::new(0.0, 0.0);
        for s in 0..2 {
            for k in 0..n - 1 {
                a += psi[s * n + k].conj() * psi[s * n + k + 1] * ((k + 1) as f64).sqrt();
            }
        }
        vec![2.0 * a.re / (2.0 * self.params().omega).sqrt()]
    }

    fn second_moments(&self, psi: &[C64]) -> SecondMoments {
        let n = self.params().photon_cap + 1;
        let mut aa = C64::new(0.0, 0.0);
        let mut num = 0.0;
        for s in 0..2 {
            for k in 0..n {
                num += k as f64 * psi[s * n + k].norm_sqr();
                if k + 2 < n {
                    aa += psi[s * n + k].conj() * psi[s * n + k + 2] * (((k + 1) * (k + 2)) as f64).sqrt();
                }
            }
        }
        SecondMoments { omegas: vec![self.params().omega], normal: DMatrix::from_element(1, 1, 2.0 * aa.re + 2.0 * num) }
    }

    fn mode_frequencies(&self) -> Vec<f64> {
        vec![self.params().omega]
    }

    fn set_signals(&mut self, v: f64, j: f64) -> Result<()> {
        self.set_drive(v, j);
        Ok(())
    }

    fn mean_field(&self) -> MeanFieldModel {
        let p = self.params();
        let s = (2.0 * p.omega).sqrt();
        MeanFieldModel { t0: p.t0, omegas: vec![p.omega], couplings: vec![p.g * s], drive: vec![s] }
    }
}

impl TwoSiteSystem for MultimodeHamiltonian {
    fn sigma_z(&self, psi: &[C64]) -> f64 {
        let n = self.sector().dim();
        (0..n).map(|k| psi[k].norm_sqr() - psi[n + k].norm_sqr()).sum()
    }

    fn mode_amplitudes(&self, psi: &[C64]) -> Vec<f64> {
        let n = self.sector().dim();
        let m = self.modes();
        let mut a = vec![C64::new(0.0, 0.0); m];
        for s in 0..2 {
            let x = &psi[s * n..(s + 1) * n];
            for (al, acc) in a.iter_mut().enumerate() {
                *acc += x[0].conj() * x[1 + al];
            }
            let mut k = 1 + m;
            for al in 0..m {
                for be in al + 1..m {
                    a[al] += x[1 + be].conj() * x[k];
                    a[be] += x[1 + al].conj() * x[k];
                    k += 1;
                }
            }
        }
        a.iter().zip(&self.omegas).map(|(z, w)| 2.0 * z.re / (2.0 * w).sqrt()).collect()
    }

    fn second_moments(&self, psi: &[C64]) -> SecondMoments {
        let n = self.sector().dim();
        let m = self.modes();
        let mut normal = DMatrix::zeros(m, m);
        for s in 0..2 {
            let x = &psi[s * n..(s + 1) * n];
            let mut phi = DMatrix::from_element(m, m, C64::new(0.0, 0.0));
            let mut k = 1 + m;
            for al in 0..m {
                for be in al + 1..m {
                    phi[(al, be)] = x[k];
                    phi[(be, al)] = x[k];
                    k += 1;
                }
            }
            let g = phi.adjoint() * &phi;
            for al in 0..m {
                for be in 0..m {
                    let lower = x[1 + al].conj() * x[1 + be] + g[(al, be)];
                    let pair = if al == be { C64::new(0.0, 0.0) } else { x[0].conj() * phi[(al, be)] };
                    normal[(al, be)] += 2.0 * pair.re + 2.0 * lower.re;
                }
            }
        }
        SecondMoments { omegas: self.omegas.clone(), normal }
    }

    fn mode_frequencies(&self) -> Vec<f64> {
        self.omegas.clone()
    }

    fn set_signals(&mut self, v: f64, j: f64) -> Result<()> {
        if v != 0.0 || j != 0.0 {
            return Err(invalid("signals", "the multimode emitter takes no external drive"));
        }
        Ok(())
    }

    fn mean_field(&self) -> MeanFieldModel {
        let d = self.params().d_eg;
        MeanFieldModel {
            t0: self.params().t0,
            omegas: self.omegas.clone(),
            couplings: self.omegas.iter().zip(&self.lambdas).map(|(w, l)| w * l * d).collect(),
            drive: vec![0.0; self.modes()],
        }
    }
}
