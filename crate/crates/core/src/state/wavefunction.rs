use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::basis::ProductBasis;
use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Complex amplitudes over a product basis.
#[derive(Clone, Debug)]
pub struct WaveFunction {
    basis: Arc<ProductBasis>,
    amps: Vec<C64>,
}

impl WaveFunction {
    pub fn new(basis: Arc<ProductBasis>, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != basis.dim() {
            return Err(Error::Dimension { expected: basis.dim(), found: amps.len() });
        }
        Ok(Self { basis, amps })
    }

    pub fn from_real(basis: Arc<ProductBasis>, re: &[f64]) -> Result<Self> {
        Self::new(basis, re.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zeros(basis: Arc<ProductBasis>) -> Self {
        let n = basis.dim();
        Self { basis, amps: vec![C64::new(0.0, 0.0); n] }
    }

    /// Unit vector on flattened basis index `index`.
    pub fn basis_state(basis: Arc<ProductBasis>, index: usize) -> Result<Self> {
        if index >= basis.dim() {
            return Err(Error::Dimension { expected: basis.dim(), found: index });
        }
        let mut psi = Self::zeros(basis);
        psi.amps[index] = C64::new(1.0, 0.0);
        Ok(psi)
    }

    /// Normalized state with uniformly random complex amplitudes.
    pub fn random(basis: Arc<ProductBasis>, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amps = (0..basis.dim())
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let mut psi = Self { basis, amps };
        psi.normalize().expect("random state has nonzero norm");
        psi
    }

    pub fn basis(&self) -> &Arc<ProductBasis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.re).collect()
    }

    pub fn density(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Scales to unit norm and returns the previous norm.
    pub fn normalize(&mut self) -> Result<f64> {
        let n = self.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidParameter {
                name: "wavefunction".into(),
                reason: format!("cannot normalize a state of norm {n}"),
            });
        }
        let s = 1.0 / n;
        for a in &mut self.amps {
            *a *= s;
        }
        Ok(n)
    }

    pub fn check_same_basis(&self, other: &ProductBasis) -> Result<()> {
        if Arc::as_ptr(&self.basis) != other as *const _ && *self.basis != *other {
            return Err(Error::BasisMismatch(format!(
                "state with dims {:?} used on basis with dims {:?}",
                self.basis.dims(),
                other.dims()
            )));
        }
        Ok(())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &WaveFunction) -> Result<C64> {
        other.check_same_basis(&self.basis)?;
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }
}

/// `⟨a|b⟩`, antilinear in the first argument.
pub fn inner(a: &WaveFunction, b: &WaveFunction) -> Result<C64> {
    a.inner(b)
}

pub fn norm(psi: &WaveFunction) -> f64 {
    psi.norm()
}
