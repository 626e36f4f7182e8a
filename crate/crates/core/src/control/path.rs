use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Final time of the charge-transfer problem (a.u.).
pub const T_FINAL: f64 = 12.57;
/// Path amplitude `C = σ_z(0)`.
pub const AMPLITUDE: f64 = 0.98;
/// Number of path and drive basis functions.
pub const N_BASIS: usize = 11;

/// Target dipole path `σ_z(t) = C Σ_i c_i cos((2i−1) ω̃ t)` with
/// `ω̃ = π/T`, so that `σ_z(0) = C` and `σ_z(T) = −C` whenever
/// `Σ c_i = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityPath {
    pub coefficients: Vec<f64>,
    pub amplitude: f64,
    pub t_final: f64,
}

impl DensityPath {
    pub fn new(coefficients: Vec<f64>, amplitude: f64, t_final: f64) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(invalid("coefficients", "need at least one path coefficient"));
        }
        let s: f64 = coefficients.iter().sum();
        if (s - 1.0).abs() > 1e-10 {
            return Err(invalid("coefficients", format!("path coefficients must sum to 1, got {s}")));
        }
        if !(t_final > 0.0) || !(amplitude.abs() <= 1.0) {
            return Err(invalid("path", "need T > 0 and |C| ≤ 1"));
        }
        Ok(Self { coefficients, amplitude, t_final })
    }

    /// Path from the free coefficients `c_2..c_N`, with `c_1 = 1 − Σ`.
    pub fn from_free(free: &[f64], amplitude: f64, t_final: f64) -> Self {
        let mut c = Vec::with_capacity(free.len() + 1);
        c.push(1.0 - free.iter().sum::<f64>());
        c.extend_from_slice(free);
        Self { coefficients: c, amplitude, t_final }
    }

    /// Least-squares fit of uniformly sampled `σ_z(t)` on `[0, T]` with
    /// `n` basis functions under the constraint `Σc = 1`.
    pub fn fit(samples: &[f64], n: usize, amplitude: f64, t_final: f64) -> Result<Self> {
        if samples.len() < n + 1 || n == 0 {
            return Err(invalid("samples", "need more samples than basis functions"));
        }
        let w = std::f64::consts::PI / t_final;
        let dt = t_final / (samples.len() - 1) as f64;
        // σ − C cos(ω̃t) = C Σ_{i≥2} c_i (cos((2i−1)ω̃t) − cos(ω̃t)).
        let a = nalgebra::DMatrix::from_fn(samples.len(), n - 1, |k, i| {
            let t = k as f64 * dt;
            amplitude * (((2 * i + 3) as f64 * w * t).cos() - (w * t).cos())
        });
        let b = nalgebra::DVector::from_fn(samples.len(), |k, _| samples[k] - amplitude * (w * k as f64 * dt).cos());
        let free = a.svd(true, true).solve(&b, 1e-12).map_err(|e| invalid("samples", e))?;
        Ok(Self::from_free(free.as_slice(), amplitude, t_final))
    }

    pub fn free(&self) -> &[f64] {
        &self.coefficients[1..]
    }

    pub fn frequency(&self) -> f64 {
        std::f64::consts::PI / self.t_final
    }

    fn modes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let w = self.frequency();
        self.coefficients.iter().enumerate().map(move |(i, &c)| (c, (2 * i + 1) as f64 * w))
    }

    pub fn value(&self, t: f64) -> f64 {
        self.amplitude * self.modes().map(|(c, k)| c * (k * t).cos()).sum::<f64>()
    }

    pub fn derivative(&self, t: f64) -> f64 {
        -self.amplitude * self.modes().map(|(c, k)| c * k * (k * t).sin()).sum::<f64>()
    }

    pub fn second_derivative(&self, t: f64) -> f64 {
        -self.amplitude * self.modes().map(|(c, k)| c * k * k * (k * t).cos()).sum::<f64>()
    }
}

/// External dipole `j(t) = Σ_k d_k sin(k ω̃ t)`, vanishing at both ends.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DipoleDrive {
    pub coefficients: Vec<f64>,
    pub t_final: f64,
}

impl DipoleDrive {
    pub fn new(coefficients: Vec<f64>, t_final: f64) -> Self {
        Self { coefficients, t_final }
    }

    pub fn off(t_final: f64) -> Self {
        Self { coefficients: vec![], t_final }
    }

    pub fn value(&self, t: f64) -> f64 {
        let w = std::f64::consts::PI / self.t_final;
        self.coefficients.iter().enumerate().map(|(k, &d)| d * ((k + 1) as f64 * w * t).sin()).sum()
    }
}
