//! Brute-force references for the integration tests: dense matrix
//! exponentials, dense diagonalization and closed forms.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use qedlab::models::RabiParams;
use qedlab::state::{to_dense, LinearOperator};
use serde::Serialize;

/// Largest dimension the dense oracles accept.
pub const DENSE_CAP: usize = 200;

#[derive(Clone, Debug, Serialize)]
pub struct OracleReport {
    pub quantity: String,
    pub oracle: f64,
    pub artifact: f64,
    pub abs_deviation: f64,
    pub rel_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl OracleReport {
    /// Absolute-tolerance comparison.
    pub fn new(quantity: impl Into<String>, oracle: f64, artifact: f64, tolerance: f64) -> Self {
        let abs = (oracle - artifact).abs();
        let rel = if oracle != 0.0 { abs / oracle.abs() } else { abs };
        Self { quantity: quantity.into(), oracle, artifact, abs_deviation: abs, rel_deviation: rel, tolerance, pass: abs <= tolerance }
    }

    /// Relative-tolerance comparison.
    pub fn relative(quantity: impl Into<String>, oracle: f64, artifact: f64, tolerance: f64) -> Self {
        let mut r = Self::new(quantity, oracle, artifact, tolerance);
        r.pass = r.rel_deviation <= tolerance;
        r
    }

    pub fn json(&self) -> String {
        serde_json::to_string(self).unwrap()
    }
}

/// Extended Rabi Hamiltonian written out from its closed form, on the
/// (site ⊗ Fock) basis with site 0 having σ_z = +1.
pub fn rabi_dense(p: &RabiParams, v: f64, j: f64) -> DMatrix<f64> {
    let n = p.photon_cap + 1;
    let mut h = DMatrix::zeros(2 * n, 2 * n);
    for s in 0..2 {
        let sz = if s == 0 { 1.0 } else { -1.0 };
        for k in 0..n {
            let i = s * n + k;
            h[(i, i)] = p.omega * k as f64 + v * sz;
            h[(i, (1 - s) * n + k)] = -p.t0;
            if k + 1 < n {
                let c = (p.g * sz + j) * ((k + 1) as f64).sqrt();
                h[(i, i + 1)] = c;
                h[(i + 1, i)] = c;
            }
        }
    }
    h
}

pub fn sigma_z(psi: &DVector<Complex64>) -> f64 {
    let n = psi.len() / 2;
    (0..n).map(|k| psi[k].norm_sqr() - psi[n + k].norm_sqr()).sum()
}

/// `⟨σ_z⟩` after each of `steps` steps of width `t/steps`, from dense
/// exponentials of the Hamiltonian with the signals held at the step
/// midpoint.
pub fn rabi_reference(
    p: &RabiParams,
    psi0: &[Complex64],
    t: f64,
    steps: usize,
    signals: &dyn Fn(f64) -> (f64, f64),
) -> Result<Vec<f64>, String> {
    let dim = 2 * (p.photon_cap + 1);
    if dim > DENSE_CAP {
        return Err(format!("dimension {dim} exceeds the dense cap {DENSE_CAP}"));
    }
    let dt = t / steps as f64;
    let mut psi = DVector::from_column_slice(psi0);
    let mut out = vec![sigma_z(&psi)];
    let mut cache: Option<((f64, f64), DMatrix<Complex64>)> = None;
    for k in 0..steps {
        let s = signals((k as f64 + 0.5) * dt);
        let u = match &cache {
            Some((key, u)) if *key == s => u.clone(),
            _ => {
                let h = rabi_dense(p, s.0, s.1).map(|x| Complex64::new(0.0, -dt * x));
                let u = h.exp();
                cache = Some((s, u.clone()));
                u
            }
        };
        psi = u * psi;
        out.push(sigma_z(&psi));
    }
    Ok(out)
}

/// `⟨σ_z(t)⟩` under `−t₀σ_x` for a real initial state with
/// `⟨σ_y(0)⟩ = 0`: with `U = cos(t₀t) + i sin(t₀t) σ_x` the amplitudes
/// `(a, b)` evolve to `(a c + i b s, b c + i a s)`.
pub fn analytic_two_level(t0: f64, sz0: f64, t: f64) -> f64 {
    let a = ((1.0 + sz0) / 2.0).sqrt();
    let b = ((1.0 - sz0) / 2.0).sqrt();
    let (c, s) = ((t0 * t).cos(), (t0 * t).sin());
    let up = Complex64::new(a * c, b * s);
    let down = Complex64::new(b * c, a * s);
    up.norm_sqr() - down.norm_sqr()
}

/// All eigenvalues of a small operator, ascending.
pub fn dense_eigenvalues(op: &dyn LinearOperator) -> Vec<f64> {
    assert!(op.dim() <= 4 * DENSE_CAP, "dense oracle limited to small operators");
    let m = to_dense(op);
    let mut v: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}
