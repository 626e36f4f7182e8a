use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{dot, nrm2};
use crate::state::{LinearOperator, C64};

/// Short-iterate Lanczos approximation of `exp(−iH dt) ψ`.
///
/// The Krylov space grows until the a-posteriori error estimate
/// `β_m |[exp(−iT_m dt)]_{m,0}|` drops below `tol`; if `max_dim` is
/// reached first the step is split in two. Workspace is kept between
/// calls.
#[derive(Clone, Debug)]
pub struct KrylovStepper {
    max_dim: usize,
    tol: f64,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
    wr: Vec<f64>,
    wi: Vec<f64>,
}

const MAX_SPLITS: usize = 12;

impl KrylovStepper {
    pub fn new(max_dim: usize, tol: f64) -> Self {
        Self { max_dim: max_dim.max(2), tol, re: vec![], im: vec![], wr: vec![], wi: vec![] }
    }

    /// Advances `psi` in place; returns the number of operator
    /// applications used.
    pub fn step(&mut self, h: &dyn LinearOperator, psi: &mut [C64], dt: f64) -> Result<usize> {
        self.step_split(h, psi, dt, 0)
    }

    fn step_split(&mut self, h: &dyn LinearOperator, psi: &mut [C64], dt: f64, depth: usize) -> Result<usize> {
        match self.try_step(h, psi, dt)? {
            Some(m) => Ok(m),
            None if depth < MAX_SPLITS => {
                let a = self.step_split(h, psi, 0.5 * dt, depth + 1)?;
                let b = self.step_split(h, psi, 0.5 * dt, depth + 1)?;
                Ok(a + b)
            }
            None => Err(Error::NoConvergence { iterations: self.max_dim, worst: f64::NAN, residuals: vec![] }),
        }
    }

    fn ensure(&mut self, n: usize) {
        if self.wr.len() != n {
            self.re.clear();
            self.im.clear();
            self.wr = vec![0.0; n];
            self.wi = vec![0.0; n];
        }
        while self.re.len() < self.max_dim {
            self.re.push(vec![0.0; n]);
            self.im.push(vec![0.0; n]);
        }
    }

    fn try_step(&mut self, h: &dyn LinearOperator, psi: &mut [C64], dt: f64) -> Result<Option<usize>> {
        let n = psi.len();
        if h.dim() != n {
            return Err(Error::Dimension { expected: h.dim(), found: n });
        }
        let nrm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nrm == 0.0 || dt == 0.0 {
            return Ok(Some(0));
        }
        self.ensure(n);
        for (k, z) in psi.iter().enumerate() {
            self.re[0][k] = z.re / nrm;
            self.im[0][k] = z.im / nrm;
        }
        let mut alpha: Vec<f64> = Vec::with_capacity(self.max_dim);
        let mut beta: Vec<f64> = Vec::with_capacity(self.max_dim);
        let mut prior = 1.0;
        for j in 0..self.max_dim {
            h.apply(&self.re[j], &mut self.wr);
            h.apply(&self.im[j], &mut self.wi);
            // Real symmetric H: ⟨v|Hv⟩ is real.
            let a = dot(&self.re[j], &self.wr) + dot(&self.im[j], &self.wi);
            alpha.push(a);
            for k in 0..=j {
                // Full reorthogonalization against the complex basis.
                let cr = dot(&self.re[k], &self.wr) + dot(&self.im[k], &self.wi);
                let ci = dot(&self.re[k], &self.wi) - dot(&self.im[k], &self.wr);
                let (vr, vi) = (&self.re[k], &self.im[k]);
                for i in 0..n {
                    self.wr[i] -= cr * vr[i] - ci * vi[i];
                    self.wi[i] -= cr * vi[i] + ci * vr[i];
                }
            }
            let b = (nrm2(&self.wr).powi(2) + nrm2(&self.wi).powi(2)).sqrt();
            let m = j + 1;
            // Leading-order size of the error, Π β dt^m / m!; the exact
            // estimate below is only formed once this becomes small.
            prior *= b * dt.abs() / m as f64;
            let scale = alpha.iter().map(|a| a.abs()).fold(1.0, f64::max);
            let breakdown = b < 1e-14 * scale;
            if !(prior < 1e3 * self.tol || breakdown || m == self.max_dim) {
                beta.push(b);
                let inv = 1.0 / b;
                let (next_r, next_i) = (&mut self.re[m], &mut self.im[m]);
                for i in 0..n {
                    next_r[i] = self.wr[i] * inv;
                    next_i[i] = self.wi[i] * inv;
                }
                continue;
            }
            let coeffs = tridiagonal_exp(&alpha, &beta, dt);
            let err = b * coeffs[m - 1].norm();
            if err < self.tol || breakdown {
                for z in psi.iter_mut() {
                    *z = C64::new(0.0, 0.0);
                }
                for (k, c) in coeffs.iter().enumerate() {
                    let c = c * nrm;
                    let (vr, vi) = (&self.re[k], &self.im[k]);
                    for i in 0..n {
                        psi[i] += C64::new(c.re * vr[i] - c.im * vi[i], c.re * vi[i] + c.im * vr[i]);
                    }
                }
                return Ok(Some(m));
            }
            if m == self.max_dim {
                return Ok(None);
            }
            beta.push(b);
            let inv = 1.0 / b;
            let (next_r, next_i) = (&mut self.re[m], &mut self.im[m]);
            for i in 0..n {
                next_r[i] = self.wr[i] * inv;
                next_i[i] = self.wi[i] * inv;
            }
        }
        Ok(None)
    }
}

/// `exp(−iT dt) e_0` for the Lanczos tridiagonal `T`.
fn tridiagonal_exp(alpha: &[f64], beta: &[f64], dt: f64) -> Vec<C64> {
    let m = alpha.len();
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    (0..m)
        .map(|k| {
            (0..m)
                .map(|l| {
                    let u = eig.eigenvectors[(k, l)] * eig.eigenvectors[(0, l)];
                    C64::from_polar(u, -eig.eigenvalues[l] * dt)
                })
                .sum()
        })
        .collect()
}

/// Largest |eigenvalue| estimate from a short Lanczos run, padded by the
/// last residual so it bounds the spectrum from above in practice.
pub fn spectral_radius(h: &dyn LinearOperator, iters: usize, seed: u64) -> f64 {
    let n = h.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
    let s = nrm2(&v);
    v.iter_mut().for_each(|x| *x /= s);
    let mut basis = vec![v];
    let mut alpha = vec![];
    let mut beta = vec![];
    let mut w = vec![0.0; n];
    for j in 0..iters.min(n) {
        h.apply(&basis[j], &mut w);
        alpha.push(dot(&basis[j], &w));
        for b in &basis {
            let c = dot(b, &w);
            w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
        let b = nrm2(&w);
        if b < 1e-12 {
            break;
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
    let m = alpha.len();
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let pad = beta.get(m - 1).copied().unwrap_or(0.0);
    eig.eigenvalues.iter().map(|e| e.abs()).fold(0.0, f64::max) + pad
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::state::{to_dense, DenseOperator, Factor, ModelKind, ProductBasis};

    fn random_symmetric(n: usize, seed: u64) -> DenseOperator {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(n, n, |_, _| rng.gen::<f64>() - 0.5);
        let m = (&a + a.transpose()) * 0.5;
        let basis = Arc::new(ProductBasis::new(vec![Factor::Channels(n)]).unwrap());
        DenseOperator::new(basis, m, ModelKind::Generic).unwrap()
    }

    fn dense_exp(h: &DenseOperator, psi: &[C64], t: f64) -> Vec<C64> {
        let eig = SymmetricEigen::new(to_dense(h));
        let n = psi.len();
        let mut out = vec![C64::new(0.0, 0.0); n];
        for l in 0..n {
            let u = eig.eigenvectors.column(l);
            let c: C64 = (0..n).map(|k| u[k] * psi[k]).sum::<C64>() * C64::from_polar(1.0, -eig.eigenvalues[l] * t);
            for k in 0..n {
                out[k] += c * u[k];
            }
        }
        out
    }

    #[test]
    fn matches_dense_exponential() {
        let h = random_symmetric(40, 3);
        let mut psi: Vec<C64> = (0..40).map(|k| C64::new((k as f64).sin(), (k as f64 * 0.3).cos())).collect();
        let want = dense_exp(&h, &psi, 0.7);
        let mut st = KrylovStepper::new(30, 1e-13);
        st.step(&h, &mut psi, 0.7).unwrap();
        let err: f64 = psi.iter().zip(&want).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-11, "{err}");
    }

    #[test]
    fn long_step_is_split() {
        let h = random_symmetric(60, 9);
        let mut psi = vec![C64::new(0.0, 0.0); 60];
        psi[0] = C64::new(1.0, 0.0);
        let want = dense_exp(&h, &psi, 25.0);
        let mut st = KrylovStepper::new(8, 1e-13);
        st.step(&h, &mut psi, 25.0).unwrap();
        let err: f64 = psi.iter().zip(&want).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn radius_bounds_extreme_eigenvalue() {
        let h = random_symmetric(50, 4);
        let eig = SymmetricEigen::new(to_dense(&h));
        let r = eig.eigenvalues.iter().map(|e| e.abs()).fold(0.0, f64::max);
        let est = spectral_radius(&h, 50, 1);
        assert!(est >= r - 1e-8 && est < 1.5 * r);
    }
}
