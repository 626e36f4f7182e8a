//! Small dense-vector kernels and a banded Cholesky factorization.

use crate::error::{Error, Result};
use crate::state::LinearOperator;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn nrm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
pub fn scale(alpha: f64, x: &mut [f64]) {
    x.iter_mut().for_each(|v| *v *= alpha);
}

/// Two passes of classical Gram-Schmidt against an orthonormal set.
/// Returns the norm of `v` after projection.
pub fn orthogonalize(basis: &[Vec<f64>], v: &mut [f64]) -> f64 {
    for _ in 0..2 {
        let coeffs: Vec<f64> = basis.iter().map(|q| dot(q, v)).collect();
        for (q, c) in basis.iter().zip(coeffs) {
            axpy(-c, q, v);
        }
    }
    nrm2(v)
}

/// `Σ_j c_j v_j`.
pub fn combine(vectors: &[Vec<f64>], coeffs: &[f64]) -> Vec<f64> {
    let n = vectors.first().map_or(0, |v| v.len());
    let mut out = vec![0.0; n];
    for (v, &c) in vectors.iter().zip(coeffs) {
        if c != 0.0 {
            axpy(c, v, &mut out);
        }
    }
    out
}

/// Symmetric banded matrix holding the lower band row by row.
#[derive(Clone, Debug)]
pub struct SymmetricBand {
    n: usize,
    bw: usize,
    // Row i holds columns i-bw ..= i at offsets 0 ..= bw.
    data: Vec<f64>,
}

impl SymmetricBand {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self { n, bw, data: vec![0.0; n * (bw + 1)] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bw);
        i * (self.bw + 1) + (j + self.bw - i)
    }

    /// Adds `v` to element (i, j) and its mirror.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.bw {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    pub fn shift_diagonal(&mut self, s: f64) {
        for i in 0..self.n {
            let k = self.idx(i, i);
            self.data[k] += s;
        }
    }

    /// Gershgorin interval `[lo, hi]` enclosing the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let mut off = vec![0.0; self.n];
        for i in 0..self.n {
            for j in i.saturating_sub(self.bw)..i {
                let a = self.get(i, j).abs();
                off[i] += a;
                off[j] += a;
            }
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.n {
            let d = self.get(i, i);
            lo = lo.min(d - off[i]);
            hi = hi.max(d + off[i]);
        }
        (lo, hi)
    }

    /// Cholesky factor `A = L Lᵀ`; fails if `A` is not positive definite.
    pub fn cholesky(&self) -> Result<BandCholesky> {
        let (n, bw) = (self.n, self.bw);
        let mut l = self.data.clone();
        let w = bw + 1;
        for j in 0..n {
            let j0 = j.saturating_sub(bw);
            // Diagonal.
            let rj = j * w;
            let mut s = l[rj + bw];
            for k in j0..j {
                let v = l[rj + k + bw - j];
                s -= v * v;
            }
            if !(s > 0.0) {
                return Err(Error::InvalidParameter {
                    name: "shift".into(),
                    reason: format!("matrix not positive definite at row {j}"),
                });
            }
            let d = s.sqrt();
            l[rj + bw] = d;
            for i in j + 1..(j + w).min(n) {
                let ri = i * w;
                let k0 = i.saturating_sub(bw).max(j0);
                let mut s = l[ri + j + bw - i];
                for k in k0..j {
                    s -= l[ri + k + bw - i] * l[rj + k + bw - j];
                }
                l[ri + j + bw - i] = s / d;
            }
        }
        Ok(BandCholesky { n, bw, l })
    }
}

/// Lower Cholesky factor in band storage.
#[derive(Clone, Debug)]
pub struct BandCholesky {
    n: usize,
    bw: usize,
    l: Vec<f64>,
}

impl BandCholesky {
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let (n, bw) = (self.n, self.bw);
        let w = bw + 1;
        for i in 0..n {
            let ri = i * w;
            let mut s = b[i];
            for k in i.saturating_sub(bw)..i {
                s -= self.l[ri + k + bw - i] * b[k];
            }
            b[i] = s / self.l[ri + bw];
        }
        for i in (0..n).rev() {
            b[i] /= self.l[i * w + bw];
            let bi = b[i];
            let ri = i * w;
            for k in i.saturating_sub(bw)..i {
                b[k] -= self.l[ri + k + bw - i] * bi;
            }
        }
    }
}

impl LinearOperator for BandCholesky {
    fn dim(&self) -> usize {
        self.n
    }

    /// Applies the inverse of the factored matrix.
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(x);
        self.solve_in_place(y);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn banded_cholesky_solves_tridiagonal() {
        let n = 50;
        let mut a = SymmetricBand::zeros(n, 3);
        for i in 0..n {
            a.add(i, i, 4.0 + i as f64 * 0.01);
            if i > 0 {
                a.add(i, i - 1, -1.0);
            }
            if i > 2 {
                a.add(i, i - 3, 0.5);
            }
        }
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let mut b = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                b[i] += a.get(i, j) * x[j];
            }
        }
        let f = a.cholesky().unwrap();
        f.solve_in_place(&mut b);
        for i in 0..n {
            assert!((b[i] - x[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn indefinite_matrix_rejected() {
        let mut a = SymmetricBand::zeros(3, 1);
        a.add(0, 0, 1.0);
        a.add(1, 1, -1.0);
        a.add(2, 2, 1.0);
        assert!(a.cholesky().is_err());
    }

    #[test]
    fn cgs2_output_is_orthogonal() {
        let q = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt()]];
        let mut v = vec![0.3, 0.7, -0.2];
        orthogonalize(&q, &mut v);
        assert!(dot(&q[0], &v).abs() < 1e-15 && dot(&q[1], &v).abs() < 1e-15);
    }
}
