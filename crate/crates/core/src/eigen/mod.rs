//! Lowest eigenpairs of large symmetric operators, a shift-invert variant
//! for banded operators, and a dense solver for small instances.

mod lanczos;
mod shift_invert;

use std::sync::Arc;

use nalgebra::SymmetricEigen;

pub use lanczos::{block_lanczos, EigenOptions, Eigenpairs, Which};
pub use shift_invert::shift_invert_lowest;

use crate::error::{Error, Result};
use crate::state::{to_dense, Operator, ProductBasis, WaveFunction};

/// Largest dimension accepted by [`dense_diag`].
pub const DENSE_LIMIT: usize = 5000;

/// Eigenpairs of an operator on a product basis, ascending.
#[derive(Clone, Debug)]
pub struct EigenResult {
    pub basis: Arc<ProductBasis>,
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

impl EigenResult {
    pub fn from_pairs(basis: Arc<ProductBasis>, p: Eigenpairs) -> Self {
        Self { basis, values: p.values, vectors: p.vectors, residuals: p.residuals, iterations: p.iterations }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn state(&self, i: usize) -> WaveFunction {
        WaveFunction::from_real(self.basis.clone(), &self.vectors[i]).expect("eigenvector matches basis")
    }

    pub fn states(&self) -> Vec<WaveFunction> {
        (0..self.len()).map(|i| self.state(i)).collect()
    }
}

/// Lowest `k` eigenpairs with residuals at most `tol`.
pub fn eigs_lowest(h: &dyn Operator, k: usize, tol: f64) -> Result<EigenResult> {
    eigs_lowest_with(h, &EigenOptions::lowest(k, tol), &[])
}

pub fn eigs_lowest_with(h: &dyn Operator, opts: &EigenOptions, start: &[Vec<f64>]) -> Result<EigenResult> {
    let mut o = opts.clone();
    o.which = Which::Lowest;
    Ok(EigenResult::from_pairs(h.basis().clone(), block_lanczos(h, &o, start)?))
}

/// Full spectrum by dense diagonalization.
pub fn dense_diag(h: &dyn Operator) -> Result<EigenResult> {
    let n = h.dim();
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge { dim: n, limit: DENSE_LIMIT });
    }
    let a = to_dense(h);
    let a = 0.5 * (&a + a.transpose());
    let eig = SymmetricEigen::new(a.clone());
    let vectors: Vec<Vec<f64>> = (0..n).map(|j| eig.eigenvectors.column(j).iter().copied().collect()).collect();
    let residuals = (0..n)
        .map(|j| {
            let v = nalgebra::DVector::from_column_slice(&vectors[j]);
            (&a * &v - eig.eigenvalues[j] * &v).norm()
        })
        .collect();
    let mut p = Eigenpairs { values: eig.eigenvalues.iter().copied().collect(), vectors, residuals, iterations: 0, matvecs: n };
    lanczos::canonicalize(&mut p, Which::Lowest);
    Ok(EigenResult::from_pairs(h.basis().clone(), p))
}
