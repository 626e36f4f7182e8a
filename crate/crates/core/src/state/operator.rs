use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::basis::ProductBasis;
use super::wavefunction::{WaveFunction, C64};
use crate::error::{Error, Result};

/// Real symmetric linear map applied without storing a matrix.
///
/// Implementations must be reentrant: `apply` may run concurrently on
/// distinct vectors.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;

    /// Writes `A x` into `y`.
    fn apply(&self, x: &[f64], y: &mut [f64]);

    /// Complex action, built from two real applications.
    fn apply_complex(&self, x: &[C64], y: &mut [C64]) {
        let n = self.dim();
        let re: Vec<f64> = x.iter().map(|z| z.re).collect();
        let im: Vec<f64> = x.iter().map(|z| z.im).collect();
        let mut yr = vec![0.0; n];
        let mut yi = vec![0.0; n];
        self.apply(&re, &mut yr);
        self.apply(&im, &mut yi);
        for k in 0..n {
            y[k] = C64::new(yr[k], yi[k]);
        }
    }
}

/// Which physical model an operator describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Dimer,
    DimerNoSelfEnergy,
    ShinMetiu,
    Rabi,
    Multimode,
    Electronic,
    NuclearPhoton,
    Contracted,
    Dipole,
    Generic,
}

/// Cavity mode parameters in atomic units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CavityMode {
    /// Mode frequency ω_α (hartree).
    pub omega: f64,
    /// Coupling strength |λ_α|.
    pub lambda: f64,
    /// Unit polarization direction.
    pub polarization: [f64; 2],
}

impl CavityMode {
    pub fn new(omega: f64, lambda: f64) -> Self {
        Self { omega, lambda, polarization: [1.0, 0.0] }
    }

    /// Mode with coupling given as the ratio g/ω, using g = sqrt(ω/2)·λ.
    pub fn from_g_over_omega(omega: f64, ratio: f64) -> Self {
        let g = ratio * omega;
        Self::new(omega, g / (0.5 * omega).sqrt())
    }

    pub fn with_polarization(mut self, p: [f64; 2]) -> Self {
        self.polarization = p;
        self
    }

    pub fn g(&self) -> f64 {
        (0.5 * self.omega).sqrt() * self.lambda
    }

    pub fn g_over_omega(&self) -> f64 {
        self.g() / self.omega
    }
}

/// Model label and coupling parameters attached to a Hamiltonian.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelDescriptor {
    pub kind: ModelKind,
    pub modes: Vec<CavityMode>,
}

impl ModelDescriptor {
    pub fn new(kind: ModelKind, modes: Vec<CavityMode>) -> Self {
        Self { kind, modes }
    }
}

/// A Hermitian operator tied to a product basis.
pub trait Operator: LinearOperator {
    fn basis(&self) -> &Arc<ProductBasis>;
    fn descriptor(&self) -> &ModelDescriptor;
}

/// Returns `Hψ`.
pub fn apply(h: &dyn Operator, psi: &WaveFunction) -> Result<WaveFunction> {
    psi.check_same_basis(h.basis())?;
    let mut out = vec![C64::new(0.0, 0.0); h.dim()];
    h.apply_complex(psi.amplitudes(), &mut out);
    WaveFunction::new(psi.basis().clone(), out)
}

/// `⟨a|H|b⟩`.
pub fn matrix_element(h: &dyn Operator, a: &WaveFunction, b: &WaveFunction) -> Result<C64> {
    a.check_same_basis(h.basis())?;
    a.inner(&apply(h, b)?)
}

/// `⟨ψ|H|ψ⟩ / ⟨ψ|ψ⟩`; the imaginary part vanishes for Hermitian `H`.
pub fn expectation(h: &dyn Operator, psi: &WaveFunction) -> Result<f64> {
    let num = matrix_element(h, psi, psi)?;
    let den = psi.inner(psi)?.re;
    if den == 0.0 {
        return Err(Error::InvalidParameter {
            name: "psi".into(),
            reason: "expectation in the zero state".into(),
        });
    }
    Ok(num.re / den)
}

/// Largest `|⟨a|Hb⟩ − conj(⟨b|Ha⟩)|` over random state pairs.
pub fn hermiticity_defect(h: &dyn Operator, pairs: usize, seed: u64) -> f64 {
    let mut worst: f64 = 0.0;
    for k in 0..pairs as u64 {
        let a = WaveFunction::random(h.basis().clone(), seed.wrapping_add(2 * k));
        let b = WaveFunction::random(h.basis().clone(), seed.wrapping_add(2 * k + 1));
        let ab = matrix_element(h, &a, &b).expect("same basis");
        let ba = matrix_element(h, &b, &a).expect("same basis");
        worst = worst.max((ab - ba.conj()).norm());
    }
    worst
}

/// Dense matrix of a linear operator, column by column.
pub fn to_dense(op: &dyn LinearOperator) -> DMatrix<f64> {
    let n = op.dim();
    let mut m = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        op.apply(&e, &mut col);
        m.column_mut(j).copy_from_slice(&col);
        e[j] = 0.0;
    }
    m
}

/// Multiplicative operator `diag(d)` on a basis.
#[derive(Clone, Debug)]
pub struct DiagonalOperator {
    basis: Arc<ProductBasis>,
    diag: Vec<f64>,
    descriptor: ModelDescriptor,
}

impl DiagonalOperator {
    pub fn new(basis: Arc<ProductBasis>, diag: Vec<f64>, kind: ModelKind) -> Result<Self> {
        if diag.len() != basis.dim() {
            return Err(Error::Dimension { expected: basis.dim(), found: diag.len() });
        }
        Ok(Self { basis, diag, descriptor: ModelDescriptor::new(kind, vec![]) })
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }
}

impl LinearOperator for DiagonalOperator {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for ((yi, xi), d) in y.iter_mut().zip(x).zip(&self.diag) {
            *yi = d * xi;
        }
    }
}

impl Operator for DiagonalOperator {
    fn basis(&self) -> &Arc<ProductBasis> {
        &self.basis
    }

    fn descriptor(&self) -> &ModelDescriptor {
        &self.descriptor
    }
}

/// Symmetric operator stored as a dense matrix.
#[derive(Clone, Debug)]
pub struct DenseOperator {
    basis: Arc<ProductBasis>,
    matrix: DMatrix<f64>,
    descriptor: ModelDescriptor,
}

impl DenseOperator {
    pub fn new(basis: Arc<ProductBasis>, matrix: DMatrix<f64>, kind: ModelKind) -> Result<Self> {
        if matrix.nrows() != basis.dim() || matrix.ncols() != basis.dim() {
            return Err(Error::Dimension { expected: basis.dim(), found: matrix.nrows() });
        }
        Ok(Self { basis, matrix, descriptor: ModelDescriptor::new(kind, vec![]) })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

impl LinearOperator for DenseOperator {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.matrix.nrows();
        y.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..n {
            let xj = x[j];
            if xj != 0.0 {
                for (yi, a) in y.iter_mut().zip(self.matrix.column(j).iter()) {
                    *yi += a * xj;
                }
            }
        }
    }
}

impl Operator for DenseOperator {
    fn basis(&self) -> &Arc<ProductBasis> {
        &self.basis
    }

    fn descriptor(&self) -> &ModelDescriptor {
        &self.descriptor
    }
}
