//! State spaces, grids, wavefunctions and the operator contract shared by
//! every model.

mod basis;
mod fock;
mod grid;
mod operator;
mod stencil;
mod wavefunction;

pub use basis::{Factor, ProductBasis};
pub use fock::{FockScheme, FockTruncation};
pub use grid::{Axis, AxisKind, Grid};
pub use operator::{
    apply, expectation, hermiticity_defect, matrix_element, to_dense, CavityMode, DenseOperator,
    DiagonalOperator, LinearOperator, ModelDescriptor, ModelKind, Operator,
};
pub use stencil::Stencil;
pub use wavefunction::{inner, norm, WaveFunction, C64};

/// Expectation of a coordinate factor, `Σ |ψ|² x`.
///
/// Returns `None` when the basis has no coordinate of that kind.
pub fn coordinate_expectation(psi: &WaveFunction, kind: AxisKind) -> Option<f64> {
    let b = psi.basis();
    let k = b.position(kind)?;
    let coords = b.factors()[k].coordinates()?;
    let marginal = b.marginal(k, &psi.density());
    let total: f64 = marginal.iter().sum();
    Some(marginal.iter().zip(&coords).map(|(p, x)| p * x).sum::<f64>() / total)
}
