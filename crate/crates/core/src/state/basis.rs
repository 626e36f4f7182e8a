use serde::{Deserialize, Serialize};

use super::fock::FockTruncation;
use super::grid::{Axis, AxisKind, Grid};
use crate::error::{Error, Result};

/// One tensor factor of a product basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Factor {
    /// Uniform real-space (or photon-coordinate) grid dimension.
    Axis(Axis),
    /// Truncated photon number basis.
    Fock(FockTruncation),
    /// Two sites `|s1⟩, |s2⟩`, with `σ_z = |s1⟩⟨s1| − |s2⟩⟨s2|`.
    TwoLevel,
    /// Non-uniform point set, e.g. a discrete-variable photon representation.
    Points { kind: AxisKind, values: Vec<f64> },
    /// Electronic channel index of a contracted representation.
    Channels(usize),
}

impl Factor {
    pub fn dim(&self) -> usize {
        match self {
            Factor::Axis(a) => a.points,
            Factor::Fock(f) => f.dim(),
            Factor::TwoLevel => 2,
            Factor::Points { values, .. } => values.len(),
            Factor::Channels(n) => *n,
        }
    }

    /// Coordinate values if the factor is a spatial or photon coordinate.
    pub fn coordinates(&self) -> Option<Vec<f64>> {
        match self {
            Factor::Axis(a) => Some(a.coords()),
            Factor::Points { values, .. } => Some(values.clone()),
            _ => None,
        }
    }

    pub fn kind(&self) -> Option<AxisKind> {
        match self {
            Factor::Axis(a) => Some(a.kind),
            Factor::Points { kind, .. } => Some(*kind),
            _ => None,
        }
    }
}

/// Ordered tensor product of factors; the last factor varies fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductBasis {
    factors: Vec<Factor>,
    dims: Vec<usize>,
    strides: Vec<usize>,
    dim: usize,
}

impl ProductBasis {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidGrid("product basis needs at least one factor".into()));
        }
        let dims: Vec<usize> = factors.iter().map(Factor::dim).collect();
        if dims.contains(&0) {
            return Err(Error::InvalidGrid("product basis factor with zero dimension".into()));
        }
        let mut strides = vec![1; dims.len()];
        for k in (0..dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * dims[k + 1];
        }
        let dim = dims.iter().product();
        Ok(Self { factors, dims, strides, dim })
    }

    /// Basis made of the grid axes followed by `extra` factors.
    pub fn from_grid(grid: &Grid, extra: Vec<Factor>) -> Result<Self> {
        let mut f: Vec<Factor> = grid.axes().iter().cloned().map(Factor::Axis).collect();
        f.extend(extra);
        Self::new(f)
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn flatten(&self, multi: &[usize]) -> usize {
        debug_assert_eq!(multi.len(), self.dims.len());
        multi.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn unflatten(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for k in (0..self.dims.len()).rev() {
            out[k] = index % self.dims[k];
            index /= self.dims[k];
        }
        out
    }

    /// Position of the first coordinate factor of the given kind.
    pub fn position(&self, kind: AxisKind) -> Option<usize> {
        self.factors.iter().position(|f| f.kind() == Some(kind))
    }

    /// Position of the first factor satisfying `pred`.
    pub fn find(&self, pred: impl Fn(&Factor) -> bool) -> Option<usize> {
        self.factors.iter().position(pred)
    }

    /// Marginal probability distribution over factor `k`.
    pub fn marginal(&self, k: usize, density: &[f64]) -> Vec<f64> {
        let n = self.dims[k];
        let stride = self.strides[k];
        let mut out = vec![0.0; n];
        for (i, p) in density.iter().enumerate() {
            out[(i / stride) % n] += p;
        }
        out
    }

    /// Probability within `width` points of either end of any uniform
    /// axis that is not a photon coordinate.
    pub fn edge_weight(&self, density: &[f64], width: usize) -> f64 {
        let edge_axes: Vec<usize> = self
            .factors
            .iter()
            .enumerate()
            .filter_map(|(k, f)| match f {
                Factor::Axis(a) if !a.kind.is_photon() => Some(k),
                _ => None,
            })
            .collect();
        density
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                edge_axes.iter().any(|&k| {
                    let j = (i / self.strides[k]) % self.dims[k];
                    j < width || j + width >= self.dims[k]
                })
            })
            .map(|(_, p)| p)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> ProductBasis {
        ProductBasis::new(vec![
            Factor::Axis(Axis::centered(AxisKind::NuclearRelative, 4, 0.1).unwrap()),
            Factor::TwoLevel,
            Factor::Fock(FockTruncation::single(3)),
        ])
        .unwrap()
    }

    #[test]
    fn last_factor_is_fastest() {
        let b = sample();
        assert_eq!(b.dim(), 32);
        assert_eq!(b.strides(), &[8, 4, 1]);
        assert_eq!(b.flatten(&[1, 1, 2]), 14);
    }

    #[test]
    fn marginal_sums_density() {
        let b = sample();
        let density = vec![1.0 / 32.0; 32];
        let m = b.marginal(1, &density);
        assert!((m[0] - 0.5).abs() < 1e-15 && (m[1] - 0.5).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn index_round_trip(i in 0usize..32) {
            let b = sample();
            prop_assert_eq!(b.flatten(&b.unflatten(i)), i);
        }
    }
}
