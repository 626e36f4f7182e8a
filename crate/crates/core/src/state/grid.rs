use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical meaning of a grid dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AxisKind {
    /// Nuclear separation `X`.
    NuclearRelative,
    /// Electron-electron separation `x`.
    ElectronRelative,
    /// Electronic centre of mass relative to the nuclear one, `ξ`.
    ElectronNuclearCenter,
    /// Photon displacement coordinate `q_α`.
    PhotonDisplacement,
    ElectronX,
    ElectronY,
    NuclearX,
    NuclearY,
}

impl AxisKind {
    pub fn label(&self) -> &'static str {
        match self {
            AxisKind::NuclearRelative => "X",
            AxisKind::ElectronRelative => "x",
            AxisKind::ElectronNuclearCenter => "xi",
            AxisKind::PhotonDisplacement => "q",
            AxisKind::ElectronX => "ex",
            AxisKind::ElectronY => "ey",
            AxisKind::NuclearX => "nx",
            AxisKind::NuclearY => "ny",
        }
    }

    pub fn is_photon(&self) -> bool {
        matches!(self, AxisKind::PhotonDisplacement)
    }
}

/// One uniformly spaced grid dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub kind: AxisKind,
    pub points: usize,
    pub spacing: f64,
    pub origin: f64,
}

impl Axis {
    pub fn new(kind: AxisKind, points: usize, spacing: f64, origin: f64) -> Result<Self> {
        if points < 3 {
            return Err(Error::InvalidGrid(format!(
                "axis {} needs at least 3 points, got {points}",
                kind.label()
            )));
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "axis {} spacing must be positive, got {spacing}",
                kind.label()
            )));
        }
        if !origin.is_finite() {
            return Err(Error::InvalidGrid(format!("axis {} origin is not finite", kind.label())));
        }
        Ok(Self { kind, points, spacing, origin })
    }

    /// Axis symmetric about zero.
    pub fn centered(kind: AxisKind, points: usize, spacing: f64) -> Result<Self> {
        let origin = -0.5 * (points as f64 - 1.0) * spacing;
        Self::new(kind, points, spacing, origin)
    }

    /// Axis spanning `[lo, hi]` inclusive.
    pub fn span(kind: AxisKind, lo: f64, hi: f64, points: usize) -> Result<Self> {
        if points < 3 || !(hi > lo) {
            return Err(Error::InvalidGrid(format!(
                "axis {} span [{lo}, {hi}] with {points} points is invalid",
                kind.label()
            )));
        }
        Self::new(kind, points, (hi - lo) / (points as f64 - 1.0), lo)
    }

    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.spacing
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.coord(i)).collect()
    }

    pub fn lo(&self) -> f64 {
        self.origin
    }

    pub fn hi(&self) -> f64 {
        self.coord(self.points - 1)
    }

    /// Same axis with the origin moved by `shift`.
    pub fn translated(&self, shift: f64) -> Self {
        Self { origin: self.origin + shift, ..self.clone() }
    }
}

/// A rectilinear grid built from independent axes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    axes: Vec<Axis>,
}

impl Grid {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidGrid("grid has no axes".into()));
        }
        for (i, a) in axes.iter().enumerate() {
            // Re-validate in case the axis was built by struct literal.
            Axis::new(a.kind, a.points, a.spacing, a.origin)?;
            if axes[..i].iter().any(|b| b.kind == a.kind) {
                return Err(Error::InvalidGrid(format!("axis {} appears twice", a.kind.label())));
            }
        }
        Ok(Self { axes })
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, kind: AxisKind) -> Option<&Axis> {
        self.axes.iter().find(|a| a.kind == kind)
    }

    pub fn dims(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.points).collect()
    }

    pub fn size(&self) -> usize {
        self.axes.iter().map(|a| a.points).product()
    }

    /// Coordinates of the flattened point `index` (last axis fastest).
    pub fn point(&self, mut index: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.axes.len()];
        for (k, a) in self.axes.iter().enumerate().rev() {
            out[k] = a.coord(index % a.points);
            index /= a.points;
        }
        out
    }
}
