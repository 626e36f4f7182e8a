use nalgebra::{Matrix2, Matrix6, Vector2, Vector6};
use serde::{Deserialize, Serialize};

use super::scan::PotentialSurface;
use crate::error::{Error, Result};

/// Default gap below which a minimum counts as an intersection.
pub const CI_THRESHOLD: f64 = 1e-4;

/// Minimum of the gap between two sheets over a two-dimensional
/// nuclear grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CiSearch {
    /// Refined position.
    pub position: [f64; 2],
    /// Refined gap; for a cone this extrapolates towards zero.
    pub gap: f64,
    /// Grid point with the smallest gap and its value.
    pub grid_position: [f64; 2],
    pub grid_gap: f64,
    pub found: bool,
}

/// Minimum of the least-squares quadratic through a 3×3 patch, in units
/// of the spacing from the centre, with the interpolated value. Falls
/// back to the centre when the fit is not convex.
fn quadratic_min(patch: &[[f64; 3]; 3]) -> ([f64; 2], f64) {
    let mut ata = Matrix6::zeros();
    let mut atb = Vector6::zeros();
    for (i, row) in patch.iter().enumerate() {
        for (j, &f) in row.iter().enumerate() {
            let (t, u) = (i as f64 - 1.0, j as f64 - 1.0);
            let phi = Vector6::new(1.0, t, u, t * t, t * u, u * u);
            ata += phi * phi.transpose();
            atb += phi * f;
        }
    }
    let c = match ata.lu().solve(&atb) {
        Some(c) => c,
        None => return ([0.0; 2], patch[1][1]),
    };
    let hess = Matrix2::new(2.0 * c[3], c[4], c[4], 2.0 * c[5]);
    if !(hess[(0, 0)] > 0.0 && hess.determinant() > 0.0) {
        return ([0.0; 2], patch[1][1]);
    }
    let x = match hess.lu().solve(&Vector2::new(-c[1], -c[2])) {
        Some(x) => x,
        None => return ([0.0; 2], patch[1][1]),
    };
    let (t, u) = (x[0].clamp(-1.0, 1.0), x[1].clamp(-1.0, 1.0));
    let v = c[0] + c[1] * t + c[2] * u + c[3] * t * t + c[4] * t * u + c[5] * u * u;
    ([t, u], v)
}

/// Locates the smallest `V_upper − V_lower` on a `q = 0` nuclear grid.
///
/// The squared gap is smooth (quadratic) around a conical intersection,
/// so the grid minimum is refined by a quadratic fit over its 3×3
/// neighbourhood. A search whose refined gap stays above `threshold`
/// reports `found = false`.
pub fn locate_ci(lower: &PotentialSurface, upper: &PotentialSurface, threshold: f64) -> Result<CiSearch> {
    let g = &lower.grid;
    if g.nuclear.len() != 2 || g.photon.is_some() {
        return Err(Error::InvalidGrid("conical-intersection search needs a 2D nuclear grid without photon axis".into()));
    }
    if upper.grid.dims() != g.dims() || upper.grid.nuclear != g.nuclear {
        return Err(Error::InvalidGrid("sheets are on different grids".into()));
    }
    let gap2: Vec<f64> = lower.values.iter().zip(&upper.values).map(|(a, b)| (b - a) * (b - a)).collect();
    let (best, _) = gap2
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .min_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| Error::InvalidGrid("no finite gap values".into()))?;
    let (nx, ny) = (g.nuclear[0].points, g.nuclear[1].points);
    let (ix, iy) = (best / ny, best % ny);
    let at = |i: usize, j: usize| gap2[i * ny + j];
    let mut pos = [g.nuclear[0].coord(ix), g.nuclear[1].coord(iy)];
    let mut refined = at(ix, iy);
    if ix > 0 && ix + 1 < nx && iy > 0 && iy + 1 < ny {
        let mut patch = [[0.0; 3]; 3];
        for (a, row) in patch.iter_mut().enumerate() {
            for (b, v) in row.iter_mut().enumerate() {
                *v = at(ix + a - 1, iy + b - 1);
            }
        }
        let ([t, u], v) = quadratic_min(&patch);
        pos[0] += t * g.nuclear[0].spacing;
        pos[1] += u * g.nuclear[1].spacing;
        refined = refined.min(v);
    }
    let gap = refined.max(0.0).sqrt();
    Ok(CiSearch {
        position: pos,
        gap,
        grid_position: [g.nuclear[0].coord(ix), g.nuclear[1].coord(iy)],
        grid_gap: at(ix, iy).sqrt(),
        found: gap < threshold,
    })
}
