use std::io::Write;

use serde::{Deserialize, Serialize};

use super::propagate::Method;
use super::system::SecondMoments;
use crate::error::{Error, Result};
use crate::models::{MultimodeHamiltonian, MultimodeParams};

/// Field observables along the cavity axis at one time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldProfile {
    pub method: Method,
    pub time: f64,
    pub positions: Vec<f64>,
    /// `E(x,t)`.
    pub field: Vec<f64>,
    /// `⟨Ê²(x,t)⟩`, raw or vacuum-subtracted.
    pub intensity: Vec<f64>,
    pub baseline_included: bool,
}

/// `n` interior points of `(0, V)`, spaced `V/(n+1)`.
pub fn cavity_positions(p: &MultimodeParams, n: usize) -> Vec<f64> {
    let dx = p.length / (n + 1) as f64;
    (1..=n).map(|i| i as f64 * dx).collect()
}

/// `E(x) = Σ_α ω_α λ_α(x) ⟨q̂_α⟩` over the modes of `h`.
pub fn electric_field(h: &MultimodeHamiltonian, amplitudes: &[f64], positions: &[f64]) -> Vec<f64> {
    let p = h.params();
    positions
        .iter()
        .map(|&x| {
            h.mode_numbers
                .iter()
                .zip(&h.omegas)
                .zip(amplitudes)
                .map(|((&a, w), q)| w * p.lambda_at(a, x) * q)
                .sum()
        })
        .collect()
}

/// Vacuum intensity `Σ_α ω_α λ_α(x)²/2` over all `M` cavity modes.
pub fn vacuum_intensity(p: &MultimodeParams, x: f64) -> f64 {
    (1..=p.modes).map(|a| 0.5 * p.omega(a) * p.lambda_at(a, x).powi(2)).sum()
}

/// `⟨Ê²(x)⟩ = Σ_{αβ} ω_α ω_β λ_α(x) λ_β(x) ⟨q̂_α q̂_β⟩`.
///
/// Modes outside `h` are in their vacuum and contribute only to the
/// baseline. With `baseline = false` the vacuum term is subtracted.
pub fn intensity(
    h: &MultimodeHamiltonian,
    moments: Option<&SecondMoments>,
    positions: &[f64],
    baseline: bool,
) -> Result<Vec<f64>> {
    let mom = moments.ok_or(Error::MissingMoments)?;
    let m = h.modes();
    if mom.omegas.len() != m {
        return Err(Error::Dimension { expected: m, found: mom.omegas.len() });
    }
    let p = h.params();
    Ok(positions
        .iter()
        .map(|&x| {
            let e: Vec<f64> =
                h.mode_numbers.iter().zip(&h.omegas).map(|(&a, w)| p.lambda_at(a, x) * (0.5 * w).sqrt()).collect();
            let mut acc = 0.0;
            for a in 0..m {
                let row: f64 = (0..m).map(|b| mom.normal[(a, b)] * e[b]).sum();
                acc += e[a] * row;
            }
            if baseline {
                acc + vacuum_intensity(p, x)
            } else {
                acc
            }
        })
        .collect())
}

/// Columns `x, E, E2, method, t`, one block per profile.
pub fn write_profiles_csv(profiles: &[FieldProfile], out: &mut dyn Write) -> Result<()> {
    writeln!(out, "x,E,E2,method,t")?;
    for pr in profiles {
        for i in 0..pr.positions.len() {
            writeln!(
                out,
                "{:.6},{:.10e},{:.10e},{},{}",
                pr.positions[i],
                pr.field[i],
                pr.intensity[i],
                pr.method.label(),
                pr.time
            )?;
        }
    }
    Ok(())
}
