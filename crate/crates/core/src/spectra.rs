//! Sum-over-states absorption spectra and the Rabi splitting.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::eigen::EigenResult;
use crate::error::{invalid, Error, Result};
use crate::linalg::dot;
use crate::models::SPEED_OF_LIGHT;
use crate::state::Operator;

/// Default Lorentzian broadening (hartree).
pub const DEFAULT_BROADENING: f64 = 5e-4;
/// Only the lowest this many states enter the sum.
pub const MAX_STATES: usize = 30;
/// Transitions weaker than this are dropped.
pub const MIN_WEIGHT: f64 = 1e-10;

/// One transition from the ground state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pole {
    /// Index of the excited state.
    pub state: usize,
    /// Excitation energy `E_k − E_0`.
    pub energy: f64,
    /// `|⟨Ψ_k|R|Ψ_0⟩|²`.
    pub weight: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Spectrum {
    pub frequencies: Vec<f64>,
    pub sigma: Vec<f64>,
    pub broadening: f64,
    /// Poles sorted by energy.
    pub poles: Vec<Pole>,
    /// States considered (at most [`MAX_STATES`]).
    pub states_used: usize,
    /// States available but beyond the cut-off.
    pub states_truncated: usize,
    /// Considered states dropped for negligible weight.
    pub weak_dropped: usize,
}

/// `σ(ω) = (4πω/c) Im Σ_k |⟨Ψ_k|R|Ψ_0⟩|² / (E_k − E_0 − ω − iε)`.
pub fn absorption_spectrum(eig: &EigenResult, dip: &dyn Operator, omegas: &[f64], eps: f64) -> Result<Spectrum> {
    if eig.len() < 2 {
        return Err(Error::InsufficientStates(format!("a spectrum needs the ground and an excited state, got {}", eig.len())));
    }
    if !(eps > 0.0) {
        return Err(invalid("broadening", "must be positive"));
    }
    if dip.dim() != eig.basis.dim() {
        return Err(Error::Dimension { expected: eig.basis.dim(), found: dip.dim() });
    }
    let used = eig.len().min(MAX_STATES);
    let mut r0 = vec![0.0; dip.dim()];
    dip.apply(&eig.vectors[0], &mut r0);
    let mut poles = Vec::new();
    let mut weak = 0;
    for k in 1..used {
        let m = dot(&eig.vectors[k], &r0);
        let w = m * m;
        if w > MIN_WEIGHT {
            poles.push(Pole { state: k, energy: eig.values[k] - eig.values[0], weight: w });
        } else {
            weak += 1;
        }
    }
    poles.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    let sigma = omegas.iter().map(|&w| lorentzian_sum(&poles, w, eps)).collect();
    Ok(Spectrum {
        frequencies: omegas.to_vec(),
        sigma,
        broadening: eps,
        poles,
        states_used: used,
        states_truncated: eig.len() - used,
        weak_dropped: weak,
    })
}

fn lorentzian_sum(poles: &[Pole], w: f64, eps: f64) -> f64 {
    let pre = 4.0 * std::f64::consts::PI * w / SPEED_OF_LIGHT;
    pre * poles.iter().map(|p| p.weight * eps / ((p.energy - w).powi(2) + eps * eps)).sum::<f64>()
}

/// Uniform frequency grid `[lo, hi]` with `n` points.
pub fn frequency_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

impl Spectrum {
    /// Local maxima of σ(ω), as (frequency, value).
    pub fn peaks(&self) -> Vec<(f64, f64)> {
        let s = &self.sigma;
        (1..s.len().saturating_sub(1))
            .filter(|&i| s[i] > s[i - 1] && s[i] >= s[i + 1])
            .map(|i| (self.frequencies[i], s[i]))
            .collect()
    }

    pub fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        writeln!(out, "omega,sigma")?;
        for (w, s) in self.frequencies.iter().zip(&self.sigma) {
            writeln!(out, "{w:.10e},{s:.10e}")?;
        }
        Ok(())
    }

    pub fn write_poles_csv(&self, out: &mut dyn Write) -> Result<()> {
        writeln!(out, "state,energy,weight")?;
        for p in &self.poles {
            writeln!(out, "{},{:.12e},{:.6e}", p.state, p.energy, p.weight)?;
        }
        Ok(())
    }
}

/// `Ω_R = (E3 − E2)/ω_α`, with E2 and E3 the lower and upper polariton.
pub fn rabi_splitting(e2: f64, e3: f64, omega: f64) -> Result<f64> {
    if omega == 0.0 || !omega.is_finite() {
        return Err(invalid("omega", "mode frequency must be non-zero"));
    }
    if e3 < e2 {
        return Err(invalid("e3", format!("upper polariton {e3} lies below the lower one {e2}")));
    }
    Ok((e3 - e2) / omega)
}
