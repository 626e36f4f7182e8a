use serde::{Deserialize, Serialize};

use super::field::{cavity_positions, electric_field, intensity, FieldProfile};
use super::meanfield::{propagate_meanfield, MeanFieldState};
use super::propagate::{propagate_exact, Method, PropagationOptions, Trajectory};
use super::system::TwoSiteSystem;
use crate::error::{invalid, Result};
use crate::models::{MultimodeHamiltonian, MultimodeParams};
use crate::state::{LinearOperator, C64};

/// Panel times of the emission snapshots (a.u.).
pub const SNAPSHOT_TIMES: [f64; 4] = [100.0, 600.0, 1200.0, 2200.0];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EmissionOptions {
    pub params: MultimodeParams,
    pub dt: f64,
    pub t_final: f64,
    pub snapshots: Vec<f64>,
    /// Number of field sample points inside the cavity.
    pub positions: usize,
    pub record_every: usize,
    /// Report raw intensities instead of vacuum-subtracted ones.
    pub raw_intensity: bool,
}

impl Default for EmissionOptions {
    fn default() -> Self {
        Self {
            params: MultimodeParams::default(),
            dt: 0.1,
            t_final: 2200.0,
            snapshots: SNAPSHOT_TIMES.to_vec(),
            positions: 1000,
            record_every: 5,
            raw_intensity: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EmissionResult {
    pub setup: u8,
    pub trajectory: Trajectory,
    pub profiles: Vec<FieldProfile>,
}

/// Two-site amplitudes of the initial matter state.
///
/// Setup 1 is the excited eigenstate of `−t₀σ_x`; setup 2 is the site
/// superposition `sqrt(1/500)|s₁⟩ + sqrt(499/500)|s₂⟩`.
pub fn initial_matter(setup: u8) -> Result<[C64; 2]> {
    match setup {
        1 => {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            Ok([C64::new(h, 0.0), C64::new(-h, 0.0)])
        }
        2 => Ok([C64::new((1.0f64 / 500.0).sqrt(), 0.0), C64::new((499.0f64 / 500.0).sqrt(), 0.0)]),
        _ => Err(invalid("setup", "emission setups are 1 and 2")),
    }
}

/// Matter state times the photon vacuum on the basis of `h`.
pub fn product_state(h: &MultimodeHamiltonian, matter: [C64; 2]) -> Vec<C64> {
    let n = h.sector().dim();
    let mut psi = vec![C64::new(0.0, 0.0); h.dim()];
    psi[0] = matter[0];
    psi[n] = matter[1];
    psi
}

/// Spontaneous-emission run for one setup and method, with field
/// profiles at the snapshot times. Only the modes that couple to the
/// emitter are propagated; the others stay in their vacuum.
pub fn emission_experiment(setup: u8, method: Method, opts: &EmissionOptions) -> Result<EmissionResult> {
    let matter = initial_matter(setup)?;
    let mut h = MultimodeHamiltonian::coupled(&opts.params)?;
    let popts = PropagationOptions {
        dt: opts.dt,
        t_final: opts.t_final,
        record_every: opts.record_every,
        moment_times: opts.snapshots.clone(),
        ..Default::default()
    };
    let trajectory = match method {
        Method::Exact => {
            let start = product_state(&h, matter);
            propagate_exact(&mut h, &start, &popts, None)?
        }
        Method::MeanField => {
            let init = MeanFieldState::vacuum(matter, h.modes());
            propagate_meanfield(&h.mean_field(), &init, &popts, None)?
        }
        Method::Oep => return Err(invalid("method", "OEP propagation is not implemented")),
    };
    let positions = cavity_positions(&opts.params, opts.positions);
    let profiles = trajectory
        .snapshots
        .iter()
        .map(|s| {
            Ok(FieldProfile {
                method,
                time: s.time,
                field: electric_field(&h, &s.amplitudes, &positions),
                intensity: intensity(&h, Some(&s.moments), &positions, opts.raw_intensity)?,
                positions: positions.clone(),
                baseline_included: opts.raw_intensity,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EmissionResult { setup, trajectory, profiles })
}

/// Running maximum of `|σ_z|` over a centred window of `width` time units.
pub fn dipole_envelope(times: &[f64], sigma_z: &[f64], width: f64) -> Vec<f64> {
    let n = times.len();
    let mut out = vec![0.0; n];
    let (mut lo, mut hi) = (0, 0);
    let mut window: std::collections::VecDeque<usize> = Default::default();
    for i in 0..n {
        while hi < n && times[hi] <= times[i] + 0.5 * width {
            while window.back().is_some_and(|&k| sigma_z[k].abs() <= sigma_z[hi].abs()) {
                window.pop_back();
            }
            window.push_back(hi);
            hi += 1;
        }
        while times[lo] < times[i] - 0.5 * width {
            lo += 1;
        }
        while window.front().is_some_and(|&k| k < lo) {
            window.pop_front();
        }
        out[i] = window.front().map(|&k| sigma_z[k].abs()).unwrap_or(0.0);
    }
    out
}

/// First time the envelope falls below `1/e` of its initial value.
pub fn decay_time(times: &[f64], envelope: &[f64]) -> Option<f64> {
    let a0 = *envelope.first()?;
    times.iter().zip(envelope).find(|(_, e)| **e < a0 / std::f64::consts::E).map(|(t, _)| *t)
}

/// First time after the decay at which the envelope climbs more than
/// `rise` (a fraction of the initial amplitude) above its lowest value
/// since the decay.
pub fn revival_time(times: &[f64], envelope: &[f64], rise: f64) -> Option<f64> {
    let td = decay_time(times, envelope)?;
    let a0 = envelope[0];
    let mut low = f64::INFINITY;
    for (t, e) in times.iter().zip(envelope) {
        if *t < td {
            continue;
        }
        low = low.min(*e);
        if *e > low + rise * a0 {
            return Some(*t);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn setup_two_initial_dipole() {
        let m = initial_matter(2).unwrap();
        let sz = m[0].norm_sqr() - m[1].norm_sqr();
        assert!((sz + 0.996).abs() < 1e-15);
        assert!(initial_matter(3).is_err());
    }

    #[test]
    fn envelope_of_damped_cosine() {
        let times: Vec<f64> = (0..20000).map(|i| i as f64 * 0.1).collect();
        let sz: Vec<f64> = times
            .iter()
            .map(|&t| {
                let env = (-t / 100.0f64).exp() + if t > 1500.0 { 0.4 * (1.0 - (-(t - 1500.0) / 50.0f64).exp()) } else { 0.0 };
                env * (0.4 * t).cos()
            })
            .collect();
        let env = dipole_envelope(&times, &sz, std::f64::consts::PI / 0.2);
        let td = decay_time(&times, &env).unwrap();
        assert!((td - 100.0).abs() < 10.0, "{td}");
        let tr = revival_time(&times, &env, 0.05).unwrap();
        assert!(tr > 1490.0 && tr < 1520.0, "{tr}");
    }
}
