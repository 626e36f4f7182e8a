use std::io::Write;

use serde::{Deserialize, Serialize};

use super::krylov::{spectral_radius, KrylovStepper};
use super::system::{SecondMoments, TwoSiteSystem};
use crate::error::{invalid, Error, Result};
use crate::state::{LinearOperator, C64};

/// Above this `dt·E_max` a propagation records a warning.
pub const STEP_WARNING: f64 = 0.5;
/// Above this `dt·E_max` a propagation is refused.
pub const STEP_LIMIT: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    MeanField,
    /// Exchange-correlation propagation; not implemented, kept so output
    /// schemas carry the label.
    Oep,
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::MeanField => "mean-field",
            Method::Oep => "oep",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropagationOptions {
    pub dt: f64,
    pub t_final: f64,
    pub krylov_dim: usize,
    pub krylov_tol: f64,
    /// Observables are stored every this many steps (and at the end).
    pub record_every: usize,
    /// Times at which second moments are stored.
    pub moment_times: Vec<f64>,
    pub record_modes: bool,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        Self {
            dt: 0.1,
            t_final: 0.0,
            krylov_dim: 40,
            krylov_tol: 1e-12,
            record_every: 1,
            moment_times: vec![],
            record_modes: true,
        }
    }
}

impl PropagationOptions {
    pub fn new(dt: f64, t_final: f64) -> Self {
        Self { dt, t_final, ..Default::default() }
    }

    /// Number of steps and the step that exactly divides `t_final`.
    pub fn steps(&self) -> Result<(usize, f64)> {
        if !(self.dt > 0.0) || !(self.t_final >= 0.0) {
            return Err(invalid("dt", "time step must be positive and the final time non-negative"));
        }
        let n = (self.t_final / self.dt - 1e-9).ceil().max(0.0) as usize;
        if n == 0 {
            return Ok((0, self.dt));
        }
        Ok((n, self.t_final / n as f64))
    }

    fn moment_steps(&self, dt: f64, n: usize) -> Vec<(usize, f64)> {
        self.moment_times.iter().map(|&t| (((t / dt).round() as usize).min(n), t)).collect()
    }
}

/// Second moments and mode amplitudes at one time.
#[derive(Clone, Debug)]
pub struct MomentSnapshot {
    pub time: f64,
    pub amplitudes: Vec<f64>,
    pub moments: SecondMoments,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub method: Method,
    pub times: Vec<f64>,
    pub sigma_z: Vec<f64>,
    pub norm: Vec<f64>,
    pub energy: Vec<f64>,
    /// `⟨q̂_α⟩` per recorded step (empty when not recorded).
    pub modes: Vec<Vec<f64>>,
    pub snapshots: Vec<MomentSnapshot>,
    pub omegas: Vec<f64>,
    pub warnings: Vec<String>,
    /// Full state at the final time (exact propagation only).
    pub final_state: Option<Vec<C64>>,
}

impl Trajectory {
    pub(crate) fn new(method: Method, omegas: Vec<f64>) -> Self {
        Self {
            method,
            times: vec![],
            sigma_z: vec![],
            norm: vec![],
            energy: vec![],
            modes: vec![],
            snapshots: vec![],
            omegas,
            warnings: vec![],
            final_state: None,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest `|‖ψ(t)‖ − ‖ψ(0)‖|`.
    pub fn norm_drift(&self) -> f64 {
        let n0 = self.norm.first().copied().unwrap_or(1.0);
        self.norm.iter().map(|n| (n - n0).abs()).fold(0.0, f64::max)
    }

    pub fn energy_drift(&self) -> f64 {
        let e0 = self.energy.first().copied().unwrap_or(0.0);
        self.energy.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max)
    }

    /// Stored moments closest to `t`.
    pub fn snapshot_at(&self, t: f64) -> Result<&MomentSnapshot> {
        self.snapshots
            .iter()
            .filter(|s| (s.time - t).abs() < 1e-6 * t.abs().max(1.0))
            .min_by(|a, b| (a.time - t).abs().total_cmp(&(b.time - t).abs()))
            .ok_or(Error::MissingMoments)
    }

    /// Columns `t, sigma_z, norm, energy`.
    pub fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        writeln!(out, "t,sigma_z,norm,energy")?;
        for i in 0..self.len() {
            writeln!(out, "{:.6},{:.12e},{:.15},{:.12e}", self.times[i], self.sigma_z[i], self.norm[i], self.energy[i])?;
        }
        Ok(())
    }
}

/// Checks `dt·E_max` against the warning and hard limits.
pub fn check_step(h: &dyn LinearOperator, dt: f64) -> Result<Option<String>> {
    let e_max = spectral_radius(h, 40, 0x5eed);
    let product = dt * e_max;
    if product > STEP_LIMIT {
        return Err(Error::StepSize { dt, product, limit: STEP_LIMIT });
    }
    if product > STEP_WARNING {
        return Ok(Some(format!("dt*E_max = {product:.3} exceeds {STEP_WARNING}; fast phases are under-resolved")));
    }
    Ok(None)
}

/// Time-dependent external signals `t ↦ (v, j)`.
pub type Signals<'a> = &'a dyn Fn(f64) -> (f64, f64);

fn energy(h: &dyn TwoSiteSystem, psi: &[C64], buf: &mut [C64]) -> f64 {
    h.apply_complex(psi, buf);
    psi.iter().zip(buf.iter()).map(|(a, b)| (a.conj() * b).re).sum()
}

/// Propagates `psi0` under `h`, sampling the signals at step midpoints.
pub fn propagate_exact(
    h: &mut dyn TwoSiteSystem,
    psi0: &[C64],
    opts: &PropagationOptions,
    signals: Option<Signals>,
) -> Result<Trajectory> {
    if psi0.len() != h.dim() {
        return Err(Error::Dimension { expected: h.dim(), found: psi0.len() });
    }
    let (n, dt) = opts.steps()?;
    let mut traj = Trajectory::new(Method::Exact, h.mode_frequencies());
    let set = |h: &mut dyn TwoSiteSystem, t: f64| -> Result<()> {
        match signals {
            Some(f) => {
                let (v, j) = f(t);
                h.set_signals(v, j)
            }
            None => Ok(()),
        }
    };
    for k in 0..=8 {
        set(h, opts.t_final * k as f64 / 8.0)?;
        if let Some(w) = check_step(h, dt)? {
            traj.warnings.push(w);
            break;
        }
        if signals.is_none() {
            break;
        }
    }
    let moment_steps = opts.moment_steps(dt, n);
    let mut psi = psi0.to_vec();
    let mut buf = vec![C64::new(0.0, 0.0); psi.len()];
    let mut stepper = KrylovStepper::new(opts.krylov_dim, opts.krylov_tol);
    let every = opts.record_every.max(1);
    for step in 0..=n {
        let t = step as f64 * dt;
        if step % every == 0 || step == n {
            set(h, t)?;
            traj.times.push(t);
            traj.sigma_z.push(h.sigma_z(&psi));
            traj.norm.push(psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt());
            traj.energy.push(energy(h, &psi, &mut buf));
            if opts.record_modes {
                traj.modes.push(h.mode_amplitudes(&psi));
            }
        }
        for &(s, tm) in &moment_steps {
            if s == step {
                traj.snapshots.push(MomentSnapshot {
                    time: tm,
                    amplitudes: h.mode_amplitudes(&psi),
                    moments: h.second_moments(&psi),
                });
            }
        }
        if step == n {
            break;
        }
        set(h, t + 0.5 * dt)?;
        stepper.step(h, &mut psi, dt)?;
    }
    traj.final_state = Some(psi);
    Ok(traj)
}
