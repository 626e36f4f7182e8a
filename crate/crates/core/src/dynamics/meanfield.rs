use super::propagate::{MomentSnapshot, PropagationOptions, Signals, Trajectory, Method, STEP_LIMIT, STEP_WARNING};
use super::system::{MeanFieldModel, SecondMoments};
use crate::error::{Error, Result};
use crate::state::C64;

/// Factorized state: two-site amplitudes and classical mode coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct MeanFieldState {
    pub matter: [C64; 2],
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

impl MeanFieldState {
    /// Matter state with every mode in its vacuum (`q = p = 0`).
    pub fn vacuum(matter: [C64; 2], modes: usize) -> Self {
        Self { matter, q: vec![0.0; modes], p: vec![0.0; modes] }
    }

    pub fn sigma_z(&self) -> f64 {
        self.matter[0].norm_sqr() - self.matter[1].norm_sqr()
    }

    pub fn sigma_x(&self) -> f64 {
        2.0 * (self.matter[0].conj() * self.matter[1]).re
    }

    pub fn norm(&self) -> f64 {
        (self.matter[0].norm_sqr() + self.matter[1].norm_sqr()).sqrt()
    }
}

/// `exp(−i(−t₀σ_x + bσ_z)τ)` applied to the matter amplitudes.
fn matter_step(c: &mut [C64; 2], t0: f64, b: f64, tau: f64) {
    let r = (t0 * t0 + b * b).sqrt();
    if r == 0.0 {
        return;
    }
    let (s, co) = (r * tau).sin_cos();
    let h0 = b * c[0] - t0 * c[1];
    let h1 = -t0 * c[0] - b * c[1];
    let f = C64::new(0.0, -s / r);
    c[0] = c[0] * co + f * h0;
    c[1] = c[1] * co + f * h1;
}

fn field(m: &MeanFieldModel, q: &[f64]) -> f64 {
    m.couplings.iter().zip(q).map(|(c, q)| c * q).sum()
}

fn energy(m: &MeanFieldModel, s: &MeanFieldState, v: f64, j: f64) -> f64 {
    let b = v + field(m, &s.q);
    let osc: f64 = (0..m.omegas.len())
        .map(|a| 0.5 * s.p[a] * s.p[a] + 0.5 * m.omegas[a].powi(2) * s.q[a] * s.q[a] + j * m.drive[a] * s.q[a])
        .sum();
    -m.t0 * s.sigma_x() + b * s.sigma_z() + osc
}

/// Semi-classical propagation: the matter factor evolves under the
/// instantaneous classical field while every mode obeys
/// `q̈_α + ω_α² q_α = −c_α⟨σ_z⟩ − s_α j`.
///
/// Strang splitting: half kick, half matter step, drift, half matter
/// step, half kick. The oscillator part is the symplectic leapfrog.
pub fn propagate_meanfield(
    model: &MeanFieldModel,
    init: &MeanFieldState,
    opts: &PropagationOptions,
    signals: Option<Signals>,
) -> Result<Trajectory> {
    let nm = model.omegas.len();
    if init.q.len() != nm || init.p.len() != nm || model.couplings.len() != nm || model.drive.len() != nm {
        return Err(Error::Dimension { expected: nm, found: init.q.len() });
    }
    let (n, dt) = opts.steps()?;
    let mut traj = Trajectory::new(Method::MeanField, model.omegas.clone());
    let w_max = model.omegas.iter().copied().fold(0.0, f64::max);
    let product = dt * w_max.max(model.t0.abs());
    if product > STEP_LIMIT {
        return Err(Error::StepSize { dt, product, limit: STEP_LIMIT });
    }
    if product > STEP_WARNING {
        traj.warnings.push(format!("dt*E_max = {product:.3} exceeds {STEP_WARNING}"));
    }
    let sig = |t: f64| signals.map(|f| f(t)).unwrap_or((0.0, 0.0));
    let moment_steps: Vec<(usize, f64)> =
        opts.moment_times.iter().map(|&t| (((t / dt).round() as usize).min(n), t)).collect();
    let mut s = init.clone();
    let every = opts.record_every.max(1);
    let kick = |s: &mut MeanFieldState, j: f64, tau: f64| {
        let sz = s.sigma_z();
        for a in 0..nm {
            s.p[a] -= tau * (model.omegas[a].powi(2) * s.q[a] + model.couplings[a] * sz + model.drive[a] * j);
        }
    };
    for step in 0..=n {
        let t = step as f64 * dt;
        if step % every == 0 || step == n {
            let (v, j) = sig(t);
            traj.times.push(t);
            traj.sigma_z.push(s.sigma_z());
            traj.norm.push(s.norm());
            traj.energy.push(energy(model, &s, v, j));
            if opts.record_modes {
                traj.modes.push(s.q.clone());
            }
        }
        for &(k, tm) in &moment_steps {
            if k == step {
                traj.snapshots.push(MomentSnapshot {
                    time: tm,
                    amplitudes: s.q.clone(),
                    moments: SecondMoments::coherent(&model.omegas, &s.q),
                });
            }
        }
        if step == n {
            break;
        }
        let (v, j) = sig(t + 0.5 * dt);
        kick(&mut s, j, 0.5 * dt);
        matter_step(&mut s.matter, model.t0, v + field(model, &s.q), 0.5 * dt);
        for a in 0..nm {
            s.q[a] += dt * s.p[a];
        }
        matter_step(&mut s.matter, model.t0, v + field(model, &s.q), 0.5 * dt);
        kick(&mut s, j, 0.5 * dt);
    }
    Ok(traj)
}
