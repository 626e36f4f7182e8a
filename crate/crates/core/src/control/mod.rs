//! Local optimal control of the extended Rabi model: the target dipole
//! path fixes `v(t)` by inversion, and the path and drive coefficients
//! are tuned to minimize `P = ∫v² dt`.

mod bfgs;
mod invert;
mod path;

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use bfgs::{gradient, minimize, BfgsOptions, Minimum};
pub use invert::{
    explicit_penalty, explicit_potential, free_evolution, free_trajectory, initial_state, invert_control, penalty, ConstantPath,
    Inversion, InversionOptions, TargetPath,
};
pub use path::{DensityPath, DipoleDrive, AMPLITUDE, N_BASIS, T_FINAL};

use crate::error::{invalid, Result};
use crate::models::RabiParams;

/// Penalty assigned to trial points whose inversion fails.
pub const BARRIER: f64 = 1e3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizeOptions {
    pub inversion: InversionOptions,
    pub bfgs: BfgsOptions,
    /// Number of path functions N.
    pub path_basis: usize,
    /// Number of drive functions M.
    pub drive_basis: usize,
    pub amplitude: f64,
    pub starts: usize,
    pub seed: u64,
    /// Half-width of the uniform perturbations defining starts 1.. .
    pub spread: f64,
    /// Explicit start 0 as `(c, d)`; `d` is ignored with the drive off.
    pub initial: Option<(Vec<f64>, Vec<f64>)>,
    /// Random restarts of the cheap uncoupled problem that seeds start 0.
    pub warm_starts: usize,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            inversion: InversionOptions::default(),
            bfgs: BfgsOptions::default(),
            path_basis: N_BASIS,
            drive_basis: N_BASIS,
            amplitude: AMPLITUDE,
            starts: 5,
            seed: 7,
            spread: 0.02,
            initial: None,
            warm_starts: 24,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StartSummary {
    pub initial_penalty: f64,
    pub penalty: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ControlSolution {
    pub params: RabiParams,
    pub vary_drive: bool,
    pub path: DensityPath,
    pub drive: DipoleDrive,
    /// `∫v² dt` of the piecewise-constant control.
    pub penalty: f64,
    /// Trapezoid value on the step-start samples, for comparison.
    pub penalty_trapezoid: f64,
    pub sigma_z_final: f64,
    pub max_deviation: f64,
    /// Best-so-far penalty per accepted iteration of the winning start.
    pub history: Vec<f64>,
    pub starts: Vec<StartSummary>,
    #[serde(skip)]
    pub inversion: Inversion,
}

#[derive(Serialize)]
struct Manifest<'a> {
    params: &'a RabiParams,
    vary_drive: bool,
    path_coefficients: &'a [f64],
    drive_coefficients: &'a [f64],
    amplitude: f64,
    t_final: f64,
    penalty: f64,
    penalty_trapezoid: f64,
    sigma_z_final: f64,
    max_deviation: f64,
    photon_tail_weight: f64,
    history: &'a [f64],
    starts: &'a [StartSummary],
}

impl ControlSolution {
    /// Columns `t, sigma_z, v, j, photons`; `v` and `j` are the values held
    /// on the step that starts at `t`.
    pub fn write_trace_csv(&self, out: &mut dyn Write) -> Result<()> {
        let inv = &self.inversion;
        writeln!(out, "t,sigma_z,v,j,photons")?;
        for k in 0..inv.times.len() {
            let (v, j) = inv.signal(inv.times[k]);
            writeln!(out, "{:.6},{:.12e},{:.12e},{:.12e},{:.6e}", inv.times[k], inv.sigma_z[k], v, j, inv.photons[k])?;
        }
        Ok(())
    }

    pub fn manifest_json(&self) -> Result<String> {
        let m = Manifest {
            params: &self.params,
            vary_drive: self.vary_drive,
            path_coefficients: &self.path.coefficients,
            drive_coefficients: &self.drive.coefficients,
            amplitude: self.path.amplitude,
            t_final: self.path.t_final,
            penalty: self.penalty,
            penalty_trapezoid: self.penalty_trapezoid,
            sigma_z_final: self.sigma_z_final,
            max_deviation: self.max_deviation,
            photon_tail_weight: self.inversion.tail_weight,
            history: &self.history,
            starts: &self.starts,
        };
        Ok(serde_json::to_string_pretty(&m)?)
    }

    /// Writes `control.json` and `control_trace.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("control.json"), self.manifest_json()?)?;
        let mut f = std::io::BufWriter::new(std::fs::File::create(dir.join("control_trace.csv"))?);
        self.write_trace_csv(&mut f)?;
        f.flush()?;
        Ok(())
    }
}

fn split(x: &[f64], opts: &OptimizeOptions, vary_drive: bool) -> (DensityPath, DipoleDrive) {
    let nc = opts.path_basis - 1;
    let t = opts.inversion.t_final;
    let path = DensityPath::from_free(&x[..nc], opts.amplitude, t);
    let drive = if vary_drive { DipoleDrive::new(x[nc..].to_vec(), t) } else { DipoleDrive::off(t) };
    (path, drive)
}

/// Penalty of one trial point, or [`BARRIER`] when the inversion fails.
pub fn trial_penalty(x: &[f64], p: &RabiParams, vary_drive: bool, opts: &OptimizeOptions) -> f64 {
    let (path, drive) = split(x, opts, vary_drive);
    match invert_control(&path, &drive, p, &opts.inversion) {
        Ok(inv) => inv.penalty(),
        Err(_) => BARRIER,
    }
}

fn perturbed(base: &[f64], spread: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    base.iter().map(|b| b + spread * rng.gen_range(-1.0..1.0)).collect()
}

/// Free path coefficients minimizing the explicit uncoupled penalty,
/// from the pure `cos(ω̃t)` path and seeded random restarts.
pub fn uncoupled_optimum(t0: f64, opts: &OptimizeOptions) -> Minimum {
    let nc = opts.path_basis - 1;
    let f = |x: &[f64]| {
        let path = DensityPath::from_free(x, opts.amplitude, opts.inversion.t_final);
        explicit_penalty(&path, t0, &opts.inversion).unwrap_or(BARRIER)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut starts = vec![vec![0.0; nc]];
    for _ in 1..opts.warm_starts.max(1) {
        // Random points on the simplex Σc = 1, drawn through the free part.
        starts.push(perturbed(&vec![1.0 / opts.path_basis as f64; nc], 0.5, &mut rng));
    }
    starts
        .par_iter()
        .map(|x0| minimize(&f, x0, &opts.bfgs))
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .expect("at least one start")
}

/// Minimizes `P` over the path (and optionally drive) coefficients with
/// seeded multi-start BFGS.
///
/// Start 0 is `opts.initial` when given. Otherwise it is the best of three
/// drive-free candidates: the uncoupled optimum, the basis fit of the
/// free trajectory and the plain `cos(ω̃t)` path. The other starts
/// perturb start 0.
pub fn optimize(p: &RabiParams, vary_drive: bool, opts: &OptimizeOptions) -> Result<ControlSolution> {
    p.validate()?;
    if opts.path_basis < 1 || opts.starts == 0 {
        return Err(invalid("path_basis", "need at least one path function and one start"));
    }
    let nc = opts.path_basis - 1;
    let nd = if vary_drive { opts.drive_basis } else { 0 };
    let f = |x: &[f64]| trial_penalty(x, p, vary_drive, opts);
    let x0 = match &opts.initial {
        Some((c, d)) => {
            let path = DensityPath::new(c.clone(), opts.amplitude, opts.inversion.t_final)?;
            let mut x = path.free().to_vec();
            if vary_drive {
                let mut d = d.clone();
                d.resize(nd, 0.0);
                x.extend(d);
            }
            x
        }
        None => {
            let warm = OptimizeOptions { bfgs: BfgsOptions::default(), ..opts.clone() };
            let free = free_trajectory(p, &opts.inversion)?;
            let fitted = DensityPath::fit(&free, opts.path_basis, opts.amplitude, opts.inversion.t_final)?;
            let candidates = [uncoupled_optimum(p.t0, &warm).x, fitted.free().to_vec(), vec![0.0; nc]];
            let mut best = candidates
                .par_iter()
                .map(|c| {
                    let mut x = c.clone();
                    x.resize(nc + nd, 0.0);
                    (f(&x), x)
                })
                .min_by(|a, b| a.0.total_cmp(&b.0))
                .expect("three candidates")
                .1;
            best.truncate(nc + nd);
            best
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x9e37_79b9);
    let mut starts = vec![x0.clone()];
    for _ in 1..opts.starts {
        starts.push(perturbed(&x0, opts.spread, &mut rng));
    }
    let runs: Vec<Minimum> = starts.par_iter().map(|x| minimize(&f, x, &opts.bfgs)).collect();
    let best = runs.iter().min_by(|a, b| a.value.total_cmp(&b.value)).expect("at least one start");
    let (path, drive) = split(&best.x, opts, vary_drive);
    let inversion = invert_control(&path, &drive, p, &opts.inversion)?;
    let mut sampled = inversion.v.clone();
    sampled.push(*inversion.v.last().unwrap_or(&0.0));
    Ok(ControlSolution {
        params: p.clone(),
        vary_drive,
        penalty: inversion.penalty(),
        penalty_trapezoid: penalty(&sampled, opts.inversion.t_final),
        sigma_z_final: inversion.final_sigma_z(),
        max_deviation: inversion.max_deviation,
        history: best.history.clone(),
        starts: runs
            .iter()
            .map(|r| StartSummary {
                initial_penalty: r.history[0],
                penalty: r.value,
                iterations: r.iterations,
                evaluations: r.evaluations,
            })
            .collect(),
        path,
        drive,
        inversion,
    })
}
