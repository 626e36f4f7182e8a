use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::config::{DimerScanConfig, DimerSpectrumConfig, EmissionConfig, RabiControlConfig, ShinMetiuConfig};
use crate::cbo::{
    bond_length, cbo_overlap, exact_solve, locate_ci, nuclear_photon_solve, scan_surfaces, AdiabaticHamiltonian,
    DimerModel, ElectronicOptions, NuclearOptions, PhotonDvr, ScanGrid, ShinMetiuModel, CI_THRESHOLD,
};
use crate::control::{free_evolution, optimize, OptimizeOptions};
use crate::dynamics::{
    decay_time, dipole_envelope, emission_experiment, intensity, revival_time, write_profiles_csv, EmissionOptions,
};
use crate::error::Result;
use crate::models::{si3_grid, MultimodeHamiltonian, RabiParams, SPEED_OF_LIGHT};
use crate::spectra::{absorption_spectrum, frequency_grid, rabi_splitting};
use crate::state::{matrix_element, Axis, AxisKind, Operator};

type Outputs = (Vec<PathBuf>, serde_json::Value);

fn create(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>)> {
    let path = dir.join(name);
    let f = BufWriter::new(File::create(&path)?);
    Ok((path, f))
}

/// Observables of the dimer at one coupling.
#[derive(Clone, Debug, Serialize)]
pub struct DimerPoint {
    pub g_over_omega: f64,
    pub lambda: f64,
    pub energies: Vec<f64>,
    /// `|⟨Ψ_k|R|Ψ_0⟩|` for k = 1, 2, …
    pub transition_dipoles: Vec<f64>,
    /// `⟨X⟩` of each state.
    pub bond_lengths: Vec<f64>,
    pub rabi_splitting: Option<f64>,
    pub edge_weight: f64,
    pub bound: bool,
    pub cbo_energies: Option<Vec<f64>>,
    /// `|⟨Ψ_exact|Ψ_CBO⟩|` for the lowest three states.
    pub cbo_overlaps: Option<Vec<f64>>,
}

/// Exact (contracted) solve at one coupling; with `photon = false` the
/// matter-only problem is solved.
pub fn dimer_point(cfg: &DimerScanConfig, ratio: f64, photon: bool) -> Result<DimerPoint> {
    let p = cfg.params.clone().with_g_over_omega(ratio);
    let model = DimerModel::new(p.clone(), &si3_grid(), cfg.self_energy)?;
    let dvr = if photon { Some(PhotonDvr::new(p.omega, cfg.photon_points)?) } else { None };
    let grid = ScanGrid::new(crate::cbo::ClampedModel::nuclear_axes(&model), dvr)?;
    let eopts = ElectronicOptions {
        nstates: cfg.electronic_states,
        tol: cfg.electronic_tol,
        seed: cfg.seed,
        retain_states: true,
        ..Default::default()
    };
    let scan = scan_surfaces(&model, grid, &eopts)?;
    let h = AdiabaticHamiltonian::new(&model, &scan)?;
    let ex = exact_solve(&h, cfg.exact_states, cfg.tol, cfg.seed, 2)?;
    let states = ex.eigen.states();
    let dip = h.dipole_operator();
    let transition_dipoles = states[1..]
        .iter()
        .map(|s| Ok(matrix_element(&dip, s, &states[0])?.re.abs()))
        .collect::<Result<Vec<_>>>()?;
    let bond_lengths = states.iter().map(bond_length).collect::<Result<Vec<_>>>()?;
    let e = &ex.eigen.values;
    let rabi = if photon && e.len() > 2 { Some(rabi_splitting(e[1], e[2], p.omega)?) } else { None };
    let edge_weight = ex.ground_edge_weight();
    let (mut cbo_energies, mut cbo_overlaps) = (None, None);
    if cfg.cbo {
        let nopts = NuclearOptions { nstates: 3.min(states.len()), tol: cfg.tol, seed: cfg.seed, ..Default::default() };
        // An unbound sheet has no meaningful CBO states; leave them out.
        if let Ok(bo) = nuclear_photon_solve(&model, &scan.surface(0)?, &nopts) {
            cbo_energies = Some(bo.states.iter().map(|s| s.energy).collect());
            cbo_overlaps = Some(
                bo.states
                    .iter()
                    .zip(&states)
                    .map(|(b, s)| cbo_overlap(s, &b.to_channels(h.basis())?))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
    }
    Ok(DimerPoint {
        g_over_omega: ratio,
        lambda: p.lambda,
        energies: e.clone(),
        transition_dipoles,
        bond_lengths,
        rabi_splitting: rabi,
        edge_weight,
        bound: edge_weight <= cfg.edge_threshold,
        cbo_energies,
        cbo_overlaps,
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.10e}")).unwrap_or_default()
}

pub(super) fn dimer_scan(cfg: &DimerScanConfig, dir: &Path) -> Result<Outputs> {
    let results: Vec<(f64, Result<DimerPoint>)> =
        cfg.g_over_omega.par_iter().map(|&r| (r, dimer_point(cfg, r, true))).collect();
    let (path, mut f) = create(dir, "dimer_scan.csv")?;
    writeln!(f, "g_over_omega,lambda,e0,e1,e2,bond_length,rabi_splitting,d01,edge_weight,bound,overlap0,overlap1,overlap2")?;
    let mut failures = vec![];
    let mut points = vec![];
    for (ratio, r) in results {
        match r {
            Ok(pt) => {
                let ov = |k: usize| pt.cbo_overlaps.as_ref().and_then(|o| o.get(k).copied());
                writeln!(
                    f,
                    "{},{:.10e},{:.12e},{:.12e},{:.12e},{:.10e},{},{:.10e},{:.6e},{},{},{},{}",
                    ratio,
                    pt.lambda,
                    pt.energies[0],
                    pt.energies.get(1).copied().unwrap_or(f64::NAN),
                    pt.energies.get(2).copied().unwrap_or(f64::NAN),
                    pt.bond_lengths[0],
                    fmt_opt(pt.rabi_splitting),
                    pt.transition_dipoles.first().copied().unwrap_or(f64::NAN),
                    pt.edge_weight,
                    pt.bound,
                    fmt_opt(ov(0)),
                    fmt_opt(ov(1)),
                    fmt_opt(ov(2)),
                )?;
                points.push(pt);
            }
            Err(e) => failures.push(serde_json::json!({ "g_over_omega": ratio, "error": e.to_string() })),
        }
    }
    f.flush()?;
    Ok((vec![path], serde_json::json!({ "points": points, "failures": failures })))
}

pub(super) fn dimer_spectrum(cfg: &DimerSpectrumConfig, dir: &Path) -> Result<Outputs> {
    let d = &cfg.scan;
    let p = d.params.clone().with_g_over_omega(cfg.g_over_omega);
    let model = DimerModel::new(p.clone(), &si3_grid(), d.self_energy)?;
    let grid = ScanGrid::new(vec![si3_grid().axes()[0].clone()], Some(PhotonDvr::new(p.omega, d.photon_points)?))?;
    let eopts = ElectronicOptions {
        nstates: d.electronic_states,
        tol: d.electronic_tol,
        seed: d.seed,
        retain_states: true,
        ..Default::default()
    };
    let scan = scan_surfaces(&model, grid, &eopts)?;
    let h = AdiabaticHamiltonian::new(&model, &scan)?;
    let ex = exact_solve(&h, cfg.states, d.tol, d.seed, 2)?;
    let omegas = frequency_grid(cfg.omega_min, cfg.omega_max, cfg.points);
    let spec = absorption_spectrum(&ex.eigen, &h.dipole_operator(), &omegas, cfg.broadening)?;
    let (sp, mut f) = create(dir, "spectrum.csv")?;
    spec.write_csv(&mut f)?;
    f.flush()?;
    let (pp, mut f) = create(dir, "poles.csv")?;
    spec.write_poles_csv(&mut f)?;
    f.flush()?;
    let rabi = rabi_splitting(ex.eigen.values[1], ex.eigen.values[2], p.omega)?;
    Ok((
        vec![sp, pp],
        serde_json::json!({
            "lambda": p.lambda,
            "energies": ex.eigen.values,
            "rabi_splitting": rabi,
            "peaks": spec.peaks(),
            "states_used": spec.states_used,
            "states_truncated": spec.states_truncated,
            "weak_dropped": spec.weak_dropped,
        }),
    ))
}

/// Conical-intersection search for one coupling and polarization.
#[derive(Clone, Debug, Serialize)]
pub struct CiCase {
    pub g_over_omega: f64,
    pub polarization: [f64; 2],
    pub position: [f64; 2],
    pub gap: f64,
    pub found: bool,
    /// Best point of the coarse stage.
    pub coarse_position: [f64; 2],
    pub coarse_gap: f64,
}

fn ci_stage(model: &ShinMetiuModel, x: (f64, f64, usize), y: (f64, f64, usize)) -> Result<crate::cbo::CiSearch> {
    let axes = vec![Axis::span(AxisKind::NuclearX, x.0, x.1, x.2)?, Axis::span(AxisKind::NuclearY, y.0, y.1, y.2)?];
    let opts = ElectronicOptions { nstates: 3, ..Default::default() };
    let sc = scan_surfaces(model, ScanGrid::new(axes, None)?, &opts)?;
    locate_ci(&sc.surface(1)?, &sc.surface(2)?, CI_THRESHOLD)
}

/// Intersection of the first two excited sheets at `q = 0`: a coarse
/// scan followed by a grid `refine` times finer around its minimum.
pub fn ci_search(cfg: &ShinMetiuConfig, ratio: f64, polarization: [f64; 2]) -> Result<CiCase> {
    let p = crate::models::ShinMetiuParams { polarization, ..cfg.params.clone() }.with_g_over_omega(ratio);
    let model = ShinMetiuModel::new(p)?;
    let coarse = ci_stage(&model, cfg.nuclear_x, cfg.nuclear_y)?;
    let mut best = coarse.clone();
    if cfg.refine > 1 {
        let hx = (cfg.nuclear_x.1 - cfg.nuclear_x.0) / (cfg.nuclear_x.2.max(2) - 1) as f64;
        let hy = (cfg.nuclear_y.1 - cfg.nuclear_y.0) / (cfg.nuclear_y.2.max(2) - 1) as f64;
        let [cx, cy] = coarse.grid_position;
        let n = 4 * cfg.refine + 1;
        let fine = ci_stage(&model, (cx - 2.0 * hx, cx + 2.0 * hx, n), (cy - 2.0 * hy, cy + 2.0 * hy, n))?;
        if fine.gap <= coarse.gap {
            best = fine;
        }
    }
    Ok(CiCase {
        g_over_omega: ratio,
        polarization,
        position: best.position,
        gap: best.gap,
        found: best.found,
        coarse_position: coarse.position,
        coarse_gap: coarse.gap,
    })
}

pub(super) fn shin_metiu(cfg: &ShinMetiuConfig, dir: &Path) -> Result<Outputs> {
    let mut cases = vec![(0.0, cfg.polarizations.first().copied().unwrap_or([1.0, 0.0]))];
    cases.extend(cfg.polarizations.iter().map(|p| (cfg.g_over_omega, *p)));
    let found = cases.par_iter().map(|(r, p)| ci_search(cfg, *r, *p)).collect::<Result<Vec<_>>>()?;
    let (path, mut f) = create(dir, "ci.csv")?;
    writeln!(f, "g_over_omega,pol_x,pol_y,x,y,gap,found,shift_y")?;
    let y0 = found[0].position[1];
    for c in &found {
        writeln!(
            f,
            "{},{},{},{:.8},{:.8},{:.6e},{},{:.8}",
            c.g_over_omega,
            c.polarization[0],
            c.polarization[1],
            c.position[0],
            c.position[1],
            c.gap,
            c.found,
            c.position[1] - y0
        )?;
    }
    f.flush()?;
    Ok((vec![path], serde_json::json!({ "reference": found[0], "coupled": found[1..] })))
}

#[derive(Clone, Debug, Serialize)]
pub struct FreeEvolutionRow {
    pub g: f64,
    pub sigma_z_final: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PenaltyRow {
    pub g: f64,
    pub vary_drive: bool,
    pub penalty: f64,
    pub penalty_trapezoid: f64,
    pub sigma_z_final: f64,
    pub max_deviation: f64,
    pub path_coefficients: Vec<f64>,
    pub drive_coefficients: Vec<f64>,
    pub directory: String,
}

fn label(g: f64, drive: bool) -> String {
    format!("g{g}_drive-{}", if drive { "on" } else { "off" })
}

pub(super) fn rabi_control(cfg: &RabiControlConfig, dir: &Path) -> Result<Outputs> {
    let mut free = vec![];
    let mut rows = vec![];
    let mut files = vec![];
    for &g in &cfg.g {
        let p = RabiParams { g, ..cfg.params.clone() };
        free.push(FreeEvolutionRow { g, sigma_z_final: free_evolution(&p, &cfg.options.inversion)? });
        let mut drive_off: Option<Vec<f64>> = None;
        let mut order = cfg.vary_drive.clone();
        // Drive-free first: its optimum seeds the drive run, so the
        // larger feasible set can only lower the penalty.
        order.sort();
        order.dedup();
        for drive in order {
            if drive && g == 0.0 {
                // The drive acts on the photon mode only and cannot help.
                continue;
            }
            let opts = match (&drive_off, drive) {
                (Some(c), true) => OptimizeOptions { initial: Some((c.clone(), vec![])), ..cfg.options.clone() },
                _ => cfg.options.clone(),
            };
            let sol = optimize(&p, drive, &opts)?;
            let name = label(g, drive);
            let sub = dir.join(&name);
            sol.write(&sub)?;
            files.push(sub.join("control.json"));
            files.push(sub.join("control_trace.csv"));
            if !drive {
                drive_off = Some(sol.path.coefficients.clone());
            }
            rows.push(PenaltyRow {
                g,
                vary_drive: drive,
                penalty: sol.penalty,
                penalty_trapezoid: sol.penalty_trapezoid,
                sigma_z_final: sol.sigma_z_final,
                max_deviation: sol.max_deviation,
                path_coefficients: sol.path.coefficients.clone(),
                drive_coefficients: sol.drive.coefficients.clone(),
                directory: name,
            });
        }
    }
    let (path, mut f) = create(dir, "table.csv")?;
    writeln!(f, "g,free_sigma_z,penalty_drive_off,penalty_drive_on")?;
    for fr in &free {
        let pen = |d: bool| rows.iter().find(|r| r.g == fr.g && r.vary_drive == d).map(|r| r.penalty);
        writeln!(f, "{},{:.8},{},{}", fr.g, fr.sigma_z_final, fmt_opt(pen(false)), fmt_opt(pen(true)))?;
    }
    f.flush()?;
    files.insert(0, path);
    Ok((files, serde_json::json!({ "free_evolution": free, "optimized": rows })))
}

#[derive(Clone, Debug, Serialize)]
pub struct SnapshotSummary {
    pub time: f64,
    pub field_max: f64,
    pub intensity_max: f64,
    /// Largest `|x − x_emitter|` with intensity above 10% of the maximum.
    pub front: f64,
    pub light_cone: f64,
    pub intensity_at_emitter: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EmissionSummary {
    pub setup: u8,
    pub method: crate::dynamics::Method,
    pub sigma_z_max: f64,
    pub decay_time: Option<f64>,
    pub revival_time: Option<f64>,
    pub norm_drift: f64,
    pub energy_drift: f64,
    pub warnings: Vec<String>,
    pub snapshots: Vec<SnapshotSummary>,
}

pub(super) fn emission(cfg: &EmissionConfig, dir: &Path) -> Result<Outputs> {
    let opts = EmissionOptions {
        params: cfg.params.clone(),
        dt: cfg.dt,
        t_final: cfg.t_final,
        snapshots: cfg.snapshots.clone(),
        positions: cfg.positions,
        raw_intensity: cfg.raw_intensity,
        ..Default::default()
    };
    let h = MultimodeHamiltonian::coupled(&cfg.params)?;
    let x0 = cfg.params.x();
    let mut files = vec![];
    let mut summaries = vec![];
    for &setup in &cfg.setups {
        for &method in &cfg.methods {
            let r = emission_experiment(setup, method, &opts)?;
            let tr = &r.trajectory;
            let tag = format!("setup{setup}_{}", method.label());
            let (p, mut f) = create(dir, &format!("trajectory_{tag}.csv"))?;
            tr.write_csv(&mut f)?;
            f.flush()?;
            files.push(p);
            let (p, mut f) = create(dir, &format!("field_{tag}.csv"))?;
            write_profiles_csv(&r.profiles, &mut f)?;
            f.flush()?;
            files.push(p);
            let env = dipole_envelope(&tr.times, &tr.sigma_z, std::f64::consts::PI / cfg.params.t0);
            let snapshots = r
                .profiles
                .iter()
                .zip(&tr.snapshots)
                .map(|(pr, s)| {
                    let imax = pr.intensity.iter().copied().fold(0.0, f64::max);
                    let front = pr
                        .positions
                        .iter()
                        .zip(&pr.intensity)
                        .filter(|(_, i)| **i > 0.1 * imax)
                        .map(|(x, _)| (x - x0).abs())
                        .fold(0.0, f64::max);
                    Ok(SnapshotSummary {
                        time: pr.time,
                        field_max: pr.field.iter().map(|e| e.abs()).fold(0.0, f64::max),
                        intensity_max: imax,
                        front,
                        light_cone: SPEED_OF_LIGHT * pr.time,
                        intensity_at_emitter: intensity(&h, Some(&s.moments), &[x0], cfg.raw_intensity)?[0],
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            summaries.push(EmissionSummary {
                setup,
                method,
                sigma_z_max: tr.sigma_z.iter().map(|s| s.abs()).fold(0.0, f64::max),
                decay_time: decay_time(&tr.times, &env),
                revival_time: revival_time(&tr.times, &env, 0.05),
                norm_drift: tr.norm_drift(),
                energy_drift: tr.energy_drift(),
                warnings: tr.warnings.clone(),
                snapshots,
            });
        }
    }
    Ok((files, serde_json::json!({ "runs": summaries })))
}
