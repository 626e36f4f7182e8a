//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! `cargo test --release --test acceptance -- 3 7` runs a subset.
//! `QEDLAB_ACCEPTANCE_STARTS` and `QEDLAB_ACCEPTANCE_STEPS` set the
//! optimizer budget of criterion 7 (defaults 1 and 1000).

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;
use std::time::Instant;

use qedlab::cbo::{
    cbo_overlap, electronic_solve, exact_solve, nuclear_photon_solve, scan_surfaces, AdiabaticHamiltonian, ClampedModel,
    DimerModel, ElectronicOptions, NuclearOptions, ParametricPoint, PhotonDvr, ScanGrid,
};
use qedlab::control::{
    free_evolution, initial_state, invert_control, optimize, DensityPath, DipoleDrive, InversionOptions,
    OptimizeOptions, AMPLITUDE, T_FINAL,
};
use qedlab::dynamics::{
    cavity_positions, decay_time, dipole_envelope, electric_field, emission_experiment, intensity, propagate_exact,
    revival_time, EmissionOptions, EmissionResult, Method, PropagationOptions,
};
use qedlab::eigen::eigs_lowest;
use qedlab::experiments::{ci_search, dimer_point, DimerPoint, DimerScanConfig, Resolved, RunConfig, ShinMetiuConfig};
use qedlab::models::{
    build_dimer, build_multimode, build_rabi, build_shin_metiu, DimerParams, MultimodeHamiltonian, MultimodeParams,
    RabiParams, ShinMetiuParams, SPEED_OF_LIGHT,
};
use qedlab::state::{expectation, hermiticity_defect, Axis, AxisKind, Grid, Operator};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Criterion 1.
const OMEGA12: f64 = 0.01216;
const OMEGA12_TOL: f64 = 2e-4;
const D12: f64 = 0.01869;
const D12_TOL: f64 = 5e-4;
// Criterion 2.
const BOND_START: f64 = 1.63;
const BOND_END: f64 = 1.55;
const BOND_TOL: f64 = 0.02;
// Criterion 3.
const ONSET: f64 = 0.9;
const ONSET_TOL: f64 = 0.1;
const NO_SE_RATIOS: [f64; 10] = [0.0, 0.2, 0.4, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2];
// Criterion 4.
const RABI_AT_16: f64 = 0.3;
const RABI_TOL: f64 = 0.05;
// Criterion 5.
const GROUND_OVERLAP_MIN: f64 = 0.99;
const UP_OVERLAP: f64 = 0.994;
const UP_OVERLAP_TOL: f64 = 0.004;
// Criterion 6.
const CI_RATIO: f64 = 2.25;
// Criterion 7.
const CONTROL_G: [f64; 4] = [0.0, 0.25, 0.5, 1.0];
const FREE_SIGMA_Z: [f64; 4] = [0.980, -0.979, 0.975, 0.969];
const FREE_TOL: f64 = 0.002;
const PENALTY_OFF: [f64; 4] = [0.3015, 0.0008, 0.8145, 3.2473];
const PENALTY_ON: [f64; 3] = [0.0008, 0.8113, 2.4084];
const PENALTY_REL_TOL: f64 = 0.10;
// Criterion 8.
const RANDOM_SETS: usize = 50;
const REPROPAGATION_TOL: f64 = 1e-6;
// Criteria 9 and 10.
const DIPOLE_FREE_TOL: f64 = 1e-8;
const REVIVAL: f64 = 1730.0;
const REVIVAL_TOL: f64 = 150.0;
const ATOM_REMAINS: f64 = 1e-2;
const ATOM_VANISHES: f64 = 1e-3;
// Criterion 11.
const HERMITICITY_TOL: f64 = 1e-12;
const DECOUPLING_TOL: f64 = 1e-10;
const NORM_TOL: f64 = 1e-10;
const ENERGY_TOL: f64 = 1e-8;
const ORACLE_TOL: f64 = 1e-9;
const HF_TOL: f64 = 1e-5;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn env_usize(name: &str, default: usize) -> usize {
    std::env::var(name).ok().and_then(|v| v.parse().ok()).unwrap_or(default)
}

fn dimer_config(self_energy: bool) -> DimerScanConfig {
    let text = format!("experiment = \"dimer-scan\"\n[dimer]\nomega = 0.012568\nself_energy = {self_energy}\n");
    match RunConfig::from_toml(&text).unwrap().resolve().unwrap() {
        Resolved::DimerScan(d) => d,
        _ => unreachable!(),
    }
}

/// Fig. 2 scan plus the g = 1.6ω point of the splitting criterion.
fn dimer_scan() -> &'static Vec<DimerPoint> {
    static SCAN: OnceLock<Vec<DimerPoint>> = OnceLock::new();
    SCAN.get_or_init(|| {
        let cfg = dimer_config(true);
        let mut ratios = cfg.g_over_omega.clone();
        ratios.push(1.6);
        ratios.iter().map(|&r| dimer_point(&cfg, r, true).expect("dimer point")).collect()
    })
}

fn fig2(scan: &[DimerPoint]) -> &[DimerPoint] {
    &scan[..scan.len() - 1]
}

fn monotone(v: &[f64], increasing: bool) -> bool {
    v.windows(2).all(|w| if increasing { w[1] > w[0] } else { w[1] < w[0] })
}

fn fmt(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(" ")
}

fn criterion_1() -> Outcome {
    let p = dimer_point(&dimer_config(true), 0.0, false).unwrap();
    let gap = p.energies[1] - p.energies[0];
    let d = p.transition_dipoles[0];
    let pass = (gap - OMEGA12).abs() <= OMEGA12_TOL && (d - D12).abs() <= D12_TOL;
    outcome(pass, format!("omega12 = {gap:.5} (want {OMEGA12} +- {OMEGA12_TOL}), d12 = {d:.5} (want {D12} +- {D12_TOL})"))
}

fn criterion_2() -> Outcome {
    let s = fig2(dimer_scan());
    let x: Vec<f64> = s.iter().map(|p| p.bond_lengths[0]).collect();
    let (a, b) = (x[0], *x.last().unwrap());
    let pass = monotone(&x, false) && (a - BOND_START).abs() <= BOND_TOL && (b - BOND_END).abs() <= BOND_TOL;
    outcome(pass, format!("<X> = [{}] (want monotone {BOND_START} -> {BOND_END} +- {BOND_TOL})", fmt(&x)))
}

fn criterion_3() -> Outcome {
    let cfg = dimer_config(false);
    let mut bonds = vec![];
    let mut onset = None;
    let mut rows = vec![];
    for &r in &NO_SE_RATIOS {
        match dimer_point(&cfg, r, true) {
            Ok(p) => {
                rows.push(format!("{r}:{:.3}/{:.1e}", p.bond_lengths[0], p.edge_weight));
                if p.bound && onset.is_none() {
                    bonds.push(p.bond_lengths[0]);
                } else if onset.is_none() {
                    onset = Some(r);
                }
            }
            Err(e) => return outcome(false, format!("solve failed at g/omega = {r}: {e}")),
        }
    }
    let onset_ok = onset.is_some_and(|o| o > ONSET - ONSET_TOL && o <= ONSET + ONSET_TOL);
    let pass = monotone(&bonds, true) && onset_ok;
    outcome(
        pass,
        format!(
            "first unbound g/omega = {onset:?} (want {ONSET} +- {ONSET_TOL}), bound <X> increasing = {}; g:<X>/edge [{}]",
            monotone(&bonds, true),
            rows.join(" ")
        ),
    )
}

fn criterion_4() -> Outcome {
    let s = dimer_scan();
    let r: Vec<f64> = s.iter().map(|p| p.rabi_splitting.unwrap()).collect();
    let last = *r.last().unwrap();
    let pass = monotone(&r, true) && (last - RABI_AT_16).abs() <= RABI_TOL;
    outcome(pass, format!("Omega_R = [{}] (want increasing, {RABI_AT_16} +- {RABI_TOL} at g = 1.6 omega)", fmt(&r)))
}

fn criterion_5() -> Outcome {
    let s = fig2(dimer_scan());
    let ov: Vec<Vec<f64>> = s.iter().map(|p| p.cbo_overlaps.clone().expect("bound CBO sheet")).collect();
    let ground_ok = ov.iter().all(|o| o[0] >= GROUND_OVERLAP_MIN);
    let order_ok = ov.iter().all(|o| o[0] >= o[1] && o[0] >= o[2]);
    let up = ov.last().unwrap()[2];
    let up_ok = (up - UP_OVERLAP).abs() <= UP_OVERLAP_TOL;
    let rows: Vec<String> = ov.iter().map(|o| format!("{:.6}/{:.6}/{:.6}", o[0], o[1], o[2])).collect();
    outcome(
        ground_ok && order_ok && up_ok,
        format!(
            "ground >= {GROUND_OVERLAP_MIN}: {ground_ok}, ordering: {order_ok}, UP at strongest = {up:.6} (want {UP_OVERLAP} +- {UP_OVERLAP_TOL}); GS/LP/UP [{}]",
            rows.join(" ")
        ),
    )
}

fn criterion_6() -> Outcome {
    let cfg = match RunConfig::from_toml("experiment = \"shin-metiu-ci\"\n[shin_metiu]\nomega = 0.00833\n")
        .unwrap()
        .resolve()
        .unwrap()
    {
        Resolved::ShinMetiuCi(s) => s,
        _ => unreachable!(),
    };
    let cfg: ShinMetiuConfig = cfg;
    let base = ci_search(&cfg, 0.0, [1.0, 0.0]).unwrap();
    let x = ci_search(&cfg, CI_RATIO, [1.0, 0.0]).unwrap();
    let y = ci_search(&cfg, CI_RATIO, [0.0, 1.0]).unwrap();
    let pass = x.position[1] < base.position[1] && y.position[1] > base.position[1];
    outcome(
        pass,
        format!(
            "CI y: lambda=0 {:.4} (gap {:.1e}), x-pol {:.4} (gap {:.1e}), y-pol {:.4} (gap {:.1e}); want x-pol lower, y-pol higher",
            base.position[1], base.gap, x.position[1], x.gap, y.position[1], y.gap
        ),
    )
}

fn criterion_7() -> Outcome {
    let starts = env_usize("QEDLAB_ACCEPTANCE_STARTS", 1);
    let steps = env_usize("QEDLAB_ACCEPTANCE_STEPS", 1000);
    let opts = OptimizeOptions {
        inversion: InversionOptions { steps, ..Default::default() },
        starts,
        ..Default::default()
    };
    let mut lines = vec![];
    let mut pass = true;
    for (i, &g) in CONTROL_G.iter().enumerate() {
        let p = RabiParams { g, ..Default::default() };
        let free = free_evolution(&p, &InversionOptions::default()).unwrap();
        let free_ok = (free - FREE_SIGMA_Z[i]).abs() <= FREE_TOL;
        let off = optimize(&p, false, &opts).unwrap();
        let off_ok = (off.penalty - PENALTY_OFF[i]).abs() <= PENALTY_REL_TOL * PENALTY_OFF[i];
        let mut line = format!(
            "g={g}: free {free:.4} (want {}) {}, P_off {:.5} (want {}) {}",
            FREE_SIGMA_Z[i],
            if free_ok { "ok" } else { "MISS" },
            off.penalty,
            PENALTY_OFF[i],
            if off_ok { "ok" } else { "MISS" }
        );
        pass &= free_ok && off_ok;
        if g > 0.0 {
            let seeded = OptimizeOptions { initial: Some((off.path.coefficients.clone(), vec![])), ..opts.clone() };
            let on = optimize(&p, true, &seeded).unwrap();
            let on_ok = (on.penalty - PENALTY_ON[i - 1]).abs() <= PENALTY_REL_TOL * PENALTY_ON[i - 1];
            let dominance = on.penalty <= off.penalty;
            line += &format!(
                ", P_on {:.5} (want {}) {}, P_on <= P_off {}",
                on.penalty,
                PENALTY_ON[i - 1],
                if on_ok { "ok" } else { "MISS" },
                dominance
            );
            pass &= on_ok && dominance;
        }
        lines.push(line);
    }
    outcome(pass, format!("starts {starts}, steps {steps}; {}", lines.join("; ")))
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let opts = InversionOptions { steps: 1000, ..Default::default() };
    let (mut done, mut rejected, mut worst) = (0, 0, 0.0f64);
    while done < RANDOM_SETS && rejected < 20 * RANDOM_SETS {
        let g = [0.25, 0.5, 1.0][rng.gen_range(0..3)];
        let p = RabiParams { g, ..Default::default() };
        let free: Vec<f64> = (0..10).map(|_| rng.gen_range(-0.06..0.06)).collect();
        let path = DensityPath::from_free(&free, AMPLITUDE, T_FINAL);
        let drive = if rng.gen_bool(0.5) {
            DipoleDrive::new((0..11).map(|_| rng.gen_range(-0.2..0.2)).collect(), T_FINAL)
        } else {
            DipoleDrive::off(T_FINAL)
        };
        let Ok(inv) = invert_control(&path, &drive, &p, &opts) else {
            rejected += 1;
            continue;
        };
        let mut h = build_rabi(&p).unwrap();
        let sig = |t: f64| inv.signal(t);
        let tr = propagate_exact(&mut h, &initial_state(&p), &PropagationOptions::new(opts.dt(), T_FINAL), Some(&sig))
            .unwrap();
        let dev = tr.times.iter().zip(&tr.sigma_z).map(|(t, s)| (s - path.value(*t)).abs()).fold(0.0, f64::max);
        worst = worst.max(dev);
        done += 1;
    }
    outcome(
        done == RANDOM_SETS && worst < REPROPAGATION_TOL,
        format!("{done} admissible sets ({rejected} singular draws skipped), worst deviation {worst:.2e} (want < {REPROPAGATION_TOL:e})"),
    )
}

fn emission_runs() -> &'static [(u8, Method, EmissionResult)] {
    static RUNS: OnceLock<Vec<(u8, Method, EmissionResult)>> = OnceLock::new();
    RUNS.get_or_init(|| {
        let p = MultimodeParams::default();
        // Field sampled at the mode resolution of the M-mode field.
        let opts = EmissionOptions { positions: p.modes, params: p, ..Default::default() };
        let mut out = vec![];
        for setup in [1u8, 2] {
            for m in [Method::Exact, Method::MeanField] {
                if setup == 1 && m == Method::MeanField {
                    continue;
                }
                out.push((setup, m, emission_experiment(setup, m, &opts).unwrap()));
            }
        }
        out
    })
}

fn run_for(setup: u8, m: Method) -> &'static EmissionResult {
    &emission_runs().iter().find(|(s, mm, _)| *s == setup && *mm == m).unwrap().2
}

fn criterion_9() -> Outcome {
    let r = run_for(1, Method::Exact);
    let p = MultimodeParams::default();
    let h = MultimodeHamiltonian::coupled(&p).unwrap();
    let xs = cavity_positions(&p, p.modes);
    let dx = p.length / (p.modes + 1) as f64;
    let x0 = p.x();
    let tr = &r.trajectory;
    let sz = tr.sigma_z.iter().map(|s| s.abs()).fold(0.0, f64::max);
    let e = tr
        .modes
        .iter()
        .map(|q| electric_field(&h, q, &xs).iter().map(|e| e.abs()).fold(0.0, f64::max))
        .fold(0.0, f64::max);
    let mut fronts_ok = true;
    let mut rows = vec![];
    for pr in &r.profiles {
        let imax = pr.intensity.iter().copied().fold(0.0, f64::max);
        let front = pr
            .positions
            .iter()
            .zip(&pr.intensity)
            .filter(|(_, i)| **i > 0.1 * imax)
            .map(|(x, _)| (x - x0).abs())
            .fold(0.0, f64::max);
        let cone = SPEED_OF_LIGHT * pr.time;
        let side = |left: bool| {
            pr.positions
                .iter()
                .zip(&pr.intensity)
                .filter(|(x, _)| (**x < x0) == left)
                .map(|(_, i)| *i)
                .fold(0.0, f64::max)
        };
        let two_sided = imax > 0.0 && side(true) >= 0.5 * imax && side(false) >= 0.5 * imax;
        fronts_ok &= front <= cone + dx && two_sided;
        rows.push(format!("t={}: front {front:.0} <= {:.0} two-sided {two_sided}", pr.time, cone + dx));
    }
    let pass = sz < DIPOLE_FREE_TOL && e < DIPOLE_FREE_TOL && fronts_ok;
    outcome(pass, format!("max|sigma_z| {sz:.1e}, max|E| {e:.1e} (want < {DIPOLE_FREE_TOL:e}); {}", rows.join("; ")))
}

fn criterion_10() -> Outcome {
    let p = MultimodeParams::default();
    let h = MultimodeHamiltonian::coupled(&p).unwrap();
    let width = std::f64::consts::PI / p.t0;
    let times = |r: &EmissionResult| {
        let tr = &r.trajectory;
        let env = dipole_envelope(&tr.times, &tr.sigma_z, width);
        (decay_time(&tr.times, &env), revival_time(&tr.times, &env, 0.05))
    };
    let ex = run_for(2, Method::Exact);
    let mf = run_for(2, Method::MeanField);
    let (td_ex, tr_ex) = times(ex);
    let (td_mf, tr_mf) = times(mf);
    let atom = |r: &EmissionResult| {
        let s = r.trajectory.snapshots.last().unwrap();
        let i = intensity(&h, Some(&s.moments), &[p.x()], false).unwrap()[0];
        let imax = r.profiles.last().unwrap().intensity.iter().copied().fold(0.0, f64::max);
        (i, imax)
    };
    let (ia_ex, im_ex) = atom(ex);
    let (ia_mf, im_mf) = atom(mf);
    let revival_ok = tr_ex.is_some_and(|t| (t - REVIVAL).abs() <= REVIVAL_TOL);
    let decay_ok = matches!((td_ex, td_mf), (Some(a), Some(b)) if b > a);
    let atom_ok = ia_ex > ATOM_REMAINS * im_ex && ia_mf.abs() < ATOM_VANISHES * im_mf;
    outcome(
        revival_ok && decay_ok && atom_ok,
        format!(
            "revival exact {tr_ex:?} mean-field {tr_mf:?} (want {REVIVAL} +- {REVIVAL_TOL}); decay exact {td_ex:?} < mean-field {td_mf:?}; I(atom, t_end)/I_max exact {:.2e} (want > {ATOM_REMAINS:e}), mean-field {:.2e} (want < {ATOM_VANISHES:e})",
            ia_ex / im_ex,
            ia_mf / im_mf
        ),
    )
}

fn tiny_dimer_grid() -> Grid {
    Grid::new(vec![
        Axis::new(AxisKind::NuclearRelative, 8, 0.2, 1.0).unwrap(),
        Axis::centered(AxisKind::ElectronRelative, 9, 0.8).unwrap(),
        Axis::centered(AxisKind::ElectronNuclearCenter, 9, 0.6).unwrap(),
    ])
    .unwrap()
}

fn criterion_11() -> Outcome {
    let mut checks: Vec<(String, bool)> = vec![];
    // Hermiticity.
    let rabi = build_rabi(&RabiParams { g: 0.7, ..Default::default() }).unwrap().with_drive(0.3, -0.2);
    let mm = build_multimode(&MultimodeParams { modes: 6, length: 2.0e5, position: Some(6.0e4), ..Default::default() }).unwrap();
    let dp = DimerParams { photon_cap: 3, ..Default::default() }.with_g_over_omega(1.0);
    let dimer = build_dimer(&dp, &tiny_dimer_grid()).unwrap();
    let sp = ShinMetiuParams { electron_points: 4, nuclear_points: 3, photon_cap: 2, lambda: 0.3, ..Default::default() };
    let sm = build_shin_metiu(&sp, &sp.grid().unwrap()).unwrap();
    let herm = [
        hermiticity_defect(&rabi, 10, 1),
        hermiticity_defect(&mm, 10, 2),
        hermiticity_defect(&dimer, 10, 3),
        hermiticity_defect(&sm, 10, 4),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    checks.push((format!("hermiticity {herm:.1e}"), herm < HERMITICITY_TOL));
    // λ = 0 decoupling of the Rabi spectrum.
    let p0 = RabiParams { photon_cap: 10, ..Default::default() };
    let got = common::dense_eigenvalues(&build_rabi(&p0).unwrap());
    let mut want: Vec<f64> = (0..=10).flat_map(|n| [-p0.t0 + n as f64 * p0.omega, p0.t0 + n as f64 * p0.omega]).collect();
    want.sort_by(f64::total_cmp);
    let dec = got.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    checks.push((format!("decoupling {dec:.1e}"), dec < DECOUPLING_TOL));
    // Norm and energy conservation.
    let small = MultimodeParams { modes: 40, length: 2.0e4, ..Default::default() };
    let opts = EmissionOptions { params: small, t_final: 200.0, snapshots: vec![], positions: 10, ..Default::default() };
    let tr = emission_experiment(2, Method::Exact, &opts).unwrap().trajectory;
    let (nd, ed) = (tr.norm_drift(), tr.energy_drift());
    checks.push((format!("norm {nd:.1e} energy {ed:.1e}"), nd < NORM_TOL && ed < ENERGY_TOL));
    // Dense-oracle agreement: propagation and Lanczos.
    let pr = RabiParams { g: 0.5, ..Default::default() };
    let sig = |t: f64| (0.2 * t.sin(), 0.1);
    let dense = common::rabi_reference(&pr, &initial_state(&pr), 3.0, 300, &sig).unwrap();
    let mut hr = build_rabi(&pr).unwrap();
    let prop = propagate_exact(&mut hr, &initial_state(&pr), &PropagationOptions::new(0.01, 3.0), Some(&sig)).unwrap();
    let dprop = dense.iter().zip(&prop.sigma_z).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let hl = build_rabi(&RabiParams { g: 0.8, photon_cap: 40, ..Default::default() }).unwrap();
    let lz = eigs_lowest(&hl, 5, 1e-11).unwrap();
    let dv = common::dense_eigenvalues(&hl);
    let deig = (0..5).map(|k| (lz.values[k] - dv[k]).abs()).fold(0.0, f64::max);
    checks.push((format!("oracle propagation {dprop:.1e} eigenvalues {deig:.1e}"), dprop < ORACLE_TOL && deig < ORACLE_TOL));
    // Hellmann-Feynman in the photon displacement.
    let tp = DimerParams { m1: 20.0, m2: 20.0, omega: 0.05, photon_cap: 4, ..Default::default() }.with_g_over_omega(1.0);
    let model = DimerModel::new(tp.clone(), &tiny_dimer_grid(), true).unwrap();
    let eo = ElectronicOptions { nstates: 1, tol: 1e-12, ..Default::default() };
    let (x, q, hq) = (1.6, 2.0, 1e-3);
    let solve = |q: f64| electronic_solve(&model, &ParametricPoint::new(vec![x], vec![q]), &eo, &[]).unwrap();
    let fd = (solve(q + hq).energies[0] - solve(q - hq).energies[0]) / (2.0 * hq) + tp.omega * tp.omega * q;
    let s = solve(q);
    let mean_r: f64 = s.states[0].iter().zip(&model.dipole(&[x])).map(|(c, r)| c * c * r).sum();
    let hf = tp.omega * tp.lambda * mean_r + tp.omega * tp.omega * q;
    checks.push((format!("Hellmann-Feynman {:.1e}", (fd - hf).abs()), (fd - hf).abs() < HF_TOL));
    // Variational bound of the CBO ground state.
    let grid = ScanGrid::new(model.nuclear_axes(), Some(PhotonDvr::new(tp.omega, 4).unwrap())).unwrap();
    let so = ElectronicOptions { nstates: 4, tol: 1e-11, retain_states: true, ..Default::default() };
    let scan = scan_surfaces(&model, grid, &so).unwrap();
    let ha = AdiabaticHamiltonian::new(&model, &scan).unwrap();
    let exact = exact_solve(&ha, 3, 1e-10, 2, 1).unwrap();
    let bo = nuclear_photon_solve(&model, &scan.surface(0).unwrap(), &NuclearOptions { edge_threshold: 1.0, ..Default::default() })
        .unwrap();
    let psi = bo.states[0].to_channels(ha.basis()).unwrap();
    let e_bo = expectation(&ha, &psi).unwrap();
    let ov = cbo_overlap(&exact.eigen.state(0), &psi).unwrap();
    checks.push((
        format!("variational E_BO - E_0 = {:.1e}, overlap {ov:.6}", e_bo - exact.eigen.values[0]),
        e_bo >= exact.eigen.values[0] - 1e-10,
    ));
    let pass = checks.iter().all(|c| c.1);
    let detail = checks.iter().map(|(d, ok)| format!("{d} {}", if *ok { "ok" } else { "FAIL" })).collect::<Vec<_>>();
    outcome(pass, detail.join("; "))
}

fn main() {
    let criteria: [(usize, &str, fn() -> Outcome); 11] = [
        (1, "dimer resonance", criterion_1),
        (2, "bond-length contraction", criterion_2),
        (3, "self-energy necessity", criterion_3),
        (4, "Rabi splitting", criterion_4),
        (5, "CBO fidelity", criterion_5),
        (6, "conical-intersection shifts", criterion_6),
        (7, "control table", criterion_7),
        (8, "inversion soundness", criterion_8),
        (9, "emission setup 1", criterion_9),
        (10, "emission setup 2", criterion_10),
        (11, "property suite", criterion_11),
    ];
    let wanted: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = vec![];
    for (n, name, f) in criteria {
        if !wanted.is_empty() && !wanted.contains(&n) {
            continue;
        }
        let t = Instant::now();
        let o = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            outcome(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        println!(
            "criterion {n:>2} {} {name}: {} [{:.0} s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
        if !o.pass {
            failed.push(n);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all selected criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
