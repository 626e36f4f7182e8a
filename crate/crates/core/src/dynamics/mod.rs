//! Exact (Krylov) and semi-classical mean-field propagation of two-site
//! emitters, field and intensity observables, and the spontaneous
//! emission workflow.

mod emission;
mod field;
mod krylov;
mod meanfield;
mod propagate;
mod system;

pub use emission::{
    decay_time, dipole_envelope, emission_experiment, initial_matter, product_state, revival_time, EmissionOptions,
    EmissionResult, SNAPSHOT_TIMES,
};
pub use field::{cavity_positions, electric_field, intensity, vacuum_intensity, write_profiles_csv, FieldProfile};
pub use krylov::{spectral_radius, KrylovStepper};
pub use meanfield::{propagate_meanfield, MeanFieldState};
pub use propagate::{
    check_step, propagate_exact, Method, MomentSnapshot, PropagationOptions, Signals, Trajectory, STEP_LIMIT,
    STEP_WARNING,
};
pub use system::{MeanFieldModel, SecondMoments, TwoSiteSystem};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::dense_diag;
    use crate::error::Error;
    use crate::models::{build_rabi, MultimodeHamiltonian, MultimodeParams, RabiParams};
    use crate::state::C64;

    fn rabi_start(n: usize) -> Vec<C64> {
        let mut psi = vec![C64::new(0.0, 0.0); 2 * n];
        psi[0] = C64::new(0.99f64.sqrt(), 0.0);
        psi[n] = C64::new(0.1, 0.0);
        psi
    }

    #[test]
    fn decoupled_two_level_free_evolution() {
        let mut h = build_rabi(&RabiParams { photon_cap: 4, ..Default::default() }).unwrap();
        let tr = propagate_exact(&mut h, &rabi_start(5), &PropagationOptions::new(0.01, 12.57), None).unwrap();
        for (t, s) in tr.times.iter().zip(&tr.sigma_z) {
            assert!((s - 0.98 * (5.0 * t).cos()).abs() < 1e-9);
        }
        assert!((tr.sigma_z.last().unwrap() - 0.980).abs() < 1e-3);
        assert!(tr.norm_drift() < 1e-12);
    }

    #[test]
    fn eigenstates_are_stationary() {
        let mut h = build_rabi(&RabiParams { g: 1.0, photon_cap: 12, ..Default::default() }).unwrap();
        let eig = dense_diag(&h).unwrap();
        let start: Vec<C64> = eig.vectors[3].iter().map(|&x| C64::new(x, 0.0)).collect();
        let tr = propagate_exact(&mut h, &start, &PropagationOptions::new(0.005, 5.0), None).unwrap();
        let end = tr.final_state.unwrap();
        let ov: C64 = start.iter().zip(&end).map(|(a, b)| a.conj() * b).sum();
        assert!((ov.norm() - 1.0).abs() < 1e-8);
        let phase = C64::from_polar(1.0, -eig.values[3] * 5.0);
        assert!((ov - phase).norm() < 1e-8);
    }

    #[test]
    fn static_energy_is_conserved() {
        let p = MultimodeParams { modes: 6, length: 3000.0, position: Some(1100.0), t0: 0.4, d_eg: 1.0 };
        let mut h = crate::models::build_multimode(&p).unwrap();
        let start = product_state(&h, initial_matter(2).unwrap());
        let tr = propagate_exact(&mut h, &start, &PropagationOptions { dt: 0.05, t_final: 2500.0, record_every: 100, ..Default::default() }, None).unwrap();
        assert!(tr.energy_drift() < 1e-8, "{}", tr.energy_drift());
        assert!(tr.norm_drift() < 1e-8);
    }

    #[test]
    fn ehrenfest_mode_equation() {
        // Weak coupling keeps the two-photon cut-off, which breaks the
        // identity at order d³, out of the way.
        let p = MultimodeParams { modes: 5, length: 2500.0, position: Some(800.0), t0: 0.5, d_eg: 0.02 };
        let mut h = crate::models::build_multimode(&p).unwrap();
        let start = product_state(&h, initial_matter(2).unwrap());
        let dt = 0.01;
        let tr = propagate_exact(&mut h, &start, &PropagationOptions::new(dt, 40.0), None).unwrap();
        let d = p.d_eg;
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for k in 1..tr.len() - 1 {
            for a in 0..h.modes() {
                let q = |i: usize| tr.modes[i][a];
                let acc = (q(k + 1) - 2.0 * q(k) + q(k - 1)) / (dt * dt);
                let w = h.omegas[a];
                let res = acc + w * w * q(k) + w * h.lambdas[a] * d * tr.sigma_z[k];
                worst = worst.max(res.abs());
                scale = scale.max((w * h.lambdas[a] * d * tr.sigma_z[k]).abs());
            }
        }
        assert!(worst < 1e-3 * scale, "{worst} vs {scale}");
    }

    #[test]
    fn dipole_free_setup_stays_dipole_free() {
        let p = MultimodeParams { modes: 9, length: 4000.0, position: None, t0: 0.3, d_eg: 1.0 };
        let mut h = MultimodeHamiltonian::coupled(&p).unwrap();
        let start = product_state(&h, initial_matter(1).unwrap());
        let tr = propagate_exact(&mut h, &start, &PropagationOptions::new(0.1, 200.0), None).unwrap();
        assert!(tr.sigma_z.iter().all(|s| s.abs() < 1e-12));
        assert!(tr.modes.iter().flatten().all(|q| q.abs() < 1e-12));
    }

    #[test]
    fn vacuum_moments_and_intensity() {
        let p = MultimodeParams { modes: 7, length: 50.0, position: Some(17.0), t0: 0.3, d_eg: 1.0 };
        let h = crate::models::build_multimode(&p).unwrap();
        let vac = product_state(&h, [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let m = h.second_moments(&vac);
        for a in 0..7 {
            for b in 0..7 {
                let want = if a == b { 0.5 / h.omegas[a] } else { 0.0 };
                assert!((m.qq(a, b) - want).abs() < 1e-15);
            }
        }
        let xs = cavity_positions(&p, 9);
        assert!(electric_field(&h, &h.mode_amplitudes(&vac), &xs).iter().all(|e| *e == 0.0));
        let raw = intensity(&h, Some(&m), &xs, true).unwrap();
        for (x, r) in xs.iter().zip(&raw) {
            assert!((r - vacuum_intensity(&p, *x)).abs() < 1e-14);
        }
        assert!(intensity(&h, Some(&m), &xs, false).unwrap().iter().all(|v| v.abs() < 1e-15));
        assert!(matches!(intensity(&h, None, &xs, false), Err(Error::MissingMoments)));
    }

    #[test]
    fn moments_match_dense_operators() {
        // ⟨q_a q_b⟩ for a random state in the sector, against explicit
        // ladder action in the full two-mode Fock space.
        let p = MultimodeParams { modes: 3, length: 30.0, position: Some(11.0), t0: 0.3, d_eg: 1.0 };
        let h = crate::models::build_multimode(&p).unwrap();
        let n = h.sector().dim();
        let psi: Vec<C64> = (0..2 * n).map(|k| C64::new((k as f64 * 0.7).sin(), (k as f64 * 1.3).cos())).collect();
        let nrm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let psi: Vec<C64> = psi.iter().map(|z| z / nrm).collect();
        let m = h.second_moments(&psi);
        let amps = h.mode_amplitudes(&psi);
        // Occupation-vector representation, up to 3 photons per mode.
        let occ = |k: usize| h.sector().occupations(k);
        let mut full: std::collections::HashMap<(usize, Vec<usize>), C64> = Default::default();
        for s in 0..2 {
            for k in 0..n {
                full.insert((s, occ(k)), psi[s * n + k]);
            }
        }
        let apply_q = |a: usize, st: &std::collections::HashMap<(usize, Vec<usize>), C64>| {
            let mut out: std::collections::HashMap<(usize, Vec<usize>), C64> = Default::default();
            for ((s, o), c) in st {
                let s2 = (2.0 * h.omegas[a]).sqrt();
                let mut up = o.clone();
                up[a] += 1;
                *out.entry((*s, up)).or_default() += c * ((o[a] + 1) as f64).sqrt() / s2;
                if o[a] > 0 {
                    let mut dn = o.clone();
                    dn[a] -= 1;
                    *out.entry((*s, dn)).or_default() += c * (o[a] as f64).sqrt() / s2;
                }
            }
            out
        };
        let braket = |x: &std::collections::HashMap<(usize, Vec<usize>), C64>, y: &std::collections::HashMap<(usize, Vec<usize>), C64>| -> C64 {
            x.iter().map(|(k, c)| c.conj() * y.get(k).copied().unwrap_or_default()).sum()
        };
        for a in 0..3 {
            let qa = apply_q(a, &full);
            assert!((braket(&full, &qa).re - amps[a]).abs() < 1e-13);
            for b in 0..3 {
                let qb = apply_q(b, &full);
                assert!((braket(&qa, &qb).re - m.qq(a, b)).abs() < 1e-13);
            }
        }
    }
}
