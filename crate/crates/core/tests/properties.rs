mod common;

use proptest::prelude::*;
use qedlab::control::{initial_state, invert_control, DensityPath, DipoleDrive, InversionOptions, AMPLITUDE, T_FINAL};
use qedlab::dynamics::{propagate_exact, PropagationOptions};
use qedlab::experiments::RunConfig;
use qedlab::models::{build_multimode, build_rabi, MultimodeParams, RabiParams};
use qedlab::state::{hermiticity_defect, to_dense};

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn driven_rabi_is_symmetric(g in 0.0..1.5f64, v in -2.0..2.0f64, j in -1.0..1.0f64, cap in 1usize..20) {
        let h = build_rabi(&RabiParams { g, photon_cap: cap, ..Default::default() }).unwrap().with_drive(v, j);
        let m = to_dense(&h);
        prop_assert!((&m - m.transpose()).amax() < 1e-14);
        prop_assert!((m - common::rabi_dense(h.params(), v, j)).amax() < 1e-14);
    }

    #[test]
    fn multimode_is_hermitian_anywhere(modes in 1usize..8, frac in 0.05..0.95f64) {
        let length = 1.0e5;
        let p = MultimodeParams { modes, length, position: Some(frac * length), ..Default::default() };
        prop_assert!(hermiticity_defect(&build_multimode(&p).unwrap(), 6, 5) < 1e-12);
    }

    #[test]
    fn unknown_keys_are_rejected(key in "[a-z]{3,10}") {
        prop_assume!(!["omega", "t0", "g", "photon_cap", "vary_drive"].contains(&key.as_str()));
        let text = format!("experiment = \"rabi-control\"\n[rabi]\nomega = 5.0\n{key} = 1\n");
        let err = RunConfig::from_toml(&text).unwrap_err().to_string();
        prop_assert!(err.contains(&key) && err.contains("line 4"), "{}", err);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    #[test]
    fn admissible_inversions_repropagate(
        free in proptest::collection::vec(-0.05..0.05f64, 10),
        drive in proptest::collection::vec(-0.2..0.2f64, 11),
        g in prop_oneof![Just(0.25), Just(0.5), Just(1.0)],
    ) {
        let p = RabiParams { g, ..Default::default() };
        let path = DensityPath::from_free(&free, AMPLITUDE, T_FINAL);
        let opts = InversionOptions { steps: 1000, ..Default::default() };
        let inv = invert_control(&path, &DipoleDrive::new(drive, T_FINAL), &p, &opts);
        prop_assume!(inv.is_ok());
        let inv = inv.unwrap();
        let mut h = build_rabi(&p).unwrap();
        let sig = |t: f64| inv.signal(t);
        let tr = propagate_exact(&mut h, &initial_state(&p), &PropagationOptions::new(opts.dt(), T_FINAL), Some(&sig)).unwrap();
        let worst = tr.times.iter().zip(&tr.sigma_z).map(|(t, s)| (s - path.value(*t)).abs()).fold(0.0, f64::max);
        prop_assert!(worst < 1e-6, "{}", worst);
        prop_assert!((inv.final_sigma_z() + AMPLITUDE).abs() < 1e-8);
    }
}
