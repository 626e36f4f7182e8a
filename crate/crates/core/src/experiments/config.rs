use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::control::OptimizeOptions;
use crate::dynamics::{Method, SNAPSHOT_TIMES};
use crate::error::{Error, Result};
use crate::models::multimode::length_for_coupling;
use crate::models::{DimerParams, MultimodeParams, RabiParams, ShinMetiuParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    DimerScan,
    DimerSpectrum,
    ShinMetiuCi,
    RabiControl,
    Emission,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        ExperimentKind::DimerScan,
        ExperimentKind::DimerSpectrum,
        ExperimentKind::ShinMetiuCi,
        ExperimentKind::RabiControl,
        ExperimentKind::Emission,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::DimerScan => "dimer-scan",
            ExperimentKind::DimerSpectrum => "dimer-spectrum",
            ExperimentKind::ShinMetiuCi => "shin-metiu-ci",
            ExperimentKind::RabiControl => "rabi-control",
            ExperimentKind::Emission => "emission",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            ExperimentKind::DimerScan => "dimer eigenenergies, bond lengths, Rabi splitting and CBO overlaps over g/omega",
            ExperimentKind::DimerSpectrum => "dimer absorption spectrum at one coupling",
            ExperimentKind::ShinMetiuCi => "Shin-Metiu conical intersection at q = 0 for each polarization",
            ExperimentKind::RabiControl => "local optimal control of the extended Rabi model",
            ExperimentKind::Emission => "exact vs mean-field spontaneous emission in a multimode cavity",
        }
    }

    /// Section that must be present, with its required `omega` key.
    fn required_section(&self) -> Option<&'static str> {
        match self {
            ExperimentKind::DimerScan | ExperimentKind::DimerSpectrum => Some("dimer"),
            ExperimentKind::ShinMetiuCi => Some("shin_metiu"),
            ExperimentKind::RabiControl => Some("rabi"),
            ExperimentKind::Emission => None,
        }
    }
}

/// Declarative run description, parsed from TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub dimer: Option<DimerSection>,
    #[serde(default)]
    pub scan: Option<ScanSection>,
    #[serde(default)]
    pub spectrum: Option<SpectrumSection>,
    #[serde(default)]
    pub shin_metiu: Option<ShinMetiuSection>,
    #[serde(default)]
    pub rabi: Option<RabiSection>,
    #[serde(default)]
    pub control: Option<ControlSection>,
    #[serde(default)]
    pub emission: Option<EmissionSection>,
}

/// Dimer overrides; `omega` is required.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimerSection {
    pub omega: f64,
    pub m1: Option<f64>,
    pub m2: Option<f64>,
    pub z1: Option<f64>,
    pub z2: Option<f64>,
    pub fd_order: Option<usize>,
    /// Drop the dipole self-energy (the unbound variant).
    pub self_energy: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    pub g_over_omega: Option<Vec<f64>>,
    /// Photon DVR points.
    pub photon_points: Option<usize>,
    pub exact_states: Option<usize>,
    pub electronic_states: Option<usize>,
    pub electronic_tol: Option<f64>,
    pub tol: Option<f64>,
    /// Also solve the single-sheet CBO problem and report overlaps.
    pub cbo: Option<bool>,
    pub edge_threshold: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    pub g_over_omega: Option<f64>,
    pub omega_min: Option<f64>,
    pub omega_max: Option<f64>,
    pub points: Option<usize>,
    pub broadening: Option<f64>,
    pub states: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShinMetiuSection {
    pub omega: f64,
    pub g_over_omega: Option<f64>,
    /// Polarization unit vectors to compare against the uncoupled case.
    pub polarizations: Option<Vec<[f64; 2]>>,
    pub electron_points: Option<usize>,
    pub electron_extent: Option<f64>,
    /// `[lo, hi, points]` of the nuclear x search axis.
    pub nuclear_x: Option<(f64, f64, usize)>,
    pub nuclear_y: Option<(f64, f64, usize)>,
    /// Refinement factor of the second search stage (1 disables it).
    pub refine: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RabiSection {
    pub omega: f64,
    pub t0: Option<f64>,
    pub g: Option<Vec<f64>>,
    pub photon_cap: Option<usize>,
    /// Drive settings to optimize for each g.
    pub vary_drive: Option<Vec<bool>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlSection {
    pub steps: Option<usize>,
    pub starts: Option<usize>,
    pub max_iter: Option<usize>,
    pub spread: Option<f64>,
    pub path_basis: Option<usize>,
    pub drive_basis: Option<usize>,
    pub tol: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmissionSection {
    pub setups: Option<Vec<u8>>,
    pub methods: Option<Vec<Method>>,
    pub modes: Option<usize>,
    pub length: Option<f64>,
    pub position: Option<f64>,
    pub t0: Option<f64>,
    pub d_eg: Option<f64>,
    pub dt: Option<f64>,
    pub t_final: Option<f64>,
    pub snapshots: Option<Vec<f64>>,
    pub positions: Option<usize>,
    pub raw_intensity: Option<bool>,
}

/// Fully resolved settings, echoed into every manifest.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "experiment", rename_all = "kebab-case")]
pub enum Resolved {
    DimerScan(DimerScanConfig),
    DimerSpectrum(DimerSpectrumConfig),
    ShinMetiuCi(ShinMetiuConfig),
    RabiControl(RabiControlConfig),
    Emission(EmissionConfig),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DimerScanConfig {
    pub params: DimerParams,
    pub self_energy: bool,
    pub g_over_omega: Vec<f64>,
    pub photon_points: usize,
    pub exact_states: usize,
    pub electronic_states: usize,
    pub electronic_tol: f64,
    pub tol: f64,
    pub cbo: bool,
    pub edge_threshold: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DimerSpectrumConfig {
    pub scan: DimerScanConfig,
    pub g_over_omega: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    pub points: usize,
    pub broadening: f64,
    pub states: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShinMetiuConfig {
    pub params: ShinMetiuParams,
    pub g_over_omega: f64,
    pub polarizations: Vec<[f64; 2]>,
    pub nuclear_x: (f64, f64, usize),
    pub nuclear_y: (f64, f64, usize),
    pub refine: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RabiControlConfig {
    pub params: RabiParams,
    pub g: Vec<f64>,
    pub vary_drive: Vec<bool>,
    pub options: OptimizeOptions,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmissionConfig {
    pub params: MultimodeParams,
    pub setups: Vec<u8>,
    pub methods: Vec<Method>,
    pub dt: f64,
    pub t_final: f64,
    pub snapshots: Vec<f64>,
    pub positions: usize,
    pub raw_intensity: bool,
}

/// Default coupling list of the dimer scan.
pub const DIMER_RATIOS: [f64; 9] = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.56];

impl RunConfig {
    /// Parses TOML; errors carry the offending key and its line.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if let Some(section) = cfg.experiment.required_section() {
            let present = match section {
                "dimer" => cfg.dimer.is_some(),
                "shin_metiu" => cfg.shin_metiu.is_some(),
                _ => cfg.rabi.is_some(),
            };
            if !present {
                return Err(Error::Config(format!(
                    "missing section [{section}] (with key `omega`) required by experiment `{}`",
                    cfg.experiment.name()
                )));
            }
        }
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    fn dimer_scan(&self, seed: u64) -> Result<DimerScanConfig> {
        let d = self.dimer.as_ref().ok_or_else(|| Error::Config("missing section [dimer]".into()))?;
        let def = DimerParams::default();
        let s = self.scan.clone().unwrap_or_else(|| ScanSection {
            g_over_omega: None,
            photon_points: None,
            exact_states: None,
            electronic_states: None,
            electronic_tol: None,
            tol: None,
            cbo: None,
            edge_threshold: None,
        });
        let photon_points = s.photon_points.unwrap_or(def.photon_cap);
        let params = DimerParams {
            m1: d.m1.unwrap_or(def.m1),
            m2: d.m2.unwrap_or(def.m2),
            z1: d.z1.unwrap_or(def.z1),
            z2: d.z2.unwrap_or(def.z2),
            omega: d.omega,
            lambda: 0.0,
            photon_cap: photon_points,
            fd_order: d.fd_order.unwrap_or(def.fd_order),
        };
        params.validate()?;
        Ok(DimerScanConfig {
            params,
            self_energy: d.self_energy.unwrap_or(true),
            g_over_omega: s.g_over_omega.unwrap_or_else(|| DIMER_RATIOS.to_vec()),
            photon_points,
            exact_states: s.exact_states.unwrap_or(6),
            electronic_states: s.electronic_states.unwrap_or(4),
            electronic_tol: s.electronic_tol.unwrap_or(1e-7),
            tol: s.tol.unwrap_or(1e-9),
            cbo: s.cbo.unwrap_or(true),
            edge_threshold: s.edge_threshold.unwrap_or(1e-3),
            seed,
        })
    }

    /// Applies defaults and validates every parameter.
    pub fn resolve(&self) -> Result<Resolved> {
        let seed = self.seed.unwrap_or(1);
        match self.experiment {
            ExperimentKind::DimerScan => Ok(Resolved::DimerScan(self.dimer_scan(seed)?)),
            ExperimentKind::DimerSpectrum => {
                let scan = self.dimer_scan(seed)?;
                let s = self.spectrum.as_ref();
                let get = |f: fn(&SpectrumSection) -> Option<f64>, d: f64| s.and_then(f).unwrap_or(d);
                let omega = scan.params.omega;
                Ok(Resolved::DimerSpectrum(DimerSpectrumConfig {
                    g_over_omega: get(|s| s.g_over_omega, 1.6),
                    omega_min: get(|s| s.omega_min, 0.5 * omega),
                    omega_max: get(|s| s.omega_max, 1.6 * omega),
                    points: s.and_then(|s| s.points).unwrap_or(2001),
                    broadening: get(|s| s.broadening, crate::spectra::DEFAULT_BROADENING),
                    states: s.and_then(|s| s.states).unwrap_or(crate::spectra::MAX_STATES),
                    scan,
                }))
            }
            ExperimentKind::ShinMetiuCi => {
                let s = self.shin_metiu.as_ref().ok_or_else(|| Error::Config("missing section [shin_metiu]".into()))?;
                let def = ShinMetiuParams::default();
                let params = ShinMetiuParams {
                    omega: s.omega,
                    electron_points: s.electron_points.unwrap_or(def.electron_points),
                    electron_extent: s.electron_extent.unwrap_or(def.electron_extent),
                    ..def
                };
                params.validate()?;
                Ok(Resolved::ShinMetiuCi(ShinMetiuConfig {
                    params,
                    g_over_omega: s.g_over_omega.unwrap_or(2.25),
                    polarizations: s.polarizations.clone().unwrap_or_else(|| vec![[1.0, 0.0], [0.0, 1.0]]),
                    nuclear_x: s.nuclear_x.unwrap_or((-0.2, 0.2, 5)),
                    nuclear_y: s.nuclear_y.unwrap_or((0.2, 3.0, 57)),
                    refine: s.refine.unwrap_or(4).max(1),
                    seed,
                }))
            }
            ExperimentKind::RabiControl => {
                let r = self.rabi.as_ref().ok_or_else(|| Error::Config("missing section [rabi]".into()))?;
                let def = RabiParams::default();
                let params = RabiParams {
                    t0: r.t0.unwrap_or(def.t0),
                    omega: r.omega,
                    g: 0.0,
                    photon_cap: r.photon_cap.unwrap_or(def.photon_cap),
                };
                params.validate()?;
                let mut options = OptimizeOptions { seed, ..Default::default() };
                if let Some(c) = &self.control {
                    options.inversion.steps = c.steps.unwrap_or(options.inversion.steps);
                    options.inversion.tol = c.tol.unwrap_or(options.inversion.tol);
                    options.starts = c.starts.unwrap_or(options.starts);
                    options.bfgs.max_iter = c.max_iter.unwrap_or(options.bfgs.max_iter);
                    options.spread = c.spread.unwrap_or(options.spread);
                    options.path_basis = c.path_basis.unwrap_or(options.path_basis);
                    options.drive_basis = c.drive_basis.unwrap_or(options.drive_basis);
                }
                Ok(Resolved::RabiControl(RabiControlConfig {
                    params,
                    g: r.g.clone().unwrap_or_else(|| vec![0.0, 0.25, 0.5, 1.0]),
                    vary_drive: r.vary_drive.clone().unwrap_or_else(|| vec![false, true]),
                    options,
                }))
            }
            ExperimentKind::Emission => {
                let def = MultimodeParams::default();
                let e = self.emission.as_ref();
                let params = MultimodeParams {
                    t0: e.and_then(|e| e.t0).unwrap_or(def.t0),
                    d_eg: e.and_then(|e| e.d_eg).unwrap_or(def.d_eg),
                    modes: e.and_then(|e| e.modes).unwrap_or(def.modes),
                    length: e.and_then(|e| e.length).unwrap_or(length_for_coupling(0.0103)),
                    position: e.and_then(|e| e.position),
                };
                params.validate()?;
                let setups = e.and_then(|e| e.setups.clone()).unwrap_or_else(|| vec![1, 2]);
                for s in &setups {
                    crate::dynamics::initial_matter(*s)?;
                }
                Ok(Resolved::Emission(EmissionConfig {
                    params,
                    setups,
                    methods: e.and_then(|e| e.methods.clone()).unwrap_or_else(|| vec![Method::Exact, Method::MeanField]),
                    dt: e.and_then(|e| e.dt).unwrap_or(0.1),
                    t_final: e.and_then(|e| e.t_final).unwrap_or(2200.0),
                    snapshots: e.and_then(|e| e.snapshots.clone()).unwrap_or_else(|| SNAPSHOT_TIMES.to_vec()),
                    positions: e.and_then(|e| e.positions).unwrap_or(1000),
                    raw_intensity: e.and_then(|e| e.raw_intensity).unwrap_or(false),
                }))
            }
        }
    }
}
