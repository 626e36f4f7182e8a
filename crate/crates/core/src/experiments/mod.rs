//! Declarative experiment runner: configs, dry-run validation and the
//! artifact writers behind the command-line tool.

mod config;
mod runners;

use std::path::{Path, PathBuf};

use serde::Serialize;

pub use config::{
    ControlSection, DimerScanConfig, DimerSection, DimerSpectrumConfig, EmissionConfig, EmissionSection,
    ExperimentKind, RabiControlConfig, RabiSection, Resolved, RunConfig, ScanSection, ShinMetiuConfig,
    ShinMetiuSection, SpectrumSection, DIMER_RATIOS,
};
pub use runners::{
    ci_search, dimer_point, CiCase, DimerPoint, EmissionSummary, FreeEvolutionRow, PenaltyRow,
};

use crate::error::Result;
use crate::models::dimer::electronic_grid;
use crate::models::si3_grid;
use crate::state::LinearOperator;

/// Files written by a run, with the manifest contents.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub experiment: ExperimentKind,
    pub output: PathBuf,
    pub files: Vec<PathBuf>,
    pub manifest: serde_json::Value,
}

/// Dry-run size estimate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub experiment: ExperimentKind,
    /// Full-basis dimension of the model.
    pub dimension: usize,
    /// Dimension of the problem actually diagonalized or propagated.
    pub working_dimension: usize,
    /// Independent points or runs.
    pub points: usize,
    /// Rough peak memory of one point in bytes.
    pub memory_bytes: usize,
    pub resolved: Resolved,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentInfo {
    pub name: &'static str,
    pub description: &'static str,
}

pub fn list() -> Vec<ExperimentInfo> {
    ExperimentKind::ALL.iter().map(|k| ExperimentInfo { name: k.name(), description: k.description() }).collect()
}

/// Schema check and size report; nothing is computed.
pub fn validate(cfg: &RunConfig) -> Result<ValidationReport> {
    let resolved = cfg.resolve()?;
    let (dimension, working_dimension, points, memory_bytes) = match &resolved {
        Resolved::DimerScan(d) | Resolved::DimerSpectrum(DimerSpectrumConfig { scan: d, .. }) => {
            let grid = si3_grid();
            let nuclear = grid.axes()[0].points;
            let electronic = electronic_grid(&grid)?.size();
            let dim = grid.size() * d.photon_points;
            let channels = nuclear * d.photon_points * d.electronic_states;
            // Retained electronic states dominate: one vector per sheet and point.
            let mem = 8 * (channels * electronic + channels * (d.exact_states + 8) * 2);
            let points = match &resolved {
                Resolved::DimerSpectrum(_) => 1,
                _ => d.g_over_omega.len(),
            };
            (dim, channels, points, mem)
        }
        Resolved::ShinMetiuCi(s) => {
            let grid = s.params.grid()?;
            let electronic = s.params.electron_points * s.params.electron_points;
            let dim = grid.size() * s.params.photon_cap;
            let scan = s.nuclear_x.2 * s.nuclear_y.2;
            (dim, electronic, (1 + s.polarizations.len()) * scan, 8 * electronic * 24)
        }
        Resolved::RabiControl(r) => {
            let dim = 2 * (r.params.photon_cap + 1);
            let runs = r.g.iter().map(|g| if *g == 0.0 { 1 } else { r.vary_drive.len() }).sum();
            (dim, dim, runs, 16 * dim * (r.options.inversion.krylov_dim + 4) + 8 * 4 * r.options.inversion.steps)
        }
        Resolved::Emission(e) => {
            let full = e.params.dimension();
            let coupled = crate::models::MultimodeHamiltonian::coupled(&e.params)?.dim();
            let krylov = 40;
            (full, coupled, e.setups.len() * e.methods.len(), 16 * coupled * (krylov + 4))
        }
    };
    Ok(ValidationReport { experiment: cfg.experiment, dimension, working_dimension, points, memory_bytes, resolved })
}

/// Output directory: `--out` beats the config's `output`, which beats
/// `root/<experiment>`.
pub fn output_dir(cfg: &RunConfig, out: Option<&Path>, root: &Path) -> PathBuf {
    match (out, &cfg.output) {
        (Some(o), _) => o.to_path_buf(),
        (None, Some(o)) => o.clone(),
        (None, None) => root.join(cfg.experiment.name()),
    }
}

/// Runs an experiment, writing CSV arrays and a JSON manifest into `dir`.
pub fn run(cfg: &RunConfig, dir: &Path) -> Result<RunReport> {
    let resolved = cfg.resolve()?;
    std::fs::create_dir_all(dir)?;
    let (files, results) = match &resolved {
        Resolved::DimerScan(d) => runners::dimer_scan(d, dir)?,
        Resolved::DimerSpectrum(d) => runners::dimer_spectrum(d, dir)?,
        Resolved::ShinMetiuCi(s) => runners::shin_metiu(s, dir)?,
        Resolved::RabiControl(r) => runners::rabi_control(r, dir)?,
        Resolved::Emission(e) => runners::emission(e, dir)?,
    };
    let manifest = serde_json::json!({
        "experiment": cfg.experiment,
        "config": resolved,
        "results": results,
        "files": files.iter().map(|f| f.file_name().map(|n| n.to_string_lossy().into_owned())).collect::<Vec<_>>(),
    });
    let path = dir.join("manifest.json");
    std::fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    let mut files = files;
    files.push(path);
    Ok(RunReport { experiment: cfg.experiment, output: dir.to_path_buf(), files, manifest })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_reports_dimensions() {
        let cfg = RunConfig::from_toml("experiment = \"emission\"\n").unwrap();
        let r = validate(&cfg).unwrap();
        assert_eq!(r.dimension, 160402);
        assert_eq!(r.working_dimension, 40202);
        let cfg = RunConfig::from_toml("experiment = \"dimer-scan\"\n[dimer]\nomega = 0.012568\n").unwrap();
        assert_eq!(validate(&cfg).unwrap().dimension, 61 * 41 * 51 * 41);
    }

    #[test]
    fn list_names_every_experiment() {
        let names: Vec<_> = list().iter().map(|e| e.name).collect();
        assert_eq!(names, ["dimer-scan", "dimer-spectrum", "shin-metiu-ci", "rabi-control", "emission"]);
    }

    #[test]
    fn small_emission_run_is_deterministic() {
        let text = "experiment = \"emission\"\n[emission]\nmodes = 20\nlength = 6000.0\nt_final = 20.0\nsnapshots = [10.0, 20.0]\npositions = 50\nsetups = [2]\n";
        let cfg = RunConfig::from_toml(text).unwrap();
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let ra = run(&cfg, a.path()).unwrap();
        run(&cfg, b.path()).unwrap();
        for f in &ra.files {
            let name = f.file_name().unwrap();
            assert_eq!(std::fs::read(f).unwrap(), std::fs::read(b.path().join(name)).unwrap(), "{name:?}");
        }
        assert!(a.path().join("field_setup2_exact.csv").exists());
    }

    #[test]
    fn small_control_run_writes_manifest() {
        let text = "experiment = \"rabi-control\"\n[rabi]\nomega = 5.0\ng = [0.0]\n[control]\nsteps = 400\nstarts = 1\nmax_iter = 2\n";
        let cfg = RunConfig::from_toml(text).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let r = run(&cfg, dir.path()).unwrap();
        let free = &r.manifest["results"]["free_evolution"][0]["sigma_z_final"];
        assert!((free.as_f64().unwrap() - 0.98).abs() < 2e-3, "{free}");
        assert!(dir.path().join("g0_drive-off").join("control.json").exists());
        assert_eq!(r.manifest["config"]["experiment"], "rabi-control");
    }
}
