//! Run configuration files.
//!
//! Paths inside a config file are resolved relative to the directory that
//! contains the file.

use std::fs;
use std::path::{Path, PathBuf};

use rhc_msvm::{HsdmConfig, NcrConfig, Schema};
use serde::Deserialize;

use crate::error::CliError;

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SolverChoice {
    Rhc,
    Ncr,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RhcSection {
    pub rho1: Option<f64>,
    pub alpha: Option<f64>,
    pub lambda1: Option<f64>,
    pub decay: Option<f64>,
    pub max_iterations: Option<usize>,
    pub residual_tol: Option<f64>,
    pub drift_tol: Option<f64>,
    pub drift_window: Option<usize>,
    pub log_every: Option<usize>,
}

impl RhcSection {
    pub fn to_config(&self) -> HsdmConfig {
        let d = HsdmConfig::default();
        HsdmConfig {
            rho1: self.rho1.or(d.rho1),
            alpha: self.alpha.unwrap_or(d.alpha),
            lambda1: self.lambda1.unwrap_or(d.lambda1),
            decay: self.decay.unwrap_or(d.decay),
            max_iterations: self.max_iterations.unwrap_or(d.max_iterations),
            residual_tol: self.residual_tol.unwrap_or(d.residual_tol),
            drift_tol: self.drift_tol.unwrap_or(d.drift_tol),
            drift_window: self.drift_window.unwrap_or(d.drift_window),
            log_every: self.log_every.unwrap_or(d.log_every),
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NcrSection {
    pub c: Option<f64>,
    pub tau: Option<f64>,
    pub sigma: Option<f64>,
    pub max_iterations: Option<usize>,
    pub tol: Option<f64>,
    pub log_every: Option<usize>,
}

impl NcrSection {
    pub fn to_config(&self) -> NcrConfig {
        let d = NcrConfig::default();
        NcrConfig {
            c: self.c.unwrap_or(d.c),
            tau: self.tau.or(d.tau),
            sigma: self.sigma.or(d.sigma),
            max_iterations: self.max_iterations.unwrap_or(d.max_iterations),
            tol: self.tol.unwrap_or(d.tol),
            log_every: self.log_every.unwrap_or(d.log_every),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub path: PathBuf,
    /// Subset specification; the whole file is used when absent.
    pub subset: Option<PathBuf>,
    /// Column layout; the bundled Iris layout when absent.
    pub schema: Option<Schema>,
}

/// One `train`/`evaluate`/... invocation.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub data: DataSection,
    pub solver: Option<SolverChoice>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub rhc: RhcSection,
    #[serde(default)]
    pub ncr: NcrSection,
}

/// One experiment of `reproduce-paper`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Experiment {
    pub name: String,
    pub subset: PathBuf,
    /// Values of `C` for the baseline; the last one is the headline run.
    pub ncr_c: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PaperConfig {
    pub schema_version: u32,
    pub data: PathBuf,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub rhc: RhcSection,
    #[serde(default)]
    pub ncr: NcrSection,
    pub experiment: Vec<Experiment>,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn check_version(v: u32, path: &Path) -> Result<(), CliError> {
    if v != CONFIG_SCHEMA_VERSION {
        return Err(CliError::Config(format!(
            "{}: unsupported schema_version {v} (expected {CONFIG_SCHEMA_VERSION})",
            path.display()
        )));
    }
    Ok(())
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = read(path)?;
        let mut cfg: RunConfig = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        check_version(cfg.schema_version, path)?;
        let base = base_dir(path);
        cfg.data.path = resolve(&base, &cfg.data.path);
        cfg.data.subset = cfg.data.subset.map(|s| resolve(&base, &s));
        cfg.out = cfg.out.map(|o| resolve(&base, &o));
        Ok(cfg)
    }

    pub fn schema(&self) -> Schema {
        self.data.schema.clone().unwrap_or_else(Schema::iris)
    }
}

impl PaperConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = read(path)?;
        let mut cfg: PaperConfig = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        check_version(cfg.schema_version, path)?;
        let base = base_dir(path);
        cfg.data = resolve(&base, &cfg.data);
        cfg.out = cfg.out.map(|o| resolve(&base, &o));
        for e in &mut cfg.experiment {
            e.subset = resolve(&base, &e.subset);
            if e.ncr_c.is_empty() {
                return Err(CliError::Config(format!(
                    "experiment {:?} lists no ncr_c values",
                    e.name
                )));
            }
        }
        if cfg.experiment.is_empty() {
            return Err(CliError::Config("paper config has no [[experiment]] entries".into()));
        }
        Ok(cfg)
    }
}
