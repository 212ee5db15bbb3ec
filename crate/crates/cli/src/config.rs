//! TOML run configuration. Every key is optional at parse time; each
//! command checks the parameters it needs before doing any work.
//!
//! ```toml
//! seed = 7
//! threads = 4
//!
//! [lattice]
//! axes = [{ start = 0.0, stop = 49.0, n = 50 }, { start = 0.0, stop = 49.0, n = 50 }]
//!
//! [kernel]
//! length_scale = 5.0
//!
//! [calibrate]
//! family = "chibar01"
//! thresholds = [1.0, 8.0]
//! n_reps = 100
//! l0 = 1.0
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{input, CliResult};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub output: Option<PathBuf>,
    pub lattice: Option<LatticeSpec>,
    pub kernel: Option<KernelSpec>,
    pub ec: Option<EcSection>,
    pub calibrate: Option<CalibrateSection>,
    pub pvalue: Option<PValueSection>,
    pub validate: Option<ValidateSection>,
    pub bumphunt: Option<BumpHuntSection>,
    #[serde(rename = "simulate-field")]
    pub simulate_field: Option<SimulateFieldSection>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub start: f64,
    pub stop: f64,
    pub n: usize,
}

/// Either an explicit cross-product grid or a region sampled at a spacing.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    pub axes: Option<Vec<AxisSpec>>,
    pub region: Option<RegionSpec>,
    pub spacing: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase", deny_unknown_fields)]
pub enum RegionSpec {
    Rectangle { x0: f64, x1: f64, y0: f64, y1: f64 },
    Disc { cx: f64, cy: f64, radius: f64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    pub length_scale: Option<f64>,
    pub length_scales: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EcSection {
    pub field: Option<PathBuf>,
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrateSection {
    pub family: Option<String>,
    pub thresholds: Option<Vec<f64>>,
    pub n_reps: Option<usize>,
    pub l0: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PValueSection {
    pub lkc: Option<PathBuf>,
    pub c: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    List(Vec<f64>),
    Range(AxisSpec),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateSection {
    pub family: Option<String>,
    pub thresholds: Option<Vec<f64>>,
    pub grid: Option<GridSpec>,
    pub n_calib: Option<usize>,
    pub n_tail: Option<usize>,
    pub l0: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InjectSpec {
    pub n_events: usize,
    pub eta: f64,
    pub theta: [f64; 2],
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpHuntSection {
    pub events: Option<PathBuf>,
    pub region: Option<RegionSpec>,
    pub spacing: Option<f64>,
    pub nu: Option<f64>,
    /// "kernel" (default) or "exact".
    pub calibration: Option<String>,
    pub kernel_length: Option<f64>,
    pub thresholds: Option<Vec<f64>>,
    pub n_reps: Option<usize>,
    pub l0: Option<f64>,
    /// Synthetic events drawn when no event file is given.
    pub inject: Option<InjectSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateFieldSection {
    pub replicate: Option<usize>,
    /// "identity" (default) or "chibar".
    pub transform: Option<String>,
}

impl RunConfig {
    /// Parses a config file; relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| input(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| input(format!("config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let rebase = |p: &mut Option<PathBuf>| {
            if let Some(p) = p {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        };
        rebase(&mut cfg.output);
        if let Some(s) = cfg.ec.as_mut() {
            rebase(&mut s.field);
        }
        if let Some(s) = cfg.pvalue.as_mut() {
            rebase(&mut s.lkc);
        }
        if let Some(s) = cfg.bumphunt.as_mut() {
            rebase(&mut s.events);
        }
        Ok(cfg)
    }
}
