use std::io::Write;

use tohm_core::rft::{global_pvalue, solve_lkc, DensityFamily, LkcSolution};
use tohm_core::scalar::format_shortest;
use tohm_core::{Error, Result};

use crate::mc::{empirical_sup_tail, estimate_expected_ec, EcCalibration, Transform};
use crate::rng::sub_seed;
use crate::sampler::GrfSampler;

/// Header of the validation TSV.
pub const VALIDATION_COLUMNS: [&str; 6] =
    ["c", "empirical_tail", "empirical_se", "approx_pvalue", "approx_low", "approx_high"];

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationConfig {
    /// Thresholds at which both curves are reported.
    pub grid: Vec<f64>,
    pub calib_thresholds: Vec<f64>,
    pub n_calib: usize,
    pub n_tail: usize,
    pub l0: f64,
    pub family: DensityFamily,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationRow {
    pub c: f64,
    pub empirical_tail: f64,
    pub empirical_se: f64,
    pub approx_pvalue: f64,
    pub approx_low: f64,
    pub approx_high: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationCurve {
    pub rows: Vec<ValidationRow>,
    pub lkc: LkcSolution,
    pub calibration: EcCalibration,
}

/// Calibrates LKCs on `n_calib` replicates and compares the EC
/// approximation with the empirical tail of the maximum over `n_tail`
/// independent replicates.
pub fn validation_curve(sampler: &GrfSampler, transform: Transform, cfg: &ValidationConfig) -> Result<ValidationCurve> {
    if cfg.grid.is_empty() {
        return Err(Error::Invalid("validation grid is empty".into()));
    }
    let calibration = estimate_expected_ec(sampler, transform, &cfg.calib_thresholds, cfg.n_calib, sub_seed(cfg.seed, 0))?;
    let lkc = solve_lkc(cfg.family, cfg.l0, &calibration.observations())?;
    let tails = empirical_sup_tail(sampler, transform, &cfg.grid, cfg.n_tail, sub_seed(cfg.seed, 1))?;
    let rows = tails
        .iter()
        .map(|t| {
            let report = global_pvalue(t.threshold, &lkc)?;
            Ok(ValidationRow {
                c: t.threshold,
                empirical_tail: t.tail,
                empirical_se: t.se,
                approx_pvalue: report.pvalue,
                approx_low: report.mc_interval.0,
                approx_high: report.mc_interval.1,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ValidationCurve { rows, lkc, calibration })
}

pub fn write_validation_tsv<W: Write>(rows: &[ValidationRow], mut out: W) -> Result<()> {
    writeln!(out, "{}", VALIDATION_COLUMNS.join("\t"))?;
    for r in rows {
        let cols = [r.c, r.empirical_tail, r.empirical_se, r.approx_pvalue, r.approx_low, r.approx_high];
        let text: Vec<String> = cols.iter().map(|&v| format_shortest(v)).collect();
        writeln!(out, "{}", text.join("\t"))?;
    }
    out.flush()?;
    Ok(())
}
