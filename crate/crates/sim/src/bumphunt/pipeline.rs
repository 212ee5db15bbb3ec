use std::sync::Arc;

use tohm_core::rft::{global_pvalue, solve_lkc, DensityFamily, PValueReport};
use tohm_core::{Error, Lattice, Result};

use crate::bumphunt::lrt::{lrt_field, LrtField};
use crate::bumphunt::model::{simulate_events_with, BumpModel, EventSet};
use crate::bumphunt::region::Region;
use crate::kernel::SquaredExponential;
use crate::mc::{estimate_expected_ec, estimate_expected_ec_with, EcCalibration, Transform};
use crate::rng::sub_seed;
use crate::sampler::GrfSampler;

/// How null replicates for the EC calibration are produced.
#[derive(Debug, Clone, PartialEq)]
pub enum Calibration {
    /// χ̄²-transformed smooth Gaussian fields with this kernel. Fast; the
    /// kernel only approximates the correlation of the LRT field.
    Kernel(SquaredExponential),
    /// Background-only event sets of the observed size, each refitted on
    /// the lattice. Slow but uses the actual null field.
    Exact,
}

/// Length-scale of the squared-exponential kernel closest to the LRT
/// field's correlation away from the boundary: the overlap of two Gaussian
/// bumps of width ν decays like exp(−d²/(4ν²)), i.e. ℓ = √2·ν.
pub fn default_kernel_length(nu: f64) -> f64 {
    std::f64::consts::SQRT_2 * nu
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub region: Region,
    pub nu: f64,
    pub calibration: Calibration,
    /// Calibration thresholds c₁..c_D.
    pub thresholds: Vec<f64>,
    pub n_reps: usize,
    pub l0: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BumpHuntResult {
    pub report: PValueReport,
    /// Largest observed W_n.
    pub max_w: f64,
    pub peak: [f64; 2],
    pub peak_index: usize,
    /// η̂ at the peak.
    pub eta_hat: f64,
    pub calibration: EcCalibration,
    pub lrt: LrtField,
}

/// Observed LRT field, null calibration of the LKCs, and the global p-value
/// of the field maximum.
pub fn bump_hunt(events: &EventSet, lattice: Arc<Lattice>, cfg: &PipelineConfig) -> Result<BumpHuntResult> {
    events.check_inside(&cfg.region)?;
    for (k, c) in cfg.thresholds.iter().enumerate() {
        if cfg.thresholds[..k].contains(c) {
            return Err(Error::Invalid(format!("duplicate calibration threshold {c}")));
        }
    }
    let lrt = lrt_field(events, Arc::clone(&lattice), &cfg.region, cfg.nu)?;
    let calib_seed = sub_seed(cfg.seed, 0);
    let calibration = match &cfg.calibration {
        Calibration::Kernel(kernel) => {
            let sampler = GrfSampler::new(Arc::clone(&lattice), kernel.clone())?;
            estimate_expected_ec(&sampler, Transform::ChiBar, &cfg.thresholds, cfg.n_reps, calib_seed)?
        }
        Calibration::Exact => {
            let null = BumpModel { region: cfg.region, nu: cfg.nu, eta: 0.0, theta: cfg.region.centroid() };
            estimate_expected_ec_with(&cfg.thresholds, cfg.n_reps, calib_seed, |_, rng| {
                let ev = simulate_events_with(&null, events.len(), rng)?;
                Ok(lrt_field(&ev, Arc::clone(&lattice), &cfg.region, cfg.nu)?.field)
            })?
        }
    };
    let lkc = solve_lkc(DensityFamily::ChiBar01, cfg.l0, &calibration.observations())?;
    let (peak_index, max_w, peak, eta_hat) = lrt.peak();
    // the χ̄² densities are evaluated on c > 0; an all-zero field sits at the
    // bottom of the range
    let report = global_pvalue(max_w.max(f64::MIN_POSITIVE), &lkc)?;
    Ok(BumpHuntResult { report, max_w, peak, peak_index, eta_hat, calibration, lrt })
}
