use std::ops::Range;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use tohm_core::euler::euler_characteristic;
use tohm_core::rft::EcObservation;
use tohm_core::{Error, FieldSample, Result};

use crate::rng::replicate_rng;
use crate::sampler::GrfSampler;

/// Replicates per unit of parallel work. Fixed so that results do not depend
/// on the number of threads.
pub const BATCH: usize = 32;

/// Pointwise map applied to a Gaussian draw before thresholding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    Identity,
    /// z ↦ z²·1{z ≥ 0}.
    ChiBar,
}

impl Transform {
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Transform::Identity => z,
            Transform::ChiBar => chibar(z),
        }
    }
}

fn chibar(z: f64) -> f64 {
    if z > 0.0 {
        z * z
    } else {
        0.0
    }
}

/// w = z²·1{z ≥ 0} at every point.
pub fn chibar_transform(field: &FieldSample) -> FieldSample {
    field.map(chibar).expect("transform of finite values is finite")
}

/// Runs `work` on consecutive replicate ranges of size [`BATCH`] in parallel
/// and concatenates the results in replicate order.
pub fn run_batched<R, F>(n_reps: usize, work: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(Range<usize>) -> Result<Vec<R>> + Sync,
{
    let ranges: Vec<Range<usize>> = (0..n_reps).step_by(BATCH).map(|s| s..(s + BATCH).min(n_reps)).collect();
    let parts: Vec<Result<Vec<R>>> = ranges.into_par_iter().map(&work).collect();
    let mut out = Vec::with_capacity(n_reps);
    for part in parts {
        out.extend(part?);
    }
    Ok(out)
}

/// Monte Carlo estimate of E[φ(A_c)].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub threshold: f64,
    pub mean: f64,
    /// Sample standard deviation over √n_reps.
    pub se: f64,
    pub n_reps: usize,
    pub master_seed: u64,
}

impl McEstimate {
    pub fn observation(&self) -> EcObservation {
        EcObservation { threshold: self.threshold, mean: self.mean, se: self.se }
    }
}

/// Per-threshold EC estimates from one shared set of replicates.
#[derive(Debug, Clone, PartialEq)]
pub struct EcCalibration {
    pub estimates: Vec<McEstimate>,
    /// Sample correlation of the per-replicate ECs across thresholds, k×k
    /// row-major. Entries involving a constant column are 0 (1 on the
    /// diagonal).
    pub correlation: Vec<f64>,
}

impl EcCalibration {
    pub fn observations(&self) -> Vec<EcObservation> {
        self.estimates.iter().map(McEstimate::observation).collect()
    }

    /// Summarizes `ecs[i][k]`, the EC of replicate i at threshold k.
    pub fn from_replicates(thresholds: &[f64], ecs: &[Vec<i64>], master_seed: u64) -> Self {
        let n = ecs.len();
        let k = thresholds.len();
        let nf = n as f64;
        let means: Vec<f64> = (0..k).map(|t| ecs.iter().map(|e| e[t] as f64).sum::<f64>() / nf).collect();
        let mut cov = vec![0.0; k * k];
        for e in ecs {
            for a in 0..k {
                for b in 0..k {
                    cov[a * k + b] += (e[a] as f64 - means[a]) * (e[b] as f64 - means[b]);
                }
            }
        }
        for v in cov.iter_mut() {
            *v /= nf - 1.0;
        }
        let estimates = thresholds
            .iter()
            .enumerate()
            .map(|(t, &c)| McEstimate {
                threshold: c,
                mean: means[t],
                se: (cov[t * k + t] / nf).sqrt(),
                n_reps: n,
                master_seed,
            })
            .collect();
        let mut correlation = vec![0.0; k * k];
        for a in 0..k {
            for b in 0..k {
                let denom = (cov[a * k + a] * cov[b * k + b]).sqrt();
                correlation[a * k + b] = if a == b {
                    1.0
                } else if denom > 0.0 {
                    cov[a * k + b] / denom
                } else {
                    0.0
                };
            }
        }
        Self { estimates, correlation }
    }
}

fn check_thresholds(thresholds: &[f64]) -> Result<()> {
    if thresholds.is_empty() {
        return Err(Error::Invalid("at least one threshold is needed".into()));
    }
    if let Some(c) = thresholds.iter().find(|c| c.is_nan()) {
        return Err(Error::Invalid(format!("threshold {c} is not a number")));
    }
    Ok(())
}

/// Estimates E[φ(A_c)] at every threshold from `n_reps` draws of any field
/// generator. `draw(i, rng)` must produce replicate i using only `rng`.
pub fn estimate_expected_ec_with<F>(thresholds: &[f64], n_reps: usize, master_seed: u64, draw: F) -> Result<EcCalibration>
where
    F: Fn(usize, &mut ChaCha8Rng) -> Result<FieldSample> + Sync,
{
    check_thresholds(thresholds)?;
    if n_reps < 2 {
        return Err(Error::Invalid(format!("need at least 2 replicates, got {n_reps}")));
    }
    let ecs = run_batched(n_reps, |range| {
        range
            .map(|i| {
                let mut rng = replicate_rng(master_seed, i as u64);
                let field = draw(i, &mut rng)?;
                Ok(thresholds.iter().map(|&c| euler_characteristic(&field, c)).collect())
            })
            .collect()
    })?;
    Ok(EcCalibration::from_replicates(thresholds, &ecs, master_seed))
}

/// Estimates E[φ(A_c)] for transformed Gaussian fields; all thresholds are
/// evaluated on the same replicates.
pub fn estimate_expected_ec(
    sampler: &GrfSampler,
    transform: Transform,
    thresholds: &[f64],
    n_reps: usize,
    master_seed: u64,
) -> Result<EcCalibration> {
    check_thresholds(thresholds)?;
    if n_reps < 2 {
        return Err(Error::Invalid(format!("need at least 2 replicates, got {n_reps}")));
    }
    let ecs = run_batched(n_reps, |range| {
        Ok(sampler
            .sample_batch(master_seed, range)
            .into_iter()
            .map(|z| {
                let w = z.map(|v| transform.apply(v)).expect("finite");
                thresholds.iter().map(|&c| euler_characteristic(&w, c)).collect()
            })
            .collect())
    })?;
    Ok(EcCalibration::from_replicates(thresholds, &ecs, master_seed))
}

/// Empirical P(max W ≥ c) with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailEstimate {
    pub threshold: f64,
    pub tail: f64,
    pub se: f64,
}

/// Maxima of `n_reps` transformed draws, in replicate order.
pub fn field_maxima(sampler: &GrfSampler, transform: Transform, n_reps: usize, master_seed: u64) -> Result<Vec<f64>> {
    run_batched(n_reps, |range| {
        Ok(sampler
            .sample_values(master_seed, range)
            .into_iter()
            .map(|z| z.into_iter().map(|v| transform.apply(v)).fold(f64::NEG_INFINITY, f64::max))
            .collect())
    })
}

pub fn tail_from_maxima(maxima: &[f64], thresholds: &[f64]) -> Vec<TailEstimate> {
    let n = maxima.len() as f64;
    thresholds
        .iter()
        .map(|&c| {
            let p = maxima.iter().filter(|&&m| m >= c).count() as f64 / n;
            TailEstimate { threshold: c, tail: p, se: (p * (1.0 - p) / n).sqrt() }
        })
        .collect()
}

/// Fraction of replicates whose maximum reaches each threshold, i.e. whose
/// excursion set is non-empty.
pub fn empirical_sup_tail(
    sampler: &GrfSampler,
    transform: Transform,
    thresholds: &[f64],
    n_reps: usize,
    master_seed: u64,
) -> Result<Vec<TailEstimate>> {
    check_thresholds(thresholds)?;
    if n_reps < 100 {
        return Err(Error::Invalid(format!("need at least 100 replicates for a tail estimate, got {n_reps}")));
    }
    let maxima = field_maxima(sampler, transform, n_reps, master_seed)?;
    Ok(tail_from_maxima(&maxima, thresholds))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chibar_values() {
        assert_eq!(Transform::ChiBar.apply(-1.3), 0.0);
        assert_eq!(Transform::ChiBar.apply(2.0), 4.0);
        assert_eq!(Transform::ChiBar.apply(0.0), 0.0);
        assert_eq!(Transform::Identity.apply(-1.3), -1.3);
    }

    #[test]
    fn batches_preserve_order() {
        let out = run_batched(100, |r| Ok(r.collect())).unwrap();
        assert_eq!(out, (0..100).collect::<Vec<_>>());
        let err = run_batched(100, |r| if r.contains(&70) { Err(Error::Numerical("x".into())) } else { Ok(r.collect::<Vec<_>>()) });
        assert!(err.is_err());
    }

    #[test]
    fn summary_statistics() {
        let ecs = vec![vec![1, 2], vec![3, 2], vec![5, 2]];
        let cal = EcCalibration::from_replicates(&[0.0, 1.0], &ecs, 9);
        assert_eq!(cal.estimates[0].mean, 3.0);
        assert!((cal.estimates[0].se - (4.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(cal.estimates[1].se, 0.0);
        assert_eq!(cal.correlation, vec![1.0, 0.0, 0.0, 1.0]);
    }
}
