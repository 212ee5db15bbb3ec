use log::warn;

use crate::error::{Error, Result};
use crate::rft::density::{ec_density, expected_ec, ln_expected_ec, DensityFamily};
use crate::rft::special::SignedLn;
use crate::scalar::Scalar;

/// Condition number above which [`solve_lkc`] logs a warning.
pub const DEFAULT_CONDITION_WARNING: f64 = 1e8;

/// Monte Carlo estimate of E[φ(A_c)] at one threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EcObservation<T = f64> {
    pub threshold: T,
    pub mean: T,
    /// Standard error of `mean`.
    pub se: T,
}

/// Estimated Lipschitz–Killing curvatures L₁..L_D and their covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct LkcSolution<T = f64> {
    pub family: DensityFamily,
    pub l0: T,
    pub thresholds: Vec<T>,
    /// `lkcs[i]` is L_{i+1}.
    pub lkcs: Vec<T>,
    /// D×D, row-major.
    pub covariance: Vec<T>,
    /// 1-norm condition number of the density matrix.
    pub condition: T,
}

impl<T: Scalar> LkcSolution<T> {
    pub fn dims(&self) -> usize {
        self.lkcs.len()
    }

    pub fn covariance_at(&self, i: usize, j: usize) -> T {
        self.covariance[i * self.dims() + j]
    }

    pub fn std_errors(&self) -> Vec<T> {
        (0..self.dims()).map(|i| self.covariance_at(i, i).max(T::zero()).sqrt()).collect()
    }

    pub fn expected_ec(&self, c: T) -> Result<T> {
        expected_ec(self.family, self.l0, &self.lkcs, c)
    }

    pub fn ln_expected_ec(&self, c: T) -> Result<SignedLn<T>> {
        ln_expected_ec(self.family, self.l0, &self.lkcs, c)
    }
}

/// Dense n×n matrix inverse by Gauss–Jordan elimination with partial pivoting.
/// `None` when a pivot vanishes.
fn invert<T: Scalar>(m: &[T], n: usize) -> Option<Vec<T>> {
    let mut a = m.to_vec();
    let mut inv = vec![T::zero(); n * n];
    for i in 0..n {
        inv[i * n + i] = T::one();
    }
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| {
            a[x * n + col].abs().partial_cmp(&a[y * n + col].abs()).unwrap_or(std::cmp::Ordering::Equal)
        })?;
        let p = a[pivot * n + col];
        if p == T::zero() || !p.is_finite() {
            return None;
        }
        if pivot != col {
            for j in 0..n {
                a.swap(pivot * n + j, col * n + j);
                inv.swap(pivot * n + j, col * n + j);
            }
        }
        for j in 0..n {
            a[col * n + j] = a[col * n + j] / p;
            inv[col * n + j] = inv[col * n + j] / p;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = a[row * n + col];
            if f == T::zero() {
                continue;
            }
            for j in 0..n {
                a[row * n + j] = a[row * n + j] - f * a[col * n + j];
                inv[row * n + j] = inv[row * n + j] - f * inv[col * n + j];
            }
        }
    }
    Some(inv)
}

fn norm_one<T: Scalar>(m: &[T], n: usize) -> T {
    (0..n)
        .map(|j| (0..n).fold(T::zero(), |acc, i| acc + m[i * n + j].abs()))
        .fold(T::zero(), T::max)
}

/// Density matrix M[k][d] = ρ_{d+1}(c_k).
pub fn density_matrix<T: Scalar>(family: DensityFamily, thresholds: &[T]) -> Result<Vec<T>> {
    let n = thresholds.len();
    let mut m = Vec::with_capacity(n * n);
    for &c in thresholds {
        for d in 1..=n {
            m.push(ec_density(family, d, c)?);
        }
    }
    Ok(m)
}

/// Solves M·L = b, b[k] = Ê[φ(A_{c_k})] − L₀ρ₀(c_k), for D = `observations.len()`
/// LKCs and propagates the per-threshold standard errors as
/// M⁻¹ diag(se²) M⁻ᵀ (estimates at different thresholds treated as
/// independent).
pub fn solve_lkc<T: Scalar>(family: DensityFamily, l0: T, observations: &[EcObservation<T>]) -> Result<LkcSolution<T>> {
    solve_lkc_with_bound(family, l0, observations, T::cst(DEFAULT_CONDITION_WARNING))
}

pub fn solve_lkc_with_bound<T: Scalar>(
    family: DensityFamily,
    l0: T,
    observations: &[EcObservation<T>],
    warn_above: T,
) -> Result<LkcSolution<T>> {
    let n = observations.len();
    if n == 0 {
        return Err(Error::Invalid("at least one threshold is needed".into()));
    }
    if n > family.max_dim() {
        return Err(Error::Unsupported { family: family.to_string(), d: n, max: family.max_dim() });
    }
    if !l0.is_finite() {
        return Err(Error::Invalid(format!("L0 must be finite, got {l0}")));
    }
    for (k, o) in observations.iter().enumerate() {
        if !o.threshold.is_finite() || !o.mean.is_finite() || !o.se.is_finite() || o.se < T::zero() {
            return Err(Error::Invalid(format!(
                "observation {k}: threshold, mean and se must be finite with se ≥ 0"
            )));
        }
        if observations[..k].iter().any(|p| p.threshold == o.threshold) {
            return Err(Error::Invalid(format!("duplicate threshold {}", o.threshold)));
        }
    }

    let thresholds: Vec<T> = observations.iter().map(|o| o.threshold).collect();
    let m = density_matrix(family, &thresholds)?;
    let inv = invert(&m, n).ok_or(Error::Singular { condition: f64::INFINITY })?;
    let condition = norm_one(&m, n) * norm_one(&inv, n);
    let cond64 = condition.to_f64().unwrap_or(f64::INFINITY);
    if !condition.is_finite() || condition * T::epsilon() > T::cst(0.5) {
        return Err(Error::Singular { condition: cond64 });
    }
    if condition > warn_above {
        warn!("LKC system is ill-conditioned: condition number {cond64:.3e} at thresholds {thresholds:?}");
    }

    let mut b = Vec::with_capacity(n);
    for o in observations {
        b.push(o.mean - l0 * ec_density(family, 0, o.threshold)?);
    }
    let lkcs: Vec<T> = (0..n)
        .map(|i| (0..n).fold(T::zero(), |acc, k| acc + inv[i * n + k] * b[k]))
        .collect();

    let mut covariance = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let v = (0..n).fold(T::zero(), |acc, k| {
                acc + inv[i * n + k] * inv[j * n + k] * observations[k].se * observations[k].se
            });
            covariance[i * n + j] = v;
            covariance[j * n + i] = v;
        }
    }

    Ok(LkcSolution { family, l0, thresholds, lkcs, covariance, condition })
}
