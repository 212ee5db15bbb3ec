use crate::error::{Error, Result};
use crate::rft::density::{ln_ec_density, DensityFamily};
use crate::rft::lkc::LkcSolution;
use crate::rft::special::{normal_isf, normal_isf_ln, SignedLn};
use crate::scalar::Scalar;

/// Global p-value approximation E[φ(A_c)] with its Monte Carlo uncertainty.
///
/// The EC heuristic is an approximation, not a bound: for smooth fields it
/// is accurate in the tail, for rough fields it tends to overshoot.
#[derive(Debug, Clone, PartialEq)]
pub struct PValueReport<T = f64> {
    pub c: T,
    pub family: DensityFamily,
    /// E[φ(A_c)] as computed; may fall outside [0, 1].
    pub raw_pvalue: T,
    /// `raw_pvalue` clamped to [0, 1].
    pub pvalue: T,
    /// ln of the raw value when it is positive. Stays finite where the value
    /// itself underflows.
    pub ln_pvalue: Option<T>,
    /// Standard error of the p-value propagated from the LKC covariance.
    pub se: T,
    /// (p − se, p + se) clamped to [0, 1].
    pub mc_interval: (T, T),
    /// Φ⁻¹(1 − p), when 0 < p < 1.
    pub sigma: Option<T>,
    /// σ at p + se and at p − se; the upper end is infinite when p − se ≤ 0.
    pub sigma_interval: Option<(T, T)>,
    pub lkc: LkcSolution<T>,
}

/// Φ⁻¹(1 − p) for 0 < p < 1, computed from the upper tail directly.
pub fn sigma_significance<T: Scalar>(p: T) -> Result<T> {
    if !(p > T::zero() && p < T::one()) {
        return Err(Error::Domain(format!("p-value must lie in (0, 1) for a σ conversion, got {p}")));
    }
    if p < T::cst(0.075) {
        Ok(normal_isf_ln(p.ln()))
    } else {
        Ok(normal_isf(p))
    }
}

/// σ from ln p, for p too small to represent.
pub fn sigma_from_ln_pvalue<T: Scalar>(ln_p: T) -> Result<T> {
    if ln_p.is_nan() || ln_p >= T::zero() || ln_p == T::neg_infinity() {
        return Err(Error::Domain(format!("ln p-value must be finite and negative, got {ln_p}")));
    }
    Ok(normal_isf_ln(ln_p))
}

fn clamp01<T: Scalar>(x: T) -> T {
    x.max(T::zero()).min(T::one())
}

/// Evaluates the EC approximation at the observed statistic `c` with the
/// estimated LKCs.
pub fn global_pvalue<T: Scalar>(c: T, lkc: &LkcSolution<T>) -> Result<PValueReport<T>> {
    let family = lkc.family;
    let n = lkc.dims();
    if lkc.covariance.len() != n * n {
        return Err(Error::Invalid(format!("LKC covariance has {} entries, expected {}", lkc.covariance.len(), n * n)));
    }

    let ln = lkc.ln_expected_ec(c)?;
    let raw = ln.value();

    // var = gᵀ Σ g with g_i = ρ_{i+1}(c), summed in log space
    let grads: Vec<SignedLn<T>> = (1..=n).map(|d| ln_ec_density(family, d, c)).collect::<Result<_>>()?;
    let mut terms = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let cov = SignedLn::from_value(lkc.covariance_at(i, j));
            terms.push(SignedLn {
                sign: grads[i].sign * grads[j].sign * cov.sign,
                ln_abs: grads[i].ln_abs + grads[j].ln_abs + cov.ln_abs,
            });
        }
    }
    let var = SignedLn::sum(&terms);
    let ln_se = if var.sign > 0 { var.ln_abs / T::cst(2.0) } else { T::neg_infinity() };
    let se = ln_se.exp();

    let pvalue = clamp01(raw);
    let mc_interval = (clamp01(raw - se).min(pvalue), clamp01(raw + se).max(pvalue));

    let ln_pvalue = (ln.sign > 0).then_some(ln.ln_abs);
    let (sigma, sigma_interval) = match ln_pvalue {
        Some(lp) if lp < T::zero() => {
            let sigma = normal_isf_ln(lp);
            // ln(p ± se) = ln p + ln(1 ± se/p)
            let ratio = (ln_se - lp).exp();
            let lo = if (lp + ratio.ln_1p()) < T::zero() { normal_isf_ln(lp + ratio.ln_1p()) } else { T::neg_infinity() };
            let hi = if ratio < T::one() { normal_isf_ln(lp + (-ratio).ln_1p()) } else { T::infinity() };
            (Some(sigma), Some((lo, hi)))
        }
        _ => (None, None),
    };

    Ok(PValueReport {
        c,
        family,
        raw_pvalue: raw,
        pvalue,
        ln_pvalue,
        se,
        mc_interval,
        sigma,
        sigma_interval,
        lkc: lkc.clone(),
    })
}
