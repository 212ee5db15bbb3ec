use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::rft::special::{chi2_sf, gamma_half, ln_chi2_sf, ln_gamma_half, ln_normal_sf, ln_two_pi, normal_sf, SignedLn};
use crate::scalar::Scalar;

/// Marginal distribution of the test-statistic field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DensityFamily {
    Gaussian,
    /// χ² with `s ≥ 1` degrees of freedom.
    ChiSquare(u32),
    /// ½δ₀ + ½χ²₁, the LRT of a one-sided parameter on the boundary.
    ChiBar01,
}

impl DensityFamily {
    /// Largest d for which ρ_d is implemented.
    pub fn max_dim(self) -> usize {
        match self {
            DensityFamily::Gaussian => 5,
            DensityFamily::ChiSquare(_) | DensityFamily::ChiBar01 => 3,
        }
    }

    fn validate(self) -> Result<()> {
        match self {
            DensityFamily::ChiSquare(0) => Err(Error::Invalid("chi-square needs s ≥ 1 degrees of freedom".into())),
            _ => Ok(()),
        }
    }

    fn check_dim(self, d: usize) -> Result<()> {
        self.validate()?;
        if d > self.max_dim() {
            return Err(Error::Unsupported { family: self.to_string(), d, max: self.max_dim() });
        }
        Ok(())
    }
}

impl fmt::Display for DensityFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DensityFamily::Gaussian => f.write_str("gaussian"),
            DensityFamily::ChiSquare(s) => write!(f, "chisq:{s}"),
            DensityFamily::ChiBar01 => f.write_str("chibar01"),
        }
    }
}

impl FromStr for DensityFamily {
    type Err = Error;

    /// Accepts `gaussian`, `chisq:S` (also `chi2:S`) and `chibar01`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "gaussian" | "normal" => return Ok(DensityFamily::Gaussian),
            "chibar01" | "chibar" => return Ok(DensityFamily::ChiBar01),
            _ => {}
        }
        let dof = lower.strip_prefix("chisq:").or_else(|| lower.strip_prefix("chi2:"));
        match dof.map(str::parse::<u32>) {
            Some(Ok(s)) if s >= 1 => Ok(DensityFamily::ChiSquare(s)),
            Some(_) => Err(Error::Invalid(format!("bad chi-square degrees of freedom in {s:?}"))),
            None => Err(Error::Invalid(format!(
                "unknown density family {s:?}; expected gaussian, chisq:S or chibar01"
            ))),
        }
    }
}

/// Probabilists' Hermite polynomial He_n(x).
fn hermite<T: Scalar>(n: usize, x: T) -> T {
    let (mut prev, mut cur) = (T::zero(), T::one());
    for k in 0..n {
        let next = x * cur - T::from_usize_lossy(k) * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Polynomial factor of the χ²_s density ρ_d, d = 1..=3.
fn chi2_poly<T: Scalar>(s: u32, d: usize, c: T) -> T {
    let sf = T::cst(f64::from(s));
    let ind = |min: u32| if s >= min { T::one() } else { T::zero() };
    match d {
        1 => T::one(),
        2 => c - (sf - T::one()) * ind(2),
        3 => {
            (sf - T::one()) * (sf - T::cst(2.0)) * ind(3) - T::cst(2.0) * (sf - T::one()) * c * ind(2)
                + (c * c - c) * ind(1)
        }
        _ => unreachable!("dimension checked by caller"),
    }
}

/// ln of c^{(s−d)/2} e^{−c/2} / ((2π)^{d/2} Γ(s/2) 2^{(s−2)/2}).
fn chi2_ln_prefactor<T: Scalar>(s: u32, d: usize, c: T) -> T {
    let sf = T::cst(f64::from(s));
    let df = T::from_usize_lossy(d);
    (sf - df) / T::cst(2.0) * c.ln() - c / T::cst(2.0) - df / T::cst(2.0) * ln_two_pi::<T>()
        - ln_gamma_half::<T>(s)
        - (sf - T::cst(2.0)) / T::cst(2.0) * T::cst(2f64.ln())
}

fn chi2_density<T: Scalar>(s: u32, d: usize, c: T) -> Result<T> {
    if d == 0 {
        return Ok(chi2_sf(s, c));
    }
    if c <= T::zero() {
        return Err(Error::Domain(format!("chi-square EC density ρ_{d} needs c > 0, got {c}")));
    }
    let sf = T::cst(f64::from(s));
    let df = T::from_usize_lossy(d);
    let pref = c.powf((sf - df) / T::cst(2.0)) * (-c / T::cst(2.0)).exp()
        / (T::cst(std::f64::consts::TAU).powf(df / T::cst(2.0))
            * gamma_half::<T>(s)
            * T::cst(2.0).powf((sf - T::cst(2.0)) / T::cst(2.0)));
    Ok(chi2_poly(s, d, c) * pref)
}

fn chi2_ln_density<T: Scalar>(s: u32, d: usize, c: T) -> Result<SignedLn<T>> {
    if d == 0 {
        return Ok(SignedLn::positive(ln_chi2_sf(s, c)));
    }
    if c <= T::zero() {
        return Err(Error::Domain(format!("chi-square EC density ρ_{d} needs c > 0, got {c}")));
    }
    let mut out = SignedLn::from_value(chi2_poly(s, d, c));
    out.ln_abs = out.ln_abs + chi2_ln_prefactor(s, d, c);
    Ok(out)
}

/// EC density ρ_d(c).
///
/// For χ² and χ̄² families ρ_d with d ≥ 1 is only defined for c > 0. The
/// χ̄²₀₁ tail ρ₀ is 1 for c < 0 and ½ at c = 0.
pub fn ec_density<T: Scalar>(family: DensityFamily, d: usize, c: T) -> Result<T> {
    family.check_dim(d)?;
    if !c.is_finite() {
        return Err(Error::Domain(format!("threshold must be finite, got {c}")));
    }
    match family {
        DensityFamily::Gaussian => Ok(if d == 0 {
            normal_sf(c)
        } else {
            hermite(d - 1, c) * (-c * c / T::cst(2.0)).exp()
                / T::cst(std::f64::consts::TAU).powf(T::from_usize_lossy(d + 1) / T::cst(2.0))
        }),
        DensityFamily::ChiSquare(s) => chi2_density(s, d, c),
        DensityFamily::ChiBar01 => {
            if d == 0 && c < T::zero() {
                Ok(T::one())
            } else if d == 0 && c == T::zero() {
                Ok(T::cst(0.5))
            } else {
                Ok(T::cst(0.5) * chi2_density(1, d, c)?)
            }
        }
    }
}

/// ρ_d(c) as sign and log-magnitude, usable where ρ_d underflows.
pub fn ln_ec_density<T: Scalar>(family: DensityFamily, d: usize, c: T) -> Result<SignedLn<T>> {
    family.check_dim(d)?;
    if !c.is_finite() {
        return Err(Error::Domain(format!("threshold must be finite, got {c}")));
    }
    match family {
        DensityFamily::Gaussian => {
            if d == 0 {
                return Ok(SignedLn::positive(ln_normal_sf(c)));
            }
            let mut out = SignedLn::from_value(hermite(d - 1, c));
            out.ln_abs = out.ln_abs - c * c / T::cst(2.0) - T::from_usize_lossy(d + 1) / T::cst(2.0) * ln_two_pi::<T>();
            Ok(out)
        }
        DensityFamily::ChiSquare(s) => chi2_ln_density(s, d, c),
        DensityFamily::ChiBar01 => {
            if d == 0 && c <= T::zero() {
                return Ok(SignedLn::from_value(ec_density(family, 0, c)?));
            }
            let mut out = chi2_ln_density(1, d, c)?;
            out.ln_abs = out.ln_abs + T::cst(0.5f64.ln());
            Ok(out)
        }
    }
}

/// E[φ(A_c)] = L₀ρ₀(c) + Σ_{d≥1} L_d ρ_d(c), with `lkcs[i]` = L_{i+1}.
pub fn expected_ec<T: Scalar>(family: DensityFamily, l0: T, lkcs: &[T], c: T) -> Result<T> {
    family.check_dim(lkcs.len())?;
    let mut total = l0 * ec_density(family, 0, c)?;
    for (i, &l) in lkcs.iter().enumerate() {
        total = total + l * ec_density(family, i + 1, c)?;
    }
    Ok(total)
}

/// [`expected_ec`] in log space; meaningful for thresholds where every term
/// underflows.
pub fn ln_expected_ec<T: Scalar>(family: DensityFamily, l0: T, lkcs: &[T], c: T) -> Result<SignedLn<T>> {
    family.check_dim(lkcs.len())?;
    let mut terms = Vec::with_capacity(lkcs.len() + 1);
    terms.push(ln_ec_density(family, 0, c)?.scale(l0));
    for (i, &l) in lkcs.iter().enumerate() {
        terms.push(ln_ec_density(family, i + 1, c)?.scale(l));
    }
    Ok(SignedLn::sum(&terms))
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn gaussian_reference_values() {
        let g = DensityFamily::Gaussian;
        assert!(close(ec_density(g, 1, 0.0f64).unwrap(), 1.0 / std::f64::consts::TAU, 1e-15));
        assert!(close(ec_density(g, 0, 1.645f64).unwrap(), 0.049984905539121363, 1e-13));
        // mpmath
        assert!(close(ec_density(g, 2, 3.0f64).unwrap(), 0.0021160517453817007, 1e-13));
        assert!(close(ec_density(g, 3, 3.0f64).unwrap(), 0.0022511533566666866, 1e-13));
        assert!(close(ec_density(g, 5, 2.5f64).unwrap(), 0.00080815193373476800, 1e-12));
    }

    #[test]
    fn chi_square_one_reduces_to_two_gaussian_tails() {
        // A χ²₁ field is Z², whose excursion above c is two Gaussian excursions
        // above √c; the densities relate by ρ_d^{χ²₁}(c) = 2 ρ_d^G(√c).
        for &c in &[0.3f64, 1.0, 4.0, 9.0, 16.0] {
            for d in 0..=3 {
                let chi = ec_density(DensityFamily::ChiSquare(1), d, c).unwrap();
                let gauss = 2.0 * ec_density(DensityFamily::Gaussian, d, c.sqrt()).unwrap();
                assert!(close(chi, gauss, 1e-12), "d {d} c {c}: {chi} vs {gauss}");
            }
        }
    }

    #[test]
    fn chibar_values() {
        let cb = DensityFamily::ChiBar01;
        assert!(close(ec_density(cb, 0, 4.0f64).unwrap(), 0.0227501319481792072, 1e-13));
        assert_eq!(ec_density(cb, 0, -1.0f64).unwrap(), 1.0);
        assert_eq!(ec_density(cb, 0, 0.0f64).unwrap(), 0.5);
        for &c in &[1.0f64, 10.0] {
            let v = ec_density(cb, 2, c).unwrap();
            let g = ec_density(DensityFamily::Gaussian, 2, c.sqrt()).unwrap();
            assert!(close(v, g, 1e-12));
        }
        assert!(ec_density(cb, 1, 0.0f64).is_err());
    }

    #[test]
    fn chi_square_higher_dof_reference() {
        // mpmath, closed forms
        let f = DensityFamily::ChiSquare(3);
        assert!(close(ec_density(f, 1, 5.0f64).unwrap(), 0.13064233284684920, 1e-12));
        assert!(close(ec_density(f, 2, 5.0f64).unwrap(), 0.069924640986756288, 1e-12));
        assert!(close(ec_density(f, 3, 5.0f64).unwrap(), 0.0083169492198530931, 1e-12));
    }

    #[test]
    fn unsupported_dimensions() {
        assert!(matches!(
            ec_density(DensityFamily::ChiSquare(2), 4, 1.0f64),
            Err(Error::Unsupported { d: 4, max: 3, .. })
        ));
        assert!(ec_density(DensityFamily::Gaussian, 6, 1.0f64).is_err());
        assert!(ec_density(DensityFamily::ChiSquare(0), 0, 1.0f64).is_err());
        assert!(ec_density(DensityFamily::Gaussian, 0, f64::NAN).is_err());
    }

    #[test]
    fn log_form_agrees() {
        for fam in [DensityFamily::Gaussian, DensityFamily::ChiSquare(1), DensityFamily::ChiSquare(4), DensityFamily::ChiBar01] {
            for d in 0..=3 {
                for &c in &[0.5f64, 2.0, 7.0, 30.0] {
                    let v = ec_density(fam, d, c).unwrap();
                    let l = ln_ec_density(fam, d, c).unwrap();
                    assert!(close(l.value(), v, 1e-11), "{fam} d {d} c {c}");
                }
            }
        }
        // deep tail: finite even though ρ underflows
        let l = ln_ec_density(DensityFamily::Gaussian, 2, 60.0f64).unwrap();
        assert_eq!(l.sign, 1);
        assert!(l.ln_abs.is_finite() && l.ln_abs < -1700.0);
    }

    #[test]
    fn parse_and_display() {
        for fam in [DensityFamily::Gaussian, DensityFamily::ChiSquare(7), DensityFamily::ChiBar01] {
            assert_eq!(fam.to_string().parse::<DensityFamily>().unwrap(), fam);
        }
        assert_eq!("chi2:2".parse::<DensityFamily>().unwrap(), DensityFamily::ChiSquare(2));
        assert!("chisq:0".parse::<DensityFamily>().is_err());
        assert!("poisson".parse::<DensityFamily>().is_err());
    }

    #[test]
    fn expected_ec_combination() {
        let lk = [2.0f64, 3.0];
        let c = 1.5;
        let direct = 1.0 * ec_density(DensityFamily::Gaussian, 0, c).unwrap()
            + 2.0 * ec_density(DensityFamily::Gaussian, 1, c).unwrap()
            + 3.0 * ec_density(DensityFamily::Gaussian, 2, c).unwrap();
        assert!(close(expected_ec(DensityFamily::Gaussian, 1.0, &lk, c).unwrap(), direct, 1e-15));
        assert!(close(ln_expected_ec(DensityFamily::Gaussian, 1.0, &lk, c).unwrap().value(), direct, 1e-13));
        assert!(expected_ec(DensityFamily::ChiBar01, 1.0, &[1.0; 4], c).is_err());
    }
}
