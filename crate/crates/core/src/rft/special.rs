//! Normal and chi-square tail functions, valid deep into the tails.
//!
//! Upper tails are always evaluated directly (erfc, closed-form chi-square
//! series, Mills-ratio continued fractions), never as `1 - cdf`.

use crate::scalar::Scalar;

/// A real number stored as sign and log-magnitude, so that sums of terms
/// far below `f64::MIN_POSITIVE` can still be formed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLn<T> {
    /// −1, 0 or +1.
    pub sign: i8,
    /// ln |x|; `-inf` when `sign == 0`.
    pub ln_abs: T,
}

impl<T: Scalar> SignedLn<T> {
    pub fn zero() -> Self {
        Self { sign: 0, ln_abs: T::neg_infinity() }
    }

    pub fn positive(ln_abs: T) -> Self {
        Self { sign: 1, ln_abs }
    }

    pub fn from_value(x: T) -> Self {
        if x == T::zero() {
            Self::zero()
        } else {
            Self { sign: if x > T::zero() { 1 } else { -1 }, ln_abs: x.abs().ln() }
        }
    }

    pub fn value(self) -> T {
        match self.sign {
            0 => T::zero(),
            s => T::cst(f64::from(s)) * self.ln_abs.exp(),
        }
    }

    pub fn scale(self, factor: T) -> Self {
        let f = Self::from_value(factor);
        Self { sign: self.sign * f.sign, ln_abs: self.ln_abs + f.ln_abs }
    }

    /// Sum computed relative to the largest magnitude.
    pub fn sum(terms: &[Self]) -> Self {
        let peak = terms
            .iter()
            .filter(|t| t.sign != 0)
            .map(|t| t.ln_abs)
            .fold(T::neg_infinity(), T::max);
        if peak == T::neg_infinity() {
            return Self::zero();
        }
        let acc = terms
            .iter()
            .filter(|t| t.sign != 0)
            .fold(T::zero(), |acc, t| acc + T::cst(f64::from(t.sign)) * (t.ln_abs - peak).exp());
        let mut out = Self::from_value(acc);
        out.ln_abs = out.ln_abs + peak;
        out
    }
}

fn ln_sum_exp<T: Scalar>(terms: &[T]) -> T {
    let peak = terms.iter().copied().fold(T::neg_infinity(), T::max);
    if peak == T::neg_infinity() {
        return peak;
    }
    peak + terms.iter().fold(T::zero(), |acc, &t| acc + (t - peak).exp()).ln()
}

pub fn ln_two_pi<T: Scalar>() -> T {
    T::cst(std::f64::consts::TAU.ln())
}

pub fn normal_pdf<T: Scalar>(x: T) -> T {
    (-x * x / T::cst(2.0)).exp() / T::cst(std::f64::consts::TAU.sqrt())
}

/// P(Z > x).
pub fn normal_sf<T: Scalar>(x: T) -> T {
    T::cst(0.5) * (x / T::cst(std::f64::consts::SQRT_2)).erfc()
}

/// P(Z ≤ x).
pub fn normal_cdf<T: Scalar>(x: T) -> T {
    normal_sf(-x)
}

/// Q(x)/φ(x) for large positive x by Lentz's continued fraction
/// x + 1/(x + 2/(x + 3/(x + …))).
fn mills_ratio<T: Scalar>(x: T) -> T {
    let tiny = T::min_positive_value().sqrt();
    let eps = T::epsilon();
    let mut f = x;
    let mut c = x;
    let mut d = T::zero();
    for k in 1..500 {
        let a = T::from_usize_lossy(k);
        d = x + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = x + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = d.recip();
        let delta = c * d;
        f = f * delta;
        if (delta - T::one()).abs() < eps {
            break;
        }
    }
    f.recip()
}

/// ln P(Z > x), finite for every finite x.
pub fn ln_normal_sf<T: Scalar>(x: T) -> T {
    if x < T::cst(5.0) {
        normal_sf(x).ln()
    } else {
        -x * x / T::cst(2.0) - ln_two_pi::<T>() / T::cst(2.0) + mills_ratio(x).ln()
    }
}

fn poly<T: Scalar>(coeffs: &[f64], x: T) -> T {
    coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * x + T::cst(c))
}

/// Wichura's AS 241 (PPND16) lower-tail quantile: returns z with Φ(z) = p.
/// `ln_tail` is ln(min(p, 1 − p)) and is used in the tail branches so that
/// tail probabilities below the floating-point range remain usable.
#[allow(clippy::excessive_precision)]
fn ppnd16<T: Scalar>(q: T, ln_tail: T) -> T {
    const A: [f64; 8] = [
        3.387_132_872_796_366_608,
        133.141_667_891_784_377_45,
        1_971.590_950_306_551_442_7,
        13_731.693_765_509_461_125,
        45_921.953_931_549_871_457,
        67_265.770_927_008_700_853,
        33_430.575_583_588_128_105,
        2_509.080_928_730_122_672_7,
    ];
    const B: [f64; 8] = [
        1.0,
        42.313_330_701_600_911_252,
        687.187_007_492_057_908_3,
        5_394.196_021_424_751_107_7,
        21_213.794_301_586_595_867,
        39_307.895_800_092_710_61,
        28_729.085_735_721_942_674,
        5_226.495_278_852_854_561,
    ];
    const C: [f64; 8] = [
        1.423_437_110_749_683_577_34,
        4.630_337_846_156_545_295_9,
        5.769_497_221_460_691_405_5,
        3.647_848_324_763_204_605_04,
        1.270_458_252_452_368_382_58,
        0.241_780_725_177_450_611_77,
        0.022_723_844_989_269_184_583_3,
        7.745_450_142_783_414_076_4e-4,
    ];
    const D: [f64; 8] = [
        1.0,
        2.053_191_626_637_758_821_87,
        1.676_384_830_183_803_849_4,
        0.689_767_334_985_100_004_55,
        0.148_103_976_427_480_074_59,
        0.015_198_666_563_616_457_196_6,
        5.475_938_084_995_344_946e-4,
        1.050_750_071_644_416_843_24e-9,
    ];
    const E: [f64; 8] = [
        6.657_904_643_501_103_777_2,
        5.463_784_911_164_114_369_9,
        1.784_826_539_917_291_335_8,
        0.296_560_571_828_504_891_23,
        0.026_532_189_526_576_123_093,
        0.001_242_660_947_388_078_438_6,
        2.711_555_568_743_487_578_15e-5,
        2.010_334_399_292_288_132_65e-7,
    ];
    const F: [f64; 8] = [
        1.0,
        0.599_832_206_555_887_937_69,
        0.136_929_880_922_735_805_31,
        0.014_875_361_290_850_614_852_5,
        7.868_691_311_456_132_591e-4,
        1.846_318_317_510_054_681_8e-5,
        1.421_511_758_316_445_888_7e-7,
        2.044_263_103_389_939_785_64e-15,
    ];

    if q.abs() <= T::cst(0.425) {
        let r = T::cst(0.180625) - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let mut r = (-ln_tail).sqrt();
    let z = if r <= T::cst(5.0) {
        r = r - T::cst(1.6);
        poly(&C, r) / poly(&D, r)
    } else {
        r = r - T::cst(5.0);
        poly(&E, r) / poly(&F, r)
    };
    if q < T::zero() {
        -z
    } else {
        z
    }
}

/// Standard normal quantile Φ⁻¹(p), p ∈ (0, 1).
pub fn normal_quantile<T: Scalar>(p: T) -> T {
    let q = p - T::cst(0.5);
    let tail = if q < T::zero() { p } else { T::one() - p };
    ppnd16(q, tail.ln())
}

/// z with P(Z > z) = p, computed without forming 1 − p.
pub fn normal_isf<T: Scalar>(p: T) -> T {
    -normal_quantile(p)
}

/// z with ln P(Z > z) = `ln_p`, for ln_p ≤ 0. Handles upper-tail
/// probabilities far below the smallest representable float.
pub fn normal_isf_ln<T: Scalar>(ln_p: T) -> T {
    // below ln(0.075) the AS 241 tail branch applies
    if ln_p > T::cst(-2.59) {
        return normal_isf(ln_p.exp());
    }
    let mut z = -ppnd16(T::cst(-0.5), ln_p);
    // Newton on ln Q(z) − ln p; d/dz ln Q(z) = −φ(z)/Q(z)
    for _ in 0..3 {
        let ln_q = ln_normal_sf(z);
        let ln_pdf = -z * z / T::cst(2.0) - ln_two_pi::<T>() / T::cst(2.0);
        let slope = -(ln_pdf - ln_q).exp();
        let step = (ln_q - ln_p) / slope;
        z = z - step;
        if step.abs() <= T::epsilon() * z.abs() {
            break;
        }
    }
    z
}

/// Γ(s/2) for integer s ≥ 1.
pub fn gamma_half<T: Scalar>(s: u32) -> T {
    ln_gamma_half::<T>(s).exp()
}

/// ln Γ(s/2) for integer s ≥ 1, by the exact recurrence from Γ(1) or Γ(1/2).
pub fn ln_gamma_half<T: Scalar>(s: u32) -> T {
    assert!(s >= 1, "Γ(s/2) needs s ≥ 1");
    if s.is_multiple_of(2) {
        (1..s / 2).fold(T::zero(), |acc, j| acc + T::cst(f64::from(j)).ln())
    } else {
        (0..(s - 1) / 2).fold(T::cst(std::f64::consts::PI.sqrt().ln()), |acc, j| {
            acc + T::cst(f64::from(j) + 0.5).ln()
        })
    }
}

/// P(χ²_s > c) for integer s ≥ 1 via the finite Poisson/normal series.
pub fn chi2_sf<T: Scalar>(s: u32, c: T) -> T {
    assert!(s >= 1, "chi-square needs s ≥ 1");
    if c <= T::zero() {
        return T::one();
    }
    let half = c / T::cst(2.0);
    let damp = (-half).exp();
    if s.is_multiple_of(2) {
        let mut term = T::one();
        let mut sum = T::one();
        for k in 1..s / 2 {
            term = term * half / T::cst(f64::from(k));
            sum = sum + term;
        }
        damp * sum
    } else {
        let mut sum = T::zero();
        // (c/2)^{k−1/2} / Γ(k+1/2), k = 1..(s−1)/2
        let mut term = half.sqrt() / gamma_half::<T>(3);
        for k in 1..=(s - 1) / 2 {
            sum = sum + term;
            term = term * half / T::cst(f64::from(k) + 0.5);
        }
        T::cst(2.0) * normal_sf(c.sqrt()) + damp * sum
    }
}

/// ln P(χ²_s > c).
pub fn ln_chi2_sf<T: Scalar>(s: u32, c: T) -> T {
    assert!(s >= 1, "chi-square needs s ≥ 1");
    if c <= T::zero() {
        return T::zero();
    }
    let half = c / T::cst(2.0);
    let ln_half = half.ln();
    let mut terms = Vec::with_capacity(s as usize);
    if s.is_multiple_of(2) {
        for k in 0..s / 2 {
            terms.push(T::cst(f64::from(k)) * ln_half - ln_gamma_half::<T>(2 * k + 2) - half);
        }
    } else {
        terms.push(T::cst(2f64.ln()) + ln_normal_sf(c.sqrt()));
        for k in 1..=(s - 1) / 2 {
            terms.push(T::cst(f64::from(k) - 0.5) * ln_half - ln_gamma_half::<T>(2 * k + 1) - half);
        }
    }
    ln_sum_exp(&terms)
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn normal_tail_reference_values() {
        // mpmath, 30 digits
        assert!(rel(normal_sf(1.645f64), 0.049984905539121363) < 1e-13);
        assert!(rel(normal_sf(3.0f64), 0.00134989803163009452665) < 1e-13);
        assert!(rel(normal_sf(10.0f64), 7.61985302416052606597e-24) < 1e-12);
        assert!(rel(normal_sf(30.0f64), 4.906713927148187e-198) < 1e-11);
    }

    #[test]
    fn log_tail_is_continuous_and_matches_direct() {
        for &x in &[4.9f64, 5.0, 5.1, 8.0, 20.0, 35.0] {
            assert!((ln_normal_sf(x) - normal_sf(x).ln()).abs() < 1e-11, "x = {x}");
        }
        // beyond the float range: ln Q(50) from mpmath
        assert!(rel(ln_normal_sf(50.0f64), -1254.8313611394199) < 1e-13);
    }

    #[test]
    fn quantile_round_trip() {
        for i in 0..=1100 {
            let z = i as f64 / 100.0;
            let back = normal_isf(normal_sf(z));
            assert!((back - z).abs() < 1e-9, "z = {z}: {back}");
            assert!((normal_isf_ln(ln_normal_sf(z)) - z).abs() < 1e-9);
        }
        for &z in &[20.0f64, 37.0, 60.0, 200.0] {
            assert!((normal_isf_ln(ln_normal_sf(z)) - z).abs() < 1e-9 * z);
        }
        assert_eq!(normal_quantile(0.5f64), 0.0);
        assert!((normal_quantile(0.975f64) - 1.959963984540054).abs() < 1e-14);
    }

    #[test]
    fn agrees_with_statrs_normal() {
        let n = Normal::new(0.0, 1.0).unwrap();
        for i in -60..=60 {
            let x = i as f64 / 10.0;
            // statrs is only good to ~1e-10 relative in the lower tail
            assert!(rel(normal_cdf(x), n.cdf(x)) < 1e-9, "x = {x}");
        }
    }

    #[test]
    fn chi_square_tail_matches_statrs() {
        for s in 1..=8u32 {
            let dist = ChiSquared::new(f64::from(s)).unwrap();
            for &c in &[0.01f64, 0.5, 1.0, 3.0, 8.0, 20.0, 40.0] {
                let ours = chi2_sf(s, c);
                let theirs = dist.sf(c);
                assert!(rel(ours, theirs) < 1e-9, "s {s} c {c}: {ours} vs {theirs}");
                assert!((ln_chi2_sf(s, c) - ours.ln()).abs() < 1e-10);
            }
        }
        assert_eq!(chi2_sf(3, -1.0f64), 1.0);
    }

    #[test]
    fn chi_square_one_is_two_normal_tails() {
        assert!(rel(chi2_sf(1, 4.0f64), 2.0 * 0.0227501319481792072) < 1e-13);
    }

    #[test]
    fn gamma_half_values() {
        assert!((gamma_half::<f64>(1) - std::f64::consts::PI.sqrt()).abs() < 1e-15);
        assert_eq!(gamma_half::<f64>(2), 1.0);
        assert!((gamma_half::<f64>(7) - 3.323350970447843).abs() < 1e-14);
        assert!((gamma_half::<f64>(10) - 24.0).abs() < 1e-12);
    }

    #[test]
    fn signed_log_sums() {
        let terms = [SignedLn::from_value(3.0f64), SignedLn::from_value(-1.0), SignedLn::zero()];
        assert!((SignedLn::sum(&terms).value() - 2.0).abs() < 1e-15);
        let tiny = [SignedLn::positive(-2000.0f64), SignedLn::positive(-2000.0)];
        assert!((SignedLn::sum(&tiny).ln_abs - (-2000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(SignedLn::sum(&[SignedLn::<f64>::zero()]).sign, 0);
    }

    #[test]
    fn single_precision_paths() {
        assert!((normal_sf(1.645f32) - 0.049_984_9).abs() < 1e-6);
        assert!((normal_isf(0.05f32) - 1.644_853_6).abs() < 1e-4);
    }
}
