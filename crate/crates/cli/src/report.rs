use std::f64::consts::LN_10;
use std::fmt::Write as _;

use tohm_core::scalar::format_shortest;
use tohm_core::{CliqueCounts, LkcSolution, PValueReport};

/// Four significant digits in scientific notation. Uses ln p when p itself
/// is subnormal or zero.
pub fn format_pvalue(p: f64, ln_p: Option<f64>) -> String {
    if p.is_normal() {
        return format!("{p:.3e}");
    }
    let Some(lp) = ln_p else { return "0".into() };
    let l10 = lp / LN_10;
    let mut exp = l10.floor();
    let mut mant = format!("{:.3}", 10f64.powf(l10 - exp));
    if mant.starts_with("10") {
        exp += 1.0;
        mant = "1.000".into();
    }
    format!("{mant}e{exp}")
}

pub fn format_sigma(z: f64) -> String {
    if z.is_infinite() {
        return if z > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{z:.3}σ")
}

pub fn ec_report(c: f64, counts: &CliqueCounts) -> String {
    let mut s = String::new();
    writeln!(s, "threshold = {}", format_shortest(c)).unwrap();
    for (d, n) in counts.counts.iter().enumerate() {
        writeln!(s, "|C^{d}| = {n}").unwrap();
    }
    writeln!(s, "EC = {}", counts.euler()).unwrap();
    if counts.counts[0] == 0 {
        writeln!(s, "note: the excursion set is empty (threshold above the field maximum)").unwrap();
    }
    s
}

pub fn lkc_summary(sol: &LkcSolution) -> String {
    let mut s = String::new();
    writeln!(s, "family = {}", sol.family).unwrap();
    writeln!(s, "L0 = {} (fixed)", format_shortest(sol.l0)).unwrap();
    for (i, (l, se)) in sol.lkcs.iter().zip(sol.std_errors()).enumerate() {
        writeln!(s, "L{} = {} ± {}", i + 1, format_shortest(*l), format_shortest(se)).unwrap();
    }
    writeln!(s, "condition number = {:.4e}", sol.condition).unwrap();
    s
}

pub fn pvalue_report(r: &PValueReport) -> String {
    let mut s = String::new();
    writeln!(s, "c = {}", format_shortest(r.c)).unwrap();
    writeln!(s, "family = {}", r.family).unwrap();
    writeln!(s, "p-value = {}", format_pvalue(r.pvalue, r.ln_pvalue)).unwrap();
    if r.raw_pvalue != r.pvalue {
        writeln!(s, "raw EC approximation = {} (clamped to [0, 1])", format_shortest(r.raw_pvalue)).unwrap();
    }
    writeln!(s, "standard error = {}", format_pvalue(r.se, None)).unwrap();
    // bounds equal to p are printed like p, which may only exist as ln p
    let bound = |b: f64| if b == r.pvalue { format_pvalue(b, r.ln_pvalue) } else { format_pvalue(b, None) };
    writeln!(s, "p-value interval = [{}, {}]", bound(r.mc_interval.0), bound(r.mc_interval.1)).unwrap();
    match r.sigma {
        Some(z) => writeln!(s, "significance = {}", format_sigma(z)).unwrap(),
        None => writeln!(s, "significance = n/a (p-value not in (0, 1))").unwrap(),
    }
    if let Some((lo, hi)) = r.sigma_interval {
        writeln!(s, "significance interval = [{}, {}]", format_sigma(lo), format_sigma(hi)).unwrap();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pvalue_formats() {
        assert_eq!(format_pvalue(1.092e-26, None), "1.092e-26");
        assert_eq!(format_pvalue(1.3498980316300945e-3, None), "1.350e-3");
        assert_eq!(format_pvalue(0.0, Some(-1000.0 * LN_10 + 2.5f64.ln())), "2.500e-1000");
        assert_eq!(format_pvalue(0.0, Some(-1000.0 * LN_10 + 9.99999f64.ln())), "1.000e-999");
        assert_eq!(format_sigma(10.629017977573756), "10.629σ");
    }
}
