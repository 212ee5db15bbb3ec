//! Tab-separated LKC records (tabs shown as spaces):
//!
//! ```text
//! # tohm-lkc v1
//! family chibar01
//! l0 1
//! thresholds 1 4
//! lkcs -244.053 644.244
//! covariance 25.1 -3.2 -3.2 40.7
//! condition 12.5
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::rft::density::DensityFamily;
use crate::rft::lkc::LkcSolution;
use crate::scalar::{format_shortest, Scalar};

pub const LKC_MAGIC: &str = "# tohm-lkc v1";

fn write_row<T: Scalar, W: Write>(out: &mut W, key: &str, values: &[T]) -> Result<()> {
    write!(out, "{key}")?;
    for v in values {
        write!(out, "\t{}", format_shortest(*v))?;
    }
    writeln!(out)?;
    Ok(())
}

pub fn write_lkc<T: Scalar, W: Write>(sol: &LkcSolution<T>, mut out: W) -> Result<()> {
    writeln!(out, "{LKC_MAGIC}")?;
    writeln!(out, "family\t{}", sol.family)?;
    write_row(&mut out, "l0", &[sol.l0])?;
    write_row(&mut out, "thresholds", &sol.thresholds)?;
    write_row(&mut out, "lkcs", &sol.lkcs)?;
    write_row(&mut out, "covariance", &sol.covariance)?;
    write_row(&mut out, "condition", &[sol.condition])?;
    out.flush()?;
    Ok(())
}

pub fn save_lkc<T: Scalar>(sol: &LkcSolution<T>, path: impl AsRef<Path>) -> Result<()> {
    write_lkc(sol, BufWriter::new(File::create(path)?))
}

pub fn read_lkc<T: Scalar, R: BufRead>(input: R) -> Result<LkcSolution<T>> {
    let mut family = None;
    let mut rows: [Option<(usize, Vec<T>)>; 5] = Default::default();
    const KEYS: [&str; 5] = ["l0", "thresholds", "lkcs", "covariance", "condition"];
    let mut saw_magic = false;

    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let trimmed = line.trim();
        if i == 0 {
            if trimmed != LKC_MAGIC {
                return Err(Error::Parse { line: 1, msg: format!("expected {LKC_MAGIC:?} header") });
            }
            saw_magic = true;
            continue;
        }
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split('\t');
        let key = fields.next().unwrap_or_default();
        if key == "family" {
            let name = fields.next().ok_or(Error::Parse { line: lineno, msg: "family has no value".into() })?;
            family = Some(name.parse::<DensityFamily>().map_err(|e| Error::Parse { line: lineno, msg: e.to_string() })?);
            continue;
        }
        let slot = KEYS
            .iter()
            .position(|&k| k == key)
            .ok_or_else(|| Error::Parse { line: lineno, msg: format!("unknown key {key:?}") })?;
        if rows[slot].is_some() {
            return Err(Error::Parse { line: lineno, msg: format!("duplicate key {key:?}") });
        }
        let values = fields
            .map(|tok| {
                let v: T = tok
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse { line: lineno, msg: format!("cannot parse {key} value {tok:?}") })?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::Parse { line: lineno, msg: format!("{key} value {tok:?} is not finite") })
                }
            })
            .collect::<Result<Vec<T>>>()?;
        rows[slot] = Some((lineno, values));
    }
    if !saw_magic {
        return Err(Error::Parse { line: 1, msg: "empty LKC record".into() });
    }

    let family = family.ok_or(Error::Parse { line: 0, msg: "missing family".into() })?;
    let mut take = |k: usize| {
        rows[k].take().ok_or_else(|| Error::Parse { line: 0, msg: format!("missing {}", KEYS[k]) })
    };
    let (l0_line, l0) = take(0)?;
    let (_, thresholds) = take(1)?;
    let (lkc_line, lkcs) = take(2)?;
    let (cov_line, covariance) = take(3)?;
    let (cond_line, condition) = take(4)?;

    let single = |line: usize, v: Vec<T>, what: &str| {
        if v.len() == 1 {
            Ok(v[0])
        } else {
            Err(Error::Parse { line, msg: format!("{what} needs exactly one value") })
        }
    };
    let l0 = single(l0_line, l0, "l0")?;
    let condition = single(cond_line, condition, "condition")?;
    let n = lkcs.len();
    if n == 0 || thresholds.len() != n {
        return Err(Error::Parse {
            line: lkc_line,
            msg: format!("{} thresholds for {} LKCs", thresholds.len(), n),
        });
    }
    if n > family.max_dim() {
        return Err(Error::Unsupported { family: family.to_string(), d: n, max: family.max_dim() });
    }
    if covariance.len() != n * n {
        return Err(Error::Parse {
            line: cov_line,
            msg: format!("covariance has {} entries, expected {}", covariance.len(), n * n),
        });
    }
    for (k, c) in thresholds.iter().enumerate() {
        if thresholds[..k].contains(c) {
            return Err(Error::Invalid(format!("duplicate threshold {c} in LKC record")));
        }
    }
    Ok(LkcSolution { family, l0, thresholds, lkcs, covariance, condition })
}

pub fn load_lkc<T: Scalar>(path: impl AsRef<Path>) -> Result<LkcSolution<T>> {
    read_lkc(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> LkcSolution {
        LkcSolution {
            family: DensityFamily::ChiBar01,
            l0: 1.0,
            thresholds: vec![1.0, 4.0],
            lkcs: vec![-244.053, 644.244],
            covariance: vec![25.1, -3.2, -3.2, 1e-20],
            condition: 12.5,
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let mut buf = Vec::new();
        write_lkc(&sample(), &mut buf).unwrap();
        let back: LkcSolution = read_lkc(buf.as_slice()).unwrap();
        assert_eq!(back, sample());
    }

    #[test]
    fn rejects_inconsistent_records() {
        let text = "# tohm-lkc v1\nfamily\tgaussian\nl0\t1\nthresholds\t1\t2\nlkcs\t3\ncovariance\t1\ncondition\t1\n";
        assert!(matches!(read_lkc::<f64, _>(text.as_bytes()), Err(Error::Parse { line: 5, .. })));
        let text = "# tohm-lkc v1\nfamily\tgaussian\nl0\t1\nthresholds\t1\nlkcs\t3\ncovariance\t1\t2\ncondition\t1\n";
        assert!(matches!(read_lkc::<f64, _>(text.as_bytes()), Err(Error::Parse { line: 6, .. })));
        let text = "# tohm-lkc v1\nfamily\tgaussian\nl0\t1\nthresholds\t1\nlkcs\t3\ncondition\t1\n";
        assert!(read_lkc::<f64, _>(text.as_bytes()).is_err());
        assert!(read_lkc::<f64, _>("family\tgaussian\n".as_bytes()).is_err());
        let text = "# tohm-lkc v1\nfamily\tweibull\n";
        assert!(matches!(read_lkc::<f64, _>(text.as_bytes()), Err(Error::Parse { line: 2, .. })));
    }
}
