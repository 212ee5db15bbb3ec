//! Plain-text field files.
//!
//! ```text
//! # tohm-field v1 dims=2
//! # axis 1 0 1 2
//! # axis 2 0 1 2
//! # mask 1 1 1 1 0 1 1 1 1      (optional, row-major over the cross product)
//! 0.25
//! 1.5e-3
//! ...                           (one value per included point, row-major)
//! ```
//!
//! Values are written with Rust's shortest round-trip formatting, so
//! `load(save(f)) == f` bit for bit.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lattice::{FieldSample, Lattice};
use crate::scalar::{format_shortest, Scalar};

pub const FIELD_MAGIC: &str = "# tohm-field v1";

pub fn write_field<T: Scalar, W: Write>(field: &FieldSample<T>, mut out: W) -> Result<()> {
    let lattice = field.lattice();
    writeln!(out, "{FIELD_MAGIC} dims={}", lattice.dims())?;
    for (d, axis) in lattice.axes().iter().enumerate() {
        write!(out, "# axis {}", d + 1)?;
        for x in axis {
            write!(out, " {}", format_shortest(*x))?;
        }
        writeln!(out)?;
    }
    if let Some(mask) = lattice.mask() {
        write!(out, "# mask")?;
        for &m in mask {
            write!(out, " {}", u8::from(m))?;
        }
        writeln!(out)?;
    }
    for v in field.values() {
        writeln!(out, "{}", format_shortest(*v))?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_field<T: Scalar>(field: &FieldSample<T>, path: impl AsRef<Path>) -> Result<()> {
    write_field(field, BufWriter::new(File::create(path)?))
}

fn parse_num<T: Scalar>(tok: &str, line: usize, what: &str) -> Result<T> {
    let v: T = tok
        .parse()
        .map_err(|_| Error::Parse { line, msg: format!("cannot parse {what} {tok:?}") })?;
    if !v.is_finite() {
        return Err(Error::Parse { line, msg: format!("{what} {tok:?} is not finite") });
    }
    Ok(v)
}

pub fn read_field<T: Scalar, R: BufRead>(input: R) -> Result<FieldSample<T>> {
    let mut lines = input.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (_, header) = lines
        .next()
        .ok_or(Error::Parse { line: 1, msg: "empty field file".into() })?;
    let header = header?;
    let dims: usize = header
        .strip_prefix(FIELD_MAGIC)
        .and_then(|rest| rest.trim().strip_prefix("dims="))
        .and_then(|n| n.trim().parse().ok())
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Parse {
            line: 1,
            msg: format!("expected header `{FIELD_MAGIC} dims=D`, found {header:?}"),
        })?;

    let mut axes: Vec<Vec<T>> = Vec::with_capacity(dims);
    for d in 1..=dims {
        let (no, line) = lines
            .next()
            .ok_or(Error::Parse { line: d + 1, msg: format!("missing `# axis {d}` line") })?;
        let line = line?;
        let mut toks = line.split_whitespace();
        let ok = toks.next() == Some("#")
            && toks.next() == Some("axis")
            && toks.next().and_then(|t| t.parse::<usize>().ok()) == Some(d);
        if !ok {
            return Err(Error::Parse { line: no, msg: format!("expected `# axis {d} ...`") });
        }
        let axis = toks.map(|t| parse_num(t, no, "coordinate")).collect::<Result<Vec<T>>>()?;
        axes.push(axis);
    }

    let mut mask = None;
    let mut values = Vec::new();
    let mut last_line = dims + 1;
    for (no, line) in lines {
        let line = line?;
        last_line = no;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("# mask") {
            if mask.is_some() || !values.is_empty() {
                return Err(Error::Parse { line: no, msg: "mask must precede the values".into() });
            }
            let m = rest
                .split_whitespace()
                .map(|t| match t {
                    "0" => Ok(false),
                    "1" => Ok(true),
                    _ => Err(Error::Parse { line: no, msg: format!("bad mask token {t:?}") }),
                })
                .collect::<Result<Vec<bool>>>()?;
            mask = Some(m);
            continue;
        }
        if trimmed.starts_with('#') {
            continue;
        }
        values.push(parse_num::<T>(trimmed, no, "value")?);
    }

    let lattice = Lattice::new(axes, mask).map_err(|e| match e {
        Error::Invalid(msg) | Error::EmptyDomain(msg) => Error::Parse { line: 2, msg },
        other => other,
    })?;
    if values.len() != lattice.len() {
        return Err(Error::Parse {
            line: last_line,
            msg: format!(
                "expected {} values (one per included lattice point), found {}",
                lattice.len(),
                values.len()
            ),
        });
    }
    FieldSample::new(Arc::new(lattice), values)
}

pub fn load_field<T: Scalar>(path: impl AsRef<Path>) -> Result<FieldSample<T>> {
    read_field(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> FieldSample<f64> {
        let axes = vec![vec![0.0, 1.0, 2.0], vec![-1.5, 0.0, 1e-7]];
        let l = Lattice::new(axes, Some(vec![true, true, false, true, true, true, true, true, true]))
            .unwrap();
        FieldSample::new(Arc::new(l), vec![0.1, -2.5e-300, 3.0, 1.0 / 3.0, 7.0, 8.0, 9.0, 1e300])
            .unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let f = sample();
        let mut buf = Vec::new();
        write_field(&f, &mut buf).unwrap();
        let g: FieldSample<f64> = read_field(buf.as_slice()).unwrap();
        assert_eq!(f, g);

        let zeros = FieldSample::new(
            Arc::new(Lattice::full(vec![vec![0.0, 1.0, 2.0]; 2]).unwrap()),
            vec![0.0; 9],
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("zeros.tsv");
        save_field(&zeros, &path).unwrap();
        assert_eq!(load_field::<f64>(&path).unwrap(), zeros);
    }

    #[test]
    fn value_count_mismatch_names_counts() {
        let mut text = String::from("# tohm-field v1 dims=2\n# axis 1 0 1 2\n# axis 2 0 1 2\n");
        for _ in 0..8 {
            text.push_str("0\n");
        }
        let err = read_field::<f64, _>(text.as_bytes()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("expected 9") && msg.contains("found 8"), "{msg}");
    }

    #[test]
    fn nan_is_a_parse_error_with_line() {
        let text = "# tohm-field v1 dims=1\n# axis 1 0 1 2\n0\nNaN\n1\n";
        match read_field::<f64, _>(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_header() {
        assert!(matches!(
            read_field::<f64, _>("# tohm-field v2 dims=1\n".as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            read_field::<f64, _>("# tohm-field v1 dims=2\n# axis 1 0 1\n# axis 3 0 1\n".as_bytes()),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(
            read_field::<f64, _>("# tohm-field v1 dims=1\n# axis 1 1 0\n0\n0\n".as_bytes()),
            Err(Error::Parse { .. })
        ));
    }
}
