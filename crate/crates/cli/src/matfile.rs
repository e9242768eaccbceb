//! Explicit matrices on disk: a header line `n=<dim>` followed by `n²`
//! lines of `re,im` in row-major order.

use std::path::{Path, PathBuf};

use glt_core::{DenseMatrix64, C};

use crate::diag::{ConfigError, ErrorClass};

/// Path for dimension `n`; `{n}` in the pattern is substituted.
pub fn resolve(pattern: &Path, n: usize) -> PathBuf {
    PathBuf::from(pattern.to_string_lossy().replace("{n}", &n.to_string()))
}

pub fn is_pattern(pattern: &Path) -> bool {
    pattern.to_string_lossy().contains("{n}")
}

pub fn parse_matrix(text: &str, path: &Path, expect_n: usize) -> Result<DenseMatrix64, ConfigError> {
    let shape = |msg: String, line: usize| ConfigError::new(ErrorClass::MatrixFileShape, msg, path, Some(line));
    let (header, body) = text.split_once('\n').unwrap_or((text, ""));
    let n: usize = header
        .trim()
        .strip_prefix("n=")
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| shape(format!("expected header `n=<dim>`, found `{}`", header.trim()), 1))?;
    if n != expect_n {
        return Err(shape(format!("header declares n={n} but dimension {expect_n} was requested"), 1));
    }
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(body.as_bytes());
    let mut entries = Vec::with_capacity(n * n);
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(2, |p| p.line() as usize + 1);
            shape(format!("malformed row: {e}"), line)
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize) + 1;
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        if rec.len() != 2 {
            return Err(shape(format!("expected `re,im`, found {} fields", rec.len()), line));
        }
        let num = |s: &str| {
            s.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                ConfigError::new(ErrorClass::Parse, format!("`{s}` is not a finite number"), path, Some(line))
            })
        };
        if entries.len() == n * n {
            return Err(shape(format!("more than n² = {} entries", n * n), line));
        }
        entries.push(C::new(num(&rec[0])?, num(&rec[1])?));
    }
    if entries.len() != n * n {
        let line = body.lines().count() + 2;
        return Err(shape(format!("found {} entries, header n={n} needs {}", entries.len(), n * n), line));
    }
    DenseMatrix64::from_row_major(n, &entries)
        .map_err(|e| ConfigError::new(ErrorClass::MatrixFileShape, e.to_string(), path, None))
}

pub fn load_matrix(pattern: &Path, n: usize) -> Result<DenseMatrix64, ConfigError> {
    let path = resolve(pattern, n);
    let text = std::fs::read_to_string(&path)
        .map_err(|e| ConfigError::new(ErrorClass::Io, format!("cannot read matrix file: {e}"), &path, None))?;
    parse_matrix(&text, &path, n)
}

#[cfg(test)]
pub fn write_matrix(a: &DenseMatrix64, path: &Path) -> std::io::Result<()> {
    let n = a.dim();
    let mut out = format!("n={n}\n");
    for r in 0..n {
        for c in 0..n {
            let z = a.get(r, c);
            out.push_str(&format!("{:?},{:?}\n", z.re, z.im));
        }
    }
    std::fs::write(path, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static Path {
        Path::new("m.csv")
    }

    #[test]
    fn reads_row_major_pairs() {
        let a = parse_matrix("n=2\n1,0\n2,0.5\n-1,0\n0,0\n", p(), 2).unwrap();
        assert_eq!(a.get(0, 1), C::new(2.0, 0.5));
        assert_eq!(a.get(1, 0), C::new(-1.0, 0.0));
    }

    #[test]
    fn shape_errors_carry_lines() {
        let e = parse_matrix("n=3\n1,0\n", p(), 2).unwrap_err();
        assert_eq!((e.class, e.line), (ErrorClass::MatrixFileShape, Some(1)));
        let e = parse_matrix("n=2\n1,0\n1,0\n1,0\n", p(), 2).unwrap_err();
        assert_eq!((e.class, e.line), (ErrorClass::MatrixFileShape, Some(5)));
        let e = parse_matrix("n=1\n1,0\n1,0\n", p(), 1).unwrap_err();
        assert_eq!((e.class, e.line), (ErrorClass::MatrixFileShape, Some(3)));
        let e = parse_matrix("n=1\n1,0,3\n", p(), 1).unwrap_err();
        assert_eq!(e.line, Some(2));
        let e = parse_matrix("n=1\nx,0\n", p(), 1).unwrap_err();
        assert_eq!((e.class, e.line), (ErrorClass::Parse, Some(2)));
        let e = parse_matrix("size 2\n", p(), 2).unwrap_err();
        assert_eq!(e.line, Some(1));
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let a = glt_core::structured::random_gaussian::<f64>(5, 3, 1.0).unwrap();
        let path = dir.path().join("a_3.csv");
        write_matrix(&a, &path).unwrap();
        let b = load_matrix(&dir.path().join("a_{n}.csv"), 3).unwrap();
        assert!(a.approx_eq(&b, 0.0));
    }
}
