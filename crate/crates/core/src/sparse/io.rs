//! Plain-text sparse matrix exchange format.
//!
//! ```text
//! m n nnz
//! row col [value]
//! ...
//! ```
//!
//! Indices are 0-based, entries are written column-major, and binary matrices
//! omit the value field. Real values are written with the shortest
//! representation that parses back to the same bits.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sparse::{BinaryColumnMatrix, SparseCodeMatrix, SparseRealVector};

pub fn write_binary<W: Write>(mut w: W, a: &BinaryColumnMatrix) -> Result<()> {
    writeln!(w, "{} {} {}", a.rows(), a.cols(), a.nnz())?;
    for (c, s) in a.supports().iter().enumerate() {
        for &r in s {
            writeln!(w, "{r} {c}")?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_real<T: Scalar, W: Write>(mut w: W, x: &SparseCodeMatrix<T>) -> Result<()> {
    writeln!(w, "{} {} {}", x.rows(), x.cols(), x.nnz())?;
    for (c, col) in x.columns().iter().enumerate() {
        for (r, v) in col.iter() {
            writeln!(w, "{r} {c} {v}")?;
        }
    }
    w.flush()?;
    Ok(())
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line_no: usize,
}

impl<R: BufRead> Lines<R> {
    fn next_fields(&mut self) -> Result<Option<(usize, Vec<String>)>> {
        for line in self.inner.by_ref() {
            self.line_no += 1;
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            return Ok(Some((
                self.line_no,
                trimmed.split_whitespace().map(str::to_owned).collect(),
            )));
        }
        Ok(None)
    }
}

fn parse_usize(field: &str, line: usize) -> Result<usize> {
    field.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("expected a non-negative integer, found {field:?}"),
    })
}

fn read_header<R: BufRead>(lines: &mut Lines<R>) -> Result<(usize, usize, usize)> {
    let (line, fields) = lines.next_fields()?.ok_or(Error::Parse {
        line: 0,
        msg: "missing header".into(),
    })?;
    if fields.len() != 3 {
        return Err(Error::Parse {
            line,
            msg: "header must be `m n nnz`".into(),
        });
    }
    Ok((
        parse_usize(&fields[0], line)?,
        parse_usize(&fields[1], line)?,
        parse_usize(&fields[2], line)?,
    ))
}

fn check_count(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::Parse {
            line: 0,
            msg: format!("header declares {expected} entries, found {found}"),
        });
    }
    Ok(())
}

pub fn read_binary<R: Read>(r: R) -> Result<BinaryColumnMatrix> {
    let mut lines = Lines {
        inner: BufReader::new(r).lines(),
        line_no: 0,
    };
    let (m, n, nnz) = read_header(&mut lines)?;
    let mut supports = vec![Vec::new(); n];
    let mut count = 0;
    while let Some((line, fields)) = lines.next_fields()? {
        if fields.len() != 2 {
            return Err(Error::Parse {
                line,
                msg: "binary entries are `row col`".into(),
            });
        }
        let (row, col) = (parse_usize(&fields[0], line)?, parse_usize(&fields[1], line)?);
        if row >= m || col >= n {
            return Err(Error::Parse {
                line,
                msg: format!("entry ({row}, {col}) outside {m}x{n}"),
            });
        }
        supports[col].push(row);
        count += 1;
    }
    check_count(nnz, count)?;
    let a = BinaryColumnMatrix::from_supports(m, supports)?;
    check_count(nnz, a.nnz())?;
    Ok(a)
}

pub fn read_real<T: Scalar, R: Read>(r: R) -> Result<SparseCodeMatrix<T>> {
    let mut lines = Lines {
        inner: BufReader::new(r).lines(),
        line_no: 0,
    };
    let (m, n, nnz) = read_header(&mut lines)?;
    let mut entries: Vec<Vec<(usize, T)>> = vec![Vec::new(); n];
    let mut count = 0;
    while let Some((line, fields)) = lines.next_fields()? {
        if fields.len() != 3 {
            return Err(Error::Parse {
                line,
                msg: "real entries are `row col value`".into(),
            });
        }
        let (row, col) = (parse_usize(&fields[0], line)?, parse_usize(&fields[1], line)?);
        if row >= m || col >= n {
            return Err(Error::Parse {
                line,
                msg: format!("entry ({row}, {col}) outside {m}x{n}"),
            });
        }
        let value: T = fields[2].parse().map_err(|_| Error::Parse {
            line,
            msg: format!("invalid value {:?}", fields[2]),
        })?;
        if value.is_zero() || !value.is_finite() {
            return Err(Error::Parse {
                line,
                msg: format!("stored values must be finite and nonzero, found {value}"),
            });
        }
        entries[col].push((row, value));
        count += 1;
    }
    check_count(nnz, count)?;
    let columns = entries
        .into_iter()
        .map(|e| SparseRealVector::from_entries(m, e))
        .collect::<Result<Vec<_>>>()?;
    SparseCodeMatrix::from_columns(m, columns)
}

pub fn save_binary(path: impl AsRef<Path>, a: &BinaryColumnMatrix) -> Result<()> {
    write_binary(BufWriter::new(File::create(path)?), a)
}

pub fn save_real<T: Scalar>(path: impl AsRef<Path>, x: &SparseCodeMatrix<T>) -> Result<()> {
    write_real(BufWriter::new(File::create(path)?), x)
}

pub fn load_binary(path: impl AsRef<Path>) -> Result<BinaryColumnMatrix> {
    read_binary(File::open(path)?)
}

pub fn load_real<T: Scalar>(path: impl AsRef<Path>) -> Result<SparseCodeMatrix<T>> {
    read_real(File::open(path)?)
}
