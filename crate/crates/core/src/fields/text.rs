//! Plain-text matrix format.
//!
//! ```text
//! <nrows> <ncols> <field>
//! <entry> <entry> ...      (nrows lines)
//! ```
//!
//! `field` is `gf2`, `gfp:<p>` or `rational`; rational entries are written as
//! `a/b` or as integers. Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;

use super::{format_rational, parse_rational, FieldSpec, Matrix};
use crate::error::{Error, Result};

pub fn write_matrix(m: &Matrix) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {} {}", m.nrows(), m.ncols(), m.field());
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|j| format_rational(&m.entry(i, j)))
            .collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

pub fn parse_matrix(text: &str) -> Result<Matrix> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty matrix file".into()))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 3 {
        return Err(Error::Parse(format!("bad header {header:?}")));
    }
    let dim = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::Parse(format!("bad dimension {s:?}")))
    };
    let (nrows, ncols) = (dim(parts[0])?, dim(parts[1])?);
    let field: FieldSpec = parts[2].parse()?;
    let mut rows = Vec::with_capacity(nrows);
    for (i, line) in lines.enumerate() {
        if i >= nrows {
            return Err(Error::Parse(format!("more than {nrows} rows")));
        }
        let row = line
            .split_whitespace()
            .map(parse_rational)
            .collect::<Result<Vec<_>>>()?;
        if row.len() != ncols {
            return Err(Error::Parse(format!(
                "row {} has {} entries, expected {ncols}",
                i + 1,
                row.len()
            )));
        }
        if field.is_finite() {
            // finite-field entries must already be canonical residues
            let order = field.order().unwrap();
            for q in &row {
                let ok = q.is_integer()
                    && q.numer() >= &0.into()
                    && q.numer() < &num_bigint::BigInt::from(order);
                if !ok {
                    return Err(Error::Parse(format!(
                        "entry {} is not a canonical element of {field}",
                        format_rational(q)
                    )));
                }
            }
        }
        rows.push(row);
    }
    if rows.len() != nrows {
        return Err(Error::Parse(format!(
            "expected {nrows} rows, found {}",
            rows.len()
        )));
    }
    Matrix::from_rationals(field, ncols, &rows)
}
