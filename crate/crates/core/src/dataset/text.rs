//! Plain-text dataset format: a header line `n d`, then `n` lines of `d`
//! space-separated `+1` / `-1` tokens.

use std::io::{BufRead, Write};

use super::DatasetMatrix;
use crate::error::{Error, Result};

pub fn write_text<W: Write>(x: &DatasetMatrix, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{} {}", x.n(), x.d())?;
    let mut line = String::with_capacity(3 * x.d());
    for i in 0..x.n() {
        line.clear();
        for j in 0..x.d() {
            if j > 0 {
                line.push(' ');
            }
            line.push_str(if x.entry(i, j) == 1 { "+1" } else { "-1" });
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn parse_text<R: BufRead>(input: R) -> Result<DatasetMatrix> {
    let mut lines = input.lines().enumerate();
    let perr = |line: usize, msg: String| Error::Parse { line: line + 1, msg };

    let (ln, header) = lines.next().ok_or_else(|| perr(0, "empty input".into()))?;
    let header = header.map_err(|e| perr(ln, e.to_string()))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| perr(ln, format!("bad dimension {t:?}"))))
        .collect::<Result<_>>()?;
    let [n, d] = dims[..] else {
        return Err(perr(ln, "header must be `n d`".into()));
    };

    let mut rows: Vec<Vec<i8>> = Vec::with_capacity(n);
    for (ln, line) in lines {
        let line = line.map_err(|e| perr(ln, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        if rows.len() == n {
            return Err(perr(ln, format!("more than {n} rows")));
        }
        let row: Vec<i8> = line
            .split_whitespace()
            .map(|t| match t {
                "+1" => Ok(1),
                "-1" => Ok(-1),
                other => Err(perr(ln, format!("bad entry {other:?}"))),
            })
            .collect::<Result<_>>()?;
        if row.len() != d {
            return Err(perr(ln, format!("expected {d} entries, found {}", row.len())));
        }
        rows.push(row);
    }
    if rows.len() != n {
        return Err(Error::Parse {
            line: 0,
            msg: format!("expected {n} rows, found {}", rows.len()),
        });
    }
    DatasetMatrix::from_rows(&rows)
}
