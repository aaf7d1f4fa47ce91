//! Matrix Market coordinate format (`real general`, plus `symmetric` on read).
//!
//! Values are written with 17 significant digits, which round-trips every f64.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::SparseMatrix;
use crate::error::{Error, Result};

pub fn write_matrix_market<W: Write>(m: &SparseMatrix, mut out: W) -> Result<()> {
    writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(out, "{} {} {}", m.nrows(), m.ncols(), m.nnz())?;
    for (r, c, v) in m.iter() {
        writeln!(out, "{} {} {:.16e}", r + 1, c + 1, v)?;
    }
    Ok(())
}

pub fn save_matrix_market(m: &SparseMatrix, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_matrix_market(m, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn read_matrix_market<R: Read>(input: R) -> Result<SparseMatrix> {
    let reader = BufReader::new(input);
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::MatrixMarket("empty input".into()))??;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_lowercase).collect();
    if tokens.len() < 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(Error::MatrixMarket(format!("bad header: {header}")));
    }
    if tokens[2] != "coordinate" {
        return Err(Error::MatrixMarket("only coordinate format is supported".into()));
    }
    let pattern = match tokens[3].as_str() {
        "real" | "integer" | "double" => false,
        "pattern" => true,
        other => return Err(Error::MatrixMarket(format!("unsupported field '{other}'"))),
    };
    let symmetric = match tokens[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(Error::MatrixMarket(format!("unsupported symmetry '{other}'"))),
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut triplets = Vec::new();
    for line in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let mut it = line.split_whitespace();
        let mut field = |what: &str| {
            it.next()
                .ok_or_else(|| Error::MatrixMarket(format!("missing {what} in '{line}'")))
        };
        match size {
            None => {
                let parse = |s: &str| {
                    s.parse::<usize>()
                        .map_err(|e| Error::MatrixMarket(format!("bad size line: {e}")))
                };
                let r = parse(field("rows")?)?;
                let c = parse(field("cols")?)?;
                let nnz = parse(field("nnz")?)?;
                size = Some((r, c, nnz));
                triplets.reserve(if symmetric { 2 * nnz } else { nnz });
            }
            Some((nr, nc, _)) => {
                let r: usize = field("row")?
                    .parse()
                    .map_err(|e| Error::MatrixMarket(format!("bad row index: {e}")))?;
                let c: usize = field("col")?
                    .parse()
                    .map_err(|e| Error::MatrixMarket(format!("bad column index: {e}")))?;
                let v: f64 = if pattern {
                    1.0
                } else {
                    field("value")?
                        .parse()
                        .map_err(|e| Error::MatrixMarket(format!("bad value: {e}")))?
                };
                if r == 0 || c == 0 || r > nr || c > nc {
                    return Err(Error::MatrixMarket(format!("entry ({r}, {c}) out of range")));
                }
                triplets.push((r - 1, c - 1, v));
                if symmetric && r != c {
                    triplets.push((c - 1, r - 1, v));
                }
            }
        }
    }
    let (nr, nc, nnz) = size.ok_or_else(|| Error::MatrixMarket("missing size line".into()))?;
    let stored = if symmetric {
        triplets.iter().filter(|t| t.0 >= t.1).count()
    } else {
        triplets.len()
    };
    if stored != nnz {
        return Err(Error::MatrixMarket(format!(
            "expected {nnz} entries, found {stored}"
        )));
    }
    SparseMatrix::from_triplets(nr, nc, triplets)
}

pub fn load_matrix_market(path: impl AsRef<Path>) -> Result<SparseMatrix> {
    read_matrix_market(File::open(path)?)
}
