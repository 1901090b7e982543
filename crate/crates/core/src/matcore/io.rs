//! Matrix Market (coordinate and array) and JSON readers/writers.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;

use super::banded::BandedMatrix;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

fn mm_err(line: usize, msg: impl Into<String>) -> Error {
    Error::MatrixMarket {
        line,
        msg: msg.into(),
    }
}

/// Reads a square `coordinate` Matrix Market file with `real` (or `integer`)
/// entries. Symmetric files are expanded; duplicate entries are summed.
pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<BandedMatrix> {
    parse_matrix_market(BufReader::new(File::open(path)?))
}

pub fn parse_matrix_market<R: BufRead>(reader: R) -> Result<BandedMatrix> {
    let mut lines = reader.lines().enumerate();

    let (_, header) = lines.next().ok_or_else(|| mm_err(1, "empty file"))?;
    let header = header?;
    let fields: Vec<String> = header.split_whitespace().map(str::to_lowercase).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(mm_err(1, format!("bad header `{header}`")));
    }
    if fields[2] != "coordinate" {
        return Err(mm_err(1, format!("unsupported format `{}`", fields[2])));
    }
    if fields[3] != "real" && fields[3] != "integer" {
        return Err(mm_err(1, format!("unsupported field `{}`", fields[3])));
    }
    let symmetry = match fields[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        other => return Err(mm_err(1, format!("unsupported symmetry `{other}`"))),
    };

    let mut size: Option<(usize, usize)> = None;
    let mut matrix = BandedMatrix::zeros(0);
    let mut seen = 0usize;
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let toks: Vec<&str> = trimmed.split_whitespace().collect();
        match size {
            None => {
                if toks.len() != 3 {
                    return Err(mm_err(lineno, "size line needs `rows cols nnz`"));
                }
                let parse = |s: &str| {
                    s.parse::<usize>()
                        .map_err(|_| mm_err(lineno, format!("bad integer `{s}`")))
                };
                let (rows, cols, nnz) = (parse(toks[0])?, parse(toks[1])?, parse(toks[2])?);
                if rows != cols {
                    return Err(mm_err(lineno, format!("matrix is {rows}x{cols}, not square")));
                }
                size = Some((rows, nnz));
                matrix = BandedMatrix::zeros(rows);
            }
            Some((n, _)) => {
                if toks.len() != 3 {
                    return Err(mm_err(lineno, "entry line needs `row col value`"));
                }
                let index = |s: &str| -> Result<usize> {
                    let i = s
                        .parse::<usize>()
                        .map_err(|_| mm_err(lineno, format!("bad index `{s}`")))?;
                    if i == 0 || i > n {
                        return Err(mm_err(lineno, format!("index {i} outside 1..={n}")));
                    }
                    Ok(i - 1)
                };
                let r = index(toks[0])?;
                let c = index(toks[1])?;
                let v: f64 = toks[2]
                    .parse()
                    .map_err(|_| mm_err(lineno, format!("bad value `{}`", toks[2])))?;
                matrix.add_to(r, c, v);
                if symmetry == Symmetry::Symmetric && r != c {
                    matrix.add_to(c, r, v);
                }
                seen += 1;
            }
        }
    }
    let (_, nnz) = size.ok_or_else(|| mm_err(0, "missing size line"))?;
    if seen != nnz {
        return Err(mm_err(0, format!("expected {nnz} entries, found {seen}")));
    }
    // explicit zeros in the file must not leave all-zero diagonals behind
    let n = matrix.n();
    let kept: Vec<(i64, Vec<f64>)> = matrix
        .diagonals()
        .iter()
        .filter(|(_, v)| v.iter().any(|&x| x != 0.0))
        .map(|(&k, v)| (k, v.clone()))
        .collect();
    BandedMatrix::from_diagonals(n, kept)
}

/// Writes the nonzero entries in coordinate/real/general form, column-major,
/// with 17 significant digits so the values round-trip exactly.
pub fn write_matrix_market(path: impl AsRef<Path>, m: &BandedMatrix) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    format_matrix_market(&mut w, m)?;
    w.flush()?;
    Ok(())
}

pub fn format_matrix_market<W: Write>(w: &mut W, m: &BandedMatrix) -> Result<()> {
    let mut entries: Vec<(usize, usize, f64)> = m.entries().filter(|e| e.2 != 0.0).collect();
    entries.sort_by_key(|&(r, c, _)| (c, r));
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", m.n(), m.n(), entries.len())?;
    for (r, c, v) in entries {
        writeln!(w, "{} {} {:.16e}", r + 1, c + 1, v)?;
    }
    Ok(())
}

/// Dense column-major `array` dump, used for extracted blocks.
pub fn write_matrix_market_array(path: impl AsRef<Path>, m: &DMatrix<f64>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "%%MatrixMarket matrix array real general")?;
    writeln!(w, "{} {}", m.nrows(), m.ncols())?;
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            writeln!(w, "{:.16e}", m[(r, c)])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_json(path: impl AsRef<Path>) -> Result<BandedMatrix> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

pub fn write_json(path: impl AsRef<Path>, m: &BandedMatrix) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut w, m)?;
    w.flush()?;
    Ok(())
}

/// Picks the reader from the extension: `.json` is the internal format,
/// anything else is treated as Matrix Market.
pub fn read_matrix(path: impl AsRef<Path>) -> Result<BandedMatrix> {
    let path = path.as_ref();
    if path.extension().is_some_and(|e| e == "json") {
        read_json(path)
    } else {
        read_matrix_market(path)
    }
}

pub fn write_matrix(path: impl AsRef<Path>, m: &BandedMatrix) -> Result<()> {
    let path = path.as_ref();
    if path.extension().is_some_and(|e| e == "json") {
        write_json(path, m)
    } else {
        write_matrix_market(path, m)
    }
}
