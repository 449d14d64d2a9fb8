//! Matrix Market coordinate (sparse) and array (dense vector) files.
//!
//! Indices are 1-based on disk and 0-based in memory. Symmetric files hold
//! the lower triangle only and are mirrored on read.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::SparseMatrix;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

struct Header {
    format: String,
    symmetry: Symmetry,
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

fn parse_header(path: &Path, line: &str) -> Result<Header> {
    let toks: Vec<String> = line.split_whitespace().map(str::to_ascii_lowercase).collect();
    if toks.len() != 5 || toks[0] != "%%matrixmarket" || toks[1] != "matrix" {
        return Err(parse_err(path, 1, "expected '%%MatrixMarket matrix <format> <field> <symmetry>'"));
    }
    let format = toks[2].clone();
    if format != "coordinate" && format != "array" {
        return Err(parse_err(path, 1, format!("unsupported format '{format}'")));
    }
    if toks[3] != "real" && toks[3] != "integer" && toks[3] != "double" {
        return Err(parse_err(path, 1, format!("unsupported field '{}'", toks[3])));
    }
    let symmetry = match toks[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        other => return Err(parse_err(path, 1, format!("unsupported symmetry '{other}'"))),
    };
    Ok(Header { format, symmetry })
}

/// Yields (1-based line number, trimmed content) for non-comment lines
/// after the header.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .skip(1)
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('%'))
}

fn parse_num<T: std::str::FromStr>(path: &Path, line: usize, tok: Option<&str>, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| parse_err(path, line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| parse_err(path, line, format!("invalid {what} '{tok}'")))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<SparseMatrix> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let first = text.lines().next().ok_or_else(|| parse_err(path, 1, "empty file"))?;
    let header = parse_header(path, first)?;
    if header.format != "coordinate" {
        return Err(parse_err(path, 1, "expected a coordinate matrix"));
    }
    let mut lines = data_lines(&text);
    let (size_line, size) = lines
        .next()
        .ok_or_else(|| parse_err(path, 2, "missing size line"))?;
    let mut it = size.split_whitespace();
    let rows: usize = parse_num(path, size_line, it.next(), "row count")?;
    let cols: usize = parse_num(path, size_line, it.next(), "column count")?;
    let nnz: usize = parse_num(path, size_line, it.next(), "entry count")?;
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }

    let mut trip = Vec::with_capacity(nnz * 2);
    let mut count = 0;
    for (ln, line) in lines {
        let mut it = line.split_whitespace();
        let r: usize = parse_num(path, ln, it.next(), "row index")?;
        let c: usize = parse_num(path, ln, it.next(), "column index")?;
        let v: f64 = parse_num(path, ln, it.next(), "value")?;
        if r == 0 || c == 0 || r > rows || c > cols {
            return Err(parse_err(path, ln, format!("index ({r}, {c}) outside {rows}x{cols}")));
        }
        if header.symmetry == Symmetry::Symmetric && c > r {
            return Err(parse_err(path, ln, "symmetric file must store the lower triangle"));
        }
        trip.push((r - 1, c - 1, v));
        if header.symmetry == Symmetry::Symmetric && r != c {
            trip.push((c - 1, r - 1, v));
        }
        count += 1;
    }
    if count != nnz {
        return Err(Error::DimensionMismatch {
            expected: nnz,
            found: count,
        });
    }
    Ok(SparseMatrix::from_triplets(rows, trip)?
        .with_symmetric_hint(header.symmetry == Symmetry::Symmetric))
}

/// Writes `a`; a matrix flagged symmetric (and actually symmetric) is
/// stored as its lower triangle with the `symmetric` qualifier.
pub fn write_matrix_market(a: &SparseMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let symmetric = a.symmetric_hint() && a.is_symmetric(0.0);
    let mut out = String::with_capacity(24 * a.nnz() + 64);
    let kind = if symmetric { "symmetric" } else { "general" };
    writeln!(out, "%%MatrixMarket matrix coordinate real {kind}").unwrap();
    let entries: Vec<(usize, usize, f64)> = (0..a.n())
        .flat_map(|i| {
            let (cols, vals) = a.row(i);
            cols.iter()
                .zip(vals)
                .map(move |(&c, &v)| (i, c, v))
                .collect::<Vec<_>>()
        })
        .filter(|&(i, c, _)| !symmetric || c <= i)
        .collect();
    writeln!(out, "{} {} {}", a.n(), a.n(), entries.len()).unwrap();
    for (i, c, v) in entries {
        // `{:?}` on f64 round-trips exactly.
        writeln!(out, "{} {} {:?}", i + 1, c + 1, v).unwrap();
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads a dense column vector stored as an `n × 1` array file.
pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let first = text.lines().next().ok_or_else(|| parse_err(path, 1, "empty file"))?;
    let header = parse_header(path, first)?;
    if header.format != "array" {
        return Err(parse_err(path, 1, "expected an array (dense) file"));
    }
    let mut lines = data_lines(&text);
    let (size_line, size) = lines
        .next()
        .ok_or_else(|| parse_err(path, 2, "missing size line"))?;
    let mut it = size.split_whitespace();
    let rows: usize = parse_num(path, size_line, it.next(), "row count")?;
    let cols: usize = parse_num(path, size_line, it.next(), "column count")?;
    if cols != 1 {
        return Err(parse_err(path, size_line, "vector files must have one column"));
    }
    let mut out = Vec::with_capacity(rows);
    for (ln, line) in lines {
        out.push(parse_num(path, ln, Some(line), "value")?);
    }
    if out.len() != rows {
        return Err(Error::DimensionMismatch {
            expected: rows,
            found: out.len(),
        });
    }
    Ok(out)
}

pub fn write_vector(x: &[f64], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::with_capacity(24 * x.len() + 64);
    writeln!(out, "%%MatrixMarket matrix array real general").unwrap();
    writeln!(out, "{} 1", x.len()).unwrap();
    for v in x {
        writeln!(out, "{v:?}").unwrap();
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::gen_laplace3d;

    #[test]
    fn laplacian_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.mtx");
        let a = gen_laplace3d(3, 3, 3).unwrap();
        write_matrix_market(&a, &p).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("%%MatrixMarket matrix coordinate real symmetric"));
        let b = read_matrix_market(&p).unwrap();
        assert_eq!(a.to_dense(), b.to_dense());
    }

    #[test]
    fn symmetric_file_is_mirrored() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.mtx");
        fs::write(
            &p,
            "%%MatrixMarket matrix coordinate real symmetric\n% comment\n2 2 3\n1 1 2.0\n2 1 -1.0\n2 2 2.0\n",
        )
        .unwrap();
        let a = read_matrix_market(&p).unwrap();
        assert_eq!(a.to_dense(), vec![vec![2.0, -1.0], vec![-1.0, 2.0]]);
    }

    #[test]
    fn malformed_header_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.mtx");
        fs::write(&p, "%%MatrixMarket tensor coordinate real general\n1 1 1\n1 1 1.0\n").unwrap();
        assert!(matches!(read_matrix_market(&p), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn bad_entry_reports_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.mtx");
        fs::write(&p, "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n2 x 1.0\n").unwrap();
        match read_matrix_market(&p) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn entry_count_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("short.mtx");
        fs::write(&p, "%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1.0\n").unwrap();
        assert!(matches!(read_matrix_market(&p), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn vector_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("b.mtx");
        let x = vec![1.0, -0.1, 1e-300, 3.25];
        write_vector(&x, &p).unwrap();
        assert_eq!(read_vector(&p).unwrap(), x);
    }
}
