//! Matrix Market coordinate files (`real` or `integer`, `general` or
//! `symmetric`).

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

fn parse_err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line, msg: msg.into() })
}

/// Reads a coordinate-format matrix. Indices are 1-based in the file;
/// symmetric files are expanded to full storage and duplicates are summed.
pub fn read_matrix_market<R: BufRead>(reader: R) -> Result<CsrMatrix> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (hline, header) = match lines.next() {
        Some((n, l)) => (n, l?),
        None => return parse_err(1, "empty file"),
    };
    let tokens: Vec<String> = header.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return parse_err(hline, "expected '%%MatrixMarket matrix coordinate <field> <symmetry>'");
    }
    if tokens[2] != "coordinate" {
        return parse_err(hline, format!("unsupported format '{}', only coordinate is read", tokens[2]));
    }
    match tokens[3].as_str() {
        "real" | "integer" => {}
        other => return parse_err(hline, format!("unsupported field '{other}', only real is read")),
    }
    let symmetric = match tokens[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return parse_err(hline, format!("unsupported symmetry '{other}'")),
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut triplets = Vec::new();
    let mut last_line = hline;
    for (no, line) in lines {
        let line = line?;
        last_line = no;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = t.split_whitespace().collect();
        match size {
            None => {
                if fields.len() != 3 {
                    return parse_err(no, "size line must be '<rows> <cols> <entries>'");
                }
                let parse = |s: &str| s.parse::<usize>().or_else(|_| parse_err(no, format!("bad integer '{s}'")));
                let dims = (parse(fields[0])?, parse(fields[1])?, parse(fields[2])?);
                if symmetric && dims.0 != dims.1 {
                    return parse_err(no, "symmetric matrix must be square");
                }
                triplets.reserve(if symmetric { 2 * dims.2 } else { dims.2 });
                size = Some(dims);
            }
            Some((rows, cols, _)) => {
                if fields.len() != 3 {
                    return parse_err(no, "entry must be '<row> <col> <value>'");
                }
                let idx = |s: &str, bound: usize| -> Result<usize> {
                    match s.parse::<usize>() {
                        Ok(v) if v >= 1 && v <= bound => Ok(v - 1),
                        _ => parse_err(no, format!("index '{s}' outside 1..={bound}")),
                    }
                };
                let i = idx(fields[0], rows)?;
                let j = idx(fields[1], cols)?;
                let v: f64 = fields[2]
                    .parse()
                    .or_else(|_| parse_err(no, format!("bad value '{}'", fields[2])))?;
                if !v.is_finite() {
                    return parse_err(no, "non-finite value");
                }
                triplets.push((i, j, v));
                if symmetric && i != j {
                    triplets.push((j, i, v));
                }
            }
        }
    }
    let (rows, cols, entries) = match size {
        Some(s) => s,
        None => return parse_err(last_line, "missing size line"),
    };
    let stored = if symmetric {
        triplets.iter().filter(|t| t.0 >= t.1).count()
    } else {
        triplets.len()
    };
    if stored != entries {
        return parse_err(last_line, format!("expected {entries} entries, found {stored}"));
    }
    CsrMatrix::from_triplets(rows, cols, &triplets)
}

pub fn read_matrix_market_file(path: &Path) -> Result<CsrMatrix> {
    read_matrix_market(BufReader::new(File::open(path)?))
}

/// Writes `general` storage, or the lower triangle when `symmetric` is set.
pub fn write_matrix_market<W: Write>(mut w: W, a: &CsrMatrix, symmetric: bool) -> Result<()> {
    let kind = if symmetric { "symmetric" } else { "general" };
    let entries: Vec<(usize, usize, f64)> = a
        .triplets()
        .into_iter()
        .filter(|&(i, j, _)| !symmetric || i >= j)
        .collect();
    writeln!(w, "%%MatrixMarket matrix coordinate real {kind}")?;
    writeln!(w, "{} {} {}", a.nrows(), a.ncols(), entries.len())?;
    for (i, j, v) in entries {
        writeln!(w, "{} {} {:e}", i + 1, j + 1, v)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(s: &str) -> Result<CsrMatrix> {
        read_matrix_market(s.as_bytes())
    }

    #[test]
    fn identity() {
        let a = read("%%MatrixMarket matrix coordinate real general\n% c\n3 3 3\n1 1 1\n2 2 1\n3 3 1\n").unwrap();
        assert_eq!(a.nnz(), 3);
        assert_eq!(a, CsrMatrix::identity(3));
    }

    #[test]
    fn symmetric_expands() {
        let a = read("%%MatrixMarket matrix coordinate real symmetric\n3 3 4\n1 1 4\n2 1 -1\n3 2 -1\n3 3 4\n").unwrap();
        assert_eq!(a.nnz(), 2 * 4 - 2);
        assert_eq!(a.get(0, 1), -1.0);
        assert!(a.is_symmetric());
    }

    #[test]
    fn duplicates_are_summed() {
        let a = read("%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1.5\n1 1 2.5\n2 2 1\n").unwrap();
        assert_eq!(a.get(0, 0), 4.0);
    }

    #[test]
    fn rejects_unsupported_kinds_with_line() {
        for (text, line) in [
            ("%%MatrixMarket matrix coordinate pattern general\n2 2 1\n1 1\n", 1),
            ("%%MatrixMarket matrix coordinate complex general\n2 2 1\n1 1 1 0\n", 1),
            ("%%MatrixMarket matrix array real general\n2 2\n", 1),
            ("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n", 3),
            ("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n", 3),
            ("%%MatrixMarket matrix coordinate real general\n2 x 1\n", 2),
        ] {
            match read(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("expected parse error for {text:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn write_read_round_trip() {
        let a = CsrMatrix::from_dense(2, 2, &[2.0, -1.0, -1.0, 2.0]).unwrap();
        for sym in [false, true] {
            let mut buf = Vec::new();
            write_matrix_market(&mut buf, &a, sym).unwrap();
            assert_eq!(read_matrix_market(buf.as_slice()).unwrap(), a);
        }
    }
}
