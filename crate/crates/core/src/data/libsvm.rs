use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::ProblemInstance;

/// A parsed LIBSVM file after zero-column removal.
#[derive(Debug, Clone)]
pub struct LibsvmData {
    pub instance: ProblemInstance,
    /// For each kept column, its 0-based index in the file.
    pub column_map: Vec<usize>,
}

/// Parses `label idx:val …` lines with 1-based, strictly increasing indices.
///
/// The column count is the largest index seen unless `declared_n` is given.
/// Blank lines and lines starting with `#` are skipped.
pub fn parse_libsvm<R: Read>(reader: R, declared_n: Option<usize>) -> Result<LibsvmData> {
    let mut labels = Vec::new();
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut max_index = 0usize;
    for (lineno, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let line_no = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let err = |message: String| Error::Parse { line: line_no, message };
        let mut tokens = trimmed.split_whitespace();
        let label: f64 = tokens
            .next()
            .expect("nonempty line has a token")
            .parse()
            .map_err(|_| err("label is not a number".into()))?;
        let mut entries = Vec::new();
        let mut last = 0usize;
        for tok in tokens {
            let (idx, val) = tok.split_once(':').ok_or_else(|| err(format!("expected index:value, got '{tok}'")))?;
            let idx: usize = idx.parse().map_err(|_| err(format!("bad index '{idx}'")))?;
            let val: f64 = val.parse().map_err(|_| err(format!("bad value '{val}'")))?;
            if idx == 0 || idx <= last {
                return Err(err(format!("indices must be 1-based and strictly increasing at '{tok}'")));
            }
            if !val.is_finite() {
                return Err(err(format!("non-finite value at '{tok}'")));
            }
            last = idx;
            entries.push((idx - 1, val));
        }
        max_index = max_index.max(last);
        labels.push(label);
        rows.push(entries);
    }
    if rows.is_empty() {
        return Err(Error::Parse { line: 0, message: "no data rows".into() });
    }
    let n = match declared_n {
        Some(n) if n < max_index => {
            return Err(Error::Parse { line: 0, message: format!("index {max_index} exceeds declared n = {n}") })
        }
        Some(n) => n,
        None => max_index,
    };
    let mut nonzero = vec![false; n];
    for row in &rows {
        for &(j, v) in row {
            if v != 0.0 {
                nonzero[j] = true;
            }
        }
    }
    let column_map: Vec<usize> = (0..n).filter(|&j| nonzero[j]).collect();
    if column_map.is_empty() {
        return Err(Error::Parse { line: 0, message: "every column is zero".into() });
    }
    let mut position = vec![usize::MAX; n];
    for (new, &old) in column_map.iter().enumerate() {
        position[old] = new;
    }
    let mut a = DMatrix::zeros(rows.len(), column_map.len());
    for (i, row) in rows.iter().enumerate() {
        for &(j, v) in row {
            if position[j] != usize::MAX {
                a[(i, position[j])] = v;
            }
        }
    }
    let instance = ProblemInstance::new_cleaned(a, DVector::from_vec(labels))?;
    Ok(LibsvmData { instance, column_map })
}

pub fn read_libsvm(path: impl AsRef<Path>, declared_n: Option<usize>) -> Result<LibsvmData> {
    parse_libsvm(File::open(path)?, declared_n)
}

/// Writes the nonzero entries of each row in LIBSVM format.
pub fn write_libsvm<W: Write>(writer: W, instance: &ProblemInstance) -> Result<()> {
    let mut out = BufWriter::new(writer);
    let a = instance.a();
    for i in 0..instance.m() {
        write!(out, "{}", instance.b()[i])?;
        for j in 0..instance.n() {
            let v = a[(i, j)];
            if v != 0.0 {
                write!(out, " {}:{}", j + 1, v)?;
            }
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_line_row() {
        let data = parse_libsvm("1.5 2:3 5:-1\n".as_bytes(), Some(5)).unwrap();
        assert_eq!(data.column_map, vec![1, 4]);
        assert_eq!(data.instance.a()[(0, 0)], 3.0);
        assert_eq!(data.instance.a()[(0, 1)], -1.0);
        assert_eq!(data.instance.b()[0], 1.5);
    }

    #[test]
    fn zero_column_dropped() {
        let text = "1 1:1 2:2 3:3\n2 1:4 2:5 3:6 5:1\n";
        let data = parse_libsvm(text.as_bytes(), None).unwrap();
        assert_eq!(data.column_map, vec![0, 1, 2, 4]);
        assert!(data.instance.is_cleaned());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        match parse_libsvm("1 1:1\n2 3:1 2:1\n".as_bytes(), None) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_libsvm("x 1:1\n".as_bytes(), None), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_libsvm("1 1-1\n".as_bytes(), None), Err(Error::Parse { .. })));
    }
}
