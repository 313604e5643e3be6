//! Matrix and permutation files.
//!
//! Binary: `b"PCDM"`, rows (u64 LE), cols (u64 LE), then rows*cols binary64
//! LE values in column-major order. CSV: one row per line, comma-separated,
//! no header; lines starting with `#` are comments. Values are written with
//! 17 significant digits. A CSV matrix with no rows or no columns reads back
//! as 0x0. Permutations: one 0-based index per line.

use std::fs;
use std::path::Path;

use super::{DenseMatrix, Permutation};
use crate::error::{Error, Location, Result};
use crate::scalar::Scalar;

const MAGIC: &[u8; 4] = b"PCDM";
const HEADER_LEN: usize = 4 + 8 + 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Binary,
    Csv,
}

impl MatrixFormat {
    /// `.csv` (any case) selects CSV, everything else binary.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => MatrixFormat::Csv,
            _ => MatrixFormat::Binary,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            MatrixFormat::Binary => "pcdm",
            MatrixFormat::Csv => "csv",
        }
    }
}

impl std::str::FromStr for MatrixFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bin" | "binary" | "pcdm" => Ok(MatrixFormat::Binary),
            "csv" => Ok(MatrixFormat::Csv),
            other => Err(Error::InvalidParameter(format!("unknown matrix format '{other}'"))),
        }
    }
}

pub fn read_matrix<T: Scalar>(path: impl AsRef<Path>) -> Result<DenseMatrix<T>> {
    let path = path.as_ref();
    read_matrix_as(path, MatrixFormat::from_path(path))
}

pub fn read_matrix_as<T: Scalar>(path: impl AsRef<Path>, format: MatrixFormat) -> Result<DenseMatrix<T>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let m = match format {
        MatrixFormat::Binary => decode_binary(&bytes),
        MatrixFormat::Csv => decode_csv(&bytes),
    };
    m.map_err(|(at, message)| Error::Parse { path: path.to_path_buf(), at, message })
}

pub fn write_matrix<T: Scalar>(a: &DenseMatrix<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    write_matrix_as(a, path, MatrixFormat::from_path(path))
}

pub fn write_matrix_as<T: Scalar>(a: &DenseMatrix<T>, path: impl AsRef<Path>, format: MatrixFormat) -> Result<()> {
    let path = path.as_ref();
    let bytes = match format {
        MatrixFormat::Binary => encode_binary(a),
        MatrixFormat::Csv => matrix_to_csv(a).into_bytes(),
    };
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn write_permutation(p: &[usize], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::with_capacity(p.len() * 4);
    for i in p {
        out.push_str(&i.to_string());
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_permutation(path: impl AsRef<Path>) -> Result<Permutation> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut entries = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v = line.parse::<usize>().map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            at: Location::Line { line: line_no + 1, column: 1 },
            message: e.to_string(),
        })?;
        entries.push(v);
    }
    Permutation::new(entries)
}

fn encode_binary<T: Scalar>(a: &DenseMatrix<T>) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * a.as_slice().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(a.rows() as u64).to_le_bytes());
    out.extend_from_slice(&(a.cols() as u64).to_le_bytes());
    for &v in a.as_slice() {
        out.extend_from_slice(&v.to_f64_lossy().to_le_bytes());
    }
    out
}

type Decoded<T> = std::result::Result<DenseMatrix<T>, (Location, String)>;

fn decode_binary<T: Scalar>(bytes: &[u8]) -> Decoded<T> {
    if bytes.len() < HEADER_LEN {
        return Err((Location::Byte(bytes.len() as u64), format!("header needs {HEADER_LEN} bytes")));
    }
    if &bytes[..4] != MAGIC {
        return Err((Location::Byte(0), "bad magic, expected \"PCDM\"".into()));
    }
    let word = |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().expect("8-byte slice"));
    let (rows, cols) = (word(4), word(12));
    let count = rows
        .checked_mul(cols)
        .and_then(|c| c.checked_mul(8))
        .ok_or((Location::Byte(4), format!("dimensions {rows}x{cols} overflow")))?;
    let payload = &bytes[HEADER_LEN..];
    if (payload.len() as u64) < count {
        return Err((
            Location::Byte(bytes.len() as u64),
            format!("truncated payload: {rows}x{cols} needs {count} bytes, found {}", payload.len()),
        ));
    }
    if payload.len() as u64 > count {
        return Err((Location::Byte(HEADER_LEN as u64 + count), "trailing bytes after payload".into()));
    }
    let data = payload
        .chunks_exact(8)
        .map(|c| T::from_f64_lossy(f64::from_le_bytes(c.try_into().expect("8-byte chunk"))))
        .collect();
    Ok(DenseMatrix { rows: rows as usize, cols: cols as usize, data })
}

/// CSV text of `a`, exactly as `write_matrix_as` writes it.
pub fn matrix_to_csv<T: Scalar>(a: &DenseMatrix<T>) -> String {
    let mut out = String::new();
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format_value(a[(i, j)].to_f64_lossy()));
        }
        out.push('\n');
    }
    out
}

/// 17 significant digits, enough to round-trip any binary64 value.
pub(crate) fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

fn decode_csv<T: Scalar>(bytes: &[u8]) -> Decoded<T> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| (Location::Byte(e.valid_up_to() as u64), "file is not valid UTF-8".to_string()))?;
    let mut rows: Vec<Vec<T>> = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut row = Vec::new();
        for (col, cell) in trimmed.split(',').enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| {
                (Location::Line { line: line_no + 1, column: col + 1 }, format!("'{}' is not a number", cell.trim()))
            })?;
            row.push(T::from_f64_lossy(v));
        }
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err((
                    Location::Line { line: line_no + 1, column: row.len().min(first.len()) + 1 },
                    format!("row has {} fields, expected {}", row.len(), first.len()),
                ));
            }
        }
        rows.push(row);
    }
    DenseMatrix::from_rows(&rows).map_err(|e| (Location::Line { line: 0, column: 0 }, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.pcdm");
        let a = DenseMatrix::from_rows(&[[1.5]]).unwrap();
        write_matrix(&a, &path).unwrap();
        let b: DenseMatrix<f64> = read_matrix(&path).unwrap();
        assert_eq!(b[(0, 0)].to_bits(), 1.5f64.to_bits());

        let bytes = fs::read(&path).unwrap();
        assert_eq!(&bytes[..4], b"PCDM");
        assert_eq!(bytes.len(), 28);
    }

    #[test]
    fn csv_definition() {
        let m: DenseMatrix<f64> = decode_csv(b"1,2\n3,4").unwrap();
        assert_eq!(m, DenseMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap());
        let with_comment: DenseMatrix<f64> = decode_csv(b"# seed=3\n1, 2\n\n3,4\n").unwrap();
        assert_eq!(with_comment, m);
    }

    #[test]
    fn bad_magic_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.pcdm");
        let mut bytes = encode_binary(&DenseMatrix::<f64>::identity(2));
        bytes[0] = b'X';
        fs::write(&path, bytes).unwrap();
        match read_matrix::<f64>(&path) {
            Err(Error::Parse { at: Location::Byte(0), .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn truncated_payload_reports_position() {
        let mut bytes = encode_binary(&DenseMatrix::<f64>::identity(2));
        bytes.truncate(bytes.len() - 3);
        let err = decode_binary::<f64>(&bytes).unwrap_err();
        assert_eq!(err.0, Location::Byte(bytes.len() as u64));
        assert!(decode_binary::<f64>(&bytes[..10]).is_err());
    }

    #[test]
    fn csv_errors_name_the_cell() {
        let err = decode_csv::<f64>(b"1,2\n3,x\n").unwrap_err();
        assert_eq!(err.0, Location::Line { line: 2, column: 2 });
        let ragged = decode_csv::<f64>(b"1,2\n3\n").unwrap_err();
        assert!(ragged.1.contains("expected 2"));
    }

    #[test]
    fn csv_keeps_seventeen_digits() {
        let v = 0.1f64 + 0.2;
        let s = format_value(v);
        assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits());
    }

    #[test]
    fn permutation_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("perm.txt");
        write_permutation(&[2, 0, 1], &path).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "2\n0\n1\n");
        assert_eq!(read_permutation(&path).unwrap().as_slice(), &[2, 0, 1]);
    }
}
