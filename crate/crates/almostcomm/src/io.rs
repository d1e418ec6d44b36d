//! File formats: the CMAT matrix text format and CSV emission with a
//! config-echo comment header.
//!
//! CMAT v1: first line `CMAT <n>`, then `n` lines of `n` whitespace-separated
//! tokens `re+imj` (for example `0.5-0.25j`). Values print with 17 significant
//! digits so a write/read round trip is bit exact.

use crate::linalg::ComplexMatrix;
use num_complex::Complex64;
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoFormatError {
    #[error("{path}:{line}: {what}")]
    Parse {
        path: String,
        line: usize,
        what: String,
    },
    #[error("dimension mismatch at {path}:{line}: expected {expected} tokens, got {got}")]
    DimensionMismatch {
        path: String,
        line: usize,
        expected: usize,
        got: usize,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_f64(x: f64) -> String {
    format!("{:.16e}", x)
}

/// One token `re+imj` / `re-imj`. The imaginary sign is split out so that
/// negative zero cannot produce a `+-` token.
pub fn format_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{}{}j", format_f64(z.re), sign, format_f64(z.im.abs()))
}

/// Parse `re`, `re+imj` or `re-imj`, with exponent-aware sign splitting.
pub fn parse_complex(token: &str) -> Option<Complex64> {
    let t = token.trim();
    if let Some(body) = t.strip_suffix('j').or_else(|| t.strip_suffix('J')) {
        // split at the last +/- that is not an exponent sign and not leading
        let bytes = body.as_bytes();
        let mut split = None;
        for i in (1..bytes.len()).rev() {
            let c = bytes[i];
            if c == b'+' || c == b'-' {
                let prev = bytes[i - 1];
                if prev != b'e' && prev != b'E' {
                    split = Some(i);
                    break;
                }
            }
        }
        let i = split?;
        let re: f64 = body[..i].parse().ok()?;
        let sign = if bytes[i] == b'+' { 1.0 } else { -1.0 };
        let im: f64 = body[i + 1..].parse().ok()?;
        Some(Complex64::new(re, sign * im))
    } else {
        let re: f64 = t.parse().ok()?;
        Some(Complex64::new(re, 0.0))
    }
}

/// Serialize a matrix in CMAT v1.
pub fn cmat_to_string(m: &ComplexMatrix) -> String {
    let n = m.nrows();
    let mut out = String::new();
    let _ = writeln!(out, "CMAT {n}");
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            row.push(format_complex(m[(i, j)]));
        }
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

pub fn write_cmat(path: &Path, m: &ComplexMatrix) -> Result<(), IoFormatError> {
    std::fs::write(path, cmat_to_string(m))?;
    Ok(())
}

pub fn cmat_from_str(text: &str, path: &str) -> Result<ComplexMatrix, IoFormatError> {
    let mut lines = text.lines().enumerate();
    let (first_no, first) = lines.next().ok_or_else(|| IoFormatError::Parse {
        path: path.to_string(),
        line: 1,
        what: "empty file".into(),
    })?;
    let n: usize = first
        .strip_prefix("CMAT")
        .map(str::trim)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| IoFormatError::Parse {
            path: path.to_string(),
            line: first_no + 1,
            what: format!("expected 'CMAT <n>' header, got '{first}'"),
        })?;
    let mut m = ComplexMatrix::zeros(n, n);
    let mut row = 0usize;
    for (line_no, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        if row >= n {
            return Err(IoFormatError::Parse {
                path: path.to_string(),
                line: line_no + 1,
                what: format!("more than {n} data rows"),
            });
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != n {
            return Err(IoFormatError::DimensionMismatch {
                path: path.to_string(),
                line: line_no + 1,
                expected: n,
                got: tokens.len(),
            });
        }
        for (j, tok) in tokens.iter().enumerate() {
            m[(row, j)] = parse_complex(tok).ok_or_else(|| IoFormatError::Parse {
                path: path.to_string(),
                line: line_no + 1,
                what: format!("bad complex token '{tok}'"),
            })?;
        }
        row += 1;
    }
    if row != n {
        return Err(IoFormatError::Parse {
            path: path.to_string(),
            line: text.lines().count(),
            what: format!("expected {n} data rows, got {row}"),
        });
    }
    Ok(m)
}

pub fn read_cmat(path: &Path) -> Result<ComplexMatrix, IoFormatError> {
    let text = std::fs::read_to_string(path)?;
    cmat_from_str(&text, &path.display().to_string())
}

/// CSV with `#`-prefixed comment header lines, a column header, and rows
/// printed at 12 significant digits. Deterministic: same rows, same bytes.
pub struct CsvWriter {
    buf: String,
    columns: usize,
}

impl CsvWriter {
    pub fn new(comments: &[String], columns: &[&str]) -> Self {
        let mut buf = String::new();
        for c in comments {
            let _ = writeln!(buf, "# {c}");
        }
        let _ = writeln!(buf, "{}", columns.join(","));
        Self {
            buf,
            columns: columns.len(),
        }
    }

    pub fn row(&mut self, cells: &[CsvCell]) {
        assert_eq!(cells.len(), self.columns, "row does not match schema");
        let rendered: Vec<String> = cells.iter().map(CsvCell::render).collect();
        let _ = writeln!(self.buf, "{}", rendered.join(","));
    }

    pub fn finish(self) -> String {
        self.buf
    }

    pub fn write(self, path: &Path) -> Result<(), IoFormatError> {
        std::fs::write(path, self.finish())?;
        Ok(())
    }
}

pub enum CsvCell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl CsvCell {
    fn render(&self) -> String {
        match self {
            CsvCell::Int(v) => v.to_string(),
            CsvCell::Float(v) => {
                if v.is_nan() {
                    "nan".to_string()
                } else {
                    format!("{:.11e}", v)
                }
            }
            CsvCell::Text(s) => s.clone(),
        }
    }
}
