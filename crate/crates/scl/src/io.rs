//! File formats: matrices as JSON or CSV, curves as JSON, atomic writes.
//!
//! JSON numbers are serialized by `serde_json`, which emits the shortest
//! decimal string that round-trips the binary double, so write/read cycles
//! reproduce every entry exactly. The CSV cell format is `re+imi`
//! (for example `1.5-0.25i`); bare reals and bare imaginaries are accepted
//! on input.

use std::fs;
use std::io;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::ComplexMatrix;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("i/o failure: {0}")]
    Io(#[from] io::Error),
    #[error("json failure: {0}")]
    Json(#[from] serde_json::Error),
    #[error("parse failure at {place}: {detail}")]
    Parse { place: String, detail: String },
    #[error("shape mismatch: {detail}")]
    Shape { detail: String },
}

#[derive(Serialize, Deserialize)]
struct MatrixFile {
    n: usize,
    entries: Vec<(f64, f64)>,
}

/// Fourier data for a curve file: coefficient list plus center offset.
#[derive(Clone, Debug)]
pub struct CurveFileData {
    pub coeffs: Vec<(i64, Complex64)>,
    pub center: Complex64,
}

#[derive(Serialize, Deserialize)]
struct CurveFile {
    coeffs: Vec<(i64, f64, f64)>,
    #[serde(default)]
    center: Option<(f64, f64)>,
}

/// Serializes a matrix to the JSON form `{"n": ..., "entries": [[re,im],...]}`.
pub fn matrix_to_json(m: &ComplexMatrix) -> String {
    let file = MatrixFile {
        n: m.dim(),
        entries: m.entries().iter().map(|z| (z.re, z.im)).collect(),
    };
    serde_json::to_string_pretty(&file).expect("matrix serialization is infallible")
}

pub fn matrix_from_json(text: &str) -> Result<ComplexMatrix, IoError> {
    let file: MatrixFile = serde_json::from_str(text)?;
    if file.entries.len() != file.n * file.n {
        return Err(IoError::Shape {
            detail: format!(
                "expected {} entries for n = {}, got {}",
                file.n * file.n,
                file.n,
                file.entries.len()
            ),
        });
    }
    for (idx, (re, im)) in file.entries.iter().enumerate() {
        if !re.is_finite() || !im.is_finite() {
            return Err(IoError::Parse {
                place: format!("entry {idx}"),
                detail: "non-finite value".into(),
            });
        }
    }
    Ok(ComplexMatrix::new(
        file.n,
        file.entries
            .into_iter()
            .map(|(re, im)| Complex64::new(re, im))
            .collect(),
    ))
}

fn format_complex(z: Complex64) -> String {
    format!("{}{:+}i", z.re, z.im)
}

/// Parses one CSV cell: `a+bi`, `a-bi`, bare real `a`, or bare imaginary
/// `bi` (including `i` and `-i`).
pub fn parse_complex(cell: &str) -> Result<Complex64, String> {
    let t = cell.trim();
    if t.is_empty() {
        return Err("empty cell".into());
    }
    let Some(body) = t.strip_suffix(['i', 'I']) else {
        return t
            .parse::<f64>()
            .map(|re| Complex64::new(re, 0.0))
            .map_err(|e| format!("bad real number {t:?}: {e}"));
    };
    let bytes = body.as_bytes();
    let mut split = None;
    for idx in (1..bytes.len()).rev() {
        let c = bytes[idx];
        if (c == b'+' || c == b'-') && bytes[idx - 1] != b'e' && bytes[idx - 1] != b'E' {
            split = Some(idx);
            break;
        }
    }
    let (re_str, im_str) = match split {
        Some(idx) => (&body[..idx], &body[idx..]),
        None => ("", body),
    };
    let re = if re_str.is_empty() {
        0.0
    } else {
        re_str
            .parse::<f64>()
            .map_err(|e| format!("bad real part {re_str:?}: {e}"))?
    };
    let im = match im_str {
        "" | "+" => 1.0,
        "-" => -1.0,
        _ => im_str
            .parse::<f64>()
            .map_err(|e| format!("bad imaginary part {im_str:?}: {e}"))?,
    };
    Ok(Complex64::new(re, im))
}

/// Serializes a matrix as CSV, one row per line, cells in `re+imi` form.
pub fn matrix_to_csv(m: &ComplexMatrix) -> String {
    let n = m.dim();
    let mut out = String::new();
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| format_complex(m.get(i, j))).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn matrix_from_csv(text: &str) -> Result<ComplexMatrix, IoError> {
    let rows: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    let n = rows.len();
    if n == 0 {
        return Err(IoError::Shape {
            detail: "no rows".into(),
        });
    }
    let mut data = Vec::with_capacity(n * n);
    for (i, row) in rows.iter().enumerate() {
        let cells: Vec<&str> = row.split(',').collect();
        if cells.len() != n {
            return Err(IoError::Shape {
                detail: format!("row {i} has {} cells, expected {n}", cells.len()),
            });
        }
        for (j, cell) in cells.iter().enumerate() {
            let z = parse_complex(cell).map_err(|detail| IoError::Parse {
                place: format!("row {i}, column {j}"),
                detail,
            })?;
            data.push(z);
        }
    }
    Ok(ComplexMatrix::new(n, data))
}

/// Reads a matrix, choosing the format from the file extension
/// (`.json` or `.csv`).
pub fn read_matrix(path: &Path) -> Result<ComplexMatrix, IoError> {
    let text = fs::read_to_string(path)?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => matrix_from_csv(&text),
        _ => matrix_from_json(&text),
    }
}

pub fn write_matrix(path: &Path, m: &ComplexMatrix) -> Result<(), IoError> {
    let bytes = match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => matrix_to_csv(m),
        _ => matrix_to_json(m),
    };
    atomic_write(path, bytes.as_bytes())?;
    Ok(())
}

pub fn curve_to_json(data: &CurveFileData) -> String {
    let file = CurveFile {
        coeffs: data.coeffs.iter().map(|(k, c)| (*k, c.re, c.im)).collect(),
        center: Some((data.center.re, data.center.im)),
    };
    serde_json::to_string_pretty(&file).expect("curve serialization is infallible")
}

pub fn curve_from_json(text: &str) -> Result<CurveFileData, IoError> {
    let file: CurveFile = serde_json::from_str(text)?;
    let center = file
        .center
        .map(|(re, im)| Complex64::new(re, im))
        .unwrap_or(Complex64::new(0.0, 0.0));
    let coeffs = file
        .coeffs
        .into_iter()
        .map(|(k, re, im)| (k, Complex64::new(re, im)))
        .collect();
    Ok(CurveFileData { coeffs, center })
}

pub fn read_curve(path: &Path) -> Result<CurveFileData, IoError> {
    curve_from_json(&fs::read_to_string(path)?)
}

/// Writes through a temp file in the same directory and renames into place,
/// so a crash never leaves a half-written output.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => Path::new(".").to_path_buf(),
    };
    let stem = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    let tmp = dir.join(format!(".{stem}.tmp-{}", std::process::id()));
    fs::write(&tmp, bytes)?;
    match fs::rename(&tmp, path) {
        Ok(()) => Ok(()),
        Err(e) => {
            let _ = fs::remove_file(&tmp);
            Err(e)
        }
    }
}
