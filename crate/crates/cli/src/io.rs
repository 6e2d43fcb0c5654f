//! Matrix and subspace files.
//!
//! CSV is a headerless numeric grid (blank lines and `#` comments are
//! skipped). JSON is `{"rows": r, "cols": c, "data": [row-major values]}`.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use nwidth::linalg::orthonormalize_columns;
use nwidth::{Matrix, Subspace, TolerancePolicy};
use serde::Deserialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: line {line}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        column: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] nwidth::Error),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn is_json(path: &Path, text: &str) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) || text.trim_start().starts_with('{')
}

fn parse_json(path: &Path, text: &str) -> Result<DMatrix<f64>, CliError> {
    let m: JsonMatrix = serde_json::from_str(text).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        line: e.line() as u64,
        column: e.column(),
        message: e.to_string(),
    })?;
    if m.data.len() != m.rows * m.cols {
        return Err(CliError::Format {
            path: path.to_path_buf(),
            message: format!(
                "data has {} entries, expected rows * cols = {}",
                m.data.len(),
                m.rows * m.cols
            ),
        });
    }
    Ok(DMatrix::from_row_slice(m.rows, m.cols, &m.data))
}

fn parse_csv(path: &Path, text: &str) -> Result<DMatrix<f64>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<(usize, u64)> = None;
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Parse {
            path: path.to_path_buf(),
            line: e.position().map_or(0, |p| p.line()),
            column: 0,
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let mut row = Vec::with_capacity(record.len());
        for (col, field) in record.iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| CliError::Parse {
                path: path.to_path_buf(),
                line,
                column: col + 1,
                message: format!("cannot parse {field:?} as a number"),
            })?;
            if !value.is_finite() {
                return Err(CliError::Parse {
                    path: path.to_path_buf(),
                    line,
                    column: col + 1,
                    message: format!("non-finite value {field:?}"),
                });
            }
            row.push(value);
        }
        match width {
            None => width = Some((row.len(), line)),
            Some((w, first)) if w != row.len() => {
                return Err(CliError::Parse {
                    path: path.to_path_buf(),
                    line,
                    column: row.len().min(w) + 1,
                    message: format!("row has {} fields, line {first} has {w}", row.len()),
                })
            }
            _ => {}
        }
        rows.push(row);
    }
    let cols = width.map_or(0, |(w, _)| w);
    if rows.is_empty() {
        return Err(CliError::Format {
            path: path.to_path_buf(),
            message: "no data rows".into(),
        });
    }
    Ok(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

/// Any numeric grid, CSV or JSON.
pub fn read_grid(path: &Path) -> Result<DMatrix<f64>, CliError> {
    let text = read_text(path)?;
    if is_json(path, &text) {
        parse_json(path, &text)
    } else {
        parse_csv(path, &text)
    }
}

pub fn read_matrix(path: &Path) -> Result<Matrix, CliError> {
    let grid = read_grid(path)?;
    if grid.nrows() != grid.ncols() {
        return Err(CliError::Format {
            path: path.to_path_buf(),
            message: format!("matrix is {}x{}, expected square", grid.nrows(), grid.ncols()),
        });
    }
    Ok(Matrix::new(grid)?)
}

/// An `m x n` basis file, orthonormalized on load. Returns the subspace and
/// the largest entry change made by orthonormalization.
pub fn read_subspace(path: &Path, m: usize, tol: &TolerancePolicy) -> Result<(Subspace, f64), CliError> {
    let grid = read_grid(path)?;
    if grid.nrows() != m {
        return Err(CliError::Format {
            path: path.to_path_buf(),
            message: format!("basis has {} rows, the matrix is {m}x{m}", grid.nrows()),
        });
    }
    let ortho = orthonormalize_columns(&grid, tol)?;
    if !ortho.dropped.is_empty() {
        return Err(CliError::Format {
            path: path.to_path_buf(),
            message: format!("basis columns {:?} are linearly dependent", ortho.dropped),
        });
    }
    let change = (ortho.subspace.basis() - &grid).amax();
    if change > tol.tol_orth {
        eprintln!(
            "warning: {}: basis orthonormalized on load (largest entry change {change:e})",
            path.display()
        );
    }
    Ok((ortho.subspace, change))
}

/// CSV with shortest round-trip float formatting.
pub fn write_matrix(path: &Path, a: &Matrix) -> Result<(), CliError> {
    let mut out = String::new();
    for row in a.to_rows() {
        let fields: Vec<String> = row.iter().map(|x| format!("{x:?}")).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn parse_list(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::Usage(format!("cannot parse {s:?} in list {text:?}")))
        })
        .collect()
}
