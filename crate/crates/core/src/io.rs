//! JSON encoding of complex matrices.
//!
//! Matrices are row-major nested arrays. Each entry is a `[re, im]` pair; a
//! bare number is accepted on input as a real entry. Output always uses pairs.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMat;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Pair([f64; 2]),
    Real(f64),
}

impl From<Entry> for Complex64 {
    fn from(e: Entry) -> Self {
        match e {
            Entry::Pair([re, im]) => Complex64::new(re, im),
            Entry::Real(re) => Complex64::new(re, 0.0),
        }
    }
}

impl From<Complex64> for Entry {
    fn from(z: Complex64) -> Self {
        Entry::Pair([z.re, z.im])
    }
}

/// A matrix as it appears in JSON documents.
pub type RawMatrix = Vec<Vec<Entry>>;

/// Convert a raw matrix, checking that it has `rows × cols` entries.
///
/// A matrix with zero rows is written `[]`; a matrix with zero columns is a
/// list of `rows` empty arrays (an empty list is also accepted).
pub fn matrix_from_raw(raw: &RawMatrix, rows: usize, cols: usize, name: &str) -> Result<CMat> {
    let shape_err = |msg: String| Error::InvalidConfig {
        field: name.to_string(),
        message: msg,
    };
    if cols == 0 && raw.is_empty() {
        return Ok(CMat::zeros(rows, 0));
    }
    if raw.len() != rows {
        return Err(shape_err(format!(
            "expected {rows} rows, found {}",
            raw.len()
        )));
    }
    let mut m = CMat::zeros(rows, cols);
    for (i, row) in raw.iter().enumerate() {
        if row.len() != cols {
            return Err(shape_err(format!(
                "row {i}: expected {cols} entries, found {}",
                row.len()
            )));
        }
        for (j, e) in row.iter().enumerate() {
            m[(i, j)] = (*e).into();
        }
    }
    Ok(m)
}

/// Convert a raw square matrix of any size.
pub fn square_from_raw(raw: &RawMatrix, name: &str) -> Result<CMat> {
    let n = raw.len();
    matrix_from_raw(raw, n, n, name)
}

pub fn matrix_to_raw(m: &CMat) -> RawMatrix {
    m.row_iter()
        .map(|row| row.iter().map(|z| Entry::from(*z)).collect())
        .collect()
}

pub fn matrix_to_json(m: &CMat) -> serde_json::Value {
    serde_json::to_value(matrix_to_raw(m)).expect("matrix serializes")
}

pub fn complex_to_json(z: Complex64) -> serde_json::Value {
    serde_json::json!([z.re, z.im])
}

/// Read a square matrix file in the shared matrix format.
pub fn read_matrix_file(path: &Path) -> Result<CMat> {
    let text = std::fs::read_to_string(path)?;
    let raw: RawMatrix = serde_json::from_str(&text).map_err(|e| Error::ConfigParse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    square_from_raw(&raw, "matrix")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs_and_bare_numbers() {
        let raw: RawMatrix = serde_json::from_str("[[1, [0.5, -2]], [[0.5, -2], 3.25]]").unwrap();
        let m = square_from_raw(&raw, "m").unwrap();
        assert_eq!(m[(0, 0)], Complex64::new(1.0, 0.0));
        assert_eq!(m[(0, 1)], Complex64::new(0.5, -2.0));
        assert_eq!(m[(1, 1)], Complex64::new(3.25, 0.0));
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let raw: RawMatrix = serde_json::from_str("[[1, 2], [3]]").unwrap();
        assert!(square_from_raw(&raw, "m").is_err());
    }

    #[test]
    fn zero_column_matrices() {
        let m = matrix_from_raw(&vec![vec![], vec![]], 2, 0, "m").unwrap();
        assert_eq!(m.shape(), (2, 0));
        let m = matrix_from_raw(&vec![], 3, 0, "m").unwrap();
        assert_eq!(m.shape(), (3, 0));
    }

    #[test]
    fn output_round_trips() {
        let m = CMat::from_row_slice(1, 2, &[Complex64::new(1.0, 2.0), Complex64::new(-0.5, 0.0)]);
        let text = serde_json::to_string(&matrix_to_raw(&m)).unwrap();
        assert_eq!(text, "[[[1.0,2.0],[-0.5,0.0]]]");
        let back: RawMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(matrix_from_raw(&back, 1, 2, "m").unwrap(), m);
    }
}
