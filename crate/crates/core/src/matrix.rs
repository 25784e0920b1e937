//! Dense column-stochastic matrices.

use ndarray::Array2;

use crate::error::{Error, Result};

/// Absolute tolerance on column sums.
pub const STOCHASTIC_TOLERANCE: f64 = 1e-9;

/// A non-negative matrix whose columns each sum to one. Column `j` is the
/// output distribution for input `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix(Array2<f64>);

impl StochasticMatrix {
    pub fn new(matrix: Array2<f64>) -> Result<Self> {
        if let Some((j, sum)) = stochastic_defects(&matrix).into_iter().next() {
            return Err(Error::NotDistribution(format!("column {j} sums to {sum}")));
        }
        Ok(StochasticMatrix(matrix))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(array_from_rows(rows)?)
    }

    /// Column-constant point mass on `value` with a single input column.
    pub fn point_mass(size: usize, value: usize) -> Self {
        let mut m = Array2::zeros((size, 1));
        m[[value, 0]] = 1.0;
        StochasticMatrix(m)
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn into_array(self) -> Array2<f64> {
        self.0
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.0.rows().into_iter().map(|r| r.to_vec()).collect()
    }
}

/// Builds a dense matrix from row vectors, rejecting ragged input.
pub fn array_from_rows(rows: &[Vec<f64>]) -> Result<Array2<f64>> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Shape("matrix rows have unequal length".into()));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Array2::from_shape_vec((rows.len(), ncols), flat).map_err(|e| Error::Shape(e.to_string()))
}

/// Columns that are not probability vectors, with their sums. Negative
/// entries make the column defective regardless of its sum.
pub fn stochastic_defects(m: &Array2<f64>) -> Vec<(usize, f64)> {
    m.columns()
        .into_iter()
        .enumerate()
        .filter_map(|(j, col)| {
            let sum: f64 = col.sum();
            let bad = (sum - 1.0).abs() > STOCHASTIC_TOLERANCE
                || col
                    .iter()
                    .any(|&x| !(0.0..=1.0 + STOCHASTIC_TOLERANCE).contains(&x));
            bad.then_some((j, sum))
        })
        .collect()
}

pub fn identity(n: usize) -> Array2<f64> {
    Array2::eye(n)
}

/// Kronecker product of a sequence of matrices (the empty product is `[[1]]`).
pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a Array2<f64>>) -> Array2<f64> {
    factors.into_iter().fold(Array2::ones((1, 1)), |acc, f| {
        ndarray::linalg::kron(&acc, f)
    })
}
