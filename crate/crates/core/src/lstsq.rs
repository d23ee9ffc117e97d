//! Streaming ordinary least squares via the normal equations.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Accumulates `X'X` and `X'y` one row at a time.
pub(crate) struct NormalEquations {
    xtx: DMatrix<f64>,
    xty: DVector<f64>,
}

impl NormalEquations {
    pub fn new(columns: usize) -> Self {
        Self {
            xtx: DMatrix::zeros(columns, columns),
            xty: DVector::zeros(columns),
        }
    }

    pub fn push(&mut self, row: &[f64], y: f64) {
        let k = row.len();
        for a in 0..k {
            if row[a] == 0.0 {
                continue;
            }
            self.xty[a] += row[a] * y;
            for b in a..k {
                self.xtx[(a, b)] += row[a] * row[b];
            }
        }
    }

    /// Minimum-norm least-squares coefficients. Columns the data cannot
    /// identify get the pseudo-inverse treatment instead of an error.
    pub fn solve(mut self) -> Result<DVector<f64>> {
        let k = self.xty.len();
        for a in 0..k {
            for b in 0..a {
                self.xtx[(a, b)] = self.xtx[(b, a)];
            }
        }
        let scale = (0..k).map(|i| self.xtx[(i, i)]).fold(0.0f64, f64::max);
        let eps = scale.max(1.0) * 1e-12;
        self.xtx
            .svd(true, true)
            .solve(&self.xty, eps)
            .map_err(|_| Error::SingularSystem)
    }
}
