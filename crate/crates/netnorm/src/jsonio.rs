//! JSON encodings shared by report witnesses and the CLI instance files.
//!
//! Complex entries are explicit `[re, im]` pairs, row-major. Square
//! matrices carry `dim`; rectangular ones carry `rows`/`cols`.

use serde::{Deserialize, Serialize};

use crate::matlib::{CMatrix, HermitianMatrix, MatError};
use crate::scalar::{Scalar, C};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rows: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cols: Option<usize>,
    /// Row-major [re, im] pairs.
    pub entries: Vec<(f64, f64)>,
}

impl MatrixJson {
    pub fn shape(&self) -> Result<(usize, usize), MatError> {
        match (self.dim, self.rows, self.cols) {
            (Some(d), None, None) => Ok((d, d)),
            (None, Some(r), Some(c)) => Ok((r, c)),
            _ => Err(MatError::DimensionMismatch(
                "matrix needs either dim or rows+cols".into(),
            )),
        }
    }

    pub fn to_cmatrix<T: Scalar>(&self) -> Result<CMatrix<T>, MatError> {
        let (rows, cols) = self.shape()?;
        let mut data = Vec::with_capacity(rows * cols);
        for &(re, im) in &self.entries {
            if !re.is_finite() || !im.is_finite() {
                return Err(MatError::Parameter("non-finite matrix entry".into()));
            }
            data.push(C::new(T::c(re), T::c(im)));
        }
        CMatrix::from_rows(rows, cols, data)
    }

    pub fn to_hermitian<T: Scalar>(&self) -> Result<HermitianMatrix<T>, MatError> {
        HermitianMatrix::new(self.to_cmatrix()?)
    }

    pub fn from_cmatrix<T: Scalar>(m: &CMatrix<T>) -> Self {
        let entries = m
            .data()
            .iter()
            .map(|z| {
                (
                    z.re.to_f64().unwrap_or(f64::NAN),
                    z.im.to_f64().unwrap_or(f64::NAN),
                )
            })
            .collect();
        if m.is_square() {
            Self {
                dim: Some(m.rows()),
                rows: None,
                cols: None,
                entries,
            }
        } else {
            Self {
                dim: None,
                rows: Some(m.rows()),
                cols: Some(m.cols()),
                entries,
            }
        }
    }

    pub fn from_hermitian<T: Scalar>(m: &HermitianMatrix<T>) -> Self {
        Self::from_cmatrix(m.as_cmatrix())
    }
}
