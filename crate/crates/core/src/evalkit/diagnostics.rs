use serde::Serialize;

use crate::error::LinalgError;
use crate::linalg::{condition_number, invert};
use crate::matrix::{Matrix, Norm};

/// Predicted eigenvector matrices with `cond(H)` at most this are treated as
/// orthogonal.
pub const ORTHOGONAL_COND_MAX: f64 = 1.035;
/// Predicted eigenvector matrices with `cond(H)` at least this are treated as
/// distorted.
pub const DISTORTED_COND_MIN: f64 = 1.04;
/// Inputs with a condition number above this are ill-conditioned for
/// inversion.
pub const ILL_CONDITIONED: f64 = 51.5;

/// Where a predicted eigenvector matrix falls by its condition number.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CondBucket {
    Orthogonal,
    Between,
    Distorted,
}

impl CondBucket {
    pub fn of(cond: f64) -> Self {
        if cond <= ORTHOGONAL_COND_MAX {
            CondBucket::Orthogonal
        } else if cond >= DISTORTED_COND_MIN {
            CondBucket::Distorted
        } else {
            CondBucket::Between
        }
    }
}

/// Failure analysis of a predicted `(D, H)` pair, `H` holding eigenvectors as
/// rows.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigvecDiagnostics {
    /// L1 relative error of the predicted eigenvalues.
    pub eigenvalue_error: f64,
    pub row_norms: Vec<f64>,
    /// Dot products of rows `i` and `i+1`.
    pub successive_dots: Vec<f64>,
    /// `‖HᵀDH - I‖₁ / ‖I‖₁`.
    pub weak_residual: f64,
    pub cond: f64,
}

impl EigvecDiagnostics {
    pub fn bucket(&self) -> CondBucket {
        CondBucket::of(self.cond)
    }
}

pub fn eigvec_diagnostics(
    input: &Matrix<f64>,
    values: &[f64],
    h: &Matrix<f64>,
    true_values: &[f64],
) -> Result<EigvecDiagnostics, LinalgError> {
    let n = h.rows();
    if values.len() != n || true_values.len() != n || !h.is_square() || input.shape() != h.shape() {
        return Err(LinalgError::Shape(format!(
            "{} predicted and {} true eigenvalues with a {}x{} eigenvector matrix for a {}x{} input",
            values.len(),
            true_values.len(),
            h.rows(),
            h.cols(),
            input.rows(),
            input.cols()
        )));
    }
    let eigenvalue_error = super::rel_error(&Matrix::column(values), &Matrix::column(true_values), Norm::L1)?;
    let row_norms = (0..n).map(|i| dot(h.row(i), h.row(i)).sqrt()).collect();
    let successive_dots = (1..n).map(|i| dot(h.row(i - 1), h.row(i))).collect();
    let dh = Matrix::from_fn(n, n, |i, j| values[i] * h[(i, j)]);
    let weak = h.tr_matmul(&dh)?.sub(input)?.norm(Norm::L1);
    let input_norm = input.norm(Norm::L1);
    let weak_residual = if weak == 0.0 { 0.0 } else { weak / input_norm };
    Ok(EigvecDiagnostics {
        eigenvalue_error,
        row_norms,
        successive_dots,
        weak_residual,
        cond: condition_number(h)?,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Failure analysis of a predicted inverse.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InverseDiagnostics {
    /// `‖PI - Id‖₁ / n`.
    pub residual: f64,
    /// `‖P - I⁻¹‖₁ / ‖I⁻¹‖₁`.
    pub distance: f64,
    /// Condition number of the input.
    pub cond: f64,
}

impl InverseDiagnostics {
    pub fn ill_conditioned(&self) -> bool {
        self.cond > ILL_CONDITIONED
    }
}

pub fn inverse_diagnostics(input: &Matrix<f64>, p: &Matrix<f64>) -> Result<InverseDiagnostics, LinalgError> {
    let inv = invert(input)?;
    let n = input.rows();
    let residual = p.matmul(input)?.sub(&Matrix::identity(n))?.norm(Norm::L1) / n as f64;
    Ok(InverseDiagnostics {
        residual,
        distance: super::rel_error(p, &inv, Norm::L1)?,
        cond: condition_number(input)?,
    })
}
