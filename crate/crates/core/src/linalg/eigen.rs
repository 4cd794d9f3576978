use crate::error::LinalgError;
use crate::matrix::Matrix;
use crate::scalar::{cast, tol_floor, Scalar};

/// Sweep cap for the cyclic Jacobi iteration. Cyclic Jacobi converges
/// quadratically; random symmetric matrices up to 30x30 need well under 15.
pub const MAX_JACOBI_SWEEPS: usize = 100;

/// Relative symmetry tolerance accepted by [`sym_eigen`].
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Off-diagonal stopping threshold, relative to the Frobenius norm.
pub const OFFDIAG_TOL: f64 = 1e-12;

/// Eigen-decomposition of a symmetric matrix.
///
/// `values` are sorted in descending order and row `i` of `vectors` is the
/// unit eigenvector for `values[i]`, so that `Q M Qᵀ = diag(values)`.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenResult<T> {
    pub values: Vec<T>,
    pub vectors: Matrix<T>,
}

impl<T: Scalar> EigenResult<T> {
    /// `diag(values)`.
    pub fn d(&self) -> Matrix<T> {
        Matrix::diag(&self.values)
    }

    /// `Qᵀ D Q`, the matrix this decomposition describes.
    pub fn reconstruct(&self) -> Matrix<T> {
        let dq = Matrix::from_fn(self.vectors.rows(), self.vectors.cols(), |i, j| {
            self.values[i] * self.vectors[(i, j)]
        });
        self.vectors.tr_matmul(&dq).expect("square factors")
    }
}

/// Symmetric eigen-decomposition by cyclic Jacobi rotations.
///
/// Sweeps run in row-major pair order `(0,1), (0,2), …, (n-2,n-1)` until every
/// off-diagonal magnitude is at most `1e-12 * ‖m‖_F` (or a few machine
/// epsilons for `f32`). Each eigenvector's first non-negligible component is
/// made positive.
pub fn sym_eigen<T: Scalar>(m: &Matrix<T>) -> Result<EigenResult<T>, LinalgError> {
    let (values, vectors) = jacobi(m, true)?;
    let vectors = vectors.expect("vectors requested");
    let n = values.len();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).expect("finite eigenvalues"));

    let sorted_values: Vec<T> = order.iter().map(|&k| values[k]).collect();
    // Jacobi accumulates eigenvectors as columns; emit them as rows.
    let mut q = Matrix::from_fn(n, n, |i, j| vectors[(j, order[i])]);
    let negligible: T = tol_floor(1e-10);
    for i in 0..n {
        let lead = (0..n).map(|j| q[(i, j)]).find(|x| x.abs() > negligible);
        if matches!(lead, Some(x) if x < T::zero()) {
            for j in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    Ok(EigenResult {
        values: sorted_values,
        vectors: q,
    })
}

/// Eigenvalues only (descending). Skips eigenvector accumulation.
pub fn sym_eigenvalues<T: Scalar>(m: &Matrix<T>) -> Result<Vec<T>, LinalgError> {
    let (mut values, _) = jacobi(m, false)?;
    values.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
    Ok(values)
}

fn jacobi<T: Scalar>(
    m: &Matrix<T>,
    want_vectors: bool,
) -> Result<(Vec<T>, Option<Matrix<T>>), LinalgError> {
    let (rows, cols) = m.shape();
    if rows != cols {
        return Err(LinalgError::NotSquare { rows, cols });
    }
    if !m.is_symmetric(tol_floor(SYMMETRY_TOL)) {
        return Err(LinalgError::NotSymmetric);
    }
    let n = rows;
    let half: T = cast(0.5);
    let mut a = Matrix::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)]) * half);
    let mut v = want_vectors.then(|| Matrix::<T>::identity(n));

    let threshold = tol_floor::<T>(OFFDIAG_TOL) * a.frobenius();
    let mut converged = false;
    for _sweep in 0..MAX_JACOBI_SWEEPS {
        let mut off = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[(p, q)].abs());
            }
        }
        if off <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (apq + apq);
                let t = theta.signum() / (theta.abs() + theta.hypot(T::one()));
                let c = T::one() / t.hypot(T::one());
                let s = t * c;

                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = a[(r, p)];
                    let arq = a[(r, q)];
                    let new_rp = c * arp - s * arq;
                    let new_rq = s * arp + c * arq;
                    a[(r, p)] = new_rp;
                    a[(p, r)] = new_rp;
                    a[(r, q)] = new_rq;
                    a[(q, r)] = new_rq;
                }
                a[(p, p)] -= t * apq;
                a[(q, q)] += t * apq;
                a[(p, q)] = T::zero();
                a[(q, p)] = T::zero();

                if let Some(v) = v.as_mut() {
                    for r in 0..n {
                        let vrp = v[(r, p)];
                        let vrq = v[(r, q)];
                        v[(r, p)] = c * vrp - s * vrq;
                        v[(r, q)] = s * vrp + c * vrq;
                    }
                }
            }
        }
    }
    if !converged {
        return Err(LinalgError::NoConvergence {
            sweeps: MAX_JACOBI_SWEEPS,
        });
    }
    Ok((a.diagonal(), v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn two_by_two_analytic() {
        let m = Matrix::from_rows(&[[2.0, 1.0], [1.0, 2.0]]).unwrap();
        let e = sym_eigen(&m).unwrap();
        assert_abs_diff_eq!(e.values[0], 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.values[1], 1.0, epsilon = 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(e.vectors[(0, 0)], h, epsilon = 1e-14);
        assert_abs_diff_eq!(e.vectors[(0, 1)], h, epsilon = 1e-14);
        assert_abs_diff_eq!(e.vectors[(1, 0)], h, epsilon = 1e-14);
        assert_abs_diff_eq!(e.vectors[(1, 1)], -h, epsilon = 1e-14);
    }

    #[test]
    fn diagonal_input_gives_permutation() {
        let m = Matrix::diag(&[1.0, -4.0, 7.0, 2.0]);
        let e = sym_eigen(&m).unwrap();
        assert_eq!(e.values, vec![7.0, 2.0, 1.0, -4.0]);
        let expected_pos = [2, 3, 0, 1];
        for (i, &j) in expected_pos.iter().enumerate() {
            for k in 0..4 {
                let want = if k == j { 1.0 } else { 0.0 };
                assert_eq!(e.vectors[(i, k)], want);
            }
        }
    }

    #[test]
    fn zero_matrix() {
        let e = sym_eigen(&Matrix::<f64>::zeros(3, 3)).unwrap();
        assert_eq!(e.values, vec![0.0; 3]);
        assert_eq!(e.vectors, Matrix::identity(3));
    }

    #[test]
    fn rejects_non_symmetric_and_rectangular() {
        let m = Matrix::from_rows(&[[1.0, 2.0], [2.5, 1.0]]).unwrap();
        assert_eq!(sym_eigen(&m), Err(LinalgError::NotSymmetric));
        let r = Matrix::<f64>::zeros(2, 3);
        assert!(matches!(sym_eigen(&r), Err(LinalgError::NotSquare { .. })));
    }

    #[test]
    fn tiny_asymmetry_is_tolerated() {
        let m = Matrix::from_rows(&[[1.0, 2.0], [2.0 + 1e-15, 1.0]]).unwrap();
        assert!(sym_eigen(&m).is_ok());
    }

    #[test]
    fn sign_convention_and_reconstruction() {
        let m = Matrix::from_rows(&[
            [4.0, -2.0, 0.5],
            [-2.0, 1.0, 3.0],
            [0.5, 3.0, -1.0],
        ])
        .unwrap();
        let e = sym_eigen(&m).unwrap();
        for i in 0..3 {
            let lead = e.vectors.row(i).iter().find(|x: &&f64| x.abs() > 1e-10).unwrap();
            assert!(*lead > 0.0);
        }
        let back = e.reconstruct();
        for (a, b) in back.data().iter().zip(m.data()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        assert_eq!(sym_eigenvalues(&m).unwrap().len(), 3);
        for (a, b) in sym_eigenvalues(&m).unwrap().iter().zip(&e.values) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn single_precision() {
        let m = Matrix::<f32>::from_rows(&[[2.0f32, 1.0], [1.0, 2.0]]).unwrap();
        let e = sym_eigen(&m).unwrap();
        assert!((e.values[0] - 3.0).abs() < 1e-5);
        assert!((e.values[1] - 1.0).abs() < 1e-5);
    }
}
