use crate::error::LinalgError;
use crate::linalg::svd::singular_values;
use crate::matrix::Matrix;
use crate::scalar::{cast, to_f64, Scalar};

/// Pivots below `SINGULAR_PIVOT_TOL * ‖m‖∞` are treated as zero.
pub const SINGULAR_PIVOT_TOL: f64 = 1e-12;

fn require_square<T: Scalar>(m: &Matrix<T>) -> Result<usize, LinalgError> {
    let (rows, cols) = m.shape();
    if rows != cols {
        return Err(LinalgError::NotSquare { rows, cols });
    }
    Ok(rows)
}

/// Gauss-Jordan elimination with partial pivoting.
pub fn invert<T: Scalar>(m: &Matrix<T>) -> Result<Matrix<T>, LinalgError> {
    let n = require_square(m)?;
    let threshold = cast::<T>(SINGULAR_PIVOT_TOL) * m.inf_norm();
    let mut a = m.clone();
    let mut inv = Matrix::<T>::identity(n);

    for col in 0..n {
        let (piv_row, piv_abs) = (col..n)
            .map(|r| (r, a[(r, col)].abs()))
            .fold((col, -T::one()), |best, cur| if cur.1 > best.1 { cur } else { best });
        if piv_abs <= threshold || piv_abs == T::zero() {
            return Err(LinalgError::Singular {
                pivot: to_f64(piv_abs),
                threshold: to_f64(threshold),
            });
        }
        if piv_row != col {
            for j in 0..n {
                let tmp = a[(col, j)];
                a[(col, j)] = a[(piv_row, j)];
                a[(piv_row, j)] = tmp;
                let tmp = inv[(col, j)];
                inv[(col, j)] = inv[(piv_row, j)];
                inv[(piv_row, j)] = tmp;
            }
        }
        let p = T::one() / a[(col, col)];
        for j in 0..n {
            a[(col, j)] *= p;
            inv[(col, j)] *= p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[(r, col)];
            if f == T::zero() {
                continue;
            }
            for j in 0..n {
                let (ac, ic) = (a[(col, j)], inv[(col, j)]);
                a[(r, j)] -= f * ac;
                inv[(r, j)] -= f * ic;
            }
        }
    }
    Ok(inv)
}

/// Determinant by LU factorization with partial pivoting.
pub fn determinant<T: Scalar>(m: &Matrix<T>) -> Result<T, LinalgError> {
    let n = require_square(m)?;
    let mut a = m.clone();
    let mut det = T::one();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| {
                a[(x, col)]
                    .abs()
                    .partial_cmp(&a[(y, col)].abs())
                    .expect("finite")
            })
            .expect("non-empty range");
        if a[(piv, col)] == T::zero() {
            return Ok(T::zero());
        }
        if piv != col {
            for j in 0..n {
                let tmp = a[(col, j)];
                a[(col, j)] = a[(piv, j)];
                a[(piv, j)] = tmp;
            }
            det = -det;
        }
        let d = a[(col, col)];
        det *= d;
        for r in (col + 1)..n {
            let f = a[(r, col)] / d;
            for j in col..n {
                let v = a[(col, j)];
                a[(r, j)] -= f * v;
            }
        }
    }
    Ok(det)
}

/// Ratio of largest to smallest singular value; `+inf` when the smallest is 0.
pub fn condition_number<T: Scalar>(m: &Matrix<T>) -> Result<T, LinalgError> {
    require_square(m)?;
    let sv = singular_values(m)?;
    let max = sv[0];
    let min = *sv.last().expect("non-empty");
    if min == T::zero() {
        return Ok(T::infinity());
    }
    Ok(max / min)
}

/// `max |X Xᵀ - Id|`, the entrywise deviation from orthogonality.
pub fn orthogonality_error<T: Scalar>(x: &Matrix<T>) -> T {
    let xxt = x.matmul(&x.transpose()).expect("conformable");
    xxt.sub(&Matrix::identity(x.rows()))
        .expect("same shape")
        .max_abs()
}
