use crate::error::LinalgError;
use crate::linalg::eigen::sym_eigenvalues;
use crate::matrix::Matrix;
use crate::scalar::{cast, Scalar};

/// Sweep cap for one-sided Jacobi.
pub const MAX_SVD_SWEEPS: usize = 100;

/// Singular value decomposition in the `S = U M V` convention.
///
/// For an `m x n` input, `u` is `m x m` with the left singular vectors as
/// rows, `v` is `n x n` with the right singular vectors as columns, and
/// `singular` holds the `min(m, n)` singular values in descending order.
#[derive(Clone, Debug, PartialEq)]
pub struct SvdResult<T> {
    pub singular: Vec<T>,
    pub u: Matrix<T>,
    pub v: Matrix<T>,
}

impl<T: Scalar> SvdResult<T> {
    /// The `m x n` diagonal matrix `S`.
    pub fn s(&self) -> Matrix<T> {
        Matrix::from_fn(self.u.rows(), self.v.rows(), |i, j| {
            if i == j {
                self.singular[i]
            } else {
                T::zero()
            }
        })
    }
}

/// Singular values as square roots of the eigenvalues of `MᵀM`, clamped at
/// zero, in descending order. Returns `n` values for an `m x n` input.
pub fn singular_values<T: Scalar>(m: &Matrix<T>) -> Result<Vec<T>, LinalgError> {
    let gram = m.tr_matmul(m)?;
    let eig = sym_eigenvalues(&gram)?;
    Ok(eig.into_iter().map(|x| x.max(T::zero()).sqrt()).collect())
}

/// SVD by one-sided (Hestenes) Jacobi orthogonalization of the columns.
///
/// Rotations are applied until every column pair satisfies
/// `|w_p · w_q| <= tol * ‖w_p‖ ‖w_q‖`, which keeps both factors orthogonal to
/// working precision regardless of conditioning.
pub fn svd<T: Scalar>(m: &Matrix<T>) -> Result<SvdResult<T>, LinalgError> {
    let (rows, cols) = m.shape();
    let (left, singular, right) = if rows >= cols {
        hestenes(m)?
    } else {
        let (l, s, r) = hestenes(&m.transpose())?;
        (r, s, l)
    };
    Ok(SvdResult {
        singular,
        u: left.transpose(),
        v: right,
    })
}

/// Returns `(L, sigma, R)` with `A = L Σ Rᵀ`; requires `rows >= cols`.
fn hestenes<T: Scalar>(a: &Matrix<T>) -> Result<(Matrix<T>, Vec<T>, Matrix<T>), LinalgError> {
    let (m, n) = a.shape();
    debug_assert!(m >= n);
    let mut w = a.clone();
    let mut r = Matrix::<T>::identity(n);
    let tol = T::epsilon() * cast(4.0 * m as f64);

    let mut converged = false;
    for _ in 0..MAX_SVD_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (mut alpha, mut beta, mut gamma) = (T::zero(), T::zero(), T::zero());
                for i in 0..m {
                    let (x, y) = (w[(i, p)], w[(i, q)]);
                    alpha += x * x;
                    beta += y * y;
                    gamma += x * y;
                }
                if alpha == T::zero() || beta == T::zero() {
                    continue;
                }
                if gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (gamma + gamma);
                let t = zeta.signum() / (zeta.abs() + zeta.hypot(T::one()));
                let c = T::one() / t.hypot(T::one());
                let s = c * t;
                for i in 0..m {
                    let (x, y) = (w[(i, p)], w[(i, q)]);
                    w[(i, p)] = c * x - s * y;
                    w[(i, q)] = s * x + c * y;
                }
                for i in 0..n {
                    let (x, y) = (r[(i, p)], r[(i, q)]);
                    r[(i, p)] = c * x - s * y;
                    r[(i, q)] = s * x + c * y;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(LinalgError::NoConvergence {
            sweeps: MAX_SVD_SWEEPS,
        });
    }

    let norms: Vec<T> = (0..n)
        .map(|j| (0..m).map(|i| w[(i, j)] * w[(i, j)]).sum::<T>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].partial_cmp(&norms[x]).expect("finite norms"));

    let sigma: Vec<T> = order.iter().map(|&j| norms[j]).collect();
    let right = Matrix::from_fn(n, n, |i, k| r[(i, order[k])]);

    let sigma_max = sigma.first().copied().unwrap_or(T::zero());
    let rank_tol = sigma_max * T::epsilon() * cast((m.max(n)) as f64);
    let mut basis: Vec<Vec<T>> = Vec::with_capacity(m);
    for (k, &j) in order.iter().enumerate() {
        if sigma[k] > rank_tol && sigma[k] > T::zero() {
            basis.push((0..m).map(|i| w[(i, j)] / sigma[k]).collect());
        } else {
            break;
        }
    }
    complete_basis(&mut basis, m);
    let left = Matrix::from_fn(m, m, |i, k| basis[k][i]);
    Ok((left, sigma, right))
}

/// Extend an orthonormal set of vectors in R^dim to a full basis, greedily
/// picking the standard basis vector with the largest residual.
fn complete_basis<T: Scalar>(basis: &mut Vec<Vec<T>>, dim: usize) {
    while basis.len() < dim {
        let mut best: Option<(T, Vec<T>)> = None;
        for e in 0..dim {
            let mut cand = vec![T::zero(); dim];
            cand[e] = T::one();
            // Two Gram-Schmidt passes.
            for _ in 0..2 {
                for b in basis.iter() {
                    let dot: T = cand.iter().zip(b).map(|(&x, &y)| x * y).sum();
                    for (c, &y) in cand.iter_mut().zip(b) {
                        *c -= dot * y;
                    }
                }
            }
            let norm = cand.iter().map(|&x| x * x).sum::<T>().sqrt();
            if best.as_ref().is_none_or(|(bn, _)| norm > *bn) {
                best = Some((norm, cand));
            }
        }
        let (norm, mut v) = best.expect("dim > 0");
        for x in v.iter_mut() {
            *x /= norm;
        }
        basis.push(v);
    }
}
