//! Independent reference computations for the integration tests. Nothing
//! here calls the crate's solvers.
#![allow(dead_code, clippy::needless_range_loop)]

use linseq::Matrix;

fn rows_of(m: &Matrix<f64>) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

/// Number of eigenvalues of the symmetric `m` below `x`.
///
/// By interlacing, the sign changes along the leading principal minors
/// `p_0 = 1, p_1(x), ..., p_n(x)` of `m - xI` count the eigenvalues below `x`.
/// Each minor is a characteristic polynomial evaluated by a pivoted LU
/// determinant.
pub fn count_below(m: &Matrix<f64>, x: f64) -> usize {
    let n = m.rows();
    let shifted = Matrix::from_fn(n, n, |i, j| m[(i, j)] - if i == j { x } else { 0.0 });
    let mut prev = 1.0f64;
    let mut count = 0;
    for k in 1..=n {
        let p = lu_determinant(&Matrix::from_fn(k, k, |i, j| shifted[(i, j)]));
        let p = if p == 0.0 { -prev.signum() * f64::MIN_POSITIVE } else { p };
        if (p < 0.0) != (prev < 0.0) {
            count += 1;
        }
        prev = p;
    }
    count
}

/// Eigenvalues of a symmetric matrix by bisection on [`count_below`],
/// descending.
pub fn bisect_eigenvalues(m: &Matrix<f64>) -> Vec<f64> {
    let n = m.rows();
    let a = rows_of(m);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r: f64 = (0..n).filter(|&j| j != i).map(|j| a[i][j].abs()).sum();
        lo = lo.min(a[i][i] - r);
        hi = hi.max(a[i][i] + r);
    }
    lo -= 1.0;
    hi += 1.0;
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let (mut l, mut h) = (lo, hi);
        for _ in 0..200 {
            let mid = 0.5 * (l + h);
            if mid == l || mid == h {
                break;
            }
            if count_below(m, mid) > k {
                h = mid;
            } else {
                l = mid;
            }
        }
        out.push(0.5 * (l + h));
    }
    out.reverse();
    out
}

/// Determinant by LU with partial pivoting.
pub fn lu_determinant(m: &Matrix<f64>) -> f64 {
    let n = m.rows();
    let mut a = rows_of(m);
    let mut det = 1.0;
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[i][k].abs().partial_cmp(&a[j][k].abs()).unwrap())
            .unwrap();
        if a[p][k] == 0.0 {
            return 0.0;
        }
        if p != k {
            a.swap(p, k);
            det = -det;
        }
        det *= a[k][k];
        for i in (k + 1)..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
        }
    }
    det
}

/// Composite Simpson rule on `[a, b]` with `n` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Semicircle density with eigenvalue std `sigma`, written out directly.
pub fn semicircle(x: f64, sigma: f64) -> f64 {
    let r2 = 4.0 * sigma * sigma - x * x;
    if r2 <= 0.0 {
        0.0
    } else {
        r2.sqrt() / (2.0 * std::f64::consts::PI * sigma * sigma)
    }
}

/// `max |a - b|` over two slices.
pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// L1 norm of a slice.
pub fn l1(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).sum()
}
