//! Matrices as token sequences: `V<rows> V<cols>` followed by the rounded
//! coefficients in row-major order, plus the operand and result stacking
//! used by the task layouts.

use thiserror::Error;

use crate::error::LinalgError;
use crate::matrix::Matrix;
use crate::numcodec::{dim_token, CodecError, EncodingScheme, ParseError, ParseErrorKind};
use crate::scalar::{to_f64, Scalar};

/// How a matrix is laid out as tokens.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SequenceLayout {
    pub scheme: EncodingScheme,
    pub emit_dims: bool,
}

impl SequenceLayout {
    pub fn new(scheme: EncodingScheme) -> Self {
        SequenceLayout {
            scheme,
            emit_dims: true,
        }
    }

    /// Token count of a `rows x cols` matrix.
    pub fn token_len(&self, rows: usize, cols: usize) -> usize {
        let dims = if self.emit_dims { 2 } else { 0 };
        dims + rows * cols * self.scheme.arity()
    }
}

impl From<EncodingScheme> for SequenceLayout {
    fn from(scheme: EncodingScheme) -> Self {
        SequenceLayout::new(scheme)
    }
}

/// A coefficient that could not be encoded.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("coefficient ({row}, {col}) = {value}: {source}")]
pub struct EncodeError {
    pub row: usize,
    pub col: usize,
    pub value: f64,
    pub source: CodecError,
}

/// Round every coefficient to the scheme's precision.
pub fn round_matrix<T: Scalar>(m: &Matrix<T>, scheme: &EncodingScheme) -> Result<Matrix<f64>, EncodeError> {
    let (rows, cols) = m.shape();
    let mut data = Vec::with_capacity(rows * cols);
    for (k, &x) in m.data().iter().enumerate() {
        let value = to_f64(x);
        let t = scheme.round(value).map_err(|source| EncodeError {
            row: k / cols,
            col: k % cols,
            value,
            source,
        })?;
        data.push(t.to_f64());
    }
    Ok(Matrix::new(rows, cols, data).expect("rounded coefficients are finite"))
}

pub fn matrix_to_tokens<T: Scalar>(m: &Matrix<T>, layout: &SequenceLayout) -> Result<Vec<String>, EncodeError> {
    let mut out = Vec::with_capacity(layout.token_len(m.rows(), m.cols()));
    append_matrix_tokens(m, layout, &mut out)?;
    Ok(out)
}

/// Append the tokens of `m` to `out`; on error `out` may hold a partial prefix.
pub fn append_matrix_tokens<T: Scalar>(
    m: &Matrix<T>,
    layout: &SequenceLayout,
    out: &mut Vec<String>,
) -> Result<(), EncodeError> {
    let (rows, cols) = m.shape();
    if layout.emit_dims {
        out.push(dim_token(rows));
        out.push(dim_token(cols));
    }
    let scheme = &layout.scheme;
    for (k, &x) in m.data().iter().enumerate() {
        let value = to_f64(x);
        scheme
            .round(value)
            .and_then(|t| scheme.encode_into(&t, out))
            .map_err(|source| EncodeError {
                row: k / cols,
                col: k % cols,
                value,
                source,
            })?;
    }
    Ok(())
}

/// Parse a full sequence back into a matrix. Trailing tokens are an error.
pub fn tokens_to_matrix<S: AsRef<str>>(toks: &[S], layout: &SequenceLayout) -> Result<Matrix<f64>, ParseError> {
    if !layout.emit_dims {
        return Err(ParseError::new(0, ParseErrorKind::MissingDimensions));
    }
    let rows = parse_dim(toks, 0)?;
    let cols = parse_dim(toks, 1)?;
    parse_body(&toks[2..], rows, cols, &layout.scheme).map_err(|e| e.offset(2))
}

/// Parse a sequence of known shape, with or without leading dimension tokens
/// as the layout says. Dimension tokens that disagree with the shape are an
/// error.
pub fn tokens_to_matrix_shaped<S: AsRef<str>>(
    toks: &[S],
    rows: usize,
    cols: usize,
    layout: &SequenceLayout,
) -> Result<Matrix<f64>, ParseError> {
    if !layout.emit_dims {
        return parse_body(toks, rows, cols, &layout.scheme);
    }
    let m = tokens_to_matrix(toks, layout)?;
    if m.shape() != (rows, cols) {
        return Err(ParseError::new(
            0,
            ParseErrorKind::Shape(format!(
                "expected {rows}x{cols}, got {}x{}",
                m.rows(),
                m.cols()
            )),
        ));
    }
    Ok(m)
}

fn parse_dim<S: AsRef<str>>(toks: &[S], pos: usize) -> Result<usize, ParseError> {
    let tok = toks
        .get(pos)
        .ok_or_else(|| ParseError::new(pos, ParseErrorKind::MissingDimensions))?
        .as_ref();
    let digits = tok
        .strip_prefix('V')
        .ok_or_else(|| ParseError::new(pos, ParseErrorKind::MissingDimensions))?;
    digits
        .parse::<usize>()
        .ok()
        .filter(|&n| n >= 1 && n.to_string() == digits)
        .ok_or_else(|| ParseError::unknown(pos, tok))
}

fn parse_body<S: AsRef<str>>(
    toks: &[S],
    rows: usize,
    cols: usize,
    scheme: &EncodingScheme,
) -> Result<Matrix<f64>, ParseError> {
    let arity = scheme.arity();
    let count = rows.checked_mul(cols).filter(|&c| c > 0);
    let needed = count.and_then(|c| c.checked_mul(arity));
    let (count, needed) = match (count, needed) {
        (Some(c), Some(n)) => (c, n),
        _ => {
            return Err(ParseError::new(
                0,
                ParseErrorKind::Shape(format!("unsupported shape {rows}x{cols}")),
            ))
        }
    };
    if toks.len() < needed {
        return Err(ParseError::new(
            toks.len(),
            ParseErrorKind::ElementCount {
                expected: count,
                got: toks.len() / arity,
            },
        ));
    }
    if toks.len() > needed {
        return Err(ParseError::new(needed, ParseErrorKind::TrailingTokens(toks.len() - needed)));
    }
    let mut data = Vec::with_capacity(count);
    for (k, chunk) in toks.chunks_exact(arity).enumerate() {
        let t = scheme.decode(chunk).map_err(|e| e.offset(k * arity))?;
        data.push(t.to_f64());
    }
    Ok(Matrix::new(rows, cols, data).expect("decoded coefficients are finite"))
}

/// Direction along which operands are joined.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    /// Stack vertically; column counts must agree.
    Rows,
    /// Place side by side; row counts must agree.
    Cols,
}

pub fn concat_operands<T: Scalar>(ms: &[Matrix<T>], axis: Axis) -> Result<Matrix<T>, LinalgError> {
    let first = ms
        .first()
        .ok_or_else(|| LinalgError::Shape("nothing to concatenate".into()))?;
    match axis {
        Axis::Rows => {
            let cols = first.cols();
            if let Some(bad) = ms.iter().find(|m| m.cols() != cols) {
                return Err(LinalgError::Shape(format!(
                    "cannot stack {} columns under {cols}",
                    bad.cols()
                )));
            }
            let rows = ms.iter().map(Matrix::rows).sum();
            let data = ms.iter().flat_map(|m| m.data().iter().copied()).collect();
            Matrix::new(rows, cols, data)
        }
        Axis::Cols => {
            let rows = first.rows();
            if let Some(bad) = ms.iter().find(|m| m.rows() != rows) {
                return Err(LinalgError::Shape(format!(
                    "cannot join {} rows beside {rows}",
                    bad.rows()
                )));
            }
            let cols = ms.iter().map(Matrix::cols).sum();
            let mut data = Vec::with_capacity(rows * cols);
            for i in 0..rows {
                for m in ms {
                    data.extend_from_slice(m.row(i));
                }
            }
            Matrix::new(rows, cols, data)
        }
    }
}

/// Split a matrix into consecutive column blocks of the given widths.
pub fn split_cols<T: Scalar>(m: &Matrix<T>, widths: &[usize]) -> Result<Vec<Matrix<T>>, LinalgError> {
    if widths.iter().sum::<usize>() != m.cols() || widths.contains(&0) {
        return Err(LinalgError::Shape(format!(
            "column widths {widths:?} do not partition {} columns",
            m.cols()
        )));
    }
    let mut start = 0;
    Ok(widths
        .iter()
        .map(|&w| {
            let block = m.col_block(start, start + w);
            start += w;
            block
        })
        .collect())
}

/// `(n+1) x n` eigen output: sorted eigenvalues, then the eigenvector rows.
pub fn stack_eigen<T: Scalar>(values: &[T], q: &Matrix<T>) -> Result<Matrix<T>, LinalgError> {
    if q.rows() != values.len() || !q.is_square() {
        return Err(LinalgError::Shape(format!(
            "{} eigenvalues with a {}x{} eigenvector matrix",
            values.len(),
            q.rows(),
            q.cols()
        )));
    }
    concat_operands(&[Matrix::row_vector(values), q.clone()], Axis::Rows)
}

/// Inverse of [`stack_eigen`]: `(values, Q)`.
pub fn split_eigen<T: Scalar>(out: &Matrix<T>) -> Result<(Vec<T>, Matrix<T>), LinalgError> {
    let n = out.cols();
    if out.rows() != n + 1 {
        return Err(LinalgError::Shape(format!(
            "eigen output must be {}x{n}, got {}x{n}",
            n + 1,
            out.rows()
        )));
    }
    Ok((out.row(0).to_vec(), out.row_block(1, n + 1)))
}

/// `(m+n+1) x k` SVD output for an `m x n` input, `k = min(m, n)`: the
/// singular values, then the first `k` left singular vectors as columns
/// (`m x k`), then the first `k` right singular vectors as columns (`n x k`).
///
/// `u` holds left vectors as rows and `v` right vectors as columns, as in
/// [`SvdResult`](crate::linalg::SvdResult).
pub fn stack_svd<T: Scalar>(singular: &[T], u: &Matrix<T>, v: &Matrix<T>) -> Result<Matrix<T>, LinalgError> {
    let (m, n) = (u.rows(), v.rows());
    let k = m.min(n);
    if singular.len() < k || !u.is_square() || !v.is_square() {
        return Err(LinalgError::Shape(format!(
            "{} singular values with {}x{} and {}x{} factors",
            singular.len(),
            u.rows(),
            u.cols(),
            v.rows(),
            v.cols()
        )));
    }
    let s_row = Matrix::row_vector(&singular[..k]);
    let u_block = Matrix::from_fn(m, k, |i, j| u[(j, i)]);
    let v_block = v.col_block(0, k);
    concat_operands(&[s_row, u_block, v_block], Axis::Rows)
}

/// Inverse of [`stack_svd`] for an `m x n` input: `(s, U block, V block)`
/// with the singular vectors as columns of both blocks.
pub fn split_svd<T: Scalar>(out: &Matrix<T>, m: usize, n: usize) -> Result<(Vec<T>, Matrix<T>, Matrix<T>), LinalgError> {
    let k = m.min(n);
    if out.shape() != (m + n + 1, k) {
        return Err(LinalgError::Shape(format!(
            "svd output for {m}x{n} must be {}x{k}, got {}x{}",
            m + n + 1,
            out.rows(),
            out.cols()
        )));
    }
    Ok((
        out.row(0).to_vec(),
        out.row_block(1, m + 1),
        out.row_block(m + 1, m + n + 1),
    ))
}
