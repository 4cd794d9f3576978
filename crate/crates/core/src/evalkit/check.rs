use std::fmt;

use crate::error::LinalgError;
use crate::matrix::{Matrix, Norm};
use crate::matseq::{split_eigen, split_svd, tokens_to_matrix, SequenceLayout};
use crate::numcodec::{EncodingScheme, ParseError, ParseErrorKind};
use crate::taskgen::Task;

/// `‖P - O‖ / ‖O‖`; `0` when both norms vanish, `+inf` when only `‖O‖` does.
pub fn rel_error(p: &Matrix<f64>, o: &Matrix<f64>, norm: Norm) -> Result<f64, LinalgError> {
    let err = p.sub(o)?.norm(norm);
    let reference = o.norm(norm);
    Ok(Residual { error: err, reference }.ratio())
}

/// An error measure and the norm it is compared against.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Residual {
    pub error: f64,
    pub reference: f64,
}

impl Residual {
    pub fn ratio(&self) -> f64 {
        if self.error == 0.0 {
            0.0
        } else if self.reference == 0.0 {
            f64::INFINITY
        } else {
            self.error / self.reference
        }
    }

    /// `error < tau * reference`, with an exact match passing at any `tau`.
    pub fn passes(&self, tau: f64) -> bool {
        self.error == 0.0 || self.error < tau * self.reference
    }
}

/// Outcome of checking one prediction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Correct,
    Incorrect,
    IllFormed,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Correct => "correct",
            Verdict::Incorrect => "incorrect",
            Verdict::IllFormed => "ill_formed",
        })
    }
}

/// Knobs of the verification formulas.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CheckOptions {
    /// Compare `‖PI - Id‖` to `tau` itself instead of `tau * ‖Id‖`.
    pub strict_inverse: bool,
}

/// Decode a predicted output for an `m x n` first operand and check its shape.
pub fn parse_prediction<S: AsRef<str>>(
    task: Task,
    tokens: &[S],
    layout: &SequenceLayout,
    dims: (usize, usize),
) -> Result<Matrix<f64>, ParseError> {
    let p = tokens_to_matrix(tokens, layout)?;
    let want = task.output_shape(dims.0, dims.1);
    if p.shape() != want {
        return Err(ParseError::new(
            0,
            ParseErrorKind::Shape(format!(
                "{task} output for {}x{} must be {}x{}, got {}x{}",
                dims.0,
                dims.1,
                want.0,
                want.1,
                p.rows(),
                p.cols()
            )),
        ));
    }
    Ok(p)
}

/// The task's verification measure for prediction `p`.
///
/// `operands` are the oracle inputs, `target` the reference output (used by
/// the direct-comparison tasks only).
pub fn residual(
    task: Task,
    operands: &[Matrix<f64>],
    p: &Matrix<f64>,
    target: &Matrix<f64>,
    norm: Norm,
    opts: CheckOptions,
) -> Result<Residual, LinalgError> {
    let input = operands
        .first()
        .ok_or_else(|| LinalgError::Shape("no operands".into()))?;
    match task {
        Task::Eigenvectors => {
            let (values, q) = split_eigen(p)?;
            let d = Matrix::diag(&values);
            let qiqt = q.matmul(input)?.matmul(&q.transpose())?;
            Ok(Residual {
                error: qiqt.sub(&d)?.norm(norm),
                reference: d.norm(norm),
            })
        }
        Task::Svd => {
            let (m, n) = input.shape();
            let (s, u, v) = split_svd(p, m, n)?;
            let s = Matrix::diag(&s);
            let uiv = u.tr_matmul(input)?.matmul(&v)?;
            Ok(Residual {
                error: uiv.sub(&s)?.norm(norm),
                reference: s.norm(norm),
            })
        }
        Task::Invert => {
            let id = Matrix::identity(input.rows());
            let error = p.matmul(input)?.sub(&id)?.norm(norm);
            let reference = if opts.strict_inverse { 1.0 } else { id.norm(norm) };
            Ok(Residual { error, reference })
        }
        _ => Ok(Residual {
            error: p.sub(target)?.norm(norm),
            reference: target.norm(norm),
        }),
    }
}

/// Scores predictions of one task under one output scheme.
#[derive(Clone, Debug)]
pub struct Checker {
    pub task: Task,
    pub layout: SequenceLayout,
    /// Token stripped from the front of predictions when present.
    pub prefix: Option<String>,
    pub opts: CheckOptions,
}

impl Checker {
    pub fn new(task: Task, scheme_out: EncodingScheme) -> Self {
        Checker {
            task,
            layout: SequenceLayout::new(scheme_out),
            prefix: None,
            opts: CheckOptions::default(),
        }
    }

    fn strip<'a, S: AsRef<str>>(&self, tokens: &'a [S]) -> &'a [S] {
        match (&self.prefix, tokens.first()) {
            (Some(p), Some(first)) if first.as_ref() == p => &tokens[1..],
            _ => tokens,
        }
    }

    /// Parse `predicted` for the serialized `input`.
    pub fn parse<S: AsRef<str>>(&self, input: &Matrix<f64>, predicted: &[S]) -> Result<(Vec<Matrix<f64>>, Matrix<f64>), ParseError> {
        let operands = self
            .task
            .split_input(input)
            .map_err(|e| ParseError::new(0, ParseErrorKind::Shape(e.to_string())))?;
        let dims = operands[0].shape();
        let p = parse_prediction(self.task, self.strip(predicted), &self.layout, dims)?;
        Ok((operands, p))
    }

    /// Residuals under each norm, or the parse failure.
    pub fn residuals<S: AsRef<str>>(
        &self,
        input: &Matrix<f64>,
        target: &Matrix<f64>,
        predicted: &[S],
        norms: &[Norm],
    ) -> Result<Vec<Residual>, ParseError> {
        let (operands, p) = self.parse(input, predicted)?;
        norms
            .iter()
            .map(|&norm| {
                residual(self.task, &operands, &p, target, norm, self.opts)
                    .map_err(|e| ParseError::new(0, ParseErrorKind::Shape(e.to_string())))
            })
            .collect()
    }

    pub fn check<S: AsRef<str>>(&self, input: &Matrix<f64>, target: &Matrix<f64>, predicted: &[S], tau: f64, norm: Norm) -> Verdict {
        match self.residuals(input, target, predicted, &[norm]) {
            Ok(r) if r[0].passes(tau) => Verdict::Correct,
            Ok(_) => Verdict::Incorrect,
            Err(_) => Verdict::IllFormed,
        }
    }
}

/// Check one prediction against the serialized `input` and `target`.
pub fn check_prediction<S: AsRef<str>>(
    task: Task,
    scheme_out: EncodingScheme,
    input: &Matrix<f64>,
    predicted: &[S],
    target: &Matrix<f64>,
    tau: f64,
    norm: Norm,
) -> Verdict {
    Checker::new(task, scheme_out).check(input, target, predicted, tau, norm)
}
