use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::LinalgError;
use crate::linalg::{condition_number, invert, singular_values, svd, sym_eigen, sym_eigenvalues};
use crate::matrix::Matrix;
use crate::matseq::{concat_operands, round_matrix, stack_eigen, stack_svd, Axis};
use crate::numcodec::EncodingScheme;
use crate::randmat::{add_noise, Dims, EnsembleKind, EnsembleSpec};

/// The nine problems.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    /// `Mᵀ`.
    Transpose,
    /// `M + N`, input `[M N]`.
    Add,
    /// `Mᵀ V`, input `[M V]`.
    MatVec,
    /// `Mᵀ N`, input `[M N]`.
    MatMul,
    /// Eigenvalues of a symmetric matrix, descending, as a column.
    Eigenvalues,
    /// `[eigenvalues; Q]` with `Q M Qᵀ = D`.
    Eigenvectors,
    /// Square roots of the eigenvalues of `MᵀM`, descending, as a column.
    SingularValues,
    /// `[s; U block; V block]` with `S = U M V`.
    Svd,
    /// `M⁻¹`.
    Invert,
}

impl Task {
    pub const ALL: [Task; 9] = [
        Task::Transpose,
        Task::Add,
        Task::MatVec,
        Task::MatMul,
        Task::Eigenvalues,
        Task::Eigenvectors,
        Task::SingularValues,
        Task::Svd,
        Task::Invert,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::Transpose => "transpose",
            Task::Add => "add",
            Task::MatVec => "matvec",
            Task::MatMul => "matmul",
            Task::Eigenvalues => "eigenvalues",
            Task::Eigenvectors => "eigenvectors",
            Task::SingularValues => "singular_values",
            Task::Svd => "svd",
            Task::Invert => "invert",
        }
    }

    /// Token that announces the task in joint datasets.
    pub fn prefix_token(self) -> &'static str {
        match self {
            Task::Transpose => "Transpose",
            Task::Add => "Add",
            Task::MatVec => "Dot",
            Task::MatMul => "Mul",
            Task::Eigenvalues => "Eigenvalues",
            Task::Eigenvectors => "Eigenvectors",
            Task::SingularValues => "SingularValues",
            Task::Svd => "Svd",
            Task::Invert => "Invert",
        }
    }

    /// Whether the oracle needs a symmetric input.
    pub fn requires_symmetric(self) -> bool {
        matches!(self, Task::Eigenvalues | Task::Eigenvectors)
    }

    pub fn requires_square(self) -> bool {
        matches!(self, Task::Eigenvalues | Task::Eigenvectors | Task::Invert)
    }

    /// Default symmetry of generated inputs.
    pub fn default_symmetric(self) -> bool {
        matches!(
            self,
            Task::Eigenvalues | Task::Eigenvectors | Task::SingularValues | Task::Svd
        )
    }

    /// Number of `m x n` operands (vectors excluded).
    pub fn operand_count(self) -> usize {
        match self {
            Task::Add | Task::MatMul => 2,
            _ => 1,
        }
    }

    /// Shape of the serialized input for an `m x n` first operand.
    pub fn input_shape(self, m: usize, n: usize) -> (usize, usize) {
        match self {
            Task::Add | Task::MatMul => (m, 2 * n),
            Task::MatVec => (m, n + 1),
            _ => (m, n),
        }
    }

    /// Shape of the output for an `m x n` first operand.
    pub fn output_shape(self, m: usize, n: usize) -> (usize, usize) {
        match self {
            Task::Transpose => (n, m),
            Task::Add => (m, n),
            Task::MatVec | Task::Eigenvalues | Task::SingularValues => (n, 1),
            Task::MatMul | Task::Invert => (n, n),
            Task::Eigenvectors => (n + 1, n),
            Task::Svd => (m + n + 1, m.min(n)),
        }
    }

    /// Split a serialized input back into the operands the oracle takes.
    pub fn split_input(self, input: &Matrix<f64>) -> Result<Vec<Matrix<f64>>, LinalgError> {
        let cols = input.cols();
        let bad = || LinalgError::Shape(format!("{}x{cols} is not a valid {} input", input.rows(), self.name()));
        match self {
            Task::Add | Task::MatMul => {
                if !cols.is_multiple_of(2) {
                    return Err(bad());
                }
                Ok(vec![input.col_block(0, cols / 2), input.col_block(cols / 2, cols)])
            }
            Task::MatVec => {
                if cols < 2 {
                    return Err(bad());
                }
                Ok(vec![input.col_block(0, cols - 1), input.col_block(cols - 1, cols)])
            }
            _ => Ok(vec![input.clone()]),
        }
    }

    /// The reference output for the given operands.
    pub fn oracle(self, operands: &[Matrix<f64>]) -> Result<Matrix<f64>, LinalgError> {
        let want = if self == Task::MatVec { 2 } else { self.operand_count() };
        if operands.len() != want {
            return Err(LinalgError::Shape(format!(
                "{} takes {want} operands, got {}",
                self.name(),
                operands.len()
            )));
        }
        let m = &operands[0];
        match self {
            Task::Transpose => Ok(m.transpose()),
            Task::Add => m.add(&operands[1]),
            Task::MatVec | Task::MatMul => m.tr_matmul(&operands[1]),
            Task::Eigenvalues => Ok(Matrix::column(&sym_eigenvalues(m)?)),
            Task::Eigenvectors => {
                let e = sym_eigen(m)?;
                stack_eigen(&e.values, &e.vectors)
            }
            Task::SingularValues => Ok(Matrix::column(&singular_values(m)?)),
            Task::Svd => {
                let r = svd(m)?;
                stack_svd(&r.singular, &r.u, &r.v)
            }
            Task::Invert => invert(m),
        }
    }

    /// Oracle applied to a serialized input.
    pub fn solve(self, input: &Matrix<f64>) -> Result<Matrix<f64>, LinalgError> {
        self.oracle(&self.split_input(input)?)
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        let task = match key.as_str() {
            "transpose" | "transposition" => Task::Transpose,
            "add" | "addition" => Task::Add,
            "matvec" | "dot" => Task::MatVec,
            "matmul" | "mul" => Task::MatMul,
            "eigenvalues" => Task::Eigenvalues,
            "eigenvectors" => Task::Eigenvectors,
            "singular_values" | "singularvalues" => Task::SingularValues,
            "svd" => Task::Svd,
            "invert" | "inverse" | "inversion" => Task::Invert,
            _ => {
                if let Some(t) = Task::ALL.iter().find(|t| t.prefix_token().eq_ignore_ascii_case(s.trim())) {
                    *t
                } else {
                    return Err(format!("unknown task `{s}`"));
                }
            }
        };
        Ok(task)
    }
}

/// Noise injected into the serialized input.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Standard deviation as a fraction of the ensemble's coefficient std.
    pub level: f64,
    /// Compute the target from the noisy input instead of the clean one.
    pub target_from_noisy: bool,
    /// Keep symmetric operands symmetric.
    pub mirror: bool,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            level: 0.0,
            target_from_noisy: false,
            mirror: true,
        }
    }
}

/// Default bound on draws per example.
pub const DEFAULT_MAX_RETRIES: usize = 100;

/// A fully specified task generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixTask {
    pub task: Task,
    pub input: EnsembleSpec,
    pub scheme_in: EncodingScheme,
    pub scheme_out: EncodingScheme,
    #[serde(default)]
    pub noise: NoiseConfig,
    /// Token prepended to both sequences (joint datasets).
    #[serde(default)]
    pub prefix: Option<String>,
    /// Redraw invertible inputs whose condition number exceeds this cap.
    #[serde(default)]
    pub max_cond: Option<f64>,
    #[serde(default = "default_max_retries")]
    pub max_retries: usize,
}

fn default_max_retries() -> usize {
    DEFAULT_MAX_RETRIES
}

/// A task that cannot be generated.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TaskError {
    #[error("invalid task configuration: {0}")]
    Config(String),
    #[error("example {index}: no valid draw after {attempts} attempts (last: {last})")]
    ResampleExhausted { index: u64, attempts: usize, last: String },
}

/// One generated example.
#[derive(Clone, Debug, PartialEq)]
pub struct Example {
    pub task: Task,
    pub index: u64,
    /// Shape of the first operand.
    pub dims: (usize, usize),
    /// Rounded clean input, serialized layout.
    pub clean_input: Matrix<f64>,
    /// Input actually serialized (noisy when noise is on).
    pub input: Matrix<f64>,
    /// Oracle output before output rounding.
    pub target: Matrix<f64>,
    pub input_tokens: Vec<String>,
    pub output_tokens: Vec<String>,
}

impl MatrixTask {
    /// `task` on `U[-10, 10]` coefficients with the given shape law and schemes.
    pub fn new(task: Task, dims: Dims, scheme_in: EncodingScheme, scheme_out: EncodingScheme) -> Self {
        MatrixTask {
            task,
            input: EnsembleSpec {
                kind: EnsembleKind::IidUniform { a: 10.0 },
                symmetric: task.default_symmetric(),
                dims,
            },
            scheme_in,
            scheme_out,
            noise: NoiseConfig::default(),
            prefix: None,
            max_cond: None,
            max_retries: DEFAULT_MAX_RETRIES,
        }
    }

    pub fn with_noise(mut self, level: f64) -> Self {
        self.noise.level = level;
        self
    }

    pub fn with_prefix(mut self) -> Self {
        self.prefix = Some(self.task.prefix_token().to_string());
        self
    }

    pub fn validate(&self) -> Result<(), TaskError> {
        let cfg = |m: String| Err(TaskError::Config(m));
        self.input.validate().map_err(|e| TaskError::Config(e.to_string()))?;
        self.scheme_in.validate().map_err(|e| TaskError::Config(e.to_string()))?;
        self.scheme_out.validate().map_err(|e| TaskError::Config(e.to_string()))?;
        if self.task.requires_symmetric() && !self.input.symmetric {
            return cfg(format!("{} needs symmetric inputs", self.task));
        }
        if self.task.requires_square() && !self.input.dims.is_square() {
            return cfg(format!("{} needs square inputs", self.task));
        }
        if !(self.noise.level >= 0.0 && self.noise.level.is_finite()) {
            return cfg(format!("noise level must be >= 0, got {}", self.noise.level));
        }
        if self.max_retries == 0 {
            return cfg("max_retries must be positive".into());
        }
        if let Some(p) = &self.prefix {
            if p.is_empty() || p.contains(char::is_whitespace) {
                return cfg(format!("prefix token `{p}` must be a non-empty word"));
            }
        }
        Ok(())
    }

    /// Largest number any dimension token of this task can carry.
    pub fn max_dim(&self) -> usize {
        let (m, n) = self.input.dims.max_shape();
        let (ir, ic) = self.task.input_shape(m, n);
        let (or, oc) = self.task.output_shape(m, n);
        ir.max(ic).max(or).max(oc)
    }

    /// Longest input and output token sequences this task can produce.
    pub fn max_seq_len(&self) -> (usize, usize) {
        let (m, n) = self.input.dims.max_shape();
        let prefix = usize::from(self.prefix.is_some());
        let (ir, ic) = self.task.input_shape(m, n);
        let (or, oc) = self.task.output_shape(m, n);
        (
            prefix + 2 + ir * ic * self.scheme_in.arity(),
            prefix + 2 + or * oc * self.scheme_out.arity(),
        )
    }

    /// Example `index` of the run seeded with `seed`.
    pub fn make_example(&self, index: u64, seed: u64) -> Result<Example, TaskError> {
        self.validate()?;
        self.make_example_unchecked(index, seed)
    }

    pub(crate) fn make_example_unchecked(&self, index: u64, seed: u64) -> Result<Example, TaskError> {
        let mut rng = crate::randmat::rng_for(seed, index);
        let mut last = String::new();
        for _ in 0..self.max_retries {
            match self.attempt(index, &mut rng) {
                Ok(ex) => return Ok(ex),
                Err(reason) => last = reason,
            }
        }
        Err(TaskError::ResampleExhausted {
            index,
            attempts: self.max_retries,
            last,
        })
    }

    fn attempt<R: Rng>(&self, index: u64, rng: &mut R) -> Result<Example, String> {
        let spec = &self.input;
        let (m, n) = spec.dims.sample(rng);
        let n = if spec.symmetric { m } else { n };
        let fixed = spec.clone().with_dims(Dims::Fixed { rows: m, cols: n });

        let mut operands = Vec::with_capacity(2);
        for _ in 0..self.task.operand_count() {
            operands.push(fixed.sample(rng).map_err(|e| e.to_string())?);
        }
        if self.task == Task::MatVec {
            operands.push(sample_vector(spec, m, n, rng));
        }
        let rounded: Vec<Matrix<f64>> = operands
            .iter()
            .map(|op| round_matrix(op, &self.scheme_in))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;

        let noisy = if self.noise.level > 0.0 {
            let coeff_std = spec.coeff_std(n);
            rounded
                .iter()
                .map(|op| {
                    let mirror = self.noise.mirror && spec.symmetric && op.is_square();
                    let x = add_noise(op, self.noise.level, coeff_std, mirror, rng);
                    round_matrix(&x, &self.scheme_in)
                })
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| e.to_string())?
        } else {
            rounded.clone()
        };

        let oracle_input = if self.noise.target_from_noisy { &noisy } else { &rounded };
        if let (Task::Invert, Some(cap)) = (self.task, self.max_cond) {
            let c = condition_number(&oracle_input[0]).map_err(|e| e.to_string())?;
            if c.is_nan() || c > cap {
                return Err(format!("condition number {c} above cap {cap}"));
            }
        }
        let target = self.task.oracle(oracle_input).map_err(|e| e.to_string())?;

        let clean_input = concat_operands(&rounded, Axis::Cols).map_err(|e| e.to_string())?;
        let input = concat_operands(&noisy, Axis::Cols).map_err(|e| e.to_string())?;

        let mut input_tokens = Vec::new();
        let mut output_tokens = Vec::new();
        if let Some(p) = &self.prefix {
            input_tokens.push(p.clone());
            output_tokens.push(p.clone());
        }
        let layout_in = crate::matseq::SequenceLayout::new(self.scheme_in);
        let layout_out = crate::matseq::SequenceLayout::new(self.scheme_out);
        crate::matseq::append_matrix_tokens(&input, &layout_in, &mut input_tokens).map_err(|e| e.to_string())?;
        crate::matseq::append_matrix_tokens(&target, &layout_out, &mut output_tokens).map_err(|e| e.to_string())?;

        Ok(Example {
            task: self.task,
            index,
            dims: (m, n),
            clean_input,
            input,
            target,
            input_tokens,
            output_tokens,
        })
    }
}

/// `m x 1` vector operand with the ensemble's coefficient law. Laws that only
/// make sense for square matrices fall back to gaussian coefficients of the
/// same standard deviation.
fn sample_vector<R: Rng>(spec: &EnsembleSpec, m: usize, n: usize, rng: &mut R) -> Matrix<f64> {
    let kind = vector_kind(&spec.kind, n);
    let vspec = EnsembleSpec {
        kind,
        symmetric: false,
        dims: Dims::Fixed { rows: m, cols: 1 },
    };
    vspec.sample(rng).expect("iid laws cannot fail")
}

fn vector_kind(kind: &EnsembleKind, n: usize) -> EnsembleKind {
    match kind {
        EnsembleKind::SpectralResample { .. } => EnsembleKind::IidGaussian {
            sigma: crate::randmat::EnsembleSpec {
                kind: kind.clone(),
                symmetric: true,
                dims: Dims::square(n),
            }
            .coeff_std(n),
        },
        EnsembleKind::Mixture { components } => EnsembleKind::Mixture {
            components: components.iter().map(|(w, k)| (*w, vector_kind(k, n))).collect(),
        },
        other => other.clone(),
    }
}
