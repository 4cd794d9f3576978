//! Seeded random matrix ensembles: Wigner matrices with uniform, gaussian or
//! Laplace coefficients, symmetric matrices with a prescribed eigenvalue law
//! (spectral resampling), mixtures, and the semicircle-law statistics used to
//! check them.
//!
//! Every sample is drawn from a ChaCha8 stream keyed by `(seed, index)`, so a
//! dataset row depends only on the global seed and its position.

use std::f64::consts::PI;
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::LinalgError;
use crate::linalg::{sym_eigen, sym_eigenvalues};
use crate::matrix::Matrix;

/// Generator used for every random draw in the library.
pub type DataRng = ChaCha8Rng;

/// Retries when an internal decomposition fails to converge.
pub const MAX_RESAMPLE: usize = 8;

/// The generator for example `index` of a run seeded with `seed`.
pub fn rng_for(seed: u64, index: u64) -> DataRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Law of the eigenvalues imposed by spectral resampling.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigFamily {
    /// `|N(0, scale²)|`.
    Positive,
    /// `U[-scale·√3, scale·√3]`.
    Uniform,
    /// `N(0, scale²)`.
    Gaussian,
    /// Laplace with standard deviation `scale`.
    Laplace,
}

impl EigFamily {
    pub const ALL: [EigFamily; 4] = [
        EigFamily::Positive,
        EigFamily::Uniform,
        EigFamily::Gaussian,
        EigFamily::Laplace,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EigFamily::Positive => "positive",
            EigFamily::Uniform => "uniform",
            EigFamily::Gaussian => "gaussian",
            EigFamily::Laplace => "laplace",
        }
    }
}

/// Eigenvalue distribution: a family and its scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigDist {
    pub family: EigFamily,
    pub scale: f64,
}

impl EigDist {
    pub fn new(family: EigFamily, scale: f64) -> Self {
        EigDist { family, scale }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let s = self.scale;
        match self.family {
            EigFamily::Positive => gaussian(rng, s).abs(),
            EigFamily::Uniform => uniform(rng, s * 3f64.sqrt()),
            EigFamily::Gaussian => gaussian(rng, s),
            EigFamily::Laplace => laplace(rng, s),
        }
    }
}

/// Coefficient law of an ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnsembleKind {
    /// iid `U[-a, a]`.
    IidUniform { a: f64 },
    /// iid `U[-A, A]` with `A` itself drawn from `U[a_min, a_max]` per matrix.
    UniformScaled { a_min: f64, a_max: f64 },
    /// iid `N(0, sigma²)`.
    IidGaussian { sigma: f64 },
    /// iid Laplace with standard deviation `sigma`.
    IidLaplace { sigma: f64 },
    /// Gaussian symmetric matrix with its eigenvalues replaced by draws
    /// from `eig`.
    SpectralResample { eig: EigDist },
    /// Each matrix drawn from one component, picked with the given weights.
    Mixture { components: Vec<(f64, EnsembleKind)> },
}

/// Matrix shape law.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Dims {
    Fixed { rows: usize, cols: usize },
    /// `n x n` with `n` uniform in `min..=max`.
    Square { min: usize, max: usize },
    /// `m x n` with `m`, `n` independent and uniform in `min..=max`,
    /// redrawn while `m·n` exceeds `max_elems`.
    Rect {
        min: usize,
        max: usize,
        max_elems: Option<usize>,
    },
}

impl Dims {
    pub fn square(n: usize) -> Self {
        Dims::Fixed { rows: n, cols: n }
    }

    pub fn is_square(&self) -> bool {
        match *self {
            Dims::Fixed { rows, cols } => rows == cols,
            Dims::Square { .. } => true,
            Dims::Rect { min, max, .. } => min == max,
        }
    }

    /// Largest `(rows, cols)` this law can produce.
    pub fn max_shape(&self) -> (usize, usize) {
        match *self {
            Dims::Fixed { rows, cols } => (rows, cols),
            Dims::Square { max, .. } | Dims::Rect { max, .. } => (max, max),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, usize) {
        match *self {
            Dims::Fixed { rows, cols } => (rows, cols),
            Dims::Square { min, max } => {
                let n = rng.random_range(min..=max);
                (n, n)
            }
            Dims::Rect { min, max, max_elems } => loop {
                let m = rng.random_range(min..=max);
                let n = rng.random_range(min..=max);
                if max_elems.is_none_or(|cap| m * n <= cap) {
                    break (m, n);
                }
            },
        }
    }
}

impl std::str::FromStr for Dims {
    type Err = String;

    /// `5x5`, `4x6`, `5-15` (square range) or `5-15x5-15` (rectangular).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("cannot parse dimensions `{s}` (expected 5x5, 5-15 or 5-15x5-15)");
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
        let range = |t: &str| -> Result<(usize, usize), String> {
            match t.split_once('-') {
                Some((lo, hi)) => Ok((num(lo)?, num(hi)?)),
                None => num(t).map(|n| (n, n)),
            }
        };
        let dims = match s.trim().split_once('x') {
            Some((r, c)) if !r.contains('-') && !c.contains('-') => Dims::Fixed {
                rows: num(r)?,
                cols: num(c)?,
            },
            Some((r, c)) => {
                let (lo, hi) = range(r)?;
                if range(c)? != (lo, hi) {
                    return Err(format!("rectangular ranges must match on both sides: `{s}`"));
                }
                Dims::Rect {
                    min: lo,
                    max: hi,
                    max_elems: None,
                }
            }
            None => {
                let (min, max) = range(s)?;
                Dims::Square { min, max }
            }
        };
        dims.validate().map_err(|e| e.to_string())?;
        Ok(dims)
    }
}

impl Dims {
    fn validate(&self) -> Result<(), SpecError> {
        let ok = match *self {
            Dims::Fixed { rows, cols } => rows >= 1 && cols >= 1,
            Dims::Square { min, max } => min >= 1 && min <= max,
            Dims::Rect { min, max, max_elems } => {
                min >= 1 && min <= max && max_elems.is_none_or(|c| c >= min * min)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(SpecError(format!("invalid dimensions {self:?}")))
        }
    }
}

/// An ensemble description that cannot be sampled.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid ensemble: {0}")]
pub struct SpecError(pub String);

/// A random matrix ensemble: coefficient law, symmetry and shape law.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub symmetric: bool,
    pub dims: Dims,
}

impl EnsembleSpec {
    /// Symmetric `n x n` matrices with iid `U[-a, a]` coefficients.
    pub fn wigner(a: f64, n: usize) -> Self {
        EnsembleSpec {
            kind: EnsembleKind::IidUniform { a },
            symmetric: true,
            dims: Dims::square(n),
        }
    }

    /// Non-symmetric `rows x cols` matrices with iid `U[-a, a]` coefficients.
    pub fn uniform(a: f64, rows: usize, cols: usize) -> Self {
        EnsembleSpec {
            kind: EnsembleKind::IidUniform { a },
            symmetric: false,
            dims: Dims::Fixed { rows, cols },
        }
    }

    /// Symmetric `n x n` matrices with eigenvalues drawn from `eig`.
    pub fn spectral(eig: EigDist, n: usize) -> Self {
        EnsembleSpec {
            kind: EnsembleKind::SpectralResample { eig },
            symmetric: true,
            dims: Dims::square(n),
        }
    }

    pub fn with_dims(mut self, dims: Dims) -> Self {
        self.dims = dims;
        self
    }

    pub fn with_symmetric(mut self, symmetric: bool) -> Self {
        self.symmetric = symmetric;
        self
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        self.dims.validate()?;
        if self.symmetric && !self.dims.is_square() {
            return Err(SpecError("symmetric ensembles need square dimensions".into()));
        }
        validate_kind(&self.kind, self)
    }

    /// Draw one matrix.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Matrix<f64>, LinalgError> {
        let (rows, cols) = self.dims.sample(rng);
        let cols = if self.symmetric { rows } else { cols };
        sample_kind(&self.kind, rows, cols, self.symmetric, rng)
    }

    /// Draw the matrix for example `index` of a run seeded with `seed`.
    pub fn sample_seeded(&self, seed: u64, index: u64) -> Result<Matrix<f64>, LinalgError> {
        self.sample(&mut rng_for(seed, index))
    }

    /// Nominal coefficient standard deviation for `n x n` draws.
    pub fn coeff_std(&self, n: usize) -> f64 {
        kind_coeff_std(&self.kind, n)
    }
}

fn validate_kind(kind: &EnsembleKind, spec: &EnsembleSpec) -> Result<(), SpecError> {
    let positive = |name: &str, x: f64| {
        if x > 0.0 && x.is_finite() {
            Ok(())
        } else {
            Err(SpecError(format!("{name} must be positive, got {x}")))
        }
    };
    match kind {
        EnsembleKind::IidUniform { a } => positive("A", *a),
        EnsembleKind::UniformScaled { a_min, a_max } => {
            positive("A min", *a_min)?;
            positive("A max", *a_max)?;
            if a_min > a_max {
                return Err(SpecError(format!("A range {a_min}..{a_max} is empty")));
            }
            Ok(())
        }
        EnsembleKind::IidGaussian { sigma } | EnsembleKind::IidLaplace { sigma } => positive("sigma", *sigma),
        EnsembleKind::SpectralResample { eig } => {
            if !spec.symmetric {
                return Err(SpecError("spectral resampling produces symmetric matrices".into()));
            }
            positive("eigenvalue scale", eig.scale)
        }
        EnsembleKind::Mixture { components } => {
            if components.is_empty() {
                return Err(SpecError("empty mixture".into()));
            }
            for (w, k) in components {
                positive("mixture weight", *w)?;
                validate_kind(k, spec)?;
            }
            Ok(())
        }
    }
}

fn kind_coeff_std(kind: &EnsembleKind, n: usize) -> f64 {
    match kind {
        EnsembleKind::IidUniform { a } => a / 3f64.sqrt(),
        EnsembleKind::UniformScaled { a_min, a_max } => {
            ((a_min * a_min + a_min * a_max + a_max * a_max) / 9.0).sqrt()
        }
        EnsembleKind::IidGaussian { sigma } | EnsembleKind::IidLaplace { sigma } => *sigma,
        // tr(M²) = Σλ², so the mean squared coefficient is scale² / n.
        EnsembleKind::SpectralResample { eig } => eig.scale / (n as f64).sqrt(),
        EnsembleKind::Mixture { components } => {
            let total: f64 = components.iter().map(|(w, _)| w).sum();
            let var: f64 = components
                .iter()
                .map(|(w, k)| w / total * kind_coeff_std(k, n).powi(2))
                .sum();
            var.sqrt()
        }
    }
}

fn sample_kind<R: Rng + ?Sized>(
    kind: &EnsembleKind,
    rows: usize,
    cols: usize,
    symmetric: bool,
    rng: &mut R,
) -> Result<Matrix<f64>, LinalgError> {
    let iid = |rng: &mut R, draw: &dyn Fn(&mut R) -> f64| {
        if symmetric {
            symmetric_from(rows, rng, draw)
        } else {
            Matrix::from_fn(rows, cols, |_, _| draw(rng))
        }
    };
    match kind {
        EnsembleKind::IidUniform { a } => Ok(iid(rng, &|r| uniform(r, *a))),
        EnsembleKind::UniformScaled { a_min, a_max } => {
            let a = rng.random_range(*a_min..=*a_max);
            Ok(iid(rng, &|r| uniform(r, a)))
        }
        EnsembleKind::IidGaussian { sigma } => Ok(iid(rng, &|r| gaussian(r, *sigma))),
        EnsembleKind::IidLaplace { sigma } => Ok(iid(rng, &|r| laplace(r, *sigma))),
        EnsembleKind::SpectralResample { eig } => spectral_resample(eig, rows, rng),
        EnsembleKind::Mixture { components } => {
            let total: f64 = components.iter().map(|(w, _)| w).sum();
            let mut u = rng.random::<f64>() * total;
            let mut chosen = &components[components.len() - 1].1;
            for (w, k) in components {
                if u < *w {
                    chosen = k;
                    break;
                }
                u -= w;
            }
            sample_kind(chosen, rows, cols, symmetric, rng)
        }
    }
}

/// Fill the upper triangle (row by row) and mirror it.
fn symmetric_from<R: Rng + ?Sized>(n: usize, rng: &mut R, draw: &dyn Fn(&mut R) -> f64) -> Matrix<f64> {
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let x = draw(rng);
            m[(i, j)] = x;
            m[(j, i)] = x;
        }
    }
    m
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, a: f64) -> f64 {
    rng.random_range(-a..=a)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R, sigma: f64) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    sigma * z
}

/// Laplace with standard deviation `sigma` (scale `sigma / √2`) by inverse CDF.
fn laplace<R: Rng + ?Sized>(rng: &mut R, sigma: f64) -> f64 {
    let b = sigma / 2f64.sqrt();
    let u: f64 = rng.random::<f64>() - 0.5;
    -b * u.signum() * (1.0 - 2.0 * u.abs()).ln()
}

/// Symmetric `n x n` matrix `Pᵀ D' P`, with `P` the eigenvectors of a gaussian
/// symmetric matrix and `D'` drawn iid from `eig`.
pub fn spectral_resample<R: Rng + ?Sized>(eig: &EigDist, n: usize, rng: &mut R) -> Result<Matrix<f64>, LinalgError> {
    let values: Vec<f64> = (0..n).map(|_| eig.sample(rng)).collect();
    with_spectrum(&values, rng)
}

/// Symmetric matrix with exactly the given eigenvalues and Haar-distributed
/// eigenvectors.
pub fn with_spectrum<R: Rng + ?Sized>(values: &[f64], rng: &mut R) -> Result<Matrix<f64>, LinalgError> {
    let n = values.len();
    if n == 0 {
        return Err(LinalgError::EmptyShape { rows: 0, cols: 0 });
    }
    let mut last = None;
    for _ in 0..MAX_RESAMPLE {
        let g = symmetric_from(n, rng, &|r| gaussian(r, 1.0));
        match sym_eigen(&g) {
            Ok(e) => {
                let q = &e.vectors;
                let dq = Matrix::from_fn(n, n, |i, j| values[i] * q[(i, j)]);
                let mut m = q.tr_matmul(&dq)?;
                for i in 0..n {
                    for j in (i + 1)..n {
                        m[(j, i)] = m[(i, j)];
                    }
                }
                return Ok(m);
            }
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Standard deviation `A·√(n/3)` of the eigenvalues of `n x n` Wigner
/// matrices with `U[-A, A]` coefficients.
pub fn wigner_eig_std(a: f64, n: usize) -> f64 {
    a * (n as f64 / 3.0).sqrt()
}

/// Semicircle density `√(4σ² − λ²) / (2πσ²)` on `[-2σ, 2σ]`, zero outside.
pub fn semicircle_density(lambda: f64, sigma: f64) -> f64 {
    let r2 = 4.0 * sigma * sigma - lambda * lambda;
    if r2 <= 0.0 {
        0.0
    } else {
        r2.sqrt() / (2.0 * PI * sigma * sigma)
    }
}

/// Cumulative distribution of [`semicircle_density`].
pub fn semicircle_cdf(lambda: f64, sigma: f64) -> f64 {
    let r = 2.0 * sigma;
    if lambda <= -r {
        return 0.0;
    }
    if lambda >= r {
        return 1.0;
    }
    0.5 + lambda * (r * r - lambda * lambda).sqrt() / (4.0 * PI * sigma * sigma) + (lambda / r).asin() / PI
}

/// Eigenvalues of `samples` draws from a symmetric ensemble, pooled in sample
/// order. Sample `i` uses [`rng_for`]`(seed, i)`.
pub fn pooled_eigenvalues(spec: &EnsembleSpec, samples: usize, seed: u64) -> Result<Vec<f64>, LinalgError> {
    if !spec.symmetric {
        return Err(LinalgError::NotSymmetric);
    }
    let per_matrix: Vec<Vec<f64>> = (0..samples as u64)
        .into_par_iter()
        .map(|i| sym_eigenvalues(&spec.sample_seeded(seed, i)?))
        .collect::<Result<_, _>>()?;
    Ok(per_matrix.concat())
}

/// Mean and standard deviation of a sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Moments {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
}

impl Moments {
    pub fn of(xs: &[f64]) -> Self {
        let count = xs.len();
        if count == 0 {
            return Moments {
                count,
                mean: f64::NAN,
                std: f64::NAN,
            };
        }
        let mean = xs.iter().sum::<f64>() / count as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / count as f64;
        Moments {
            count,
            mean,
            std: var.sqrt(),
        }
    }
}

/// Equal-width histogram.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    /// Histogram of `xs` over `[min, max]` of the data.
    pub fn of(xs: &[f64], bins: usize) -> Self {
        let bins = bins.max(1);
        let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (lo, hi) = if xs.is_empty() {
            (0.0, 1.0)
        } else if lo == hi {
            (lo - 0.5, hi + 0.5)
        } else {
            (lo, hi)
        };
        let width = (hi - lo) / bins as f64;
        let mut counts = vec![0u64; bins];
        for &x in xs {
            let k = (((x - lo) / width) as usize).min(bins - 1);
            counts[k] += 1;
        }
        Histogram { lo, hi, counts }
    }

    pub fn bin_edges(&self, k: usize) -> (f64, f64) {
        let width = (self.hi - self.lo) / self.counts.len() as f64;
        (self.lo + k as f64 * width, self.lo + (k + 1) as f64 * width)
    }

    /// `bin_left,bin_right,count` rows with a header line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "bin_left,bin_right,count")?;
        for (k, c) in self.counts.iter().enumerate() {
            let (l, r) = self.bin_edges(k);
            writeln!(w, "{l},{r},{c}")?;
        }
        Ok(())
    }
}

/// Pooled eigenvalue statistics of an ensemble.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigHistogram {
    pub moments: Moments,
    pub histogram: Histogram,
}

pub fn eig_histogram(spec: &EnsembleSpec, samples: usize, bins: usize, seed: u64) -> Result<EigHistogram, LinalgError> {
    let eig = pooled_eigenvalues(spec, samples, seed)?;
    Ok(EigHistogram {
        moments: Moments::of(&eig),
        histogram: Histogram::of(&eig, bins),
    })
}

/// Kolmogorov–Smirnov distance between the empirical distribution of `xs`
/// and `cdf`.
pub fn ks_distance(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// `m` plus iid `N(0, (level·coeff_std)²)` noise. With `symmetric`, noise is
/// drawn on the upper triangle and mirrored.
pub fn add_noise<R: Rng + ?Sized>(
    m: &Matrix<f64>,
    level: f64,
    coeff_std: f64,
    symmetric: bool,
    rng: &mut R,
) -> Matrix<f64> {
    let sigma = level * coeff_std;
    if sigma == 0.0 {
        return m.clone();
    }
    if symmetric && m.is_square() {
        let noise = symmetric_from(m.rows(), rng, &|r| gaussian(r, sigma));
        m.add(&noise).expect("same shape")
    } else {
        m.map(|x| x + gaussian(rng, sigma))
    }
}
