//! Linear algebra problems as token sequences: number encodings, matrix
//! serialization, reference solvers, random matrix ensembles, dataset
//! generation and tolerance-based scoring.
//!
//! Matrices and the solvers are generic over [`Scalar`] (`f32` or `f64`);
//! the aliases below name the usual instantiations. Encodings, datasets and
//! scoring work on `f64`.

pub mod error;
pub mod evalkit;
pub mod linalg;
pub mod matrix;
pub mod matseq;
pub mod numcodec;
pub mod params;
pub mod randmat;
pub mod scalar;
pub mod taskgen;

pub use error::LinalgError;
pub use matrix::{Matrix, Norm};
pub use numcodec::{EncodingScheme, FloatTriplet, Vocabulary};
pub use scalar::Scalar;
pub use taskgen::{MatrixTask, Task};

pub type Matrix64 = Matrix<f64>;
pub type Matrix32 = Matrix<f32>;
pub type EigenResult64 = linalg::EigenResult<f64>;
pub type EigenResult32 = linalg::EigenResult<f32>;
pub type SvdResult64 = linalg::SvdResult<f64>;
pub type SvdResult32 = linalg::SvdResult<f32>;
