//! Scoring of predicted token sequences: tolerance checks under the per-task
//! verification formulas, failure diagnostics, and file-level reports.
//!
//! A prediction is correct when `‖error‖ < τ‖reference‖` (or the error is
//! exactly zero). The error and reference depend on the task:
//!
//! | task | error | reference |
//! |---|---|---|
//! | direct tasks | `P - O` | `O` |
//! | eigenvectors | `Q I Qᵀ - D` | `D` |
//! | svd | `Uᵀ I V - S` | `S` |
//! | invert | `P I - Id` | `Id` |

mod check;
mod diagnostics;
mod report;

pub use check::{check_prediction, parse_prediction, rel_error, residual, CheckOptions, Checker, Residual, Verdict};
pub use diagnostics::{
    eigvec_diagnostics, inverse_diagnostics, CondBucket, EigvecDiagnostics, InverseDiagnostics, DISTORTED_COND_MIN,
    ILL_CONDITIONED, ORTHOGONAL_COND_MAX,
};
pub use report::{
    record_matrices, score_file, score_records, Bucket, EigenSummary, EvalConfig, EvalReport, InverseSummary, Tally,
};
