//! Example generation for the nine tasks and dataset files.

mod dataset;
mod ood;
mod task;

pub use dataset::{
    make_joint_dataset, manifest_path, read_records, record_task, write_dataset, write_spec, DatasetError, DatasetSpec,
    ExampleRecord, Manifest, TaskEntry, VocabInfo, FORMAT_VERSION,
};
pub use ood::{ood_suite, sigma_tr, OodEntry, OodSuite, BASELINE_A, SPECTRAL_RATIOS, TEST_FAMILIES, WIGNER_RATIOS};
pub use task::{Example, MatrixTask, NoiseConfig, Task, TaskError, DEFAULT_MAX_RETRIES};
