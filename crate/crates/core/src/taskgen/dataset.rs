use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::task::{Example, MatrixTask, Task, TaskError};
use crate::numcodec::{EncodingScheme, Vocabulary};
use crate::randmat::rng_for;

/// Version of the record and manifest formats.
pub const FORMAT_VERSION: u32 = 1;

/// Examples generated in parallel before being written in order.
const CHUNK: u64 = 1024;

/// One line of a dataset file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExampleRecord {
    pub task: String,
    pub index: u64,
    pub seed: u64,
    /// Shape of the first operand.
    pub m: usize,
    pub n: usize,
    /// Space-separated tokens.
    pub input_tokens: String,
    pub output_tokens: String,
    /// Rounded clean input in the serialized layout, row-major.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clean_input: Option<Vec<f64>>,
    /// Oracle output before rounding, row-major.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Vec<f64>>,
}

impl ExampleRecord {
    pub fn from_example(ex: &Example, seed: u64) -> Self {
        ExampleRecord {
            task: ex.task.name().to_string(),
            index: ex.index,
            seed,
            m: ex.dims.0,
            n: ex.dims.1,
            input_tokens: ex.input_tokens.join(" "),
            output_tokens: ex.output_tokens.join(" "),
            clean_input: Some(ex.clean_input.data().to_vec()),
            target: Some(ex.target.data().to_vec()),
        }
    }

    pub fn input_token_list(&self) -> Vec<&str> {
        self.input_tokens.split_whitespace().collect()
    }

    pub fn output_token_list(&self) -> Vec<&str> {
        self.output_tokens.split_whitespace().collect()
    }
}

/// Scheme, size and hash of an exported vocabulary file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VocabInfo {
    pub scheme: String,
    pub file: String,
    pub size: usize,
    pub sha256: String,
}

/// One task of a dataset, as echoed in the manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskEntry {
    pub weight: f64,
    pub config: MatrixTask,
}

/// Sidecar description of a dataset file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub library_version: String,
    pub rng: String,
    pub seed: u64,
    pub count: u64,
    pub joint: bool,
    pub tasks: Vec<TaskEntry>,
    pub max_dim: usize,
    pub max_input_len: usize,
    pub max_output_len: usize,
    pub vocab_in: VocabInfo,
    pub vocab_out: VocabInfo,
}

impl Manifest {
    /// Configuration used for records of `task`.
    pub fn task_config(&self, task: &str) -> Option<&MatrixTask> {
        self.tasks.iter().map(|e| &e.config).find(|c| c.task.name() == task)
    }

    pub fn read(path: &Path) -> Result<Self, DatasetError> {
        let text = std::fs::read_to_string(path).map_err(|e| DatasetError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| DatasetError::Format(format!("{}: {e}", path.display())))
    }
}

/// Failure while writing or reading a dataset.
#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error(transparent)]
    Task(#[from] TaskError),
    #[error("{}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("malformed dataset: {0}")]
    Format(String),
}

impl DatasetError {
    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        DatasetError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// `<dataset>.manifest.json`.
pub fn manifest_path(dataset: &Path) -> PathBuf {
    sidecar(dataset, "manifest.json")
}

fn sidecar(dataset: &Path, suffix: &str) -> PathBuf {
    let mut name = dataset.file_name().unwrap_or_default().to_os_string();
    name.push(".");
    name.push(suffix);
    dataset.with_file_name(name)
}

/// Source of the examples of a dataset.
#[derive(Clone, Debug)]
pub struct DatasetSpec {
    tasks: Vec<TaskEntry>,
    joint: bool,
}

impl DatasetSpec {
    /// Plain single-task dataset.
    pub fn single(task: MatrixTask) -> Result<Self, TaskError> {
        task.validate()?;
        Ok(DatasetSpec {
            tasks: vec![TaskEntry {
                weight: 1.0,
                config: task,
            }],
            joint: false,
        })
    }

    /// Weighted mixture of tasks. Tasks without a prefix get their default
    /// prefix token; prefixes must be distinct.
    pub fn joint(tasks: Vec<(f64, MatrixTask)>) -> Result<Self, TaskError> {
        if tasks.is_empty() {
            return Err(TaskError::Config("joint dataset needs at least one task".into()));
        }
        let mut entries: Vec<TaskEntry> = Vec::with_capacity(tasks.len());
        for (weight, mut config) in tasks {
            if !(weight > 0.0 && weight.is_finite()) {
                return Err(TaskError::Config(format!("task weight must be positive, got {weight}")));
            }
            if config.prefix.is_none() {
                config = config.with_prefix();
            }
            config.validate()?;
            if entries.iter().any(|e| e.config.prefix == config.prefix) {
                return Err(TaskError::Config(format!(
                    "duplicate prefix token {}",
                    config.prefix.as_deref().unwrap_or_default()
                )));
            }
            if entries.iter().any(|e| e.config.task == config.task) {
                return Err(TaskError::Config(format!("task {} listed twice", config.task)));
            }
            entries.push(TaskEntry { weight, config });
        }
        Ok(DatasetSpec {
            tasks: entries,
            joint: true,
        })
    }

    pub fn tasks(&self) -> &[TaskEntry] {
        &self.tasks
    }

    /// Which task example `index` belongs to. Drawn from its own stream so
    /// the example itself does not depend on the mixture.
    pub fn task_for(&self, index: u64, seed: u64) -> usize {
        if self.tasks.len() == 1 {
            return 0;
        }
        let total: f64 = self.tasks.iter().map(|e| e.weight).sum();
        let mut u = rng_for(seed, index | 1 << 63).random::<f64>() * total;
        for (k, e) in self.tasks.iter().enumerate() {
            if u < e.weight {
                return k;
            }
            u -= e.weight;
        }
        self.tasks.len() - 1
    }

    pub fn make_example(&self, index: u64, seed: u64) -> Result<Example, TaskError> {
        let k = self.task_for(index, seed);
        self.tasks[k].config.make_example_unchecked(index, seed)
    }

    pub fn record(&self, index: u64, seed: u64) -> Result<ExampleRecord, TaskError> {
        Ok(ExampleRecord::from_example(&self.make_example(index, seed)?, seed))
    }

    fn shared_scheme(&self, pick: impl Fn(&MatrixTask) -> EncodingScheme) -> Result<EncodingScheme, TaskError> {
        let first = pick(&self.tasks[0].config);
        if self.tasks.iter().any(|e| pick(&e.config) != first) {
            return Err(TaskError::Config("all tasks of a dataset must share their schemes".into()));
        }
        Ok(first)
    }

    pub fn max_dim(&self) -> usize {
        self.tasks.iter().map(|e| e.config.max_dim()).max().unwrap_or(1)
    }

    fn prefixes(&self) -> Vec<String> {
        self.tasks.iter().filter_map(|e| e.config.prefix.clone()).collect()
    }

    /// Input and output vocabularies of the dataset.
    pub fn vocabularies(&self) -> Result<(Vocabulary, Vocabulary), TaskError> {
        let scheme_in = self.shared_scheme(|t| t.scheme_in)?;
        let scheme_out = self.shared_scheme(|t| t.scheme_out)?;
        let max_dim = self.max_dim();
        let prefixes = self.prefixes();
        Ok((
            Vocabulary::build(&scheme_in, max_dim, &prefixes),
            Vocabulary::build(&scheme_out, max_dim, &prefixes),
        ))
    }

    /// Generate records `start..end` in parallel, in index order.
    pub fn records(&self, start: u64, end: u64, seed: u64) -> Result<Vec<ExampleRecord>, TaskError> {
        (start..end).into_par_iter().map(|i| self.record(i, seed)).collect()
    }
}

/// Write `count` examples of `task` to `path`, plus the manifest and
/// vocabulary files next to it.
pub fn write_dataset(task: &MatrixTask, count: u64, seed: u64, path: &Path) -> Result<Manifest, DatasetError> {
    write_spec(&DatasetSpec::single(task.clone())?, count, seed, path)
}

/// Write a joint dataset mixing `tasks` by weight.
pub fn make_joint_dataset(tasks: Vec<(f64, MatrixTask)>, count: u64, seed: u64, path: &Path) -> Result<Manifest, DatasetError> {
    write_spec(&DatasetSpec::joint(tasks)?, count, seed, path)
}

/// Stream a dataset to `path`. Records are produced in parallel chunks and
/// written in index order, so the file does not depend on thread count.
pub fn write_spec(spec: &DatasetSpec, count: u64, seed: u64, path: &Path) -> Result<Manifest, DatasetError> {
    let (vocab_in, vocab_out) = spec.vocabularies()?;
    let manifest = build_manifest(spec, count, seed, path, &vocab_in, &vocab_out)?;

    let in_path = path.with_file_name(&manifest.vocab_in.file);
    let out_path = path.with_file_name(&manifest.vocab_out.file);
    write_file(&in_path, |w| vocab_in.write_to(w))?;
    write_file(&out_path, |w| vocab_out.write_to(w))?;

    let file = File::create(path).map_err(|e| DatasetError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut start = 0;
    while start < count {
        let end = (start + CHUNK).min(count);
        for rec in spec.records(start, end, seed)? {
            serde_json::to_writer(&mut w, &rec).map_err(|e| DatasetError::io(path, e.into()))?;
            w.write_all(b"\n").map_err(|e| DatasetError::io(path, e))?;
        }
        start = end;
    }
    w.flush().map_err(|e| DatasetError::io(path, e))?;

    let mpath = manifest_path(path);
    write_file(&mpath, |w| {
        serde_json::to_writer_pretty(&mut *w, &manifest)?;
        w.write_all(b"\n")
    })?;
    Ok(manifest)
}

fn build_manifest(
    spec: &DatasetSpec,
    count: u64,
    seed: u64,
    path: &Path,
    vocab_in: &Vocabulary,
    vocab_out: &Vocabulary,
) -> Result<Manifest, DatasetError> {
    let first = &spec.tasks[0].config;
    let file = |suffix: &str| {
        sidecar(path, suffix)
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default()
    };
    let (max_input_len, max_output_len) = spec
        .tasks
        .iter()
        .map(|e| e.config.max_seq_len())
        .fold((0, 0), |(a, b), (c, d)| (a.max(c), b.max(d)));
    Ok(Manifest {
        format_version: FORMAT_VERSION,
        library_version: env!("CARGO_PKG_VERSION").to_string(),
        rng: "chacha8:seed_from_u64(seed),stream(index)".to_string(),
        seed,
        count,
        joint: spec.joint,
        tasks: spec.tasks.clone(),
        max_dim: spec.max_dim(),
        max_input_len,
        max_output_len,
        vocab_in: VocabInfo {
            scheme: first.scheme_in.name(),
            file: file("vocab_in.txt"),
            size: vocab_in.len(),
            sha256: vocab_in.sha256(),
        },
        vocab_out: VocabInfo {
            scheme: first.scheme_out.name(),
            file: file("vocab_out.txt"),
            size: vocab_out.len(),
            sha256: vocab_out.sha256(),
        },
    })
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> Result<(), DatasetError> {
    let file = File::create(path).map_err(|e| DatasetError::io(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w).and_then(|_| w.flush()).map_err(|e| DatasetError::io(path, e))
}

/// Iterate the records of a dataset file.
pub fn read_records(path: &Path) -> Result<impl Iterator<Item = Result<ExampleRecord, DatasetError>>, DatasetError> {
    let file = File::open(path).map_err(|e| DatasetError::io(path, e))?;
    let owned = path.to_path_buf();
    Ok(BufReader::new(file).lines().enumerate().map(move |(i, line)| {
        let line = line.map_err(|e| DatasetError::io(&owned, e))?;
        serde_json::from_str(&line).map_err(|e| DatasetError::Format(format!("{} line {}: {e}", owned.display(), i + 1)))
    }))
}

/// Task of a record, parsed.
pub fn record_task(rec: &ExampleRecord) -> Result<Task, DatasetError> {
    rec.task.parse().map_err(DatasetError::Format)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randmat::Dims;

    fn task(t: Task) -> MatrixTask {
        MatrixTask::new(t, Dims::square(3), EncodingScheme::P1000, EncodingScheme::P1000)
    }

    #[test]
    fn sidecar_names() {
        assert_eq!(
            manifest_path(Path::new("/tmp/x/train.jsonl")),
            Path::new("/tmp/x/train.jsonl.manifest.json")
        );
    }

    #[test]
    fn joint_rejects_duplicates() {
        let a = task(Task::Add);
        assert!(DatasetSpec::joint(vec![(1.0, a.clone()), (1.0, a.clone())]).is_err());
        let mut b = task(Task::Transpose);
        b.prefix = Some("Add".into());
        assert!(DatasetSpec::joint(vec![(1.0, a.clone()), (1.0, b)]).is_err());
        assert!(DatasetSpec::joint(vec![(0.0, a)]).is_err());
        assert!(DatasetSpec::joint(vec![]).is_err());
    }

    #[test]
    fn single_task_joint_adds_prefix_only() {
        let plain = DatasetSpec::single(task(Task::Transpose)).unwrap();
        let joint = DatasetSpec::joint(vec![(1.0, task(Task::Transpose))]).unwrap();
        for i in 0..5 {
            let a = plain.record(i, 3).unwrap();
            let b = joint.record(i, 3).unwrap();
            assert_eq!(b.input_tokens, format!("Transpose {}", a.input_tokens));
            assert_eq!(b.output_tokens, format!("Transpose {}", a.output_tokens));
            assert_eq!(a.target, b.target);
        }
    }

    #[test]
    fn vocabularies_cover_prefixes_and_dims() {
        let spec = DatasetSpec::joint(vec![(1.0, task(Task::Transpose)), (1.0, task(Task::Eigenvectors))]).unwrap();
        let (vin, vout) = spec.vocabularies().unwrap();
        assert!(vin.contains("Transpose") && vin.contains("Eigenvectors"));
        assert!(vout.contains("V4") && !vout.contains("V5"));
        for i in 0..20 {
            let r = spec.record(i, 0).unwrap();
            assert!(r.input_token_list().iter().all(|t| vin.contains(t)));
            assert!(r.output_token_list().iter().all(|t| vout.contains(t)));
        }
    }

    #[test]
    fn mixed_schemes_rejected() {
        let a = task(Task::Add);
        let mut b = task(Task::Transpose);
        b.scheme_out = EncodingScheme::P10;
        let spec = DatasetSpec::joint(vec![(1.0, a), (1.0, b)]).unwrap();
        assert!(spec.vocabularies().is_err());
    }
}
