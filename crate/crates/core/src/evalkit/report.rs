use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::check::{CheckOptions, Checker, Residual};
use super::diagnostics::{eigvec_diagnostics, inverse_diagnostics, CondBucket};
use crate::matrix::{Matrix, Norm};
use crate::matseq::{split_eigen, tokens_to_matrix, SequenceLayout};
use crate::taskgen::{manifest_path, read_records, DatasetError, ExampleRecord, Manifest, MatrixTask, Task};

/// What to measure.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalConfig {
    /// Tolerances as fractions (`0.005` is 0.5%).
    pub tolerances: Vec<f64>,
    pub norms: Vec<Norm>,
    pub diagnostics: bool,
    pub opts: CheckOptions,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            tolerances: vec![0.005, 0.01, 0.02, 0.05],
            norms: Norm::ALL.to_vec(),
            diagnostics: false,
            opts: CheckOptions::default(),
        }
    }
}

/// Counts of records, well-formed predictions and correct predictions per
/// (norm, tolerance).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub total: u64,
    pub well_formed: u64,
    /// `correct[k][t]` for norm `k` and tolerance `t`.
    pub correct: Vec<Vec<u64>>,
}

impl Tally {
    fn empty(norms: usize, tols: usize) -> Self {
        Tally {
            total: 0,
            well_formed: 0,
            correct: vec![vec![0; tols]; norms],
        }
    }

    fn merge(&mut self, other: &Tally) {
        self.total += other.total;
        self.well_formed += other.well_formed;
        for (a, b) in self.correct.iter_mut().zip(&other.correct) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    fn rate(&self, count: u64) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            count as f64 / self.total as f64
        }
    }
}

/// Records falling in one diagnostic bucket, with how many were correct at
/// each tolerance under the first configured norm.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Bucket {
    pub count: u64,
    pub correct: Vec<u64>,
}

impl Bucket {
    fn add(&mut self, correct: &[bool]) {
        self.count += 1;
        self.correct.resize(correct.len(), 0);
        for (c, &ok) in self.correct.iter_mut().zip(correct) {
            *c += u64::from(ok);
        }
    }

    fn merge(&mut self, other: &Bucket) {
        self.count += other.count;
        if self.correct.len() < other.correct.len() {
            self.correct.resize(other.correct.len(), 0);
        }
        for (a, b) in self.correct.iter_mut().zip(&other.correct) {
            *a += b;
        }
    }
}

/// Eigenvector failure analysis over a prediction set.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct EigenSummary {
    pub count: u64,
    /// Predictions whose eigenvalue row alone is correct, per tolerance.
    pub eigenvalues_correct: Vec<u64>,
    pub orthogonal: Bucket,
    pub between: Bucket,
    pub distorted: Bucket,
    pub weak_residual_sum: f64,
}

impl EigenSummary {
    fn merge(&mut self, o: &EigenSummary) {
        self.count += o.count;
        if self.eigenvalues_correct.len() < o.eigenvalues_correct.len() {
            self.eigenvalues_correct.resize(o.eigenvalues_correct.len(), 0);
        }
        for (a, b) in self.eigenvalues_correct.iter_mut().zip(&o.eigenvalues_correct) {
            *a += b;
        }
        self.orthogonal.merge(&o.orthogonal);
        self.between.merge(&o.between);
        self.distorted.merge(&o.distorted);
        self.weak_residual_sum += o.weak_residual_sum;
    }
}

/// Inversion failure analysis over a prediction set.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct InverseSummary {
    pub count: u64,
    /// Inputs with condition number above the ill-conditioning threshold.
    pub ill_conditioned: Bucket,
    pub well_conditioned: Bucket,
    pub residual_sum: f64,
    pub distance_sum: f64,
}

impl InverseSummary {
    fn merge(&mut self, o: &InverseSummary) {
        self.count += o.count;
        self.ill_conditioned.merge(&o.ill_conditioned);
        self.well_conditioned.merge(&o.well_conditioned);
        self.residual_sum += o.residual_sum;
        self.distance_sum += o.distance_sum;
    }
}

/// Accuracy of a prediction file.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalReport {
    pub tolerances: Vec<f64>,
    pub norms: Vec<Norm>,
    pub overall: Tally,
    pub by_task: BTreeMap<String, Tally>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigen: Option<EigenSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inverse: Option<InverseSummary>,
}

impl EvalReport {
    fn empty(cfg: &EvalConfig) -> Self {
        EvalReport {
            tolerances: cfg.tolerances.clone(),
            norms: cfg.norms.clone(),
            overall: Tally::empty(cfg.norms.len(), cfg.tolerances.len()),
            by_task: BTreeMap::new(),
            eigen: None,
            inverse: None,
        }
    }

    fn merge(mut self, other: EvalReport) -> Self {
        self.overall.merge(&other.overall);
        for (task, t) in other.by_task {
            match self.by_task.get_mut(&task) {
                Some(mine) => mine.merge(&t),
                None => {
                    self.by_task.insert(task, t);
                }
            }
        }
        self.eigen = merge_opt(self.eigen, other.eigen, EigenSummary::merge);
        self.inverse = merge_opt(self.inverse, other.inverse, InverseSummary::merge);
        self
    }

    pub fn total(&self) -> u64 {
        self.overall.total
    }

    pub fn well_formed(&self) -> u64 {
        self.overall.well_formed
    }

    /// Fraction of records correct under `norm` at `tau`, if both were measured.
    pub fn accuracy(&self, norm: Norm, tau: f64) -> Option<f64> {
        accuracy_in(&self.overall, &self.norms, &self.tolerances, norm, tau)
    }

    pub fn task_accuracy(&self, task: &str, norm: Norm, tau: f64) -> Option<f64> {
        accuracy_in(self.by_task.get(task)?, &self.norms, &self.tolerances, norm, tau)
    }

    /// One row per tolerance, one column per norm, both in percent.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let names: Vec<&str> = self.norms.iter().map(|n| n.name()).collect();
        writeln!(w, "tolerance,{}", names.join(","))?;
        for (t, tau) in self.tolerances.iter().enumerate() {
            write!(w, "{}", pct(*tau))?;
            for k in 0..self.norms.len() {
                write!(w, ",{}", pct(self.overall.rate(self.overall.correct[k][t])))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

fn accuracy_in(tally: &Tally, norms: &[Norm], tols: &[f64], norm: Norm, tau: f64) -> Option<f64> {
    let k = norms.iter().position(|&n| n == norm)?;
    let t = tols.iter().position(|&x| x == tau)?;
    Some(tally.rate(tally.correct[k][t]))
}

fn merge_opt<T>(a: Option<T>, b: Option<T>, f: impl Fn(&mut T, &T)) -> Option<T> {
    match (a, b) {
        (Some(mut a), Some(b)) => {
            f(&mut a, &b);
            Some(a)
        }
        (a, b) => a.or(b),
    }
}

fn pct(x: f64) -> String {
    let s = format!("{:.4}", x * 100.0);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let o = &self.overall;
        writeln!(
            f,
            "records: {}  well-formed: {} ({:.2}%)",
            o.total,
            o.well_formed,
            100.0 * o.rate(o.well_formed)
        )?;
        write_table(f, &self.norms, &self.tolerances, o)?;
        if self.by_task.len() > 1 {
            for (task, t) in &self.by_task {
                writeln!(f, "\n{task}: {} records", t.total)?;
                write_table(f, &self.norms, &self.tolerances, t)?;
            }
        }
        let first = self.norms.first().map(|n| n.name()).unwrap_or("");
        if let Some(e) = &self.eigen {
            writeln!(f, "\neigenvectors ({} well-formed, accuracy under {first}):", e.count)?;
            writeln!(f, "  mean weak residual: {:.4e}", e.weak_residual_sum / e.count.max(1) as f64)?;
            for (t, tau) in self.tolerances.iter().enumerate() {
                let c = e.eigenvalues_correct.get(t).copied().unwrap_or(0);
                writeln!(f, "  eigenvalues only at {}%: {:.2}%", pct(*tau), 100.0 * c as f64 / e.count.max(1) as f64)?;
            }
            for (name, b) in [("cond(H) <= 1.035", &e.orthogonal), ("1.035 < cond(H) < 1.04", &e.between), ("cond(H) >= 1.04", &e.distorted)] {
                write_bucket(f, name, b, &self.tolerances)?;
            }
        }
        if let Some(inv) = &self.inverse {
            let n = inv.count.max(1) as f64;
            writeln!(f, "\ninversion ({} well-formed, accuracy under {first}):", inv.count)?;
            writeln!(f, "  mean |PI-Id|/n: {:.4e}  mean |P-inv(I)|/|inv(I)|: {:.4e}", inv.residual_sum / n, inv.distance_sum / n)?;
            write_bucket(f, "cond(I) > 51.5", &inv.ill_conditioned, &self.tolerances)?;
            write_bucket(f, "cond(I) <= 51.5", &inv.well_conditioned, &self.tolerances)?;
        }
        Ok(())
    }
}

fn write_table(f: &mut fmt::Formatter<'_>, norms: &[Norm], tols: &[f64], t: &Tally) -> fmt::Result {
    write!(f, "{:>10}", "tolerance")?;
    for n in norms {
        write!(f, " {:>8}", n.name())?;
    }
    writeln!(f)?;
    for (i, tau) in tols.iter().enumerate() {
        write!(f, "{:>9}%", pct(*tau))?;
        for k in 0..norms.len() {
            write!(f, " {:>7.2}%", 100.0 * t.rate(t.correct[k][i]))?;
        }
        writeln!(f)?;
    }
    Ok(())
}

fn write_bucket(f: &mut fmt::Formatter<'_>, name: &str, b: &Bucket, tols: &[f64]) -> fmt::Result {
    write!(f, "  {name}: {} records", b.count)?;
    for (t, tau) in tols.iter().enumerate() {
        let c = b.correct.get(t).copied().unwrap_or(0);
        let rate = if b.count == 0 { 0.0 } else { 100.0 * c as f64 / b.count as f64 };
        write!(f, ", {:.1}% at {}%", rate, pct(*tau))?;
    }
    writeln!(f)
}

/// The reference matrices of a record: serialized input and rounded target.
pub fn record_matrices(rec: &ExampleRecord, config: &MatrixTask) -> Result<(Matrix<f64>, Matrix<f64>), DatasetError> {
    let bad = |what: &str, e: &dyn fmt::Display| DatasetError::Format(format!("record {}: {what}: {e}", rec.index));
    let strip = |toks: Vec<&str>| -> Vec<String> {
        let skip = usize::from(config.prefix.is_some());
        toks.into_iter().skip(skip).map(str::to_string).collect()
    };
    let input = match &rec.clean_input {
        Some(data) => {
            let (r, c) = config.task.input_shape(rec.m, rec.n);
            Matrix::new(r, c, data.clone()).map_err(|e| bad("clean_input", &e))?
        }
        None => tokens_to_matrix(&strip(rec.input_token_list()), &SequenceLayout::new(config.scheme_in))
            .map_err(|e| bad("input tokens", &e))?,
    };
    let target = tokens_to_matrix(&strip(rec.output_token_list()), &SequenceLayout::new(config.scheme_out))
        .map_err(|e| bad("output tokens", &e))?;
    Ok((input, target))
}

fn score_one(
    manifest: &Manifest,
    cfg: &EvalConfig,
    rec: &ExampleRecord,
    prediction: &str,
) -> Result<EvalReport, DatasetError> {
    let config = manifest
        .task_config(&rec.task)
        .ok_or_else(|| DatasetError::Format(format!("record {}: task {} not in manifest", rec.index, rec.task)))?;
    let (input, target) = record_matrices(rec, config)?;
    let checker = Checker {
        task: config.task,
        layout: SequenceLayout::new(config.scheme_out),
        prefix: config.prefix.clone(),
        opts: cfg.opts,
    };
    let predicted: Vec<&str> = prediction.split_whitespace().collect();

    let mut report = EvalReport::empty(cfg);
    let tally = &mut report.overall;
    tally.total = 1;
    let parsed = checker.parse(&input, &predicted);
    let mut first_norm_ok = vec![false; cfg.tolerances.len()];
    if let Ok((operands, p)) = &parsed {
        let residuals: Option<Vec<Residual>> = cfg
            .norms
            .iter()
            .map(|&norm| super::residual(config.task, operands, p, &target, norm, cfg.opts).ok())
            .collect();
        if let Some(rs) = residuals {
            tally.well_formed = 1;
            for (k, r) in rs.iter().enumerate() {
                for (t, &tau) in cfg.tolerances.iter().enumerate() {
                    let ok = r.passes(tau);
                    tally.correct[k][t] = u64::from(ok);
                    if k == 0 {
                        first_norm_ok[t] = ok;
                    }
                }
            }
        }
    }
    if cfg.diagnostics && report.overall.well_formed == 1 {
        let (operands, p) = parsed.as_ref().expect("well-formed");
        let norm = cfg.norms.first().copied().unwrap_or(Norm::L1);
        match config.task {
            Task::Eigenvectors => {
                let (values, h) = split_eigen(p).map_err(|e| DatasetError::Format(e.to_string()))?;
                let true_values = target.row(0);
                if let Ok(d) = eigvec_diagnostics(&operands[0], &values, &h, true_values) {
                    let mut s = EigenSummary {
                        count: 1,
                        weak_residual_sum: d.weak_residual,
                        ..Default::default()
                    };
                    let ev = super::rel_error(&Matrix::row_vector(&values), &target.row_block(0, 1), norm).unwrap_or(f64::INFINITY);
                    let ev_res = Residual {
                        error: ev,
                        reference: 1.0,
                    };
                    s.eigenvalues_correct = cfg.tolerances.iter().map(|&tau| u64::from(ev_res.passes(tau))).collect();
                    match d.bucket() {
                        CondBucket::Orthogonal => s.orthogonal.add(&first_norm_ok),
                        CondBucket::Between => s.between.add(&first_norm_ok),
                        CondBucket::Distorted => s.distorted.add(&first_norm_ok),
                    }
                    report.eigen = Some(s);
                }
            }
            Task::Invert => {
                if let Ok(d) = inverse_diagnostics(&operands[0], p) {
                    let mut s = InverseSummary {
                        count: 1,
                        residual_sum: d.residual,
                        distance_sum: d.distance,
                        ..Default::default()
                    };
                    if d.ill_conditioned() {
                        s.ill_conditioned.add(&first_norm_ok);
                    } else {
                        s.well_conditioned.add(&first_norm_ok);
                    }
                    report.inverse = Some(s);
                }
            }
            _ => {}
        }
    }
    report.by_task.insert(rec.task.clone(), report.overall.clone());
    Ok(report)
}

/// Score `predictions` (one token line per record) against `records`.
pub fn score_records(
    manifest: &Manifest,
    records: &[ExampleRecord],
    predictions: &[String],
    cfg: &EvalConfig,
) -> Result<EvalReport, DatasetError> {
    if predictions.is_empty() {
        return Err(DatasetError::Format("prediction file is empty".into()));
    }
    if records.len() != predictions.len() {
        return Err(DatasetError::Format(format!(
            "dataset has {} records but there are {} predictions",
            records.len(),
            predictions.len()
        )));
    }
    if cfg.tolerances.is_empty() || cfg.norms.is_empty() {
        return Err(DatasetError::Format("need at least one tolerance and one norm".into()));
    }
    records
        .par_iter()
        .zip(predictions)
        .map(|(rec, pred)| score_one(manifest, cfg, rec, pred))
        .try_reduce(|| EvalReport::empty(cfg), |a, b| Ok(a.merge(b)))
}

/// Score a prediction file against a dataset file and its manifest.
pub fn score_file(dataset: &Path, predictions: &Path, cfg: &EvalConfig) -> Result<EvalReport, DatasetError> {
    let manifest = Manifest::read(&manifest_path(dataset))?;
    let records: Vec<ExampleRecord> = read_records(dataset)?.collect::<Result<_, _>>()?;
    let file = File::open(predictions).map_err(|e| DatasetError::Io {
        path: predictions.to_path_buf(),
        source: e,
    })?;
    let lines: Vec<String> = BufReader::new(file)
        .lines()
        .collect::<Result<_, _>>()
        .map_err(|e| DatasetError::Io {
            path: predictions.to_path_buf(),
            source: e,
        })?;
    score_records(&manifest, &records, &lines, cfg)
}
