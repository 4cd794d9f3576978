use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use linseq::evalkit::{score_file, CheckOptions, EvalConfig};
use linseq::params::{param_count, solve_shared_vocab, solve_vocab_in, TransformerShape, REFERENCE_MODELS};
use linseq::randmat::{
    pooled_eigenvalues, ks_distance, semicircle_cdf, wigner_eig_std, Dims, EigDist, EigFamily, EnsembleKind, EnsembleSpec,
    Histogram, Moments,
};
use linseq::taskgen::{make_joint_dataset, ood_suite, write_dataset, Manifest, MatrixTask, Task};
use linseq::{EncodingScheme, Norm, Vocabulary};

#[derive(Parser)]
#[command(name = "linseq", version, about = "Generate and score linear algebra sequence datasets")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a dataset file with its manifest and vocabularies.
    Gen(GenArgs),
    /// Score a prediction file against a dataset.
    Eval(EvalArgs),
    /// Pooled eigenvalue statistics of a random matrix ensemble.
    Stats(StatsArgs),
    /// Export the vocabulary of an encoding.
    Vocab(VocabArgs),
    /// Count transformer parameters.
    Paramcount(ParamArgs),
    /// Out-of-distribution train and test grid for the eigenvalue task.
    Ood(OodArgs),
}

/// Coefficient or eigenvalue law, parameterized by `--A`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Ens {
    /// iid U[-A, A].
    Wigner,
    /// iid gaussian with the std of U[-A, A].
    Gaussian,
    /// iid Laplace with the std of U[-A, A].
    Laplace,
    /// iid U[-a, a] with a drawn from U[1, A] per matrix.
    Scaled,
    /// |gaussian| eigenvalues, scale A·sqrt(n/3).
    Positive,
    /// Uniform eigenvalues with std A·sqrt(n/3).
    EigUniform,
    /// Gaussian eigenvalues with std A·sqrt(n/3).
    EigGaussian,
    /// Laplace eigenvalues with std A·sqrt(n/3).
    EigLaplace,
}

impl Ens {
    fn kind(self, a: f64, n: usize) -> EnsembleKind {
        let coeff_std = a / 3f64.sqrt();
        let spectral = |family| EnsembleKind::SpectralResample {
            eig: EigDist::new(family, wigner_eig_std(a, n)),
        };
        match self {
            Ens::Wigner => EnsembleKind::IidUniform { a },
            Ens::Gaussian => EnsembleKind::IidGaussian { sigma: coeff_std },
            Ens::Laplace => EnsembleKind::IidLaplace { sigma: coeff_std },
            Ens::Scaled => EnsembleKind::UniformScaled { a_min: 1.0, a_max: a },
            Ens::Positive => spectral(EigFamily::Positive),
            Ens::EigUniform => spectral(EigFamily::Uniform),
            Ens::EigGaussian => spectral(EigFamily::Gaussian),
            Ens::EigLaplace => spectral(EigFamily::Laplace),
        }
    }

    fn is_spectral(self) -> bool {
        matches!(self, Ens::Positive | Ens::EigUniform | Ens::EigGaussian | Ens::EigLaplace)
    }
}

#[derive(Args)]
struct GenArgs {
    /// Task name, or a comma-separated list for a joint dataset.
    #[arg(long, value_delimiter = ',', required = true)]
    task: Vec<Task>,
    /// Mixture weights of a joint dataset (default: equal).
    #[arg(long, value_delimiter = ',')]
    weights: Vec<f64>,
    /// Encoding of both sequences, e.g. p10, p1000, b1999, fp15, p1000:d4.
    #[arg(long, default_value = "p1000")]
    scheme: EncodingScheme,
    #[arg(long)]
    scheme_in: Option<EncodingScheme>,
    #[arg(long)]
    scheme_out: Option<EncodingScheme>,
    /// Shape law: 5x5, 4x6, 5-15 (square) or 5-15x5-15.
    #[arg(long, default_value = "5x5")]
    dims: Dims,
    #[arg(long, value_enum, default_value = "wigner")]
    ens: Ens,
    /// Coefficient bound A.
    #[arg(long = "A", alias = "a", default_value_t = 10.0)]
    a: f64,
    /// Force symmetric inputs.
    #[arg(long, conflicts_with = "asymmetric")]
    symmetric: bool,
    /// Force non-symmetric inputs.
    #[arg(long)]
    asymmetric: bool,
    #[arg(long, default_value_t = 1000)]
    count: u64,
    #[arg(long, env = "LINSEQ_SEED", default_value_t = 0)]
    seed: u64,
    /// Input noise, as a fraction of the coefficient std.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Compute targets from the noisy input.
    #[arg(long)]
    target_from_noisy: bool,
    /// Let noise break the symmetry of symmetric inputs.
    #[arg(long)]
    no_mirror: bool,
    /// Redraw inversion inputs with a larger condition number.
    #[arg(long)]
    max_cond: Option<f64>,
    #[arg(long, default_value_t = linseq::taskgen::DEFAULT_MAX_RETRIES)]
    max_retries: usize,
    /// Prepend the task token even for a single task.
    #[arg(long)]
    prefix: bool,
    #[arg(long)]
    out: PathBuf,
}

impl GenArgs {
    fn task(&self, task: Task) -> MatrixTask {
        let mut t = MatrixTask::new(
            task,
            self.dims,
            self.scheme_in.unwrap_or(self.scheme),
            self.scheme_out.unwrap_or(self.scheme),
        );
        let n = self.dims.max_shape().0;
        t.input.kind = self.ens.kind(self.a, n);
        if self.symmetric || self.ens.is_spectral() {
            t.input.symmetric = true;
        } else if self.asymmetric {
            t.input.symmetric = false;
        }
        t.noise.level = self.noise;
        t.noise.target_from_noisy = self.target_from_noisy;
        t.noise.mirror = !self.no_mirror;
        t.max_cond = self.max_cond;
        t.max_retries = self.max_retries;
        t
    }
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// One predicted token sequence per line.
    #[arg(long)]
    pred: PathBuf,
    /// Tolerances in percent.
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,2,5")]
    tol: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "l1,l2,linf")]
    norm: Vec<Norm>,
    /// Eigenvector and inversion failure analysis.
    #[arg(long)]
    diagnostics: bool,
    /// Compare inversion residuals to τ instead of τ‖Id‖.
    #[arg(long)]
    strict_inverse: bool,
    /// Also write the accuracy table as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long, value_enum, default_value = "wigner")]
    ens: Ens,
    #[arg(long = "A", alias = "a", default_value_t = 10.0)]
    a: f64,
    #[arg(long, value_delimiter = ',', default_value = "5,10,15,20")]
    n: Vec<usize>,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 100)]
    bins: usize,
    #[arg(long, env = "LINSEQ_SEED", default_value_t = 0)]
    seed: u64,
    /// Directory for per-dimension histogram CSVs.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Fail unless every std is within --std-tol of A·sqrt(n/3).
    #[arg(long)]
    check: bool,
    #[arg(long, default_value_t = 0.01)]
    std_tol: f64,
}

#[derive(Args)]
struct VocabArgs {
    #[arg(long)]
    scheme: EncodingScheme,
    /// Add dimension tokens V1..V<max-dim>.
    #[arg(long, default_value_t = 0)]
    max_dim: usize,
    /// Add the prefix tokens of these tasks.
    #[arg(long, value_delimiter = ',')]
    tasks: Vec<Task>,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long, default_value_t = 1)]
    enc_layers: u64,
    #[arg(long, default_value_t = 1)]
    dec_layers: u64,
    #[arg(long, default_value_t = 256)]
    dim: u64,
    #[arg(long)]
    enc_dim: Option<u64>,
    #[arg(long)]
    dec_dim: Option<u64>,
    #[arg(long, default_value_t = 0)]
    vocab: u64,
    #[arg(long)]
    vocab_in: Option<u64>,
    #[arg(long)]
    vocab_out: Option<u64>,
    /// Positional table size.
    #[arg(long, default_value_t = 512)]
    positions: u64,
    /// Take vocabulary sizes and the longest sequence from a dataset manifest.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Solve for the shared vocabulary size giving this total.
    #[arg(long)]
    solve: Option<u64>,
    /// Solve the vocabulary size of every reference model.
    #[arg(long)]
    reference: bool,
}

#[derive(Args)]
struct OodArgs {
    #[arg(long, default_value_t = 5)]
    n: usize,
    #[arg(long, env = "LINSEQ_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "p1000")]
    scheme: EncodingScheme,
    /// Write the grid description here, plus one dataset per entry when
    /// --count is positive. Without it the grid is printed.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    count: u64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Command::Gen(a) => gen(a),
        Command::Eval(a) => eval(a),
        Command::Stats(a) => stats(a),
        Command::Vocab(a) => vocab(a),
        Command::Paramcount(a) => paramcount(a),
        Command::Ood(a) => ood(a),
    }
}

fn gen(args: GenArgs) -> Result<()> {
    let manifest = if args.task.len() == 1 && !args.prefix {
        write_dataset(&args.task(args.task[0]), args.count, args.seed, &args.out)?
    } else {
        let weights = if args.weights.is_empty() {
            vec![1.0; args.task.len()]
        } else {
            args.weights.clone()
        };
        ensure!(
            weights.len() == args.task.len(),
            "{} weights for {} tasks",
            weights.len(),
            args.task.len()
        );
        let tasks = weights.into_iter().zip(args.task.iter().map(|&t| args.task(t))).collect();
        make_joint_dataset(tasks, args.count, args.seed, &args.out)?
    };
    eprintln!(
        "wrote {} records to {} (vocab {}/{} tokens, longest sequences {}/{})",
        manifest.count,
        args.out.display(),
        manifest.vocab_in.size,
        manifest.vocab_out.size,
        manifest.max_input_len,
        manifest.max_output_len
    );
    Ok(())
}

fn eval(args: EvalArgs) -> Result<()> {
    ensure!(args.tol.iter().all(|t| *t >= 0.0), "tolerances must be non-negative");
    let cfg = EvalConfig {
        tolerances: args.tol.iter().map(|t| t / 100.0).collect(),
        norms: args.norm.clone(),
        diagnostics: args.diagnostics,
        opts: CheckOptions {
            strict_inverse: args.strict_inverse,
        },
    };
    let report = score_file(&args.dataset, &args.pred, &cfg)?;
    if let Some(path) = &args.csv {
        let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        report.write_csv(BufWriter::new(f))?;
    }
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print!("{report}");
    }
    Ok(())
}

fn stats(args: StatsArgs) -> Result<()> {
    ensure!(args.samples > 0, "--samples must be positive");
    if let Some(dir) = &args.out_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let wignerish = matches!(args.ens, Ens::Wigner | Ens::Gaussian | Ens::Laplace);
    println!("{:>4} {:>10} {:>10} {:>9} {:>9}{}", "n", "expected", "std", "diff", "mean", if wignerish { "        ks" } else { "" });
    let mut failures = Vec::new();
    for &n in &args.n {
        ensure!(n >= 1, "dimensions must be positive");
        let spec = EnsembleSpec {
            kind: args.ens.kind(args.a, n),
            symmetric: true,
            dims: Dims::square(n),
        };
        spec.validate().map_err(|e| anyhow::anyhow!("{e}"))?;
        let eig = pooled_eigenvalues(&spec, args.samples, args.seed)?;
        let m = Moments::of(&eig);
        let expected = wigner_eig_std(args.a, n);
        let diff = m.std - expected;
        print!("{n:>4} {expected:>10.4} {:>10.4} {diff:>+9.4} {:>+9.4}", m.std, m.mean);
        if wignerish {
            print!(" {:>9.5}", ks_distance(&eig, |x| semicircle_cdf(x, expected)));
        }
        println!();
        if diff.abs() > args.std_tol {
            failures.push(n);
        }
        if let Some(dir) = &args.out_dir {
            let path = dir.join(format!("eig_{}_n{n}.csv", args.ens.to_possible_value().expect("named").get_name()));
            let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            Histogram::of(&eig, args.bins).write_csv(BufWriter::new(f))?;
        }
    }
    if args.check {
        if !failures.is_empty() {
            bail!("eigenvalue std off by more than {} for n = {failures:?}", args.std_tol);
        }
        println!("all within {} of A*sqrt(n/3)", args.std_tol);
    }
    Ok(())
}

fn vocab(args: VocabArgs) -> Result<()> {
    let prefixes: Vec<&str> = args.tasks.iter().map(|t| t.prefix_token()).collect();
    let v = Vocabulary::build(&args.scheme, args.max_dim, &prefixes);
    match &args.out {
        Some(path) => {
            let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut w = BufWriter::new(f);
            v.write_to(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            v.write_to(&mut w)?;
        }
    }
    eprintln!("{}: {} tokens, sha256 {}", args.scheme, v.len(), v.sha256());
    Ok(())
}

fn paramcount(args: ParamArgs) -> Result<()> {
    if args.reference {
        println!("{:<14} {:>7} {:>5} {:<11} {:>12} {:>10}", "experiment", "layers", "dim", "scheme", "params", "vocab");
        for r in REFERENCE_MODELS {
            let shape = TransformerShape::symmetric(r.enc_layers, r.dec_layers, r.dim, 0, args.positions);
            let w = match r.scheme.split_once('/') {
                None => solve_shared_vocab(&shape, r.params).map(|w| w.to_string()),
                Some((_, out)) => reference_vocab(out, args.positions).and_then(|w_out| {
                    let shape = TransformerShape { vocab_out: w_out, ..shape };
                    solve_vocab_in(&shape, r.params).map(|w_in| format!("{w_in}/{w_out}"))
                }),
            }
            .unwrap_or_else(|| "-".to_string());
            println!(
                "{:<14} {:>7} {:>5} {:<11} {:>12} {:>10}",
                r.experiment,
                format!("{}/{}", r.enc_layers, r.dec_layers),
                r.dim,
                r.scheme,
                r.params,
                w
            );
        }
        return Ok(());
    }
    let mut shape = TransformerShape {
        enc_layers: args.enc_layers,
        dec_layers: args.dec_layers,
        enc_dim: args.enc_dim.unwrap_or(args.dim),
        dec_dim: args.dec_dim.unwrap_or(args.dim),
        vocab_in: args.vocab_in.unwrap_or(args.vocab),
        vocab_out: args.vocab_out.unwrap_or(args.vocab),
        positions: args.positions,
    };
    if let Some(path) = &args.manifest {
        let m = Manifest::read(path)?;
        shape.vocab_in = m.vocab_in.size as u64;
        shape.vocab_out = m.vocab_out.size as u64;
        shape.positions = m.max_input_len.max(m.max_output_len) as u64;
    }
    if let Some(total) = args.solve {
        match solve_shared_vocab(&shape, total) {
            Some(w) => println!("{w}"),
            None => bail!("no shared vocabulary size gives {total} parameters"),
        }
        return Ok(());
    }
    let c = param_count(&shape);
    println!("input embedding  {:>12}", c.input_embedding);
    println!("output embedding {:>12}", c.output_embedding);
    println!("encoder          {:>12}", c.encoder);
    println!("decoder          {:>12}", c.decoder);
    println!("total            {:>12}", c.total());
    Ok(())
}

/// Shared vocabulary size solved from the first reference row using `scheme`
/// on both sides.
fn reference_vocab(scheme: &str, positions: u64) -> Option<u64> {
    REFERENCE_MODELS.iter().filter(|r| r.scheme == scheme).find_map(|r| {
        let shape = TransformerShape::symmetric(r.enc_layers, r.dec_layers, r.dim, 0, positions);
        solve_shared_vocab(&shape, r.params)
    })
}

fn ood(args: OodArgs) -> Result<()> {
    let suite = ood_suite(args.n, args.seed);
    let Some(dir) = &args.out_dir else {
        println!("{}", serde_json::to_string_pretty(&suite)?);
        return Ok(());
    };
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let grid = dir.join("suite.json");
    fs::write(&grid, serde_json::to_string_pretty(&suite)? + "\n").with_context(|| format!("writing {}", grid.display()))?;
    if args.count > 0 {
        for (split, entries) in [("train", &suite.train), ("test", &suite.test)] {
            for e in entries {
                let path = dir.join(format!("{split}_{}.jsonl", e.name));
                write_dataset(&e.task(args.scheme), args.count, e.seed, &path)?;
                eprintln!("wrote {}", display_rel(&path, dir));
            }
        }
    }
    Ok(())
}

fn display_rel(path: &Path, dir: &Path) -> String {
    path.strip_prefix(dir).unwrap_or(path).display().to_string()
}
