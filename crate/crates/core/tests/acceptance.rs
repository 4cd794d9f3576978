//! End-to-end acceptance checks. Each criterion prints one PASS or FAIL line;
//! the process exits non-zero if any fails.
#![allow(clippy::approx_constant)]

mod common;

use std::fs;
use std::time::Instant;

use common::{bisect_eigenvalues, lu_determinant, max_diff};
use linseq::evalkit::{eigvec_diagnostics, inverse_diagnostics, score_records, EvalConfig};
use linseq::linalg::{condition_number, invert, sym_eigen, sym_eigenvalues};
use linseq::matseq::{matrix_to_tokens, round_matrix, tokens_to_matrix, SequenceLayout};
use linseq::numcodec::{mantissa_bounds, EncodingScheme, FloatTriplet};
use linseq::randmat::{
    ks_distance, pooled_eigenvalues, rng_for, semicircle_cdf, spectral_resample, wigner_eig_std, with_spectrum, Dims, EigDist,
    EigFamily, EnsembleKind, EnsembleSpec, Moments,
};
use linseq::taskgen::{ood_suite, read_records, write_spec, DatasetSpec, ExampleRecord, Manifest, MatrixTask, Task};
use linseq::{Matrix, Norm};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

const SEED: u64 = 2022;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn codec() -> Outcome {
    let schemes = [
        EncodingScheme::P10,
        EncodingScheme::P100,
        EncodingScheme::P1000,
        EncodingScheme::P10000,
        EncodingScheme::B1999,
        EncodingScheme::FP15,
    ];
    let mut failures = Vec::new();
    for (k, s) in schemes.iter().enumerate() {
        let mut rng = rng_for(SEED, k as u64);
        let (lo, hi) = mantissa_bounds(s.precision);
        let (emin, emax) = s.exponent_range();
        let mut bad = 0;
        for i in 0..100_000 {
            let t = if i % 1000 == 0 {
                FloatTriplet::ZERO
            } else {
                let sign = if rng.random::<bool>() { 1 } else { -1 };
                FloatTriplet::new(sign, rng.random_range(lo..=hi), rng.random_range(emin..=emax), s.precision).unwrap()
            };
            let x = t.to_f64();
            let ok = s
                .encode_value(x)
                .ok()
                .and_then(|toks| s.decode(&toks).ok())
                .is_some_and(|back| back == t && back.to_f64() == x);
            bad += usize::from(!ok);
        }
        if bad > 0 {
            failures.push(format!("{}: {bad} round-trip failures", s.name()));
        }
    }

    let examples: [(EncodingScheme, f64, &[&str]); 8] = [
        (EncodingScheme::P10, 3.14, &["+", "3", "1", "4", "E-2"]),
        (EncodingScheme::P1000, 3.14, &["+", "314", "E-2"]),
        (EncodingScheme::B1999, 3.14, &["314", "E-2"]),
        (EncodingScheme::FP15, 3.14, &["FP314/-2"]),
        (EncodingScheme::P10, -6.02e23, &["-", "6", "0", "2", "E21"]),
        (EncodingScheme::P1000, -6.02e23, &["-", "602", "E21"]),
        (EncodingScheme::B1999, -6.02e23, &["-602", "E21"]),
        (EncodingScheme::FP15, -6.02e23, &["FP-602/21"]),
    ];
    for (s, x, want) in examples {
        match s.encode_value(x) {
            Ok(got) if got == want => {}
            Ok(got) => failures.push(format!("{} {x}: {got:?} != {want:?}", s.name())),
            Err(e) => failures.push(format!("{} {x}: expected {want:?}, got error: {e}", s.name())),
        }
    }
    check(
        failures.is_empty(),
        if failures.is_empty() {
            "6 schemes x 1e5 values round-trip; 8 worked examples match".into()
        } else {
            failures.join("; ")
        },
    )
}

fn lengths() -> Outcome {
    let m = Matrix::from_fn(20, 20, |i, j| (i * 20 + j) as f64 * 0.731 - 97.0);
    let p10 = matrix_to_tokens(&m, &SequenceLayout::new(EncodingScheme::P10)).map_err(|e| e.to_string())?.len();
    let fp15 = matrix_to_tokens(&m, &SequenceLayout::new(EncodingScheme::FP15)).map_err(|e| e.to_string())?.len();
    check(p10 == 2002 && fp15 == 402, format!("20x20: P10 {p10} tokens, FP15 {fp15} tokens"))
}

struct Pooled {
    n20_uniform: Vec<f64>,
}

fn wigner(pooled: &mut Option<Pooled>) -> Outcome {
    let sigma = 10.0 / 3f64.sqrt();
    let laws = [
        ("uniform", EnsembleKind::IidUniform { a: 10.0 }),
        ("gaussian", EnsembleKind::IidGaussian { sigma }),
        ("laplace", EnsembleKind::IidLaplace { sigma }),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, kind) in &laws {
        for n in [5, 10, 15, 20] {
            let spec = EnsembleSpec {
                kind: kind.clone(),
                symmetric: true,
                dims: Dims::square(n),
            };
            let eig = pooled_eigenvalues(&spec, 100_000, SEED).map_err(|e| e.to_string())?;
            let std = Moments::of(&eig).std;
            let want = wigner_eig_std(10.0, n);
            let diff = std - want;
            ok &= diff.abs() <= 0.01;
            parts.push(format!("{name} n={n} {std:.4} ({diff:+.4})"));
            if *name == "uniform" && n == 20 {
                *pooled = Some(Pooled { n20_uniform: eig });
            }
        }
    }
    check(ok, parts.join(", "))
}

fn semicircle(pooled: &Option<Pooled>) -> Outcome {
    let eig = match pooled {
        Some(p) => p.n20_uniform.clone(),
        None => {
            pooled_eigenvalues(&EnsembleSpec::wigner(10.0, 20), 100_000, SEED).map_err(|e| e.to_string())?
        }
    };
    let sigma = wigner_eig_std(10.0, 20);
    let d = ks_distance(&eig, |x| semicircle_cdf(x, sigma));
    check(d <= 0.02, format!("KS distance {d:.5} over {} eigenvalues", eig.len()))
}

fn oracles() -> Outcome {
    let spec = EnsembleSpec::wigner(10.0, 5);
    let (mut worst_diag, mut worst_trace, mut worst_det, mut worst_bisect) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for i in 0..10_000 {
        let m = spec.sample_seeded(SEED, i).map_err(|e| e.to_string())?;
        let e = sym_eigen(&m).map_err(|e| e.to_string())?;
        let d = e.d();
        let resid = e.vectors.matmul(&m).unwrap().matmul(&e.vectors.transpose()).unwrap().sub(&d).unwrap();
        worst_diag = worst_diag.max(resid.norm(Norm::L1) / d.norm(Norm::L1));
        let tr: f64 = e.values.iter().sum();
        worst_trace = worst_trace.max((tr - m.trace()).abs() / m.frobenius());
        let prod: f64 = e.values.iter().product();
        let det = lu_determinant(&m);
        worst_det = worst_det.max((prod - det).abs() / det.abs().max(f64::MIN_POSITIVE));
        worst_bisect = worst_bisect.max(max_diff(&e.values, &bisect_eigenvalues(&m)));
    }

    let mut rng = rng_for(SEED, 1 << 40);
    let mut worst_inv = 0.0f64;
    let mut inverted = 0;
    while inverted < 10_000 {
        let n = rng.random_range(2..=8);
        let m = Matrix::from_fn(n, n, |_, _| rng.random_range(-10.0..10.0));
        if condition_number(&m).map_err(|e| e.to_string())? >= 1e3 {
            continue;
        }
        let p = invert(&m).map_err(|e| e.to_string())?;
        let r = p.matmul(&m).unwrap().sub(&Matrix::identity(n)).unwrap().norm(Norm::L1) / n as f64;
        worst_inv = worst_inv.max(r);
        inverted += 1;
    }
    let ok = worst_diag <= 1e-9 && worst_trace <= 1e-8 && worst_det <= 1e-6 && worst_bisect <= 1e-8 && worst_inv <= 1e-10;
    check(
        ok,
        format!(
            "10^4 5x5: diag {worst_diag:.1e}, trace {worst_trace:.1e}, det {worst_det:.1e}, bisection {worst_bisect:.1e}; \
             10^4 inverses: {worst_inv:.1e}"
        ),
    )
}

fn spectral() -> Outcome {
    let mut rng = rng_for(SEED, 2 << 40);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = rng.random_range(1..=10);
        let mut values: Vec<f64> = (0..n).map(|_| rng.random_range(-30.0..30.0)).collect();
        let m = with_spectrum(&values, &mut rng).map_err(|e| e.to_string())?;
        values.sort_by(|a, b| b.partial_cmp(a).unwrap());
        worst = worst.max(max_diff(&sym_eigenvalues(&m).map_err(|e| e.to_string())?, &values));
    }
    let pos = EigDist::new(EigFamily::Positive, wigner_eig_std(10.0, 5));
    let mut positive = 0;
    for i in 0..10_000 {
        let n = 1 + (i % 10) as usize;
        let m = spectral_resample(&pos, n, &mut rng_for(SEED, i)).map_err(|e| e.to_string())?;
        positive += usize::from(sym_eigenvalues(&m).map_err(|e| e.to_string())?.iter().all(|&x| x > 0.0));
    }
    check(
        worst <= 1e-8 && positive == 10_000,
        format!("10^3 spectra recovered to {worst:.1e}; {positive}/10000 positive spectra"),
    )
}

fn p1000(t: Task, dims: Dims) -> MatrixTask {
    let mut c = MatrixTask::new(t, dims, EncodingScheme::P1000, EncodingScheme::P1000);
    if matches!(t, Task::Svd | Task::SingularValues) {
        c.input.symmetric = false;
    }
    c
}

fn in_memory(spec: &DatasetSpec, count: u64) -> Result<(Manifest, Vec<ExampleRecord>), String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("d.jsonl");
    let m = write_spec(spec, count, SEED, &path).map_err(|e| e.to_string())?;
    let recs = read_records(&path)
        .map_err(|e| e.to_string())?
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    Ok((m, recs))
}

fn evaluation() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    let cfg = EvalConfig::default();
    for t in Task::ALL {
        let dims = if matches!(t, Task::Svd | Task::SingularValues) {
            "3-5x3-5".parse().unwrap()
        } else {
            Dims::square(5)
        };
        let (m, recs) = in_memory(&DatasetSpec::single(p1000(t, dims)).map_err(|e| e.to_string())?, 1000)?;
        let preds: Vec<String> = recs.iter().map(|r| r.output_tokens.clone()).collect();
        let report = score_records(&m, &recs, &preds, &cfg).map_err(|e| e.to_string())?;
        let acc = report.accuracy(Norm::L1, 0.005).unwrap();
        ok &= acc == 1.0;
        parts.push(format!("{} {:.1}%", t.name(), 100.0 * acc));
    }

    let (m, recs) = in_memory(&DatasetSpec::single(p1000(Task::Add, Dims::square(5))).unwrap(), 1000)?;
    let layout = SequenceLayout::new(EncodingScheme::P1000);
    let scaled: Vec<String> = recs
        .iter()
        .map(|r| {
            let o = tokens_to_matrix(&r.output_token_list(), &layout).unwrap();
            matrix_to_tokens(&o.scale(1.03), &layout).unwrap().join(" ")
        })
        .collect();
    let cfg_tols = EvalConfig {
        tolerances: vec![0.02, 0.05],
        norms: vec![Norm::L1],
        ..EvalConfig::default()
    };
    let report = score_records(&m, &recs, &scaled, &cfg_tols).map_err(|e| e.to_string())?;
    let (at2, at5) = (report.accuracy(Norm::L1, 0.02).unwrap(), report.accuracy(Norm::L1, 0.05).unwrap());
    ok &= at2 == 0.0 && at5 == 1.0;
    parts.push(format!("x1.03: {:.1}% at 2%, {:.1}% at 5%", 100.0 * at2, 100.0 * at5));

    let tols: Vec<f64> = (0..=40).map(|k| k as f64 * 0.0025).collect();
    let cfg_grid = EvalConfig {
        tolerances: tols.clone(),
        ..EvalConfig::default()
    };
    let mut rng = rng_for(SEED, 3 << 40);
    let corrupted: Vec<String> = recs
        .iter()
        .map(|r| {
            let o = tokens_to_matrix(&r.output_token_list(), &layout).unwrap();
            let eps: f64 = rng.random_range(0.0..0.1);
            let p = Matrix::from_fn(o.rows(), o.cols(), |i, j| {
                o[(i, j)] * (1.0 + eps * Distribution::<f64>::sample(&StandardNormal, &mut rng))
            });
            matrix_to_tokens(&p, &layout).unwrap().join(" ")
        })
        .collect();
    let report = score_records(&m, &recs, &corrupted, &cfg_grid).map_err(|e| e.to_string())?;
    let monotone = Norm::ALL.iter().all(|&norm| {
        let accs: Vec<f64> = tols.iter().map(|&t| report.accuracy(norm, t).unwrap()).collect();
        accs.windows(2).all(|w| w[0] <= w[1])
    });
    ok &= monotone;
    parts.push(format!("monotone over {} tolerances: {monotone}", tols.len()));
    check(ok, parts.join(", "))
}

fn diagnostics() -> Outcome {
    let spec = EnsembleSpec::wigner(10.0, 5);
    let (mut cond, mut norms, mut dots) = (0.0f64, 0.0f64, 0.0f64);
    let mut separated = 0;
    let trials = 1000;
    for i in 0..trials {
        let m = spec.sample_seeded(SEED, i).map_err(|e| e.to_string())?;
        let e = sym_eigen(&m).map_err(|e| e.to_string())?;
        let d = eigvec_diagnostics(&m, &e.values, &e.vectors, &e.values).map_err(|e| e.to_string())?;
        cond = cond.max((d.cond - 1.0).abs());
        norms = norms.max(d.row_norms.iter().map(|x| (x - 1.0).abs()).fold(0.0, f64::max));
        dots = dots.max(d.successive_dots.iter().map(|x| x.abs()).fold(0.0, f64::max));

        let mut rng = rng_for(SEED, i | 4 << 40);
        let h = Matrix::from_fn(5, 5, |r, c| e.vectors[(r, c)] + 0.05 * Distribution::<f64>::sample(&StandardNormal, &mut rng));
        let bad = eigvec_diagnostics(&m, &e.values, &h, &e.values).map_err(|e| e.to_string())?;
        separated += usize::from(bad.cond > d.cond);
    }

    let mut inflation = Vec::new();
    for target in [10.0, 100.0] {
        let mut ratio = 0.0;
        for k in 0..200 {
            let mut rng = rng_for(SEED, k | 5 << 40);
            let u = sym_eigen(&with_spectrum(&[0.0, 1.0, 2.0, 3.0, 4.0], &mut rng).unwrap()).unwrap().vectors;
            let v = sym_eigen(&with_spectrum(&[0.0, 1.0, 2.0, 3.0, 4.0], &mut rng).unwrap()).unwrap().vectors;
            let s: Vec<f64> = (0..5).map(|i| f64::powf(target, -(i as f64) / 4.0)).collect();
            let a = u.transpose().matmul(&Matrix::diag(&s)).unwrap().matmul(&v).unwrap();
            let inv = invert(&a).map_err(|e| e.to_string())?;
            let noise = Matrix::from_fn(5, 5, |_, _| Distribution::<f64>::sample(&StandardNormal, &mut rng));
            let p = inv.add(&noise.scale(0.01 * inv.norm(Norm::L1) / noise.norm(Norm::L1))).unwrap();
            let d = inverse_diagnostics(&a, &p).map_err(|e| e.to_string())?;
            ratio += d.residual / d.distance;
        }
        inflation.push(ratio / 200.0);
    }
    let ok = cond <= 1e-6 && norms <= 1e-10 && dots <= 1e-10 && separated == trials as usize && inflation[1] > inflation[0];
    check(
        ok,
        format!(
            "exact: |cond-1| {cond:.1e}, |norm-1| {norms:.1e}, |dot| {dots:.1e}; corrupted cond higher in {separated}/{trials}; \
             residual/distance {:.3} at cond 10, {:.3} at cond 100",
            inflation[0], inflation[1]
        ),
    )
}

fn noise() -> Outcome {
    let layout = SequenceLayout::new(EncodingScheme::P1000);
    let mut rates = Vec::new();
    for (level, tau) in [(0.01, 0.05), (0.05, 0.02)] {
        let task = p1000(Task::Add, Dims::square(5)).with_noise(level);
        let spec = DatasetSpec::single(task.clone()).map_err(|e| e.to_string())?;
        let (m, recs) = in_memory(&spec, 10_000)?;
        let preds: Vec<String> = (0..10_000u64)
            .map(|i| {
                let ex = task.make_example(i, SEED).unwrap();
                let p = round_matrix(&Task::Add.solve(&ex.input).unwrap(), &EncodingScheme::P1000).unwrap();
                matrix_to_tokens(&p, &layout).unwrap().join(" ")
            })
            .collect();
        let cfg = EvalConfig {
            tolerances: vec![tau],
            norms: vec![Norm::L1],
            ..EvalConfig::default()
        };
        let report = score_records(&m, &recs, &preds, &cfg).map_err(|e| e.to_string())?;
        rates.push(report.accuracy(Norm::L1, tau).unwrap());
    }
    check(
        rates[0] >= 0.99 && rates[1] <= 0.01,
        format!(
            "noise 0.01 at 5%: {:.2}% pass; noise 0.05 at 2%: {:.2}% pass",
            100.0 * rates[0],
            100.0 * rates[1]
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut specs: Vec<(String, DatasetSpec)> = Vec::new();
    for t in Task::ALL {
        let dims = if matches!(t, Task::Svd | Task::SingularValues) {
            "3-6x3-6".parse().unwrap()
        } else {
            Dims::Square { min: 3, max: 6 }
        };
        specs.push((t.name().to_string(), DatasetSpec::single(p1000(t, dims).with_noise(0.01)).unwrap()));
    }
    let joint = DatasetSpec::joint(vec![
        (1.0, p1000(Task::Transpose, Dims::square(5))),
        (1.0, p1000(Task::Add, Dims::square(5))),
        (2.0, p1000(Task::Eigenvalues, Dims::square(5))),
    ])
    .unwrap();
    specs.push(("joint".into(), joint));
    let suite = ood_suite(5, SEED);
    for e in suite.entries() {
        specs.push((format!("ood_{}", e.name), DatasetSpec::single(e.task(EncodingScheme::P1000)).unwrap()));
    }
    if ood_suite(5, SEED) != suite {
        return Err("OOD grid differs between builds".into());
    }

    let mut differing = Vec::new();
    for (name, spec) in &specs {
        let mut files = Vec::new();
        for threads in [1, 4] {
            let path = dir.path().join(format!("{name}_{threads}.jsonl"));
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| e.to_string())?;
            pool.install(|| write_spec(spec, 1500, SEED, &path)).map_err(|e| e.to_string())?;
            let manifest = fs::read(linseq::taskgen::manifest_path(&path)).map_err(|e| e.to_string())?;
            files.push((fs::read(&path).map_err(|e| e.to_string())?, manifest));
        }
        let again = dir.path().join(format!("{name}_again.jsonl"));
        write_spec(spec, 1500, SEED, &again).map_err(|e| e.to_string())?;
        if files[0].0 != files[1].0 || files[0].0 != fs::read(&again).map_err(|e| e.to_string())? {
            differing.push(name.clone());
        }
    }
    check(
        differing.is_empty(),
        if differing.is_empty() {
            format!("{} datasets (incl. {} OOD grid entries) byte-identical across runs and thread counts", specs.len(), 18)
        } else {
            format!("differing: {}", differing.join(", "))
        },
    )
}

fn main() {
    let mut failed = 0;
    let mut pooled = None;
    let mut run = |name: &str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name} ({secs:.1}s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name} ({secs:.1}s): {detail}");
            }
        }
    };
    run("codec round-trip and worked examples", &mut codec);
    run("sequence lengths", &mut lengths);
    run("wigner eigenvalue std", &mut || wigner(&mut pooled));
    run("semicircle convergence", &mut || semicircle(&pooled));
    run("oracle residuals", &mut oracles);
    run("spectral resampling", &mut spectral);
    run("evaluation semantics", &mut evaluation);
    run("diagnostics", &mut diagnostics);
    run("noise contract", &mut noise);
    run("determinism", &mut determinism);
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
