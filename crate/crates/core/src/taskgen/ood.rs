//! Train and test distributions for out-of-distribution eigenvalue runs.
//!
//! Test sets are named by family and by the ratio of their standard
//! deviation to the baseline's. For Wigner test sets the ratio applies to
//! the coefficients (`A` is scaled); for spectral families it applies to the
//! eigenvalues, relative to the eigenvalue std of a baseline Wigner matrix.

use serde::{Deserialize, Serialize};

use super::task::{MatrixTask, Task};
use crate::numcodec::EncodingScheme;
use crate::randmat::{wigner_eig_std, Dims, EigDist, EigFamily, EnsembleKind, EnsembleSpec};

/// Coefficient bound of the baseline training set.
pub const BASELINE_A: f64 = 10.0;

/// Coefficient std of `U[-10, 10]`, about 5.77.
pub fn sigma_tr() -> f64 {
    BASELINE_A / 3f64.sqrt()
}

/// Wigner test ratios.
pub const WIGNER_RATIOS: [f64; 3] = [0.3, 1.0, 1.2];
/// Ratios of the spectral test families.
pub const SPECTRAL_RATIOS: [f64; 2] = [0.6, 1.0];
/// Spectral test families, in column order.
pub const TEST_FAMILIES: [EigFamily; 4] = [EigFamily::Positive, EigFamily::Uniform, EigFamily::Gaussian, EigFamily::Laplace];

/// One named distribution of the grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OodEntry {
    pub name: String,
    /// Std ratio to the baseline (test columns only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    pub spec: EnsembleSpec,
    pub seed: u64,
}

impl OodEntry {
    /// Eigenvalue task on this distribution.
    pub fn task(&self, scheme: EncodingScheme) -> MatrixTask {
        let mut t = MatrixTask::new(Task::Eigenvalues, self.spec.dims, scheme, scheme);
        t.input = self.spec.clone();
        t
    }
}

/// Seven training rows and eleven test columns for `n x n` matrices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OodSuite {
    pub n: usize,
    pub sigma_tr: f64,
    pub train: Vec<OodEntry>,
    pub test: Vec<OodEntry>,
}

impl OodSuite {
    pub fn entries(&self) -> impl Iterator<Item = &OodEntry> {
        self.train.iter().chain(&self.test)
    }

    pub fn get(&self, name: &str) -> Option<&OodEntry> {
        self.entries().find(|e| e.name == name)
    }
}

fn spectral(family: EigFamily, scale: f64) -> EnsembleKind {
    EnsembleKind::SpectralResample {
        eig: EigDist::new(family, scale),
    }
}

fn even_mixture(kinds: Vec<EnsembleKind>) -> EnsembleKind {
    EnsembleKind::Mixture {
        components: kinds.into_iter().map(|k| (1.0, k)).collect(),
    }
}

/// The grid for `n x n` symmetric matrices. Entry `k` (training rows first)
/// is seeded with `base_seed + k`.
pub fn ood_suite(n: usize, base_seed: u64) -> OodSuite {
    let wigner = EnsembleKind::IidUniform { a: BASELINE_A };
    let eig_std = wigner_eig_std(BASELINE_A, n);
    let train_kinds = vec![
        ("wigner_a10", wigner.clone()),
        ("wigner_a1_100", EnsembleKind::UniformScaled { a_min: 1.0, a_max: 100.0 }),
        ("wigner_positive", even_mixture(vec![wigner.clone(), spectral(EigFamily::Positive, eig_std)])),
        ("wigner_gaussian", even_mixture(vec![wigner.clone(), spectral(EigFamily::Gaussian, eig_std)])),
        ("wigner_laplace", even_mixture(vec![wigner, spectral(EigFamily::Laplace, eig_std)])),
        ("laplace", spectral(EigFamily::Laplace, eig_std)),
        (
            "gaussian_uniform_laplace",
            even_mixture(vec![
                spectral(EigFamily::Gaussian, eig_std),
                spectral(EigFamily::Uniform, eig_std),
                spectral(EigFamily::Laplace, eig_std),
            ]),
        ),
    ];

    let mut test_kinds = Vec::new();
    for r in WIGNER_RATIOS {
        test_kinds.push((format!("wigner_{r:.1}"), r, EnsembleKind::IidUniform { a: BASELINE_A * r }));
    }
    for family in TEST_FAMILIES {
        for r in SPECTRAL_RATIOS {
            test_kinds.push((format!("{}_{r:.1}", family.name()), r, spectral(family, eig_std * r)));
        }
    }

    let spec = |kind| EnsembleSpec {
        kind,
        symmetric: true,
        dims: Dims::square(n),
    };
    let train: Vec<OodEntry> = train_kinds
        .into_iter()
        .enumerate()
        .map(|(k, (name, kind))| OodEntry {
            name: name.to_string(),
            ratio: None,
            spec: spec(kind),
            seed: base_seed.wrapping_add(k as u64),
        })
        .collect();
    let offset = train.len() as u64;
    let test = test_kinds
        .into_iter()
        .enumerate()
        .map(|(k, (name, r, kind))| OodEntry {
            name,
            ratio: Some(r),
            spec: spec(kind),
            seed: base_seed.wrapping_add(offset + k as u64),
        })
        .collect();
    OodSuite {
        n,
        sigma_tr: sigma_tr(),
        train,
        test,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_shape() {
        let s = ood_suite(5, 100);
        assert_eq!(s.train.len(), 7);
        assert_eq!(s.test.len(), 11);
        assert!((s.sigma_tr - 5.77).abs() < 0.005);
        assert_eq!(s.train[0].spec, EnsembleSpec::wigner(10.0, 5));
        let names: Vec<&str> = s.test.iter().map(|e| e.name.as_str()).collect();
        assert_eq!(names[..4], ["wigner_0.3", "wigner_1.0", "wigner_1.2", "positive_0.6"]);
        assert_eq!(names[10], "laplace_1.0");
        for e in s.entries() {
            e.spec.validate().unwrap();
            e.task(EncodingScheme::P1000).validate().unwrap();
        }
        let seeds: std::collections::BTreeSet<u64> = s.entries().map(|e| e.seed).collect();
        assert_eq!(seeds.len(), 18);
    }

    #[test]
    fn wigner_test_columns_scale_coefficients() {
        let s = ood_suite(5, 0);
        for e in &s.test[..3] {
            let r = e.ratio.unwrap();
            assert!((e.spec.coeff_std(5) - r * s.sigma_tr).abs() < 1e-12);
        }
    }
}
