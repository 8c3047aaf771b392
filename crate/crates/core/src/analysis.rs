//! Solvability labeling and principal component analysis of the case state
//! space.

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agents::{run_episode, EnvSpec, RandomPolicy};
use crate::env::Case;
use crate::linalg::eigen_symmetric;
use crate::reward::RewardConfig;
use crate::seeding::derive_seed;

/// Labels each case by rolling the random policy: a case is unsolvable when
/// no trial reaches a terminal state within the horizon. Returns `true` for
/// solvable cases. Rollouts fan out across cases; labels are deterministic
/// for a fixed seed regardless of thread count.
pub fn label_solvability(
    spec: &EnvSpec,
    cases: &[&Case],
    horizon: usize,
    trials: usize,
    reward_config: &RewardConfig,
    seed: u64,
) -> Vec<bool> {
    assert!(horizon >= 1, "horizon must be >= 1");
    assert!(trials >= 1, "trials must be >= 1");
    let n_actions = spec.n_actions();
    cases
        .par_iter()
        .enumerate()
        .map(|(idx, case)| {
            let mut env = spec.environment(horizon);
            (0..trials).any(|trial| {
                let mut policy = RandomPolicy::new(
                    n_actions,
                    derive_seed(seed, (idx * trials + trial) as u64),
                );
                run_episode(&mut env, case, &mut policy, reward_config).solved
            })
        })
        .collect()
}

/// Principal components of a sample matrix (rows are observations).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Pca {
    /// column means subtracted before the decomposition
    pub mean: Vec<f64>,
    /// orthonormal components, one per row, sorted by explained variance
    pub components: Vec<Vec<f64>>,
    /// fraction of total variance per component, descending, summing to 1
    pub explained_variance_ratio: Vec<f64>,
}

impl Pca {
    /// Projects one observation onto the first `k` components.
    pub fn project(&self, x: &[f64], k: usize) -> Vec<f64> {
        assert_eq!(x.len(), self.mean.len());
        self.components[..k]
            .iter()
            .map(|c| {
                c.iter()
                    .zip(x.iter().zip(&self.mean))
                    .map(|(&ci, (&xi, &mi))| ci * (xi - mi))
                    .sum()
            })
            .collect()
    }

    /// Reconstructs the centered observation from all components.
    pub fn reconstruct_centered(&self, projection: &[f64]) -> Vec<f64> {
        let d = self.mean.len();
        let mut out = vec![0.0; d];
        for (coef, component) in projection.iter().zip(&self.components) {
            for (o, &c) in out.iter_mut().zip(component) {
                *o += coef * c;
            }
        }
        out
    }
}

/// Eigen-decomposition of the sample covariance (centering only, no
/// per-feature scaling). Rank-deficient inputs yield zero ratios for the
/// null directions.
pub fn pca(matrix: &Array2<f64>) -> Pca {
    let (n, d) = matrix.dim();
    assert!(n >= 2, "need at least two observations");

    let mut mean = vec![0.0; d];
    for row in matrix.rows() {
        for (m, &v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }

    let mut cov = Array2::<f64>::zeros((d, d));
    for row in matrix.rows() {
        let centered: Vec<f64> = row.iter().zip(&mean).map(|(&v, &m)| v - m).collect();
        for i in 0..d {
            for j in i..d {
                cov[(i, j)] += centered[i] * centered[j];
            }
        }
    }
    for i in 0..d {
        for j in i..d {
            cov[(i, j)] /= (n - 1) as f64;
            cov[(j, i)] = cov[(i, j)];
        }
    }

    let (eigenvalues, eigenvectors) = eigen_symmetric(&cov);
    // numerical noise can leave eigenvalues a hair below zero
    let clamped: Vec<f64> = eigenvalues.iter().map(|&l| l.max(0.0)).collect();
    let total: f64 = clamped.iter().sum();
    let explained_variance_ratio = if total > 0.0 {
        clamped.iter().map(|&l| l / total).collect()
    } else {
        vec![0.0; d]
    };
    let components = (0..d)
        .map(|j| (0..d).map(|i| eigenvectors[(i, j)]).collect())
        .collect();
    Pca {
        mean,
        components,
        explained_variance_ratio,
    }
}

/// One row of the solvability scatter output: case id, 2-D projection,
/// solvable label.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PcaPoint {
    pub case_id: String,
    pub pc1: f64,
    pub pc2: f64,
    pub solvable: bool,
}

/// Full analysis result: the decomposition plus per-case projections and
/// labels.
#[derive(Debug, Clone)]
pub struct PcaResult {
    pub pca: Pca,
    pub points: Vec<PcaPoint>,
}

/// Labels every case with the random policy and projects the initial states
/// onto the first two principal components.
pub fn solvability_pca(
    spec: &EnvSpec,
    cases: &[&Case],
    horizon: usize,
    trials: usize,
    reward_config: &RewardConfig,
    seed: u64,
) -> PcaResult {
    let labels = label_solvability(spec, cases, horizon, trials, reward_config, seed);
    let d = cases[0].initial_state.len();
    let mut matrix = Array2::zeros((cases.len(), d));
    for (i, case) in cases.iter().enumerate() {
        for (j, &v) in case.initial_state.as_slice().iter().enumerate() {
            matrix[(i, j)] = v;
        }
    }
    let decomposition = pca(&matrix);
    let points = cases
        .iter()
        .zip(&labels)
        .map(|(case, &solvable)| {
            let p = decomposition.project(case.initial_state.as_slice(), 2);
            PcaPoint {
                case_id: case.case_id.clone(),
                pc1: p[0],
                pc2: p[1],
                solvable,
            }
        })
        .collect();
    PcaResult {
        pca: decomposition,
        points,
    }
}
