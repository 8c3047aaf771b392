//! Imitation learning: supervised regression from violating states to the
//! actions that solved them, trained until the evaluated episode length
//! meets the objective.

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{evaluate_episode_length, Dataset, EnvSpec, EvalConfig, Policy};
use crate::env::{ActionVec, Case, StateVec};
use crate::nn::{AdamState, Mlp};
use crate::reward::RewardConfig;
use crate::seeding::derive_seed;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IlConfig {
    pub hidden: Vec<usize>,
    pub lr: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
}

impl Default for IlConfig {
    fn default() -> Self {
        IlConfig {
            hidden: vec![64, 64],
            lr: 0.001,
            batch_size: 128,
            max_epochs: 20,
        }
    }
}

/// Greedy-only policy network mapping states to setpoints; raw regression
/// output is clipped into the action box.
#[derive(Clone)]
pub struct IlAgent {
    pub net: Mlp,
    pub n_actions: usize,
}

impl IlAgent {
    pub fn act(&self, state: &StateVec) -> ActionVec {
        ActionVec::clipped(self.net.forward(state.as_slice()))
    }
}

impl Policy for IlAgent {
    fn action(&mut self, state: &StateVec) -> ActionVec {
        self.act(state)
    }

    fn name(&self) -> String {
        "il-greedy".to_string()
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct IlEpochRecord {
    pub epoch: usize,
    pub train_mse: f64,
    pub eval_len: f64,
}

pub struct IlTrainResult {
    pub agent: IlAgent,
    pub epochs_used: usize,
    /// best evaluated episode length seen across epochs
    pub best_eval: f64,
    /// true when the objective was met before the epoch cap
    pub converged: bool,
    pub log: Vec<IlEpochRecord>,
}

/// Minimizes mean squared error between the policy output and the stored
/// actions, evaluating on `test_cases` after every epoch; terminates when
/// the mean episode length reaches the objective or the epoch cap fires.
pub fn il_train(
    spec: &EnvSpec,
    dataset: &Dataset,
    test_cases: &[&Case],
    reward_config: &RewardConfig,
    config: &IlConfig,
    eval_config: &EvalConfig,
    seed: u64,
) -> IlTrainResult {
    let batch_size = config.batch_size.clamp(32, 512);
    assert!(
        dataset.pairs.len() >= batch_size,
        "dataset smaller than one batch"
    );
    let n_state = dataset.pairs[0].state.len();
    let n_actions = dataset.pairs[0].action.len();

    let mut widths = vec![n_state];
    widths.extend(&config.hidden);
    widths.push(n_actions);
    let mut init_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0));
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 1));
    let mut eval_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 2));

    let mut agent = IlAgent {
        net: Mlp::new(&widths, &mut init_rng),
        n_actions,
    };
    let mut optimizer = AdamState::new(&agent.net, config.lr);

    let mut log = Vec::new();
    let mut best_eval = f64::INFINITY;
    let mut converged = false;
    let mut epochs_used = 0;

    for epoch in 1..=config.max_epochs {
        epochs_used = epoch;
        // shuffled full pass over D in minibatches
        let mut order: Vec<usize> = (0..dataset.pairs.len()).collect();
        for i in (1..order.len()).rev() {
            let j = shuffle_rng.random_range(0..=i);
            order.swap(i, j);
        }
        let mut epoch_sq_err = 0.0;
        let mut samples_seen = 0;
        for chunk in order.chunks(batch_size) {
            if chunk.len() < batch_size {
                break; // drop the ragged tail; epochs stay homogeneous
            }
            let b = chunk.len();
            let mut x = Array2::zeros((b, n_state));
            let mut y = Array2::zeros((b, n_actions));
            for (row, &idx) in chunk.iter().enumerate() {
                let pair = &dataset.pairs[idx];
                for (col, &v) in pair.state.iter().enumerate() {
                    x[(row, col)] = v;
                }
                for (col, &v) in pair.action.iter().enumerate() {
                    y[(row, col)] = v;
                }
            }
            let (out, cache) = agent.net.forward_batch(x.view());
            let resid = &out - &y;
            epoch_sq_err += resid.iter().map(|v| v * v).sum::<f64>();
            samples_seen += b;
            let scale = 2.0 / (b * n_actions) as f64;
            let d_out = resid.mapv(|v| v * scale);
            let (grads, _) = agent.net.backward(&cache, d_out.view());
            optimizer.step(&mut agent.net, &grads);
        }
        let train_mse = epoch_sq_err / (samples_seen * n_actions).max(1) as f64;

        let mut eval_policy = agent.clone();
        let eval_len = evaluate_episode_length(
            spec,
            test_cases,
            &mut eval_policy,
            reward_config,
            eval_config,
            &mut eval_rng,
        );
        log.push(IlEpochRecord {
            epoch,
            train_mse,
            eval_len,
        });
        best_eval = best_eval.min(eval_len);
        if eval_len <= eval_config.l_objective {
            converged = true;
            break;
        }
    }

    IlTrainResult {
        agent,
        epochs_used,
        best_eval,
        converged,
        log,
    }
}
