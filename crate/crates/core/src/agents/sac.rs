//! Soft actor-critic: twin critics with Polyak-averaged targets, a
//! tanh-squashed Gaussian policy, and learned entropy temperature.

use ndarray::{Array2, ArrayView2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{
    evaluate_episode_length, random_action, EnvSpec, EvalConfig, Policy, ReplayBuffer, Transition,
};
use crate::env::{ActionVec, Case, StateVec, ACTION_MAX, ACTION_MIN};
use crate::nn::{
    gaussian_policy_sample, sample_gradients, AdamScalar, AdamState, GaussianSample, Mlp,
    SquashBounds,
};
use crate::reward::RewardConfig;
use crate::seeding::derive_seed;

pub const ACTION_BOUNDS: SquashBounds = SquashBounds {
    low: ACTION_MIN,
    high: ACTION_MAX,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SacConfig {
    pub hidden: Vec<usize>,
    pub lr: f64,
    pub batch_size: usize,
    pub replay_capacity: usize,
    pub tau: f64,
    pub target_update_period: u64,
    pub initial_log_alpha: f64,
    /// env steps collected with uniform random actions before the policy
    /// takes over
    pub initial_random_steps: u64,
}

impl Default for SacConfig {
    fn default() -> Self {
        SacConfig {
            hidden: vec![64, 64],
            lr: 0.0003,
            batch_size: 256,
            replay_capacity: 100_000,
            tau: 0.005,
            target_update_period: 1,
            initial_log_alpha: 1.0,
            initial_random_steps: 1000,
        }
    }
}

/// A Gaussian policy network: output `[mean | log_std]`, squashed into the
/// action box.
#[derive(Clone)]
pub struct GaussianPolicyHead {
    pub net: Mlp,
    pub n_actions: usize,
}

impl GaussianPolicyHead {
    /// Deterministic action: the squashed mean.
    pub fn greedy_action(&self, state: &StateVec) -> ActionVec {
        let out = self.net.forward(state.as_slice());
        let (mean, log_std) = out.split_at(self.n_actions);
        let zeros = vec![0.0; self.n_actions];
        let sample = gaussian_policy_sample(mean, log_std, ACTION_BOUNDS, &zeros);
        ActionVec::clipped(sample.action)
    }

    /// Reparameterized draw; returns the action and its log-probability.
    pub fn sample_action(&self, state: &StateVec, rng: &mut ChaCha8Rng) -> (ActionVec, f64) {
        let out = self.net.forward(state.as_slice());
        let (mean, log_std) = out.split_at(self.n_actions);
        let noise: Vec<f64> = (0..self.n_actions)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        let sample = gaussian_policy_sample(mean, log_std, ACTION_BOUNDS, &noise);
        (ActionVec::clipped(sample.action), sample.log_prob)
    }
}

/// Greedy wrapper: a pure function of `(network, state)`.
pub struct GreedyGaussianPolicy(pub GaussianPolicyHead);

impl Policy for GreedyGaussianPolicy {
    fn action(&mut self, state: &StateVec) -> ActionVec {
        self.0.greedy_action(state)
    }

    fn name(&self) -> String {
        "sac-greedy".to_string()
    }
}

/// Sampling wrapper with its own noise stream.
pub struct StochasticGaussianPolicy {
    pub head: GaussianPolicyHead,
    pub rng: ChaCha8Rng,
}

impl StochasticGaussianPolicy {
    pub fn new(head: GaussianPolicyHead, seed: u64) -> StochasticGaussianPolicy {
        StochasticGaussianPolicy {
            head,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Policy for StochasticGaussianPolicy {
    fn action(&mut self, state: &StateVec) -> ActionVec {
        self.head.sample_action(state, &mut self.rng).0
    }

    fn name(&self) -> String {
        "sac-stochastic".to_string()
    }
}

/// Loss diagnostics of one gradient step.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SacLosses {
    pub critic_loss: f64,
    pub policy_loss: f64,
    pub alpha_loss: f64,
    pub alpha: f64,
    pub mean_log_prob: f64,
}

pub struct SacAgent {
    pub policy: Mlp,
    pub q1: Mlp,
    pub q2: Mlp,
    pub q1_target: Mlp,
    pub q2_target: Mlp,
    pub log_alpha: f64,
    pub target_entropy: f64,
    pub gamma: f64,
    config: SacConfig,
    n_state: usize,
    n_actions: usize,
    opt_policy: AdamState,
    opt_q1: AdamState,
    opt_q2: AdamState,
    opt_alpha: AdamScalar,
    noise_rng: ChaCha8Rng,
    updates: u64,
}

impl SacAgent {
    pub fn new(
        n_state: usize,
        n_actions: usize,
        gamma: f64,
        config: SacConfig,
        seed: u64,
    ) -> SacAgent {
        let mut policy_widths = vec![n_state];
        policy_widths.extend(&config.hidden);
        policy_widths.push(2 * n_actions);
        let mut q_widths = vec![n_state + n_actions];
        q_widths.extend(&config.hidden);
        q_widths.push(1);

        let mut init_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0));
        let policy = Mlp::new(&policy_widths, &mut init_rng);
        let q1 = Mlp::new(&q_widths, &mut init_rng);
        let q2 = Mlp::new(&q_widths, &mut init_rng);
        let q1_target = q1.clone();
        let q2_target = q2.clone();

        let lr = config.lr;
        SacAgent {
            opt_policy: AdamState::new(&policy, lr),
            opt_q1: AdamState::new(&q1, lr),
            opt_q2: AdamState::new(&q2, lr),
            opt_alpha: AdamScalar::new(lr),
            policy,
            q1,
            q2,
            q1_target,
            q2_target,
            log_alpha: config.initial_log_alpha,
            target_entropy: -(n_actions as f64),
            gamma,
            n_state,
            n_actions,
            noise_rng: ChaCha8Rng::seed_from_u64(derive_seed(seed, 1)),
            updates: 0,
            config,
        }
    }

    pub fn config(&self) -> &SacConfig {
        &self.config
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn head(&self) -> GaussianPolicyHead {
        GaussianPolicyHead {
            net: self.policy.clone(),
            n_actions: self.n_actions,
        }
    }

    pub fn greedy_action(&self, state: &StateVec) -> ActionVec {
        self.head().greedy_action(state)
    }

    fn policy_samples(
        &self,
        out: &Array2<f64>,
        noise: &[Vec<f64>],
    ) -> (Vec<GaussianSample>, Array2<f64>) {
        let b = out.nrows();
        let n_a = self.n_actions;
        let mut samples = Vec::with_capacity(b);
        let mut actions = Array2::zeros((b, n_a));
        for i in 0..b {
            let row: Vec<f64> = out.row(i).to_vec();
            let (mean, log_std) = row.split_at(n_a);
            let sample = gaussian_policy_sample(mean, log_std, ACTION_BOUNDS, &noise[i]);
            for (j, &a) in sample.action.iter().enumerate() {
                actions[(i, j)] = a;
            }
            samples.push(sample);
        }
        (samples, actions)
    }

    fn draw_noise(&mut self, batch: usize) -> Vec<Vec<f64>> {
        (0..batch)
            .map(|_| {
                (0..self.n_actions)
                    .map(|_| self.noise_rng.sample::<f64, _>(StandardNormal))
                    .collect()
            })
            .collect()
    }

    /// Soft Bellman targets for a batch given explicit next-action noise;
    /// split out so tests can pin the noise and hand-verify.
    pub(crate) fn critic_targets(&self, batch: &[&Transition], noise: &[Vec<f64>]) -> Vec<f64> {
        let b = batch.len();
        let n_s = self.n_state;
        let mut s_next = Array2::zeros((b, n_s));
        for (i, t) in batch.iter().enumerate() {
            for (j, &v) in t.next_state.as_slice().iter().enumerate() {
                s_next[(i, j)] = v;
            }
        }
        let (pol_out, _) = self.policy.forward_batch(s_next.view());
        let (samples, actions) = self.policy_samples(&pol_out, noise);
        let sa_next = concat_state_action(&s_next.view(), &actions.view());
        let (qt1, _) = self.q1_target.forward_batch(sa_next.view());
        let (qt2, _) = self.q2_target.forward_batch(sa_next.view());
        let alpha = self.log_alpha.exp();
        batch
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let not_terminal = if t.terminal { 0.0 } else { 1.0 };
                let q_min = qt1[(i, 0)].min(qt2[(i, 0)]);
                t.reward + self.gamma * not_terminal * (q_min - alpha * samples[i].log_prob)
            })
            .collect()
    }

    /// One gradient step each for the twin critics, the policy, and the
    /// temperature, plus the Polyak target update.
    pub fn update(&mut self, batch: &[&Transition]) -> SacLosses {
        let b = batch.len();
        assert!(b > 0, "empty batch");
        let n_s = self.n_state;
        let n_a = self.n_actions;

        let mut s = Array2::zeros((b, n_s));
        let mut sa = Array2::zeros((b, n_s + n_a));
        for (i, t) in batch.iter().enumerate() {
            assert_eq!(t.state.len(), n_s, "state width mismatch");
            for (j, &v) in t.state.as_slice().iter().enumerate() {
                s[(i, j)] = v;
                sa[(i, j)] = v;
            }
            for (j, &v) in t.action.as_slice().iter().enumerate() {
                sa[(i, n_s + j)] = v;
            }
        }

        // critic step
        let noise = self.draw_noise(b);
        let targets = self.critic_targets(batch, &noise);
        let (q1_out, q1_cache) = self.q1.forward_batch(sa.view());
        let (q2_out, q2_cache) = self.q2.forward_batch(sa.view());
        let mut d1 = Array2::zeros((b, 1));
        let mut d2 = Array2::zeros((b, 1));
        let mut critic_loss = 0.0;
        for i in 0..b {
            let e1 = q1_out[(i, 0)] - targets[i];
            let e2 = q2_out[(i, 0)] - targets[i];
            critic_loss += (e1 * e1 + e2 * e2) / 2.0;
            d1[(i, 0)] = 2.0 * e1 / b as f64;
            d2[(i, 0)] = 2.0 * e2 / b as f64;
        }
        critic_loss /= b as f64;
        let (g1, _) = self.q1.backward(&q1_cache, d1.view());
        let (g2, _) = self.q2.backward(&q2_cache, d2.view());
        self.opt_q1.step(&mut self.q1, &g1);
        self.opt_q2.step(&mut self.q2, &g2);

        // policy step against the updated critics, which stay frozen here
        let alpha = self.log_alpha.exp();
        let (pol_out, pol_cache) = self.policy.forward_batch(s.view());
        let pi_noise = self.draw_noise(b);
        let (samples, actions) = self.policy_samples(&pol_out, &pi_noise);
        let sa_pi = concat_state_action(&s.view(), &actions.view());
        let (q1_pi, q1_pi_cache) = self.q1.forward_batch(sa_pi.view());
        let (q2_pi, q2_pi_cache) = self.q2.forward_batch(sa_pi.view());

        let mut dq1 = Array2::zeros((b, 1));
        let mut dq2 = Array2::zeros((b, 1));
        let mut policy_loss = 0.0;
        for i in 0..b {
            let (v1, v2) = (q1_pi[(i, 0)], q2_pi[(i, 0)]);
            policy_loss += alpha * samples[i].log_prob - v1.min(v2);
            // route the action gradient through the smaller critic
            if v1 <= v2 {
                dq1[(i, 0)] = -1.0 / b as f64;
            } else {
                dq2[(i, 0)] = -1.0 / b as f64;
            }
        }
        policy_loss /= b as f64;
        let dsa1 = self.q1.input_gradient(&q1_pi_cache, dq1.view());
        let dsa2 = self.q2.input_gradient(&q2_pi_cache, dq2.view());

        let mut d_pol_out = Array2::zeros((b, 2 * n_a));
        let d_log_prob = alpha / b as f64;
        for i in 0..b {
            let mut d_action = vec![0.0; n_a];
            for j in 0..n_a {
                d_action[j] = dsa1[(i, n_s + j)] + dsa2[(i, n_s + j)];
            }
            let (d_mean, d_log_std) = sample_gradients(&samples[i], &d_action, d_log_prob);
            for j in 0..n_a {
                d_pol_out[(i, j)] = d_mean[j];
                d_pol_out[(i, n_a + j)] = d_log_std[j];
            }
        }
        let (pol_grads, _) = self.policy.backward(&pol_cache, d_pol_out.view());
        self.opt_policy.step(&mut self.policy, &pol_grads);

        // temperature step toward the entropy target
        let mean_log_prob =
            samples.iter().map(|s| s.log_prob).sum::<f64>() / b as f64;
        let alpha_loss = -self.log_alpha * (mean_log_prob + self.target_entropy);
        let d_log_alpha = -(mean_log_prob + self.target_entropy);
        self.opt_alpha.step(&mut self.log_alpha, d_log_alpha);

        self.updates += 1;
        if self.updates % self.config.target_update_period == 0 {
            polyak(&mut self.q1_target, &self.q1, self.config.tau);
            polyak(&mut self.q2_target, &self.q2, self.config.tau);
        }

        SacLosses {
            critic_loss,
            policy_loss,
            alpha_loss,
            alpha: self.log_alpha.exp(),
            mean_log_prob,
        }
    }
}

fn concat_state_action(s: &ArrayView2<f64>, a: &ArrayView2<f64>) -> Array2<f64> {
    let b = s.nrows();
    let n_s = s.ncols();
    let n_a = a.ncols();
    let mut sa = Array2::zeros((b, n_s + n_a));
    for i in 0..b {
        for j in 0..n_s {
            sa[(i, j)] = s[(i, j)];
        }
        for j in 0..n_a {
            sa[(i, n_s + j)] = a[(i, j)];
        }
    }
    sa
}

/// `target <- tau * online + (1 - tau) * target`, written as an increment
/// so that `online == target` is an exact fixed point; `tau = 1` copies.
fn polyak(target: &mut Mlp, online: &Mlp, tau: f64) {
    if tau == 1.0 {
        *target = online.clone();
        return;
    }
    for (t, o) in target.layers_mut().iter_mut().zip(online.layers()) {
        ndarray::Zip::from(&mut t.w).and(&o.w).for_each(|t, &o| {
            *t += tau * (o - *t);
        });
        ndarray::Zip::from(&mut t.b).and(&o.b).for_each(|t, &o| {
            *t += tau * (o - *t);
        });
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SacTrainConfig {
    /// training-step budget; exhausting it is the fail-to-converge outcome
    pub step_budget: u64,
    /// greedy evaluation cadence, in training steps
    pub eval_interval: u64,
    pub train_horizon: usize,
}

impl Default for SacTrainConfig {
    fn default() -> Self {
        SacTrainConfig {
            step_budget: 20_000,
            eval_interval: 50,
            train_horizon: 50,
        }
    }
}

/// One point on the learning curve, taken at every evaluation.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TrainRecord {
    pub step: u64,
    pub env_steps: u64,
    pub eval_len: f64,
    pub critic_loss: Option<f64>,
    pub policy_loss: Option<f64>,
    pub alpha: Option<f64>,
}

pub struct SacTrainResult {
    pub agent: SacAgent,
    /// first training step whose greedy evaluation hit the objective; None
    /// means fail-to-converge within the budget
    pub steps_to_optimal: Option<u64>,
    pub env_steps_at_optimal: Option<u64>,
    pub env_steps: u64,
    pub gamma: f64,
    pub log: Vec<TrainRecord>,
}

/// Trains SAC: one collected episode and one gradient step per training
/// step, with periodic greedy evaluation on `eval_cases`. Training stops at
/// the step budget or as soon as the evaluation objective is met.
pub fn sac_train(
    spec: &EnvSpec,
    train_cases: &[&Case],
    eval_cases: &[&Case],
    reward_config: &RewardConfig,
    sac_config: &SacConfig,
    train_config: &SacTrainConfig,
    eval_config: &EvalConfig,
    seed: u64,
) -> SacTrainResult {
    assert!(!train_cases.is_empty());
    assert!(!eval_cases.is_empty());
    let n_s = spec.network.state_dim();
    let n_a = spec.n_actions();

    let mut agent = SacAgent::new(n_s, n_a, spec.gamma, sac_config.clone(), derive_seed(seed, 0));
    let mut collect_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 1));
    let mut eval_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 2));
    let mut batch_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 3));

    let mut replay = ReplayBuffer::new(sac_config.replay_capacity);
    let mut env = spec.environment(train_config.train_horizon);

    let mut env_steps: u64 = 0;
    let mut steps_to_optimal = None;
    let mut env_steps_at_optimal = None;
    let mut last_losses: Option<SacLosses> = None;
    let mut log = Vec::new();

    for step in 1..=train_config.step_budget {
        // collect one episode with the stochastic policy (random warmup)
        let case = train_cases[collect_rng.random_range(0..train_cases.len())];
        let mut state = env.reset(case);
        loop {
            let action = if env_steps < sac_config.initial_random_steps {
                random_action(&mut collect_rng, n_a)
            } else {
                agent.head().sample_action(&state, &mut collect_rng).0
            };
            let result = env.step(&action, reward_config).expect("active episode");
            env_steps += 1;
            let terminal = matches!(
                result.done_reason,
                Some(crate::env::DoneReason::Solved) | Some(crate::env::DoneReason::Diverged)
            );
            replay.push(Transition {
                state,
                action,
                reward: result.reward,
                next_state: result.next_state.clone(),
                terminal,
            });
            if result.done {
                break;
            }
            state = result.next_state;
        }

        if replay.len() >= sac_config.batch_size {
            let batch = replay.sample(sac_config.batch_size, &mut batch_rng);
            last_losses = Some(agent.update(&batch));
        }

        if step % train_config.eval_interval == 0 {
            let mut greedy = GreedyGaussianPolicy(agent.head());
            let eval_len = evaluate_episode_length(
                spec,
                eval_cases,
                &mut greedy,
                reward_config,
                eval_config,
                &mut eval_rng,
            );
            log.push(TrainRecord {
                step,
                env_steps,
                eval_len,
                critic_loss: last_losses.map(|l| l.critic_loss),
                policy_loss: last_losses.map(|l| l.policy_loss),
                alpha: last_losses.map(|l| l.alpha),
            });
            if eval_len <= eval_config.l_objective {
                steps_to_optimal = Some(step);
                env_steps_at_optimal = Some(env_steps);
                break;
            }
        }
    }

    SacTrainResult {
        agent,
        steps_to_optimal,
        env_steps_at_optimal,
        env_steps,
        gamma: spec.gamma,
        log,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::StateVec;

    fn tiny_agent(seed: u64) -> SacAgent {
        SacAgent::new(
            6,
            2,
            0.99,
            SacConfig {
                hidden: vec![8, 8],
                batch_size: 4,
                ..SacConfig::default()
            },
            seed,
        )
    }

    fn tiny_batch() -> Vec<Transition> {
        (0..4)
            .map(|k| Transition {
                state: StateVec(vec![0.1 * k as f64; 6]),
                action: ActionVec::clipped(vec![1.0 + 0.01 * k as f64, 0.95]),
                reward: -1.0 + 0.2 * k as f64,
                next_state: StateVec(vec![0.1 * k as f64 + 0.05; 6]),
                terminal: k == 3,
            })
            .collect()
    }

    #[test]
    fn zero_learning_rates_keep_all_parameters() {
        let mut agent = SacAgent::new(
            6,
            2,
            0.99,
            SacConfig {
                hidden: vec![8, 8],
                lr: 0.0,
                batch_size: 4,
                ..SacConfig::default()
            },
            1,
        );
        let before_policy = agent.policy.to_dto();
        let before_q1 = agent.q1.to_dto();
        let before_t1 = agent.q1_target.to_dto();
        let before_alpha = agent.log_alpha;

        let batch = tiny_batch();
        let refs: Vec<&Transition> = batch.iter().collect();
        agent.update(&refs);

        assert_eq!(agent.policy.to_dto().weights, before_policy.weights);
        assert_eq!(agent.q1.to_dto().weights, before_q1.weights);
        assert_eq!(agent.log_alpha, before_alpha);
        // online == target all along, so the Polyak update is a fixed point
        assert_eq!(agent.q1_target.to_dto().weights, before_t1.weights);
    }

    #[test]
    fn critic_target_matches_scalar_hand_evaluation() {
        let agent = tiny_agent(7);
        let batch = tiny_batch();
        let refs: Vec<&Transition> = batch.iter().collect();
        let noise: Vec<Vec<f64>> = (0..4).map(|k| vec![0.3 * k as f64, -0.2]).collect();
        let targets = agent.critic_targets(&refs, &noise);

        for (i, t) in refs.iter().enumerate() {
            // scalar route: single-sample forwards plus the head formula
            let out = agent.policy.forward(t.next_state.as_slice());
            let (mean, log_std) = out.split_at(2);
            let sample = gaussian_policy_sample(mean, log_std, ACTION_BOUNDS, &noise[i]);
            let mut sa = t.next_state.as_slice().to_vec();
            sa.extend_from_slice(&sample.action);
            let q1 = agent.q1_target.forward(&sa)[0];
            let q2 = agent.q2_target.forward(&sa)[0];
            let alpha = agent.log_alpha.exp();
            let bootstrap = if t.terminal { 0.0 } else { 1.0 };
            let expect =
                t.reward + 0.99 * bootstrap * (q1.min(q2) - alpha * sample.log_prob);
            assert!(
                (targets[i] - expect).abs() < 1e-10,
                "target {} vs hand {}",
                targets[i],
                expect
            );
        }
    }

    #[test]
    fn tau_one_copies_online_into_targets() {
        let mut agent = SacAgent::new(
            6,
            2,
            0.99,
            SacConfig {
                hidden: vec![8, 8],
                lr: 0.0,
                tau: 1.0,
                batch_size: 4,
                ..SacConfig::default()
            },
            3,
        );
        // make targets differ from online first
        agent.q1_target.layers_mut()[0].w[(0, 0)] += 0.5;
        agent.q2_target.layers_mut()[0].b[1] -= 0.25;
        let batch = tiny_batch();
        let refs: Vec<&Transition> = batch.iter().collect();
        agent.update(&refs);
        assert_eq!(agent.q1.to_dto().weights, agent.q1_target.to_dto().weights);
        assert_eq!(agent.q2.to_dto().biases, agent.q2_target.to_dto().biases);
    }

    #[test]
    fn update_moves_parameters_with_positive_lr() {
        let mut agent = tiny_agent(11);
        let before = agent.policy.to_dto();
        let batch = tiny_batch();
        let refs: Vec<&Transition> = batch.iter().collect();
        let losses = agent.update(&refs);
        assert!(losses.critic_loss.is_finite());
        assert_ne!(agent.policy.to_dto().weights, before.weights);
    }

    #[test]
    fn updates_are_deterministic_given_seed() {
        let run = || {
            let mut agent = tiny_agent(21);
            let batch = tiny_batch();
            let refs: Vec<&Transition> = batch.iter().collect();
            for _ in 0..5 {
                agent.update(&refs);
            }
            (agent.policy.to_dto(), agent.log_alpha)
        };
        let (a, alpha_a) = run();
        let (b, alpha_b) = run();
        assert_eq!(a.weights, b.weights);
        assert_eq!(alpha_a, alpha_b);
    }

    #[test]
    fn greedy_action_is_pure() {
        let agent = tiny_agent(5);
        let state = StateVec(vec![0.4; 6]);
        let a = agent.greedy_action(&state);
        let b = agent.greedy_action(&state);
        assert_eq!(a, b);
        assert!(a
            .as_slice()
            .iter()
            .all(|&v| (ACTION_MIN..=ACTION_MAX).contains(&v)));
    }

    #[test]
    fn stochastic_action_reproducible_with_seed() {
        let agent = tiny_agent(5);
        let state = StateVec(vec![0.4; 6]);
        let mut p1 = StochasticGaussianPolicy::new(agent.head(), 9);
        let mut p2 = StochasticGaussianPolicy::new(agent.head(), 9);
        for _ in 0..10 {
            assert_eq!(p1.action(&state), p2.action(&state));
        }
    }
}
