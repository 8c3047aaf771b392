//! Episodic MDP over the power flow solver.
//!
//! One [`Environment`] instance owns an episode at a time: loads are frozen
//! at reset, each step applies plant voltage setpoints, re-solves the power
//! flow, and scores the resulting operating point. Transitions are
//! deterministic; the next state depends only on the loads and the action.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::powerflow::{GridNetwork, PowerFlowSolution, PreparedNetwork, SolverOptions};
use crate::reward::{self, RewardConfig};

/// Bounds of every action component, p.u.
pub const ACTION_MIN: f64 = 0.9;
pub const ACTION_MAX: f64 = 1.1;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MdpConfig {
    pub gamma: f64,
    pub horizon: usize,
    pub normalize_state: bool,
}

impl Default for MdpConfig {
    fn default() -> Self {
        MdpConfig {
            gamma: 0.99,
            horizon: 50,
            normalize_state: false,
        }
    }
}

impl MdpConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(format!("gamma must lie in (0, 1), got {}", self.gamma));
        }
        if self.horizon == 0 {
            return Err("horizon must be >= 1".to_string());
        }
        Ok(())
    }
}

/// Flat observation vector: `V_m | V_a | S_line | P_g | Q_g`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StateVec(pub Vec<f64>);

impl StateVec {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Plant voltage setpoints, one per plant, each in `[0.9, 1.1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionVec(Vec<f64>);

impl ActionVec {
    /// Clips every component into the action box.
    pub fn clipped(values: Vec<f64>) -> ActionVec {
        ActionVec(
            values
                .into_iter()
                .map(|v| v.clamp(ACTION_MIN, ACTION_MAX))
                .collect(),
        )
    }

    /// Accepts only in-bounds values.
    pub fn checked(values: Vec<f64>) -> Result<ActionVec, EnvError> {
        if let Some(&bad) = values
            .iter()
            .find(|v| !(ACTION_MIN..=ACTION_MAX).contains(*v) || !v.is_finite())
        {
            return Err(EnvError::ActionOutOfBounds(bad));
        }
        Ok(ActionVec(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Per-block affine scaling of the state vector, fixed at dataset-build time
/// from the training cases' initial states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateNormalizer {
    /// block order: v_m, v_a, s_line, p_g, q_g
    pub means: [f64; 5],
    pub scales: [f64; 5],
}

impl StateNormalizer {
    /// Fits block means and standard deviations over a set of raw states.
    /// Degenerate blocks get scale 1.
    pub fn fit(states: &[StateVec], dims: StateDims) -> StateNormalizer {
        let mut means = [0.0; 5];
        let mut scales = [1.0; 5];
        for (block, range) in dims.block_ranges().into_iter().enumerate() {
            let mut values = Vec::new();
            for s in states {
                values.extend_from_slice(&s.as_slice()[range.clone()]);
            }
            if values.is_empty() {
                continue;
            }
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            let var =
                values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / values.len() as f64;
            means[block] = mean;
            let sd = var.sqrt();
            scales[block] = if sd > 1e-12 { sd } else { 1.0 };
        }
        StateNormalizer { means, scales }
    }

    pub fn apply(&self, state: &StateVec, dims: StateDims) -> StateVec {
        let mut out = state.0.clone();
        for (block, range) in dims.block_ranges().into_iter().enumerate() {
            for v in &mut out[range] {
                *v = (*v - self.means[block]) / self.scales[block];
            }
        }
        StateVec(out)
    }
}

/// Block layout of the state vector for a fixed network.
#[derive(Debug, Clone, Copy)]
pub struct StateDims {
    pub n_bus: usize,
    pub n_branch: usize,
    pub n_gen: usize,
}

impl StateDims {
    pub fn of(network: &GridNetwork) -> StateDims {
        StateDims {
            n_bus: network.buses.len(),
            n_branch: network.branches.len(),
            n_gen: network.generators.len(),
        }
    }

    pub fn state_len(&self) -> usize {
        2 * self.n_bus + self.n_branch + 2 * self.n_gen
    }

    fn block_ranges(&self) -> [std::ops::Range<usize>; 5] {
        let b = self.n_bus;
        let br = self.n_branch;
        let g = self.n_gen;
        [
            0..b,
            b..2 * b,
            2 * b..2 * b + br,
            2 * b + br..2 * b + br + g,
            2 * b + br + g..2 * b + br + 2 * g,
        ]
    }
}

/// One frozen operating condition: the episode's initial state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Case {
    pub case_id: String,
    pub p_load: Vec<f64>,
    pub q_load: Vec<f64>,
    pub setpoints: Vec<f64>,
    /// raw (un-normalized) initial state, cached at construction
    #[serde(skip)]
    pub initial_state: StateVec,
}

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("action component {0} outside [0.9, 1.1]")]
    ActionOutOfBounds(f64),
    #[error("state vector requires a converged solution")]
    DivergedSolution,
    #[error("no active episode; call reset first")]
    NoActiveEpisode,
    #[error("case {case_id}: {message}")]
    InvalidCase { case_id: String, message: String },
}

impl Case {
    /// Builds a case and checks its invariant: the operating point must
    /// converge and must contain at least one violation.
    pub fn build(
        network: &GridNetwork,
        case_id: String,
        p_load: Vec<f64>,
        q_load: Vec<f64>,
        setpoints: Vec<f64>,
    ) -> Result<Case, EnvError> {
        let prepared = PreparedNetwork::new(network.clone());
        Case::build_prepared(&prepared, case_id, p_load, q_load, setpoints)
    }

    /// [`Case::build`] against an already-prepared network; use this when
    /// constructing many cases.
    pub fn build_prepared(
        prepared: &PreparedNetwork,
        case_id: String,
        p_load: Vec<f64>,
        q_load: Vec<f64>,
        setpoints: Vec<f64>,
    ) -> Result<Case, EnvError> {
        let network = prepared.network();
        let solution = prepared.solve(&p_load, &q_load, &setpoints, SolverOptions::default());
        if !solution.converged {
            return Err(EnvError::InvalidCase {
                case_id,
                message: "initial power flow diverges".to_string(),
            });
        }
        if is_terminal(&solution, network) {
            return Err(EnvError::InvalidCase {
                case_id,
                message: "initial state has no violations".to_string(),
            });
        }
        let initial_state = state_vector(&solution, None)?;
        Ok(Case {
            case_id,
            p_load,
            q_load,
            setpoints,
            initial_state,
        })
    }
}

/// Why an episode ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DoneReason {
    Solved,
    Horizon,
    Diverged,
}

#[derive(Debug, Clone)]
pub struct StepResult {
    pub next_state: StateVec,
    pub reward: f64,
    pub done: bool,
    pub done_reason: Option<DoneReason>,
}

/// Builds the flat state vector from a converged solution, optionally
/// normalized. Order: `V_m | V_a | S_line | P_g | Q_g`.
pub fn state_vector(
    solution: &PowerFlowSolution,
    normalizer: Option<(&StateNormalizer, StateDims)>,
) -> Result<StateVec, EnvError> {
    if !solution.converged {
        return Err(EnvError::DivergedSolution);
    }
    let mut v = Vec::with_capacity(
        2 * solution.v_m.len() + solution.s_line.len() + 2 * solution.p_g.len(),
    );
    v.extend_from_slice(&solution.v_m);
    v.extend_from_slice(&solution.v_a);
    v.extend_from_slice(&solution.s_line);
    v.extend_from_slice(&solution.p_g);
    v.extend_from_slice(&solution.q_g);
    let state = StateVec(v);
    Ok(match normalizer {
        Some((norm, dims)) => norm.apply(&state, dims),
        None => state,
    })
}

/// True iff the operating point has zero voltage and zero line-flow
/// violations. Boundary values do not violate.
pub fn is_terminal(solution: &PowerFlowSolution, network: &GridNetwork) -> bool {
    debug_assert!(solution.converged);
    let lower: Vec<f64> = network.buses.iter().map(|b| b.v_min).collect();
    let upper: Vec<f64> = network.buses.iter().map(|b| b.v_max).collect();
    let s_max: Vec<f64> = network.branches.iter().map(|b| b.s_max).collect();
    reward::bus_violation(&solution.v_m, &lower, &upper)
        .iter()
        .all(|&v| v == 0.0)
        && reward::line_overflow(&solution.s_line, &s_max)
            .iter()
            .all(|&v| v == 0.0)
}

/// A single-episode, single-threaded environment instance. Many instances
/// may run concurrently on disjoint cases.
pub struct Environment {
    prepared: PreparedNetwork,
    config: MdpConfig,
    normalizer: Option<StateNormalizer>,
    solver: SolverOptions,
    p_load: Vec<f64>,
    q_load: Vec<f64>,
    v_lower: Vec<f64>,
    v_upper: Vec<f64>,
    s_max: Vec<f64>,
    steps_taken: usize,
    active: bool,
    last_state: Option<StateVec>,
}

impl Environment {
    pub fn new(network: GridNetwork, config: MdpConfig) -> Environment {
        config.validate().expect("invalid MDP config");
        let p_load = network.buses.iter().map(|b| b.p_load).collect();
        let q_load = network.buses.iter().map(|b| b.q_load).collect();
        let v_lower = network.buses.iter().map(|b| b.v_min).collect();
        let v_upper = network.buses.iter().map(|b| b.v_max).collect();
        let s_max = network.branches.iter().map(|b| b.s_max).collect();
        Environment {
            prepared: PreparedNetwork::new(network),
            config,
            normalizer: None,
            solver: SolverOptions::default(),
            p_load,
            q_load,
            v_lower,
            v_upper,
            s_max,
            steps_taken: 0,
            active: false,
            last_state: None,
        }
    }

    /// Installs normalization constants; takes effect when
    /// `config.normalize_state` is set.
    pub fn with_normalizer(mut self, normalizer: StateNormalizer) -> Environment {
        self.normalizer = Some(normalizer);
        self
    }

    pub fn config(&self) -> &MdpConfig {
        &self.config
    }

    pub fn network(&self) -> &GridNetwork {
        self.prepared.network()
    }

    pub fn n_actions(&self) -> usize {
        self.network().plants.len()
    }

    pub fn state_dims(&self) -> StateDims {
        StateDims::of(self.network())
    }

    fn terminal_here(&self, solution: &PowerFlowSolution) -> bool {
        reward::bus_violation(&solution.v_m, &self.v_lower, &self.v_upper)
            .iter()
            .all(|&v| v == 0.0)
            && reward::line_overflow(&solution.s_line, &self.s_max)
                .iter()
                .all(|&v| v == 0.0)
    }

    fn maybe_normalize(&self, state: StateVec) -> StateVec {
        if self.config.normalize_state {
            if let Some(norm) = &self.normalizer {
                return norm.apply(&state, self.state_dims());
            }
        }
        state
    }

    /// Starts an episode on the case's loads and setpoints; returns the
    /// initial state. The step counter is zeroed and any prior episode
    /// state is discarded.
    pub fn reset(&mut self, case: &Case) -> StateVec {
        self.p_load.copy_from_slice(&case.p_load);
        self.q_load.copy_from_slice(&case.q_load);
        self.steps_taken = 0;
        self.active = true;
        let state = self.maybe_normalize(case.initial_state.clone());
        self.last_state = Some(state.clone());
        state
    }

    /// Applies the action (clipped into bounds), solves the power flow, and
    /// scores the resulting state. On divergence the episode ends with the
    /// configured penalty and the state is left unchanged.
    pub fn step(
        &mut self,
        action: &ActionVec,
        reward_config: &RewardConfig,
    ) -> Result<StepResult, EnvError> {
        if !self.active {
            return Err(EnvError::NoActiveEpisode);
        }
        assert_eq!(action.len(), self.n_actions(), "one setpoint per plant");
        self.steps_taken += 1;

        let solution = self
            .prepared
            .solve(&self.p_load, &self.q_load, action.as_slice(), self.solver);
        if !solution.converged {
            self.active = false;
            return Ok(StepResult {
                next_state: self
                    .last_state
                    .clone()
                    .expect("active episode has a state"),
                reward: reward_config.divergence_penalty,
                done: true,
                done_reason: Some(DoneReason::Diverged),
            });
        }

        let terminal = self.terminal_here(&solution);
        let value = reward::reward(&solution, self.network(), terminal, reward_config);
        let next_state = self.maybe_normalize(state_vector(&solution, None)?);
        self.last_state = Some(next_state.clone());

        let (done, done_reason) = if terminal {
            (true, Some(DoneReason::Solved))
        } else if self.steps_taken >= self.config.horizon {
            (true, Some(DoneReason::Horizon))
        } else {
            (false, None)
        };
        if done {
            self.active = false;
        }
        Ok(StepResult {
            next_state,
            reward: value,
            done,
            done_reason,
        })
    }
}
