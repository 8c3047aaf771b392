//! Experiment configuration: a TOML file with defaults for every knob, a
//! resolved form where every randomized stage has an explicit seed, and the
//! hash that ties artifacts back to the exact configuration.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use voltlab::agents::{EvalConfig, IlConfig, SacConfig, SacTrainConfig};
use voltlab::data::PerturbationConfig;
use voltlab::powerflow::{desk14, parse_network, GridNetwork};
use voltlab::reward::{RewardConfig, RewardStrategy};
use voltlab::seeding::derive_seed;

// stream ids for deriving stage seeds from the master seed
const STREAM_GENERATION: u64 = 1;
const STREAM_SPLIT: u64 = 2;
const STREAM_SAC: u64 = 3;
const STREAM_COLLECT: u64 = 4;
const STREAM_IL: u64 = 5;
const STREAM_EVAL: u64 = 6;
const STREAM_LABEL: u64 = 7;

fn default_network_source() -> String {
    "builtin:desk14".to_string()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkSection {
    /// `builtin:desk14` or a path to a network file
    #[serde(default = "default_network_source")]
    pub source: String,
}

impl Default for NetworkSection {
    fn default() -> Self {
        NetworkSection {
            source: default_network_source(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvSection {
    pub gamma: f64,
    pub normalize_state: bool,
}

impl Default for EnvSection {
    fn default() -> Self {
        EnvSection {
            gamma: 0.99,
            normalize_state: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataSection {
    pub n_cases: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub load_scale_min: f64,
    pub load_scale_max: f64,
    pub setpoint_min: f64,
    pub setpoint_max: f64,
    pub budget_per_case: usize,
    pub generation_seed: Option<u64>,
    pub split_seed: Option<u64>,
}

impl Default for DataSection {
    fn default() -> Self {
        let p = PerturbationConfig::default();
        DataSection {
            n_cases: 600,
            n_train: 500,
            n_test: 100,
            load_scale_min: p.load_scale_min,
            load_scale_max: p.load_scale_max,
            setpoint_min: p.setpoint_min,
            setpoint_max: p.setpoint_max,
            budget_per_case: p.budget_per_case,
            generation_seed: None,
            split_seed: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardSection {
    pub strategy: RewardStrategy,
    pub alpha: f64,
    pub beta: f64,
    pub r_plus: f64,
    pub divergence_penalty: f64,
}

impl Default for RewardSection {
    fn default() -> Self {
        let r = RewardConfig::default();
        RewardSection {
            strategy: r.strategy,
            alpha: r.alpha,
            beta: r.beta,
            r_plus: r.r_plus,
            divergence_penalty: r.divergence_penalty,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SacSection {
    pub hidden: Vec<usize>,
    pub lr: f64,
    pub batch_size: usize,
    pub replay_capacity: usize,
    pub tau: f64,
    pub target_update_period: u64,
    pub initial_log_alpha: f64,
    pub initial_random_steps: u64,
    pub step_budget: u64,
    pub eval_interval: u64,
    pub train_horizon: usize,
    pub seed: Option<u64>,
}

impl Default for SacSection {
    fn default() -> Self {
        let s = SacConfig::default();
        let t = SacTrainConfig::default();
        SacSection {
            hidden: s.hidden,
            lr: s.lr,
            batch_size: s.batch_size,
            replay_capacity: s.replay_capacity,
            tau: s.tau,
            target_update_period: s.target_update_period,
            initial_log_alpha: s.initial_log_alpha,
            initial_random_steps: s.initial_random_steps,
            step_budget: t.step_budget,
            eval_interval: t.eval_interval,
            train_horizon: t.train_horizon,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IlSection {
    pub hidden: Vec<usize>,
    pub lr: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub n_collect: usize,
    pub collect_t_limit: usize,
    pub collect_seed: Option<u64>,
    pub train_seed: Option<u64>,
}

impl Default for IlSection {
    fn default() -> Self {
        let c = IlConfig::default();
        IlSection {
            hidden: c.hidden,
            lr: c.lr,
            batch_size: c.batch_size,
            max_epochs: c.max_epochs,
            n_collect: 2000,
            collect_t_limit: 1000,
            collect_seed: None,
            train_seed: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalSection {
    pub n_episodes: usize,
    pub t_limit: usize,
    pub l_objective: f64,
    /// rollout horizon for the per-case policy reports and solvability labels
    pub horizon: usize,
    pub trials: usize,
    pub seed: Option<u64>,
}

impl Default for EvalSection {
    fn default() -> Self {
        let e = EvalConfig::default();
        EvalSection {
            n_episodes: e.n_episodes,
            t_limit: e.t_limit,
            l_objective: e.l_objective,
            horizon: 1000,
            trials: 3,
            seed: None,
        }
    }
}

fn default_sweep_strategy1() -> Vec<f64> {
    vec![0.0, 1.0, 10.0, 50.0, 1000.0]
}

fn default_sweep_strategy2() -> Vec<f64> {
    vec![-1.0, 0.0, 1.0, 1000.0]
}

fn default_sweep_seeds() -> Vec<u64> {
    vec![101, 102, 103]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    #[serde(default = "default_sweep_strategy1")]
    pub strategy1_r_plus: Vec<f64>,
    #[serde(default = "default_sweep_strategy2")]
    pub strategy2_r_plus: Vec<f64>,
    #[serde(default = "default_sweep_seeds")]
    pub seeds: Vec<u64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            strategy1_r_plus: default_sweep_strategy1(),
            strategy2_r_plus: default_sweep_strategy2(),
            seeds: default_sweep_seeds(),
        }
    }
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("runs/default")
}

fn default_master_seed() -> u64 {
    7
}

/// The experiment configuration as written by the user; every field has a
/// default so an empty file (or none) is valid.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub out_dir: Option<PathBuf>,
    pub master_seed: Option<u64>,
    pub network: NetworkSection,
    pub env: EnvSection,
    pub data: DataSection,
    pub reward: RewardSection,
    pub sac: SacSection,
    pub il: IlSection,
    pub eval: EvalSection,
    pub sweep: SweepSection,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let config: ExperimentConfig = toml::from_str(&text)
            .with_context(|| format!("cannot parse config {}", path.display()))?;
        Ok(config)
    }

    /// Applies CLI overrides and pins every optional seed, producing the
    /// resolved configuration that actually drives a run.
    pub fn resolve(
        mut self,
        seed_override: Option<u64>,
        out_override: Option<PathBuf>,
    ) -> ResolvedConfig {
        if let Some(seed) = seed_override {
            self.master_seed = Some(seed);
            // explicit stage seeds are re-derived under an overridden master
            self.data.generation_seed = None;
            self.data.split_seed = None;
            self.sac.seed = None;
            self.il.collect_seed = None;
            self.il.train_seed = None;
            self.eval.seed = None;
        }
        if let Some(out) = out_override {
            self.out_dir = Some(out);
        }
        let master = self.master_seed.unwrap_or_else(default_master_seed);
        let seeds = ResolvedSeeds {
            master,
            generation: self
                .data
                .generation_seed
                .unwrap_or_else(|| derive_seed(master, STREAM_GENERATION)),
            split: self
                .data
                .split_seed
                .unwrap_or_else(|| derive_seed(master, STREAM_SPLIT)),
            sac: self
                .sac
                .seed
                .unwrap_or_else(|| derive_seed(master, STREAM_SAC)),
            collect: self
                .il
                .collect_seed
                .unwrap_or_else(|| derive_seed(master, STREAM_COLLECT)),
            il: self
                .il
                .train_seed
                .unwrap_or_else(|| derive_seed(master, STREAM_IL)),
            eval: self
                .eval
                .seed
                .unwrap_or_else(|| derive_seed(master, STREAM_EVAL)),
            label: derive_seed(master, STREAM_LABEL),
        };
        let out_dir = self.out_dir.clone().unwrap_or_else(default_out_dir);
        ResolvedConfig {
            config: self,
            seeds,
            out_dir,
        }
    }
}

/// Effective seeds of every randomized stage; recorded in all artifacts.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ResolvedSeeds {
    pub master: u64,
    pub generation: u64,
    pub split: u64,
    pub sac: u64,
    pub collect: u64,
    pub il: u64,
    pub eval: u64,
    pub label: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolvedConfig {
    pub config: ExperimentConfig,
    pub seeds: ResolvedSeeds,
    pub out_dir: PathBuf,
}

impl ResolvedConfig {
    /// Hash of the resolved configuration; identical configs and seeds give
    /// identical hashes.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config always serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn load_network(&self) -> Result<GridNetwork> {
        let source = &self.config.network.source;
        if let Some(name) = source.strip_prefix("builtin:") {
            match name {
                "desk14" => Ok(desk14()),
                other => bail!("unknown builtin network `{other}`"),
            }
        } else {
            let text = std::fs::read_to_string(source)
                .with_context(|| format!("cannot read network file {source}"))?;
            parse_network(&text).with_context(|| format!("invalid network file {source}"))
        }
    }

    pub fn perturbation(&self) -> PerturbationConfig {
        PerturbationConfig {
            load_scale_min: self.config.data.load_scale_min,
            load_scale_max: self.config.data.load_scale_max,
            setpoint_min: self.config.data.setpoint_min,
            setpoint_max: self.config.data.setpoint_max,
            budget_per_case: self.config.data.budget_per_case,
        }
    }

    pub fn reward(&self) -> RewardConfig {
        let r = &self.config.reward;
        RewardConfig {
            strategy: r.strategy,
            alpha: r.alpha,
            beta: r.beta,
            r_plus: r.r_plus,
            divergence_penalty: r.divergence_penalty,
        }
    }

    pub fn sac(&self) -> SacConfig {
        let s = &self.config.sac;
        SacConfig {
            hidden: s.hidden.clone(),
            lr: s.lr,
            batch_size: s.batch_size,
            replay_capacity: s.replay_capacity,
            tau: s.tau,
            target_update_period: s.target_update_period,
            initial_log_alpha: s.initial_log_alpha,
            initial_random_steps: s.initial_random_steps,
        }
    }

    pub fn sac_train(&self) -> SacTrainConfig {
        let s = &self.config.sac;
        SacTrainConfig {
            step_budget: s.step_budget,
            eval_interval: s.eval_interval,
            train_horizon: s.train_horizon,
        }
    }

    pub fn il(&self) -> IlConfig {
        let i = &self.config.il;
        IlConfig {
            hidden: i.hidden.clone(),
            lr: i.lr,
            batch_size: i.batch_size,
            max_epochs: i.max_epochs,
        }
    }

    pub fn eval(&self) -> EvalConfig {
        let e = &self.config.eval;
        EvalConfig {
            n_episodes: e.n_episodes,
            t_limit: e.t_limit,
            l_objective: e.l_objective,
        }
    }

    pub fn cases_path(&self) -> PathBuf {
        self.out_dir.join("cases.jsonl")
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.out_dir.join("manifest.json")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_resolves_with_defaults() {
        let config: ExperimentConfig = toml::from_str("").unwrap();
        let resolved = config.resolve(None, None);
        assert_eq!(resolved.config.data.n_cases, 600);
        assert_eq!(resolved.config.sac.batch_size, 256);
        assert_eq!(resolved.config.env.gamma, 0.99);
        assert_eq!(resolved.seeds.master, 7);
    }

    #[test]
    fn hash_stable_and_seed_sensitive() {
        let a: ExperimentConfig = toml::from_str("").unwrap();
        let b: ExperimentConfig = toml::from_str("").unwrap();
        let ra = a.resolve(None, None);
        let rb = b.resolve(None, None);
        assert_eq!(ra.hash(), rb.hash());
        let rc = ExperimentConfig::default().resolve(Some(9), None);
        assert_ne!(ra.hash(), rc.hash());
    }

    #[test]
    fn seed_override_rederives_stage_seeds() {
        let config: ExperimentConfig = toml::from_str("[sac]\nseed = 5\n").unwrap();
        let resolved = config.resolve(Some(11), None);
        assert_eq!(resolved.seeds.master, 11);
        assert_ne!(resolved.seeds.sac, 5);
    }

    #[test]
    fn rejects_unknown_fields() {
        assert!(toml::from_str::<ExperimentConfig>("nonsense = 1\n").is_err());
        assert!(toml::from_str::<ExperimentConfig>("[sac]\nbogus = 1\n").is_err());
    }

    #[test]
    fn builtin_network_loads() {
        let resolved = ExperimentConfig::default().resolve(None, None);
        let net = resolved.load_network().unwrap();
        assert_eq!(net.buses.len(), 14);
    }
}
