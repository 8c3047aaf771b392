//! `train-sac`: train the soft actor-critic agent, log its learning curve,
//! and checkpoint the policy.

use anyhow::Result;
use serde_json::json;

use voltlab::agents::{
    sac_train, write_checkpoint, CheckpointKind, PolicyCheckpoint, CHECKPOINT_FORMAT,
};

use crate::artifacts::{write_json, write_jsonl, ArtifactMeta};
use crate::config::ResolvedConfig;

use super::{env_spec, load_dataset};

pub fn run_train_sac(resolved: &ResolvedConfig) -> Result<()> {
    let (network, cases, manifest) = load_dataset(resolved)?;
    let spec = env_spec(resolved, &network, &manifest);
    let train_cases = manifest.select(&cases, &manifest.train_ids);
    let test_cases = manifest.select(&cases, &manifest.test_ids);
    let meta = ArtifactMeta::of(resolved);

    let result = sac_train(
        &spec,
        &train_cases,
        &test_cases,
        &resolved.reward(),
        &resolved.sac(),
        &resolved.sac_train(),
        &resolved.eval(),
        resolved.seeds.sac,
    );

    write_jsonl(
        &resolved.out_dir.join("sac_train_log.jsonl"),
        &meta,
        "sac_train_log",
        &result.log,
    )?;

    let head = result.agent.head();
    let checkpoint = PolicyCheckpoint {
        format: CHECKPOINT_FORMAT.to_string(),
        kind: CheckpointKind::SacPolicy,
        n_actions: head.n_actions,
        net: head.net.to_dto(),
        normalize_state: spec.normalize_state,
        normalizer: spec.normalize_state.then(|| manifest.normalizer.clone()),
        provenance: meta.config_hash.clone(),
    };
    write_checkpoint(&resolved.out_dir.join("sac_policy.json"), &checkpoint)?;

    let converged = result.steps_to_optimal.is_some();
    write_json(
        &resolved.out_dir.join("sac_summary.json"),
        &meta,
        "sac_summary",
        &json!({
            "converged": converged,
            "steps_to_optimal": result.steps_to_optimal,
            "env_steps_at_optimal": result.env_steps_at_optimal,
            "env_steps": result.env_steps,
            "gamma": result.gamma,
            "strategy": resolved.config.reward.strategy,
            "r_plus": resolved.config.reward.r_plus,
            "step_budget": resolved.config.sac.step_budget,
        }),
    )?;
    match result.steps_to_optimal {
        Some(steps) => println!(
            "train-sac: reached the evaluation objective after {steps} training steps ({} env steps)",
            result.env_steps_at_optimal.unwrap_or_default()
        ),
        None => println!(
            "train-sac: fail to converge within {} training steps",
            resolved.config.sac.step_budget
        ),
    }
    Ok(())
}
