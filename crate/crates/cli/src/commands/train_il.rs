//! `train-il`: collect successful steps with the random policy, train the
//! imitation agent on them, and checkpoint the result.

use anyhow::Result;
use serde_json::json;

use voltlab::agents::{
    collect_successful_steps, il_train, write_checkpoint, write_dataset, CheckpointKind,
    PolicyCheckpoint, RandomPolicy, CHECKPOINT_FORMAT,
};

use crate::artifacts::{write_json, write_jsonl, ArtifactMeta};
use crate::config::ResolvedConfig;

use super::{env_spec, load_dataset};

pub fn run_train_il(resolved: &ResolvedConfig) -> Result<()> {
    let (network, cases, manifest) = load_dataset(resolved)?;
    let spec = env_spec(resolved, &network, &manifest);
    let train_cases = manifest.select(&cases, &manifest.train_ids);
    let test_cases = manifest.select(&cases, &manifest.test_ids);
    let meta = ArtifactMeta::of(resolved);
    let il = &resolved.config.il;

    let mut collect_policy = RandomPolicy::new(spec.n_actions(), resolved.seeds.collect);
    let dataset = collect_successful_steps(
        &spec,
        &train_cases,
        &mut collect_policy,
        il.n_collect,
        il.collect_t_limit,
        &resolved.reward(),
        resolved.seeds.collect,
    );
    if !dataset.complete {
        eprintln!(
            "warning: collection cap hit with {}/{} pairs",
            dataset.pairs.len(),
            il.n_collect
        );
    }
    write_dataset(
        &resolved.out_dir.join("dataset_d.jsonl"),
        &dataset,
        &meta.config_hash,
    )?;

    let result = il_train(
        &spec,
        &dataset,
        &test_cases,
        &resolved.reward(),
        &resolved.il(),
        &resolved.eval(),
        resolved.seeds.il,
    );

    write_jsonl(
        &resolved.out_dir.join("il_train_log.jsonl"),
        &meta,
        "il_train_log",
        &result.log,
    )?;
    let checkpoint = PolicyCheckpoint {
        format: CHECKPOINT_FORMAT.to_string(),
        kind: CheckpointKind::IlPolicy,
        n_actions: result.agent.n_actions,
        net: result.agent.net.to_dto(),
        normalize_state: spec.normalize_state,
        normalizer: spec.normalize_state.then(|| manifest.normalizer.clone()),
        provenance: meta.config_hash.clone(),
    };
    write_checkpoint(&resolved.out_dir.join("il_policy.json"), &checkpoint)?;
    write_json(
        &resolved.out_dir.join("il_summary.json"),
        &meta,
        "il_summary",
        &json!({
            "dataset_size": dataset.pairs.len(),
            "collection_complete": dataset.complete,
            "collection_episodes": dataset.episodes_run,
            "epochs_used": result.epochs_used,
            "best_eval": result.best_eval,
            "converged": result.converged,
        }),
    )?;
    println!(
        "train-il: |D| = {}, {} epochs, best evaluated episode length {:.3}{}",
        dataset.pairs.len(),
        result.epochs_used,
        result.best_eval,
        if result.converged {
            " (objective met)"
        } else {
            " (epoch cap)"
        }
    );
    Ok(())
}
