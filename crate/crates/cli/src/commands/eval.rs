//! `eval`: Table-3-style per-case report for a policy checkpoint, covering
//! both splits and (for stochastic-capable policies) both action modes.

use std::path::Path;

use anyhow::Result;
use serde_json::json;

use voltlab::agents::{
    evaluate_policy, read_checkpoint, CheckpointKind, EnvSpec, GaussianPolicyHead,
    GreedyGaussianPolicy, IlAgent, Policy, StochasticGaussianPolicy,
};
use voltlab::nn::Mlp;
use voltlab::seeding::derive_seed;

use crate::artifacts::{write_csv, write_json, ArtifactMeta};
use crate::config::ResolvedConfig;

use super::baseline::{report_rows, report_summary};
use super::load_dataset;

pub fn run_eval(resolved: &ResolvedConfig, checkpoint_path: &Path) -> Result<()> {
    let (network, cases, manifest) = load_dataset(resolved)?;
    let checkpoint = read_checkpoint(checkpoint_path)?;
    let net = Mlp::from_dto(&checkpoint.net).map_err(anyhow::Error::msg)?;

    // the checkpoint knows whether it was trained on normalized states
    let spec = EnvSpec {
        network: network.clone(),
        gamma: resolved.config.env.gamma,
        normalize_state: checkpoint.normalize_state,
        normalizer: checkpoint
            .normalizer
            .clone()
            .or(Some(manifest.normalizer.clone())),
    };
    let reward = resolved.reward();
    let eval = &resolved.config.eval;
    let meta = ArtifactMeta::of(resolved);

    let modes: Vec<&str> = match checkpoint.kind {
        CheckpointKind::SacPolicy => vec!["greedy", "stochastic"],
        CheckpointKind::IlPolicy => vec!["greedy"],
    };

    let mut summaries = serde_json::Map::new();
    for (split_name, ids, split_stream) in [
        ("train", &manifest.train_ids, 0u64),
        ("test", &manifest.test_ids, 1u64),
    ] {
        let split_cases = manifest.select(&cases, ids);
        for (m, &mode) in modes.iter().enumerate() {
            let head = GaussianPolicyHead {
                net: net.clone(),
                n_actions: checkpoint.n_actions,
            };
            let kind = checkpoint.kind;
            let factory = move |seed: u64| -> Box<dyn Policy> {
                match (kind, mode) {
                    (CheckpointKind::IlPolicy, _) => Box::new(IlAgent {
                        net: head.net.clone(),
                        n_actions: head.n_actions,
                    }),
                    (CheckpointKind::SacPolicy, "stochastic") => {
                        Box::new(StochasticGaussianPolicy::new(head.clone(), seed))
                    }
                    (CheckpointKind::SacPolicy, _) => {
                        Box::new(GreedyGaussianPolicy(head.clone()))
                    }
                }
            };
            // deterministic policies need a single trial
            let trials = if mode == "greedy" { 1 } else { eval.trials };
            let report = evaluate_policy(
                &spec,
                &split_cases,
                factory,
                eval.horizon,
                trials,
                &reward,
                derive_seed(resolved.seeds.eval, (split_stream * 2 + m as u64) + 10),
            );
            write_csv(
                &resolved
                    .out_dir
                    .join(format!("eval_{split_name}_{mode}.csv")),
                &meta,
                "case_id,solved,trials_solved,avg_steps",
                &report_rows(&report),
            )?;
            println!(
                "eval[{split_name}/{mode}]: unsolvable {}/{} avg_steps_solved {:.2}",
                report.unsolvable,
                split_cases.len(),
                report.avg_steps_solved
            );
            summaries.insert(
                format!("{split_name}_{mode}"),
                report_summary(&report, split_cases.len()),
            );
        }
    }
    write_json(
        &resolved.out_dir.join("eval_summary.json"),
        &meta,
        "eval_summary",
        &json!({
            "checkpoint": checkpoint_path.display().to_string(),
            "kind": checkpoint.kind,
            "results": serde_json::Value::Object(summaries),
        }),
    )?;
    Ok(())
}
