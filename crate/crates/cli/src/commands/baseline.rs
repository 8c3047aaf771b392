//! `baseline`: random-policy evaluation over both splits.

use anyhow::Result;
use serde_json::json;

use voltlab::agents::{evaluate_policy, PolicyReport, RandomPolicy};
use voltlab::seeding::derive_seed;

use crate::artifacts::{write_csv, write_json, ArtifactMeta};
use crate::config::ResolvedConfig;

use super::{env_spec, load_dataset};

pub(crate) fn report_rows(report: &PolicyReport) -> Vec<String> {
    report
        .records
        .iter()
        .map(|r| {
            format!(
                "{},{},{},{}",
                r.case_id,
                r.solved,
                r.trials_solved,
                r.avg_steps.map_or("".to_string(), |v| v.to_string())
            )
        })
        .collect()
}

pub(crate) fn report_summary(report: &PolicyReport, total: usize) -> serde_json::Value {
    json!({
        "cases": total,
        "unsolvable": report.unsolvable,
        "unsolvable_fraction": report.unsolvable as f64 / total.max(1) as f64,
        "avg_steps_solved": report.avg_steps_solved,
    })
}

pub fn run_baseline(resolved: &ResolvedConfig) -> Result<()> {
    let (network, cases, manifest) = load_dataset(resolved)?;
    let spec = env_spec(resolved, &network, &manifest);
    let reward = resolved.reward();
    let eval = &resolved.config.eval;
    let meta = ArtifactMeta::of(resolved);
    let n_actions = spec.n_actions();

    let mut summaries = serde_json::Map::new();
    for (split_name, ids, stream) in [
        ("train", &manifest.train_ids, 0u64),
        ("test", &manifest.test_ids, 1u64),
    ] {
        let split_cases = manifest.select(&cases, ids);
        let report = evaluate_policy(
            &spec,
            &split_cases,
            |seed| Box::new(RandomPolicy::new(n_actions, seed)),
            eval.horizon,
            eval.trials,
            &reward,
            derive_seed(resolved.seeds.eval, stream),
        );
        write_csv(
            &resolved.out_dir.join(format!("baseline_{split_name}.csv")),
            &meta,
            "case_id,solved,trials_solved,avg_steps",
            &report_rows(&report),
        )?;
        println!(
            "baseline[{split_name}]: unsolvable {}/{} avg_steps_solved {:.2}",
            report.unsolvable,
            split_cases.len(),
            report.avg_steps_solved
        );
        summaries.insert(
            split_name.to_string(),
            report_summary(&report, split_cases.len()),
        );
    }
    write_json(
        &resolved.out_dir.join("baseline_summary.json"),
        &meta,
        "baseline_summary",
        &serde_json::Value::Object(summaries),
    )?;
    Ok(())
}
