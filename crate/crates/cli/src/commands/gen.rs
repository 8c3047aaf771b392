//! `gen`: synthesize the case set and the train/test split.

use anyhow::{bail, Result};
use serde_json::json;

use voltlab::data::{generate_cases, split, write_cases, write_manifest};

use crate::artifacts::{write_json, ArtifactMeta};
use crate::config::ResolvedConfig;

pub fn run_gen(resolved: &ResolvedConfig) -> Result<()> {
    let network = resolved.load_network()?;
    let data = &resolved.config.data;
    if data.n_train + data.n_test != data.n_cases {
        bail!(
            "data.n_train + data.n_test must equal data.n_cases ({} + {} != {})",
            data.n_train,
            data.n_test,
            data.n_cases
        );
    }
    std::fs::create_dir_all(&resolved.out_dir)?;
    let meta = ArtifactMeta::of(resolved);

    let outcome = generate_cases(
        &network,
        data.n_cases,
        resolved.seeds.generation,
        &resolved.perturbation(),
    );
    if !outcome.complete {
        eprintln!(
            "warning: sampling budget exhausted with {}/{} cases",
            outcome.cases.len(),
            data.n_cases
        );
        bail!("case generation incomplete; widen the perturbation ranges or raise budget_per_case");
    }

    let mut manifest = split(
        &outcome.cases,
        &network,
        data.n_train,
        data.n_test,
        resolved.seeds.generation,
        resolved.seeds.split,
    )?;
    manifest.provenance = meta.config_hash.clone();

    write_cases(
        &resolved.cases_path(),
        &outcome.cases,
        &network,
        resolved.seeds.generation,
        &meta.config_hash,
    )?;
    write_manifest(&resolved.manifest_path(), &manifest)?;
    write_json(
        &resolved.out_dir.join("gen_summary.json"),
        &meta,
        "gen_summary",
        &json!({
            "network": network.name,
            "n_cases": outcome.cases.len(),
            "attempts": outcome.attempts,
            "n_train": manifest.train_ids.len(),
            "n_test": manifest.test_ids.len(),
        }),
    )?;
    println!(
        "gen: {} cases ({} train / {} test) from {} attempts -> {}",
        outcome.cases.len(),
        manifest.train_ids.len(),
        manifest.test_ids.len(),
        outcome.attempts,
        resolved.out_dir.display()
    );
    Ok(())
}
