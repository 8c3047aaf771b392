//! `pca`: solvability labels plus a 2-D principal-component projection of
//! every case's initial state, emitted as plot-ready tables.

use anyhow::Result;
use serde_json::json;

use voltlab::analysis::solvability_pca;
use voltlab::env::Case;

use crate::artifacts::{write_csv, write_json, ArtifactMeta};
use crate::config::ResolvedConfig;

use super::{env_spec, load_dataset};

pub fn run_pca(resolved: &ResolvedConfig) -> Result<()> {
    let (network, cases, manifest) = load_dataset(resolved)?;
    let spec = env_spec(resolved, &network, &manifest);
    let eval = &resolved.config.eval;
    let meta = ArtifactMeta::of(resolved);

    let refs: Vec<&Case> = cases.iter().collect();
    let result = solvability_pca(
        &spec,
        &refs,
        eval.horizon,
        eval.trials,
        &resolved.reward(),
        resolved.seeds.label,
    );

    let point_rows: Vec<String> = result
        .points
        .iter()
        .map(|p| {
            format!(
                "{},{},{},{}",
                p.case_id,
                p.pc1,
                p.pc2,
                if p.solvable { "solvable" } else { "unsolvable" }
            )
        })
        .collect();
    write_csv(
        &resolved.out_dir.join("pca_points.csv"),
        &meta,
        "case_id,pc1,pc2,label",
        &point_rows,
    )?;

    let ratio_rows: Vec<String> = result
        .pca
        .explained_variance_ratio
        .iter()
        .enumerate()
        .map(|(i, r)| format!("{},{}", i + 1, r))
        .collect();
    write_csv(
        &resolved.out_dir.join("pca_variance.csv"),
        &meta,
        "component,explained_variance_ratio",
        &ratio_rows,
    )?;

    let solvable = result.points.iter().filter(|p| p.solvable).count();
    let top2: f64 = result.pca.explained_variance_ratio.iter().take(2).sum();
    write_json(
        &resolved.out_dir.join("pca_summary.json"),
        &meta,
        "pca_summary",
        &json!({
            "cases": result.points.len(),
            "solvable": solvable,
            "unsolvable": result.points.len() - solvable,
            "top2_variance": top2,
            "states": if spec.normalize_state { "normalized" } else { "raw" },
            "label_horizon": eval.horizon,
            "label_trials": eval.trials,
        }),
    )?;
    println!(
        "pca: {} cases ({} unsolvable), first two components explain {:.1}% of variance",
        result.points.len(),
        result.points.len() - solvable,
        top2 * 100.0
    );
    Ok(())
}
