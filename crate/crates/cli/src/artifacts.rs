//! Metric-file writers. Every artifact embeds the config hash and effective
//! seeds; none carry timestamps, so identical runs produce identical bytes.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::json;

use crate::config::{ResolvedConfig, ResolvedSeeds};

pub struct ArtifactMeta {
    pub config_hash: String,
    pub seeds: ResolvedSeeds,
}

impl ArtifactMeta {
    pub fn of(resolved: &ResolvedConfig) -> ArtifactMeta {
        ArtifactMeta {
            config_hash: resolved.hash(),
            seeds: resolved.seeds,
        }
    }
}

/// One JSON document: `{"artifact": name, "config_hash": .., "seeds": ..,
/// "body": ..}`.
pub fn write_json<T: Serialize>(
    path: &Path,
    meta: &ArtifactMeta,
    name: &str,
    body: &T,
) -> Result<()> {
    let doc = json!({
        "artifact": name,
        "config_hash": meta.config_hash,
        "seeds": meta.seeds,
        "body": body,
    });
    let text = serde_json::to_string_pretty(&doc)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Comment-prefixed provenance, a header row, then data rows.
pub fn write_csv(path: &Path, meta: &ArtifactMeta, header: &str, rows: &[String]) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!("# config_hash={}\n", meta.config_hash));
    out.push_str(&format!(
        "# seeds master={} generation={} split={} sac={} collect={} il={} eval={} label={}\n",
        meta.seeds.master,
        meta.seeds.generation,
        meta.seeds.split,
        meta.seeds.sac,
        meta.seeds.collect,
        meta.seeds.il,
        meta.seeds.eval,
        meta.seeds.label
    ));
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(row);
        out.push('\n');
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Line-delimited records with one leading meta record.
pub fn write_jsonl<T: Serialize>(
    path: &Path,
    meta: &ArtifactMeta,
    name: &str,
    records: &[T],
) -> Result<()> {
    let mut out = String::new();
    let head = json!({
        "artifact": name,
        "config_hash": meta.config_hash,
        "seeds": meta.seeds,
    });
    out.push_str(&serde_json::to_string(&head)?);
    out.push('\n');
    for record in records {
        out.push_str(&serde_json::to_string(record)?);
        out.push('\n');
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
