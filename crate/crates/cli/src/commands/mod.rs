//! Subcommand implementations. Each one reads the artifacts of earlier
//! stages from the output directory and writes its own.

mod baseline;
mod eval;
mod gen;
mod pca;
mod sweep;
mod train_il;
mod train_sac;

pub use baseline::run_baseline;
pub use eval::run_eval;
pub use gen::run_gen;
pub use pca::run_pca;
pub use sweep::run_sweep;
pub use train_il::run_train_il;
pub use train_sac::run_train_sac;

use anyhow::{bail, Context, Result};

use voltlab::agents::EnvSpec;
use voltlab::data::{read_cases, read_manifest, DatasetManifest};
use voltlab::env::Case;
use voltlab::powerflow::GridNetwork;

use crate::config::ResolvedConfig;

/// Loads the generated dataset; `gen` must have run into the same out_dir.
pub(crate) fn load_dataset(
    resolved: &ResolvedConfig,
) -> Result<(GridNetwork, Vec<Case>, DatasetManifest)> {
    let network = resolved.load_network()?;
    let cases_path = resolved.cases_path();
    if !cases_path.exists() {
        bail!(
            "no case file at {}; run `voltlab gen` first",
            cases_path.display()
        );
    }
    let cases = read_cases(&cases_path, &network)
        .with_context(|| format!("loading {}", cases_path.display()))?;
    let manifest = read_manifest(&resolved.manifest_path())
        .with_context(|| format!("loading {}", resolved.manifest_path().display()))?;
    Ok((network, cases, manifest))
}

/// Environment factory configured as the experiment demands, with the
/// manifest's normalizer installed when normalization is on.
pub(crate) fn env_spec(
    resolved: &ResolvedConfig,
    network: &GridNetwork,
    manifest: &DatasetManifest,
) -> EnvSpec {
    EnvSpec {
        network: network.clone(),
        gamma: resolved.config.env.gamma,
        normalize_state: resolved.config.env.normalize_state,
        normalizer: Some(manifest.normalizer.clone()),
    }
}
