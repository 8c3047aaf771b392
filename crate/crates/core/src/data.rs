//! Synthetic case generation, train/test split, and dataset persistence.
//!
//! Cases stand in for recorded operating snapshots: each one perturbs the
//! base loads and plant setpoints, and is kept only when the power flow
//! converges and the operating point has at least one violation.
//!
//! Case files are JSON-lines with a header record; the manifest is one JSON
//! document. See `docs/formats.md`.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::{Case, StateDims, StateNormalizer};
use crate::powerflow::GridNetwork;

pub const CASES_FORMAT: &str = "voltlab-cases-v1";
pub const MANIFEST_FORMAT: &str = "voltlab-manifest-v1";

/// Sampling ranges for case generation. The attempt budget is
/// `budget_per_case * n` raw samples.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PerturbationConfig {
    pub load_scale_min: f64,
    pub load_scale_max: f64,
    pub setpoint_min: f64,
    pub setpoint_max: f64,
    pub budget_per_case: usize,
}

impl Default for PerturbationConfig {
    fn default() -> Self {
        PerturbationConfig {
            load_scale_min: 0.7,
            load_scale_max: 1.4,
            setpoint_min: 0.92,
            setpoint_max: 1.08,
            budget_per_case: 100,
        }
    }
}

#[derive(Debug)]
pub struct GenerationOutcome {
    pub cases: Vec<Case>,
    pub attempts: usize,
    /// false when the sampling budget ran out before `n` cases were found
    pub complete: bool,
}

#[derive(Debug, Error)]
pub enum DataError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Malformed {
        path: String,
        line: usize,
        message: String,
    },
    #[error("split sizes {n_train}+{n_test} do not cover {n_cases} cases")]
    SplitSize {
        n_train: usize,
        n_test: usize,
        n_cases: usize,
    },
    #[error("case {case_id} failed its invariant on load: {message}")]
    InvalidCase { case_id: String, message: String },
}

/// Samples violating-but-convergent cases. One load multiplier is drawn per
/// bus and applied to both active and reactive load; one setpoint per plant.
pub fn generate_cases(
    network: &GridNetwork,
    n: usize,
    seed: u64,
    config: &PerturbationConfig,
) -> GenerationOutcome {
    assert!(n >= 1, "need at least one case");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_plants = network.plants.len();
    let budget = config.budget_per_case.saturating_mul(n);

    let mut cases = Vec::with_capacity(n);
    let mut attempts = 0;
    while cases.len() < n && attempts < budget {
        attempts += 1;
        let mut p_load = Vec::with_capacity(network.buses.len());
        let mut q_load = Vec::with_capacity(network.buses.len());
        for bus in &network.buses {
            let scale = sample_range(&mut rng, config.load_scale_min, config.load_scale_max);
            p_load.push(bus.p_load * scale);
            q_load.push(bus.q_load * scale);
        }
        let setpoints: Vec<f64> = (0..n_plants)
            .map(|_| sample_range(&mut rng, config.setpoint_min, config.setpoint_max))
            .collect();
        let case_id = format!("case-{:05}", cases.len());
        if let Ok(case) = Case::build(network, case_id, p_load, q_load, setpoints) {
            cases.push(case);
        }
    }
    let complete = cases.len() == n;
    GenerationOutcome {
        cases,
        attempts,
        complete,
    }
}

fn sample_range(rng: &mut impl Rng, low: f64, high: f64) -> f64 {
    if low == high {
        low
    } else {
        rng.random_range(low..high)
    }
}

/// Dataset bookkeeping: which cases exist and how they split, plus the
/// normalization constants fitted on the training half.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format: String,
    pub network: String,
    pub train_ids: Vec<String>,
    pub test_ids: Vec<String>,
    pub generation_seed: u64,
    pub split_seed: u64,
    pub normalizer: StateNormalizer,
    /// opaque run identification (config hash)
    #[serde(default)]
    pub provenance: String,
}

/// Uniform random partition into `n_train` and `n_test` cases. Fits the
/// state normalizer over the training cases' initial states.
pub fn split(
    cases: &[Case],
    network: &GridNetwork,
    n_train: usize,
    n_test: usize,
    generation_seed: u64,
    split_seed: u64,
) -> Result<DatasetManifest, DataError> {
    if n_train + n_test != cases.len() {
        return Err(DataError::SplitSize {
            n_train,
            n_test,
            n_cases: cases.len(),
        });
    }
    let mut order: Vec<usize> = (0..cases.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(split_seed);
    // Fisher-Yates
    for i in (1..order.len()).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    let train_ids: Vec<String> = order[..n_train]
        .iter()
        .map(|&i| cases[i].case_id.clone())
        .collect();
    let test_ids: Vec<String> = order[n_train..]
        .iter()
        .map(|&i| cases[i].case_id.clone())
        .collect();

    let train_states: Vec<_> = order[..n_train]
        .iter()
        .map(|&i| cases[i].initial_state.clone())
        .collect();
    let normalizer = StateNormalizer::fit(&train_states, StateDims::of(network));

    Ok(DatasetManifest {
        format: MANIFEST_FORMAT.to_string(),
        network: network.name.clone(),
        train_ids,
        test_ids,
        generation_seed,
        split_seed,
        normalizer,
        provenance: String::new(),
    })
}

impl DatasetManifest {
    /// Resolves the ids of one split against a loaded case list.
    pub fn select<'c>(&self, cases: &'c [Case], ids: &[String]) -> Vec<&'c Case> {
        ids.iter()
            .filter_map(|id| cases.iter().find(|c| &c.case_id == id))
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct CaseFileHeader {
    format: String,
    network: String,
    generation_seed: u64,
    /// opaque run identification (config hash), echoed into the file
    #[serde(default)]
    provenance: String,
}

#[derive(Serialize, Deserialize)]
struct CaseRecord {
    case_id: String,
    p_load: Vec<f64>,
    q_load: Vec<f64>,
    setpoints: Vec<f64>,
}

fn io_err(path: &Path, source: std::io::Error) -> DataError {
    DataError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Writes a case file: one header line, then one record per case.
pub fn write_cases(
    path: &Path,
    cases: &[Case],
    network: &GridNetwork,
    generation_seed: u64,
    provenance: &str,
) -> Result<(), DataError> {
    let mut out = Vec::new();
    let header = CaseFileHeader {
        format: CASES_FORMAT.to_string(),
        network: network.name.clone(),
        generation_seed,
        provenance: provenance.to_string(),
    };
    writeln!(out, "{}", serde_json::to_string(&header).unwrap()).unwrap();
    for case in cases {
        let record = CaseRecord {
            case_id: case.case_id.clone(),
            p_load: case.p_load.clone(),
            q_load: case.q_load.clone(),
            setpoints: case.setpoints.clone(),
        };
        writeln!(out, "{}", serde_json::to_string(&record).unwrap()).unwrap();
    }
    fs::write(path, out).map_err(|e| io_err(path, e))
}

/// Reads a case file back, rebuilding and re-validating every case against
/// the network (each case must still converge and violate).
pub fn read_cases(path: &Path, network: &GridNetwork) -> Result<Vec<Case>, DataError> {
    let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
    let reader = BufReader::new(file);
    let mut cases = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        if lineno == 0 {
            let header: CaseFileHeader =
                serde_json::from_str(&line).map_err(|e| DataError::Malformed {
                    path: path.display().to_string(),
                    line: 1,
                    message: e.to_string(),
                })?;
            if header.format != CASES_FORMAT {
                return Err(DataError::Malformed {
                    path: path.display().to_string(),
                    line: 1,
                    message: format!("unsupported format `{}`", header.format),
                });
            }
            continue;
        }
        let record: CaseRecord =
            serde_json::from_str(&line).map_err(|e| DataError::Malformed {
                path: path.display().to_string(),
                line: lineno + 1,
                message: e.to_string(),
            })?;
        let case = Case::build(
            network,
            record.case_id.clone(),
            record.p_load,
            record.q_load,
            record.setpoints,
        )
        .map_err(|e| DataError::InvalidCase {
            case_id: record.case_id,
            message: e.to_string(),
        })?;
        cases.push(case);
    }
    Ok(cases)
}

pub fn write_manifest(path: &Path, manifest: &DatasetManifest) -> Result<(), DataError> {
    let text = serde_json::to_string_pretty(manifest).unwrap();
    fs::write(path, text + "\n").map_err(|e| io_err(path, e))
}

pub fn read_manifest(path: &Path) -> Result<DatasetManifest, DataError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| DataError::Malformed {
        path: path.display().to_string(),
        line: 0,
        message: e.to_string(),
    })
}
