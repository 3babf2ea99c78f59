use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::manifest::DatasetManifest;
use super::{DatasetError, Result};
use crate::dsp::SourceKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitSpec {
    /// Sources seen only at test time.
    pub held_out_sources: Vec<SourceKind>,
    /// Fraction of the remaining examples kept aside for seen-source
    /// validation.
    pub validation_fraction: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            held_out_sources: SourceKind::held_out_palette(),
            validation_fraction: 0.2,
            seed: 0,
        }
    }
}

/// Example indices into the manifest, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Partitions {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

impl Partitions {
    pub fn total(&self) -> usize {
        self.train.len() + self.validation.len() + self.test.len()
    }
}

/// Held-out-source examples go to `test`; a seeded fraction of the rest goes
/// to `validation` and the remainder to `train`.
pub fn split(manifest: &DatasetManifest, spec: &SplitSpec) -> Result<Partitions> {
    if spec.held_out_sources.is_empty() {
        return Err(DatasetError::InvalidConfig("held-out source set is empty".into()));
    }
    if !(0.0..1.0).contains(&spec.validation_fraction) {
        return Err(DatasetError::InvalidConfig(format!(
            "validation_fraction {} outside [0, 1)",
            spec.validation_fraction
        )));
    }
    let mut p = Partitions::default();
    let mut seen = Vec::new();
    for (i, e) in manifest.examples.iter().enumerate() {
        if spec.held_out_sources.contains(&e.source) {
            p.test.push(i);
        } else {
            seen.push(i);
        }
    }
    let mut rng = crate::seed::child_rng(spec.seed, 0x5B17);
    seen.shuffle(&mut rng);
    let n_val = (seen.len() as f64 * spec.validation_fraction).round() as usize;
    p.validation = seen[..n_val].to_vec();
    p.train = seen[n_val..].to_vec();
    p.validation.sort_unstable();
    p.train.sort_unstable();
    if p.train.is_empty() {
        return Err(DatasetError::EmptyPartition("train"));
    }
    if p.test.is_empty() {
        return Err(DatasetError::EmptyPartition("test"));
    }
    Ok(p)
}
