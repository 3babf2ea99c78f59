//! Synthetic datasets, held-out-source splits, baselines and reports.

mod eval;
mod image;
mod knn;
mod manifest;
mod split;
mod svm;
mod sweep;

pub use eval::{evaluate, load_samples, state_name, Metrics, Predictor, Task};
pub use image::synth_image;
pub use knn::Knn;
pub use manifest::{
    CellFailure, DatasetManifest, LabeledExample, ManifestHeader, ReflectionEnergy, Split,
    MANIFEST_FILE, SCHEMA_VERSION,
};
pub use split::{split, Partitions, SplitSpec};
pub use svm::{LinearSvm, SvmConfig};
pub use sweep::{
    export_reflection_labels, generate_dataset, sweep_positions, GenerationSummary, SceneSpec,
    SweepConfig, DEFAULT_SCENE_TOML, MIN_DEPTH_SPACING_S,
};

use thiserror::Error;

use crate::acoustics::AcousticsError;
use crate::dsp::DspError;
use crate::nn::NnError;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("dataset sanity check failed: {0}")]
    Sanity(String),
    #[error("unknown material `{0}`")]
    UnknownMaterial(String),
    #[error("partition `{0}` is empty")]
    EmptyPartition(&'static str),
    #[error("training set is empty")]
    EmptyTrainSet,
    #[error("test set is empty")]
    EmptyTestSet,
    #[error("example {0} has no reflection labels")]
    MissingIr(String),
    #[error("manifest line {line}: {message}")]
    Manifest { line: usize, message: String },
    #[error("unsupported manifest schema version {0}")]
    SchemaVersion(u32),
    #[error(transparent)]
    Acoustics(#[from] AcousticsError),
    #[error(transparent)]
    Dsp(#[from] DspError),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, DatasetError>;
