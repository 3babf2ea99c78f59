//! A small convolutional network stack with hand-written backpropagation.
//!
//! Everything is generic over [`Scalar`], so the same code trains in `f32`
//! and is gradient-checked in `f64`.

pub mod actmax;
pub mod checkpoint;
pub mod fusion;
pub mod gradcheck;
pub mod layers;
pub mod loss;
pub mod model;
pub mod optim;
mod tensor;
pub mod train;

pub use actmax::{activation_maximization, ActMaxResult, Modality};
pub use checkpoint::{Checkpoint, CheckpointMeta};
pub use fusion::{concat_fuse, mfb_fuse, Merge, MfbParams};
pub use layers::{LayerSpec, Shape};
pub use loss::{cross_entropy, softmax};
pub use model::{argmax, default_subnet, Input, ModelConfig, Network, Trace};
pub use optim::{Adam, AdamConfig};
pub use tensor::Tensor;
pub use train::{predict_all, predict_sample, train, train_network, History, Sample, TrainConfig};

use std::fmt::Debug;
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use thiserror::Error;

/// Floating-point element type of networks and tensors.
pub trait Scalar:
    num_traits::Float
    + num_traits::FromPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Send
    + Sync
    + Debug
    + Default
    + 'static
{
}

impl<T> Scalar for T where
    T: num_traits::Float
        + num_traits::FromPrimitive
        + AddAssign
        + SubAssign
        + MulAssign
        + DivAssign
        + Sum
        + Send
        + Sync
        + Debug
        + Default
        + 'static
{
}

#[derive(Debug, Error)]
pub enum NnError {
    #[error("shape mismatch: expected {expected} values, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("missing {0} input")]
    MissingModality(&'static str),
    #[error("invalid model configuration: {0}")]
    InvalidConfig(String),
    #[error("not a probability distribution: {0}")]
    InvalidDistribution(String),
    #[error("empty dataset")]
    EmptyDataset,
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("unsupported checkpoint version {0}")]
    UnsupportedVersion(u32),
    #[error("corrupt checkpoint: {0}")]
    CorruptCheckpoint(String),
    #[error("checkpoint metadata: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, NnError>;
