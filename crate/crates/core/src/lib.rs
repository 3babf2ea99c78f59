//! Echo-based scene reconstruction.
//!
//! The crate is organised as a pipeline:
//!
//! - [`acoustics`]: shoebox room simulator producing labelled impulse
//!   responses, rendered echoes and Sabine reverberation analytics.
//! - [`dsp`]: pulsed excitation sources, STFT and the normalized 62x25 mel
//!   spectrogram used as network input.
//! - [`nn`]: a small from-scratch CNN (audio and audio-visual variants) with
//!   backpropagation, ADAM training, checkpoints and activation maximization.
//! - [`mesh`]: OBJ meshes, planar hole detection and the inpainting loop that
//!   consumes echo classifications.
//! - [`dataset`]: synthetic dataset sweeps, held-out-source splits, kNN and
//!   linear SVM baselines and evaluation reports.

pub mod acoustics;
pub mod dataset;
pub mod dsp;
pub mod geometry;
pub mod mesh;
pub mod nn;
pub mod seed;

pub use acoustics::{
    AcousticsError, ImpulseResponse, MaterialSpec, MaterialWeightMatrix, ShoeboxRoom,
    SourceReceiver, SurfacePanel, SurfaceState,
};
pub use dataset::DatasetError;
pub use dsp::{DspError, MelFilterbank, PulseSpec, SourceKind, Spectrogram, StftConfig, Waveform};
pub use geometry::{Point3, Vector3};
pub use mesh::{EchoClassification, EnhanceConfig, MeshError, TriMesh};
pub use nn::{Checkpoint, ModelConfig, Network, NnError, TrainConfig};
