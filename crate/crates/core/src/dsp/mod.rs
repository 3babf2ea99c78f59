//! Excitation signals and spectrogram features.

pub mod features;
mod mel;
pub mod noise;
mod source;
mod stft;
mod waveform;

pub use mel::{mel_power, mel_spectrogram, MelFilterbank, Spectrogram, N_MELS, N_TIME_BINS};
pub use source::{generate_source, PulseSpec, SourceKind, DEFAULT_TONES_HZ};
pub use stft::{freq_coef, stft, time_coef, StftConfig, StftGrid};
pub use waveform::{frame_split, Waveform, SAMPLE_RATE};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DspError {
    #[error("signal too short: {len} samples, need at least {needed}")]
    TooShort { len: usize, needed: usize },
    #[error("unknown source kind `{0}`")]
    UnknownSourceKind(String),
    #[error("invalid pulse spec: {0}")]
    InvalidSpec(String),
    #[error("unsupported sample rate {found} Hz (expected {expected} Hz)")]
    SampleRate { expected: u32, found: u32 },
    #[error("wav: {0}")]
    Wav(#[from] hound::Error),
    #[error("feature file: {0}")]
    FeatureFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, DspError>;
