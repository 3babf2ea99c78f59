//! Deterministic shoebox room simulator.
//!
//! Specular paths come from the image-source method; an optional seeded
//! noise tail with a Sabine-shaped decay stands in for diffuse reverberation.
//! Everything is SI internally; [`UnitSystem::Imperial`] exists only for the
//! Sabine helpers.

mod analytics;
mod bands;
mod image_source;
mod ir;
mod material;
mod render;
mod room;
mod sabine;
pub mod scene;

pub use analytics::{doppler_shift, wavelength, DopplerParams};
pub use bands::{band_masks, BAND_CENTERS_HZ, NUM_BANDS};
pub use image_source::{
    image_sources, image_sources_up_to, lattice_count, trace_reflections, ImageSource,
    Reflection,
};
pub use ir::{
    synthesize_ir, synthesize_ir_with, ImpulseResponse, MaterialWeightMatrix, SynthesisOptions,
    Tap, TapKind, TapOrigin, DEFAULT_EARLY_WINDOW_S,
};
pub use material::MaterialSpec;
pub use render::{pink_noise, render_echo, CLOSED_WINDOW_REDUCTION_DB};
pub use room::{Rect, RoomBuilder, ShoeboxRoom, SourceReceiver, SurfacePanel, SurfaceState, Wall};
pub use sabine::{
    sabine_rt60, total_absorption, AbsorptionSurfaces, InventorySurface, SurfaceInventory,
    UnitSystem, FT3_PER_M3, FT2_PER_M2,
};

use thiserror::Error;

pub const DEFAULT_SPEED_OF_SOUND: f64 = 343.0;
pub const DEFAULT_SAMPLE_RATE: u32 = 44_100;

#[derive(Debug, Error)]
pub enum AcousticsError {
    #[error("invalid material `{name}`: {reason}")]
    InvalidMaterial { name: String, reason: String },
    #[error("invalid room: {0}")]
    InvalidRoom(String),
    #[error("position {0:?} is not strictly inside the room")]
    OutsideRoom([f64; 3]),
    #[error("band index {0} out of range (0..9)")]
    BandOutOfRange(usize),
    #[error("total absorption is zero; reverberation time is unbounded")]
    ZeroAbsorption,
    #[error("sample rate mismatch: impulse response at {expected} Hz, excitation at {found} Hz")]
    SampleRateMismatch { expected: u32, found: u32 },
    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),
    #[error("frequency must be positive, got {0}")]
    NonPositiveFrequency(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("scene file: {0}")]
    Scene(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, AcousticsError>;
