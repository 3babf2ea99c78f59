//! Triangle meshes, planar hole detection and echo-guided inpainting.
//!
//! A reconstruction from a depth scan misses glass and mirrors. Given echo
//! classifications (open/closed, depth, material) with their camera poses,
//! [`enhance`] fills the matching planar holes at the classified depth and
//! places background geometry behind them.

mod camera;
mod classification;
mod discontinuity;
mod enhance;
mod hull;
pub mod obj;
mod trimesh;

pub use camera::{depth_filter, CameraPose, ImageRect};
pub use classification::{
    load_classifications, read_classifications, write_classifications, EchoClassification,
    SurfaceMaterial,
};
pub use discontinuity::{
    boundary_loops, detect_discontinuities, fit_plane, newell, PlanarDiscontinuity,
    DEFAULT_PLANARITY_TOL,
};
pub use enhance::{
    enhance, inpaint, place_background, remove_loose_components, EnhanceConfig, EnhanceReport,
    FilledSurface, Outcome, BACKGROUND, WELD_TOL,
};
pub use hull::{convex_hull_2d, convex_hull_planar, project_to_plane};
pub use obj::{load_obj, parse_obj, save_obj, write_mtl, write_obj};
pub use trimesh::TriMesh;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("face {face} references missing vertex {index}")]
    IndexOutOfRange { face: usize, index: usize },
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
    #[error("invalid mesh: {0}")]
    Invalid(String),
    #[error("no geometry survives the filter")]
    EmptyResult,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, MeshError>;
