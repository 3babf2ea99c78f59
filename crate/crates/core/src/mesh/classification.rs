use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::camera::CameraPose;
use super::{MeshError, Result};
use crate::acoustics::SurfaceState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceMaterial {
    Glass,
    Mirror,
    Other,
}

impl SurfaceMaterial {
    pub fn as_str(self) -> &'static str {
        match self {
            SurfaceMaterial::Glass => "glass",
            SurfaceMaterial::Mirror => "mirror",
            SurfaceMaterial::Other => "other",
        }
    }

    /// Glass and mirror are the surfaces depth scans miss.
    pub fn is_reflective(self) -> bool {
        matches!(self, SurfaceMaterial::Glass | SurfaceMaterial::Mirror)
    }
}

impl fmt::Display for SurfaceMaterial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SurfaceMaterial {
    type Err = MeshError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "glass" => Ok(SurfaceMaterial::Glass),
            "mirror" => Ok(SurfaceMaterial::Mirror),
            "other" => Ok(SurfaceMaterial::Other),
            other => Err(MeshError::InvalidConfig(format!("unknown material `{other}`"))),
        }
    }
}

/// One frame's echo classification, with the camera pose it was taken from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EchoClassification {
    pub frame_id: String,
    #[serde(default)]
    pub pose: CameraPose,
    pub state: SurfaceState,
    /// Confidence of `state`.
    pub probability: f64,
    /// Estimated surface depth in metres.
    pub depth: f64,
    pub material: SurfaceMaterial,
}

impl EchoClassification {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.probability) {
            return Err(MeshError::InvalidConfig(format!(
                "probability {} outside [0, 1]",
                self.probability
            )));
        }
        if !(self.depth > 0.0 && self.depth.is_finite()) {
            return Err(MeshError::InvalidConfig(format!("depth must be positive, got {}", self.depth)));
        }
        self.pose.validate()
    }
}

/// Read line-delimited JSON records. Blank lines are skipped.
pub fn read_classifications(reader: impl BufRead) -> Result<Vec<EchoClassification>> {
    let mut out = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let c: EchoClassification = serde_json::from_str(&line).map_err(|e| MeshError::Parse {
            line: n + 1,
            message: e.to_string(),
        })?;
        c.validate().map_err(|e| MeshError::Parse {
            line: n + 1,
            message: e.to_string(),
        })?;
        out.push(c);
    }
    Ok(out)
}

pub fn load_classifications(path: impl AsRef<Path>) -> Result<Vec<EchoClassification>> {
    read_classifications(std::io::BufReader::new(std::fs::File::open(path)?))
}

pub fn write_classifications(mut w: impl Write, items: &[EchoClassification]) -> Result<()> {
    for c in items {
        serde_json::to_writer(&mut w, c)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}
