//! Line-delimited manifest: one header record, then one record per example
//! and one per failed sweep cell, each tagged by `record`. File references
//! are relative to the manifest's directory.

use std::io::{BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{DatasetError, Result};
use crate::acoustics::SurfaceState;
use crate::dsp::SourceKind;

pub const SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.jsonl";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

/// Band-summed tap energy by kind, plus the impulse response's total.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReflectionEnergy {
    pub direct: f64,
    pub early: f64,
    pub late: f64,
    pub total: f64,
}

impl ReflectionEnergy {
    pub fn direct_fraction(&self) -> f64 {
        self.direct / self.total
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestHeader {
    pub schema_version: u32,
    /// SHA-256 of the generating configuration and scene files.
    pub config_hash: String,
    pub seed: u64,
    pub scenes: Vec<String>,
    /// Depth grid in metres; `depth_class` indexes into it.
    pub depths: Vec<f64>,
    pub materials: Vec<String>,
    pub states: Vec<SurfaceState>,
    pub sources: Vec<SourceKind>,
    pub held_out_sources: Vec<SourceKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub id: String,
    pub scene: String,
    pub depth: f64,
    pub depth_class: usize,
    pub material: String,
    pub material_class: usize,
    pub state: SurfaceState,
    pub source: SourceKind,
    pub noise_index: usize,
    pub seed: u64,
    pub split: Split,
    /// Mel spectrogram feature file.
    pub features: String,
    pub image: Option<String>,
    pub wav: Option<String>,
    pub reflection: Option<ReflectionEnergy>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub cell: usize,
    pub description: String,
    pub error: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum Record {
    Header(ManifestHeader),
    Example(LabeledExample),
    Failure(CellFailure),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub header: ManifestHeader,
    pub examples: Vec<LabeledExample>,
    pub failures: Vec<CellFailure>,
    /// Directory file references resolve against.
    pub root: PathBuf,
}

impl DatasetManifest {
    pub fn resolve(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    pub fn write(&self, w: impl Write) -> Result<()> {
        let mut w = BufWriter::new(w);
        let mut line = |r: &Record| -> Result<()> {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
            Ok(())
        };
        line(&Record::Header(self.header.clone()))?;
        for e in &self.examples {
            line(&Record::Example(e.clone()))?;
        }
        for f in &self.failures {
            line(&Record::Failure(f.clone()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write(std::fs::File::create(path)?)
    }

    pub fn read(reader: impl BufRead, root: impl Into<PathBuf>) -> Result<Self> {
        let mut header = None;
        let mut examples = Vec::new();
        let mut failures = Vec::new();
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: Record = serde_json::from_str(&line).map_err(|e| DatasetError::Manifest {
                line: n + 1,
                message: e.to_string(),
            })?;
            match rec {
                Record::Header(h) => {
                    if h.schema_version != SCHEMA_VERSION {
                        return Err(DatasetError::SchemaVersion(h.schema_version));
                    }
                    header = Some(h);
                }
                Record::Example(e) => examples.push(e),
                Record::Failure(f) => failures.push(f),
            }
        }
        let header = header.ok_or(DatasetError::Manifest {
            line: 0,
            message: "missing header record".into(),
        })?;
        let m = DatasetManifest {
            header,
            examples,
            failures,
            root: root.into(),
        };
        m.check_class_maps()?;
        Ok(m)
    }

    /// Load `path`, or `path/manifest.jsonl` when `path` is a directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let mut path = path.as_ref().to_path_buf();
        if path.is_dir() {
            path = path.join(MANIFEST_FILE);
        }
        let root = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let file = std::fs::File::open(&path)?;
        Self::read(std::io::BufReader::new(file), root)
    }

    fn check_class_maps(&self) -> Result<()> {
        let h = &self.header;
        for e in &self.examples {
            let bad = |m: String| DatasetError::Manifest {
                line: 0,
                message: format!("example {}: {m}", e.id),
            };
            if h.depths.get(e.depth_class) != Some(&e.depth) {
                return Err(bad(format!("depth {} does not match class {}", e.depth, e.depth_class)));
            }
            if h.materials.get(e.material_class) != Some(&e.material) {
                return Err(bad(format!("material `{}` does not match class {}", e.material, e.material_class)));
            }
            if !h.states.contains(&e.state) {
                return Err(bad(format!("state {:?} not in header", e.state)));
            }
        }
        Ok(())
    }

    /// Examples per depth class.
    pub fn depth_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.header.depths.len()];
        for e in &self.examples {
            c[e.depth_class] += 1;
        }
        c
    }
}
