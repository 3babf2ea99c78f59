//! Checkpoint file: `ECHC`, u32 version, u32 metadata length, JSON metadata
//! (model and training configuration, seed, loss curve), then the flat
//! parameter vector as little-endian f32 in declaration order.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::{ModelConfig, Network};
use super::train::{History, TrainConfig};
use super::{NnError, Result, Scalar};

pub const MAGIC: &[u8; 4] = b"ECHC";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub seed: u64,
    pub train: Option<TrainConfig>,
    pub history: History,
    /// Human-readable label of each output class.
    #[serde(default)]
    pub class_names: Vec<String>,
    /// Which task the head predicts (e.g. `depth`).
    #[serde(default)]
    pub task: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    model: ModelConfig,
    param_count: usize,
    meta: CheckpointMeta,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub version: u32,
    pub model: ModelConfig,
    pub meta: CheckpointMeta,
    pub params: Vec<f32>,
}

impl Checkpoint {
    pub fn from_network<T: Scalar>(net: &Network<T>, meta: CheckpointMeta) -> Self {
        Checkpoint {
            version: VERSION,
            model: net.config().clone(),
            meta,
            params: net.params.iter().map(|v| v.to_f32().expect("finite parameter")).collect(),
        }
    }

    pub fn network(&self) -> Result<Network<f32>> {
        Network::from_params(self.model.clone(), self.params.clone())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let header = serde_json::to_vec(&Header {
            model: self.model.clone(),
            param_count: self.params.len(),
            meta: self.meta.clone(),
        })?;
        let mut out = Vec::with_capacity(12 + header.len() + 4 * self.params.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(header.len() as u32).to_le_bytes());
        out.extend_from_slice(&header);
        for p in &self.params {
            out.extend_from_slice(&p.to_le_bytes());
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let corrupt = |m: &str| NnError::CorruptCheckpoint(m.to_string());
        if bytes.len() < 12 {
            return Err(corrupt("truncated header"));
        }
        if &bytes[..4] != MAGIC {
            return Err(corrupt("bad magic"));
        }
        let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes"));
        let version = word(4);
        if version != VERSION {
            return Err(NnError::UnsupportedVersion(version));
        }
        let meta_len = word(8) as usize;
        let body = &bytes[12..];
        if body.len() < meta_len {
            return Err(corrupt("truncated metadata"));
        }
        let header: Header = serde_json::from_slice(&body[..meta_len])?;
        let raw = &body[meta_len..];
        if raw.len() != 4 * header.param_count {
            return Err(corrupt(&format!(
                "expected {} parameter bytes, found {}",
                4 * header.param_count,
                raw.len()
            )));
        }
        let params: Vec<f32> = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect();
        let ck = Checkpoint {
            version,
            model: header.model,
            meta: header.meta,
            params,
        };
        // Parameter count must agree with the configuration.
        ck.network()?;
        Ok(ck)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::model::Input;

    fn checkpoint() -> Checkpoint {
        let net = Network::<f32>::new(ModelConfig::echo_cnn_a(6), 11).unwrap();
        Checkpoint::from_network(
            &net,
            CheckpointMeta {
                seed: 11,
                class_names: (1..=6).map(|d| format!("{:.1}", d as f64 * 0.5)).collect(),
                task: Some("depth".into()),
                ..CheckpointMeta::default()
            },
        )
    }

    #[test]
    fn round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.echc");
        let ck = checkpoint();
        ck.save(&path).unwrap();
        let back = Checkpoint::load(&path).unwrap();
        assert_eq!(back, ck);
        let x = vec![0.4f32; 62 * 25];
        let a = ck.network().unwrap().forward(&Input::audio(&x)).unwrap();
        let b = back.network().unwrap().forward(&Input::audio(&x)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let bytes = checkpoint().to_bytes().unwrap();
        let mut bad = bytes.clone();
        bad[1] = b'X';
        assert!(matches!(Checkpoint::from_bytes(&bad), Err(NnError::CorruptCheckpoint(_))));
        assert!(Checkpoint::from_bytes(&bytes[..bytes.len() - 3]).is_err());
        assert!(Checkpoint::from_bytes(&bytes[..20]).is_err());
        let mut v = bytes;
        v[4] = 2;
        assert!(matches!(Checkpoint::from_bytes(&v), Err(NnError::UnsupportedVersion(2))));
    }
}
