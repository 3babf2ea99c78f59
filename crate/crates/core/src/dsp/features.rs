//! Binary feature grids: `ECHF`, u32 version, u32 rows, u32 cols, then
//! `rows * cols` little-endian f32 values in row-major order.

use std::path::Path;

use super::mel::Spectrogram;
use super::{DspError, Result};

pub const MAGIC: &[u8; 4] = b"ECHF";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 16;

pub fn encode(rows: usize, cols: usize, values: &[f64]) -> Result<Vec<u8>> {
    if values.len() != rows * cols {
        return Err(DspError::FeatureFormat(format!(
            "{} values for a {rows}x{cols} grid",
            values.len()
        )));
    }
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * values.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(rows as u32).to_le_bytes());
    out.extend_from_slice(&(cols as u32).to_le_bytes());
    for &v in values {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    Ok(out)
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4-byte slice"))
}

pub fn decode(bytes: &[u8]) -> Result<(usize, usize, Vec<f32>)> {
    if bytes.len() < HEADER_LEN {
        return Err(DspError::FeatureFormat("truncated header".into()));
    }
    if &bytes[..4] != MAGIC {
        return Err(DspError::FeatureFormat("bad magic".into()));
    }
    let version = u32_at(bytes, 4);
    if version != VERSION {
        return Err(DspError::FeatureFormat(format!("unsupported version {version}")));
    }
    let rows = u32_at(bytes, 8) as usize;
    let cols = u32_at(bytes, 12) as usize;
    let body = &bytes[HEADER_LEN..];
    if body.len() != 4 * rows * cols {
        return Err(DspError::FeatureFormat(format!(
            "expected {} payload bytes, found {}",
            4 * rows * cols,
            body.len()
        )));
    }
    let values = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4-byte chunk")))
        .collect();
    Ok((rows, cols, values))
}

pub fn write_grid(path: impl AsRef<Path>, rows: usize, cols: usize, values: &[f64]) -> Result<()> {
    std::fs::write(path, encode(rows, cols, values)?)?;
    Ok(())
}

pub fn read_grid(path: impl AsRef<Path>) -> Result<(usize, usize, Vec<f32>)> {
    decode(&std::fs::read(path)?)
}

pub fn write_spectrogram(path: impl AsRef<Path>, s: &Spectrogram) -> Result<()> {
    write_grid(path, s.rows, s.cols, &s.grid)
}

pub fn read_spectrogram(path: impl AsRef<Path>) -> Result<Spectrogram> {
    let (rows, cols, v) = read_grid(path)?;
    Ok(Spectrogram {
        rows,
        cols,
        grid: v.into_iter().map(f64::from).collect(),
        frame_id: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let vals: Vec<f64> = (0..6).map(|i| i as f64 * 0.25).collect();
        let bytes = encode(2, 3, &vals).unwrap();
        assert_eq!(bytes.len(), 16 + 24);
        let (r, c, v) = decode(&bytes).unwrap();
        assert_eq!((r, c), (2, 3));
        assert_eq!(v, vec![0.0, 0.25, 0.5, 0.75, 1.0, 1.25]);
    }

    #[test]
    fn rejects_corruption() {
        let bytes = encode(2, 2, &[1.0; 4]).unwrap();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode(&bad).is_err());
        assert!(decode(&bytes[..bytes.len() - 1]).is_err());
        assert!(decode(&bytes[..8]).is_err());
        let mut v2 = bytes;
        v2[4] = 9;
        assert!(decode(&v2).is_err());
        assert!(encode(2, 2, &[1.0; 3]).is_err());
    }
}
