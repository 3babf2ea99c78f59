use serde::{Deserialize, Serialize};

use super::stft::{stft, StftConfig};
use super::waveform::Waveform;
use super::{DspError, Result};

pub const N_MELS: usize = 62;
pub const N_TIME_BINS: usize = 25;

/// Samples are scaled to 16-bit integer units before the power spectrum,
/// so `log(1 + p)` keeps the dynamic range of quiet tails and noise floors.
pub const PCM_SCALE: f64 = 32767.0;

fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Triangular mel filters, `weights[row * bins + k]`.
///
/// The lowest filter is flat below its centre and the highest flat above
/// its centre, so every FFT bin from DC to Nyquist carries some weight.
#[derive(Debug, Clone, PartialEq)]
pub struct MelFilterbank {
    pub n_mels: usize,
    pub bins: usize,
    pub weights: Vec<f64>,
}

impl MelFilterbank {
    pub fn new(n_mels: usize, cfg: &StftConfig, rate: u32) -> Self {
        let bins = cfg.bins();
        let nyq = rate as f64 / 2.0;
        let (m_lo, m_hi) = (hz_to_mel(0.0), hz_to_mel(nyq));
        let edges: Vec<f64> = (0..n_mels + 2)
            .map(|i| mel_to_hz(m_lo + (m_hi - m_lo) * i as f64 / (n_mels + 1) as f64))
            .collect();
        let mut weights = vec![0.0; n_mels * bins];
        for r in 0..n_mels {
            let (lo, c, hi) = (edges[r], edges[r + 1], edges[r + 2]);
            for k in 0..bins {
                let f = cfg.freq_coef(k, rate);
                let w = if f <= c {
                    if r == 0 {
                        1.0
                    } else {
                        ((f - lo) / (c - lo)).max(0.0)
                    }
                } else if r == n_mels - 1 {
                    1.0
                } else {
                    ((hi - f) / (hi - c)).max(0.0)
                };
                weights[r * bins + k] = w;
            }
        }
        MelFilterbank { n_mels, bins, weights }
    }

    pub fn default_bank() -> Self {
        MelFilterbank::new(N_MELS, &StftConfig::default(), super::SAMPLE_RATE)
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.weights[r * self.bins..(r + 1) * self.bins]
    }
}

/// Normalized `rows × cols` log-mel grid, row-major with mel rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrogram {
    pub rows: usize,
    pub cols: usize,
    pub grid: Vec<f64>,
    #[serde(default)]
    pub frame_id: Option<String>,
}

impl Spectrogram {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Spectrogram {
            rows,
            cols,
            grid: vec![0.0; rows * cols],
            frame_id: None,
        }
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.grid[r * self.cols + c]
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.grid
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    /// Row with the most total activation.
    pub fn argmax_row(&self) -> usize {
        (0..self.rows)
            .max_by(|&a, &b| {
                let sa: f64 = self.grid[a * self.cols..(a + 1) * self.cols].iter().sum();
                let sb: f64 = self.grid[b * self.cols..(b + 1) * self.cols].iter().sum();
                sa.total_cmp(&sb)
            })
            .unwrap_or(0)
    }

    pub fn with_frame_id(mut self, id: impl Into<String>) -> Self {
        self.frame_id = Some(id.into());
        self
    }
}

/// Mel-projected power, `n_mels × frames`, before any compression.
pub fn mel_power(w: &Waveform, cfg: &StftConfig, fb: &MelFilterbank) -> Result<Spectrogram> {
    if fb.bins != cfg.bins() {
        return Err(DspError::InvalidSpec(format!(
            "filterbank has {} bins, STFT has {}",
            fb.bins,
            cfg.bins()
        )));
    }
    let scaled = w.scaled(PCM_SCALE);
    let g = stft(&scaled, cfg)?;
    let power = g.power();
    let mut out = Spectrogram::zeros(fb.n_mels, g.frames);
    for m in 0..g.frames {
        let p = &power[m * g.bins..(m + 1) * g.bins];
        for r in 0..fb.n_mels {
            out.grid[r * g.frames + m] = fb.row(r).iter().zip(p).map(|(a, b)| a * b).sum();
        }
    }
    Ok(out)
}

/// Average-pool columns onto `out_cols` equal-width bins, weighting each
/// input column by its overlap with the bin.
fn pool_columns(s: &Spectrogram, out_cols: usize) -> Spectrogram {
    let mut out = Spectrogram::zeros(s.rows, out_cols);
    let width = s.cols as f64 / out_cols as f64;
    for j in 0..out_cols {
        let (a, b) = (j as f64 * width, (j + 1) as f64 * width);
        let mut parts = Vec::new();
        let mut c = a.floor() as usize;
        while (c as f64) < b && c < s.cols {
            let ov = (b.min(c as f64 + 1.0) - a.max(c as f64)).max(0.0);
            if ov > 0.0 {
                parts.push((c, ov));
            }
            c += 1;
        }
        let total: f64 = parts.iter().map(|p| p.1).sum();
        for r in 0..s.rows {
            let v: f64 = parts.iter().map(|&(c, ov)| s.get(r, c) * ov).sum();
            out.grid[r * out_cols + j] = v / total;
        }
    }
    out
}

/// Power, mel projection, `log(1 + p)`, pooling to 25 columns, then
/// min-max normalization. A constant grid (e.g. silence) maps to zeros.
pub fn mel_spectrogram(w: &Waveform, cfg: &StftConfig, fb: &MelFilterbank) -> Result<Spectrogram> {
    let mut p = mel_power(w, cfg, fb)?;
    p.grid.iter_mut().for_each(|v| *v = v.ln_1p());
    let mut s = pool_columns(&p, N_TIME_BINS);
    let (lo, hi) = s.min_max();
    if hi > lo {
        s.grid.iter_mut().for_each(|v| *v = (*v - lo) / (hi - lo));
    } else {
        s.grid.iter_mut().for_each(|v| *v = 0.0);
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::{generate_source, PulseSpec, SourceKind, DEFAULT_TONES_HZ};

    #[test]
    fn filterbank_covers_every_bin() {
        let fb = MelFilterbank::default_bank();
        assert_eq!(fb.weights.len(), 62 * 1025);
        assert!(fb.weights.iter().all(|&w| w >= 0.0));
        for k in 0..fb.bins {
            assert!((0..fb.n_mels).any(|r| fb.row(r)[k] > 0.0), "bin {k}");
        }
    }

    #[test]
    fn silence_maps_to_zeros() {
        let s = mel_spectrogram(
            &Waveform::silence(1.0, 44_100),
            &StftConfig::default(),
            &MelFilterbank::default_bank(),
        )
        .unwrap();
        assert_eq!(s.shape(), (62, 25));
        assert!(s.grid.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn normalized_range() {
        let w = generate_source(&PulseSpec::new(SourceKind::Pink), 3).unwrap();
        let s = mel_spectrogram(&w, &StftConfig::default(), &MelFilterbank::default_bank()).unwrap();
        assert_eq!(s.shape(), (62, 25));
        let (lo, hi) = s.min_max();
        assert_eq!(lo, 0.0);
        assert_eq!(hi, 1.0);
    }

    #[test]
    fn tone_rows_increase_with_frequency() {
        let cfg = StftConfig::default();
        let fb = MelFilterbank::default_bank();
        let rows: Vec<usize> = DEFAULT_TONES_HZ
            .iter()
            .map(|&f| {
                let w = generate_source(&PulseSpec::new(SourceKind::PureTone(f)), 0).unwrap();
                mel_spectrogram(&w, &cfg, &fb).unwrap().argmax_row()
            })
            .collect();
        assert!(rows.windows(2).all(|p| p[1] > p[0]), "{rows:?}");
    }

    #[test]
    fn pooling_preserves_constant_and_mean() {
        let mut s = Spectrogram::zeros(2, 83);
        for c in 0..83 {
            s.grid[c] = 3.0;
            s.grid[83 + c] = c as f64;
        }
        let p = pool_columns(&s, 25);
        assert!((0..25).all(|j| (p.get(0, j) - 3.0).abs() < 1e-12));
        let mean_in: f64 = (0..83).map(|c| c as f64).sum::<f64>() / 83.0;
        let mean_out: f64 = (0..25).map(|j| p.get(1, j)).sum::<f64>() / 25.0;
        assert!((mean_in - mean_out).abs() < 1e-9);
    }
}
