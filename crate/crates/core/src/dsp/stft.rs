use std::f64::consts::PI;

use rustfft::{num_complex::Complex64, FftPlanner};
use serde::{Deserialize, Serialize};

use super::waveform::{Waveform, SAMPLE_RATE};
use super::{DspError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StftConfig {
    pub window_len: usize,
    pub hop: usize,
}

impl Default for StftConfig {
    fn default() -> Self {
        StftConfig {
            window_len: 2048,
            hop: 512,
        }
    }
}

impl StftConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.window_len.is_power_of_two() || self.hop == 0 || self.window_len % self.hop != 0 {
            return Err(DspError::InvalidSpec(format!(
                "window {} must be a power of two divisible by hop {}",
                self.window_len, self.hop
            )));
        }
        Ok(())
    }

    pub fn bins(&self) -> usize {
        self.window_len / 2 + 1
    }

    pub fn frame_count(&self, len: usize) -> usize {
        if len < self.window_len {
            0
        } else {
            (len - self.window_len) / self.hop + 1
        }
    }

    /// Periodic Hann window.
    pub fn window(&self) -> Vec<f64> {
        let n = self.window_len as f64;
        (0..self.window_len)
            .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n).cos())
            .collect()
    }

    pub fn freq_coef(&self, k: usize, rate: u32) -> f64 {
        k as f64 * rate as f64 / self.window_len as f64
    }

    pub fn time_coef(&self, m: usize, rate: u32) -> f64 {
        m as f64 * self.hop as f64 / rate as f64
    }
}

/// Centre frequency of bin `k` at the default 2048-point, 44.1 kHz setting.
pub fn freq_coef(k: usize) -> f64 {
    StftConfig::default().freq_coef(k, SAMPLE_RATE)
}

/// Start time of frame `m` at the default hop of 512 samples.
pub fn time_coef(m: usize) -> f64 {
    StftConfig::default().time_coef(m, SAMPLE_RATE)
}

/// Complex STFT coefficients, frame-major: `data[m * bins + k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StftGrid {
    pub frames: usize,
    pub bins: usize,
    pub data: Vec<Complex64>,
}

impl StftGrid {
    pub fn get(&self, m: usize, k: usize) -> Complex64 {
        self.data[m * self.bins + k]
    }

    pub fn frame(&self, m: usize) -> &[Complex64] {
        &self.data[m * self.bins..(m + 1) * self.bins]
    }

    pub fn power(&self) -> Vec<f64> {
        self.data.iter().map(|c| c.norm_sqr()).collect()
    }
}

pub fn stft(w: &Waveform, cfg: &StftConfig) -> Result<StftGrid> {
    cfg.validate()?;
    let n = cfg.window_len;
    if w.len() < n {
        return Err(DspError::TooShort { len: w.len(), needed: n });
    }
    let frames = cfg.frame_count(w.len());
    let bins = cfg.bins();
    let window = cfg.window();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut data = Vec::with_capacity(frames * bins);
    for m in 0..frames {
        let seg = &w.samples[m * cfg.hop..m * cfg.hop + n];
        for ((b, &x), &h) in buf.iter_mut().zip(seg).zip(&window) {
            *b = Complex64::new(x * h, 0.0);
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        data.extend_from_slice(&buf[..bins]);
    }
    Ok(StftGrid { frames, bins, data })
}
