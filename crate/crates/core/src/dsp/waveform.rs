use std::path::Path;

use super::{DspError, Result};

pub const SAMPLE_RATE: u32 = 44_100;
const PCM16_SCALE: f64 = 32767.0;

/// Mono audio buffer with samples in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub samples: Vec<f64>,
    pub rate: u32,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, rate: u32) -> Self {
        Waveform { samples, rate }
    }

    pub fn silence(seconds: f64, rate: u32) -> Self {
        Waveform {
            samples: vec![0.0; (seconds * rate as f64).round() as usize],
            rate,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.rate as f64
    }

    pub fn rms(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        (self.samples.iter().map(|x| x * x).sum::<f64>() / self.samples.len() as f64).sqrt()
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn scaled(&self, gain: f64) -> Self {
        Waveform {
            samples: self.samples.iter().map(|x| x * gain).collect(),
            rate: self.rate,
        }
    }

    /// Hard-limit every sample to `[-1, 1]`.
    pub fn clamp_unit(mut self) -> Self {
        self.samples.iter_mut().for_each(|x| *x = x.clamp(-1.0, 1.0));
        self
    }

    /// Round-trip through 16-bit PCM, i.e. exactly what a WAV file stores.
    pub fn quantize_pcm16(&self) -> Self {
        Waveform {
            samples: self
                .samples
                .iter()
                .map(|&x| to_pcm16(x) as f64 / PCM16_SCALE)
                .collect(),
            rate: self.rate,
        }
    }

    /// Write mono 16-bit little-endian PCM.
    pub fn write_wav(&self, path: impl AsRef<Path>) -> Result<()> {
        let spec = hound::WavSpec {
            channels: 1,
            sample_rate: self.rate,
            bits_per_sample: 16,
            sample_format: hound::SampleFormat::Int,
        };
        let mut w = hound::WavWriter::create(path, spec)?;
        for &x in &self.samples {
            w.write_sample(to_pcm16(x))?;
        }
        w.finalize()?;
        Ok(())
    }

    /// Read a mono 16-bit PCM file.
    pub fn read_wav(path: impl AsRef<Path>) -> Result<Self> {
        let mut r = hound::WavReader::open(path)?;
        let spec = r.spec();
        if spec.channels != 1 || spec.bits_per_sample != 16 || spec.sample_format != hound::SampleFormat::Int {
            return Err(DspError::FeatureFormat(format!(
                "expected mono 16-bit PCM, got {} channel(s) {}-bit {:?}",
                spec.channels, spec.bits_per_sample, spec.sample_format
            )));
        }
        let samples = r
            .samples::<i16>()
            .map(|s| s.map(|v| (v as f64 / PCM16_SCALE).max(-1.0)))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Waveform {
            samples,
            rate: spec.sample_rate,
        })
    }
}

fn to_pcm16(x: f64) -> i16 {
    (x.clamp(-1.0, 1.0) * PCM16_SCALE).round() as i16
}

/// Non-overlapping one-second frames; a trailing partial frame is dropped.
pub fn frame_split(recording: &Waveform) -> Result<Vec<Waveform>> {
    if recording.rate != SAMPLE_RATE {
        return Err(DspError::SampleRate {
            expected: SAMPLE_RATE,
            found: recording.rate,
        });
    }
    let n = recording.rate as usize;
    Ok(recording
        .samples
        .chunks_exact(n)
        .map(|c| Waveform::new(c.to_vec(), recording.rate))
        .collect())
}
