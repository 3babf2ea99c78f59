use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::noise;
use super::waveform::{Waveform, SAMPLE_RATE};
use super::{DspError, Result};

pub const DEFAULT_TONES_HZ: [f64; 9] = [
    63.0, 125.0, 250.0, 500.0, 1000.0, 2000.0, 4000.0, 8000.0, 16000.0,
];

const CHIRP_START_HZ: f64 = 440.0;
const CHIRP_END_HZ: f64 = 1320.0;
const CLAP_CUTOFF_HZ: f64 = 16_000.0;
const CLAP_DECAY_S: f64 = 0.005;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceKind {
    PureTone(f64),
    Chirp,
    Clap,
    White,
    Pink,
    Brownian,
    Silence,
}

impl SourceKind {
    /// The nine octave tones plus clap, pink and brownian noise.
    pub fn training_palette() -> Vec<SourceKind> {
        let mut v: Vec<SourceKind> = DEFAULT_TONES_HZ.iter().map(|&f| SourceKind::PureTone(f)).collect();
        v.extend([SourceKind::Clap, SourceKind::Pink, SourceKind::Brownian]);
        v
    }

    pub fn held_out_palette() -> Vec<SourceKind> {
        vec![SourceKind::Chirp, SourceKind::White]
    }
}

impl fmt::Display for SourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceKind::PureTone(hz) => write!(f, "tone{hz}"),
            SourceKind::Chirp => f.write_str("chirp"),
            SourceKind::Clap => f.write_str("clap"),
            SourceKind::White => f.write_str("white"),
            SourceKind::Pink => f.write_str("pink"),
            SourceKind::Brownian => f.write_str("brownian"),
            SourceKind::Silence => f.write_str("silence"),
        }
    }
}

impl FromStr for SourceKind {
    type Err = DspError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        Ok(match t.as_str() {
            "chirp" => SourceKind::Chirp,
            "clap" => SourceKind::Clap,
            "white" => SourceKind::White,
            "pink" => SourceKind::Pink,
            "brownian" | "brown" => SourceKind::Brownian,
            "silence" => SourceKind::Silence,
            _ => {
                let num = t
                    .strip_prefix("tone")
                    .or_else(|| t.strip_prefix("puretone"))
                    .map(|r| r.trim_start_matches([':', '_', '(']).trim_end_matches(')'))
                    .ok_or_else(|| DspError::UnknownSourceKind(s.to_string()))?;
                let hz: f64 = num
                    .parse()
                    .map_err(|_| DspError::UnknownSourceKind(s.to_string()))?;
                if !(hz > 0.0) {
                    return Err(DspError::UnknownSourceKind(s.to_string()));
                }
                SourceKind::PureTone(hz)
            }
        })
    }
}

impl Serialize for SourceKind {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SourceKind {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One period of pulsed excitation: `pulse_ms` of sound, then silence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    pub kind: SourceKind,
    pub pulse_ms: f64,
    pub period_ms: f64,
    pub amplitude: f64,
}

impl PulseSpec {
    pub fn new(kind: SourceKind) -> Self {
        PulseSpec {
            kind,
            pulse_ms: 100.0,
            period_ms: 1000.0,
            amplitude: 0.8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.pulse_ms > 0.0 && self.pulse_ms < self.period_ms) {
            return Err(DspError::InvalidSpec(format!(
                "pulse {} ms must be positive and shorter than period {} ms",
                self.pulse_ms, self.period_ms
            )));
        }
        if !(0.0..=1.0).contains(&self.amplitude) {
            return Err(DspError::InvalidSpec(format!("amplitude {} outside [0,1]", self.amplitude)));
        }
        if let SourceKind::PureTone(f) = self.kind {
            if !(f > 0.0 && f < SAMPLE_RATE as f64 / 2.0) {
                return Err(DspError::InvalidSpec(format!("tone {f} Hz outside (0, Nyquist)")));
            }
        }
        Ok(())
    }
}

fn peak_normalize(mut x: Vec<f64>, amplitude: f64) -> Vec<f64> {
    let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        x.iter_mut().for_each(|v| *v *= amplitude / peak);
    }
    x
}

/// Hann-windowed sinc impulse followed by a short decaying noise burst.
fn clap(len: usize, rate: f64, rng: &mut impl rand::Rng) -> Vec<f64> {
    let half = 32usize;
    let fc = CLAP_CUTOFF_HZ / rate;
    let mut x = vec![0.0; len];
    for (i, v) in x.iter_mut().enumerate().take((2 * half + 1).min(len)) {
        let m = i as f64 - half as f64;
        let sinc = if m == 0.0 { 2.0 * fc } else { (2.0 * PI * fc * m).sin() / (PI * m) };
        let w = 0.5 - 0.5 * (2.0 * PI * i as f64 / (2 * half) as f64).cos();
        *v = sinc * w / (2.0 * fc);
    }
    let burst = noise::white(len, rng);
    for (i, (v, b)) in x.iter_mut().zip(burst).enumerate() {
        let t = i as f64 / rate;
        *v += 0.5 * b * (-t / CLAP_DECAY_S).exp();
    }
    x
}

/// Render one pulse period of the given source.
pub fn generate_source(spec: &PulseSpec, seed: u64) -> Result<Waveform> {
    spec.validate()?;
    let rate = SAMPLE_RATE as f64;
    let total = (spec.period_ms * rate / 1000.0).round() as usize;
    let active = (spec.pulse_ms * rate / 1000.0).round() as usize;
    let dur = active as f64 / rate;
    let mut rng = crate::seed::child_rng(seed, 0x50C);
    let pulse: Vec<f64> = match spec.kind {
        SourceKind::Silence => vec![0.0; active],
        SourceKind::PureTone(f) => (0..active)
            .map(|n| spec.amplitude * (2.0 * PI * f * n as f64 / rate).sin())
            .collect(),
        SourceKind::Chirp => {
            let k = (CHIRP_END_HZ - CHIRP_START_HZ) / dur;
            (0..active)
                .map(|n| {
                    let t = n as f64 / rate;
                    spec.amplitude * (2.0 * PI * (CHIRP_START_HZ * t + 0.5 * k * t * t)).sin()
                })
                .collect()
        }
        SourceKind::Clap => peak_normalize(clap(active, rate, &mut rng), spec.amplitude),
        SourceKind::White => peak_normalize(noise::white(active, &mut rng), spec.amplitude),
        SourceKind::Pink => peak_normalize(noise::pink(active, &mut rng), spec.amplitude),
        SourceKind::Brownian => peak_normalize(noise::brownian(active, &mut rng), spec.amplitude),
    };
    let mut samples = pulse;
    samples.resize(total, 0.0);
    Ok(Waveform::new(samples, SAMPLE_RATE))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rustfft::{num_complex::Complex64, FftPlanner};

    #[test]
    fn silence_is_zero() {
        let w = generate_source(&PulseSpec::new(SourceKind::Silence), 1).unwrap();
        assert_eq!(w.len(), 44_100);
        assert!(w.samples.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn tone_zero_crossings() {
        let w = generate_source(&PulseSpec::new(SourceKind::PureTone(1000.0)), 0).unwrap();
        let active = &w.samples[..4410];
        let crossings = active
            .windows(2)
            .filter(|p| (p[0] <= 0.0 && p[1] > 0.0) || (p[0] >= 0.0 && p[1] < 0.0))
            .count();
        // 2 f t = 200, allowing for the starting zero.
        assert!((199..=201).contains(&crossings), "{crossings}");
        assert!(w.samples[4410..].iter().all(|&x| x == 0.0));
        assert!((w.peak() - 0.8).abs() < 1e-3);
    }

    #[test]
    fn chirp_instantaneous_frequency() {
        let w = generate_source(&PulseSpec::new(SourceKind::Chirp), 0).unwrap();
        // Analytic signal of the active segment via FFT.
        let n = 4410;
        let mut buf: Vec<Complex64> = w.samples[..n].iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let mut planner = FftPlanner::new();
        planner.plan_fft_forward(n).process(&mut buf);
        for (k, v) in buf.iter_mut().enumerate() {
            if k == 0 || (n % 2 == 0 && k == n / 2) {
                continue;
            } else if k < n.div_ceil(2) {
                *v *= 2.0;
            } else {
                *v = Complex64::new(0.0, 0.0);
            }
        }
        planner.plan_fft_inverse(n).process(&mut buf);
        let i = 2205;
        let dphi = (buf[i + 1] * buf[i - 1].conj()).arg() / 2.0;
        let f = dphi * 44_100.0 / (2.0 * PI);
        assert!((f - 880.0).abs() < 5.0, "{f}");
    }

    #[test]
    fn noise_sources_are_seeded() {
        for kind in [SourceKind::White, SourceKind::Pink, SourceKind::Brownian, SourceKind::Clap] {
            let a = generate_source(&PulseSpec::new(kind), 5).unwrap();
            let b = generate_source(&PulseSpec::new(kind), 5).unwrap();
            let c = generate_source(&PulseSpec::new(kind), 6).unwrap();
            assert_eq!(a, b);
            assert_ne!(a, c);
            assert!(a.peak() <= 0.8 + 1e-12);
            assert!(a.samples[4410..].iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn parse_kinds() {
        assert_eq!("tone1000".parse::<SourceKind>().unwrap(), SourceKind::PureTone(1000.0));
        assert_eq!("puretone(63)".parse::<SourceKind>().unwrap(), SourceKind::PureTone(63.0));
        assert_eq!("chirp".parse::<SourceKind>().unwrap(), SourceKind::Chirp);
        assert!(matches!("voice".parse::<SourceKind>(), Err(DspError::UnknownSourceKind(_))));
        for k in SourceKind::training_palette() {
            assert_eq!(k.to_string().parse::<SourceKind>().unwrap(), k);
        }
    }

    #[test]
    fn invalid_spec() {
        let mut s = PulseSpec::new(SourceKind::Chirp);
        s.pulse_ms = 1000.0;
        assert!(generate_source(&s, 0).is_err());
    }
}
