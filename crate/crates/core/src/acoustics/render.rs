use rand::Rng;
use rustfft::{num_complex::Complex64, FftPlanner};

use super::bands::{band_masks, NUM_BANDS};
use super::ir::{ImpulseResponse, TapOrigin};
use super::room::{ShoeboxRoom, SurfaceState};
use super::{AcousticsError, Result};
use crate::dsp::{noise, Waveform};

/// Exterior noise drop through a closed exterior window.
pub const CLOSED_WINDOW_REDUCTION_DB: f64 = 10.0;

/// Seeded pink noise with the given RMS.
pub fn pink_noise(len: usize, rms: f64, seed: u64) -> Vec<f64> {
    let mut rng = crate::seed::child_rng(seed, 0x9F1C);
    noise::pink(len, &mut rng).into_iter().map(|v| v * rms).collect()
}

/// Exterior noise RMS (linear, full scale = 1) for a window state, or `None`
/// when the room has no exterior surface or no configured level.
pub fn exterior_noise_rms(room: &ShoeboxRoom, window_state: SurfaceState) -> Option<f64> {
    let level = room.exterior_noise_db()?;
    if !room.has_exterior_panels() {
        return None;
    }
    let db = match window_state {
        SurfaceState::Open => level,
        SurfaceState::Closed => level - CLOSED_WINDOW_REDUCTION_DB,
    };
    Some(10f64.powf(db / 20.0))
}

/// Convolve `excitation` with the impulse response and add exterior noise.
///
/// Taps are rounded to the sample grid and split into the nine octave bands
/// with zero-phase masks; each band's tap train carries amplitude
/// `sqrt(intensity)`. Diffuse tail taps get a random sign from `seed`. The
/// result is `ir.duration` long and clamped to `[-1, 1]`.
pub fn render_echo(
    ir: &ImpulseResponse,
    excitation: &Waveform,
    room: &ShoeboxRoom,
    window_state: SurfaceState,
    seed: u64,
) -> Result<Waveform> {
    if excitation.rate != ir.sample_rate {
        return Err(AcousticsError::SampleRateMismatch {
            expected: ir.sample_rate,
            found: excitation.rate,
        });
    }
    let sr = ir.sample_rate as f64;
    let out_len = (ir.duration * sr).round() as usize;
    let max_tap = ir
        .taps
        .iter()
        .map(|t| (t.delay * sr).round() as usize)
        .max()
        .unwrap_or(0);
    let nfft = (excitation.len() + max_tap.min(out_len) + 1).next_power_of_two();

    let mut rng = crate::seed::child_rng(seed, 0x5E9D);
    let mut trains = vec![vec![Complex64::new(0.0, 0.0); nfft]; NUM_BANDS];
    for tap in &ir.taps {
        let n = (tap.delay * sr).round() as usize;
        if n >= out_len {
            continue;
        }
        let sign = match tap.origin {
            TapOrigin::Diffuse => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            TapOrigin::Specular => 1.0,
        };
        for (b, train) in trains.iter_mut().enumerate() {
            train[n].re += sign * tap.intensity[b].sqrt();
        }
    }

    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(nfft);
    let inv = planner.plan_fft_inverse(nfft);
    let mut x: Vec<Complex64> = excitation
        .samples
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
        .take(nfft)
        .collect();
    fwd.process(&mut x);
    for t in trains.iter_mut() {
        fwd.process(t);
    }
    let masks = band_masks(nfft, sr);
    let mut y = vec![Complex64::new(0.0, 0.0); nfft];
    for k in 0..nfft {
        // Real masks are symmetric: bin k and nfft-k share a weight.
        let mask = &masks[k.min(nfft - k)];
        let h: Complex64 = (0..NUM_BANDS).map(|b| trains[b][k] * mask[b]).sum();
        y[k] = x[k] * h;
    }
    inv.process(&mut y);
    let scale = 1.0 / nfft as f64;
    let mut samples: Vec<f64> = y.iter().take(out_len).map(|c| c.re * scale).collect();
    samples.resize(out_len, 0.0);

    if let Some(rms) = exterior_noise_rms(room, window_state) {
        let n = pink_noise(out_len, rms, crate::seed::derive(seed, 0x0E47));
        samples.iter_mut().zip(n).for_each(|(s, v)| *s += v);
    }
    Ok(Waveform::new(samples, ir.sample_rate).clamp_unit())
}
