//! Coloured noise generators, all normalized to unit RMS.

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::{num_complex::Complex64, FftPlanner};

fn normalize_rms(mut x: Vec<f64>) -> Vec<f64> {
    let mean = x.iter().sum::<f64>() / x.len().max(1) as f64;
    x.iter_mut().for_each(|v| *v -= mean);
    let rms = (x.iter().map(|v| v * v).sum::<f64>() / x.len().max(1) as f64).sqrt();
    if rms > 0.0 {
        x.iter_mut().for_each(|v| *v /= rms);
    }
    x
}

pub fn white(len: usize, rng: &mut impl Rng) -> Vec<f64> {
    normalize_rms((0..len).map(|_| rng.sample(StandardNormal)).collect())
}

/// Noise with power spectral density proportional to `1/f^exponent`,
/// shaped in the frequency domain.
pub fn colored(len: usize, exponent: f64, rng: &mut impl Rng) -> Vec<f64> {
    if len == 0 {
        return Vec::new();
    }
    let mut buf: Vec<Complex64> = (0..len)
        .map(|_| Complex64::new(rng.sample(StandardNormal), 0.0))
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(len).process(&mut buf);
    buf[0] = Complex64::new(0.0, 0.0);
    for (k, v) in buf.iter_mut().enumerate().skip(1) {
        let f = k.min(len - k) as f64;
        *v *= f.powf(-exponent / 2.0);
    }
    planner.plan_fft_inverse(len).process(&mut buf);
    normalize_rms(buf.into_iter().map(|c| c.re).collect())
}

pub fn pink(len: usize, rng: &mut impl Rng) -> Vec<f64> {
    colored(len, 1.0, rng)
}

pub fn brownian(len: usize, rng: &mut impl Rng) -> Vec<f64> {
    colored(len, 2.0, rng)
}
