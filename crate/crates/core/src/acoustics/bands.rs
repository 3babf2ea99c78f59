/// Octave band centre frequencies, 63 Hz to 16 kHz.
pub const BAND_CENTERS_HZ: [f64; NUM_BANDS] = [
    63.0, 125.0, 250.0, 500.0, 1000.0, 2000.0, 4000.0, 8000.0, 16000.0,
];
pub const NUM_BANDS: usize = 9;

// 4th-order response in log2-frequency, half-octave corner on each side.
const ORDER: i32 = 4;
const HALF_WIDTH_OCTAVES: f64 = 0.5;

/// Zero-phase band-split masks for the non-negative FFT bins `0..=nfft/2`.
///
/// Each band has a 4th-order Butterworth magnitude shape centred on its octave
/// (in log frequency). The masks are power-normalized so they sum to exactly
/// one in every bin: feeding the same tap into all nine bands reproduces the
/// input unchanged. Below 63 Hz the lowest band takes over and above 16 kHz
/// the highest.
pub fn band_masks(nfft: usize, sample_rate: f64) -> Vec<[f64; NUM_BANDS]> {
    let df = sample_rate / nfft as f64;
    (0..=nfft / 2)
        .map(|k| {
            let f = (k as f64 * df).max(0.5 * df);
            let mut w = [0.0; NUM_BANDS];
            for (b, fc) in BAND_CENTERS_HZ.iter().enumerate() {
                let x = (f / fc).log2() / HALF_WIDTH_OCTAVES;
                w[b] = 1.0 / (1.0 + x.powi(2 * ORDER));
            }
            let total: f64 = w.iter().sum();
            if total > 0.0 && total.is_finite() {
                w.iter_mut().for_each(|v| *v /= total);
            } else {
                // Both far tails underflow only far outside the audio range.
                w = [0.0; NUM_BANDS];
                let edge = if f < BAND_CENTERS_HZ[0] { 0 } else { NUM_BANDS - 1 };
                w[edge] = 1.0;
            }
            w
        })
        .collect()
}
