//! Procedural stand-ins for the cropped grayscale camera frames.

use rand_distr::{Distribution, Normal};

use super::{DatasetError, Result};
use crate::acoustics::SurfaceState;
use crate::mesh::SurfaceMaterial;
use crate::nn::model::{IMAGE_COLS, IMAGE_ROWS};

const NOISE_SIGMA: f64 = 0.05;

/// `(base luminance, stripe cycles across the width)` per material.
fn material_look(m: SurfaceMaterial) -> (f64, f64) {
    match m {
        SurfaceMaterial::Glass => (0.3, 2.0),
        SurfaceMaterial::Mirror => (0.7, 5.0),
        SurfaceMaterial::Other => (0.5, 3.5),
    }
}

/// 64x25 grayscale grid (row-major) with values in `[0, 1]`.
///
/// Each material has its own base luminance and stripe frequency; an open
/// surface adds a bright-to-dark vertical gradient (sky over ground). Stripe
/// phase and pixel noise come from `seed`.
pub fn synth_image(material: &str, state: SurfaceState, seed: u64) -> Result<Vec<f64>> {
    let m: SurfaceMaterial = material
        .parse()
        .map_err(|_| DatasetError::UnknownMaterial(material.to_string()))?;
    let (base, cycles) = material_look(m);
    let mut rng = crate::seed::child_rng(seed, 0x1A6E);
    let phase = rand::Rng::random_range(&mut rng, 0.0..std::f64::consts::TAU);
    let noise = Normal::new(0.0, NOISE_SIGMA).expect("valid sigma");
    let mut out = Vec::with_capacity(IMAGE_ROWS * IMAGE_COLS);
    for r in 0..IMAGE_ROWS {
        for c in 0..IMAGE_COLS {
            let x = c as f64 / IMAGE_COLS as f64;
            let mut v = base + 0.1 * (std::f64::consts::TAU * cycles * x + phase).sin();
            if state == SurfaceState::Open {
                v += 0.15 * (0.5 - r as f64 / (IMAGE_ROWS - 1) as f64);
            }
            v += noise.sample(&mut rng);
            out.push(v.clamp(0.0, 1.0));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean(v: &[f64]) -> f64 {
        v.iter().sum::<f64>() / v.len() as f64
    }

    #[test]
    fn deterministic_and_bounded() {
        let a = synth_image("glass", SurfaceState::Closed, 4).unwrap();
        assert_eq!(a, synth_image("glass", SurfaceState::Closed, 4).unwrap());
        assert_ne!(a, synth_image("glass", SurfaceState::Closed, 5).unwrap());
        assert_eq!(a.len(), 64 * 25);
        assert!(a.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn glass_and_mirror_differ_in_luminance() {
        for state in [SurfaceState::Open, SurfaceState::Closed] {
            for seed in 0..20 {
                let g = mean(&synth_image("glass", state, seed).unwrap());
                let m = mean(&synth_image("mirror", state, seed).unwrap());
                assert!(m - g >= 0.2, "{state:?} {seed}: {g} vs {m}");
            }
        }
    }

    #[test]
    fn unknown_material() {
        assert!(matches!(
            synth_image("wood", SurfaceState::Open, 0),
            Err(DatasetError::UnknownMaterial(_))
        ));
    }
}
