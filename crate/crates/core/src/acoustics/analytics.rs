use serde::{Deserialize, Serialize};

use super::{AcousticsError, Result};

/// Inputs of the echolocation Doppler relation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DopplerParams {
    /// Transmitted frequency, Hz.
    pub f0: f64,
    /// Source speed, m/s.
    pub source_speed: f64,
    /// Observer speed, m/s.
    pub observer_speed: f64,
    /// Angle between motion and line of sight, radians.
    pub theta: f64,
}

/// Frequency shift `f0 * (c_s / c_o) * cos(theta)`.
///
/// The ratio is source speed over *observer* speed as the relation is
/// usually printed for echolocation, not source speed over the speed of sound.
pub fn doppler_shift(p: &DopplerParams) -> Result<f64> {
    if !(p.f0 > 0.0) {
        return Err(AcousticsError::NonPositiveFrequency(p.f0));
    }
    if p.observer_speed == 0.0 {
        return Err(AcousticsError::DivisionByZero("observer speed is zero"));
    }
    Ok(p.f0 * (p.source_speed / p.observer_speed) * p.theta.cos())
}

/// Wavelength `c / f`, in the length unit of `c`.
pub fn wavelength(frequency: f64, speed: f64) -> Result<f64> {
    if !(frequency > 0.0) {
        return Err(AcousticsError::NonPositiveFrequency(frequency));
    }
    Ok(speed / frequency)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn params(theta: f64) -> DopplerParams {
        DopplerParams {
            f0: 1000.0,
            source_speed: 1.0,
            observer_speed: 100.0,
            theta,
        }
    }

    #[test]
    fn doppler_examples() {
        assert!(doppler_shift(&params(PI / 2.0)).unwrap().abs() < 1e-12);
        assert!((doppler_shift(&params(0.0)).unwrap() - 10.0).abs() < 1e-12);
        let a = doppler_shift(&params(0.3)).unwrap();
        let b = doppler_shift(&params(PI - 0.3)).unwrap();
        assert!((a + b).abs() < 1e-12 && a > 0.0);
        let mut still = params(0.0);
        still.observer_speed = 0.0;
        assert!(matches!(doppler_shift(&still), Err(AcousticsError::DivisionByZero(_))));
    }

    #[test]
    fn wavelength_examples() {
        assert_eq!(wavelength(343.0, 343.0).unwrap(), 1.0);
        assert_eq!(wavelength(1125.0, 1125.0).unwrap(), 1.0);
        assert!((wavelength(63.0, 343.0).unwrap() - 5.444).abs() < 5e-4);
        assert!(wavelength(0.0, 343.0).is_err());
        assert!(wavelength(-5.0, 343.0).is_err());
    }
}
