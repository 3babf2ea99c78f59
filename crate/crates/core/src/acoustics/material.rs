use serde::{Deserialize, Serialize};

use super::bands::NUM_BANDS;
use super::{AcousticsError, Result};

/// Acoustic surface material with per-octave-band absorption.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialSpec {
    pub name: String,
    pub absorption: [f64; NUM_BANDS],
    #[serde(default)]
    pub transmission: f64,
    /// Glass/mirror class membership.
    #[serde(default)]
    pub is_reflector: bool,
}

impl MaterialSpec {
    pub fn new(
        name: impl Into<String>,
        absorption: [f64; NUM_BANDS],
        transmission: f64,
        is_reflector: bool,
    ) -> Result<Self> {
        let m = MaterialSpec {
            name: name.into(),
            absorption,
            transmission,
            is_reflector,
        };
        m.validate()?;
        Ok(m)
    }

    /// Same coefficient in every band.
    pub fn uniform(name: impl Into<String>, alpha: f64) -> Result<Self> {
        Self::new(name, [alpha; NUM_BANDS], 0.0, false)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| AcousticsError::InvalidMaterial {
            name: self.name.clone(),
            reason,
        };
        if self.name.is_empty() {
            return Err(bad("empty name".into()));
        }
        if !(0.0..=1.0).contains(&self.transmission) {
            return Err(bad(format!("transmission {} outside [0,1]", self.transmission)));
        }
        for (b, &a) in self.absorption.iter().enumerate() {
            if !(0.0..=1.0).contains(&a) {
                return Err(bad(format!("absorption[{b}] = {a} outside [0,1]")));
            }
            if a + self.transmission > 1.0 + 1e-12 {
                return Err(bad(format!(
                    "absorption[{b}] + transmission = {} exceeds 1",
                    a + self.transmission
                )));
            }
        }
        Ok(())
    }
}
