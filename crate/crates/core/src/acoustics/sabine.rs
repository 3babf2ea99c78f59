use serde::{Deserialize, Serialize};

use super::bands::NUM_BANDS;
use super::material::MaterialSpec;
use super::room::{ShoeboxRoom, SurfaceState};
use super::{AcousticsError, Result};

pub const FT2_PER_M2: f64 = 1.0 / (0.3048 * 0.3048);
pub const FT3_PER_M3: f64 = 1.0 / (0.3048 * 0.3048 * 0.3048);

const METRIC_SABINE: f64 = 0.161;
const IMPERIAL_SABINE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitSystem {
    /// Metric sabins (m^2) and seconds from m^3.
    Metric,
    /// Sabins (ft^2) and seconds from ft^3.
    Imperial,
}

/// Anything with a volume and a list of absorbing surfaces.
pub trait AbsorptionSurfaces {
    fn volume_m3(&self) -> f64;
    /// `(area in m^2, effective absorption per band)` for each surface.
    fn absorbing_surfaces(&self) -> Vec<(f64, [f64; NUM_BANDS])>;
}

impl AbsorptionSurfaces for ShoeboxRoom {
    fn volume_m3(&self) -> f64 {
        self.volume()
    }

    fn absorbing_surfaces(&self) -> Vec<(f64, [f64; NUM_BANDS])> {
        self.panels()
            .iter()
            .map(|p| (p.area(), p.effective_absorption(&self.materials()[p.material])))
            .collect()
    }
}

/// A measured surface in an absorption inventory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InventorySurface {
    pub name: String,
    pub area_m2: f64,
    pub material: MaterialSpec,
    pub state: SurfaceState,
}

/// Room described only by volume and a surface/material inventory, as in a
/// site survey where surfaces do not tile a shoebox exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceInventory {
    pub volume_m3: f64,
    pub surfaces: Vec<InventorySurface>,
}

impl AbsorptionSurfaces for SurfaceInventory {
    fn volume_m3(&self) -> f64 {
        self.volume_m3
    }

    fn absorbing_surfaces(&self) -> Vec<(f64, [f64; NUM_BANDS])> {
        self.surfaces
            .iter()
            .map(|s| {
                let alpha = match s.state {
                    SurfaceState::Open => [1.0; NUM_BANDS],
                    SurfaceState::Closed => s.material.absorption,
                };
                (s.area_m2, alpha)
            })
            .collect()
    }
}

/// Total absorption `a = sum(S * alpha)` in band `band`, in metric sabins
/// (m^2) or sabins (ft^2). Open surfaces count with alpha = 1.
pub fn total_absorption(
    room: &impl AbsorptionSurfaces,
    band: usize,
    units: UnitSystem,
) -> Result<f64> {
    if band >= NUM_BANDS {
        return Err(AcousticsError::BandOutOfRange(band));
    }
    let a_m2: f64 = room
        .absorbing_surfaces()
        .iter()
        .map(|(area, alpha)| area * alpha[band])
        .sum();
    Ok(match units {
        UnitSystem::Metric => a_m2,
        UnitSystem::Imperial => a_m2 * FT2_PER_M2,
    })
}

/// Sabine reverberation time in seconds: `0.161 V/a` (metric) or `0.05 V/a` (imperial).
pub fn sabine_rt60(room: &impl AbsorptionSurfaces, band: usize, units: UnitSystem) -> Result<f64> {
    let a = total_absorption(room, band, units)?;
    if !(a > 0.0) {
        return Err(AcousticsError::ZeroAbsorption);
    }
    let v = room.volume_m3();
    Ok(match units {
        UnitSystem::Metric => METRIC_SABINE * v / a,
        UnitSystem::Imperial => IMPERIAL_SABINE * v * FT3_PER_M3 / a,
    })
}
