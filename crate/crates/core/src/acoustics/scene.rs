//! TOML scene files.
//!
//! ```toml
//! [room]
//! units = "m"                 # or "ft"; applies to every length and area below
//! dims = [4.0, 3.0, 2.5]
//! speed_of_sound = 343.0      # optional, m/s
//! exterior_noise_db = -35.0   # optional, dB full scale
//!
//! [[material]]
//! name = "painted"
//! absorption = [0.01, 0.01, 0.1, 0.06, 0.07, 0.09, 0.08, 0.08, 0.08]
//!
//! [[wall]]
//! side = "x_min"
//! material = "painted"
//! [[wall.opening]]
//! label = "window"
//! rect = [1.0, 1.0, 2.0, 2.0]  # (u0, v0, u1, v1) in the wall's plane axes
//! material = "glass"
//! state = "closed"
//! exterior = true
//!
//! [source_receiver]           # optional
//! source = [1.0, 1.5, 1.2]
//! receiver = [2.0, 1.5, 1.2]
//! vertical_offset = 0.07
//!
//! [inventory]                 # optional surface survey used for RT60
//! volume = 1296.0
//! [[inventory.surface]]
//! name = "walls"
//! area = 432.0
//! material = "painted"
//! ```
//!
//! Walls not listed take the first material. Wall plane axes are `(y, z)` for
//! x walls, `(x, z)` for y walls and `(x, y)` for z walls.

use std::path::Path;

use serde::Deserialize;

use super::material::MaterialSpec;
use super::room::{Rect, RoomBuilder, ShoeboxRoom, SourceReceiver, SurfaceState, Wall};
use super::sabine::{AbsorptionSurfaces, InventorySurface, SurfaceInventory};
use super::{AcousticsError, Result};
use crate::geometry::Point3;

const M_PER_FT: f64 = 0.3048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
pub enum LengthUnit {
    #[default]
    #[serde(rename = "m")]
    Meters,
    #[serde(rename = "ft")]
    Feet,
}

impl LengthUnit {
    fn to_m(self) -> f64 {
        match self {
            LengthUnit::Meters => 1.0,
            LengthUnit::Feet => M_PER_FT,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RoomSection {
    #[serde(default)]
    units: LengthUnit,
    dims: [f64; 3],
    speed_of_sound: Option<f64>,
    exterior_noise_db: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OpeningSection {
    label: Option<String>,
    rect: [f64; 4],
    material: String,
    #[serde(default = "closed")]
    state: SurfaceState,
    #[serde(default)]
    exterior: bool,
}

fn closed() -> SurfaceState {
    SurfaceState::Closed
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WallSection {
    side: Wall,
    material: String,
    #[serde(default)]
    exterior: bool,
    #[serde(default)]
    opening: Vec<OpeningSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoseSection {
    source: [f64; 3],
    receiver: [f64; 3],
    #[serde(default)]
    vertical_offset: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InventorySurfaceSection {
    name: String,
    area: f64,
    material: String,
    #[serde(default = "closed")]
    state: SurfaceState,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InventorySection {
    volume: f64,
    #[serde(default)]
    surface: Vec<InventorySurfaceSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneFile {
    room: RoomSection,
    #[serde(default)]
    material: Vec<MaterialSpec>,
    #[serde(default)]
    wall: Vec<WallSection>,
    source_receiver: Option<PoseSection>,
    inventory: Option<InventorySection>,
}

/// A parsed scene: the room, optional poses and optional absorption survey.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub room: ShoeboxRoom,
    pub source_receiver: Option<SourceReceiver>,
    pub inventory: Option<SurfaceInventory>,
    pub units: LengthUnit,
}

impl Scene {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: SceneFile = toml::from_str(text).map_err(|e| AcousticsError::Scene(e.to_string()))?;
        let u = file.room.units.to_m();
        if file.material.is_empty() {
            return Err(AcousticsError::Scene("at least one [[material]] is required".into()));
        }
        for m in &file.material {
            m.validate()?;
        }
        let mut b = RoomBuilder::new(file.room.dims.map(|d| d * u)).exterior_noise_db(file.room.exterior_noise_db);
        if let Some(c) = file.room.speed_of_sound {
            b = b.speed_of_sound(c);
        }
        for m in &file.material {
            b = b.material(m.clone());
        }
        let default_material = file.material[0].name.clone();
        for wall in Wall::ALL {
            let sections: Vec<&WallSection> = file.wall.iter().filter(|w| w.side == wall).collect();
            match sections.as_slice() {
                [] => b = b.wall(wall, &default_material, false),
                [w] => {
                    b = b.wall(wall, &w.material, w.exterior);
                    for o in &w.opening {
                        let r = o.rect.map(|x| x * u);
                        b = b.opening(
                            wall,
                            o.label.as_deref(),
                            Rect::new(r[0], r[1], r[2], r[3]),
                            &o.material,
                            o.state,
                            o.exterior,
                        );
                    }
                }
                _ => return Err(AcousticsError::Scene(format!("wall {wall:?} listed more than once"))),
            }
        }
        let room = b.build()?;

        let source_receiver = match file.source_receiver {
            Some(p) => {
                let pt = |a: [f64; 3]| Point3::new(a[0] * u, a[1] * u, a[2] * u);
                let sr = SourceReceiver {
                    source_pos: pt(p.source),
                    receiver_pos: pt(p.receiver),
                    vertical_offset: p.vertical_offset * u,
                };
                sr.validate(&room)?;
                Some(sr)
            }
            None => None,
        };

        let inventory = match file.inventory {
            Some(inv) => {
                let mut surfaces = Vec::with_capacity(inv.surface.len());
                for s in inv.surface {
                    let material = file
                        .material
                        .iter()
                        .find(|m| m.name == s.material)
                        .cloned()
                        .ok_or_else(|| AcousticsError::Scene(format!("unknown material `{}`", s.material)))?;
                    if !(s.area >= 0.0) {
                        return Err(AcousticsError::Scene(format!("surface `{}` has negative area", s.name)));
                    }
                    surfaces.push(InventorySurface {
                        name: s.name,
                        area_m2: s.area * u * u,
                        material,
                        state: s.state,
                    });
                }
                Some(SurfaceInventory {
                    volume_m3: inv.volume * u * u * u,
                    surfaces,
                })
            }
            None => None,
        };

        Ok(Scene {
            room,
            source_receiver,
            inventory,
            units: file.room.units,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// The survey if the file has one, otherwise the room's own panels.
    pub fn absorption_model(&self) -> &dyn AbsorptionModel {
        match &self.inventory {
            Some(inv) => inv,
            None => &self.room,
        }
    }
}

/// Object-safe view of [`AbsorptionSurfaces`].
pub trait AbsorptionModel {
    fn volume_m3(&self) -> f64;
    fn absorbing_surfaces(&self) -> Vec<(f64, [f64; super::NUM_BANDS])>;
}

impl<T: AbsorptionSurfaces> AbsorptionModel for T {
    fn volume_m3(&self) -> f64 {
        AbsorptionSurfaces::volume_m3(self)
    }
    fn absorbing_surfaces(&self) -> Vec<(f64, [f64; super::NUM_BANDS])> {
        AbsorptionSurfaces::absorbing_surfaces(self)
    }
}

impl AbsorptionSurfaces for &dyn AbsorptionModel {
    fn volume_m3(&self) -> f64 {
        AbsorptionModel::volume_m3(*self)
    }
    fn absorbing_surfaces(&self) -> Vec<(f64, [f64; super::NUM_BANDS])> {
        AbsorptionModel::absorbing_surfaces(*self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acoustics::{sabine_rt60, total_absorption, UnitSystem};

    const ROOM: &str = r#"
        [room]
        dims = [4.0, 3.0, 2.5]
        exterior_noise_db = -35.0

        [[material]]
        name = "painted"
        absorption = [0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1]

        [[material]]
        name = "glass"
        absorption = [0.35, 0.25, 0.18, 0.12, 0.07, 0.04, 0.03, 0.02, 0.02]
        is_reflector = true

        [[wall]]
        side = "x_min"
        material = "painted"
        exterior = true
        [[wall.opening]]
        label = "window"
        rect = [1.0, 1.0, 2.0, 2.0]
        material = "glass"
        state = "open"
        exterior = true

        [source_receiver]
        source = [1.0, 1.5, 1.2]
        receiver = [2.0, 1.5, 1.2]
        vertical_offset = 0.07
    "#;

    #[test]
    fn parses_room_with_opening() {
        let s = Scene::from_toml_str(ROOM).unwrap();
        assert_eq!(s.room.dims(), [4.0, 3.0, 2.5]);
        assert!(s.room.any_exterior_open());
        assert_eq!(s.room.panels_labeled("window").count(), 1);
        let sr = s.source_receiver.unwrap();
        assert!((sr.microphone().z - 1.27).abs() < 1e-12);
        // Open 1 m^2 window counts as alpha = 1.
        let a = total_absorption(&s.room, 2, UnitSystem::Metric).unwrap();
        let expected = (s.room.surface_area() - 1.0) * 0.1 + 1.0;
        assert!((a - expected).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(Scene::from_toml_str("[room]\ndims = [1.0, 1.0]\n").is_err());
        assert!(Scene::from_toml_str("[room]\ndims = [1.0, 1.0, 1.0]\n").is_err());
        let unknown = ROOM.replace("material = \"glass\"", "material = \"brick\"");
        assert!(Scene::from_toml_str(&unknown).is_err());
        let outside = ROOM.replace("receiver = [2.0, 1.5, 1.2]", "receiver = [9.0, 1.5, 1.2]");
        assert!(matches!(Scene::from_toml_str(&outside), Err(AcousticsError::OutsideRoom(_))));
    }

    #[test]
    fn feet_inventory_uses_imperial_sabine() {
        let text = r#"
            [room]
            units = "ft"
            dims = [9.0, 16.0, 9.0]
            [[material]]
            name = "painted"
            absorption = [0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1]
            [inventory]
            volume = 1296.0
            [[inventory.surface]]
            name = "all"
            area = 500.0
            material = "painted"
        "#;
        let s = Scene::from_toml_str(text).unwrap();
        let model = s.absorption_model();
        let a = total_absorption(&model, 2, UnitSystem::Imperial).unwrap();
        assert!((a - 50.0).abs() < 1e-9);
        let t = sabine_rt60(&model, 2, UnitSystem::Imperial).unwrap();
        assert!((t - 0.05 * 1296.0 / 50.0).abs() < 1e-9);
    }
}
