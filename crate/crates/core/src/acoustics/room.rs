use serde::{Deserialize, Serialize};

use super::bands::NUM_BANDS;
use super::material::MaterialSpec;
use super::{AcousticsError, Result, DEFAULT_SPEED_OF_SOUND};
use crate::geometry::{Point3, Vector3};

const BOUNDARY_TOL: f64 = 1e-6;

/// One of the six walls of a shoebox with a corner at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Wall {
    XMin,
    XMax,
    YMin,
    YMax,
    ZMin,
    ZMax,
}

impl Wall {
    pub const ALL: [Wall; 6] = [
        Wall::XMin,
        Wall::XMax,
        Wall::YMin,
        Wall::YMax,
        Wall::ZMin,
        Wall::ZMax,
    ];

    pub fn axis(self) -> usize {
        match self {
            Wall::XMin | Wall::XMax => 0,
            Wall::YMin | Wall::YMax => 1,
            Wall::ZMin | Wall::ZMax => 2,
        }
    }

    pub fn is_max(self) -> bool {
        matches!(self, Wall::XMax | Wall::YMax | Wall::ZMax)
    }

    pub fn from_axis(axis: usize, max: bool) -> Wall {
        match (axis, max) {
            (0, false) => Wall::XMin,
            (0, true) => Wall::XMax,
            (1, false) => Wall::YMin,
            (1, true) => Wall::YMax,
            (2, false) => Wall::ZMin,
            _ => Wall::ZMax,
        }
    }

    /// In-plane axes `(u, v)`: x walls use (y, z), y walls (x, z), z walls (x, y).
    pub fn plane_axes(self) -> (usize, usize) {
        match self.axis() {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        }
    }

    pub fn inward_normal(self) -> Vector3 {
        let mut n = Vector3::zeros();
        n[self.axis()] = if self.is_max() { -1.0 } else { 1.0 };
        n
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Axis-aligned rectangle in a wall's `(u, v)` coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub u0: f64,
    pub v0: f64,
    pub u1: f64,
    pub v1: f64,
}

impl Rect {
    pub fn new(u0: f64, v0: f64, u1: f64, v1: f64) -> Self {
        Rect {
            u0: u0.min(u1),
            v0: v0.min(v1),
            u1: u0.max(u1),
            v1: v0.max(v1),
        }
    }

    pub fn area(&self) -> f64 {
        (self.u1 - self.u0) * (self.v1 - self.v0)
    }

    pub fn contains(&self, u: f64, v: f64, tol: f64) -> bool {
        u >= self.u0 - tol && u <= self.u1 + tol && v >= self.v0 - tol && v <= self.v1 + tol
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.u0 + self.u1), 0.5 * (self.v0 + self.v1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceState {
    Open,
    Closed,
}

/// Rectangular piece of a wall with one material and an open/closed state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfacePanel {
    pub label: Option<String>,
    pub wall: Wall,
    pub rect: Rect,
    /// Index into the owning room's material list.
    pub material: usize,
    pub state: SurfaceState,
    /// Faces outdoors (exterior noise enters through it when open).
    pub exterior: bool,
}

impl SurfacePanel {
    pub fn area(&self) -> f64 {
        self.rect.area()
    }

    pub fn corners(&self, dims: [f64; 3]) -> [Point3; 4] {
        let (ua, va) = self.wall.plane_axes();
        let a = self.wall.axis();
        let fixed = if self.wall.is_max() { dims[a] } else { 0.0 };
        let r = self.rect;
        let mk = |u: f64, v: f64| {
            let mut p = Point3::origin();
            p[a] = fixed;
            p[ua] = u;
            p[va] = v;
            p
        };
        [mk(r.u0, r.v0), mk(r.u1, r.v0), mk(r.u1, r.v1), mk(r.u0, r.v1)]
    }

    /// Absorption actually applied: open panels absorb everything.
    pub fn effective_absorption(&self, material: &MaterialSpec) -> [f64; NUM_BANDS] {
        match self.state {
            SurfaceState::Open => [1.0; NUM_BANDS],
            SurfaceState::Closed => material.absorption,
        }
    }

    /// Build a panel from four corner points lying on a wall of `dims`.
    pub fn from_corners(
        corners: [Point3; 4],
        dims: [f64; 3],
        material: usize,
        state: SurfaceState,
        exterior: bool,
    ) -> Result<Self> {
        let wall = Wall::ALL
            .into_iter()
            .find(|w| {
                let a = w.axis();
                let target = if w.is_max() { dims[a] } else { 0.0 };
                corners.iter().all(|c| (c[a] - target).abs() <= BOUNDARY_TOL)
            })
            .ok_or_else(|| {
                AcousticsError::InvalidRoom("panel corners are not coplanar on a room wall".into())
            })?;
        let (ua, va) = wall.plane_axes();
        let us: Vec<f64> = corners.iter().map(|c| c[ua]).collect();
        let vs: Vec<f64> = corners.iter().map(|c| c[va]).collect();
        let (umin, umax) = min_max(&us);
        let (vmin, vmax) = min_max(&vs);
        let rect = Rect::new(umin, vmin, umax, vmax);
        // Each corner must sit on a rectangle corner.
        for c in &corners {
            let on_u = (c[ua] - umin).abs() <= BOUNDARY_TOL || (c[ua] - umax).abs() <= BOUNDARY_TOL;
            let on_v = (c[va] - vmin).abs() <= BOUNDARY_TOL || (c[va] - vmax).abs() <= BOUNDARY_TOL;
            if !(on_u && on_v) {
                return Err(AcousticsError::InvalidRoom(
                    "panel corners do not form an axis-aligned rectangle".into(),
                ));
            }
        }
        if rect.area() <= 0.0 {
            return Err(AcousticsError::InvalidRoom("panel has zero area".into()));
        }
        Ok(SurfacePanel {
            label: None,
            wall,
            rect,
            material,
            state,
            exterior,
        })
    }
}

fn min_max(xs: &[f64]) -> (f64, f64) {
    xs.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

/// Rectangular room `[0,L] x [0,W] x [0,H]` whose walls are tiled by panels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShoeboxRoom {
    dims: [f64; 3],
    materials: Vec<MaterialSpec>,
    panels: Vec<SurfacePanel>,
    /// Exterior noise level in dB relative to a unit-amplitude source.
    exterior_noise_db: Option<f64>,
    speed_of_sound: f64,
}

impl ShoeboxRoom {
    pub fn new(
        dims: [f64; 3],
        materials: Vec<MaterialSpec>,
        panels: Vec<SurfacePanel>,
        exterior_noise_db: Option<f64>,
        speed_of_sound: f64,
    ) -> Result<Self> {
        let room = ShoeboxRoom {
            dims,
            materials,
            panels,
            exterior_noise_db,
            speed_of_sound,
        };
        room.validate()?;
        Ok(room)
    }

    /// Every wall a single closed panel of `material`.
    pub fn uniform(dims: [f64; 3], material: MaterialSpec) -> Result<Self> {
        let name = material.name.clone();
        let mut b = RoomBuilder::new(dims).material(material);
        for w in Wall::ALL {
            b = b.wall(w, &name, false);
        }
        b.build()
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.iter().any(|&d| !(d > 0.0) || !d.is_finite()) {
            return Err(AcousticsError::InvalidRoom(format!(
                "dimensions must be positive, got {:?}",
                self.dims
            )));
        }
        if !(self.speed_of_sound > 0.0) {
            return Err(AcousticsError::InvalidRoom("speed of sound must be positive".into()));
        }
        let mut names = std::collections::HashSet::new();
        for m in &self.materials {
            m.validate()?;
            if !names.insert(m.name.as_str()) {
                return Err(AcousticsError::InvalidRoom(format!(
                    "duplicate material name `{}`",
                    m.name
                )));
            }
        }
        let mut covered = [0.0; 6];
        for (i, p) in self.panels.iter().enumerate() {
            if p.material >= self.materials.len() {
                return Err(AcousticsError::InvalidRoom(format!(
                    "panel {i} references missing material {}",
                    p.material
                )));
            }
            if !(p.area() > 0.0) {
                return Err(AcousticsError::InvalidRoom(format!("panel {i} has zero area")));
            }
            let (ua, va) = p.wall.plane_axes();
            let r = p.rect;
            if r.u0 < -BOUNDARY_TOL
                || r.v0 < -BOUNDARY_TOL
                || r.u1 > self.dims[ua] + BOUNDARY_TOL
                || r.v1 > self.dims[va] + BOUNDARY_TOL
            {
                return Err(AcousticsError::InvalidRoom(format!(
                    "panel {i} extends beyond wall {:?}",
                    p.wall
                )));
            }
            covered[p.wall.index()] += p.area();
        }
        for w in Wall::ALL {
            let want = self.wall_area(w);
            if (covered[w.index()] - want).abs() > 1e-6 {
                return Err(AcousticsError::InvalidRoom(format!(
                    "panels on {w:?} cover {:.6} m^2, wall is {want:.6} m^2",
                    covered[w.index()]
                )));
            }
        }
        Ok(())
    }

    pub fn dims(&self) -> [f64; 3] {
        self.dims
    }

    pub fn materials(&self) -> &[MaterialSpec] {
        &self.materials
    }

    pub fn panels(&self) -> &[SurfacePanel] {
        &self.panels
    }

    pub fn exterior_noise_db(&self) -> Option<f64> {
        self.exterior_noise_db
    }

    pub fn speed_of_sound(&self) -> f64 {
        self.speed_of_sound
    }

    pub fn volume(&self) -> f64 {
        self.dims.iter().product()
    }

    pub fn wall_area(&self, wall: Wall) -> f64 {
        let (ua, va) = wall.plane_axes();
        self.dims[ua] * self.dims[va]
    }

    pub fn surface_area(&self) -> f64 {
        Wall::ALL.iter().map(|&w| self.wall_area(w)).sum()
    }

    pub fn material_index(&self, name: &str) -> Option<usize> {
        self.materials.iter().position(|m| m.name == name)
    }

    pub fn panel_material(&self, panel: usize) -> &MaterialSpec {
        &self.materials[self.panels[panel].material]
    }

    pub fn has_exterior_panels(&self) -> bool {
        self.panels.iter().any(|p| p.exterior)
    }

    pub fn any_exterior_open(&self) -> bool {
        self.panels
            .iter()
            .any(|p| p.exterior && p.state == SurfaceState::Open)
    }

    /// Panel on `wall` containing the in-plane projection of `point`.
    pub fn panel_at(&self, wall: Wall, point: &Point3) -> Option<usize> {
        let (ua, va) = wall.plane_axes();
        let (u, v) = (point[ua], point[va]);
        let mut fallback = None;
        let mut best = f64::INFINITY;
        for (i, p) in self.panels.iter().enumerate() {
            if p.wall != wall {
                continue;
            }
            if p.rect.contains(u, v, 1e-9) {
                return Some(i);
            }
            let (cu, cv) = p.rect.center();
            let d = (cu - u).hypot(cv - v);
            if d < best {
                best = d;
                fallback = Some(i);
            }
        }
        fallback
    }

    pub fn strictly_inside(&self, p: &Point3) -> bool {
        (0..3).all(|a| p[a] > 0.0 && p[a] < self.dims[a])
    }

    pub fn panels_labeled<'a>(&'a self, label: &'a str) -> impl Iterator<Item = usize> + 'a {
        self.panels
            .iter()
            .enumerate()
            .filter(move |(_, p)| p.label.as_deref() == Some(label))
            .map(|(i, _)| i)
    }

    /// Copy with every panel carrying `label` switched to `state`.
    pub fn with_labeled_state(&self, label: &str, state: SurfaceState) -> Result<Self> {
        let ids: Vec<usize> = self.panels_labeled(label).collect();
        if ids.is_empty() {
            return Err(AcousticsError::InvalidRoom(format!("no panel labelled `{label}`")));
        }
        let mut room = self.clone();
        for i in ids {
            room.panels[i].state = state;
        }
        Ok(room)
    }

    /// Copy with every panel carrying `label` switched to material `material`.
    pub fn with_labeled_material(&self, label: &str, material: &str) -> Result<Self> {
        let m = self.material_index(material).ok_or_else(|| {
            AcousticsError::InvalidRoom(format!("unknown material `{material}`"))
        })?;
        let ids: Vec<usize> = self.panels_labeled(label).collect();
        if ids.is_empty() {
            return Err(AcousticsError::InvalidRoom(format!("no panel labelled `{label}`")));
        }
        let mut room = self.clone();
        for i in ids {
            room.panels[i].material = m;
        }
        Ok(room)
    }

    pub fn with_exterior_noise_db(mut self, level: Option<f64>) -> Self {
        self.exterior_noise_db = level;
        self
    }
}

#[derive(Debug, Clone)]
struct Opening {
    label: Option<String>,
    rect: Rect,
    material: String,
    state: SurfaceState,
    exterior: bool,
}

#[derive(Debug, Clone)]
struct WallSpec {
    material: String,
    exterior: bool,
    openings: Vec<Opening>,
}

/// Assembles a [`ShoeboxRoom`] from per-wall materials and rectangular openings.
///
/// A wall with openings is tiled on the grid of all opening edges, so every
/// tile is either fully inside one opening or fully in the base material.
#[derive(Debug, Clone)]
pub struct RoomBuilder {
    dims: [f64; 3],
    materials: Vec<MaterialSpec>,
    walls: [Option<WallSpec>; 6],
    extra_panels: Vec<(Option<String>, [Point3; 4], String, SurfaceState, bool)>,
    exterior_noise_db: Option<f64>,
    speed_of_sound: f64,
}

impl RoomBuilder {
    pub fn new(dims: [f64; 3]) -> Self {
        RoomBuilder {
            dims,
            materials: Vec::new(),
            walls: Default::default(),
            extra_panels: Vec::new(),
            exterior_noise_db: None,
            speed_of_sound: DEFAULT_SPEED_OF_SOUND,
        }
    }

    pub fn material(mut self, m: MaterialSpec) -> Self {
        self.materials.push(m);
        self
    }

    pub fn wall(mut self, wall: Wall, material: &str, exterior: bool) -> Self {
        self.walls[wall.index()] = Some(WallSpec {
            material: material.to_string(),
            exterior,
            openings: Vec::new(),
        });
        self
    }

    pub fn opening(
        mut self,
        wall: Wall,
        label: Option<&str>,
        rect: Rect,
        material: &str,
        state: SurfaceState,
        exterior: bool,
    ) -> Self {
        if let Some(spec) = self.walls[wall.index()].as_mut() {
            spec.openings.push(Opening {
                label: label.map(str::to_string),
                rect,
                material: material.to_string(),
                state,
                exterior,
            });
        } else {
            // Recorded against a missing wall; build() reports it.
            self.walls[wall.index()] = Some(WallSpec {
                material: String::new(),
                exterior: false,
                openings: vec![Opening {
                    label: label.map(str::to_string),
                    rect,
                    material: material.to_string(),
                    state,
                    exterior,
                }],
            });
        }
        self
    }

    /// Raw panel given by corners; the wall it lies on must not also be set via [`wall`](Self::wall).
    pub fn panel(
        mut self,
        label: Option<&str>,
        corners: [Point3; 4],
        material: &str,
        state: SurfaceState,
        exterior: bool,
    ) -> Self {
        self.extra_panels.push((
            label.map(str::to_string),
            corners,
            material.to_string(),
            state,
            exterior,
        ));
        self
    }

    pub fn exterior_noise_db(mut self, level: Option<f64>) -> Self {
        self.exterior_noise_db = level;
        self
    }

    pub fn speed_of_sound(mut self, c: f64) -> Self {
        self.speed_of_sound = c;
        self
    }

    pub fn build(self) -> Result<ShoeboxRoom> {
        let lookup = |name: &str| -> Result<usize> {
            self.materials
                .iter()
                .position(|m| m.name == name)
                .ok_or_else(|| AcousticsError::InvalidRoom(format!("unknown material `{name}`")))
        };
        let mut panels = Vec::new();
        for wall in Wall::ALL {
            let Some(spec) = &self.walls[wall.index()] else {
                continue;
            };
            if spec.material.is_empty() {
                return Err(AcousticsError::InvalidRoom(format!(
                    "opening on {wall:?} without a base wall material"
                )));
            }
            let base = lookup(&spec.material)?;
            let (ua, va) = wall.plane_axes();
            let (umax, vmax) = (self.dims[ua], self.dims[va]);
            let mut us = vec![0.0, umax];
            let mut vs = vec![0.0, vmax];
            for (i, o) in spec.openings.iter().enumerate() {
                let r = o.rect;
                if r.area() <= 0.0 || r.u0 < 0.0 || r.v0 < 0.0 || r.u1 > umax || r.v1 > vmax {
                    return Err(AcousticsError::InvalidRoom(format!(
                        "opening {i} on {wall:?} is empty or outside the wall"
                    )));
                }
                for o2 in &spec.openings[..i] {
                    let r2 = o2.rect;
                    let overlap_u = r.u0.max(r2.u0) < r.u1.min(r2.u1);
                    let overlap_v = r.v0.max(r2.v0) < r.v1.min(r2.v1);
                    if overlap_u && overlap_v {
                        return Err(AcousticsError::InvalidRoom(format!(
                            "overlapping openings on {wall:?}"
                        )));
                    }
                }
                us.extend([r.u0, r.u1]);
                vs.extend([r.v0, r.v1]);
            }
            for list in [&mut us, &mut vs] {
                list.sort_by(f64::total_cmp);
                list.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
            }
            for uw in us.windows(2) {
                for vw in vs.windows(2) {
                    let rect = Rect::new(uw[0], vw[0], uw[1], vw[1]);
                    let (cu, cv) = rect.center();
                    let panel = match spec.openings.iter().find(|o| o.rect.contains(cu, cv, 0.0)) {
                        Some(o) => SurfacePanel {
                            label: o.label.clone(),
                            wall,
                            rect,
                            material: lookup(&o.material)?,
                            state: o.state,
                            exterior: o.exterior,
                        },
                        None => SurfacePanel {
                            label: None,
                            wall,
                            rect,
                            material: base,
                            state: SurfaceState::Closed,
                            exterior: spec.exterior,
                        },
                    };
                    panels.push(panel);
                }
            }
        }
        for (label, corners, material, state, exterior) in &self.extra_panels {
            let mut p =
                SurfacePanel::from_corners(*corners, self.dims, lookup(material)?, *state, *exterior)?;
            p.label = label.clone();
            panels.push(p);
        }
        ShoeboxRoom::new(
            self.dims,
            self.materials,
            panels,
            self.exterior_noise_db,
            self.speed_of_sound,
        )
    }
}

/// Emitter and listener positions. The microphone sits `vertical_offset`
/// above `receiver_pos`, as with two stacked phones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceReceiver {
    pub source_pos: Point3,
    pub receiver_pos: Point3,
    pub vertical_offset: f64,
}

impl SourceReceiver {
    pub const DEFAULT_VERTICAL_OFFSET: f64 = 0.07;

    pub fn new(source_pos: Point3, receiver_pos: Point3) -> Self {
        SourceReceiver {
            source_pos,
            receiver_pos,
            vertical_offset: 0.0,
        }
    }

    /// Receiver stacked `DEFAULT_VERTICAL_OFFSET` above the source.
    pub fn stacked(source_pos: Point3) -> Self {
        SourceReceiver {
            source_pos,
            receiver_pos: source_pos,
            vertical_offset: Self::DEFAULT_VERTICAL_OFFSET,
        }
    }

    pub fn microphone(&self) -> Point3 {
        self.receiver_pos + Vector3::new(0.0, 0.0, self.vertical_offset)
    }

    pub fn validate(&self, room: &ShoeboxRoom) -> Result<()> {
        if !(self.vertical_offset >= 0.0) {
            return Err(AcousticsError::InvalidArgument(
                "vertical offset must be non-negative".into(),
            ));
        }
        for p in [self.source_pos, self.receiver_pos, self.microphone()] {
            if !room.strictly_inside(&p) {
                return Err(AcousticsError::OutsideRoom([p.x, p.y, p.z]));
            }
        }
        if (self.microphone() - self.source_pos).norm() <= 0.0 {
            return Err(AcousticsError::InvalidArgument(
                "source and microphone coincide".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mats() -> Vec<MaterialSpec> {
        vec![
            MaterialSpec::uniform("painted", 0.1).unwrap(),
            MaterialSpec::uniform("glass", 0.25).unwrap(),
        ]
    }

    #[test]
    fn opening_subdivides_wall() {
        let mut b = RoomBuilder::new([4.0, 3.0, 2.5]);
        for m in mats() {
            b = b.material(m);
        }
        for w in Wall::ALL {
            b = b.wall(w, "painted", false);
        }
        let room = b
            .opening(
                Wall::XMin,
                Some("window"),
                Rect::new(1.0, 1.0, 2.0, 2.0),
                "glass",
                SurfaceState::Closed,
                true,
            )
            .build()
            .unwrap();
        // 3x3 grid on x_min plus one panel on each other wall.
        assert_eq!(room.panels().len(), 9 + 5);
        assert_eq!(room.panels_labeled("window").count(), 1);
        let w = room.panels_labeled("window").next().unwrap();
        assert!((room.panels()[w].area() - 1.0).abs() < 1e-12);
        let hit = room.panel_at(Wall::XMin, &Point3::new(0.0, 1.5, 1.5)).unwrap();
        assert_eq!(hit, w);
        assert!(room.has_exterior_panels());
    }

    #[test]
    fn rejects_uncovered_wall() {
        let mut b = RoomBuilder::new([4.0, 3.0, 2.5]);
        for m in mats() {
            b = b.material(m);
        }
        for w in &Wall::ALL[..5] {
            b = b.wall(*w, "painted", false);
        }
        assert!(matches!(b.build(), Err(AcousticsError::InvalidRoom(_))));
    }

    #[test]
    fn rejects_bad_dims() {
        assert!(ShoeboxRoom::uniform([0.0, 1.0, 1.0], MaterialSpec::uniform("a", 0.1).unwrap()).is_err());
    }

    #[test]
    fn panel_from_corners_checks_rectangle() {
        let dims = [4.0, 3.0, 2.5];
        let ok = SurfacePanel::from_corners(
            [
                Point3::new(4.0, 0.0, 0.0),
                Point3::new(4.0, 3.0, 0.0),
                Point3::new(4.0, 3.0, 2.5),
                Point3::new(4.0, 0.0, 2.5),
            ],
            dims,
            0,
            SurfaceState::Closed,
            false,
        )
        .unwrap();
        assert_eq!(ok.wall, Wall::XMax);
        assert!((ok.area() - 7.5).abs() < 1e-12);
        let skew = SurfacePanel::from_corners(
            [
                Point3::new(4.0, 0.0, 0.0),
                Point3::new(4.0, 3.0, 0.5),
                Point3::new(4.0, 3.0, 2.5),
                Point3::new(4.0, 0.0, 2.5),
            ],
            dims,
            0,
            SurfaceState::Closed,
            false,
        );
        assert!(skew.is_err());
        let off_wall = SurfacePanel::from_corners(
            [
                Point3::new(2.0, 0.0, 0.0),
                Point3::new(2.0, 3.0, 0.0),
                Point3::new(2.0, 3.0, 2.5),
                Point3::new(2.0, 0.0, 2.5),
            ],
            dims,
            0,
            SurfaceState::Closed,
            false,
        );
        assert!(off_wall.is_err());
    }

    #[test]
    fn source_receiver_must_be_inside() {
        let room = ShoeboxRoom::uniform([4.0, 3.0, 2.5], MaterialSpec::uniform("a", 0.1).unwrap()).unwrap();
        assert!(SourceReceiver::stacked(Point3::new(1.0, 1.0, 1.0)).validate(&room).is_ok());
        assert!(SourceReceiver::stacked(Point3::new(1.0, 1.0, 2.45)).validate(&room).is_err());
        assert!(SourceReceiver::new(Point3::new(1.0, 1.0, 1.0), Point3::new(1.0, 1.0, 1.0))
            .validate(&room)
            .is_err());
    }
}
