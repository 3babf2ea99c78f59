use serde::{Deserialize, Serialize};

use super::camera::{CameraPose, ImageRect};
use super::classification::EchoClassification;
use super::discontinuity::{detect_discontinuities, PlanarDiscontinuity, DEFAULT_PLANARITY_TOL};
use super::hull::convex_hull_planar;
use super::{MeshError, Result, TriMesh};
use crate::acoustics::SurfaceState;
use crate::geometry::{Point3, Vector3};

/// Tag given to background geometry placed behind an inpainted surface.
pub const BACKGROUND: &str = "background";

/// Moved vertices closer than this to an existing loop vertex reuse it.
pub const WELD_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnhanceConfig {
    /// Skip a hole whose image rectangle overlaps the previous one by at
    /// least this IoU.
    pub overlap_epsilon: f64,
    /// Half-width of the depth window around the classified depth, metres.
    pub depth_band: f64,
    /// Fill with one hull polygon instead of moving the loop vertices.
    pub simplify_geometry: bool,
    /// Distance of the background plane behind the filled surface, metres.
    pub background_offset: f64,
    pub min_component_faces: usize,
    pub planarity_tol: f64,
}

impl Default for EnhanceConfig {
    fn default() -> Self {
        EnhanceConfig {
            overlap_epsilon: 0.5,
            depth_band: 0.25,
            simplify_geometry: true,
            background_offset: 0.3,
            min_component_faces: 4,
            planarity_tol: DEFAULT_PLANARITY_TOL,
        }
    }
}

impl EnhanceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.overlap_epsilon) {
            return Err(MeshError::InvalidConfig(format!(
                "overlap_epsilon {} outside [0, 1]",
                self.overlap_epsilon
            )));
        }
        if self.depth_band.is_nan() || self.depth_band <= 0.0 {
            return Err(MeshError::InvalidConfig("depth_band must be positive".into()));
        }
        if !(self.background_offset >= 0.0 && self.background_offset.is_finite()) {
            return Err(MeshError::InvalidConfig("background_offset must be finite and >= 0".into()));
        }
        if self.planarity_tol.is_nan() || self.planarity_tol < 0.0 {
            return Err(MeshError::InvalidConfig("planarity_tol must be >= 0".into()));
        }
        Ok(())
    }
}

/// Polygon added by [`inpaint`], counter-clockwise about `normal`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilledSurface {
    pub polygon: Vec<Point3>,
    pub normal: Vector3,
    pub material: String,
}

fn check_guard(c: &EchoClassification) -> Result<()> {
    if c.state != SurfaceState::Closed {
        return Err(MeshError::PreconditionViolated("classification is open".into()));
    }
    if !c.material.is_reflective() {
        return Err(MeshError::PreconditionViolated(format!(
            "material `{}` is not glass or mirror",
            c.material
        )));
    }
    Ok(())
}

/// Fill one discontinuity at the classified depth.
///
/// With `simplify_geometry` the hull of the loop is projected along view
/// rays onto the depth plane and fan-triangulated from its first vertex.
/// Otherwise the loop vertices themselves slide along their rays and the
/// loop is closed with a fan around its centroid.
pub fn inpaint(
    mesh: &TriMesh,
    d: &PlanarDiscontinuity,
    c: &EchoClassification,
    cfg: &EnhanceConfig,
) -> Result<(TriMesh, FilledSurface)> {
    check_guard(c)?;
    let cam = &c.pose;
    let material = c.material.as_str();
    let mut out = mesh.clone();
    let loop_pts = d.points(mesh);

    let polygon_ids: Vec<usize> = if cfg.simplify_geometry {
        let hull = convex_hull_planar(&loop_pts, &d.normal)?;
        let mut ids = Vec::with_capacity(hull.len());
        for &h in &hull {
            let p = cam.to_depth(&loop_pts[h], c.depth)?;
            if (p - loop_pts[h]).norm() <= WELD_TOL {
                ids.push(d.boundary_loop[h]);
            } else {
                ids.push(out.add_vertex(p));
            }
        }
        for k in 1..ids.len() - 1 {
            out.add_face([ids[0], ids[k], ids[k + 1]], Some(material));
        }
        ids
    } else {
        for &v in &d.boundary_loop {
            out.vertices[v] = cam.to_depth(&mesh.vertices[v], c.depth)?;
        }
        // Reverse so the fill traverses shared edges against the rim.
        let ids: Vec<usize> = d.boundary_loop.iter().rev().copied().collect();
        let centroid = ids.iter().map(|&v| out.vertices[v].coords).sum::<Vector3>() / ids.len() as f64;
        let ci = out.add_vertex(Point3::from(centroid));
        for k in 0..ids.len() {
            out.add_face([ci, ids[k], ids[(k + 1) % ids.len()]], Some(material));
        }
        ids
    };
    out.validate()?;
    let polygon = polygon_ids.iter().map(|&v| out.vertices[v]).collect();
    Ok((
        out,
        FilledSurface {
            polygon,
            normal: d.normal,
            material: material.to_string(),
        },
    ))
}

/// Copy of the filled polygon pushed `offset` metres away from the viewer,
/// tagged `background`.
pub fn place_background(mesh: &TriMesh, surface: &FilledSurface, view: &CameraPose, offset: f64) -> Result<TriMesh> {
    let away = if surface.normal.dot(&view.axis()) < 0.0 {
        -surface.normal
    } else {
        surface.normal
    };
    let mut out = mesh.clone();
    let ids: Vec<usize> = surface
        .polygon
        .iter()
        .map(|p| out.add_vertex(p + away * offset))
        .collect();
    for k in 1..ids.len().saturating_sub(1) {
        out.add_face([ids[0], ids[k], ids[k + 1]], Some(BACKGROUND));
    }
    out.validate()?;
    Ok(out)
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }
}

/// Component id (smallest face index) of every face, joining faces that
/// share an edge and pass `joinable`.
fn face_components(mesh: &TriMesh, joinable: impl Fn(usize) -> bool) -> Vec<usize> {
    let mut uf = UnionFind::new(mesh.faces.len());
    let mut first: std::collections::HashMap<(usize, usize), usize> = Default::default();
    for (fi, f) in mesh.faces.iter().enumerate() {
        if !joinable(fi) {
            continue;
        }
        for k in 0..3 {
            let (a, b) = (f[k], f[(k + 1) % 3]);
            match first.entry((a.min(b), a.max(b))) {
                std::collections::hash_map::Entry::Occupied(e) => uf.union(*e.get(), fi),
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(fi);
                }
            }
        }
    }
    (0..mesh.faces.len()).map(|f| uf.find(f)).collect()
}

fn remove_small(mesh: &TriMesh, min_faces: usize, protect: impl Fn(Option<&str>) -> bool) -> TriMesh {
    let comp = face_components(mesh, |_| true);
    let mut size = vec![0usize; mesh.faces.len()];
    let mut protected = vec![false; mesh.faces.len()];
    for (f, &c) in comp.iter().enumerate() {
        size[c] += 1;
        protected[c] |= protect(mesh.material_of(f));
    }
    let keep: Vec<bool> = comp.iter().map(|&c| size[c] >= min_faces || protected[c]).collect();
    mesh.retain_faces(&keep)
}

/// Drop edge-connected components with fewer than `min_faces` faces.
pub fn remove_loose_components(mesh: &TriMesh, min_faces: usize) -> TriMesh {
    remove_small(mesh, min_faces, |_| false)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Filled { loop_len: usize, material: String },
    /// Open state or a non-reflective material.
    Guarded,
    NoDiscontinuity,
    /// The hole overlaps the previous one or an existing reflective patch.
    Overlap { iou: f64 },
    Failed(String),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EnhanceReport {
    /// One outcome per classification, in input order.
    pub outcomes: Vec<Outcome>,
}

impl EnhanceReport {
    pub fn filled(&self) -> usize {
        self.outcomes.iter().filter(|o| matches!(o, Outcome::Filled { .. })).count()
    }

    pub fn failures(&self) -> usize {
        self.outcomes.iter().filter(|o| matches!(o, Outcome::Failed(_))).count()
    }
}

/// Image rectangles of the existing glass and mirror patches.
fn reflective_patches(mesh: &TriMesh, cam: &CameraPose) -> Vec<ImageRect> {
    let reflective = |f: usize| matches!(mesh.material_of(f), Some("glass") | Some("mirror"));
    let comp = face_components(mesh, reflective);
    let mut groups: std::collections::BTreeMap<usize, Vec<Point3>> = Default::default();
    for f in (0..mesh.faces.len()).filter(|&f| reflective(f)) {
        groups.entry(comp[f]).or_default().extend(mesh.face_points(f));
    }
    groups.values().filter_map(|pts| cam.image_rect(pts)).collect()
}

/// Hole to fill for one classification: among holes in front of the camera,
/// prefer those within the depth band, then the one nearest the optical axis.
fn pick_hole<'a>(
    mesh: &TriMesh,
    holes: &'a [PlanarDiscontinuity],
    c: &EchoClassification,
    band: f64,
) -> Option<&'a PlanarDiscontinuity> {
    let cam = &c.pose;
    let visible: Vec<(&PlanarDiscontinuity, Point3)> = holes
        .iter()
        .map(|h| (h, h.centroid(mesh)))
        .filter(|(_, p)| cam.view_depth(p) > 0.0)
        .collect();
    let in_band: Vec<_> = visible
        .iter()
        .filter(|(_, p)| (cam.view_depth(p) - c.depth).abs() <= band)
        .cloned()
        .collect();
    let pool = if in_band.is_empty() { visible } else { in_band };
    let off_axis = |p: &Point3| {
        let d = (p - cam.position).normalize();
        1.0 - d.dot(&cam.axis())
    };
    pool.into_iter()
        .min_by(|a, b| off_axis(&a.1).total_cmp(&off_axis(&b.1)))
        .map(|(h, _)| h)
}

/// Run the classification loop over `mesh`. Loose components are removed
/// first (components carrying glass, mirror or background faces are kept);
/// each closed glass or mirror classification then fills at most one hole
/// and places background geometry behind it. Failures are recorded in the
/// report and do not stop the loop.
pub fn enhance(
    mesh: &TriMesh,
    classifications: &[EchoClassification],
    cfg: &EnhanceConfig,
) -> Result<(TriMesh, EnhanceReport)> {
    cfg.validate()?;
    let mut m = remove_small(mesh, cfg.min_component_faces, |t| {
        matches!(t, Some("glass") | Some("mirror") | Some(BACKGROUND))
    });
    let mut report = EnhanceReport::default();
    let mut previous: Option<Vec<Point3>> = None;

    for c in classifications {
        if check_guard(c).is_err() {
            report.outcomes.push(Outcome::Guarded);
            continue;
        }
        if let Err(e) = c.validate() {
            report.outcomes.push(Outcome::Failed(e.to_string()));
            continue;
        }
        let holes: Vec<PlanarDiscontinuity> = detect_discontinuities(&m, cfg.planarity_tol)
            .into_iter()
            .filter(|d| d.is_hole)
            .collect();
        let Some(hole) = pick_hole(&m, &holes, c, cfg.depth_band) else {
            report.outcomes.push(Outcome::NoDiscontinuity);
            continue;
        };
        let pts = hole.points(&m);
        let Some(rect) = c.pose.image_rect(&pts) else {
            report.outcomes.push(Outcome::NoDiscontinuity);
            continue;
        };
        let mut others = reflective_patches(&m, &c.pose);
        if let Some(prev) = previous.as_ref().and_then(|p| c.pose.image_rect(p)) {
            others.push(prev);
        }
        let iou = others.iter().map(|r| rect.iou(r)).fold(0.0, f64::max);
        if iou >= cfg.overlap_epsilon {
            report.outcomes.push(Outcome::Overlap { iou });
            continue;
        }
        let step = inpaint(&m, hole, c, cfg)
            .and_then(|(filled, surface)| place_background(&filled, &surface, &c.pose, cfg.background_offset));
        match step {
            Ok(next) => {
                report.outcomes.push(Outcome::Filled {
                    loop_len: hole.boundary_loop.len(),
                    material: c.material.to_string(),
                });
                m = next;
                previous = Some(pts);
            }
            Err(e) => report.outcomes.push(Outcome::Failed(e.to_string())),
        }
    }
    Ok((m, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::classification::SurfaceMaterial;

    fn holed_plane() -> TriMesh {
        let v = [(-2.0, -2.0), (2.0, -2.0), (2.0, 2.0), (-2.0, 2.0), (-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)]
            .iter()
            .map(|&(x, y)| Point3::new(x, y, 2.0))
            .collect();
        let faces = vec![[0, 4, 5], [0, 5, 1], [1, 5, 6], [1, 6, 2], [2, 6, 7], [2, 7, 3], [3, 7, 4], [3, 4, 0]];
        TriMesh::new(v, faces).unwrap()
    }

    fn classification(state: SurfaceState, material: SurfaceMaterial, depth: f64) -> EchoClassification {
        EchoClassification {
            frame_id: "f".into(),
            pose: CameraPose::default(),
            state,
            probability: 0.9,
            depth,
            material,
        }
    }

    #[test]
    fn fills_hole_at_classified_depth() {
        let m = holed_plane();
        let c = classification(SurfaceState::Closed, SurfaceMaterial::Glass, 2.0);
        let (out, report) = enhance(&m, &[c], &EnhanceConfig::default()).unwrap();
        assert_eq!(report.filled(), 1);
        assert_eq!(out.faces.len(), 12);
        assert_eq!(&out.faces[8..10], &[[6, 5, 4], [6, 4, 7]]);
        assert_eq!(out.material_of(9), Some("glass"));
        assert_eq!(out.material_of(11), Some(BACKGROUND));
        assert!(out.vertices[8..].iter().all(|p| (p.z - 2.3).abs() < 1e-12));
        let holes: Vec<_> = detect_discontinuities(&out, 0.02).into_iter().filter(|d| d.is_hole).collect();
        assert!(holes.is_empty());
    }

    #[test]
    fn open_and_other_are_guarded() {
        let m = holed_plane();
        let cs = [
            classification(SurfaceState::Open, SurfaceMaterial::Glass, 2.0),
            classification(SurfaceState::Closed, SurfaceMaterial::Other, 2.0),
        ];
        let (out, report) = enhance(&m, &cs, &EnhanceConfig::default()).unwrap();
        assert_eq!(out, m);
        assert_eq!(report.outcomes, vec![Outcome::Guarded, Outcome::Guarded]);
        let d = &detect_discontinuities(&m, 0.02)[1];
        assert!(matches!(
            inpaint(&m, d, &cs[0], &EnhanceConfig::default()),
            Err(MeshError::PreconditionViolated(_))
        ));
    }

    #[test]
    fn idempotent() {
        let m = holed_plane();
        let cs = [classification(SurfaceState::Closed, SurfaceMaterial::Mirror, 2.4)];
        let cfg = EnhanceConfig::default();
        let (once, _) = enhance(&m, &cs, &cfg).unwrap();
        let (twice, report) = enhance(&once, &cs, &cfg).unwrap();
        assert_eq!(once, twice);
        assert!(matches!(report.outcomes[0], Outcome::Overlap { .. }));
    }

    #[test]
    fn vertex_move_branch_closes_loop() {
        let m = holed_plane();
        let c = classification(SurfaceState::Closed, SurfaceMaterial::Glass, 2.5);
        let cfg = EnhanceConfig {
            simplify_geometry: false,
            ..EnhanceConfig::default()
        };
        let d = detect_discontinuities(&m, 0.02).into_iter().find(|d| d.is_hole).unwrap();
        let (out, surface) = inpaint(&m, &d, &c, &cfg).unwrap();
        for &v in &d.boundary_loop {
            assert!((out.vertices[v].z - 2.5).abs() < 1e-9);
        }
        assert_eq!(surface.polygon.len(), 4);
        assert!(detect_discontinuities(&out, 0.02).iter().all(|d| !d.is_hole));
    }

    #[test]
    fn background_offset_zero_is_coincident() {
        let surface = FilledSurface {
            polygon: vec![Point3::new(0.0, 0.0, 1.0), Point3::new(1.0, 0.0, 1.0), Point3::new(0.0, 1.0, 1.0)],
            normal: -Vector3::z(),
            material: "glass".into(),
        };
        let out = place_background(&TriMesh::default(), &surface, &CameraPose::default(), 0.0).unwrap();
        assert_eq!(out.vertices, surface.polygon);
        assert!((out.face_normal(0) - Vector3::z()).norm() < 1e-12 || (out.face_normal(0) + Vector3::z()).norm() < 1e-12);
    }

    #[test]
    fn loose_components() {
        let mut m = holed_plane();
        let a = m.add_vertex(Point3::new(5.0, 5.0, 5.0));
        let b = m.add_vertex(Point3::new(6.0, 5.0, 5.0));
        let c = m.add_vertex(Point3::new(5.0, 6.0, 5.0));
        m.add_face([a, b, c], None);
        assert_eq!(remove_loose_components(&m, 0), m);
        let r = remove_loose_components(&m, 4);
        assert_eq!(r.faces.len(), 8);
        assert_eq!(r.vertices.len(), 8);
        assert_eq!(r, holed_plane());
    }
}
