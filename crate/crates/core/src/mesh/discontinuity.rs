use std::collections::{BTreeMap, HashMap};

use nalgebra::{Matrix3, SymmetricEigen};

use super::TriMesh;
use crate::geometry::{Point3, Vector3};

/// Default maximum RMS distance of a loop's vertices from its fitted plane.
pub const DEFAULT_PLANARITY_TOL: f64 = 0.02;

/// A closed boundary loop whose vertices lie on a common plane.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarDiscontinuity {
    /// Vertex indices in the order the adjacent faces traverse the boundary.
    pub boundary_loop: Vec<usize>,
    /// Unit plane normal, oriented like the adjacent faces.
    pub normal: Vector3,
    /// Plane is `normal · x = offset`.
    pub offset: f64,
    pub planarity_rms: f64,
    pub area: f64,
    /// True when the loop winds against the surrounding surface, i.e. it
    /// bounds a hole rather than the outer rim of a patch.
    pub is_hole: bool,
}

impl PlanarDiscontinuity {
    pub fn points(&self, mesh: &TriMesh) -> Vec<Point3> {
        self.boundary_loop.iter().map(|&v| mesh.vertices[v]).collect()
    }

    pub fn centroid(&self, mesh: &TriMesh) -> Point3 {
        let sum: Vector3 = self.boundary_loop.iter().map(|&v| mesh.vertices[v].coords).sum();
        Point3::from(sum / self.boundary_loop.len() as f64)
    }
}

/// Least-squares plane through `points`: centroid and the unit eigenvector
/// of the scatter matrix with the smallest eigenvalue.
pub fn fit_plane(points: &[Point3]) -> (Point3, Vector3) {
    let c: Vector3 = points.iter().map(|p| p.coords).sum::<Vector3>() / points.len() as f64;
    let mut scatter = Matrix3::zeros();
    for p in points {
        let d = p.coords - c;
        scatter += d * d.transpose();
    }
    let eig = SymmetricEigen::new(scatter);
    let (k, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("three eigenvalues");
    (Point3::from(c), eig.eigenvectors.column(k).into_owned())
}

/// Newell vector of a closed polygon: normal direction times twice the area.
pub fn newell(points: &[Point3]) -> Vector3 {
    let mut n = Vector3::zeros();
    for (i, p) in points.iter().enumerate() {
        let q = points[(i + 1) % points.len()];
        n += p.coords.cross(&q.coords);
    }
    n
}

/// Chain boundary half-edges into closed loops. Each loop follows the
/// direction its adjacent face traverses it.
pub fn boundary_loops(mesh: &TriMesh) -> Vec<(Vec<usize>, Vector3)> {
    let counts = mesh.edge_face_counts();
    // start vertex -> (end vertex, adjacent face)
    let mut out: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for (fi, f) in mesh.faces.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (f[k], f[(k + 1) % 3]);
            if counts[&(a.min(b), a.max(b))] == 1 {
                out.entry(a).or_default().push((b, fi));
            }
        }
    }
    let mut used: HashMap<(usize, usize), bool> = HashMap::new();
    let mut loops = Vec::new();
    let starts: Vec<usize> = out.keys().copied().collect();
    for s in starts {
        for e in 0..out[&s].len() {
            let (first, _) = out[&s][e];
            if used.contains_key(&(s, first)) {
                continue;
            }
            let mut verts = vec![s];
            let mut face_normal = Vector3::zeros();
            let mut cur = s;
            let mut closed = false;
            loop {
                let Some(&(next, fi)) = out
                    .get(&cur)
                    .and_then(|edges| edges.iter().find(|(b, _)| !used.contains_key(&(cur, *b))))
                else {
                    break;
                };
                used.insert((cur, next), true);
                face_normal += mesh.face_cross(fi);
                if next == s {
                    closed = true;
                    break;
                }
                verts.push(next);
                cur = next;
            }
            if closed && verts.len() >= 3 {
                loops.push((verts, face_normal));
            }
        }
    }
    loops
}

/// Boundary loops that pass the planarity test, sorted by area, largest
/// first. A watertight mesh yields an empty list.
pub fn detect_discontinuities(mesh: &TriMesh, planarity_tol: f64) -> Vec<PlanarDiscontinuity> {
    let mut found: Vec<PlanarDiscontinuity> = boundary_loops(mesh)
        .into_iter()
        .filter_map(|(verts, face_normal)| {
            let pts: Vec<Point3> = verts.iter().map(|&v| mesh.vertices[v]).collect();
            let (c, mut n) = fit_plane(&pts);
            if n.dot(&face_normal) < 0.0 {
                n = -n;
            }
            let rms = (pts.iter().map(|p| (p - c).dot(&n).powi(2)).sum::<f64>() / pts.len() as f64).sqrt();
            if rms > planarity_tol {
                return None;
            }
            let area_vec = newell(&pts);
            Some(PlanarDiscontinuity {
                boundary_loop: verts,
                normal: n,
                offset: n.dot(&c.coords),
                planarity_rms: rms,
                area: 0.5 * area_vec.norm(),
                is_hole: area_vec.dot(&n) < 0.0,
            })
        })
        .collect();
    found.sort_by(|a, b| {
        b.area
            .total_cmp(&a.area)
            .then(a.boundary_loop[0].cmp(&b.boundary_loop[0]))
    });
    found
}
