use std::collections::HashMap;

use super::{MeshError, Result};
use crate::geometry::{Point3, Vector3};

/// Triangles below this area count as degenerate.
pub const DEGENERATE_AREA: f64 = 1e-12;

/// Indexed triangle mesh with optional per-vertex texture coordinates and a
/// material tag per face.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TriMesh {
    pub name: Option<String>,
    pub mtllib: Option<String>,
    pub vertices: Vec<Point3>,
    pub uv: Option<Vec<[f64; 2]>>,
    pub faces: Vec<[usize; 3]>,
    pub face_material: Vec<Option<String>>,
}

impl TriMesh {
    pub fn new(vertices: Vec<Point3>, faces: Vec<[usize; 3]>) -> Result<Self> {
        let n = faces.len();
        let m = TriMesh {
            vertices,
            faces,
            face_material: vec![None; n],
            ..TriMesh::default()
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.face_material.len() != self.faces.len() {
            return Err(MeshError::Invalid(format!(
                "{} material tags for {} faces",
                self.face_material.len(),
                self.faces.len()
            )));
        }
        if let Some(uv) = &self.uv {
            if uv.len() != self.vertices.len() {
                return Err(MeshError::Invalid("uv count differs from vertex count".into()));
            }
        }
        for (i, f) in self.faces.iter().enumerate() {
            if let Some(&bad) = f.iter().find(|&&v| v >= self.vertices.len()) {
                return Err(MeshError::IndexOutOfRange { face: i, index: bad });
            }
            if self.face_area(i) <= DEGENERATE_AREA {
                return Err(MeshError::Degenerate(format!("face {i} has zero area")));
            }
        }
        Ok(())
    }

    pub fn face_points(&self, f: usize) -> [Point3; 3] {
        self.faces[f].map(|v| self.vertices[v])
    }

    /// Unnormalized normal, length twice the area.
    pub fn face_cross(&self, f: usize) -> Vector3 {
        let [a, b, c] = self.face_points(f);
        (b - a).cross(&(c - a))
    }

    pub fn face_area(&self, f: usize) -> f64 {
        0.5 * self.face_cross(f).norm()
    }

    pub fn face_normal(&self, f: usize) -> Vector3 {
        self.face_cross(f).normalize()
    }

    pub fn face_centroid(&self, f: usize) -> Point3 {
        let [a, b, c] = self.face_points(f);
        Point3::from((a.coords + b.coords + c.coords) / 3.0)
    }

    pub fn material_of(&self, f: usize) -> Option<&str> {
        self.face_material[f].as_deref()
    }

    pub fn add_vertex(&mut self, p: Point3) -> usize {
        self.vertices.push(p);
        if let Some(uv) = &mut self.uv {
            uv.push([0.0, 0.0]);
        }
        self.vertices.len() - 1
    }

    pub fn add_face(&mut self, f: [usize; 3], material: Option<&str>) -> usize {
        self.faces.push(f);
        self.face_material.push(material.map(str::to_string));
        self.faces.len() - 1
    }

    /// Undirected edge → incident face count.
    pub fn edge_face_counts(&self) -> HashMap<(usize, usize), usize> {
        let mut counts = HashMap::new();
        for f in &self.faces {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                *counts.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        counts
    }

    /// Keep only the faces where `keep` is true; drop vertices that were used
    /// before but are no longer referenced. Order is preserved.
    pub fn retain_faces(&self, keep: &[bool]) -> TriMesh {
        let mut used_before = vec![false; self.vertices.len()];
        let mut used_after = vec![false; self.vertices.len()];
        for (f, &k) in self.faces.iter().zip(keep) {
            for &v in f {
                used_before[v] = true;
                if k {
                    used_after[v] = true;
                }
            }
        }
        let mut remap = vec![usize::MAX; self.vertices.len()];
        let mut out = TriMesh {
            name: self.name.clone(),
            mtllib: self.mtllib.clone(),
            uv: self.uv.as_ref().map(|_| Vec::new()),
            ..TriMesh::default()
        };
        for (i, p) in self.vertices.iter().enumerate() {
            if used_after[i] || !used_before[i] {
                remap[i] = out.vertices.len();
                out.vertices.push(*p);
                if let (Some(dst), Some(src)) = (&mut out.uv, &self.uv) {
                    dst.push(src[i]);
                }
            }
        }
        for (i, f) in self.faces.iter().enumerate() {
            if keep[i] {
                out.faces.push(f.map(|v| remap[v]));
                out.face_material.push(self.face_material[i].clone());
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad() -> TriMesh {
        TriMesh::new(
            vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(1.0, 1.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
            ],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn basic_geometry() {
        let q = quad();
        assert!((q.face_area(0) - 0.5).abs() < 1e-12);
        assert_eq!(q.face_normal(1), Vector3::z());
        let counts = q.edge_face_counts();
        assert_eq!(counts[&(0, 2)], 2);
        assert_eq!(counts.values().filter(|&&c| c == 1).count(), 4);
    }

    #[test]
    fn rejects_bad_faces() {
        let p = vec![Point3::origin(), Point3::new(1.0, 0.0, 0.0), Point3::new(2.0, 0.0, 0.0)];
        assert!(matches!(TriMesh::new(p.clone(), vec![[0, 1, 2]]), Err(MeshError::Degenerate(_))));
        assert!(matches!(TriMesh::new(p, vec![[0, 1, 5]]), Err(MeshError::IndexOutOfRange { .. })));
    }

    #[test]
    fn retain_drops_orphaned_vertices() {
        let q = quad();
        let r = q.retain_faces(&[false, true]);
        assert_eq!(r.vertices.len(), 3);
        assert_eq!(r.faces, vec![[0, 1, 2]]);
        assert_eq!(q.retain_faces(&[true, true]), q);
    }
}
