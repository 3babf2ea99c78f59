use serde::{Deserialize, Serialize};

use super::{MeshError, Result, TriMesh};
use crate::geometry::{Point3, Vector3};

/// Pinhole camera pose. `forward` is the optical axis; `up` need not be
/// exactly orthogonal to it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraPose {
    pub position: Point3,
    pub forward: Vector3,
    pub up: Vector3,
}

impl Default for CameraPose {
    fn default() -> Self {
        CameraPose {
            position: Point3::origin(),
            forward: Vector3::z(),
            up: Vector3::y(),
        }
    }
}

impl CameraPose {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: &Vector3| v.iter().all(|c| c.is_finite()) && v.norm() > 0.0;
        if !ok(&self.forward) || !ok(&self.up) || !self.position.coords.iter().all(|c| c.is_finite()) {
            return Err(MeshError::InvalidConfig("camera pose has a zero or non-finite axis".into()));
        }
        if self.forward.normalize().cross(&self.up.normalize()).norm() < 1e-9 {
            return Err(MeshError::InvalidConfig("camera up is parallel to forward".into()));
        }
        Ok(())
    }

    pub fn axis(&self) -> Vector3 {
        self.forward.normalize()
    }

    /// Distance of `p` along the optical axis.
    pub fn view_depth(&self, p: &Point3) -> f64 {
        (p - self.position).dot(&self.axis())
    }

    /// Slide `p` along its view ray until its view depth equals `depth`.
    pub fn to_depth(&self, p: &Point3, depth: f64) -> Result<Point3> {
        let z = self.view_depth(p);
        if z <= 1e-9 {
            return Err(MeshError::Degenerate(format!("point {:?} is behind the camera", p.coords.as_slice())));
        }
        Ok(self.position + (p - self.position) * (depth / z))
    }

    /// Normalized image coordinates `(x / z, y / z)`, `None` behind the camera.
    pub fn project(&self, p: &Point3) -> Option<[f64; 2]> {
        let f = self.axis();
        let right = f.cross(&self.up).normalize();
        let up = right.cross(&f);
        let d = p - self.position;
        let z = d.dot(&f);
        (z > 1e-9).then(|| [d.dot(&right) / z, d.dot(&up) / z])
    }

    /// Bounding rectangle of the projected points.
    pub fn image_rect(&self, points: &[Point3]) -> Option<ImageRect> {
        let mut r = ImageRect {
            min: [f64::INFINITY; 2],
            max: [f64::NEG_INFINITY; 2],
        };
        for p in points {
            let q = self.project(p)?;
            for k in 0..2 {
                r.min[k] = r.min[k].min(q[k]);
                r.max[k] = r.max[k].max(q[k]);
            }
        }
        (!points.is_empty()).then_some(r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageRect {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl ImageRect {
    pub fn area(&self) -> f64 {
        (self.max[0] - self.min[0]).max(0.0) * (self.max[1] - self.min[1]).max(0.0)
    }

    /// Intersection over union; zero when either rectangle has no area.
    pub fn iou(&self, other: &ImageRect) -> f64 {
        let inter = ImageRect {
            min: [self.min[0].max(other.min[0]), self.min[1].max(other.min[1])],
            max: [self.max[0].min(other.max[0]), self.max[1].min(other.max[1])],
        }
        .area();
        let union = self.area() + other.area() - inter;
        if union <= 0.0 {
            0.0
        } else {
            inter / union
        }
    }
}

/// Faces whose centroid view depth lies in `[depth - band, depth + band]`.
/// Vertices orphaned by the cut are dropped.
pub fn depth_filter(mesh: &TriMesh, depth: f64, band: f64, view: &CameraPose) -> Result<TriMesh> {
    if band.is_nan() || band <= 0.0 {
        return Err(MeshError::InvalidConfig(format!("depth band must be positive, got {band}")));
    }
    view.validate()?;
    let keep: Vec<bool> = (0..mesh.faces.len())
        .map(|f| (view.view_depth(&mesh.face_centroid(f)) - depth).abs() <= band)
        .collect();
    if !keep.iter().any(|&k| k) {
        return Err(MeshError::EmptyResult);
    }
    Ok(mesh.retain_faces(&keep))
}
