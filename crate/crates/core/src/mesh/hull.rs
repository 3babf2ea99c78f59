use super::{MeshError, Result};
use crate::geometry::{plane_basis, Point3, Vector3};

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Andrew's monotone chain. Returns indices of the hull vertices in
/// counter-clockwise order, starting from the lexicographically smallest
/// point. Points on hull edges are not reported.
pub fn convex_hull_2d(points: &[[f64; 2]]) -> Result<Vec<usize>> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        points[a][0]
            .total_cmp(&points[b][0])
            .then(points[a][1].total_cmp(&points[b][1]))
    });
    order.dedup_by(|a, b| points[*a] == points[*b]);
    if order.len() < 3 {
        return Err(MeshError::Degenerate(format!("{} distinct points", order.len())));
    }

    let mut hull: Vec<usize> = Vec::with_capacity(2 * order.len());
    for pass in 0..2 {
        let floor = hull.len() + 1;
        let seq: Box<dyn Iterator<Item = &usize>> = if pass == 0 {
            Box::new(order.iter())
        } else {
            Box::new(order.iter().rev().skip(1))
        };
        for &i in seq {
            while hull.len() >= floor.max(2)
                && cross(points[hull[hull.len() - 2]], points[hull[hull.len() - 1]], points[i]) <= 0.0
            {
                hull.pop();
            }
            hull.push(i);
        }
    }
    hull.pop();
    if hull.len() < 3 {
        return Err(MeshError::Degenerate("points are collinear".into()));
    }
    Ok(hull)
}

/// Coordinates of `points` in the plane basis `(u, v)` with `u × v = normal`.
pub fn project_to_plane(points: &[Point3], normal: &Vector3) -> Vec<[f64; 2]> {
    let (u, v) = plane_basis(normal);
    points
        .iter()
        .map(|p| [p.coords.dot(&u), p.coords.dot(&v)])
        .collect()
}

/// Hull of (approximately) coplanar 3D points, counter-clockwise about
/// `normal`. Returns indices into `points`.
pub fn convex_hull_planar(points: &[Point3], normal: &Vector3) -> Result<Vec<usize>> {
    if normal.norm() == 0.0 || !normal.iter().all(|c| c.is_finite()) {
        return Err(MeshError::Degenerate("zero plane normal".into()));
    }
    convex_hull_2d(&project_to_plane(points, normal))
}
