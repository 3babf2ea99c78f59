//! Shared 3D point and vector aliases.

pub type Point3 = nalgebra::Point3<f64>;
pub type Vector3 = nalgebra::Vector3<f64>;

/// Orthonormal basis `(u, v)` spanning the plane with the given normal.
pub fn plane_basis(normal: &Vector3) -> (Vector3, Vector3) {
    let n = normal.normalize();
    let helper = if n.x.abs() < 0.9 {
        Vector3::x()
    } else {
        Vector3::y()
    };
    let u = n.cross(&helper).normalize();
    let v = n.cross(&u);
    (u, v)
}
