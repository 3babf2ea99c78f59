use super::room::{ShoeboxRoom, Wall};
use super::{AcousticsError, Result};
use crate::geometry::Point3;

/// Mirror image of the source.
///
/// `lattice[a] = n` means `|n|` reflections off the two walls normal to axis
/// `a`; the image coordinate is `n*L + s` for even `n` and `(n+1)*L - s` for
/// odd `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageSource {
    pub position: Point3,
    pub lattice: [i32; 3],
    /// Walls hit, as a multiset in canonical (axis, min-before-max) order.
    /// The spatial hit order depends on the receiver; see [`trace_reflections`].
    pub walls: Vec<Wall>,
}

impl ImageSource {
    pub fn order(&self) -> usize {
        self.lattice.iter().map(|n| n.unsigned_abs() as usize).sum()
    }
}

/// Reflection point on a specific panel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reflection {
    pub panel: usize,
    pub point: Point3,
}

fn image_coord(n: i32, len: f64, s: f64) -> f64 {
    if n.rem_euclid(2) == 0 {
        n as f64 * len + s
    } else {
        (n + 1) as f64 * len - s
    }
}

fn axis_walls(n: i32) -> (usize, usize) {
    // (min-wall hits, max-wall hits)
    let m = n.unsigned_abs() as usize;
    if n > 0 {
        (m / 2, m.div_ceil(2))
    } else {
        (m.div_ceil(2), m / 2)
    }
}

fn make_image(dims: [f64; 3], source: &Point3, lattice: [i32; 3]) -> ImageSource {
    let mut position = Point3::origin();
    let mut walls = Vec::new();
    for a in 0..3 {
        position[a] = image_coord(lattice[a], dims[a], source[a]);
        let (lo, hi) = axis_walls(lattice[a]);
        walls.extend(std::iter::repeat_n(Wall::from_axis(a, false), lo));
        walls.extend(std::iter::repeat_n(Wall::from_axis(a, true), hi));
    }
    ImageSource {
        position,
        lattice,
        walls,
    }
}

/// Number of lattice points with `|nx| + |ny| + |nz| <= max_order`.
pub fn lattice_count(max_order: usize) -> usize {
    let k = max_order as i64;
    let mut count = 0;
    for nx in -k..=k {
        for ny in -(k - nx.abs())..=(k - nx.abs()) {
            count += 2 * (k - nx.abs() - ny.abs()) + 1;
        }
    }
    count as usize
}

/// Image sources of reflection order exactly `order` (order 0 is the source itself).
pub fn image_sources(room: &ShoeboxRoom, source: &Point3, order: usize) -> Result<Vec<ImageSource>> {
    if !room.strictly_inside(source) {
        return Err(AcousticsError::OutsideRoom([source.x, source.y, source.z]));
    }
    let dims = room.dims();
    let n = order as i32;
    let mut out = Vec::new();
    for nx in -n..=n {
        let rest = n - nx.abs();
        for ny in -rest..=rest {
            let nz = rest - ny.abs();
            out.push(make_image(dims, source, [nx, ny, nz]));
            if nz != 0 {
                out.push(make_image(dims, source, [nx, ny, -nz]));
            }
        }
    }
    Ok(out)
}

/// All images with order `<= max_order`, lowest order first.
pub fn image_sources_up_to(
    room: &ShoeboxRoom,
    source: &Point3,
    max_order: usize,
) -> Result<Vec<ImageSource>> {
    let mut out = Vec::with_capacity(lattice_count(max_order));
    for k in 0..=max_order {
        out.extend(image_sources(room, source, k)?);
    }
    Ok(out)
}

fn fold(v: f64, len: f64) -> f64 {
    let m = v.rem_euclid(2.0 * len);
    if m > len {
        2.0 * len - m
    } else {
        m
    }
}

/// Resolve the panels struck by the specular path from `image` to `receiver`,
/// in order of travel from the receiver backwards.
pub fn trace_reflections(room: &ShoeboxRoom, image: &ImageSource, receiver: &Point3) -> Vec<Reflection> {
    let dims = room.dims();
    let dir = image.position - receiver;
    let mut crossings: Vec<(f64, usize, Wall)> = Vec::with_capacity(image.order());
    for a in 0..3 {
        let n = image.lattice[a];
        let len = dims[a];
        let planes: Vec<(f64, Wall)> = if n > 0 {
            (1..=n)
                .map(|k| (k as f64 * len, Wall::from_axis(a, k % 2 == 1)))
                .collect()
        } else {
            (0..-n)
                .map(|k| (-(k as f64) * len, Wall::from_axis(a, k % 2 == 1)))
                .collect()
        };
        for (c, wall) in planes {
            let t = (c - receiver[a]) / dir[a];
            crossings.push((t, a, wall));
        }
    }
    crossings.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    crossings
        .into_iter()
        .filter_map(|(t, a, wall)| {
            let q = receiver + dir * t;
            let mut p = Point3::origin();
            for b in 0..3 {
                p[b] = fold(q[b], dims[b]);
            }
            p[a] = if wall.is_max() { dims[a] } else { 0.0 };
            room.panel_at(wall, &p).map(|panel| Reflection { panel, point: p })
        })
        .collect()
}
