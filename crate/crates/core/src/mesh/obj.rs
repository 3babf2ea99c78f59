//! Wavefront OBJ subset: `v`, `vt`, `f`, `usemtl`, `mtllib`, `o`. Normals
//! (`vn`) are parsed past and dropped. Texture coordinates are stored per
//! vertex; when a vertex is referenced with several `vt` indices the last
//! one wins.

use std::fmt::Write as _;
use std::path::Path;

use super::{MeshError, Result, TriMesh};
use crate::geometry::Point3;

/// Materials known to the MTL writer, with their diffuse colours.
pub const MTL_ENTRIES: [(&str, [f64; 3]); 3] = [
    ("glass", [0.6, 0.8, 0.9]),
    ("mirror", [0.9, 0.9, 0.9]),
    ("background", [0.5, 0.5, 0.5]),
];

/// Material name standing for "no tag".
pub const UNTAGGED: &str = "default";

fn parse_err(line: usize, message: impl Into<String>) -> MeshError {
    MeshError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_floats<const N: usize>(parts: &[&str], line: usize, what: &str) -> Result<[f64; N]> {
    if parts.len() < N {
        return Err(parse_err(line, format!("{what} needs {N} coordinates")));
    }
    let mut out = [0.0f64; N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p
            .parse()
            .map_err(|_| parse_err(line, format!("bad number `{p}`")))?;
        if !o.is_finite() {
            return Err(parse_err(line, format!("non-finite coordinate `{p}`")));
        }
    }
    Ok(out)
}

/// Resolve a 1-based (or negative, relative) OBJ index against `count`.
fn resolve(raw: &str, count: usize, line: usize) -> Result<usize> {
    let i: i64 = raw
        .parse()
        .map_err(|_| parse_err(line, format!("bad index `{raw}`")))?;
    let idx = match i {
        0 => return Err(parse_err(line, "index 0 (OBJ indices start at 1)")),
        i if i > 0 => i as usize - 1,
        i => {
            let back = i.unsigned_abs() as usize;
            if back > count {
                return Err(parse_err(line, format!("relative index {i} before first element")));
            }
            count - back
        }
    };
    if idx >= count {
        return Err(parse_err(line, format!("index {raw} out of range ({count} defined)")));
    }
    Ok(idx)
}

pub fn parse_obj(text: &str) -> Result<TriMesh> {
    let mut mesh = TriMesh::default();
    let mut texcoords: Vec<[f64; 2]> = Vec::new();
    let mut vertex_uv: Vec<Option<usize>> = Vec::new();
    let mut material: Option<String> = None;

    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        let mut it = content.split_whitespace();
        let Some(tag) = it.next() else { continue };
        let parts: Vec<&str> = it.collect();
        match tag {
            "v" => {
                let [x, y, z] = parse_floats::<3>(&parts, line, "vertex")?;
                mesh.vertices.push(Point3::new(x, y, z));
                vertex_uv.push(None);
            }
            "vt" => {
                let [u, v] = parse_floats::<2>(&parts, line, "texture coordinate")?;
                texcoords.push([u, v]);
            }
            "vn" | "s" | "g" => {}
            "o" => mesh.name = parts.first().map(|s| s.to_string()),
            "mtllib" => mesh.mtllib = parts.first().map(|s| s.to_string()),
            "usemtl" => material = parts.first().filter(|&&m| m != UNTAGGED).map(|s| s.to_string()),
            "f" => {
                if parts.len() < 3 {
                    return Err(parse_err(line, "face needs at least 3 vertices"));
                }
                let mut poly = Vec::with_capacity(parts.len());
                for p in &parts {
                    let mut fields = p.split('/');
                    let v = resolve(fields.next().unwrap_or(""), mesh.vertices.len(), line)?;
                    if let Some(t) = fields.next().filter(|t| !t.is_empty()) {
                        vertex_uv[v] = Some(resolve(t, texcoords.len(), line)?);
                    }
                    poly.push(v);
                }
                if poly.len() > 3 {
                    log::warn!("line {line}: {}-gon fan-triangulated", poly.len());
                }
                for k in 1..poly.len() - 1 {
                    mesh.faces.push([poly[0], poly[k], poly[k + 1]]);
                    mesh.face_material.push(material.clone());
                }
            }
            other => log::debug!("line {line}: ignoring `{other}`"),
        }
    }
    if vertex_uv.iter().any(Option::is_some) {
        mesh.uv = Some(
            vertex_uv
                .iter()
                .map(|t| t.map_or([0.0, 0.0], |t| texcoords[t]))
                .collect(),
        );
    }
    mesh.validate()?;
    Ok(mesh)
}

pub fn load_obj(path: impl AsRef<Path>) -> Result<TriMesh> {
    parse_obj(&std::fs::read_to_string(path)?)
}

/// Serialize with shortest round-trip float formatting. Faces are emitted in
/// order, with a `usemtl` line whenever the material changes.
pub fn write_obj(mesh: &TriMesh) -> String {
    let mut s = String::new();
    if let Some(lib) = &mesh.mtllib {
        let _ = writeln!(s, "mtllib {lib}");
    }
    if let Some(name) = &mesh.name {
        let _ = writeln!(s, "o {name}");
    }
    for p in &mesh.vertices {
        let _ = writeln!(s, "v {} {} {}", p.x, p.y, p.z);
    }
    if let Some(uv) = &mesh.uv {
        for [u, v] in uv {
            let _ = writeln!(s, "vt {u} {v}");
        }
    }
    let mut current: Option<&str> = None;
    for (f, face) in mesh.faces.iter().enumerate() {
        let m = mesh.material_of(f);
        if m != current {
            let _ = writeln!(s, "usemtl {}", m.unwrap_or(UNTAGGED));
            current = m;
        }
        let [a, b, c] = face.map(|v| v + 1);
        if mesh.uv.is_some() {
            let _ = writeln!(s, "f {a}/{a} {b}/{b} {c}/{c}");
        } else {
            let _ = writeln!(s, "f {a} {b} {c}");
        }
    }
    s
}

pub fn save_obj(mesh: &TriMesh, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, write_obj(mesh))?;
    Ok(())
}

/// MTL file covering the known material tags.
pub fn write_mtl() -> String {
    let mut s = String::new();
    for (name, [r, g, b]) in MTL_ENTRIES {
        let _ = writeln!(s, "newmtl {name}\nKd {r} {g} {b}");
        if name == "glass" {
            s.push_str("d 0.3\n");
        }
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const QUAD: &str = "\
# unit quad
mtllib scene.mtl
o quad
v 0 0 0
v 1 0 0
v 1 1 0
v 0 1 0
vt 0 0
vt 1 0
vt 1 1
vt 0 1
usemtl glass
f 1/1 2/2 3/3
f 1/1 3/3 4/4
";

    #[test]
    fn unit_quad() {
        let m = parse_obj(QUAD).unwrap();
        assert_eq!(m.vertices.len(), 4);
        assert_eq!(m.faces, vec![[0, 1, 2], [0, 2, 3]]);
        assert_eq!(m.material_of(1), Some("glass"));
        assert_eq!(m.uv.as_ref().unwrap()[2], [1.0, 1.0]);
        assert_eq!(m.name.as_deref(), Some("quad"));
    }

    #[test]
    fn round_trip() {
        let m = parse_obj(QUAD).unwrap();
        let back = parse_obj(&write_obj(&m)).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn index_zero_is_an_error() {
        let text = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n";
        match parse_obj(text) {
            Err(MeshError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn polygons_and_negative_indices() {
        let text = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf -4//1 -3//1 -2//1 -1//1\n";
        let m = parse_obj(text).unwrap();
        assert_eq!(m.faces, vec![[0, 1, 2], [0, 2, 3]]);
        assert!(m.uv.is_none());
    }

    #[test]
    fn malformed_lines() {
        assert!(parse_obj("v 1 2\n").is_err());
        assert!(parse_obj("v 0 0 0\nf 1 2 3\n").is_err());
        assert!(parse_obj("v a b c\n").is_err());
    }

    #[test]
    fn mtl_lists_known_tags() {
        let mtl = write_mtl();
        for (name, _) in MTL_ENTRIES {
            assert!(mtl.contains(&format!("newmtl {name}")));
        }
    }
}
