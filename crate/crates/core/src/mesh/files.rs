//! Mesh file formats: the `.snet` extraction cache plus OBJ and PLY exports.
//!
//! The cache stores every field group of a [`SurfaceNetMesh`] losslessly, so
//! smoothing can be re-run with new parameters without re-extraction. All
//! multi-byte values are little-endian; layouts are documented in FORMATS.md.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{MeshError, SurfaceNetMesh, TriangleMesh};

const SNET_MAGIC: &[u8; 4] = b"SNET";
const SNET_VERSION: u32 = 1;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> MeshError + '_ {
    move |source| MeshError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Write the extraction cache. Byte-stable: equal meshes yield equal files.
pub fn write_snet(mesh: &SurfaceNetMesh, path: impl AsRef<Path>) -> Result<(), MeshError> {
    let path = path.as_ref();
    let mut buf = Vec::with_capacity(64 + mesh.points.len() * 24);
    buf.extend_from_slice(SNET_MAGIC);
    buf.extend_from_slice(&SNET_VERSION.to_le_bytes());
    buf.extend_from_slice(&(mesh.points.len() as u64).to_le_bytes());
    buf.extend_from_slice(&(mesh.quads.len() as u64).to_le_bytes());
    buf.extend_from_slice(&(mesh.stencil_neighbors.len() as u64).to_le_bytes());
    for s in [mesh.spacing.0, mesh.spacing.1, mesh.spacing.2] {
        buf.extend_from_slice(&s.to_le_bytes());
    }
    for p in mesh.anchors.iter().chain(&mesh.points) {
        for c in p {
            buf.extend_from_slice(&c.to_le_bytes());
        }
    }
    for q in &mesh.quads {
        for id in q {
            buf.extend_from_slice(&id.to_le_bytes());
        }
    }
    for t in &mesh.tuples {
        for l in t {
            buf.extend_from_slice(&l.to_le_bytes());
        }
    }
    for &o in &mesh.stencil_offsets {
        buf.extend_from_slice(&o.to_le_bytes());
    }
    for &n in &mesh.stencil_neighbors {
        buf.extend_from_slice(&n.to_le_bytes());
    }
    fs::write(path, buf).map_err(io_err(path))
}

struct Reader<'a> {
    path: &'a Path,
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], MeshError> {
        if self.data.len() - self.pos < n {
            return Err(MeshError::Truncated {
                path: self.path.to_path_buf(),
                want: (n - (self.data.len() - self.pos)) as u64,
            });
        }
        let out = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32, MeshError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, MeshError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f32(&mut self) -> Result<f32, MeshError> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, MeshError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn vec3s(&mut self, n: u64) -> Result<Vec<[f32; 3]>, MeshError> {
        (0..n)
            .map(|_| Ok([self.f32()?, self.f32()?, self.f32()?]))
            .collect()
    }
}

/// Read a cache written by [`write_snet`]. Round-trips bit-exactly.
pub fn read_snet(path: impl AsRef<Path>) -> Result<SurfaceNetMesh, MeshError> {
    let path = path.as_ref();
    let data = fs::read(path).map_err(io_err(path))?;
    let mut r = Reader {
        path,
        data: &data,
        pos: 0,
    };

    if r.take(4)? != SNET_MAGIC {
        return Err(MeshError::BadMagic {
            path: path.to_path_buf(),
        });
    }
    let version = r.u32()?;
    if version != SNET_VERSION {
        return Err(MeshError::BadVersion {
            path: path.to_path_buf(),
            got: version,
            want: SNET_VERSION,
        });
    }
    let num_points = r.u64()?;
    let num_quads = r.u64()?;
    let num_neighbors = r.u64()?;
    let spacing = (r.f64()?, r.f64()?, r.f64()?);

    let anchors = r.vec3s(num_points)?;
    let points = r.vec3s(num_points)?;
    let quads = (0..num_quads)
        .map(|_| Ok([r.u32()?, r.u32()?, r.u32()?, r.u32()?]))
        .collect::<Result<Vec<_>, MeshError>>()?;
    let tuples = (0..num_quads)
        .map(|_| Ok([r.u32()?, r.u32()?]))
        .collect::<Result<Vec<_>, MeshError>>()?;
    let stencil_offsets = (0..num_points + 1)
        .map(|_| r.u64())
        .collect::<Result<Vec<_>, MeshError>>()?;
    let stencil_neighbors = (0..num_neighbors)
        .map(|_| r.u32())
        .collect::<Result<Vec<_>, MeshError>>()?;

    let mesh = SurfaceNetMesh {
        points,
        anchors,
        spacing,
        quads,
        tuples,
        stencil_offsets,
        stencil_neighbors,
    };
    mesh.validate()?;
    Ok(mesh)
}

/// Plain OBJ: `v` and 1-based `f` lines. OBJ has no face attributes, so the
/// adjacency tuples are dropped; PLY is the full-fidelity export.
pub fn write_obj(tri: &TriangleMesh, path: impl AsRef<Path>) -> Result<(), MeshError> {
    let path = path.as_ref();
    let mut out = String::new();
    for p in &tri.points {
        out.push_str(&format!("v {} {} {}\n", p[0], p[1], p[2]));
    }
    for t in &tri.triangles {
        out.push_str(&format!("f {} {} {}\n", t[0] + 1, t[1] + 1, t[2] + 1));
    }
    fs::write(path, out).map_err(io_err(path))
}

/// Binary little-endian PLY with two per-face `uint` label properties
/// carrying the region adjacency tuple.
pub fn write_ply(tri: &TriangleMesh, path: impl AsRef<Path>) -> Result<(), MeshError> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    write!(
        buf,
        "ply\nformat binary_little_endian 1.0\n\
         element vertex {}\nproperty float x\nproperty float y\nproperty float z\n\
         element face {}\nproperty list uchar uint vertex_indices\n\
         property uint label0\nproperty uint label1\nend_header\n",
        tri.points.len(),
        tri.triangles.len()
    )
    .expect("in-memory write");
    for p in &tri.points {
        for c in p {
            buf.extend_from_slice(&c.to_le_bytes());
        }
    }
    for (t, labels) in tri.triangles.iter().zip(&tri.tuples) {
        buf.push(3);
        for id in t {
            buf.extend_from_slice(&id.to_le_bytes());
        }
        for l in labels {
            buf.extend_from_slice(&l.to_le_bytes());
        }
    }
    fs::write(path, buf).map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::super::tests::sample_mesh;
    use super::*;

    #[test]
    fn snet_roundtrip_is_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.snet");
        let mesh = sample_mesh();
        write_snet(&mesh, &path).unwrap();
        assert_eq!(read_snet(&path).unwrap(), mesh);

        let empty = SurfaceNetMesh::empty((0.5, 1.0, 2.0));
        write_snet(&empty, &path).unwrap();
        assert_eq!(read_snet(&path).unwrap(), empty);
    }

    #[test]
    fn snet_rejects_bad_magic_version_truncation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.snet");
        let mesh = sample_mesh();
        write_snet(&mesh, &path).unwrap();
        let good = fs::read(&path).unwrap();

        fs::write(&path, b"NOPE").unwrap();
        assert!(matches!(read_snet(&path), Err(MeshError::BadMagic { .. })));

        let mut wrong_ver = good.clone();
        wrong_ver[4..8].copy_from_slice(&9u32.to_le_bytes());
        fs::write(&path, &wrong_ver).unwrap();
        assert!(matches!(read_snet(&path), Err(MeshError::BadVersion { got: 9, .. })));

        fs::write(&path, &good[..good.len() - 3]).unwrap();
        assert!(matches!(read_snet(&path), Err(MeshError::Truncated { .. })));
    }

    #[test]
    fn obj_shape_one_triangle() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.obj");
        let tri = TriangleMesh {
            points: vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            triangles: vec![[0, 1, 2]],
            tuples: vec![[1, 2]],
        };
        write_obj(&tri, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let v_lines: Vec<_> = text.lines().filter(|l| l.starts_with("v ")).collect();
        let f_lines: Vec<_> = text.lines().filter(|l| l.starts_with("f ")).collect();
        assert_eq!(v_lines.len(), 3);
        assert_eq!(f_lines, vec!["f 1 2 3"]);
    }

    #[test]
    fn ply_header_matches_payload() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.ply");
        let tri = TriangleMesh {
            points: vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            triangles: vec![[0, 1, 2]],
            tuples: vec![[1, u32::MAX]],
        };
        write_ply(&tri, &path).unwrap();
        let bytes = fs::read(&path).unwrap();
        let header_end = bytes
            .windows(11)
            .position(|w| w == b"end_header\n")
            .unwrap()
            + 11;
        let header = std::str::from_utf8(&bytes[..header_end]).unwrap();
        assert!(header.contains("element vertex 3"));
        assert!(header.contains("element face 1"));
        // 3 vertices * 12 bytes + 1 face * (1 + 12 + 8)
        assert_eq!(bytes.len() - header_end, 36 + 21);
    }
}
