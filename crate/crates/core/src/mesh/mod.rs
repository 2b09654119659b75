//! Extracted-mesh data model, canonical comparison, and region filtering.
//!
//! A surface net is non-manifold by design: adjacent regions share boundary
//! quads, and up to eight regions can meet in one voxel. Each quad carries a
//! region adjacency two-tuple naming the classified labels on either side.

mod files;

pub use files::{read_snet, write_obj, write_ply, write_snet};

use crate::labels::ClassifiedLabel;

#[derive(Debug, thiserror::Error)]
pub enum MeshError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: not a surface-net cache (bad magic)")]
    BadMagic { path: std::path::PathBuf },
    #[error("{path}: unsupported cache version {got} (expected {want})")]
    BadVersion {
        path: std::path::PathBuf,
        got: u32,
        want: u32,
    },
    #[error("{path}: truncated (needed {want} more bytes)")]
    Truncated {
        path: std::path::PathBuf,
        want: u64,
    },
    #[error("invalid mesh: {0}")]
    Invalid(String),
}

/// Dual-contour surface net: one point per emitting voxel, one quad per
/// interior intersected edge, per-point smoothing stencils, and per-point
/// constraint anchors (the generating voxel centers).
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceNetMesh {
    /// Current point positions; before smoothing these equal `anchors`.
    pub points: Vec<[f32; 3]>,
    /// Constraint centers, fixed at extraction time.
    pub anchors: Vec<[f32; 3]>,
    /// Volume spacing, carried for constraint-region sizing.
    pub spacing: (f64, f64, f64),
    /// Point-id quadruples, counterclockwise from the +axis of the source edge.
    pub quads: Vec<[u32; 4]>,
    /// Per-quad (origin-side label, far-side label); the quad normal points
    /// from the first region into the second.
    pub tuples: Vec<[ClassifiedLabel; 2]>,
    /// Stencil CSR offsets, length `points.len() + 1`.
    pub stencil_offsets: Vec<u64>,
    /// Face-neighbor point ids, ascending within each point's list.
    pub stencil_neighbors: Vec<u32>,
}

impl SurfaceNetMesh {
    pub fn empty(spacing: (f64, f64, f64)) -> SurfaceNetMesh {
        SurfaceNetMesh {
            points: Vec::new(),
            anchors: Vec::new(),
            spacing,
            quads: Vec::new(),
            tuples: Vec::new(),
            stencil_offsets: vec![0],
            stencil_neighbors: Vec::new(),
        }
    }

    pub fn num_points(&self) -> usize {
        self.points.len()
    }

    pub fn num_quads(&self) -> usize {
        self.quads.len()
    }

    /// Neighbor ids of point `p`.
    pub fn stencil(&self, p: usize) -> &[u32] {
        let lo = self.stencil_offsets[p] as usize;
        let hi = self.stencil_offsets[p + 1] as usize;
        &self.stencil_neighbors[lo..hi]
    }

    /// Structural soundness: index ranges, array length couplings, stencil
    /// symmetry, and the ≤ 6 face-neighbor degree bound.
    pub fn validate(&self) -> Result<(), MeshError> {
        let n = self.points.len();
        let fail = |msg: String| Err(MeshError::Invalid(msg));
        if self.anchors.len() != n {
            return fail(format!("{} anchors for {n} points", self.anchors.len()));
        }
        if self.tuples.len() != self.quads.len() {
            return fail(format!(
                "{} tuples for {} quads",
                self.tuples.len(),
                self.quads.len()
            ));
        }
        if self.stencil_offsets.len() != n + 1 || self.stencil_offsets[0] != 0 {
            return fail("stencil offsets must have length points+1 starting at 0".into());
        }
        if *self.stencil_offsets.last().unwrap() != self.stencil_neighbors.len() as u64 {
            return fail("stencil offsets do not cover the neighbor array".into());
        }
        for q in &self.quads {
            if q.iter().any(|&id| id as usize >= n) {
                return fail(format!("quad {q:?} references a missing point"));
            }
        }
        for p in 0..n {
            if self.stencil_offsets[p] > self.stencil_offsets[p + 1] {
                return fail("stencil offsets decrease".into());
            }
            let nb = self.stencil(p);
            if nb.len() > 6 {
                return fail(format!("point {p} has stencil degree {}", nb.len()));
            }
            for &q in nb {
                if q as usize >= n {
                    return fail(format!("stencil of point {p} references missing {q}"));
                }
                if !self.stencil(q as usize).contains(&(p as u32)) {
                    return fail(format!("stencil entry {p}->{q} lacks its reverse"));
                }
            }
        }
        Ok(())
    }
}

/// Triangulated surface: two triangles per source quad, tuples inherited.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    pub points: Vec<[f32; 3]>,
    pub triangles: Vec<[u32; 3]>,
    pub tuples: Vec<[ClassifiedLabel; 2]>,
}

/// Ids of quads whose adjacency tuple contains `label`. Quads between two
/// touching regions appear in both regions' subsets.
pub fn region_submesh(mesh: &SurfaceNetMesh, label: ClassifiedLabel) -> Vec<u32> {
    mesh.tuples
        .iter()
        .enumerate()
        .filter(|(_, t)| t[0] == label || t[1] == label)
        .map(|(q, _)| q as u32)
        .collect()
}

fn anchor_key(a: &[f32; 3]) -> [f32; 3] {
    [a[2], a[1], a[0]]
}

/// Order-free byte form: points renumbered by anchor lattice position, quads
/// rotated minimum-id-first (reflection preserved) and sorted, stencils
/// remapped and re-sorted. Meshes equal up to reordering yield equal bytes;
/// spacing is excluded, so every empty mesh yields one fixed constant.
pub fn canonicalize(mesh: &SurfaceNetMesh) -> Vec<u8> {
    let n = mesh.points.len();
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_unstable_by(|&a, &b| {
        let (ka, kb) = (anchor_key(&mesh.anchors[a as usize]), anchor_key(&mesh.anchors[b as usize]));
        ka.iter()
            .zip(&kb)
            .map(|(x, y)| x.total_cmp(y))
            .find(|c| c.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut rank = vec![0u32; n];
    for (new, &old) in order.iter().enumerate() {
        rank[old as usize] = new as u32;
    }

    let points: Vec<[f32; 3]> = order.iter().map(|&o| mesh.points[o as usize]).collect();
    let anchors: Vec<[f32; 3]> = order.iter().map(|&o| mesh.anchors[o as usize]).collect();

    let mut quads: Vec<([u32; 4], [u32; 2])> = mesh
        .quads
        .iter()
        .zip(&mesh.tuples)
        .map(|(q, t)| {
            let mut q = q.map(|id| rank[id as usize]);
            let min_at = (0..4).min_by_key(|&i| q[i]).unwrap();
            q.rotate_left(min_at);
            (q, *t)
        })
        .collect();
    quads.sort_unstable();

    let mut stencil: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (old, slot) in order.iter().enumerate().map(|(new, &old)| (old, new)) {
        let mut nb: Vec<u32> = mesh
            .stencil(old as usize)
            .iter()
            .map(|&id| rank[id as usize])
            .collect();
        nb.sort_unstable();
        stencil[slot] = nb;
    }

    let mut out = Vec::new();
    out.extend_from_slice(b"SNC1");
    let push_u64 = |out: &mut Vec<u8>, v: u64| out.extend_from_slice(&v.to_le_bytes());
    push_u64(&mut out, n as u64);
    push_u64(&mut out, quads.len() as u64);
    push_u64(&mut out, stencil.iter().map(|s| s.len() as u64).sum());
    for p in points.iter().chain(&anchors) {
        for c in p {
            out.extend_from_slice(&c.to_le_bytes());
        }
    }
    for (q, t) in &quads {
        for id in q {
            out.extend_from_slice(&id.to_le_bytes());
        }
        for l in t {
            out.extend_from_slice(&l.to_le_bytes());
        }
    }
    for nb in &stencil {
        push_u64(&mut out, nb.len() as u64);
        for &id in nb {
            out.extend_from_slice(&id.to_le_bytes());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labels::BACKGROUND;

    /// Two quads sharing an edge, with symmetric 2-neighbor stencils.
    pub(crate) fn sample_mesh() -> SurfaceNetMesh {
        let pts = vec![
            [0.5, 0.5, 0.5],
            [1.5, 0.5, 0.5],
            [1.5, 1.5, 0.5],
            [0.5, 1.5, 0.5],
            [0.5, 0.5, 1.5],
            [1.5, 0.5, 1.5],
        ];
        SurfaceNetMesh {
            points: pts.clone(),
            anchors: pts,
            spacing: (1.0, 1.0, 1.0),
            quads: vec![[0, 1, 2, 3], [0, 1, 5, 4]],
            tuples: vec![[1, BACKGROUND], [1, 2]],
            stencil_offsets: vec![0, 1, 2, 3, 4, 5, 6],
            stencil_neighbors: vec![1, 0, 3, 2, 5, 4],
        }
    }

    fn permuted(mesh: &SurfaceNetMesh, perm: &[u32]) -> SurfaceNetMesh {
        // perm[old] = new id
        let n = mesh.points.len();
        let mut inv = vec![0usize; n];
        for (old, &new) in perm.iter().enumerate() {
            inv[new as usize] = old;
        }
        let mut stencil_offsets = vec![0u64];
        let mut stencil_neighbors = Vec::new();
        for &old in &inv {
            for &nb in mesh.stencil(old) {
                stencil_neighbors.push(perm[nb as usize]);
            }
            stencil_offsets.push(stencil_neighbors.len() as u64);
        }
        SurfaceNetMesh {
            points: inv.iter().map(|&o| mesh.points[o]).collect(),
            anchors: inv.iter().map(|&o| mesh.anchors[o]).collect(),
            spacing: mesh.spacing,
            quads: mesh.quads.iter().map(|q| q.map(|id| perm[id as usize])).collect(),
            tuples: mesh.tuples.clone(),
            stencil_offsets,
            stencil_neighbors,
        }
    }

    #[test]
    fn validate_accepts_sample() {
        sample_mesh().validate().unwrap();
        SurfaceNetMesh::empty((1.0, 1.0, 1.0)).validate().unwrap();
    }

    #[test]
    fn validate_rejects_broken_meshes() {
        let mut m = sample_mesh();
        m.quads[0][2] = 99;
        assert!(m.validate().is_err());

        let mut m = sample_mesh();
        m.stencil_neighbors[0] = 2; // 0 -> 2 without 2 -> 0
        assert!(m.validate().is_err());
    }

    #[test]
    fn canonical_bytes_permutation_invariant() {
        let mesh = sample_mesh();
        let shuffled = permuted(&mesh, &[3, 0, 5, 1, 4, 2]);
        shuffled.validate().unwrap();
        assert_ne!(mesh.points, shuffled.points);
        assert_eq!(canonicalize(&mesh), canonicalize(&shuffled));
    }

    #[test]
    fn canonical_bytes_distinguish_content() {
        let mesh = sample_mesh();
        let mut other = mesh.clone();
        other.tuples[0] = [2, BACKGROUND];
        assert_ne!(canonicalize(&mesh), canonicalize(&other));
    }

    #[test]
    fn empty_meshes_share_one_constant() {
        let a = canonicalize(&SurfaceNetMesh::empty((1.0, 1.0, 1.0)));
        let b = canonicalize(&SurfaceNetMesh::empty((0.5, 2.0, 3.0)));
        assert_eq!(a, b);
        assert_eq!(&a[..4], b"SNC1");
    }

    #[test]
    fn region_submesh_filters_by_tuple() {
        let mesh = sample_mesh();
        assert_eq!(region_submesh(&mesh, 1), vec![0, 1]);
        assert_eq!(region_submesh(&mesh, 2), vec![1]);
        assert_eq!(region_submesh(&mesh, BACKGROUND), vec![0]);
        assert!(region_submesh(&mesh, 42).is_empty());
    }
}
