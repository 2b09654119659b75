//! Brute-force reference implementations used as ground truth in
//! equivalence tests.
//!
//! The extractor is deliberately naive: a single-threaded per-voxel sweep
//! that classifies corners on demand, tests all twelve edges, and assigns
//! point ids through an associative map. No triads, no trims, no passes, no
//! cursors. Winding, tuple, interiority, and stencil-order conventions are
//! imported from the shared case tables, so a divergence from the fast path
//! isolates a traversal or bookkeeping bug rather than a convention
//! mismatch. The smoother is a direct transcription of the relaxation
//! formula with one fresh buffer per iteration.

use std::collections::HashMap;

use crate::extract::cases::{
    corner_offset, face_case, quad_interior, quad_voxels, Axis, EDGE_CORNERS, STENCIL_FACE_ORDER,
};
use crate::labels::{edge_intersects, SelectedLabelSet};
use crate::mesh::SurfaceNetMesh;
use crate::smooth::{constrain, Constraint, SmoothingParams};
use crate::volume::LabeledVolume;

/// Single-threaded reference extraction; output ordering matches the fast
/// path (voxel scan order, x fastest).
pub fn oracle_extract(vol: &LabeledVolume, set: &SelectedLabelSet) -> SurfaceNetMesh {
    let (m, n, o) = vol.dims();
    let vd = (m - 1, n - 1, o - 1);
    let classify = |i: u32, j: u32, k: u32| set.classify(vol.label_at(i, j, k));
    let edge_case_of = |i: u32, j: u32, k: u32| -> u16 {
        let mut ec = 0u16;
        for (e, &(a, b)) in EDGE_CORNERS.iter().enumerate() {
            let (ax, ay, az) = corner_offset(a);
            let (bx, by, bz) = corner_offset(b);
            let ca = classify(i + ax, j + ay, k + az);
            let cb = classify(i + bx, j + by, k + bz);
            if edge_intersects(ca, cb) {
                ec |= 1 << e;
            }
        }
        ec
    };

    let mut ids: HashMap<(u32, u32, u32), u32> = HashMap::new();
    let mut points = Vec::new();
    for k in 0..o - 1 {
        for j in 0..n - 1 {
            for i in 0..m - 1 {
                if edge_case_of(i, j, k) != 0 {
                    ids.insert((i, j, k), points.len() as u32);
                    points.push(vol.voxel_center(i, j, k));
                }
            }
        }
    }

    let mut quads = Vec::new();
    let mut tuples = Vec::new();
    let mut stencil_offsets = vec![0u64];
    let mut stencil_neighbors: Vec<u32> = Vec::new();
    for k in 0..o - 1 {
        for j in 0..n - 1 {
            for i in 0..m - 1 {
                let ec = edge_case_of(i, j, k);
                if ec == 0 {
                    continue;
                }
                // Owned edges: the voxel's own +x/+y/+z edges (bits 0, 4, 8).
                let owned = [
                    (0x001u16, Axis::X, (i + 1, j, k)),
                    (0x010u16, Axis::Y, (i, j + 1, k)),
                    (0x100u16, Axis::Z, (i, j, k + 1)),
                ];
                for (bit, axis, far) in owned {
                    if ec & bit != 0 && quad_interior(axis, i, j, k, vd) {
                        quads.push(quad_voxels(axis, i, j, k).map(|v| ids[&v]));
                        tuples.push([classify(i, j, k), classify(far.0, far.1, far.2)]);
                    }
                }
                let fc = face_case(ec);
                for &(f, di, dj, dk) in &STENCIL_FACE_ORDER {
                    if fc & (1 << f) == 0 {
                        continue;
                    }
                    let nx = i as i64 + di as i64;
                    let ny = j as i64 + dj as i64;
                    let nz = k as i64 + dk as i64;
                    if nx >= 0
                        && nx < vd.0 as i64
                        && ny >= 0
                        && ny < vd.1 as i64
                        && nz >= 0
                        && nz < vd.2 as i64
                    {
                        stencil_neighbors.push(ids[&(nx as u32, ny as u32, nz as u32)]);
                    }
                }
                stencil_offsets.push(stencil_neighbors.len() as u64);
            }
        }
    }

    SurfaceNetMesh {
        anchors: points.clone(),
        points,
        spacing: vol.spacing(),
        quads,
        tuples,
        stencil_offsets,
        stencil_neighbors,
    }
}

/// Direct single-threaded smoothing; must match the parallel smoother
/// bit-exactly (same summation order and per-point arithmetic).
pub fn smooth_reference(mesh: &SurfaceNetMesh, params: &SmoothingParams) -> Vec<[f32; 3]> {
    let constraint = Constraint::resolve(params, mesh.spacing);
    let mut cur = mesh.points.clone();
    for _ in 0..params.iterations {
        let mut next = Vec::with_capacity(cur.len());
        for (i, &p) in cur.iter().enumerate() {
            let nbs = mesh.stencil(i);
            if nbs.is_empty() {
                next.push(p);
                continue;
            }
            let mut sum = [0.0f32; 3];
            for &nb in nbs {
                let q = cur[nb as usize];
                sum[0] += q[0] - p[0];
                sum[1] += q[1] - p[1];
                sum[2] += q[2] - p[2];
            }
            let nf = nbs.len() as f32;
            let candidate = [
                p[0] + params.lambda * (sum[0] / nf),
                p[1] + params.lambda * (sum[1] / nf),
                p[2] + params.lambda * (sum[2] / nf),
            ];
            next.push(constrain(candidate, mesh.anchors[i], constraint));
        }
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labels::build_label_set;
    use crate::volume::Scalars;

    fn center_volume() -> LabeledVolume {
        let mut data = vec![0u32; 27];
        data[13] = 1;
        LabeledVolume::new((3, 3, 3), (1.0, 1.0, 1.0), (0.0, 0.0, 0.0), Scalars::U32(data))
            .unwrap()
    }

    #[test]
    fn center_point_dual_cube() {
        let vol = center_volume();
        let set = build_label_set(&[1]).unwrap();
        let mesh = oracle_extract(&vol, &set);
        mesh.validate().unwrap();
        assert_eq!(mesh.num_points(), 8);
        assert_eq!(mesh.num_quads(), 6);
        assert_eq!(mesh.stencil_neighbors.len(), 24);
        let centers: Vec<[f32; 3]> = (0..2)
            .flat_map(|k| (0..2).flat_map(move |j| (0..2).map(move |i| (i, j, k))))
            .map(|(i, j, k)| [i as f32 + 0.5, j as f32 + 0.5, k as f32 + 0.5])
            .collect();
        assert_eq!(mesh.points, centers);
    }

    #[test]
    fn all_background_is_empty() {
        let vol = LabeledVolume::new(
            (4, 4, 4),
            (1.0, 1.0, 1.0),
            (0.0, 0.0, 0.0),
            Scalars::U8(vec![0; 64]),
        )
        .unwrap();
        let set = build_label_set(&[9]).unwrap();
        let mesh = oracle_extract(&vol, &set);
        assert_eq!(mesh.num_points(), 0);
        assert_eq!(mesh.num_quads(), 0);
        assert_eq!(mesh.stencil_offsets, vec![0]);
    }

    #[test]
    fn reference_smoother_matches_module_smoother() {
        let vol = center_volume();
        let set = build_label_set(&[1]).unwrap();
        let mesh = oracle_extract(&vol, &set);
        let params = SmoothingParams::default();
        let reference = smooth_reference(&mesh, &params);
        let fast = crate::smooth::smooth(mesh, &params, 4);
        assert_eq!(fast.points, reference);
    }
}
