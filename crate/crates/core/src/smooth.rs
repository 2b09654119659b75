//! Constrained Laplacian smoothing with deterministic double buffering.
//!
//! Each iteration is a Jacobi step: every point moves toward the mean of its
//! stencil neighbors, scaled by `lambda`, then is clamped to a constraint
//! region around its anchor (the voxel center that generated it). Updates
//! read only the previous buffer and neighbor sums run in stencil storage
//! order (ascending point id), so the result is bit-identical for every
//! thread count.

use std::str::FromStr;

use crate::exec::{split_windows, Exec};
use crate::mesh::SurfaceNetMesh;

/// Shape of the per-point containment region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConstraintMode {
    /// Sphere of radius `factor * 0.5 * min(spacing)`, inscribed in the
    /// voxel at factor 1.0 regardless of anisotropy.
    #[default]
    Sphere,
    /// Axis-aligned box of half-extent `factor * 0.5 * spacing[axis]`.
    Box,
}

impl FromStr for ConstraintMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sphere" => Ok(ConstraintMode::Sphere),
            "box" => Ok(ConstraintMode::Box),
            _ => Err(format!("unknown constraint mode `{s}` (sphere|box)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingParams {
    pub iterations: u32,
    /// Relaxation factor in [0, 1].
    pub lambda: f32,
    pub constraint_mode: ConstraintMode,
    pub constraint_factor: f32,
}

impl Default for SmoothingParams {
    fn default() -> Self {
        SmoothingParams {
            iterations: 25,
            lambda: 0.5,
            constraint_mode: ConstraintMode::Sphere,
            constraint_factor: 1.0,
        }
    }
}

/// Containment region resolved against a concrete voxel spacing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Constraint {
    Sphere(f32),
    Box([f32; 3]),
}

impl Constraint {
    pub fn resolve(params: &SmoothingParams, spacing: (f64, f64, f64)) -> Constraint {
        let f = params.constraint_factor as f64 * 0.5;
        match params.constraint_mode {
            ConstraintMode::Sphere => {
                let s = spacing.0.min(spacing.1).min(spacing.2);
                Constraint::Sphere((f * s) as f32)
            }
            ConstraintMode::Box => Constraint::Box([
                (f * spacing.0) as f32,
                (f * spacing.1) as f32,
                (f * spacing.2) as f32,
            ]),
        }
    }
}

/// Clamps `candidate` to the constraint region around `anchor`: radial
/// projection onto the sphere surface, or a per-axis clamp for the box.
pub fn constrain(candidate: [f32; 3], anchor: [f32; 3], constraint: Constraint) -> [f32; 3] {
    match constraint {
        Constraint::Sphere(r) => {
            // Projection runs in f64 with one rounding per component so the
            // recomputed f32 distance stays within a few ulps of r.
            let d = [
                candidate[0] as f64 - anchor[0] as f64,
                candidate[1] as f64 - anchor[1] as f64,
                candidate[2] as f64 - anchor[2] as f64,
            ];
            let norm = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            if norm > r as f64 {
                let k = r as f64 / norm;
                [
                    (anchor[0] as f64 + d[0] * k) as f32,
                    (anchor[1] as f64 + d[1] * k) as f32,
                    (anchor[2] as f64 + d[2] * k) as f32,
                ]
            } else {
                candidate
            }
        }
        Constraint::Box(h) => [
            candidate[0].clamp(anchor[0] - h[0], anchor[0] + h[0]),
            candidate[1].clamp(anchor[1] - h[1], anchor[1] + h[1]),
            candidate[2].clamp(anchor[2] - h[2], anchor[2] + h[2]),
        ],
    }
}

/// Jacobi update of point `i`: isolated points pass through untouched.
#[inline]
fn update_point(
    mesh: &SurfaceNetMesh,
    src: &[[f32; 3]],
    i: usize,
    lambda: f32,
    constraint: Constraint,
) -> [f32; 3] {
    let nbs = mesh.stencil(i);
    if nbs.is_empty() {
        return src[i];
    }
    let p = src[i];
    let mut sum = [0.0f32; 3];
    for &nb in nbs {
        let q = src[nb as usize];
        sum[0] += q[0] - p[0];
        sum[1] += q[1] - p[1];
        sum[2] += q[2] - p[2];
    }
    let n = nbs.len() as f32;
    let candidate = [
        p[0] + lambda * (sum[0] / n),
        p[1] + lambda * (sum[1] / n),
        p[2] + lambda * (sum[2] / n),
    ];
    constrain(candidate, mesh.anchors[i], constraint)
}

/// Points per task; chunking cannot affect results, only load balance.
const CHUNK: usize = 4096;

fn step_into(
    exec: &Exec,
    mesh: &SurfaceNetMesh,
    src: &[[f32; 3]],
    lambda: f32,
    constraint: Constraint,
    dst: &mut [[f32; 3]],
) {
    struct Task<'a> {
        start: usize,
        dst: &'a mut [[f32; 3]],
    }
    let len = dst.len();
    let starts: Vec<usize> = (0..len).step_by(CHUNK).collect();
    let windows = split_windows(
        dst,
        starts.iter().map(|&s| (s, CHUNK.min(len - s))),
    );
    let mut tasks: Vec<Task> = starts
        .into_iter()
        .zip(windows)
        .map(|(start, dst)| Task { start, dst })
        .collect();
    exec.for_each(&mut tasks, |t| {
        for (off, out) in t.dst.iter_mut().enumerate() {
            *out = update_point(mesh, src, t.start + off, lambda, constraint);
        }
    });
}

/// One smoothing iteration over `src`; exposed for reference comparisons.
pub fn smooth_step(
    mesh: &SurfaceNetMesh,
    src: &[[f32; 3]],
    params: &SmoothingParams,
) -> Vec<[f32; 3]> {
    assert_eq!(src.len(), mesh.num_points());
    let constraint = Constraint::resolve(params, mesh.spacing);
    let mut dst = vec![[0.0f32; 3]; src.len()];
    step_into(&Exec::sequential(), mesh, src, params.lambda, constraint, &mut dst);
    dst
}

/// Runs `params.iterations` Jacobi steps, swapping two point buffers between
/// iterations. Connectivity, tuples, stencils, and anchors pass through
/// untouched.
pub fn smooth(mut mesh: SurfaceNetMesh, params: &SmoothingParams, threads: usize) -> SurfaceNetMesh {
    let exec = Exec::new(threads);
    let constraint = Constraint::resolve(params, mesh.spacing);
    let mut cur = std::mem::take(&mut mesh.points);
    let mut next = cur.clone();
    for _ in 0..params.iterations {
        step_into(&exec, &mesh, &cur, params.lambda, constraint, &mut next);
        std::mem::swap(&mut cur, &mut next);
    }
    mesh.points = cur;
    mesh
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Open chain of three points on the x axis at 0, 1, 3.
    fn chain_mesh() -> SurfaceNetMesh {
        SurfaceNetMesh {
            points: vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [3.0, 0.0, 0.0]],
            anchors: vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [3.0, 0.0, 0.0]],
            spacing: (1.0, 1.0, 1.0),
            quads: Vec::new(),
            tuples: Vec::new(),
            stencil_offsets: vec![0, 1, 3, 4],
            stencil_neighbors: vec![1, 0, 2, 1],
        }
    }

    #[test]
    fn chain_step_matches_hand_arithmetic() {
        // Unconstrained (huge factor), lambda=1: every point lands on its
        // neighbor mean: 1, (0-1+3-1)/2+1 = 1.5, 1.
        let mesh = chain_mesh();
        let params = SmoothingParams {
            iterations: 1,
            lambda: 1.0,
            constraint_mode: ConstraintMode::Sphere,
            constraint_factor: 100.0,
        };
        let dst = smooth_step(&mesh, &mesh.points, &params);
        assert_eq!(dst, vec![[1.0, 0.0, 0.0], [1.5, 0.0, 0.0], [1.0, 0.0, 0.0]]);
    }

    #[test]
    fn chain_step_clamps_to_inscribed_sphere() {
        // Factor 1.0, unit spacing: r = 0.5. The end points want to move a
        // full unit; radial projection stops them at 0.5.
        let mesh = chain_mesh();
        let params = SmoothingParams {
            iterations: 1,
            lambda: 1.0,
            ..SmoothingParams::default()
        };
        let dst = smooth_step(&mesh, &mesh.points, &params);
        assert_eq!(dst[0], [0.5, 0.0, 0.0]);
        assert_eq!(dst[2], [2.5, 0.0, 0.0]);
    }

    #[test]
    fn box_mode_clamps_per_axis() {
        let anchor = [0.0, 0.0, 0.0];
        let c = Constraint::Box([0.5, 0.25, 0.5]);
        assert_eq!(constrain([0.1, 0.4, -0.2], anchor, c), [0.1, 0.25, -0.2]);
        assert_eq!(constrain([0.1, 0.1, 0.1], anchor, c), [0.1, 0.1, 0.1]);
    }

    #[test]
    fn sphere_projection_is_radial() {
        let c = Constraint::Sphere(0.5);
        let out = constrain([2.0, 1.0, 0.0], [1.0, 1.0, 0.0], c);
        assert_eq!(out, [1.5, 1.0, 0.0]);
    }

    #[test]
    fn lambda_zero_is_bitwise_identity() {
        let mesh = chain_mesh();
        let params = SmoothingParams {
            lambda: 0.0,
            ..SmoothingParams::default()
        };
        let out = smooth(mesh.clone(), &params, 1);
        assert_eq!(out, mesh);
    }

    #[test]
    fn zero_iterations_is_identity() {
        let mesh = chain_mesh();
        let params = SmoothingParams {
            iterations: 0,
            ..SmoothingParams::default()
        };
        assert_eq!(smooth(mesh.clone(), &params, 4), mesh);
    }

    #[test]
    fn symmetric_point_is_fixed() {
        // Neighbors average exactly to the middle point; displacement sums
        // cancel term by term, so the point must not move at all.
        let mesh = chain_mesh();
        let mut sym = mesh;
        sym.points[2] = [2.0, 0.0, 0.0];
        sym.anchors[2] = [2.0, 0.0, 0.0];
        let params = SmoothingParams {
            iterations: 1,
            lambda: 0.75,
            ..SmoothingParams::default()
        };
        let dst = smooth_step(&sym, &sym.points, &params);
        assert_eq!(dst[1], sym.points[1]);
    }

    #[test]
    fn isolated_point_never_moves() {
        let mut mesh = chain_mesh();
        mesh.stencil_offsets = vec![0, 0, 0, 0];
        mesh.stencil_neighbors.clear();
        let out = smooth(mesh.clone(), &SmoothingParams::default(), 2);
        assert_eq!(out.points, mesh.points);
    }

    #[test]
    fn connectivity_between_buffers_untouched() {
        let mesh = chain_mesh();
        let out = smooth(mesh.clone(), &SmoothingParams::default(), 2);
        assert_eq!(out.quads, mesh.quads);
        assert_eq!(out.tuples, mesh.tuples);
        assert_eq!(out.stencil_offsets, mesh.stencil_offsets);
        assert_eq!(out.stencil_neighbors, mesh.stencil_neighbors);
        assert_eq!(out.anchors, mesh.anchors);
    }

    #[test]
    fn constraint_mode_parses() {
        assert_eq!("sphere".parse(), Ok(ConstraintMode::Sphere));
        assert_eq!("box".parse(), Ok(ConstraintMode::Box));
        assert!("cube".parse::<ConstraintMode>().is_err());
    }
}
