//! Quad-to-triangle tessellation with selectable diagonal strategies.
//!
//! Quad (a,b,c,d) splits along one diagonal: a-c yields triangles (a,b,c)
//! and (a,c,d); b-d yields (a,b,d) and (b,c,d). Either way both triangles
//! keep the quad's winding and land at output slots 2q and 2q+1, so output
//! is deterministic across strategies and thread counts. Strategy metrics
//! use f64; ties pick the a-c diagonal.
//!
//! Metric definitions (the names alone leave room for interpretation):
//! - `ShortestDiagonal`: smaller squared diagonal length.
//! - `MinArea`: smaller sum of the two triangle areas (half cross-product
//!   norms).
//! - `MostCoplanar`: smaller dihedral deviation `1 − n̂₁·n̂₂` between the two
//!   triangle normals; a diagonal producing a degenerate (zero-normal)
//!   triangle is treated as maximally non-coplanar.

use std::str::FromStr;

use crate::exec::{split_windows, Exec};
use crate::mesh::{SurfaceNetMesh, TriangleMesh};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TriangulationStrategy {
    /// Always the a-c diagonal.
    Fixed,
    #[default]
    ShortestDiagonal,
    MinArea,
    MostCoplanar,
}

impl FromStr for TriangulationStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fixed" => Ok(TriangulationStrategy::Fixed),
            "shortest_diagonal" => Ok(TriangulationStrategy::ShortestDiagonal),
            "min_area" => Ok(TriangulationStrategy::MinArea),
            "most_coplanar" => Ok(TriangulationStrategy::MostCoplanar),
            _ => Err(format!(
                "unknown strategy `{s}` (fixed|shortest_diagonal|min_area|most_coplanar)"
            )),
        }
    }
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

fn tri_area(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    0.5 * norm(cross(sub(b, a), sub(c, a)))
}

/// Dihedral deviation of the split along (p,q) vs the off-diagonal pair
/// (r,s), i.e. triangles (p,q,r)-style normals across the shared diagonal.
fn deviation(n1: [f64; 3], n2: [f64; 3]) -> f64 {
    let (l1, l2) = (norm(n1), norm(n2));
    if l1 == 0.0 || l2 == 0.0 {
        return f64::INFINITY;
    }
    1.0 - dot(n1, n2) / (l1 * l2)
}

/// True picks the b-d diagonal; ties (including fully degenerate quads)
/// stay on a-c.
fn pick_bd(q: [[f64; 3]; 4], strategy: TriangulationStrategy) -> bool {
    let [a, b, c, d] = q;
    match strategy {
        TriangulationStrategy::Fixed => false,
        TriangulationStrategy::ShortestDiagonal => {
            let ac = sub(c, a);
            let bd = sub(d, b);
            dot(bd, bd) < dot(ac, ac)
        }
        TriangulationStrategy::MinArea => {
            let ac = tri_area(a, b, c) + tri_area(a, c, d);
            let bd = tri_area(a, b, d) + tri_area(b, c, d);
            bd < ac
        }
        TriangulationStrategy::MostCoplanar => {
            let ac = deviation(
                cross(sub(b, a), sub(c, a)),
                cross(sub(c, a), sub(d, a)),
            );
            let bd = deviation(
                cross(sub(b, a), sub(d, a)),
                cross(sub(c, b), sub(d, b)),
            );
            bd < ac
        }
    }
}

/// Quads per task; chunking cannot affect results, only load balance.
const CHUNK: usize = 4096;

/// Splits every quad into two triangles; quad q's adjacency tuple is copied
/// to both of its triangles.
pub fn triangulate(
    mesh: &SurfaceNetMesh,
    strategy: TriangulationStrategy,
    threads: usize,
) -> TriangleMesh {
    let exec = Exec::new(threads);
    let nq = mesh.num_quads();
    let mut triangles = vec![[0u32; 3]; nq * 2];
    let mut tuples = vec![[0u32; 2]; nq * 2];

    struct Task<'a> {
        q_start: usize,
        tris: &'a mut [[u32; 3]],
        tups: &'a mut [[u32; 2]],
    }
    let starts: Vec<usize> = (0..nq).step_by(CHUNK).collect();
    let tri_w = split_windows(
        &mut triangles,
        starts.iter().map(|&s| (2 * s, 2 * (nq - s).min(CHUNK))),
    );
    let tup_w = split_windows(
        &mut tuples,
        starts.iter().map(|&s| (2 * s, 2 * (nq - s).min(CHUNK))),
    );
    let mut tasks: Vec<Task> = starts
        .iter()
        .zip(tri_w)
        .zip(tup_w)
        .map(|((&q_start, tris), tups)| Task { q_start, tris, tups })
        .collect();

    exec.for_each(&mut tasks, |t| {
        for off in 0..t.tris.len() / 2 {
            let q = t.q_start + off;
            let [ia, ib, ic, id] = mesh.quads[q];
            let p = |i: u32| {
                let p = mesh.points[i as usize];
                [p[0] as f64, p[1] as f64, p[2] as f64]
            };
            let bd = pick_bd([p(ia), p(ib), p(ic), p(id)], strategy);
            let (t0, t1) = if bd {
                ([ia, ib, id], [ib, ic, id])
            } else {
                ([ia, ib, ic], [ia, ic, id])
            };
            t.tris[2 * off] = t0;
            t.tris[2 * off + 1] = t1;
            t.tups[2 * off] = mesh.tuples[q];
            t.tups[2 * off + 1] = mesh.tuples[q];
        }
    });

    TriangleMesh {
        points: mesh.points.clone(),
        triangles,
        tuples,
    }
}
