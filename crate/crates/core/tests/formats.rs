//! File-format integration: cache roundtrips, PLY checked with an
//! independent parser, OBJ textual shape, volume header/raw roundtrip, and
//! canonical-form invariance under point renumbering.

mod common;

use surfacenets::extract::ExtractOptions;
use surfacenets::mesh::{canonicalize, read_snet, write_obj, write_ply, write_snet};
use surfacenets::volume::{load_volume, save_volume};
use surfacenets::{build_label_set, extract, triangulate, SurfaceNetMesh, TriangulationStrategy};

use common::{random_volume, read_ply};

fn sample_mesh(seed: u64) -> SurfaceNetMesh {
    let (vol, labels) = random_volume(seed);
    let set = build_label_set(&labels).unwrap();
    extract(&vol, &set, &ExtractOptions::default()).unwrap()
}

#[test]
fn snet_cache_roundtrips_exactly() {
    let dir = tempfile::tempdir().unwrap();
    for seed in [3u64, 17, 99] {
        let mesh = sample_mesh(seed);
        let path = dir.path().join(format!("{seed}.snet"));
        write_snet(&mesh, &path).unwrap();
        assert_eq!(read_snet(&path).unwrap(), mesh, "seed {seed}");
    }
}

#[test]
fn ply_agrees_with_independent_parser() {
    let mesh = sample_mesh(7);
    let tri = triangulate(&mesh, TriangulationStrategy::ShortestDiagonal, 2);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.ply");
    write_ply(&tri, &path).unwrap();

    let (points, triangles, tuples) = read_ply(&path);
    assert_eq!(points, tri.points);
    assert_eq!(triangles, tri.triangles);
    assert_eq!(tuples, tri.tuples);
}

#[test]
fn obj_lists_points_then_one_based_faces() {
    let mesh = sample_mesh(7);
    let tri = triangulate(&mesh, TriangulationStrategy::ShortestDiagonal, 1);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.obj");
    write_obj(&tri, &path).unwrap();

    let text = std::fs::read_to_string(&path).unwrap();
    let mut v = 0usize;
    let mut f = Vec::new();
    for line in text.lines() {
        if line.starts_with("v ") {
            assert!(f.is_empty(), "all points precede faces");
            v += 1;
        } else if let Some(rest) = line.strip_prefix("f ") {
            let ids: Vec<u32> = rest.split(' ').map(|s| s.parse().unwrap()).collect();
            let [a, b, c] = ids[..] else { panic!("face arity") };
            f.push([a - 1, b - 1, c - 1]);
        } else {
            panic!("unexpected line {line:?}");
        }
    }
    assert_eq!(v, tri.points.len());
    assert_eq!(f, tri.triangles);
}

#[test]
fn volume_file_roundtrips() {
    let (vol, _) = random_volume(12);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("vol.hdr");
    save_volume(&vol, &path).unwrap();
    assert_eq!(load_volume(&path).unwrap(), vol);
}

/// Renumbers points via `perm[old] = new`, reverses quad listing order, and
/// rotates each quad one step (rotation preserves the cycle and winding).
fn renumbered(mesh: &SurfaceNetMesh) -> SurfaceNetMesh {
    let n = mesh.num_points();
    let perm: Vec<u32> = (0..n as u32).rev().collect();

    let mut points = vec![[0.0f32; 3]; n];
    let mut anchors = vec![[0.0f32; 3]; n];
    for i in 0..n {
        points[perm[i] as usize] = mesh.points[i];
        anchors[perm[i] as usize] = mesh.anchors[i];
    }

    let mut quads: Vec<[u32; 4]> = mesh
        .quads
        .iter()
        .map(|q| [perm[q[1] as usize], perm[q[2] as usize], perm[q[3] as usize], perm[q[0] as usize]])
        .collect();
    quads.reverse();
    let mut tuples = mesh.tuples.clone();
    tuples.reverse();

    let mut stencil_offsets = vec![0u64; n + 1];
    let mut stencil_neighbors = Vec::with_capacity(mesh.stencil_neighbors.len());
    for new in 0..n {
        let old = n - 1 - new;
        let mut nb: Vec<u32> = mesh.stencil(old).iter().map(|&q| perm[q as usize]).collect();
        nb.sort_unstable();
        stencil_offsets[new + 1] = stencil_offsets[new] + nb.len() as u64;
        stencil_neighbors.extend(nb);
    }

    SurfaceNetMesh {
        points,
        anchors,
        spacing: mesh.spacing,
        quads,
        tuples,
        stencil_offsets,
        stencil_neighbors,
    }
}

#[test]
fn canonical_form_ignores_renumbering() {
    for seed in [5u64, 21, 58] {
        let mesh = sample_mesh(seed);
        if mesh.num_points() == 0 {
            continue;
        }
        let other = renumbered(&mesh);
        other.validate().unwrap();
        assert_ne!(other, mesh, "seed {seed}: renumbering must change the raw form");
        assert_eq!(
            canonicalize(&other),
            canonicalize(&mesh),
            "seed {seed}: canonical form must not"
        );
    }
}

#[test]
fn canonical_form_separates_different_meshes() {
    let a = sample_mesh(5);
    let b = sample_mesh(6);
    assert_ne!(canonicalize(&a), canonicalize(&b));
}
