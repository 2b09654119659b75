//! Shared helpers for the integration test targets.

#![allow(dead_code)]

use std::collections::HashMap;
use std::path::Path;

use surfacenets::volume::{LabeledVolume, Scalars, SplitMix64};

/// Seeded random labeled volume: dims uniform in [2,16] per axis, 1..=5
/// labels, roughly half the grid points background.
pub fn random_volume(seed: u64) -> (LabeledVolume, Vec<u32>) {
    let mut rng = SplitMix64::new(seed);
    let mut dim = || 2 + rng.next_below(15) as u32;
    let (m, n, o) = (dim(), dim(), dim());
    let num_labels = 1 + rng.next_below(5) as u32;
    let len = m as usize * n as usize * o as usize;
    let mut data = Vec::with_capacity(len);
    for _ in 0..len {
        let v = if rng.next_f64() < 0.5 {
            0
        } else {
            1 + rng.next_below(u64::from(num_labels)) as u32
        };
        data.push(v);
    }
    let vol = LabeledVolume::new((m, n, o), (1.0, 1.0, 1.0), (0.0, 0.0, 0.0), Scalars::U32(data))
        .unwrap();
    (vol, (1..=num_labels).collect())
}

/// Volume with one label-1 sphere of radius `r` centered in the grid; the
/// sphere stays at least one full voxel away from every volume face.
pub fn interior_sphere_volume(dim: u32, r: f64) -> LabeledVolume {
    assert!(r + 2.0 < f64::from(dim - 1) / 2.0, "sphere must stay interior");
    let c = f64::from(dim - 1) / 2.0;
    let mut data = Vec::with_capacity((dim as usize).pow(3));
    for k in 0..dim {
        for j in 0..dim {
            for i in 0..dim {
                let d2 = (f64::from(i) - c).powi(2)
                    + (f64::from(j) - c).powi(2)
                    + (f64::from(k) - c).powi(2);
                data.push(u8::from(d2 <= r * r));
            }
        }
    }
    LabeledVolume::new(
        (dim, dim, dim),
        (1.0, 1.0, 1.0),
        (0.0, 0.0, 0.0),
        Scalars::U8(data),
    )
    .unwrap()
}

/// Undirected edge -> number of incident faces, over quads or triangles.
pub fn edge_counts<const N: usize>(faces: impl IntoIterator<Item = [u32; N]>) -> HashMap<(u32, u32), usize> {
    let mut counts = HashMap::new();
    for face in faces {
        for e in 0..N {
            let (a, b) = (face[e], face[(e + 1) % N]);
            let key = (a.min(b), a.max(b));
            *counts.entry(key).or_insert(0) += 1;
        }
    }
    counts
}

/// `x` nudged up by `n` float steps; tolerance helper for containment
/// checks. `x` must be positive and finite.
pub fn ulps_up(x: f32, n: u32) -> f32 {
    assert!(x.is_finite() && x > 0.0);
    f32::from_bits(x.to_bits() + n)
}

/// One unit in the last place of positive finite `x`.
pub fn ulp_f32(x: f32) -> f32 {
    assert!(x.is_finite() && x > 0.0);
    f32::from_bits(x.to_bits() + 1) - x
}

/// `|p - a|` evaluated in f64 so the check itself adds no rounding slop.
pub fn dist_f64(p: [f32; 3], a: [f32; 3]) -> f64 {
    let d = [
        f64::from(p[0]) - f64::from(a[0]),
        f64::from(p[1]) - f64::from(a[1]),
        f64::from(p[2]) - f64::from(a[2]),
    ];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

/// Sphere containment bound: radius plus 4 ulps at the position coordinate
/// scale. f32 positions cannot encode the sphere surface more finely than
/// their own grid, so the tolerance scales with the largest coordinate.
pub fn sphere_limit(p: [f32; 3], a: [f32; 3], r: f32) -> f64 {
    let mut scale = r;
    for c in 0..3 {
        scale = scale.max(p[c].abs()).max(a[c].abs());
    }
    f64::from(r) + 4.0 * f64::from(ulp_f32(scale))
}

pub type PlyContents = (Vec<[f32; 3]>, Vec<[u32; 3]>, Vec<[u32; 2]>);

/// Minimal reader for the binary little-endian PLY emitted by `write_ply`;
/// returns (points, triangles, tuples). Parses the header for counts and
/// insists on the exact property layout the writer declares.
pub fn read_ply(path: &Path) -> PlyContents {
    let bytes = std::fs::read(path).unwrap();
    let header_end = bytes
        .windows(11)
        .position(|w| w == b"end_header\n")
        .expect("header terminator")
        + 11;
    let header = std::str::from_utf8(&bytes[..header_end]).unwrap();
    let mut num_points = None;
    let mut num_faces = None;
    for line in header.lines() {
        if let Some(rest) = line.strip_prefix("element vertex ") {
            num_points = Some(rest.parse::<usize>().unwrap());
        }
        if let Some(rest) = line.strip_prefix("element face ") {
            num_faces = Some(rest.parse::<usize>().unwrap());
        }
    }
    assert!(header.starts_with("ply\nformat binary_little_endian 1.0\n"));
    let (np, nf) = (num_points.unwrap(), num_faces.unwrap());

    let mut at = header_end;
    let f32_at = |buf: &[u8], at: &mut usize| {
        let v = f32::from_le_bytes(buf[*at..*at + 4].try_into().unwrap());
        *at += 4;
        v
    };
    let u32_at = |buf: &[u8], at: &mut usize| {
        let v = u32::from_le_bytes(buf[*at..*at + 4].try_into().unwrap());
        *at += 4;
        v
    };
    let mut points = Vec::with_capacity(np);
    for _ in 0..np {
        points.push([
            f32_at(&bytes, &mut at),
            f32_at(&bytes, &mut at),
            f32_at(&bytes, &mut at),
        ]);
    }
    let mut triangles = Vec::with_capacity(nf);
    let mut tuples = Vec::with_capacity(nf);
    for _ in 0..nf {
        assert_eq!(bytes[at], 3, "triangle list length");
        at += 1;
        triangles.push([
            u32_at(&bytes, &mut at),
            u32_at(&bytes, &mut at),
            u32_at(&bytes, &mut at),
        ]);
        tuples.push([u32_at(&bytes, &mut at), u32_at(&bytes, &mut at)]);
    }
    assert_eq!(at, bytes.len(), "trailing bytes");
    (points, triangles, tuples)
}
