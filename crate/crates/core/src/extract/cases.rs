//! Shared edge/face case conventions: corner numbering, case assembly,
//! quad winding, adjacency tuples, and stencil face ordering.
//!
//! Both the four-pass extractor and the brute-force reference extractor draw
//! these definitions from here, so an output mismatch between them isolates a
//! traversal bug, never a convention drift.
//!
//! Corner `c_n` of a unit voxel sits at offset `(n&1, (n>>1)&1, (n>>2)&1)`
//! from the voxel origin. Edges are numbered by axis then by the two
//! cross-axis offsets: e0..e3 x-edges at (y,z) ∈ {(0,0),(1,0),(0,1),(1,1)},
//! e4..e7 y-edges at (x,z) likewise, e8..e11 z-edges at (x,y) likewise.
//! Faces f0..f5 are −x,+x,−y,+y,−z,+z.

/// Triad bit layout. One byte per grid point; bits 5..7 stay zero.
pub const INSIDE: u8 = 1 << 0;
pub const X_INT: u8 = 1 << 1;
pub const Y_INT: u8 = 1 << 2;
pub const Z_INT: u8 = 1 << 3;
pub const PRODUCE_POINT: u8 = 1 << 4;

/// Corner index pairs (origin-side, far-side) for edges e0..e11.
pub const EDGE_CORNERS: [(u8, u8); 12] = [
    (0, 1),
    (2, 3),
    (4, 5),
    (6, 7),
    (0, 2),
    (1, 3),
    (4, 6),
    (5, 7),
    (0, 4),
    (1, 5),
    (2, 6),
    (3, 7),
];

/// Face-bit masks of the two faces bounded by each edge.
pub const EDGE_TO_FACES: [u8; 12] = [
    0x14, // e0: f2, f4
    0x18, // e1: f3, f4
    0x24, // e2: f2, f5
    0x28, // e3: f3, f5
    0x11, // e4: f0, f4
    0x12, // e5: f1, f4
    0x21, // e6: f0, f5
    0x22, // e7: f1, f5
    0x05, // e8: f0, f2
    0x06, // e9: f1, f2
    0x09, // e10: f0, f3
    0x0A, // e11: f1, f3
];

/// Lattice offset of corner `n` from the voxel origin.
#[inline(always)]
pub fn corner_offset(n: u8) -> (u32, u32, u32) {
    ((n & 1) as u32, ((n >> 1) & 1) as u32, ((n >> 2) & 1) as u32)
}

/// Assembles a voxel's 12-bit edge case from the seven triads at corners
/// c0..c6 (c7 is never needed). Pure bit shuffling; no scalar reads.
#[inline(always)]
pub fn edge_case(t: [u8; 7]) -> u16 {
    let x = |c: usize| ((t[c] & X_INT) >> 1) as u16;
    let y = |c: usize| ((t[c] & Y_INT) >> 2) as u16;
    let z = |c: usize| ((t[c] & Z_INT) >> 3) as u16;
    x(0)
        | x(2) << 1
        | x(4) << 2
        | x(6) << 3
        | y(0) << 4
        | y(1) << 5
        | y(4) << 6
        | y(5) << 7
        | z(0) << 8
        | z(1) << 9
        | z(2) << 10
        | z(3) << 11
}

/// 6-bit stencil face case: a face is selected when any of its four boundary
/// edges is intersected.
#[inline(always)]
pub fn face_case(ec: u16) -> u8 {
    let mut fc = 0u8;
    let mut bits = ec;
    while bits != 0 {
        let e = bits.trailing_zeros() as usize;
        fc |= EDGE_TO_FACES[e];
        bits &= bits - 1;
    }
    fc
}

/// Axis of the triad edge owning a quad.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// The four voxels sharing the triad edge at grid point `(i, j, k)` along
/// `axis`, ordered counterclockwise as seen from the +axis direction (quad
/// normal along +axis). Caller must have checked [`quad_interior`].
#[inline(always)]
pub fn quad_voxels(axis: Axis, i: u32, j: u32, k: u32) -> [(u32, u32, u32); 4] {
    match axis {
        Axis::X => [
            (i, j - 1, k - 1),
            (i, j, k - 1),
            (i, j, k),
            (i, j - 1, k),
        ],
        Axis::Y => [
            (i - 1, j, k - 1),
            (i - 1, j, k),
            (i, j, k),
            (i, j, k - 1),
        ],
        Axis::Z => [
            (i - 1, j - 1, k),
            (i, j - 1, k),
            (i, j, k),
            (i - 1, j, k),
        ],
    }
}

/// True when all four voxels sharing the edge exist, i.e. the quad may be
/// emitted. `voxel_dims` = point dims − 1 per axis. Edges touching the volume
/// boundary emit no quad: regions stay open at the volume faces.
#[inline(always)]
pub fn quad_interior(axis: Axis, i: u32, j: u32, k: u32, voxel_dims: (u32, u32, u32)) -> bool {
    let (vm, vn, vo) = voxel_dims;
    match axis {
        Axis::X => i < vm && j >= 1 && j < vn && k >= 1 && k < vo,
        Axis::Y => i >= 1 && i < vm && j < vn && k >= 1 && k < vo,
        Axis::Z => i >= 1 && i < vm && j >= 1 && j < vn && k < vo,
    }
}

/// Stencil faces in ascending neighbor-point-id order. Point ids follow the
/// row scan (k slowest, then j, then x), so the (k,j,i)-lexicographic
/// neighbor order f4, f2, f0, f1, f3, f5 yields sorted stencil lists.
pub const STENCIL_FACE_ORDER: [(u8, i32, i32, i32); 6] = [
    (4, 0, 0, -1),
    (2, 0, -1, 0),
    (0, -1, 0, 0),
    (1, 1, 0, 0),
    (3, 0, 1, 0),
    (5, 0, 0, 1),
];
