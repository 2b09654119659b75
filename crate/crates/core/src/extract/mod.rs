//! Four-pass edge-parallel surface extraction.
//!
//! Pass 1 classifies grid points along x-rows, marking x-edge intersections
//! and per-row trim intervals. Pass 2 marks y/z-edge intersections, widening
//! trims; an endpoint comparison decides whether the constant region outside
//! the Pass-1 trims can be skipped. Pass 3 assembles per-voxel edge cases,
//! sets PRODUCE_POINT bits in four checkerboarded waves, counts outputs per
//! row, and converts the counts to exclusive offsets with a serial prefix
//! sum. Pass 4 generates points, quads, adjacency tuples, and smoothing
//! stencils into exactly pre-sized arrays through disjoint per-row windows.
//! No locks or atomics anywhere; output is byte-identical for every thread
//! count.

pub(crate) mod cases;
mod rowiter;

use std::time::Instant;

use crate::exec::{split_items, split_windows, Exec};
use crate::labels::{edge_intersects, Classifier, SelectedLabelSet, BACKGROUND};
use crate::mesh::SurfaceNetMesh;
use crate::volume::{LabeledVolume, Scalars};

use cases::{
    edge_case, face_case, quad_interior, quad_voxels, Axis, INSIDE, PRODUCE_POINT,
    STENCIL_FACE_ORDER, X_INT, Y_INT, Z_INT,
};
use rowiter::RowKernel;

#[derive(Debug, thiserror::Error)]
pub enum ExtractError {
    #[error(
        "output exceeds the 32-bit id space: {points} points, {quads} quads, \
         {stencil_entries} stencil entries"
    )]
    TooLarge {
        points: u64,
        quads: u64,
        stencil_entries: u64,
    },
    #[error(
        "output allocation failed for {points} points, {quads} quads, \
         {stencil_entries} stencil entries"
    )]
    Alloc {
        points: u64,
        quads: u64,
        stencil_entries: u64,
    },
}

/// Extraction knobs. `threads = 0` selects the detected core count. `trim`
/// disables the row trim acceleration when false (diagnostic mode; output is
/// identical either way).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExtractOptions {
    pub threads: usize,
    pub trim: bool,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions {
            threads: 0,
            trim: true,
        }
    }
}

/// Instrumentation for one pass. `rows_visited` counts rows that performed
/// any work, `items_examined` counts edge or voxel evaluations, and
/// `outputs_emitted` counts bits or primitives produced.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PassStats {
    pub rows_visited: u64,
    pub items_examined: u64,
    pub outputs_emitted: u64,
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Totals {
    pub points: u64,
    pub quads: u64,
    pub stencil_entries: u64,
}

/// Per-pass instrumentation plus the planned/emitted output totals, which
/// must agree exactly.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExtractStats {
    pub passes: [PassStats; 4],
    pub planned: Totals,
    pub emitted: Totals,
}

impl ExtractStats {
    /// Wall time of the four passes combined.
    pub fn extract_seconds(&self) -> f64 {
        self.passes.iter().map(|p| p.seconds).sum()
    }
}

pub(crate) trait Scalar: Copy + Send + Sync {
    fn to_u32(self) -> u32;
}

impl Scalar for u8 {
    #[inline(always)]
    fn to_u32(self) -> u32 {
        self as u32
    }
}

impl Scalar for u16 {
    #[inline(always)]
    fn to_u32(self) -> u32 {
        self as u32
    }
}

impl Scalar for u32 {
    #[inline(always)]
    fn to_u32(self) -> u32 {
        self
    }
}

/// Triad bytes for every grid point, padded by one all-zero triad on every
/// side so case assembly never branches on bounds. The triad of grid point
/// `(i,j,k)` lives at padded coordinate `(i+1, j+1, k+1)`.
pub(crate) struct TriadVolume {
    m: u32,
    n: u32,
    data: Vec<u8>,
    #[cfg(test)]
    o: u32,
}

impl TriadVolume {
    fn new(m: u32, n: u32, o: u32) -> TriadVolume {
        let len = (m as usize + 2) * (n as usize + 2) * (o as usize + 2);
        TriadVolume {
            m,
            n,
            data: vec![0; len],
            #[cfg(test)]
            o,
        }
    }

    /// Byte offset of grid row (j, k)'s padded row (its pad byte at x = −1).
    #[inline(always)]
    fn row_start(&self, j: u32, k: u32) -> usize {
        row_start(self.m, self.n, j, k)
    }

    /// Padded row of grid row (j, k), length M+2.
    fn row(&self, j: u32, k: u32) -> &[u8] {
        let s = self.row_start(j, k);
        &self.data[s..s + self.m as usize + 2]
    }

    /// True when every padding byte is still zero.
    #[cfg(test)]
    fn padding_clear(&self) -> bool {
        let (m, n, o) = (self.m as usize, self.n as usize, self.o as usize);
        let mut idx = 0;
        for k in 0..o + 2 {
            for j in 0..n + 2 {
                for i in 0..m + 2 {
                    let pad = i == 0
                        || i == m + 1
                        || j == 0
                        || j == n + 1
                        || k == 0
                        || k == o + 1;
                    if pad && self.data[idx] != 0 {
                        return false;
                    }
                    idx += 1;
                }
            }
        }
        true
    }
}

#[inline(always)]
fn row_start(m: u32, n: u32, j: u32, k: u32) -> usize {
    (m as usize + 2) * ((j as usize + 1) + (n as usize + 2) * (k as usize + 1))
}

#[inline(always)]
fn meta_id(n: u32, j: u32, k: u32) -> usize {
    (j as usize + 1) + (n as usize + 2) * (k as usize + 1)
}

/// Per-x-row metadata: output counts (exclusive offsets after the Pass-3
/// prefix sum) and the half-open trim interval over triad x-indices. One
/// record per padded row; padding rows stay zero.
#[derive(Debug, Clone, Copy, Default)]
struct MetaRow {
    pts: u64,
    quads: u64,
    stencil: u64,
    x_l: u32,
    x_r: u32,
    /// X-intersection count; instrumentation only.
    x_ints: u32,
}

/// Extract the shared-boundary surface net of the selected labels.
pub fn extract(
    vol: &LabeledVolume,
    set: &SelectedLabelSet,
    opts: &ExtractOptions,
) -> Result<SurfaceNetMesh, ExtractError> {
    extract_with_stats(vol, set, opts).map(|(mesh, _)| mesh)
}

/// [`extract`] plus per-pass instrumentation.
pub fn extract_with_stats(
    vol: &LabeledVolume,
    set: &SelectedLabelSet,
    opts: &ExtractOptions,
) -> Result<(SurfaceNetMesh, ExtractStats), ExtractError> {
    match vol.scalars() {
        Scalars::U8(data) => run(vol, data, set, opts),
        Scalars::U16(data) => run(vol, data, set, opts),
        Scalars::U32(data) => run(vol, data, set, opts),
    }
}

fn run<T: Scalar>(
    vol: &LabeledVolume,
    data: &[T],
    set: &SelectedLabelSet,
    opts: &ExtractOptions,
) -> Result<(SurfaceNetMesh, ExtractStats), ExtractError> {
    let exec = Exec::new(opts.threads);
    let (m, n, o) = vol.dims();
    let mut triads = TriadVolume::new(m, n, o);
    let mut meta = vec![MetaRow::default(); (n as usize + 2) * (o as usize + 2)];
    let mut stats = ExtractStats::default();

    let t = Instant::now();
    pass1(vol, data, set, &mut triads, &mut meta, &exec, opts.trim, &mut stats.passes[0]);
    stats.passes[0].seconds = t.elapsed().as_secs_f64();

    let trims: Vec<(u32, u32)> = meta.iter().map(|r| (r.x_l, r.x_r)).collect();
    let t = Instant::now();
    pass2(vol, data, set, &mut triads, &mut meta, &trims, &exec, opts.trim, &mut stats.passes[1]);
    stats.passes[1].seconds = t.elapsed().as_secs_f64();

    let trims: Vec<(u32, u32)> = meta.iter().map(|r| (r.x_l, r.x_r)).collect();
    let t = Instant::now();
    let plan = pass3((m, n, o), &mut triads, &mut meta, &trims, &exec, &mut stats.passes[2])?;
    stats.passes[2].seconds = t.elapsed().as_secs_f64();
    stats.planned = plan.totals;

    let t = Instant::now();
    let mesh = pass4(vol, data, set, &triads, &meta, plan, &exec, &mut stats);
    stats.passes[3].seconds = t.elapsed().as_secs_f64();

    Ok((mesh, stats))
}

struct P1Task<'a, T> {
    row: &'a mut [u8],
    meta: &'a mut MetaRow,
    scalars: &'a [T],
    examined: u64,
    emitted: u64,
}

#[allow(clippy::too_many_arguments)]
fn pass1<T: Scalar>(
    vol: &LabeledVolume,
    data: &[T],
    set: &SelectedLabelSet,
    triads: &mut TriadVolume,
    meta: &mut [MetaRow],
    exec: &Exec,
    trim: bool,
    stats: &mut PassStats,
) {
    let (m, n, o) = vol.dims();
    let mu = m as usize;
    let rows: Vec<(u32, u32)> = (0..o).flat_map(|k| (0..n).map(move |j| (j, k))).collect();

    let triad_rows = split_windows(
        &mut triads.data,
        rows.iter().map(|&(j, k)| (row_start(m, n, j, k), mu + 2)),
    );
    let meta_rows = split_items(meta, rows.iter().map(|&(j, k)| meta_id(n, j, k)));

    let mut tasks: Vec<P1Task<T>> = triad_rows
        .into_iter()
        .zip(meta_rows)
        .zip(&rows)
        .map(|((row, meta), &(j, k))| {
            let base = vol.index(0, j, k);
            P1Task {
                row,
                meta,
                scalars: &data[base..base + mu],
                examined: 0,
                emitted: 0,
            }
        })
        .collect();

    exec.for_each(&mut tasks, |t| {
        let mut cls = Classifier::new(set);
        let mut prev = cls.classify(t.scalars[0].to_u32());
        if prev != BACKGROUND {
            t.row[1] |= INSIDE;
        }
        let mut lo = u32::MAX;
        let mut hi = 0u32;
        let mut count = 0u32;
        for i in 0..m - 1 {
            let cur = cls.classify(t.scalars[i as usize + 1].to_u32());
            if cur != BACKGROUND {
                t.row[i as usize + 2] |= INSIDE;
            }
            if edge_intersects(prev, cur) {
                t.row[i as usize + 1] |= X_INT;
                if lo == u32::MAX {
                    lo = i;
                }
                hi = i + 1;
                count += 1;
            }
            prev = cur;
        }
        (t.meta.x_l, t.meta.x_r) = if !trim {
            (0, m)
        } else if lo == u32::MAX {
            (0, 0)
        } else {
            (lo, hi)
        };
        t.meta.x_ints = count;
        t.examined = (m - 1) as u64;
        t.emitted = count as u64;
    });

    stats.rows_visited += tasks.len() as u64;
    for t in &tasks {
        stats.items_examined += t.examined;
        stats.outputs_emitted += t.emitted;
    }
}

struct P2Task<'a, T> {
    row: &'a mut [u8],
    meta: &'a mut MetaRow,
    s_self: &'a [T],
    s_y: Option<&'a [T]>,
    s_z: Option<&'a [T]>,
    y_trim: (u32, u32),
    z_trim: (u32, u32),
    own_trim: (u32, u32),
    visited: bool,
    examined: u64,
    emitted: u64,
}

/// Scan bounds for one row pair: full row when the endpoint classifications
/// intersect, else the union of the two Pass-1 trims (empty trims contribute
/// nothing). Outside the returned interval both rows are constant, so no
/// intersection can be missed.
fn pair_range<T: Scalar>(
    cls: &mut Classifier,
    a: &[T],
    b: &[T],
    at: (u32, u32),
    bt: (u32, u32),
    m: u32,
) -> (u32, u32) {
    let lo_of = |(l, r): (u32, u32)| if l < r { l } else { m };
    let hi_of = |(l, r): (u32, u32)| if l < r { r } else { 0 };
    let first = edge_intersects(
        cls.classify(a[0].to_u32()),
        cls.classify(b[0].to_u32()),
    );
    let last = edge_intersects(
        cls.classify(a[a.len() - 1].to_u32()),
        cls.classify(b[b.len() - 1].to_u32()),
    );
    let left = if first { 0 } else { lo_of(at).min(lo_of(bt)) };
    let right = if last { m } else { hi_of(at).max(hi_of(bt)) };
    (left, right)
}

#[allow(clippy::too_many_arguments)]
fn pass2<T: Scalar>(
    vol: &LabeledVolume,
    data: &[T],
    set: &SelectedLabelSet,
    triads: &mut TriadVolume,
    meta: &mut [MetaRow],
    trims: &[(u32, u32)],
    exec: &Exec,
    trim: bool,
    stats: &mut PassStats,
) {
    let (m, n, o) = vol.dims();
    let mu = m as usize;
    let rows: Vec<(u32, u32)> = (0..o).flat_map(|k| (0..n).map(move |j| (j, k))).collect();

    let triad_rows = split_windows(
        &mut triads.data,
        rows.iter().map(|&(j, k)| (row_start(m, n, j, k), mu + 2)),
    );
    let meta_rows = split_items(meta, rows.iter().map(|&(j, k)| meta_id(n, j, k)));

    let srow = |j: u32, k: u32| {
        let base = vol.index(0, j, k);
        &data[base..base + mu]
    };

    let mut tasks: Vec<P2Task<T>> = triad_rows
        .into_iter()
        .zip(meta_rows)
        .zip(&rows)
        .map(|((row, meta), &(j, k))| P2Task {
            row,
            meta,
            s_self: srow(j, k),
            s_y: (j + 1 < n).then(|| srow(j + 1, k)),
            s_z: (k + 1 < o).then(|| srow(j, k + 1)),
            y_trim: if j + 1 < n { trims[meta_id(n, j + 1, k)] } else { (0, 0) },
            z_trim: if k + 1 < o { trims[meta_id(n, j, k + 1)] } else { (0, 0) },
            own_trim: trims[meta_id(n, j, k)],
            visited: false,
            examined: 0,
            emitted: 0,
        })
        .collect();

    exec.for_each(&mut tasks, |t| {
        let mut cls = Classifier::new(set);
        let mut lo = u32::MAX;
        let mut hi = 0u32;
        if let Some(sy) = t.s_y {
            let (l, r) = pair_range(&mut cls, t.s_self, sy, t.own_trim, t.y_trim, m);
            if l < r {
                lo = lo.min(l);
                hi = hi.max(r);
            }
        }
        if let Some(sz) = t.s_z {
            let (l, r) = pair_range(&mut cls, t.s_self, sz, t.own_trim, t.z_trim, m);
            if l < r {
                lo = lo.min(l);
                hi = hi.max(r);
            }
        }

        let mut bits_lo = u32::MAX;
        let mut bits_hi = 0u32;
        if lo < hi {
            t.visited = true;
            for i in lo..hi {
                let c = cls.classify(t.s_self[i as usize].to_u32());
                if let Some(sy) = t.s_y {
                    t.examined += 1;
                    if edge_intersects(c, cls.classify(sy[i as usize].to_u32())) {
                        t.row[i as usize + 1] |= Y_INT;
                        bits_lo = bits_lo.min(i);
                        bits_hi = i + 1;
                        t.emitted += 1;
                    }
                }
                if let Some(sz) = t.s_z {
                    t.examined += 1;
                    if edge_intersects(c, cls.classify(sz[i as usize].to_u32())) {
                        t.row[i as usize + 1] |= Z_INT;
                        bits_lo = bits_lo.min(i);
                        bits_hi = i + 1;
                        t.emitted += 1;
                    }
                }
            }
        }

        if !trim {
            (t.meta.x_l, t.meta.x_r) = (0, m);
        } else {
            let (mut l, mut r) = t.own_trim;
            if bits_lo != u32::MAX {
                if l >= r {
                    (l, r) = (bits_lo, bits_hi);
                } else {
                    l = l.min(bits_lo);
                    r = r.max(bits_hi);
                }
            }
            (t.meta.x_l, t.meta.x_r) = (l, r);
        }
    });

    for t in &tasks {
        stats.rows_visited += t.visited as u64;
        stats.items_examined += t.examined;
        stats.outputs_emitted += t.emitted;
    }
}

/// Voxel scan interval for voxel row (j, k): the covering interval of the
/// four surrounding grid rows' trims, extended one voxel left because voxel
/// `i` reads y/z bits of the triads at `x = i+1`, clamped to the voxel range.
fn voxel_row_range(trims: &[(u32, u32)], m: u32, n: u32, j: u32, k: u32) -> (u32, u32) {
    let mut lo = m;
    let mut hi = 0u32;
    for (jj, kk) in [(j, k), (j + 1, k), (j, k + 1), (j + 1, k + 1)] {
        let (l, r) = trims[meta_id(n, jj, kk)];
        if l < r {
            lo = lo.min(l);
            hi = hi.max(r);
        }
    }
    if lo >= hi {
        return (0, 0);
    }
    (lo.saturating_sub(1), hi.min(m - 1))
}

/// Raw shared view of the triad bytes for the checkerboarded Pass 3. Safety
/// rests on the wave partition: within a wave, a task writes only its own
/// grid row's bytes, and rows read by any task (its own plus j+1/k+1
/// neighbors) are never a wave-mate's write row, because same-wave rows
/// differ by an even, nonzero (Δj, Δk).
struct SyncTriads {
    ptr: *mut u8,
    len: usize,
}

unsafe impl Send for SyncTriads {}
unsafe impl Sync for SyncTriads {}

impl SyncTriads {
    fn new(data: &mut [u8]) -> SyncTriads {
        SyncTriads {
            ptr: data.as_mut_ptr(),
            len: data.len(),
        }
    }

    /// Safety: no concurrent writer of this byte (wave partition).
    #[inline(always)]
    unsafe fn get(&self, idx: usize) -> u8 {
        debug_assert!(idx < self.len);
        *self.ptr.add(idx)
    }

    /// Safety: this byte belongs to the calling task's own row.
    #[inline(always)]
    unsafe fn or(&self, idx: usize, bits: u8) {
        debug_assert!(idx < self.len);
        *self.ptr.add(idx) |= bits;
    }
}

struct P3Task<'a> {
    j: u32,
    k: u32,
    meta: &'a mut MetaRow,
    visited: bool,
    examined: u64,
}

struct OutputPlan {
    totals: Totals,
    /// Pre-prefix (points, quads, stencil) counts per padded meta row.
    planned: Vec<(u64, u64, u64)>,
    points: Vec<[f32; 3]>,
    anchors: Vec<[f32; 3]>,
    quads: Vec<[u32; 4]>,
    tuples: Vec<[u32; 2]>,
    stencil_offsets: Vec<u64>,
    stencil_neighbors: Vec<u32>,
}

fn alloc_exact<E: Clone + Default>(len: u64, totals: Totals) -> Result<Vec<E>, ExtractError> {
    let mut v: Vec<E> = Vec::new();
    v.try_reserve_exact(len as usize).map_err(|_| ExtractError::Alloc {
        points: totals.points,
        quads: totals.quads,
        stencil_entries: totals.stencil_entries,
    })?;
    v.resize(len as usize, E::default());
    Ok(v)
}

fn pass3(
    dims: (u32, u32, u32),
    triads: &mut TriadVolume,
    meta: &mut [MetaRow],
    trims: &[(u32, u32)],
    exec: &Exec,
    stats: &mut PassStats,
) -> Result<OutputPlan, ExtractError> {
    let (m, n, o) = dims;
    let vd = (m - 1, n - 1, o - 1);
    let sync = SyncTriads::new(&mut triads.data);

    for wave in 0..4u32 {
        let (pj, pk) = (wave & 1, wave >> 1);
        let rows: Vec<(u32, u32)> = (pk..o - 1)
            .step_by(2)
            .flat_map(|k| (pj..n - 1).step_by(2).map(move |j| (j, k)))
            .collect();
        if rows.is_empty() {
            continue;
        }
        let meta_rows = split_items(&mut *meta, rows.iter().map(|&(j, k)| meta_id(n, j, k)));
        let mut tasks: Vec<P3Task> = meta_rows
            .into_iter()
            .zip(&rows)
            .map(|(meta, &(j, k))| P3Task {
                j,
                k,
                meta,
                visited: false,
                examined: 0,
            })
            .collect();

        exec.for_each(&mut tasks, |t| {
            let (lo, hi) = voxel_row_range(trims, m, n, t.j, t.k);
            if lo >= hi {
                return;
            }
            t.visited = true;
            let b00 = row_start(m, n, t.j, t.k);
            let b10 = row_start(m, n, t.j + 1, t.k);
            let b01 = row_start(m, n, t.j, t.k + 1);
            let b11 = row_start(m, n, t.j + 1, t.k + 1);
            for i in lo..hi {
                t.examined += 1;
                let x = i as usize;
                // Corners c0..c6; wave-mates never touch these rows.
                let ec = unsafe {
                    edge_case([
                        sync.get(b00 + 1 + x),
                        sync.get(b00 + 2 + x),
                        sync.get(b10 + 1 + x),
                        sync.get(b10 + 2 + x),
                        sync.get(b01 + 1 + x),
                        sync.get(b01 + 2 + x),
                        sync.get(b11 + 1 + x),
                    ])
                };
                if ec == 0 {
                    continue;
                }
                // Own row: exclusive during this wave.
                unsafe { sync.or(b00 + 1 + x, PRODUCE_POINT) };
                t.meta.pts += 1;
                if ec & 0x001 != 0 && quad_interior(Axis::X, i, t.j, t.k, vd) {
                    t.meta.quads += 1;
                }
                if ec & 0x010 != 0 && quad_interior(Axis::Y, i, t.j, t.k, vd) {
                    t.meta.quads += 1;
                }
                if ec & 0x100 != 0 && quad_interior(Axis::Z, i, t.j, t.k, vd) {
                    t.meta.quads += 1;
                }
                let fc = face_case(ec);
                for &(f, di, dj, dk) in &STENCIL_FACE_ORDER {
                    if fc & (1 << f) == 0 {
                        continue;
                    }
                    let nx = i as i64 + di as i64;
                    let ny = t.j as i64 + dj as i64;
                    let nz = t.k as i64 + dk as i64;
                    if nx >= 0
                        && nx < vd.0 as i64
                        && ny >= 0
                        && ny < vd.1 as i64
                        && nz >= 0
                        && nz < vd.2 as i64
                    {
                        t.meta.stencil += 1;
                    }
                }
            }
        });

        for t in &tasks {
            stats.rows_visited += t.visited as u64;
            stats.items_examined += t.examined;
            stats.outputs_emitted += t.meta.pts;
        }
    }

    // Serial prefix sum in padded row order: counts become exclusive offsets.
    let mut totals = Totals::default();
    let mut planned = Vec::with_capacity(meta.len());
    for row in meta.iter_mut() {
        planned.push((row.pts, row.quads, row.stencil));
        let (p, q, s) = (row.pts, row.quads, row.stencil);
        row.pts = totals.points;
        row.quads = totals.quads;
        row.stencil = totals.stencil_entries;
        totals.points += p;
        totals.quads += q;
        totals.stencil_entries += s;
    }

    if totals.points > u32::MAX as u64 || totals.quads > u32::MAX as u64 {
        return Err(ExtractError::TooLarge {
            points: totals.points,
            quads: totals.quads,
            stencil_entries: totals.stencil_entries,
        });
    }

    Ok(OutputPlan {
        totals,
        planned,
        points: alloc_exact(totals.points, totals)?,
        anchors: alloc_exact(totals.points, totals)?,
        quads: alloc_exact(totals.quads, totals)?,
        tuples: alloc_exact(totals.quads, totals)?,
        stencil_offsets: alloc_exact(totals.points + 1, totals)?,
        stencil_neighbors: alloc_exact(totals.stencil_entries, totals)?,
    })
}

struct P4Task<'a, T> {
    j: u32,
    k: u32,
    lo: u32,
    hi: u32,
    st_base: u64,
    s_self: &'a [T],
    s_y: &'a [T],
    s_z: &'a [T],
    pts: &'a mut [[f32; 3]],
    anchors: &'a mut [[f32; 3]],
    quads: &'a mut [[u32; 4]],
    tuples: &'a mut [[u32; 2]],
    st_off: &'a mut [u64],
    st_nb: &'a mut [u32],
    examined: u64,
}

fn quad_ids(kernel: &RowKernel, axis: Axis, i: u32, j: u32, k: u32) -> [u32; 4] {
    quad_voxels(axis, i, j, k).map(|(a, b, c)| {
        let cur = kernel.cursor(b as i32 - j as i32, c as i32 - k as i32);
        if a == i {
            cur.id_here(i)
        } else {
            cur.id_prev(i)
        }
    })
}

#[allow(clippy::too_many_arguments)]
fn pass4<T: Scalar>(
    vol: &LabeledVolume,
    data: &[T],
    set: &SelectedLabelSet,
    triads: &TriadVolume,
    meta: &[MetaRow],
    mut plan: OutputPlan,
    exec: &Exec,
    stats: &mut ExtractStats,
) -> SurfaceNetMesh {
    let (m, n, o) = vol.dims();
    let mu = m as usize;
    let vd = (m - 1, n - 1, o - 1);

    // Rows with planned output, in padded scan order so window starts ascend.
    struct RowPlan {
        j: u32,
        k: u32,
        p: usize,
        q: usize,
        s: usize,
        p_off: usize,
        q_off: usize,
        s_off: usize,
    }
    let mut row_plans = Vec::new();
    for k in 0..o - 1 {
        for j in 0..n - 1 {
            let r = meta_id(n, j, k);
            let (p, q, s) = plan.planned[r];
            if p == 0 && q == 0 && s == 0 {
                continue;
            }
            row_plans.push(RowPlan {
                j,
                k,
                p: p as usize,
                q: q as usize,
                s: s as usize,
                p_off: meta[r].pts as usize,
                q_off: meta[r].quads as usize,
                s_off: meta[r].stencil as usize,
            });
        }
    }

    let num_points = plan.totals.points as usize;
    let pts_w = split_windows(&mut plan.points, row_plans.iter().map(|r| (r.p_off, r.p)));
    let anch_w = split_windows(&mut plan.anchors, row_plans.iter().map(|r| (r.p_off, r.p)));
    let quads_w = split_windows(&mut plan.quads, row_plans.iter().map(|r| (r.q_off, r.q)));
    let tuples_w = split_windows(&mut plan.tuples, row_plans.iter().map(|r| (r.q_off, r.q)));
    let st_off_w = split_windows(
        &mut plan.stencil_offsets[..num_points],
        row_plans.iter().map(|r| (r.p_off, r.p)),
    );
    let st_nb_w = split_windows(
        &mut plan.stencil_neighbors,
        row_plans.iter().map(|r| (r.s_off, r.s)),
    );

    let srow = |j: u32, k: u32| {
        let base = vol.index(0, j, k);
        &data[base..base + mu]
    };

    let trims: Vec<(u32, u32)> = meta.iter().map(|r| (r.x_l, r.x_r)).collect();
    let mut tasks: Vec<P4Task<T>> = Vec::with_capacity(row_plans.len());
    for ((((((rp, pts), anchors), quads), tuples), st_off), st_nb) in row_plans
        .iter()
        .zip(pts_w)
        .zip(anch_w)
        .zip(quads_w)
        .zip(tuples_w)
        .zip(st_off_w)
        .zip(st_nb_w)
    {
        let (lo, hi) = voxel_row_range(&trims, m, n, rp.j, rp.k);
        tasks.push(P4Task {
            j: rp.j,
            k: rp.k,
            lo,
            hi,
            st_base: rp.s_off as u64,
            s_self: srow(rp.j, rp.k),
            s_y: srow(rp.j + 1, rp.k),
            s_z: srow(rp.j, rp.k + 1),
            pts,
            anchors,
            quads,
            tuples,
            st_off,
            st_nb,
            examined: 0,
        });
    }

    exec.for_each(&mut tasks, |t| {
        let mut cls = Classifier::new(set);
        let mut kernel = RowKernel::new(|dj, dk| {
            let jj = t.j as i64 + dj as i64;
            let kk = t.k as i64 + dk as i64;
            if jj < 0 || jj >= (n - 1) as i64 || kk < 0 || kk >= (o - 1) as i64 {
                return None;
            }
            let (jj, kk) = (jj as u32, kk as u32);
            Some((triads.row(jj, kk), meta[meta_id(n, jj, kk)].pts))
        });

        let r00 = triads.row(t.j, t.k);
        let r10 = triads.row(t.j + 1, t.k);
        let r01 = triads.row(t.j, t.k + 1);
        let r11 = triads.row(t.j + 1, t.k + 1);

        let (mut p, mut q, mut s) = (0usize, 0usize, 0usize);
        for i in t.lo..t.hi {
            t.examined += 1;
            let x = i as usize;
            let byte = r00[1 + x];
            if byte & PRODUCE_POINT == 0 {
                continue;
            }
            kernel.advance_all(i);
            let pid = kernel.cursor(0, 0).id_here(i);

            let center = vol.voxel_center(i, t.j, t.k);
            t.pts[p] = center;
            t.anchors[p] = center;
            t.st_off[p] = t.st_base + s as u64;

            let c_origin = cls.classify(t.s_self[x].to_u32());
            if byte & X_INT != 0 && quad_interior(Axis::X, i, t.j, t.k, vd) {
                t.quads[q] = quad_ids(&kernel, Axis::X, i, t.j, t.k);
                t.tuples[q] = [c_origin, cls.classify(t.s_self[x + 1].to_u32())];
                q += 1;
            }
            if byte & Y_INT != 0 && quad_interior(Axis::Y, i, t.j, t.k, vd) {
                t.quads[q] = quad_ids(&kernel, Axis::Y, i, t.j, t.k);
                t.tuples[q] = [c_origin, cls.classify(t.s_y[x].to_u32())];
                q += 1;
            }
            if byte & Z_INT != 0 && quad_interior(Axis::Z, i, t.j, t.k, vd) {
                t.quads[q] = quad_ids(&kernel, Axis::Z, i, t.j, t.k);
                t.tuples[q] = [c_origin, cls.classify(t.s_z[x].to_u32())];
                q += 1;
            }

            let ec = edge_case([
                r00[1 + x],
                r00[2 + x],
                r10[1 + x],
                r10[2 + x],
                r01[1 + x],
                r01[2 + x],
                r11[1 + x],
            ]);
            let fc = face_case(ec);
            for &(f, di, dj, dk) in &STENCIL_FACE_ORDER {
                if fc & (1 << f) == 0 {
                    continue;
                }
                let nx = i as i64 + di as i64;
                let ny = t.j as i64 + dj as i64;
                let nz = t.k as i64 + dk as i64;
                if nx < 0
                    || nx >= vd.0 as i64
                    || ny < 0
                    || ny >= vd.1 as i64
                    || nz < 0
                    || nz >= vd.2 as i64
                {
                    continue;
                }
                let id = if dj == 0 && dk == 0 {
                    // Same row: the neighbor produces, so ids are adjacent.
                    if di < 0 {
                        pid - 1
                    } else {
                        pid + 1
                    }
                } else {
                    kernel.cursor(dj, dk).id_here(i)
                };
                t.st_nb[s] = id;
                s += 1;
            }
            p += 1;
        }

        assert_eq!(p, t.pts.len(), "planned vs emitted points, row ({}, {})", t.j, t.k);
        assert_eq!(q, t.quads.len(), "planned vs emitted quads, row ({}, {})", t.j, t.k);
        assert_eq!(s, t.st_nb.len(), "planned vs emitted stencil, row ({}, {})", t.j, t.k);
    });

    let st4 = &mut stats.passes[3];
    for t in &tasks {
        st4.rows_visited += 1;
        st4.items_examined += t.examined;
        stats.emitted.points += t.pts.len() as u64;
        stats.emitted.quads += t.quads.len() as u64;
        stats.emitted.stencil_entries += t.st_nb.len() as u64;
    }
    st4.outputs_emitted =
        stats.emitted.points + stats.emitted.quads + stats.emitted.stencil_entries;
    drop(tasks);

    plan.stencil_offsets[num_points] = plan.totals.stencil_entries;

    SurfaceNetMesh {
        points: plan.points,
        anchors: plan.anchors,
        spacing: vol.spacing(),
        quads: plan.quads,
        tuples: plan.tuples,
        stencil_offsets: plan.stencil_offsets,
        stencil_neighbors: plan.stencil_neighbors,
    }
}
