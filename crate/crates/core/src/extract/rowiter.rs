//! Point-id resolution for Pass 4: per-row forward cursors that turn
//! PRODUCE_POINT bits into the ids the output plan assigned, without any
//! voxel→id map.
//!
//! A cursor starts at its row's prefix-summed point offset and gains one id
//! per PRODUCE_POINT bit crossed. Pass 4 walks voxels in ascending x, so
//! every query is a forward advance.

use super::cases::PRODUCE_POINT;

pub(crate) struct RowCursor<'a> {
    /// Padded triad row; the triad of voxel x sits at byte `1 + x`.
    row: &'a [u8],
    x: u32,
    id: u64,
}

impl<'a> RowCursor<'a> {
    pub fn new(row: &'a [u8], base_id: u64) -> Self {
        RowCursor { row, x: 0, id: base_id }
    }

    #[inline(always)]
    fn produces(&self, x: u32) -> bool {
        self.row[1 + x as usize] & PRODUCE_POINT != 0
    }

    /// Consumes produce bits in `[current, x)`.
    #[inline]
    pub fn advance_to(&mut self, x: u32) {
        while self.x < x {
            self.id += self.produces(self.x) as u64;
            self.x += 1;
        }
    }

    /// Point id at voxel `x`; the cursor must be advanced to `x` and the
    /// voxel must produce a point.
    #[inline(always)]
    pub fn id_here(&self, x: u32) -> u32 {
        debug_assert_eq!(self.x, x);
        debug_assert!(self.produces(x));
        self.id as u32
    }

    /// Point id at voxel `x − 1`, which must produce a point.
    #[inline(always)]
    pub fn id_prev(&self, x: u32) -> u32 {
        debug_assert_eq!(self.x, x);
        debug_assert!(x >= 1 && self.produces(x - 1));
        (self.id - 1) as u32
    }
}

/// Cursors for the 3×3 block of voxel rows around the row being generated;
/// entries are absent where the neighbor row falls outside the voxel grid.
pub(crate) struct RowKernel<'a> {
    cur: [[Option<RowCursor<'a>>; 3]; 3],
}

impl<'a> RowKernel<'a> {
    /// `rows(dj, dk)` supplies the padded triad row and point-id base of
    /// voxel row `(j+dj, k+dk)`, or None when that row does not exist.
    pub fn new(mut rows: impl FnMut(i32, i32) -> Option<(&'a [u8], u64)>) -> Self {
        let mut cur: [[Option<RowCursor<'a>>; 3]; 3] = Default::default();
        for dk in -1..=1i32 {
            for dj in -1..=1i32 {
                cur[(dk + 1) as usize][(dj + 1) as usize] =
                    rows(dj, dk).map(|(row, base)| RowCursor::new(row, base));
            }
        }
        RowKernel { cur }
    }

    #[inline]
    pub fn advance_all(&mut self, x: u32) {
        for line in &mut self.cur {
            for cursor in line.iter_mut().flatten() {
                cursor.advance_to(x);
            }
        }
    }

    #[inline(always)]
    pub fn cursor(&self, dj: i32, dk: i32) -> &RowCursor<'a> {
        self.cur[(dk + 1) as usize][(dj + 1) as usize]
            .as_ref()
            .expect("kernel queried for a row outside the voxel grid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn padded_row(produce_at: &[u32], voxels: usize) -> Vec<u8> {
        let mut row = vec![0u8; voxels + 2];
        for &x in produce_at {
            row[1 + x as usize] |= PRODUCE_POINT;
        }
        row
    }

    #[test]
    fn cursor_ids_match_direct_count() {
        let produce = [1u32, 3, 4, 7];
        let row = padded_row(&produce, 9);
        let base = 100u64;
        let mut cur = RowCursor::new(&row, base);
        for (rank, &x) in produce.iter().enumerate() {
            cur.advance_to(x);
            assert_eq!(cur.id_here(x), base as u32 + rank as u32);
        }
    }

    #[test]
    fn cursor_prev_id_at_adjacent_producer() {
        let row = padded_row(&[3, 4], 6);
        let mut cur = RowCursor::new(&row, 10);
        cur.advance_to(4);
        assert_eq!(cur.id_here(4), 11);
        assert_eq!(cur.id_prev(4), 10);
    }

    #[test]
    fn kernel_tracks_nine_rows_independently() {
        let rows: Vec<Vec<u8>> = (0..9)
            .map(|r| padded_row(&[(r % 3) as u32, 5], 8))
            .collect();
        let bases: Vec<u64> = (0..9).map(|r| (r * 10) as u64).collect();
        let mut kernel = RowKernel::new(|dj, dk| {
            let idx = ((dk + 1) * 3 + (dj + 1)) as usize;
            Some((rows[idx].as_slice(), bases[idx]))
        });
        kernel.advance_all(5);
        for dk in -1..=1 {
            for dj in -1..=1 {
                let idx = ((dk + 1) * 3 + (dj + 1)) as usize;
                // one producer before x=5 in every row
                assert_eq!(kernel.cursor(dj, dk).id_here(5), bases[idx] as u32 + 1);
            }
        }
    }

    #[test]
    fn kernel_allows_missing_rows() {
        let row = padded_row(&[0], 4);
        let mut kernel =
            RowKernel::new(|dj, dk| (dj == 0 && dk == 0).then_some((row.as_slice(), 0)));
        kernel.advance_all(0);
        assert_eq!(kernel.cursor(0, 0).id_here(0), 0);
    }
}
