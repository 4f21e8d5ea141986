//! Index tables: fixed-width blocks, variable-width rows, and blocks of
//! fixed-width tables sharing one contiguous buffer.

use serde::{Deserialize, Serialize};

use crate::error::{invalid_argument, Error, Result};

/// Local index type. Negative values never address an entity.
pub type Idx = i32;

/// Marks an absent neighbour.
pub const MISSING: Idx = -1;

/// Rows of equal width stored row-major.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockConnectivity {
    rows: usize,
    cols: usize,
    values: Vec<Idx>,
}

impl BlockConnectivity {
    pub fn new(rows: usize, cols: usize, values: Vec<Idx>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(invalid_argument(format!(
                "{} values cannot fill a {rows}x{cols} table",
                values.len()
            )));
        }
        Ok(Self { rows, cols, values })
    }

    pub fn empty(cols: usize) -> Self {
        Self {
            rows: 0,
            cols,
            values: Vec::new(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[Idx] {
        &self.values[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [Idx] {
        &mut self.values[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> Idx {
        self.row(r)[c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Idx) {
        self.row_mut(r)[c] = v;
    }

    pub fn is_missing(&self, r: usize, c: usize) -> bool {
        self.get(r, c) == MISSING
    }

    pub fn push_row(&mut self, row: &[Idx]) -> Result<()> {
        if row.len() != self.cols {
            return Err(invalid_argument(format!(
                "row of {} entries in a table of width {}",
                row.len(),
                self.cols
            )));
        }
        self.values.extend_from_slice(row);
        self.rows += 1;
        Ok(())
    }

    pub fn values(&self) -> &[Idx] {
        &self.values
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[Idx]> + '_ {
        (0..self.rows).map(move |r| self.row(r))
    }
}

/// Rows of any width: `offsets[r]..offsets[r + 1]` indexes `values`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrregularConnectivity {
    offsets: Vec<usize>,
    values: Vec<Idx>,
}

impl Default for IrregularConnectivity {
    fn default() -> Self {
        Self {
            offsets: vec![0],
            values: Vec::new(),
        }
    }
}

impl IrregularConnectivity {
    pub fn new(offsets: Vec<usize>, values: Vec<Idx>) -> Result<Self> {
        if offsets.first() != Some(&0)
            || offsets.last() != Some(&values.len())
            || offsets.windows(2).any(|w| w[0] > w[1])
        {
            return Err(invalid_argument(
                "offsets must start at 0, be nondecreasing and end at len(values)",
            ));
        }
        Ok(Self { offsets, values })
    }

    pub fn from_rows<'a>(rows: impl IntoIterator<Item = &'a [Idx]>) -> Self {
        let mut c = Self::default();
        for r in rows {
            c.push_row(r);
        }
        c
    }

    pub fn rows(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn row(&self, r: usize) -> &[Idx] {
        &self.values[self.offsets[r]..self.offsets[r + 1]]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [Idx] {
        &mut self.values[self.offsets[r]..self.offsets[r + 1]]
    }

    pub fn row_len(&self, r: usize) -> usize {
        self.offsets[r + 1] - self.offsets[r]
    }

    pub fn push_row(&mut self, row: &[Idx]) {
        self.values.extend_from_slice(row);
        self.offsets.push(self.values.len());
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn values(&self) -> &[Idx] {
        &self.values
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct BlockRange {
    first_row: usize,
    rows: usize,
    cols: usize,
}

/// Ordered fixed-width blocks in one buffer. The unified rows and every
/// block view address the same memory.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiBlockConnectivity {
    table: IrregularConnectivity,
    blocks: Vec<BlockRange>,
}

impl MultiBlockConnectivity {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_block(&mut self, block: &BlockConnectivity) {
        self.blocks.push(BlockRange {
            first_row: self.table.rows(),
            rows: block.rows(),
            cols: block.cols(),
        });
        for r in block.iter_rows() {
            self.table.push_row(r);
        }
    }

    pub fn rows(&self) -> usize {
        self.table.rows()
    }

    pub fn row(&self, r: usize) -> &[Idx] {
        self.table.row(r)
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [Idx] {
        self.table.row_mut(r)
    }

    pub fn get(&self, r: usize, c: usize) -> Idx {
        self.table.row(r)[c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Idx) {
        self.table.row_mut(r)[c] = v;
    }

    pub fn nb_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Block holding unified row `r` and the row within it.
    pub fn locate(&self, r: usize) -> Result<(usize, usize)> {
        if r >= self.rows() {
            return Err(Error::Index {
                index: r,
                size: self.rows(),
            });
        }
        let b = self
            .blocks
            .partition_point(|blk| blk.first_row + blk.rows <= r);
        Ok((b, r - self.blocks[b].first_row))
    }

    /// Unified row of row `r` in block `b`.
    pub fn global_row(&self, b: usize, r: usize) -> usize {
        self.blocks[b].first_row + r
    }

    pub fn block(&self, b: usize) -> BlockView<'_> {
        let BlockRange {
            first_row,
            rows,
            cols,
        } = self.blocks[b];
        let start = self.table.offsets()[first_row];
        BlockView {
            rows,
            cols,
            first_row,
            values: &self.table.values[start..start + rows * cols],
        }
    }

    pub fn block_mut(&mut self, b: usize) -> BlockViewMut<'_> {
        let BlockRange {
            first_row,
            rows,
            cols,
        } = self.blocks[b];
        let start = self.table.offsets()[first_row];
        BlockViewMut {
            rows,
            cols,
            values: &mut self.table.values[start..start + rows * cols],
        }
    }

    pub fn as_irregular(&self) -> &IrregularConnectivity {
        &self.table
    }
}

/// Read access to one block of a [`MultiBlockConnectivity`].
#[derive(Clone, Copy, Debug)]
pub struct BlockView<'a> {
    rows: usize,
    cols: usize,
    first_row: usize,
    values: &'a [Idx],
}

impl<'a> BlockView<'a> {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Unified row of the block's first row.
    pub fn first_row(&self) -> usize {
        self.first_row
    }

    pub fn row(&self, r: usize) -> &'a [Idx] {
        &self.values[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> Idx {
        self.values[r * self.cols + c]
    }
}

/// Write access to one block of a [`MultiBlockConnectivity`].
#[derive(Debug)]
pub struct BlockViewMut<'a> {
    rows: usize,
    cols: usize,
    values: &'a mut [Idx],
}

impl BlockViewMut<'_> {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn set(&mut self, r: usize, c: usize, v: Idx) {
        assert!(r < self.rows && c < self.cols, "({r}, {c}) outside block");
        self.values[r * self.cols + c] = v;
    }

    pub fn get(&self, r: usize, c: usize) -> Idx {
        self.values[r * self.cols + c]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_rows() {
        let b = BlockConnectivity::new(2, 3, vec![0, 1, 2, 3, 4, 5]).unwrap();
        assert_eq!(b.row(1), &[3, 4, 5]);
        assert_eq!(BlockConnectivity::new(0, 3, vec![]).unwrap().rows(), 0);
        assert!(BlockConnectivity::new(2, 2, vec![0]).is_err());
        let s = BlockConnectivity::new(1, 2, vec![4, MISSING]).unwrap();
        assert!(s.is_missing(0, 1) && !s.is_missing(0, 0));
    }

    #[test]
    fn irregular_offsets() {
        let c = IrregularConnectivity::from_rows([&[1, 2, 3][..], &[4][..], &[][..]]);
        assert_eq!(c.rows(), 3);
        assert_eq!(c.row(1), &[4]);
        assert_eq!(c.row_len(2), 0);
        assert_eq!(c.offsets(), &[0, 3, 4, 4]);
        assert!(IrregularConnectivity::new(vec![0, 3], vec![1, 2]).is_err());
        assert!(IrregularConnectivity::new(vec![1, 2], vec![1, 2]).is_err());
    }

    fn quads_then_triangles() -> MultiBlockConnectivity {
        let mut m = MultiBlockConnectivity::new();
        m.add_block(&BlockConnectivity::new(2, 4, (0..8).collect()).unwrap());
        m.add_block(&BlockConnectivity::new(3, 3, (10..19).collect()).unwrap());
        m
    }

    #[test]
    fn multiblock_unified_rows() {
        let m = quads_then_triangles();
        assert_eq!(m.rows(), 5);
        assert_eq!(m.row(2).len(), 3);
        assert_eq!(m.row(2), &[10, 11, 12]);
        assert_eq!(m.locate(3).unwrap(), (1, 1));
        assert_eq!(m.global_row(1, 2), 4);
        assert!(m.locate(5).is_err());
    }

    #[test]
    fn multiblock_shared_storage() {
        let mut m = quads_then_triangles();
        m.set(3, 0, 9);
        assert_eq!(m.block(1).get(1, 0), 9);
        m.block_mut(0).set(1, 3, 42);
        assert_eq!(m.get(1, 3), 42);
    }

    #[test]
    fn single_block_matches_unified() {
        let mut m = MultiBlockConnectivity::new();
        let b = BlockConnectivity::new(3, 2, vec![1, 2, 3, 4, 5, 6]).unwrap();
        m.add_block(&b);
        for r in 0..3 {
            assert_eq!(m.row(r), b.row(r));
            assert_eq!(m.block(0).row(r), b.row(r));
        }
    }
}
