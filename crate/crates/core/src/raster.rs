//! Dense row-major 2D rasters indexed by grid cell.

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

/// A grid cell as `(px, py)`: `px` is the row index, `py` the column index.
pub type Cell = (usize, usize);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Raster<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Clone> Raster<T> {
    pub fn filled(rows: usize, cols: usize, value: T) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }
}

impl<T> Raster<T> {
    /// Wraps row-major `data`. Returns `None` if the length does not match.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Option<Self> {
        (data.len() == rows * cols).then_some(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(Cell) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f((r, c)));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn offset(&self, (r, c): Cell) -> usize {
        debug_assert!(r < self.rows && c < self.cols);
        r * self.cols + c
    }

    #[inline]
    pub fn cell_of(&self, offset: usize) -> Cell {
        (offset / self.cols, offset % self.cols)
    }

    pub fn contains(&self, r: i64, c: i64) -> bool {
        r >= 0 && c >= 0 && (r as usize) < self.rows && (c as usize) < self.cols
    }

    pub fn get(&self, (r, c): Cell) -> Option<&T> {
        (r < self.rows && c < self.cols).then(|| &self.data[r * self.cols + c])
    }

    /// Iterates `(cell, value)` in row-major order.
    pub fn iter_cells(&self) -> impl Iterator<Item = (Cell, &T)> + '_ {
        let cols = self.cols;
        self.data
            .iter()
            .enumerate()
            .map(move |(i, v)| ((i / cols, i % cols), v))
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Raster<U> {
        Raster {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<T> Index<Cell> for Raster<T> {
    type Output = T;

    #[inline]
    fn index(&self, cell: Cell) -> &T {
        &self.data[self.offset(cell)]
    }
}

impl<T> IndexMut<Cell> for Raster<T> {
    #[inline]
    fn index_mut(&mut self, cell: Cell) -> &mut T {
        let o = self.offset(cell);
        &mut self.data[o]
    }
}

/// Binary mask over the grid.
pub type Mask = Raster<bool>;

impl Raster<bool> {
    pub fn count_true(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn true_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.iter_cells().filter(|(_, &b)| b).map(|(c, _)| c)
    }

    /// Tight bounding box as `(row_min, col_min, row_max, col_max)` inclusive.
    pub fn bounds(&self) -> Option<(usize, usize, usize, usize)> {
        let mut b: Option<(usize, usize, usize, usize)> = None;
        for (r, c) in self.true_cells() {
            b = Some(match b {
                None => (r, c, r, c),
                Some((r0, c0, r1, c1)) => (r0.min(r), c0.min(c), r1.max(r), c1.max(c)),
            });
        }
        b
    }
}

/// Dense `rows × cols × channels` tensor, channel-fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tensor3<T> {
    rows: usize,
    cols: usize,
    channels: usize,
    data: Vec<T>,
}

impl<T: Clone> Tensor3<T> {
    pub fn filled(rows: usize, cols: usize, channels: usize, value: T) -> Self {
        Self {
            rows,
            cols,
            channels,
            data: vec![value; rows * cols * channels],
        }
    }
}

impl<T> Tensor3<T> {
    pub fn from_vec(rows: usize, cols: usize, channels: usize, data: Vec<T>) -> Option<Self> {
        (data.len() == rows * cols * channels).then_some(Self {
            rows,
            cols,
            channels,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.rows, self.cols, self.channels)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn pixel(&self, (r, c): Cell) -> &[T] {
        let o = (r * self.cols + c) * self.channels;
        &self.data[o..o + self.channels]
    }

    #[inline]
    pub fn pixel_mut(&mut self, (r, c): Cell) -> &mut [T] {
        let o = (r * self.cols + c) * self.channels;
        &mut self.data[o..o + self.channels]
    }
}
