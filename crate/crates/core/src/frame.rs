//! The discretized 1D state grid and per-step measurement frames.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GridError {
    #[error("grid bounds must satisfy min < max, got [{min}, {max}]")]
    EmptyGrid { min: i64, max: i64 },
    #[error("frame has {got} entries but the grid has {expected} cells")]
    FrameLength { expected: usize, got: usize },
}

/// Integer cells `min..=max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Grid {
    min: i64,
    max: i64,
}

impl Grid {
    pub fn new(min: i64, max: i64) -> Result<Self, GridError> {
        if min >= max {
            return Err(GridError::EmptyGrid { min, max });
        }
        Ok(Self { min, max })
    }

    /// The 1001-cell grid `{-500, ..., 500}`.
    pub fn standard() -> Self {
        Self {
            min: -500,
            max: 500,
        }
    }

    pub fn min(&self) -> i64 {
        self.min
    }

    pub fn max(&self) -> i64 {
        self.max
    }

    pub fn len(&self) -> usize {
        (self.max - self.min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell(&self, index: usize) -> i64 {
        self.min + index as i64
    }

    pub fn cells(&self) -> impl DoubleEndedIterator<Item = i64> + Clone {
        self.min..=self.max
    }

    pub fn index_of(&self, cell: i64) -> Option<usize> {
        (self.min..=self.max)
            .contains(&cell)
            .then(|| (cell - self.min) as usize)
    }

    /// Index of the grid cell nearest to `x`, clamped to the grid.
    pub fn nearest_index(&self, x: f64) -> usize {
        let c = x.round().clamp(self.min as f64, self.max as f64);
        (c as i64 - self.min) as usize
    }

    /// Clamps a continuous state into `[min, max]`.
    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.min as f64, self.max as f64)
    }

    /// Index range of cells within `half_width` of `center`, intersected with
    /// the grid. Empty when the window misses the grid entirely.
    pub fn window(&self, center: i64, half_width: usize) -> std::ops::Range<usize> {
        let w = half_width as i64;
        let lo = center.saturating_sub(w).max(self.min);
        let hi = center.saturating_add(w).min(self.max);
        if lo > hi {
            return 0..0;
        }
        (lo - self.min) as usize..(hi - self.min + 1) as usize
    }
}

impl Default for Grid {
    fn default() -> Self {
        Self::standard()
    }
}

/// Detector scores for one time step, one value per grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementFrame {
    grid: Grid,
    values: Vec<f64>,
}

impl MeasurementFrame {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != grid.len() {
            return Err(GridError::FrameLength {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at an integer cell, if the cell is on the grid.
    pub fn at(&self, cell: i64) -> Option<f64> {
        self.grid.index_of(cell).map(|i| self.values[i])
    }
}
