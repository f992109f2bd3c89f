//! Uniform sample grids on boxes in `R^n`.
//!
//! A [`GridGeometry`] fixes per-axis sample counts, spacings and origins; a
//! [`Grid`] pairs a geometry with row-major samples (last axis fastest).
//! Phase-space grids use the axis order `(x_1, y_1, ..., x_d, y_d)`, which is
//! the usual identification of `C^d` with `R^{2d}`.

mod diff;
mod io;
mod partition;
mod signals;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use diff::{central_difference, masked_gradient};
pub use io::{decode_grid, encode_grid, read_grid, write_grid, AnyGrid, FormatError, GridValue};
pub use partition::DomainPartition;
pub use signals::{make_analytic, make_gaussian, make_hermite, AnalyticSignalSpec, Bump};

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("invalid grid geometry: {0}")]
    InvalidGeometry(String),
    #[error("rank mismatch: expected {expected}, found {found}")]
    RankMismatch { expected: usize, found: usize },
    #[error("value count {found} does not match geometry size {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("non-finite sample at index {0}")]
    NonFinite(usize),
    #[error("geometries differ")]
    GeometryMismatch,
    #[error("invalid signal parameters: {0}")]
    InvalidSignal(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
}

/// Shape, spacing and placement of a uniform box grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGeometry", into = "RawGeometry")]
pub struct GridGeometry {
    extents: Vec<usize>,
    spacing: Vec<f64>,
    origin: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawGeometry {
    extents: Vec<usize>,
    spacing: Vec<f64>,
    origin: Vec<f64>,
}

impl TryFrom<RawGeometry> for GridGeometry {
    type Error = GridError;

    fn try_from(raw: RawGeometry) -> Result<Self, GridError> {
        GridGeometry::new(raw.extents, raw.spacing, raw.origin)
    }
}

impl From<GridGeometry> for RawGeometry {
    fn from(g: GridGeometry) -> Self {
        RawGeometry { extents: g.extents, spacing: g.spacing, origin: g.origin }
    }
}

impl GridGeometry {
    pub fn new(extents: Vec<usize>, spacing: Vec<f64>, origin: Vec<f64>) -> Result<Self, GridError> {
        let rank = extents.len();
        if rank == 0 || rank > u8::MAX as usize {
            return Err(GridError::InvalidGeometry(format!("rank {rank} out of range")));
        }
        if spacing.len() != rank || origin.len() != rank {
            return Err(GridError::InvalidGeometry(
                "extents, spacing and origin must have the same length".into(),
            ));
        }
        if let Some(e) = extents.iter().find(|&&e| e < 2) {
            return Err(GridError::InvalidGeometry(format!("extent {e} < 2")));
        }
        if spacing.iter().any(|&h| !(h.is_finite() && h > 0.0)) {
            return Err(GridError::InvalidGeometry("spacings must be finite and positive".into()));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(GridError::InvalidGeometry("origin must be finite".into()));
        }
        extents
            .iter()
            .try_fold(1usize, |acc, &e| acc.checked_mul(e))
            .ok_or_else(|| GridError::InvalidGeometry("grid size overflows".into()))?;
        Ok(Self { extents, spacing, origin })
    }

    /// `rank` axes, each with `extent` samples spanning `[lo, hi]` inclusively.
    pub fn cube(rank: usize, extent: usize, lo: f64, hi: f64) -> Result<Self, GridError> {
        if extent < 2 || !(hi > lo) {
            return Err(GridError::InvalidGeometry(format!("bad cube [{lo}, {hi}] x {extent}")));
        }
        let h = (hi - lo) / (extent - 1) as f64;
        Self::new(vec![extent; rank], vec![h; rank], vec![lo; rank])
    }

    /// Grid centred on zero along every axis: `2·half_count + 1` samples with
    /// spacing `h`, so that `0` is a sample and the grid is symmetric.
    pub fn centered(rank: usize, half_count: usize, h: f64) -> Result<Self, GridError> {
        let n = 2 * half_count + 1;
        Self::new(vec![n; rank], vec![h; rank], vec![-(half_count as f64) * h; rank])
    }

    pub fn rank(&self) -> usize {
        self.extents.len()
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    /// Total number of samples.
    pub fn len(&self) -> usize {
        self.extents.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    #[inline]
    pub fn coordinate(&self, axis: usize, index: usize) -> f64 {
        self.origin[axis] + index as f64 * self.spacing[axis]
    }

    pub fn axis_coordinates(&self, axis: usize) -> Vec<f64> {
        (0..self.extents[axis]).map(|i| self.coordinate(axis, i)).collect()
    }

    /// Row-major strides (last axis has stride 1).
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.rank()];
        for a in (0..self.rank().saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * self.extents[a + 1];
        }
        strides
    }

    /// Multi-index of a flat row-major index.
    pub fn unravel(&self, mut flat: usize, out: &mut [usize]) {
        for a in (0..self.rank()).rev() {
            out[a] = flat % self.extents[a];
            flat /= self.extents[a];
        }
    }

    pub fn ravel(&self, index: &[usize]) -> usize {
        index.iter().zip(&self.extents).fold(0, |acc, (&i, &e)| acc * e + i)
    }

    /// Coordinates of a flat index.
    pub fn point(&self, flat: usize, out: &mut [f64]) {
        let mut rem = flat;
        for a in (0..self.rank()).rev() {
            let i = rem % self.extents[a];
            rem /= self.extents[a];
            out[a] = self.coordinate(a, i);
        }
    }

    /// Flat index of the sample nearest to `coords` (clamped to the box).
    pub fn nearest_index(&self, coords: &[f64]) -> usize {
        let idx: Vec<usize> = (0..self.rank())
            .map(|a| {
                let t = ((coords[a] - self.origin[a]) / self.spacing[a]).round();
                t.clamp(0.0, (self.extents[a] - 1) as f64) as usize
            })
            .collect();
        self.ravel(&idx)
    }

    /// Whether axis `axis` is symmetric about zero (sample `i` mirrors sample `n-1-i`).
    pub fn is_symmetric_axis(&self, axis: usize) -> bool {
        let n = self.extents[axis];
        let last = self.coordinate(axis, n - 1);
        (self.origin[axis] + last).abs() <= 1e-12 * self.spacing[axis].max(last.abs())
    }

    pub fn require_rank(&self, rank: usize) -> Result<(), GridError> {
        if self.rank() != rank {
            return Err(GridError::RankMismatch { expected: rank, found: self.rank() });
        }
        Ok(())
    }

    /// Number of complex variables `d` of a phase-space geometry of rank `2d`.
    pub fn phase_dimension(&self) -> Result<usize, GridError> {
        if self.rank() % 2 != 0 {
            return Err(GridError::InvalidGeometry(format!(
                "phase-space rank {} is not even",
                self.rank()
            )));
        }
        Ok(self.rank() / 2)
    }

    pub fn same_as(&self, other: &Self) -> Result<(), GridError> {
        if self != other {
            return Err(GridError::GeometryMismatch);
        }
        Ok(())
    }
}

/// Samples on a [`GridGeometry`] in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    geometry: GridGeometry,
    values: Vec<T>,
}

/// Complex samples of a signal `f` on a box in `R^d`.
pub type SignalGrid = Grid<Complex64>;
/// Complex samples on phase space `R^{2d}`, axes `(x_1, y_1, ..., x_d, y_d)`.
pub type PhaseSpaceGrid = Grid<Complex64>;
/// Real samples (spectrograms, weights).
pub type RealGrid = Grid<f64>;

impl<T: GridValue> Grid<T> {
    pub fn new(geometry: GridGeometry, values: Vec<T>) -> Result<Self, GridError> {
        if values.len() != geometry.len() {
            return Err(GridError::LengthMismatch { expected: geometry.len(), found: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite_value()) {
            return Err(GridError::NonFinite(i));
        }
        Ok(Self { geometry, values })
    }

    /// Evaluate `f` at every sample coordinate.
    pub fn from_fn(geometry: GridGeometry, mut f: impl FnMut(&[f64]) -> T) -> Result<Self, GridError> {
        let mut point = vec![0.0; geometry.rank()];
        let values = (0..geometry.len())
            .map(|i| {
                geometry.point(i, &mut point);
                f(&point)
            })
            .collect();
        Self::new(geometry, values)
    }

    pub fn zeros(geometry: GridGeometry) -> Self {
        let values = vec![T::zero_value(); geometry.len()];
        Self { geometry, values }
    }
}

impl<T> Grid<T> {
    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Grid<U> {
        Grid { geometry: self.geometry.clone(), values: self.values.iter().map(f).collect() }
    }
}

impl SignalGrid {
    /// Multiply every sample by `c`.
    pub fn scaled(&self, c: Complex64) -> Self {
        self.map(|v| v * c)
    }

    /// Maximum modulus over samples lying on the faces of the box.
    pub fn boundary_max_abs(&self) -> f64 {
        let g = &self.geometry;
        let mut idx = vec![0usize; g.rank()];
        let mut max: f64 = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            g.unravel(i, &mut idx);
            if idx.iter().zip(g.extents()).any(|(&k, &n)| k == 0 || k == n - 1) {
                max = max.max(v.norm());
            }
        }
        max
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m: f64, v| m.max(v.norm()))
    }
}
