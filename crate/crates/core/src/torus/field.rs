use nalgebra::DMatrix;

use super::TorusGrid;
use crate::error::{Error, Result};
use crate::form_algebra::HermitianMatrix;
use crate::par;
use crate::C64;

/// Real samples of a periodic function on a [`TorusGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: TorusGrid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Shape("non-finite field value".into()));
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_vec_unchecked(grid: TorusGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: TorusGrid, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.len()],
        }
    }

    /// Samples `f` at the coordinates of every grid point.
    pub fn from_fn(grid: TorusGrid, f: impl Fn(&[f64]) -> f64 + Sync + Send) -> Self {
        let values = par::map_indexed(grid.len(), |i| f(&grid.coords(i)));
        Self { grid, values }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Grid average, equal to the integral over the unit-volume torus.
    pub fn mean(&self) -> f64 {
        par::pairwise_sum(&self.values) / self.values.len() as f64
    }

    pub fn sup(&self) -> f64 {
        par::max(&self.values)
    }

    pub fn inf(&self) -> f64 {
        par::min(&self.values)
    }

    pub fn max_abs(&self) -> f64 {
        par::max_abs(&self.values)
    }

    /// `f − sup f`; the result has supremum exactly zero.
    pub fn sup_normalize(&self) -> Self {
        self.shifted(-self.sup())
    }

    /// `f − mean f`.
    pub fn mean_normalize(&self) -> Self {
        self.shifted(-self.mean())
    }

    pub fn shifted(&self, c: f64) -> Self {
        self.map(|v| v + c)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64 + Sync + Send) -> Self {
        let values = par::map_indexed(self.len(), |i| f(self.values[i]));
        Self {
            grid: self.grid,
            values,
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64 + Sync + Send) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = par::map_indexed(self.len(), |i| f(self.values[i], other.values[i]));
        Ok(Self {
            grid: self.grid,
            values,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    /// `self + s · other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a + s * b)
    }

    /// Largest pointwise `|self − other|`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    /// Cyclic translation by whole grid cells along each active real axis.
    pub fn translate(&self, shift: &[isize]) -> Self {
        let n = self.grid.samples() as isize;
        let values = par::map_indexed(self.len(), |i| {
            let idx: Vec<usize> = self
                .grid
                .multi_index(i)
                .iter()
                .enumerate()
                .map(|(a, &k)| {
                    (k as isize - shift.get(a).copied().unwrap_or(0)).rem_euclid(n) as usize
                })
                .collect();
            self.values[self.grid.flat_index(&idx)]
        });
        Self {
            grid: self.grid,
            values,
        }
    }

    pub(crate) fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::Shape(format!(
                "grid mismatch: {:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        Ok(())
    }
}

/// Hermitian n×n matrix at every grid point, packed row-major per point.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixField {
    grid: TorusGrid,
    data: Vec<C64>,
}

impl MatrixField {
    /// `data` holds `n·n` complex entries per point; each block is Hermitianized.
    pub fn new(grid: TorusGrid, data: Vec<C64>) -> Result<Self> {
        let n = grid.n();
        if data.len() != grid.len() * n * n {
            return Err(Error::Shape(format!(
                "{} entries for {} points of {n}x{n} matrices",
                data.len(),
                grid.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Shape("non-finite matrix entry".into()));
        }
        let mut data = data;
        for block in data.chunks_mut(n * n) {
            for i in 0..n {
                block[i * n + i].im = 0.0;
                for j in i + 1..n {
                    let avg = (block[i * n + j] + block[j * n + i].conj()) * 0.5;
                    block[i * n + j] = avg;
                    block[j * n + i] = avg.conj();
                }
            }
        }
        Ok(Self { grid, data })
    }

    pub fn from_fn(
        grid: TorusGrid,
        f: impl Fn(usize) -> HermitianMatrix + Sync + Send,
    ) -> Result<Self> {
        let n = grid.n();
        let blocks = par::map_indexed(grid.len(), f);
        let mut data = Vec::with_capacity(grid.len() * n * n);
        for b in &blocks {
            if b.dim() != n {
                return Err(Error::Shape(format!(
                    "point matrix is {}x{}, expected {n}x{n}",
                    b.dim(),
                    b.dim()
                )));
            }
            for i in 0..n {
                for j in 0..n {
                    data.push(b.entry(i, j));
                }
            }
        }
        Ok(Self { grid, data })
    }

    pub fn constant(grid: TorusGrid, h: &HermitianMatrix) -> Result<Self> {
        Self::from_fn(grid, |_| h.clone())
    }

    /// `φ(x) · h` for a positive scalar profile `φ`.
    pub fn conformal(h: &HermitianMatrix, factor: &ScalarField) -> Result<Self> {
        let grid = *factor.grid();
        Self::from_fn(grid, |i| h.scale(factor.values()[i]))
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn raw(&self) -> &[C64] {
        &self.data
    }

    pub fn at(&self, i: usize) -> HermitianMatrix {
        let n = self.n();
        let block = &self.data[i * n * n..(i + 1) * n * n];
        HermitianMatrix::hermitianized(DMatrix::from_row_slice(n, n, block))
    }

    /// Applies `f` pointwise to produce a scalar field.
    pub fn map_scalar(&self, f: impl Fn(&HermitianMatrix) -> f64 + Sync + Send) -> ScalarField {
        let values = par::map_indexed(self.grid.len(), |i| f(&self.at(i)));
        ScalarField::from_vec_unchecked(self.grid, values)
    }

    pub fn map(
        &self,
        f: impl Fn(&HermitianMatrix) -> HermitianMatrix + Sync + Send,
    ) -> Result<Self> {
        Self::from_fn(self.grid, |i| f(&self.at(i)))
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::Shape("grid mismatch".into()));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Largest deviation from Hermitian symmetry over all points.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.n();
        self.data
            .chunks(n * n)
            .map(|b| {
                let mut worst: f64 = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        worst = worst.max((b[i * n + j] - b[j * n + i].conj()).norm());
                    }
                }
                worst
            })
            .fold(0.0, f64::max)
    }

    /// Smallest eigenvalue over all points.
    pub fn min_eigenvalue(&self) -> f64 {
        let mins = par::map_indexed(self.grid.len(), |i| self.at(i).min_eigenvalue());
        par::min(&mins)
    }
}
