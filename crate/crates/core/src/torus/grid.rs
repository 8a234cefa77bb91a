use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::form_algebra::{MAX_DIM, MIN_DIM};

/// Uniform periodic grid on `C^n / (Z^n + iZ^n)`.
///
/// Coordinates are `z^j = x^j + i y^j` with real axes ordered
/// `(x^1, y^1, x^2, y^2, …)`. Fields may vary in only the first `active`
/// complex coordinates and are constant along the rest; the grid then stores
/// `samples^(2·active)` points, row-major with the last axis fastest.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TorusGrid {
    n: usize,
    samples: usize,
    active: usize,
}

impl TorusGrid {
    pub fn new(n: usize, samples: usize, active: usize) -> Result<Self> {
        if !(MIN_DIM..=MAX_DIM).contains(&n) {
            return Err(Error::Dimension(n));
        }
        if !samples.is_power_of_two() || !(4..=64).contains(&samples) {
            return Err(Error::Grid(format!(
                "samples per axis must be a power of two in 4..=64, got {samples}"
            )));
        }
        if active == 0 || active > n {
            return Err(Error::Grid(format!(
                "active complex coordinates must be in 1..={n}, got {active}"
            )));
        }
        let len = (samples as u128).pow(2 * active as u32);
        if len > 1 << 26 {
            return Err(Error::Grid(format!(
                "{len} grid points exceeds the supported size"
            )));
        }
        Ok(Self { n, samples, active })
    }

    /// Grid varying in every complex coordinate.
    pub fn full(n: usize, samples: usize) -> Result<Self> {
        Self::new(n, samples, n)
    }

    /// Complex dimension of the torus.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Samples per real axis.
    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn active(&self) -> usize {
        self.active
    }

    pub fn real_axes(&self) -> usize {
        2 * self.active
    }

    pub fn len(&self) -> usize {
        self.samples.pow(self.real_axes() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.samples as f64
    }

    /// Stride of real axis `axis` in the flat layout.
    pub fn stride(&self, axis: usize) -> usize {
        self.samples.pow((self.real_axes() - 1 - axis) as u32)
    }

    /// Per-axis integer indices of a flat index.
    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let d = self.real_axes();
        let mut idx = vec![0; d];
        for a in (0..d).rev() {
            idx[a] = flat % self.samples;
            flat /= self.samples;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .fold(0, |acc, &i| acc * self.samples + i % self.samples)
    }

    /// Point coordinates in `[0,1)` for each active real axis.
    pub fn coords(&self, flat: usize) -> Vec<f64> {
        let h = self.spacing();
        self.multi_index(flat)
            .into_iter()
            .map(|i| i as f64 * h)
            .collect()
    }

    /// Signed wavenumber of FFT bin `bin` (`N/2` is reported as `+N/2`).
    pub fn wavenumber(&self, bin: usize) -> i64 {
        let n = self.samples as i64;
        let k = bin as i64;
        if k <= n / 2 {
            k
        } else {
            k - n
        }
    }

    pub fn is_nyquist(&self, bin: usize) -> bool {
        bin == self.samples / 2
    }
}
