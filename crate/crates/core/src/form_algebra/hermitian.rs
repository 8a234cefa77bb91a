use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

pub const MIN_DIM: usize = 2;
pub const MAX_DIM: usize = 8;

pub(crate) fn check_dim(n: usize) -> Result<()> {
    if (MIN_DIM..=MAX_DIM).contains(&n) {
        Ok(())
    } else {
        Err(Error::Dimension(n))
    }
}

/// Dense n×n complex Hermitian matrix.
///
/// Holds the pointwise coefficients `a_{ij̄}` of a real (1,1) form
/// `i a_{ij̄} dz^i ∧ dz̄^j`. Inputs are Hermitianized as `(A + A*)/2` on
/// construction, so symmetry holds exactly.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HermitianRepr", into = "HermitianRepr")]
pub struct HermitianMatrix {
    m: DMatrix<C64>,
}

impl HermitianMatrix {
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Shape(format!(
                "{}x{} is not square",
                m.nrows(),
                m.ncols()
            )));
        }
        check_dim(m.nrows())?;
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Shape("non-finite entry".into()));
        }
        Ok(Self::hermitianized(m))
    }

    /// Skips the dimension check; used for values produced by other operations.
    pub(crate) fn hermitianized(m: DMatrix<C64>) -> Self {
        let adj = m.adjoint();
        Self {
            m: (m + adj) * C64::new(0.5, 0.0),
        }
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize, usize) -> C64) -> Result<Self> {
        Self::new(DMatrix::from_fn(n, n, f))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        Self::from_fn(n, |i, j| {
            if i == j {
                C64::new(diag[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// Builds from separate real and imaginary row-major entry lists.
    pub fn from_parts(re: &[Vec<f64>], im: Option<&[Vec<f64>]>) -> Result<Self> {
        let n = re.len();
        if re.iter().any(|row| row.len() != n) {
            return Err(Error::Shape("real part is not square".into()));
        }
        if let Some(im) = im {
            if im.len() != n || im.iter().any(|row| row.len() != n) {
                return Err(Error::Shape(
                    "imaginary part does not match real part".into(),
                ));
            }
        }
        Self::from_fn(n, |i, j| C64::new(re[i][j], im.map_or(0.0, |im| im[i][j])))
    }

    pub fn identity(n: usize) -> Self {
        Self {
            m: DMatrix::identity(n, n),
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            m: DMatrix::zeros(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.m[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.m
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.m[(i, i)].re).sum()
    }

    pub fn det(&self) -> f64 {
        self.m.determinant().re
    }

    /// Entrywise transpose; for Hermitian matrices this is the complex conjugate.
    pub fn transpose(&self) -> Self {
        Self {
            m: self.m.transpose(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            m: &self.m * C64::new(s, 0.0),
        }
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        if self.dim() == 2 {
            let (a, d, b) = (self.m[(0, 0)].re, self.m[(1, 1)].re, self.m[(0, 1)].norm());
            let mid = 0.5 * (a + d);
            let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
            return vec![mid - rad, mid + rad];
        }
        let mut ev: Vec<f64> = SymmetricEigen::new(self.m.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.m
            .iter()
            .zip(other.m.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `(tr A) I − A`, the Euclidean trace reversal.
    pub fn euclidean_trace_reversal(&self) -> Self {
        let n = self.dim();
        Self {
            m: DMatrix::identity(n, n) * C64::new(self.trace(), 0.0) - &self.m,
        }
    }

    pub fn try_inverse(&self) -> Result<DMatrix<C64>> {
        self.m.clone().try_inverse().ok_or(Error::NotInvertible)
    }
}

impl fmt::Debug for HermitianMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HermitianMatrix")
            .field("n", &self.dim())
            .field("entries", &self.m.as_slice())
            .finish()
    }
}

impl Add for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn add(self, rhs: Self) -> HermitianMatrix {
        HermitianMatrix {
            m: &self.m + &rhs.m,
        }
    }
}

impl Sub for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn sub(self, rhs: Self) -> HermitianMatrix {
        HermitianMatrix {
            m: &self.m - &rhs.m,
        }
    }
}

impl Mul<f64> for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn mul(self, rhs: f64) -> HermitianMatrix {
        self.scale(rhs)
    }
}

impl Neg for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn neg(self) -> HermitianMatrix {
        self.scale(-1.0)
    }
}

#[derive(Serialize, Deserialize)]
struct HermitianRepr {
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl TryFrom<HermitianRepr> for HermitianMatrix {
    type Error = Error;
    fn try_from(r: HermitianRepr) -> Result<Self> {
        HermitianMatrix::from_parts(&r.re, Some(&r.im))
    }
}

impl From<HermitianMatrix> for HermitianRepr {
    fn from(h: HermitianMatrix) -> Self {
        let n = h.dim();
        HermitianRepr {
            re: (0..n)
                .map(|i| (0..n).map(|j| h.m[(i, j)].re).collect())
                .collect(),
            im: (0..n)
                .map(|i| (0..n).map(|j| h.m[(i, j)].im).collect())
                .collect(),
        }
    }
}

/// A positive definite Hermitian matrix with its inverse, determinant and
/// Cholesky factor precomputed.
#[derive(Clone, Debug)]
pub struct Metric {
    matrix: HermitianMatrix,
    inverse: DMatrix<C64>,
    det: f64,
    lower: DMatrix<C64>,
    lower_inv: DMatrix<C64>,
}

impl Metric {
    /// Fails with [`Error::NotInvertible`] for singular or indefinite input.
    pub fn new(matrix: HermitianMatrix) -> Result<Self> {
        let n = matrix.dim();
        let a = &matrix.m;
        let floor = 4.0 * f64::EPSILON * matrix.max_abs_entry();
        let mut lower = DMatrix::<C64>::zeros(n, n);
        for j in 0..n {
            let pivot = a[(j, j)].re - (0..j).map(|k| lower[(j, k)].norm_sqr()).sum::<f64>();
            if !(pivot > floor) || !pivot.is_finite() {
                return Err(Error::NotInvertible);
            }
            let d = pivot.sqrt();
            lower[(j, j)] = C64::new(d, 0.0);
            for i in j + 1..n {
                let mut z = a[(i, j)];
                for k in 0..j {
                    z -= lower[(i, k)] * lower[(j, k)].conj();
                }
                lower[(i, j)] = z / d;
            }
        }
        let det: f64 = (0..n).map(|i| lower[(i, i)].re.powi(2)).product();
        let mut lower_inv = DMatrix::<C64>::zeros(n, n);
        for c in 0..n {
            lower_inv[(c, c)] = C64::new(1.0 / lower[(c, c)].re, 0.0);
            for i in c + 1..n {
                let mut z = C64::new(0.0, 0.0);
                for k in c..i {
                    z -= lower[(i, k)] * lower_inv[(k, c)];
                }
                lower_inv[(i, c)] = z / lower[(i, i)].re;
            }
        }
        let inverse = lower_inv.adjoint() * &lower_inv;
        Ok(Self {
            matrix,
            inverse,
            det,
            lower,
            lower_inv,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::new(HermitianMatrix::identity(n)).expect("identity is positive definite")
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    /// `G^{-1}` as a matrix; the upper-index tensor is its transpose.
    pub fn inverse(&self) -> &DMatrix<C64> {
        &self.inverse
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn cholesky_lower(&self) -> &DMatrix<C64> {
        &self.lower
    }

    /// `L^{-1} A L^{-*}` where `G = L L*`; its spectrum is the spectrum of `A` relative to `G`.
    pub fn congruence(&self, a: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix::hermitianized(&self.lower_inv * &a.m * self.lower_inv.adjoint())
    }
}

impl From<Metric> for HermitianMatrix {
    fn from(g: Metric) -> Self {
        g.matrix
    }
}
