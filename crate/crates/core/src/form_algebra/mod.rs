//! Pointwise algebra of real (1,1) and (n−1,n−1) forms at a point of a Hermitian manifold.
//!
//! A real (1,1) form `i a_{ij̄} dz^i ∧ dz̄^j` is stored as its Hermitian coefficient
//! matrix. A real (n−1,n−1) form is stored as the matrix `Ψ` in
//!
//! ```text
//! ψ = i^{n−1} (n−1)! Σ_{i,j} sgn(i,j) Ψ_{ij̄} dz^1∧dz̄^1 ∧ ⋯ ∧ \widehat{dz^i} ∧ dz̄^i ∧ ⋯ ∧ dz^j ∧ \widehat{dz̄^j} ∧ ⋯ ∧ dz^n∧dz̄^n
//! ```
//!
//! with `sgn(i,j) = −1` for `i > j` and `+1` otherwise. With this normalization
//! `det Ψ(ω^{n−1}) = (det g)^{n−1}` exactly, and the closed forms used here are
//!
//! * `Ψ(S^{n−1}) = det(S) · S^{−T}`
//! * `Ψ(a ∧ ω^{n−2}) = det(g)/(n−1) · (tr_g(a) g^{−1} − g^{−1} a g^{−1})^T`
//! * `Ψ(*a) = det(g)/(n−1)! · (g^{−1} a g^{−1})^T`, and `*` on (n−1,n−1) forms is its inverse.
//!
//! Matrix products below are plain matrix products of coefficient arrays, so the
//! contraction `g^{ij̄} a_{ij̄}` is `tr(G^{−1} A)`.

mod hermitian;

pub use hermitian::{HermitianMatrix, Metric, MAX_DIM, MIN_DIM};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// Default tolerance for cone membership tests.
pub const CONE_TOL: f64 = 1e-10;

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Coefficient matrix `Ψ` of a real (n−1,n−1) form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormTopMinusOne {
    psi: HermitianMatrix,
}

impl FormTopMinusOne {
    pub fn from_coefficients(psi: HermitianMatrix) -> Self {
        Self { psi }
    }

    pub fn coefficients(&self) -> &HermitianMatrix {
        &self.psi
    }

    pub fn dim(&self) -> usize {
        self.psi.dim()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            psi: self.psi.scale(s),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            psi: &self.psi + &other.psi,
        }
    }

    /// Positive iff `Ψ` is positive definite; equivalent to the associated
    /// (1,1) form `*ψ/(n−1)!` being positive for any metric.
    pub fn is_positive(&self) -> bool {
        self.psi.min_eigenvalue() > 0.0
    }
}

/// `tr_ω a = g^{ij̄} a_{ij̄}`.
pub fn trace_pair(g: &Metric, a: &HermitianMatrix) -> f64 {
    (g.inverse() * a.as_matrix()).trace().re
}

/// `n(n−1) · (a ∧ b ∧ ω^{n−2}) / ω^n = (tr_g a)(tr_g b) − tr(g^{−1}a g^{−1}b)`.
pub fn wedge11_invariant(g: &Metric, a: &HermitianMatrix, b: &HermitianMatrix) -> f64 {
    let ga = g.inverse() * a.as_matrix();
    let gb = g.inverse() * b.as_matrix();
    ga.trace().re * gb.trace().re - (&ga * &gb).trace().re
}

/// Hodge star of a real (1,1) form.
pub fn hodge_star_11(g: &Metric, a: &HermitianMatrix) -> FormTopMinusOne {
    let n = g.dim();
    let inner = g.inverse() * a.as_matrix() * g.inverse();
    let psi = inner.transpose() * real(g.det() / factorial(n - 1));
    FormTopMinusOne {
        psi: HermitianMatrix::hermitianized(psi),
    }
}

/// Hodge star of a real (n−1,n−1) form; inverse of [`hodge_star_11`].
pub fn hodge_star_n1(g: &Metric, psi: &FormTopMinusOne) -> HermitianMatrix {
    let n = g.dim();
    let gm = g.matrix().as_matrix();
    let a = gm * psi.psi.as_matrix().transpose() * gm * real(factorial(n - 1) / g.det());
    HermitianMatrix::hermitianized(a)
}

/// `Ψ(S^{n−1})` for a real (1,1) form `S`. Fails if `S` is singular.
pub fn wedge_power_n_minus_one(s: &HermitianMatrix) -> Result<FormTopMinusOne> {
    let inv = s.try_inverse()?;
    let psi = inv.transpose() * real(s.det());
    Ok(FormTopMinusOne {
        psi: HermitianMatrix::hermitianized(psi),
    })
}

/// `Ψ(ω^{n−1})`.
pub fn metric_power_n_minus_one(g: &Metric) -> FormTopMinusOne {
    FormTopMinusOne {
        psi: HermitianMatrix::hermitianized(g.inverse().transpose() * real(g.det())),
    }
}

/// `Ψ(a ∧ ω^{n−2})`; for `n = 2` the power of `ω` is the empty wedge.
pub fn wedge_with_metric_power(g: &Metric, a: &HermitianMatrix) -> FormTopMinusOne {
    let n = g.dim();
    let gi = g.inverse();
    let ga = gi * a.as_matrix();
    let inner = gi * real(ga.trace().re) - &ga * gi;
    let psi = inner.transpose() * real(g.det() / (n as f64 - 1.0));
    FormTopMinusOne {
        psi: HermitianMatrix::hermitianized(psi),
    }
}

/// `(a ∧ ψ) / ω^n` for a (1,1) form `a` and an (n−1,n−1) form `ψ`.
pub fn pair_with_top(g: &Metric, a: &HermitianMatrix, psi: &FormTopMinusOne) -> f64 {
    let n = g.dim() as f64;
    (a.as_matrix() * psi.psi.as_matrix().transpose()).trace().re / (n * g.det())
}

/// Determinant of an (n−1,n−1) form, i.e. of its coefficient matrix `Ψ`.
pub fn det_form_top_minus_one(psi: &FormTopMinusOne) -> f64 {
    psi.psi.det()
}

/// The unique positive (1,1) form `S` with `S^{n−1} = ψ`.
///
/// With `H = *ψ/(n−1)!` this is `S = (det H / det g)^{1/(n−1)} · g H^{−1} g`,
/// which reduces to `(det H)^{1/(n−1)} H^{−1}` when `g = I`.
pub fn root_n_minus_one(g: &Metric, psi: &FormTopMinusOne) -> Result<Metric> {
    let n = g.dim();
    let h = hodge_star_n1(g, psi).scale(1.0 / factorial(n - 1));
    let h_metric = Metric::new(h).map_err(|_| Error::NotPositive)?;
    let scale = (h_metric.det() / g.det()).powf(1.0 / (n as f64 - 1.0));
    let gm = g.matrix().as_matrix();
    let s = gm * h_metric.inverse() * gm * real(scale);
    Metric::new(HermitianMatrix::hermitianized(s)).map_err(|_| Error::NotPositive)
}

/// `(tr_g a) g − a`.
pub fn trace_reversal(g: &Metric, a: &HermitianMatrix) -> HermitianMatrix {
    let tr = trace_pair(g, a);
    &g.matrix().scale(tr) - a
}

/// `g̃ = h + ((Δu) g − u_{ij̄}) / (n−1)` with `Δu = tr_g(hess)`.
pub fn p_operator(g: &Metric, h: &HermitianMatrix, hess: &HermitianMatrix) -> HermitianMatrix {
    let n = g.dim() as f64;
    h + &trace_reversal(g, hess).scale(1.0 / (n - 1.0))
}

/// True iff `(tr hess) I − hess ≥ −tol`, i.e. every sum of `n−1` eigenvalues of
/// the Euclidean complex Hessian is at least `−tol`.
pub fn is_n_minus_one_psh(hess: &HermitianMatrix, tol: f64) -> bool {
    hess.euclidean_trace_reversal().min_eigenvalue() >= -tol
}

/// Eigenvalues of `a` relative to `g` (ascending), via Cholesky congruence.
pub fn generalized_eigenvalues(g: &Metric, a: &HermitianMatrix) -> Vec<f64> {
    g.congruence(a).eigenvalues()
}

/// Smallest eigenvalue of `g̃` relative to `g`; positive iff `ω̃ > 0`.
pub fn cone_margin(g: &Metric, gtilde: &HermitianMatrix) -> f64 {
    generalized_eigenvalues(g, gtilde)[0]
}

/// `η = (tr_g g̃) g − (n−1) g̃`.
pub fn eta_tensor(g: &Metric, gtilde: &HermitianMatrix) -> HermitianMatrix {
    let n = g.dim() as f64;
    &g.matrix().scale(trace_pair(g, gtilde)) - &gtilde.scale(n - 1.0)
}

/// Coefficients of the linearized operator `L v = Θ^{ij̄} v_{ij̄}` at an admissible `g̃`.
///
/// Returned as the matrix `M = ((tr_{g̃} g) G^{−1} − G̃^{−1})/(n−1)`, so that
/// `L v = tr(M · Hess v)`.
pub fn theta_tensor(g: &Metric, gtilde: &Metric) -> HermitianMatrix {
    let n = g.dim() as f64;
    let tr = (gtilde.inverse() * g.matrix().as_matrix()).trace().re;
    let m: DMatrix<C64> = (g.inverse() * real(tr) - gtilde.inverse()) * real(1.0 / (n - 1.0));
    HermitianMatrix::hermitianized(m)
}
