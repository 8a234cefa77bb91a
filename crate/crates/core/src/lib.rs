//! Monge-Ampère equation for (n−1)-plurisubharmonic functions on flat complex tori.
//!
//! The crate solves
//!
//! ```text
//! (ω_h + (1/(n−1))((Δu)ω − i∂∂̄u))^n = e^{F+b} ω^n,   ω_h + … > 0
//! ```
//!
//! for the pair `(u, b)` on `C^n / (Z^n + iZ^n)` with a constant Kähler metric `ω`,
//! and ships executable checks of the pointwise algebra behind the equation:
//! Hodge star correspondences between (1,1) and (n−1,n−1) forms, the determinant
//! convention for (n−1,n−1) forms, (n−1)-th roots, and the eigenvalue relations of
//! the linearized operator.
//!
//! Module map:
//!
//! * [`form_algebra`] — pointwise linear algebra of (1,1) and (n−1,n−1) forms.
//! * [`torus`] — periodic grids, scalar/matrix fields, spectral derivatives, field files.
//! * [`solver`] — Newton iteration inside a continuity path in `t`.
//! * [`verifier`] — identity certification and estimate diagnostics.
//!
//! Grid-point loops run on rayon when the `parallel` feature (default) is on and
//! sequentially otherwise. All reductions use a fixed pairwise tree, so results do
//! not depend on the thread count.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod form_algebra;
pub mod par;
pub mod sample;
pub mod solver;
pub mod torus;
pub mod verifier;

pub use error::{Error, Result};
pub use form_algebra::{FormTopMinusOne, HermitianMatrix, Metric};
pub use solver::{ProblemSpec, SolverOptions, SolverState};
pub use torus::{MatrixField, ScalarField, Spectral, TorusGrid};
pub use verifier::CheckReport;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
