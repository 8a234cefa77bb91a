//! Periodic fields on the flat torus `C^n / (Z^n + iZ^n)` and their spectral derivatives.

mod field;
mod grid;
pub mod io;
mod spectral;

pub use field::{MatrixField, ScalarField};
pub use grid::TorusGrid;
pub(crate) use spectral::trace_weights;
pub use spectral::{contract_constant, laplacian, spectral_hessian, Spectral};
