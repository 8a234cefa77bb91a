//! Reusable numerical experiments.

use std::f64::consts::PI;

use pshma_core::sample::stream_rng;
use pshma_core::solver::{continuity_solve, linearized_apply, residual, SolverOptions, SolverState};
use pshma_core::{HermitianMatrix, MatrixField, Metric, ProblemSpec, ScalarField, TorusGrid};
use rand::Rng;

pub const FD_EPS: [f64; 3] = [1e-3, 1e-4, 1e-5];

/// A random smooth direction `(v, db)` built from low Fourier modes.
pub fn random_direction(grid: TorusGrid, seed: u64, stream: u64) -> (ScalarField, f64) {
    let mut rng = stream_rng(seed, stream);
    let terms: Vec<(usize, f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.random_range(0..grid.real_axes()),
                rng.random_range(1..=3) as f64,
                rng.random_range(0.0..2.0 * PI),
                rng.random_range(-1.0..1.0),
            )
        })
        .collect();
    let v = ScalarField::from_fn(grid, |x| {
        terms.iter().map(|&(a, k, ph, c)| c * (2.0 * PI * k * x[a] + ph).cos()).sum()
    });
    (v, rng.random_range(-1.0..1.0))
}

/// `‖(r(u+εv, b+ε db) − r(u, b))/ε − L(v, db)‖∞` for each `ε` in [`FD_EPS`].
pub fn fd_errors(spec: &ProblemSpec, state: &SolverState, v: &ScalarField, db: f64) -> [f64; 3] {
    let base = residual(spec, &state.u, state.b, 1.0).unwrap();
    let lin = linearized_apply(spec, &state.u, v, db).unwrap();
    FD_EPS.map(|eps| {
        let moved = residual(spec, &state.u.axpy(eps, v).unwrap(), state.b + eps * db, 1.0).unwrap();
        let quotient = moved.sub(&base).unwrap().scale(1.0 / eps);
        quotient.max_abs_diff(&lin).unwrap()
    })
}

/// Observed orders `log10(e_k / e_{k+1})` between successive decades.
pub fn fd_orders(errors: &[f64; 3]) -> [f64; 2] {
    [(errors[0] / errors[1]).log10(), (errors[1] / errors[2]).log10()]
}

/// `u* = ε exp(cos 2πx¹)` on `n = 2` with `g = h = I`, `F` evaluated analytically:
/// only `u_{11̄} = u_xx/4` is nonzero, so `det g̃ = 1 + u_xx/4`.
pub fn analytic_problem(samples: usize, eps: f64) -> (ProblemSpec, ScalarField) {
    let grid = TorusGrid::new(2, samples, 1).unwrap();
    let th = |x: &[f64]| 2.0 * PI * x[0];
    let u_star = ScalarField::from_fn(grid, |x| eps * th(x).cos().exp());
    let f = ScalarField::from_fn(grid, |x| {
        let t = th(x);
        let uxx = eps * t.cos().exp() * 4.0 * PI * PI * (t.sin().powi(2) - t.cos());
        (1.0 + 0.25 * uxx).ln()
    });
    let g = Metric::identity(2);
    let h = MatrixField::constant(grid, &HermitianMatrix::identity(2)).unwrap();
    (ProblemSpec::new(g, h, f).unwrap(), u_star)
}

/// Sup-norm error of the recovered solution after mean-gauge alignment.
pub fn recovery_error(state: &SolverState, u_star: &ScalarField) -> f64 {
    state.u.max_abs_diff(&u_star.mean_normalize()).unwrap()
}

pub fn solve(spec: &ProblemSpec) -> SolverState {
    continuity_solve(spec, &SolverOptions::default()).unwrap()
}
