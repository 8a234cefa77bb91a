//! Continuity-method solver for `(u, b)`.

mod continuation;
pub mod krylov;
mod operator;
mod problem;

pub use continuation::{
    continuity_solve, linearized_apply, newton_refine, newton_solve_linear, residual,
    uniform_schedule, SolverOptions, SolverState, StepRecord,
};
pub use krylov::{GmresOptions, GmresStats};
pub use operator::{Evaluation, Evaluator, Linearization};
pub use problem::{
    conformal_metric_field, estimate_b_bounds, gtilde_field, manufacture, min_cone_margin,
    spectral_tail_ratio, ProblemSpec, MANUFACTURE_MARGIN,
};
