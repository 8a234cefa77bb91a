//! Damped Newton inside the continuity path `t ∈ [0, 1]`.

use serde::{Deserialize, Serialize};

use super::krylov::GmresOptions;
use super::operator::{Evaluation, Evaluator};
use super::problem::ProblemSpec;
use crate::error::{Error, Result};
use crate::torus::ScalarField;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Increasing times from `0` to `1`; `0` may be omitted.
    pub schedule: Vec<f64>,
    /// `‖r‖∞` accepted at `t = 1`.
    pub tol: f64,
    /// `‖r‖∞` accepted at intermediate times.
    pub intermediate_tol: f64,
    pub max_newton: usize,
    pub max_halvings: usize,
    /// First trial step length of every Newton update.
    pub initial_damping: f64,
    pub min_dt: f64,
    pub cone_floor: f64,
    pub gmres: GmresOptions,
}

impl SolverOptions {
    pub fn uniform(steps: usize) -> Self {
        Self {
            schedule: uniform_schedule(steps),
            ..Self::default()
        }
    }

    pub fn with_schedule(mut self, schedule: Vec<f64>) -> Self {
        self.schedule = schedule;
        self
    }
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            schedule: uniform_schedule(8),
            tol: 1e-10,
            intermediate_tol: 1e-6,
            max_newton: 40,
            max_halvings: 30,
            initial_damping: 1.0,
            min_dt: 1e-4,
            cone_floor: 1e-8,
            gmres: GmresOptions::default(),
        }
    }
}

pub fn uniform_schedule(steps: usize) -> Vec<f64> {
    let k = steps.max(1);
    (1..=k)
        .map(|i| if i == k { 1.0 } else { i as f64 / k as f64 })
        .collect()
}

/// One accepted point of the continuity path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub newton_iters: usize,
    pub residual_inf: f64,
    pub cone_margin: f64,
    pub b: f64,
}

#[derive(Clone, Debug)]
pub struct SolverState {
    /// Mean-zero gauge.
    pub u: ScalarField,
    pub b: f64,
    pub t: f64,
    pub residual_inf: f64,
    pub cone_margin_min: f64,
    /// Newton iterations spent at the final time.
    pub newton_iters: usize,
    /// `‖r‖∞` before each Newton update at the final time, ending with the accepted value.
    pub newton_history: Vec<f64>,
    pub records: Vec<StepRecord>,
}

impl SolverState {
    pub fn initial(spec: &ProblemSpec) -> Self {
        Self {
            u: ScalarField::zeros(*spec.grid()),
            b: 0.0,
            t: 0.0,
            residual_inf: 0.0,
            cone_margin_min: 0.0,
            newton_iters: 0,
            newton_history: Vec::new(),
            records: Vec::new(),
        }
    }

    /// `u − sup u`; `b` is unchanged by the shift.
    pub fn u_sup_gauge(&self) -> ScalarField {
        self.u.sup_normalize()
    }

    /// Observed `r_{k+1} / r_k²` over the last three Newton residuals.
    pub fn quadratic_tail(&self) -> Vec<f64> {
        let h = &self.newton_history;
        let start = h.len().saturating_sub(3);
        h[start..]
            .windows(2)
            .map(|w| w[1] / (w[0] * w[0]))
            .collect()
    }
}

/// `log det g̃ − log det h − t F̂ − b`.
pub fn residual(spec: &ProblemSpec, u: &ScalarField, b: f64, t: f64) -> Result<ScalarField> {
    Ok(Evaluator::new(spec).evaluate(u, b, t)?.residual)
}

/// Derivative of [`residual`] at `u` in the direction `(v, db)`.
pub fn linearized_apply(
    spec: &ProblemSpec,
    u: &ScalarField,
    v: &ScalarField,
    db: f64,
) -> Result<ScalarField> {
    v.check_same_grid(u)?;
    let ev = Evaluator::new(spec);
    let eval = ev.evaluate(u, 0.0, 0.0)?;
    Ok(ev.linearize(&eval).apply(v, db))
}

/// Mean-zero `v` and `db` with `linearized_apply(v, db) = −rhs` to relative tolerance.
pub fn newton_solve_linear(
    spec: &ProblemSpec,
    u: &ScalarField,
    rhs: &ScalarField,
    opts: GmresOptions,
) -> Result<(ScalarField, f64)> {
    rhs.check_same_grid(u)?;
    let ev = Evaluator::new(spec);
    let eval = ev.evaluate(u, 0.0, 0.0)?;
    let (v, db, _) = ev.linearize(&eval).solve(rhs, opts)?;
    Ok((v, db))
}

struct Converged {
    u: ScalarField,
    b: f64,
    eval: Evaluation,
    iters: usize,
    history: Vec<f64>,
}

fn newton(
    ev: &Evaluator<'_>,
    u0: &ScalarField,
    b0: f64,
    t: f64,
    tol: f64,
    opts: &SolverOptions,
) -> Result<Converged> {
    let mut u = u0.clone();
    let mut b = b0;
    let mut eval = ev.evaluate(&u, b, t)?;
    let mut history = vec![eval.residual_inf];
    for iter in 0..=opts.max_newton {
        if eval.residual_inf <= tol {
            return Ok(Converged {
                u,
                b,
                eval,
                iters: iter,
                history,
            });
        }
        if iter == opts.max_newton {
            break;
        }
        let (v, db, _) = ev.linearize(&eval).solve(&eval.residual, opts.gmres)?;
        let floor = (0.01 * eval.cone_margin_min).max(opts.cone_floor);
        let mut alpha = opts.initial_damping.min(1.0);
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial_u = u.axpy(alpha, &v)?.mean_normalize();
            let trial_b = b + alpha * db;
            if let Ok(trial) = ev.evaluate(&trial_u, trial_b, t) {
                if trial.residual_inf < eval.residual_inf && trial.cone_margin_min > floor {
                    accepted = Some((trial_u, trial_b, trial));
                    break;
                }
            }
            alpha *= 0.5;
        }
        let Some((nu, nb, ne)) = accepted else {
            return Err(Error::Problem(format!(
                "damping exhausted at residual {:.3e}, cone margin {:.3e}",
                eval.residual_inf, eval.cone_margin_min
            )));
        };
        u = nu;
        b = nb;
        eval = ne;
        history.push(eval.residual_inf);
    }
    Err(Error::Problem(format!(
        "Newton cap reached at residual {:.3e}",
        eval.residual_inf
    )))
}

/// Damped Newton at `t = 1` from a caller-supplied admissible start.
pub fn newton_refine(
    spec: &ProblemSpec,
    u0: &ScalarField,
    b0: f64,
    opts: &SolverOptions,
) -> Result<SolverState> {
    u0.check_same_grid(&ScalarField::zeros(*spec.grid()))?;
    let ev = Evaluator::new(spec);
    let c = newton(&ev, &u0.mean_normalize(), b0, 1.0, opts.tol, opts)?;
    let record = StepRecord {
        step: 1,
        t: 1.0,
        newton_iters: c.iters,
        residual_inf: c.eval.residual_inf,
        cone_margin: c.eval.cone_margin_min,
        b: c.b,
    };
    Ok(SolverState {
        u: c.u,
        b: c.b,
        t: 1.0,
        residual_inf: c.eval.residual_inf,
        cone_margin_min: c.eval.cone_margin_min,
        newton_iters: c.iters,
        newton_history: c.history,
        records: vec![record],
    })
}

/// Follows the continuity path from `(0, 0)` at `t = 0` to `t = 1`.
pub fn continuity_solve(spec: &ProblemSpec, opts: &SolverOptions) -> Result<SolverState> {
    let mut targets: Vec<f64> = opts.schedule.iter().copied().filter(|&t| t > 0.0).collect();
    if targets.windows(2).any(|w| !(w[1] > w[0])) || targets.iter().any(|&t| !(t <= 1.0)) {
        return Err(Error::Problem(
            "schedule must increase strictly within (0, 1]".into(),
        ));
    }
    if targets.last() != Some(&1.0) {
        targets.push(1.0);
    }
    let ev = Evaluator::new(spec);
    let mut state = SolverState::initial(spec);
    let start = ev.evaluate(&state.u, 0.0, 0.0)?;
    state.residual_inf = start.residual_inf;
    state.cone_margin_min = start.cone_margin_min;

    let mut idx = 0;
    let mut dt = targets[0];
    while idx < targets.len() {
        let target = targets[idx];
        let t_try = if state.t + dt >= target - 1e-15 {
            target
        } else {
            state.t + dt
        };
        let tol = if t_try == 1.0 {
            opts.tol
        } else {
            opts.intermediate_tol
        };
        match newton(&ev, &state.u, state.b, t_try, tol, opts) {
            Ok(c) => {
                state.u = c.u;
                state.b = c.b;
                state.t = t_try;
                state.residual_inf = c.eval.residual_inf;
                state.cone_margin_min = c.eval.cone_margin_min;
                state.newton_iters = c.iters;
                state.newton_history = c.history;
                state.records.push(StepRecord {
                    step: state.records.len() + 1,
                    t: t_try,
                    newton_iters: c.iters,
                    residual_inf: c.eval.residual_inf,
                    cone_margin: c.eval.cone_margin_min,
                    b: c.b,
                });
                if t_try == target {
                    idx += 1;
                    if idx < targets.len() {
                        dt = dt.max(targets[idx] - target);
                    }
                }
            }
            Err(err) => {
                dt *= 0.5;
                if dt < opts.min_dt {
                    return Err(Error::ContinuationFailed {
                        t: state.t,
                        dt,
                        reason: err.to_string(),
                        history: state.records,
                    });
                }
            }
        }
    }
    Ok(state)
}
