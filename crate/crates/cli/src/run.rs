//! Command execution and output files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use pshma_core::solver::{
    continuity_solve, estimate_b_bounds, manufacture, ProblemSpec, SolverState, StepRecord,
};
use pshma_core::torus::io;
use pshma_core::verifier::{identity_suite, solution_suite, summary_table, to_jsonl, CheckReport};
use pshma_core::Error;
use serde::Serialize;

use crate::config::{Command, RunConfig};
use crate::CliError;

/// Successful runs either pass every hard check or report that some failed.
#[derive(Debug, PartialEq, Eq)]
pub enum Outcome {
    Passed,
    ChecksFailed,
}

#[derive(Serialize)]
struct SolutionSummary {
    b: f64,
    b_bounds: (f64, f64),
    t: f64,
    residual_inf: f64,
    cone_margin_min: f64,
    newton_iters: usize,
    quadratic_tail: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    recovery_error: Option<f64>,
}

pub fn run(cfg: &RunConfig, quiet: bool) -> Result<Outcome, CliError> {
    let out = cfg.output_dir();
    fs::create_dir_all(&out)?;
    let say = |msg: &str| {
        if !quiet {
            println!("{msg}");
        }
    };
    let reports = match cfg.command {
        Command::Verify => identity_suite(&cfg.verify.dims, cfg.verify.trials, cfg.seed),
        Command::Solve | Command::Manufacture => solve(cfg, &out, &say)?,
    };
    fs::write(out.join("reports.jsonl"), to_jsonl(&reports))?;
    let table = summary_table(&reports);
    fs::write(out.join("summary.txt"), &table)?;
    say(table.trim_end());
    Ok(if reports.iter().all(|r| r.pass) { Outcome::Passed } else { Outcome::ChecksFailed })
}

fn solve(cfg: &RunConfig, out: &Path, say: &dyn Fn(&str)) -> Result<Vec<CheckReport>, CliError> {
    let base = cfg.problem()?;
    let u_star = cfg.u_star();
    let spec = match (&cfg.command, &u_star) {
        (Command::Manufacture, Some(u)) => {
            let spec = manufacture(base.g(), base.h(), u).map_err(CliError::Solver)?;
            io::write_scalar(out.join("F.bin"), spec.f())?;
            io::write_scalar(out.join("u_star.bin"), u)?;
            spec
        }
        _ => base,
    };
    let tail = spec.f_tail_ratio();
    if tail > 1e-10 {
        say(&format!("warning: F is not band-limited (top-third spectral ratio {tail:.2e})"));
    }

    let state = match continuity_solve(&spec, &cfg.solver_options()) {
        Ok(s) => s,
        Err(err) => {
            dump_failure(out, &err)?;
            return Err(CliError::Solver(err));
        }
    };
    write_csv(&out.join("diagnostics.csv"), &state.records)?;
    io::write_scalar(out.join("u_mean.bin"), &state.u)?;
    io::write_scalar(out.join("u_sup.bin"), &state.u_sup_gauge())?;

    let recovery_error = match (&cfg.command, &u_star) {
        (Command::Manufacture, Some(u)) => Some(state.u.max_abs_diff(&u.mean_normalize())?),
        _ => None,
    };
    let summary = summarize(&spec, &state, recovery_error);
    fs::write(out.join("solution.json"), serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n")?;
    say(&format!(
        "converged: b = {:.12e}, residual {:.2e}, min cone margin {:.4}",
        state.b, state.residual_inf, state.cone_margin_min
    ));
    if let Some(e) = recovery_error {
        say(&format!("recovered u error: {e:.3e}"));
    }
    Ok(solution_suite(&spec, &state))
}

fn summarize(spec: &ProblemSpec, state: &SolverState, recovery_error: Option<f64>) -> SolutionSummary {
    SolutionSummary {
        b: state.b,
        b_bounds: estimate_b_bounds(spec),
        t: state.t,
        residual_inf: state.residual_inf,
        cone_margin_min: state.cone_margin_min,
        newton_iters: state.newton_iters,
        quadratic_tail: state.quadratic_tail(),
        recovery_error,
    }
}

pub fn write_csv(path: &Path, records: &[StepRecord]) -> std::io::Result<()> {
    let mut s = String::from("step,t,newton_iters,residual_inf,cone_margin,b\n");
    for r in records {
        let _ = writeln!(s, "{},{},{},{:e},{},{}", r.step, r.t, r.newton_iters, r.residual_inf, r.cone_margin, r.b);
    }
    fs::write(path, s)
}

fn dump_failure(out: &Path, err: &Error) -> std::io::Result<()> {
    if let Error::ContinuationFailed { history, .. } = err {
        write_csv(&out.join("diagnostics.csv"), history)?;
    }
    fs::write(out.join("failure.txt"), format!("{err}\n"))
}
