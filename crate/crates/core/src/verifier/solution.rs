//! Checks evaluated on a field `u` (usually solver output).

use std::collections::BTreeMap;

use rand::Rng;

use super::identities::{eta_residual, IDENTITY_TOL};
use super::{relative, CheckReport};
use crate::error::{Error, Result};
use crate::form_algebra::{
    det_form_top_minus_one, factorial, hodge_star_11, metric_power_n_minus_one, p_operator,
    pair_with_top, root_n_minus_one, trace_pair, wedge11_invariant, wedge_with_metric_power,
    FormTopMinusOne, HermitianMatrix, Metric,
};
use crate::par;
use crate::sample::stream_rng;
use crate::solver::{continuity_solve, newton_refine, ProblemSpec, SolverOptions, SolverState};
use crate::torus::{ScalarField, Spectral};
use crate::C64;

pub const CHERRIER_P: [f64; 5] = [1.0, 2.0, 4.0, 8.0, 16.0];

/// Per-point data shared by the solution checks.
struct PointData {
    h: HermitianMatrix,
    hess: HermitianMatrix,
    gtilde: HermitianMatrix,
}

fn point_data(spec: &ProblemSpec, u: &ScalarField) -> Result<Vec<PointData>> {
    let hess = Spectral::new(*spec.grid()).hessian(u)?;
    let g = spec.g();
    let pts = par::map_indexed(u.len(), |x| {
        let h = spec.h().at(x);
        let hx = hess.at(x);
        let gtilde = p_operator(g, &h, &hx);
        PointData { h, hess: hx, gtilde }
    });
    let margin = par::min(&par::map_indexed(pts.len(), |x| g.congruence(&pts[x].gtilde).min_eigenvalue()));
    if !(margin > 0.0) {
        return Err(Error::ConeViolation { margin });
    }
    Ok(pts)
}

/// `ω_0^{n−1} + i∂∂̄u ∧ ω^{n−2}` with `ω_0^{n−1} = (n−1)! *ω_h`.
fn fww_form(g: &Metric, h: &HermitianMatrix, hess: &HermitianMatrix) -> FormTopMinusOne {
    let n = g.dim();
    hodge_star_11(g, h).scale(factorial(n - 1)).add(&wedge_with_metric_power(g, hess))
}

/// Pointwise agreement of `ω̃^n/ω^n` with `det(ω_0^{n−1} + i∂∂̄u∧ω^{n−2})/det(ω^{n−1})`.
pub fn check_ma1_fww_equivalence(spec: &ProblemSpec, u: &ScalarField) -> Result<CheckReport> {
    let g = spec.g();
    let pts = point_data(spec, u)?;
    let det_base = det_form_top_minus_one(&metric_power_n_minus_one(g));
    let errs = par::map_indexed(pts.len(), |x| {
        let p = &pts[x];
        let lhs = p.gtilde.det() / g.det();
        let rhs = det_form_top_minus_one(&fww_form(g, &p.h, &p.hess)) / det_base;
        relative((lhs - rhs).abs(), lhs.abs().max(rhs.abs()))
    });
    Ok(CheckReport::hard("ma1_fww_equivalence", pts.len(), par::max(&errs), IDENTITY_TOL))
}

/// `ω_u^n/ω^n = e^{(F+b)/(n−1)}` for the `(n−1)`-th root `ω_u` of the balanced-side form.
pub fn check_corollary_root(spec: &ProblemSpec, u: &ScalarField, b: f64) -> Result<CheckReport> {
    let g = spec.g();
    let n = spec.n() as f64;
    let pts = point_data(spec, u)?;
    let f = spec.f().values();
    let errs: Vec<Result<f64>> = par::map_indexed(pts.len(), |x| {
        let p = &pts[x];
        let root = root_n_minus_one(g, &fww_form(g, &p.h, &p.hess))?;
        let lhs = root.det() / g.det();
        let rhs = ((f[x] + b) / (n - 1.0)).exp();
        Ok(relative((lhs - rhs).abs(), rhs))
    });
    let errs: Vec<f64> = errs.into_iter().collect::<Result<_>>()?;
    Ok(CheckReport::hard("corollary_root", pts.len(), par::max(&errs), 1e-9))
}

/// Splits `i∂∂̄u ∧ (2ω_0^{n−1} + i∂∂̄u ∧ ω^{n−2})/ω^n` into a part `D` fixed by the
/// data and a quadratic part `Q = −((n−2)/n)(tr ω̃)² + (n−1)² ω̃²∧ω^{n−2}/ω^n`.
///
/// Returns `(field, D, Q)`.
pub fn hessian_pairing_decomposition(g: &Metric, h: &HermitianMatrix, hess: &HermitianMatrix) -> (f64, f64, f64) {
    let n = g.dim() as f64;
    let fact = factorial(g.dim() - 1);
    let psi0 = hodge_star_11(g, h).scale(fact);
    let field = pair_with_top(g, hess, &psi0.scale(2.0).add(&wedge_with_metric_power(g, hess)));

    let tau = trace_pair(g, h);
    let a = &h.scale(n - 1.0) - &g.matrix().scale(tau);
    let d = pair_with_top(g, &a, &psi0.scale(2.0).add(&wedge_with_metric_power(g, &a)));

    let gt = p_operator(g, h, hess);
    let t = trace_pair(g, &gt);
    let q = -((n - 2.0) / n) * t * t + (n - 1.0) * (n - 1.0) * wedge11_invariant(g, &gt, &gt) / (n * (n - 1.0));
    (field, d, q)
}

/// Report-only: sup of the Hessian pairing and the data constant `C′ = sup D`,
/// gated on the exact split `field = D + Q`.
pub fn check_lemma32_pointwise(spec: &ProblemSpec, u: &ScalarField) -> Result<CheckReport> {
    let g = spec.g();
    let pts = point_data(spec, u)?;
    let parts = par::map_indexed(pts.len(), |x| hessian_pairing_decomposition(g, &pts[x].h, &pts[x].hess));
    let field: Vec<f64> = parts.iter().map(|p| p.0).collect();
    let d: Vec<f64> = parts.iter().map(|p| p.1).collect();
    let c_prime = par::max(&d);
    let split = parts
        .iter()
        .map(|&(f, d, q)| relative((f - d - q).abs(), f.abs().max(d.abs()).max(q.abs()).max(1.0)))
        .fold(0.0, f64::max);
    let slack = parts.iter().map(|&(f, _, q)| c_prime + q - f).fold(f64::INFINITY, f64::min);
    let mut values = BTreeMap::new();
    values.insert("sup_field".into(), par::max(&field));
    values.insert("c_prime".into(), c_prime);
    values.insert("min_bound_slack".into(), slack);
    Ok(CheckReport::diagnostic("lemma32_pointwise", pts.len(), values)
        .with_sub_identity(split, 1e-12)
        .with_notes("field <= C' + Q pointwise with C' = sup of the data part"))
}

/// Report-only: `R(p) = ∫|∂e^{−pu/2}|²_g / (p ∫e^{−pu})`, gated on the chain rule
/// `|∂e^{−pu/2}|² = (p²/4) e^{−pu} |∂u|²`.
pub fn check_cherrier(spec: &ProblemSpec, u: &ScalarField, p_list: &[f64]) -> Result<CheckReport> {
    let spectral = Spectral::new(*spec.grid());
    let g = spec.g();
    let du = spectral.holomorphic_gradient(u)?;
    let grad_sq = spectral.gradient_norm_sq(g, u)?;
    let ginv = g.inverse();
    let m = spec.grid().active();
    let mut values = BTreeMap::new();
    let mut chain = 0.0f64;
    let mut ratios = Vec::with_capacity(p_list.len());
    for &p in p_list {
        let w: Vec<f64> = u.values().iter().map(|&v| (-0.5 * p * v).exp()).collect();
        let direct: Vec<f64> = par::map_indexed(u.len(), |x| {
            let dw: Vec<C64> = (0..m).map(|j| du[j][x] * (-0.5 * p * w[x])).collect();
            let mut s = C64::new(0.0, 0.0);
            for i in 0..m {
                for j in 0..m {
                    s += ginv[(j, i)] * dw[i] * dw[j].conj();
                }
            }
            s.re
        });
        let via_chain: Vec<f64> = (0..u.len()).map(|x| 0.25 * p * p * w[x] * w[x] * grad_sq.values()[x]).collect();
        let scale = par::max_abs(&via_chain).max(f64::MIN_POSITIVE);
        let err = direct.iter().zip(&via_chain).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        chain = chain.max(relative(err, scale));
        let e_pu: Vec<f64> = w.iter().map(|v| v * v).collect();
        let r = par::pairwise_sum(&direct) / (p * par::pairwise_sum(&e_pu));
        values.insert(format!("R_p{p}"), r);
        ratios.push(r);
    }
    values.insert("max_R".into(), ratios.iter().copied().fold(0.0, f64::max));
    let monotone = ratios.windows(2).all(|w| w[1] >= w[0]);
    Ok(CheckReport::diagnostic("cherrier", u.len() * p_list.len(), values)
        .with_sub_identity(chain, 1e-12)
        .with_notes(if monotone { "R(p) nondecreasing in p" } else { "R(p) not monotone in p" }))
}

/// Report-only: `sup tr_ω ω̃`, `sup |∂u|²_g` and their ratio, gated on the η
/// eigenvalue relations and `tr_ω ω̃ = tr_ω ω_h + Δu` at every point.
pub fn check_second_order_quantities(spec: &ProblemSpec, u: &ScalarField) -> Result<CheckReport> {
    let g = spec.g();
    let pts = point_data(spec, u)?;
    let grad_sq = Spectral::new(*spec.grid()).gradient_norm_sq(g, u)?;
    let traces = par::map_indexed(pts.len(), |x| trace_pair(g, &pts[x].gtilde));
    let eta = par::map_indexed(pts.len(), |x| eta_residual(g, &pts[x].gtilde));
    let trace_id = par::map_indexed(pts.len(), |x| {
        let p = &pts[x];
        let rhs = trace_pair(g, &p.h) + trace_pair(g, &p.hess);
        relative((traces[x] - rhs).abs(), traces[x].abs().max(1.0))
    });
    let sup_trace = par::max(&traces);
    let sup_grad = par::max(grad_sq.values());
    let mut values = BTreeMap::new();
    values.insert("sup_trace".into(), sup_trace);
    values.insert("sup_grad_sq".into(), sup_grad);
    values.insert("ratio".into(), sup_trace / (sup_grad + 1.0));
    Ok(CheckReport::diagnostic("second_order_quantities", pts.len(), values)
        .with_sub_identity(par::max(&eta), IDENTITY_TOL)
        .with_sub_identity(par::max(&trace_id), 1e-12))
}

/// A smooth mean-zero perturbation made of a few random low Fourier modes.
fn low_mode_noise(spec: &ProblemSpec, amplitude: f64, seed: u64) -> ScalarField {
    let grid = *spec.grid();
    let mut rng = stream_rng(seed, 0x5eed);
    let modes: Vec<(usize, f64, f64)> = (0..4)
        .map(|_| {
            let axis = rng.random_range(0..grid.real_axes());
            (axis, rng.random_range(1..=2) as f64, rng.random_range(0.0..std::f64::consts::TAU))
        })
        .collect();
    ScalarField::from_fn(grid, |x| {
        modes.iter().map(|&(a, k, ph)| (std::f64::consts::TAU * k * x[a] + ph).cos()).sum::<f64>() * amplitude
    })
}

/// Solves `spec` three ways (two continuation schedules with different damping and
/// a perturbed warm start) and reports the largest pairwise disagreement.
pub fn check_comparison_uniqueness(spec: &ProblemSpec, base: &SolverOptions, seed: u64) -> CheckReport {
    let run = || -> Result<Vec<SolverState>> {
        let a = continuity_solve(spec, base)?;
        let alt = SolverOptions {
            schedule: crate::solver::uniform_schedule(3),
            initial_damping: 0.5,
            ..base.clone()
        };
        let b = continuity_solve(spec, &alt)?;
        let amplitude = 1e-3 * a.cone_margin_min.min(1.0);
        let start = a.u.add(&low_mode_noise(spec, amplitude, seed))?;
        let c = newton_refine(spec, &start, a.b + amplitude, base)?;
        Ok(vec![a, b, c])
    };
    match run() {
        Ok(states) => {
            let mut du = 0.0f64;
            let mut db = 0.0f64;
            for i in 0..states.len() {
                for j in i + 1..states.len() {
                    du = du.max(states[i].u.max_abs_diff(&states[j].u).unwrap_or(f64::INFINITY));
                    db = db.max((states[i].b - states[j].b).abs());
                }
            }
            let mut report = CheckReport::hard("comparison_uniqueness", states.len(), du, 1e-8)
                .with_value("max_du", du)
                .with_value("max_db", db)
                .with_notes("runs: uniform schedule, 3-step schedule at half damping, perturbed warm start");
            report.pass = report.pass && db <= 1e-10;
            report
        }
        Err(e) => CheckReport::failed("comparison_uniqueness", e.to_string()),
    }
}

/// Identity and diagnostic checks on a converged state.
pub fn solution_suite(spec: &ProblemSpec, state: &SolverState) -> Vec<CheckReport> {
    let u = &state.u;
    let wrap = |name: &str, r: Result<CheckReport>| r.unwrap_or_else(|e| CheckReport::failed(name, e.to_string()));
    vec![
        wrap("ma1_fww_equivalence", check_ma1_fww_equivalence(spec, u)),
        wrap("corollary_root", check_corollary_root(spec, u, state.b)),
        wrap("lemma32_pointwise", check_lemma32_pointwise(spec, u)),
        wrap("cherrier", check_cherrier(spec, u, &CHERRIER_P)),
        wrap("second_order_quantities", check_second_order_quantities(spec, u)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::{random_hermitian, random_metric};
    use crate::solver::manufacture;
    use crate::torus::{MatrixField, TorusGrid};
    use std::f64::consts::PI;

    fn trivial(n: usize) -> ProblemSpec {
        ProblemSpec::trivial(TorusGrid::full(n, 8).unwrap(), Metric::identity(n)).unwrap()
    }

    #[test]
    fn zero_u_reports() {
        let spec = trivial(2);
        let u = ScalarField::zeros(*spec.grid());
        assert!(check_ma1_fww_equivalence(&spec, &u).unwrap().pass);
        let root = check_corollary_root(&spec, &u, 0.0).unwrap();
        assert!(root.pass && root.max_residual < 1e-14);
        let l = check_lemma32_pointwise(&spec, &u).unwrap();
        assert!(l.pass);
        assert_eq!(l.values["sup_field"], 0.0);
        let c = check_cherrier(&spec, &u, &CHERRIER_P).unwrap();
        assert!(c.values.iter().filter(|(k, _)| k.starts_with("R_p")).all(|(_, v)| *v == 0.0));
        let s = check_second_order_quantities(&spec, &u).unwrap();
        assert!((s.values["sup_trace"] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn decomposition_on_random_points() {
        let mut rng = stream_rng(3, 3);
        for n in 2..=5 {
            for _ in 0..50 {
                let g = random_metric(n, &mut rng);
                let h = random_metric(n, &mut rng);
                let hess = random_hermitian(n, &mut rng);
                let (f, d, q) = hessian_pairing_decomposition(&g, h.matrix(), &hess);
                assert!((f - d - q).abs() <= 1e-10 * f.abs().max(d.abs()).max(q.abs()).max(1.0), "n={n}: {f} {d} {q}");
            }
        }
    }

    #[test]
    fn checks_on_nonflat_u() {
        let grid = TorusGrid::full(3, 8).unwrap();
        let g = random_metric(3, &mut stream_rng(1, 1));
        let h = MatrixField::constant(grid, g.matrix()).unwrap();
        let u = ScalarField::from_fn(grid, |x| 0.01 * (2.0 * PI * x[0]).sin() * (2.0 * PI * x[3]).cos());
        let spec = manufacture(&g, &h, &u).unwrap();
        for r in solution_suite(&spec, &SolverState { u: u.clone(), ..SolverState::initial(&spec) }) {
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn uniqueness_on_trivial_problem() {
        let spec = trivial(2);
        let r = check_comparison_uniqueness(&spec, &SolverOptions::uniform(2), 5);
        assert!(r.pass, "{r:?}");
    }
}
