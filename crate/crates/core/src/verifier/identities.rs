//! Identity checks on random pointwise data.

use rand::Rng;

use super::{relative, CheckReport};
use crate::form_algebra::{
    det_form_top_minus_one, eta_tensor, factorial, generalized_eigenvalues, hodge_star_11,
    hodge_star_n1, metric_power_n_minus_one, p_operator, root_n_minus_one, trace_pair,
    wedge11_invariant, wedge_power_n_minus_one, wedge_with_metric_power, FormTopMinusOne,
    HermitianMatrix, Metric,
};
use crate::par;
use crate::sample::{random_hermitian, random_metric, stream_rng, SampleRng};

pub const IDENTITY_TOL: f64 = 1e-11;

/// Stream ids keep every check and dimension on its own random sequence.
fn stream(check: u64, n: usize) -> u64 {
    check * 64 + n as u64
}

fn run_trials(seed: u64, stream_id: u64, trials: usize, f: impl Fn(&mut SampleRng) -> f64) -> f64 {
    let mut rng = stream_rng(seed, stream_id);
    (0..trials).map(|_| f(&mut rng)).fold(0.0, f64::max)
}

/// `h` with `ω_0^{n−1} = (n−1)! *h`.
fn h_from_omega0(g: &Metric, omega0: &HermitianMatrix) -> HermitianMatrix {
    let n = g.dim();
    let psi = wedge_power_n_minus_one(omega0).expect("metric is invertible");
    hodge_star_n1(g, &psi).scale(1.0 / factorial(n - 1))
}

/// Residual of `(tr ω̃)(tr ω_h) − n(n−1) ω̃∧ω_h∧ω^{n−2}/ω^n − (tr_{ω_0} ω̃) ω_0^n/ω^n`
/// relative to its largest term.
pub fn magic_identity_residual(g: &Metric, omega0: &Metric, wt: &HermitianMatrix) -> f64 {
    let h = h_from_omega0(g, omega0.matrix());
    let t1 = trace_pair(g, wt) * trace_pair(g, &h);
    let t2 = wedge11_invariant(g, wt, &h);
    let t3 = trace_pair(omega0, wt) * omega0.det() / g.det();
    relative((t1 - t2 - t3).abs(), t1.abs().max(t2.abs()).max(t3.abs()))
}

pub fn check_magic_identity(n: usize, trials: usize, seed: u64) -> CheckReport {
    let worst = run_trials(seed, stream(1, n), trials, |rng| {
        let g = random_metric(n, rng);
        let omega0 = random_metric(n, rng);
        let wt = random_hermitian(n, rng);
        magic_identity_residual(&g, &omega0, &wt)
    });
    CheckReport::hard(format!("magic_identity_n{n}"), trials, worst, IDENTITY_TOL)
}

/// `*` is invertible between (1,1) and (n−1,n−1) forms in both orders.
pub fn check_star_involution(n: usize, trials: usize, seed: u64) -> CheckReport {
    let worst = run_trials(seed, stream(2, n), trials, |rng| {
        let g = random_metric(n, rng);
        let a = random_hermitian(n, rng);
        let psi = FormTopMinusOne::from_coefficients(random_hermitian(n, rng));
        let back = hodge_star_n1(&g, &hodge_star_11(&g, &a));
        let forth = hodge_star_11(&g, &hodge_star_n1(&g, &psi));
        let e1 = relative(back.max_abs_diff(&a), a.max_abs_entry());
        let e2 = relative(forth.coefficients().max_abs_diff(psi.coefficients()), psi.coefficients().max_abs_entry());
        e1.max(e2)
    });
    CheckReport::hard(format!("star_involution_n{n}"), trials, worst, IDENTITY_TOL)
}

/// `det(S^{n−1}) = (det S)^{n−1}`, in particular `det(ω^{n−1}) = (det g)^{n−1}`.
pub fn check_det_convention(n: usize, trials: usize, seed: u64) -> CheckReport {
    let e = n as i32 - 1;
    let worst = run_trials(seed, stream(3, n), trials, |rng| {
        let s = random_metric(n, rng);
        let lhs = det_form_top_minus_one(&wedge_power_n_minus_one(s.matrix()).expect("invertible"));
        let rhs = s.det().powi(e);
        let lhs_g = det_form_top_minus_one(&metric_power_n_minus_one(&s));
        relative((lhs - rhs).abs(), rhs).max(relative((lhs_g - rhs).abs(), rhs))
    });
    CheckReport::hard(format!("det_convention_n{n}"), trials, worst, IDENTITY_TOL)
}

/// The correspondence between `ω_h + ((Δu)ω − i∂∂̄u)/(n−1)` and
/// `ω_0^{n−1} + i∂∂̄u ∧ ω^{n−2}`: the star of the first is the second, the
/// `(n−1)`-th root inverts the `(n−1)`-th power, and determinants match.
pub fn check_correspondence(n: usize, trials: usize, seed: u64) -> CheckReport {
    let fact = factorial(n - 1);
    let worst = run_trials(seed, stream(4, n), trials, |rng| {
        let g = random_metric(n, rng);
        let omega0 = random_metric(n, rng);
        let hess = random_hermitian(n, rng).scale(0.2);
        let h = h_from_omega0(&g, omega0.matrix());

        let gt = p_operator(&g, &h, &hess);
        let lhs = hodge_star_11(&g, &gt).scale(fact);
        let psi0 = wedge_power_n_minus_one(omega0.matrix()).expect("invertible");
        let rhs = psi0.add(&wedge_with_metric_power(&g, &hess));
        let scale = rhs.coefficients().max_abs_entry();
        let e_star = relative(lhs.coefficients().max_abs_diff(rhs.coefficients()), scale);

        let root = root_n_minus_one(&g, &psi0).expect("positive");
        let e_root = relative(root.matrix().max_abs_diff(omega0.matrix()), omega0.matrix().max_abs_entry());

        let ratio_ma = gt.det() / g.det();
        let ratio_fww = det_form_top_minus_one(&rhs) / det_form_top_minus_one(&metric_power_n_minus_one(&g));
        let e_det = relative((ratio_ma - ratio_fww).abs(), ratio_ma.abs().max(ratio_fww.abs()));
        e_star.max(e_root).max(e_det)
    });
    CheckReport::hard(format!("correspondence_n{n}"), trials, worst, IDENTITY_TOL)
}

/// Residual of the eigenvalue relation `η_i = Σλ − (n−1)λ_i` and of the chain
/// `T/n ≤ λ_max ≤ η_max ≤ (n−1)λ_max ≤ (n−1)T` at one positive `g̃`.
pub fn eta_residual(g: &Metric, gtilde: &HermitianMatrix) -> f64 {
    let n = g.dim() as f64;
    let lambda = generalized_eigenvalues(g, gtilde);
    let eta = generalized_eigenvalues(g, &eta_tensor(g, gtilde));
    let sum: f64 = lambda.iter().sum();
    let scale = lambda.iter().fold(0.0f64, |m, l| m.max(l.abs())) * n;
    // η ascending pairs with λ descending.
    let rel = eta
        .iter()
        .zip(lambda.iter().rev())
        .map(|(e, l)| (e - (sum - (n - 1.0) * l)).abs())
        .fold(0.0, f64::max);
    let trace = trace_pair(g, gtilde);
    let lmax = lambda[lambda.len() - 1];
    let emax = eta[eta.len() - 1];
    let chain = [trace / n, lmax, emax, (n - 1.0) * lmax, (n - 1.0) * trace];
    let violation = chain.windows(2).map(|w| (w[0] - w[1]).max(0.0)).fold(0.0, f64::max);
    relative(rel.max(violation), scale)
}

pub fn check_eta_relations(n: usize, trials: usize, seed: u64) -> CheckReport {
    let worst = run_trials(seed, stream(5, n), trials, |rng| {
        let g = random_metric(n, rng);
        let gt = random_metric(n, rng);
        eta_residual(&g, gt.matrix())
    });
    CheckReport::hard(format!("eta_relations_n{n}"), trials, worst, IDENTITY_TOL)
}

/// For ascending `λ > 0` with `λ_2 < λ_n/2`:
/// `−Σ_{2≤i<j}(λ_i−λ_j)² + 2λ_1 Σ_{i≥2} λ_i ≤ −λ_n²/4 + 2λ_1 Σ λ_i`.
pub fn check_eigenvalue_tail(n: usize, trials: usize, seed: u64) -> CheckReport {
    let worst = run_trials(seed, stream(6, n), trials, |rng| {
        let top: f64 = rng.random_range(1.0..10.0);
        let l2: f64 = rng.random_range(0.0..0.5 * top);
        let l1: f64 = rng.random_range(0.0..=l2);
        let mut lambda = vec![l1, l2];
        lambda.extend((2..n - 1).map(|_| rng.random_range(l2..=top)));
        lambda.push(top);
        lambda.sort_by(f64::total_cmp);
        let mut spread = 0.0;
        for i in 1..n {
            for j in i + 1..n {
                spread += (lambda[i] - lambda[j]).powi(2);
            }
        }
        let sum: f64 = lambda.iter().sum();
        let lhs = -spread + 2.0 * lambda[0] * (sum - lambda[0]);
        let rhs = -0.25 * lambda[n - 1].powi(2) + 2.0 * lambda[0] * sum;
        relative((lhs - rhs).max(0.0), top * top)
    });
    CheckReport::hard(format!("eigenvalue_tail_n{n}"), trials, worst, 1e-12)
}

/// Every identity check for each `n`, run as independent parallel jobs.
pub fn identity_suite(ns: &[usize], trials: usize, seed: u64) -> Vec<CheckReport> {
    type Check = fn(usize, usize, u64) -> CheckReport;
    let checks: [Check; 5] = [
        check_magic_identity,
        check_star_involution,
        check_det_convention,
        check_correspondence,
        check_eta_relations,
    ];
    let mut jobs: Vec<(Check, usize)> = Vec::new();
    for &n in ns {
        jobs.extend(checks.iter().map(|&c| (c, n)));
        if n >= 3 {
            jobs.push((check_eigenvalue_tail, n));
        }
    }
    par::map_jobs(jobs, |(check, n)| check(n, trials, seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(d: &[f64]) -> HermitianMatrix {
        HermitianMatrix::from_real_diagonal(d).unwrap()
    }

    #[test]
    fn magic_identity_flat() {
        for n in 2..=6 {
            let g = Metric::identity(n);
            assert!(magic_identity_residual(&g, &g, &HermitianMatrix::identity(n)) < 1e-14);
        }
    }

    #[test]
    fn magic_identity_hand_case() {
        // ω_0 = diag(1,2,3) gives ω_h = diag(6,3,2): 3·11 − 22 − (11/6)·6 = 0.
        let g = Metric::identity(3);
        let omega0 = Metric::new(diag(&[1.0, 2.0, 3.0])).unwrap();
        let h = h_from_omega0(&g, omega0.matrix());
        assert!(h.max_abs_diff(&diag(&[6.0, 3.0, 2.0])) < 1e-13);
        assert!(magic_identity_residual(&g, &omega0, &HermitianMatrix::identity(3)) < 1e-15);
    }

    #[test]
    fn random_checks_pass() {
        for n in 2..=5 {
            for r in [
                check_magic_identity(n, 50, 7),
                check_star_involution(n, 50, 7),
                check_det_convention(n, 50, 7),
                check_correspondence(n, 50, 7),
                check_eta_relations(n, 50, 7),
            ] {
                assert!(r.pass, "{r:?}");
            }
        }
        assert!(check_eigenvalue_tail(4, 200, 7).pass);
    }

    #[test]
    fn suite_is_deterministic() {
        let a = identity_suite(&[2, 3], 20, 99);
        let b = identity_suite(&[2, 3], 20, 99);
        assert_eq!(a, b);
        assert_eq!(a.len(), 11);
    }
}
