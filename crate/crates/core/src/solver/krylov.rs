//! Restarted GMRES with right preconditioning.

use crate::error::{Error, Result};
use crate::par::{pairwise_dot, pairwise_sum};

#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
pub struct GmresOptions {
    /// Stop when `‖b − A x‖₂ ≤ rel_tol · ‖b‖₂`.
    pub rel_tol: f64,
    pub max_iters: usize,
    pub restart: usize,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-3,
            max_iters: 500,
            restart: 60,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GmresStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

fn norm(v: &[f64]) -> f64 {
    pairwise_dot(v, v).sqrt()
}

/// Solves `A x = b` from `x = 0`, iterating on `A M⁻¹ y = b` with `x = M⁻¹ y`.
pub fn gmres<A, M>(
    apply: A,
    precond: M,
    b: &[f64],
    opts: GmresOptions,
) -> Result<(Vec<f64>, GmresStats)>
where
    A: Fn(&[f64]) -> Vec<f64>,
    M: Fn(&[f64]) -> Vec<f64>,
{
    let len = b.len();
    let b_norm = norm(b);
    let mut x = vec![0.0; len];
    if b_norm == 0.0 {
        return Ok((
            x,
            GmresStats {
                iterations: 0,
                relative_residual: 0.0,
            },
        ));
    }
    let target = opts.rel_tol * b_norm;
    let mut total = 0;
    let mut r = b.to_vec();
    let mut r_norm = b_norm;

    while total < opts.max_iters {
        let m = opts.restart.min(opts.max_iters - total);
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        basis.push(r.iter().map(|v| v / r_norm).collect());
        let mut hess = vec![vec![0.0; m]; m + 1];
        let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
        let mut g = vec![0.0; m + 1];
        g[0] = r_norm;
        let mut k_used = 0;

        for k in 0..m {
            let z = precond(&basis[k]);
            let mut w = apply(&z);
            // Modified Gram-Schmidt.
            for (i, q) in basis.iter().enumerate() {
                let h = pairwise_dot(&w, q);
                hess[i][k] = h;
                w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= h * qi);
            }
            let h_next = norm(&w);
            hess[k + 1][k] = h_next;
            for i in 0..k {
                let t = cs[i] * hess[i][k] + sn[i] * hess[i + 1][k];
                hess[i + 1][k] = -sn[i] * hess[i][k] + cs[i] * hess[i + 1][k];
                hess[i][k] = t;
            }
            let denom = hess[k][k].hypot(hess[k + 1][k]);
            if denom == 0.0 {
                k_used = k;
                break;
            }
            cs[k] = hess[k][k] / denom;
            sn[k] = hess[k + 1][k] / denom;
            hess[k][k] = denom;
            hess[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            total += 1;
            k_used = k + 1;
            if g[k + 1].abs() <= target || h_next == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / h_next).collect());
        }

        // Back substitution for the least-squares coefficients.
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let s = pairwise_sum(
                &((i + 1)..k_used)
                    .map(|j| hess[i][j] * y[j])
                    .collect::<Vec<_>>(),
            );
            y[i] = (g[i] - s) / hess[i][i];
        }
        let mut update = vec![0.0; len];
        for (yi, q) in y.iter().zip(&basis) {
            update.iter_mut().zip(q).for_each(|(u, qi)| *u += yi * qi);
        }
        let dx = precond(&update);
        x.iter_mut().zip(&dx).for_each(|(xi, di)| *xi += di);

        let ax = apply(&x);
        r = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        r_norm = norm(&r);
        if r_norm <= target {
            return Ok((
                x,
                GmresStats {
                    iterations: total,
                    relative_residual: r_norm / b_norm,
                },
            ));
        }
        if k_used == 0 {
            break;
        }
    }
    Err(Error::Stagnated {
        iterations: total,
        relative: r_norm / b_norm,
    })
}
