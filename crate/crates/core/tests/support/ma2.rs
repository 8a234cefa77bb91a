//! Independent solver for the standard complex Monge-Ampère equation in
//! dimension two, `det(g′ + u_{jk̄}) = e^{F+b} det g`, with `g′` given pointwise.
//!
//! Derivatives come from dense one-dimensional differentiation matrices applied
//! along each axis; Newton updates are solved with BiCGSTAB on the system bordered
//! by the mean-zero constraint.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix2};
use pshma_core::C64;

pub struct Ma2Problem {
    pub samples: usize,
    /// Active complex coordinates (1 or 2).
    pub active: usize,
    pub det_g: f64,
    /// Reference metric per point.
    pub g_prime: Vec<Matrix2<C64>>,
    pub f: Vec<f64>,
}

pub struct Ma2Solution {
    pub u: Vec<f64>,
    pub b: f64,
    pub residual_inf: f64,
    pub newton_iters: usize,
}

fn diff_matrix(n: usize, order: u32) -> DMatrix<f64> {
    let half = n as i64 / 2;
    DMatrix::from_fn(n, n, |i, l| {
        let mut s = 0.0;
        for k in -half..half {
            if order == 1 && k == -half {
                continue;
            }
            let w = 2.0 * PI * k as f64;
            let phase = w * (i as f64 - l as f64) / n as f64;
            s += if order == 1 { -w * phase.sin() } else { -w * w * phase.cos() };
        }
        s / n as f64
    })
}

struct Ops {
    n: usize,
    axes: usize,
    d1: DMatrix<f64>,
    d2: DMatrix<f64>,
}

impl Ops {
    fn len(&self) -> usize {
        self.n.pow(self.axes as u32)
    }

    fn along(&self, m: &DMatrix<f64>, axis: usize, v: &[f64]) -> Vec<f64> {
        let stride = self.n.pow((self.axes - 1 - axis) as u32);
        let mut out = vec![0.0; v.len()];
        for (p, o) in out.iter_mut().enumerate() {
            let i = (p / stride) % self.n;
            let base = p - i * stride;
            *o = (0..self.n).map(|l| m[(i, l)] * v[base + l * stride]).sum();
        }
        out
    }

    fn second(&self, a: usize, b: usize, v: &[f64]) -> Vec<f64> {
        if a == b {
            self.along(&self.d2, a, v)
        } else {
            self.along(&self.d1, b, &self.along(&self.d1, a, v))
        }
    }

    /// Complex Hessian entries `u_{jk̄}` as full 2×2 matrices per point.
    fn hessian(&self, v: &[f64], active: usize) -> Vec<Matrix2<C64>> {
        let mut out = vec![Matrix2::<C64>::zeros(); v.len()];
        for j in 0..active {
            for k in j..active {
                let (xj, yj, xk, yk) = (2 * j, 2 * j + 1, 2 * k, 2 * k + 1);
                let xx = self.second(xj, xk, v);
                let yy = self.second(yj, yk, v);
                let (xy, yx) = if j == k {
                    (vec![0.0; v.len()], vec![0.0; v.len()])
                } else {
                    (self.second(xj, yk, v), self.second(yj, xk, v))
                };
                for p in 0..v.len() {
                    let z = C64::new(0.25 * (xx[p] + yy[p]), 0.25 * (xy[p] - yx[p]));
                    out[p][(j, k)] = z;
                    out[p][(k, j)] = z.conj();
                }
            }
        }
        out
    }
}

fn det2(m: &Matrix2<C64>) -> f64 {
    (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re
}

fn positive2(m: &Matrix2<C64>) -> bool {
    m[(0, 0)].re > 0.0 && det2(m) > 0.0
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn bicgstab(apply: impl Fn(&[f64]) -> Vec<f64>, rhs: &[f64], tol: f64, max_iter: usize) -> Vec<f64> {
    let len = rhs.len();
    let mut x = vec![0.0; len];
    let mut r = rhs.to_vec();
    let r0 = r.clone();
    let norm_b = dot(rhs, rhs).sqrt();
    if norm_b == 0.0 {
        return x;
    }
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; len];
    let mut p = vec![0.0; len];
    for _ in 0..max_iter {
        let rho_new = dot(&r0, &r);
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..len {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        v = apply(&p);
        alpha = rho / dot(&r0, &v);
        let s: Vec<f64> = (0..len).map(|i| r[i] - alpha * v[i]).collect();
        if dot(&s, &s).sqrt() <= tol * norm_b {
            for i in 0..len {
                x[i] += alpha * p[i];
            }
            return x;
        }
        let t = apply(&s);
        omega = dot(&t, &s) / dot(&t, &t);
        for i in 0..len {
            x[i] += alpha * p[i] + omega * s[i];
            r[i] = s[i] - omega * t[i];
        }
        if dot(&r, &r).sqrt() <= tol * norm_b {
            return x;
        }
    }
    panic!("oracle BiCGSTAB did not converge");
}

pub fn solve(problem: &Ma2Problem, tol: f64) -> Ma2Solution {
    let ops = Ops {
        n: problem.samples,
        axes: 2 * problem.active,
        d1: diff_matrix(problem.samples, 1),
        d2: diff_matrix(problem.samples, 2),
    };
    let len = ops.len();
    assert_eq!(problem.g_prime.len(), len);
    let log_det_g = problem.det_g.ln();
    let residual = |u: &[f64], b: f64| -> Option<(Vec<f64>, Vec<Matrix2<C64>>)> {
        let hess = ops.hessian(u, problem.active);
        let x: Vec<Matrix2<C64>> = (0..len).map(|p| problem.g_prime[p] + hess[p]).collect();
        if !x.iter().all(positive2) {
            return None;
        }
        let r = (0..len).map(|p| det2(&x[p]).ln() - log_det_g - problem.f[p] - b).collect();
        Some((r, x))
    };

    let mut u = vec![0.0; len];
    let mut b = 0.0;
    let (mut r, mut x) = residual(&u, b).expect("reference metric must be positive");
    let mut iters = 0;
    while inf_norm(&r) > tol {
        assert!(iters < 60, "oracle Newton did not converge");
        let xinv: Vec<Matrix2<C64>> = x.iter().map(|m| m.try_inverse().expect("positive")).collect();
        let apply = |z: &[f64]| -> Vec<f64> {
            let (v, db) = (&z[..len], z[len]);
            let hv = ops.hessian(v, problem.active);
            let mut out: Vec<f64> = (0..len).map(|p| (xinv[p] * hv[p]).trace().re - db).collect();
            out.push(v.iter().sum::<f64>() / len as f64);
            out
        };
        let mut rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        rhs.push(0.0);
        let step = bicgstab(apply, &rhs, 1e-13, 5000);
        let current = inf_norm(&r);
        let mut t = 1.0;
        loop {
            let trial_u: Vec<f64> = (0..len).map(|p| u[p] + t * step[p]).collect();
            let trial_b = b + t * step[len];
            if let Some((tr, tx)) = residual(&trial_u, trial_b) {
                if inf_norm(&tr) < current {
                    u = trial_u;
                    b = trial_b;
                    r = tr;
                    x = tx;
                    break;
                }
            }
            t *= 0.5;
            assert!(t > 1e-9, "oracle damping exhausted");
        }
        iters += 1;
    }
    let mean = u.iter().sum::<f64>() / len as f64;
    Ma2Solution { u: u.iter().map(|v| v - mean).collect(), b, residual_inf: inf_norm(&r), newton_iters: iters }
}
