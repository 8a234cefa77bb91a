//! Problem set shared by the end-to-end tests and the acceptance run.

use std::f64::consts::PI;

use pshma_core::solver::{conformal_metric_field, manufacture};
use pshma_core::{HermitianMatrix, MatrixField, Metric, ProblemSpec, ScalarField, TorusGrid};

pub struct Manufactured {
    pub name: &'static str,
    pub spec: ProblemSpec,
    pub u_star: ScalarField,
}

fn tau(x: f64) -> f64 {
    2.0 * PI * x
}

/// A fixed non-diagonal metric.
pub fn skew_metric(n: usize) -> Metric {
    let m = HermitianMatrix::from_fn(n, |i, j| {
        if i == j {
            pshma_core::C64::new(1.0 + 0.25 * i as f64, 0.0)
        } else if i < j {
            pshma_core::C64::new(0.15, 0.1 * (j - i) as f64)
        } else {
            pshma_core::C64::new(0.15, -0.1 * (i - j) as f64)
        }
    })
    .unwrap();
    Metric::new(m).unwrap()
}

/// `n = 2`, full grid, `h = g = I`, `u* = 0.05 cos(2πx¹) cos(2πx²)`.
pub fn flat_two(samples: usize) -> Manufactured {
    let grid = TorusGrid::full(2, samples).unwrap();
    let g = Metric::identity(2);
    let h = MatrixField::constant(grid, g.matrix()).unwrap();
    let u_star = ScalarField::from_fn(grid, |x| 0.05 * tau(x[0]).cos() * tau(x[2]).cos());
    let spec = manufacture(&g, &h, &u_star).unwrap();
    Manufactured { name: "flat_n2", spec, u_star }
}

/// `n = 3`, fields of two complex coordinates, conformal `h = (1 + 0.1 cos 2πx¹) g`.
pub fn conformal_three() -> Manufactured {
    let grid = TorusGrid::new(3, 8, 2).unwrap();
    let g = skew_metric(3);
    let mode = ScalarField::from_fn(grid, |x| tau(x[0]).cos());
    let h = conformal_metric_field(g.matrix(), 0.1, &mode).unwrap();
    let u_star = ScalarField::from_fn(grid, |x| {
        0.03 * tau(x[0]).cos() * tau(x[3]).cos() + 0.02 * tau(x[2] + x[1]).sin()
    });
    let spec = manufacture(&g, &h, &u_star).unwrap();
    Manufactured { name: "conformal_n3", spec, u_star }
}

/// `n = 2`, full grid at `N = 8`, skew `g`, conformal `h`, prescribed Fourier `F`.
pub fn cross_oracle_problem() -> ProblemSpec {
    let grid = TorusGrid::full(2, 8).unwrap();
    let g = skew_metric(2);
    let mode = ScalarField::from_fn(grid, |x| tau(x[1]).sin());
    let h = conformal_metric_field(g.matrix(), 0.1, &mode).unwrap();
    let f = ScalarField::from_fn(grid, |x| 0.2 * tau(x[0]).cos() * tau(x[3]).cos() + 0.1 * tau(x[2]).sin());
    ProblemSpec::new(g, h, f).unwrap()
}
