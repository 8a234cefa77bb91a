//! Residual of the continuity family and its linearization.

use nalgebra::DMatrix;

use super::krylov::{gmres, GmresOptions, GmresStats};
use super::problem::ProblemSpec;
use crate::error::{Error, Result};
use crate::form_algebra::{theta_tensor, HermitianMatrix, Metric};
use crate::par;
use crate::torus::{trace_weights, ScalarField, Spectral};
use crate::C64;

/// Pointwise state of `g̃` at a candidate `(u, b, t)`.
pub struct Evaluation {
    pub residual: ScalarField,
    pub residual_inf: f64,
    pub cone_margin_min: f64,
    gtilde: Vec<Metric>,
}

impl Evaluation {
    pub fn gtilde(&self) -> &[Metric] {
        &self.gtilde
    }
}

/// Evaluates `r = log det g̃ − log det h − t F̂ − b` with `F̂ = F + log(det g / det h)`.
///
/// At `t = 1` this is `log(ω̃^n / ω^n) − F − b`; at `t = 0` the pair `(0, 0)` is an
/// exact solution.
pub struct Evaluator<'a> {
    spec: &'a ProblemSpec,
    spectral: Spectral,
    h_points: Vec<HermitianMatrix>,
    log_det_h: Vec<f64>,
    f_hat: Vec<f64>,
}

impl<'a> Evaluator<'a> {
    pub fn new(spec: &'a ProblemSpec) -> Self {
        let grid = *spec.grid();
        let h_points = par::map_indexed(grid.len(), |i| spec.h().at(i));
        let log_det_h: Vec<f64> = par::map_indexed(grid.len(), |i| h_points[i].det().ln());
        let log_det_g = spec.g().det().ln();
        let f_hat = par::map_indexed(grid.len(), |i| {
            spec.f().values()[i] + log_det_g - log_det_h[i]
        });
        Self {
            spec,
            spectral: Spectral::new(grid),
            h_points,
            log_det_h,
            f_hat,
        }
    }

    pub fn spec(&self) -> &ProblemSpec {
        self.spec
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    /// `g̃ = h + ((Δu) g − u_{ij̄})/(n−1)` at each point, without cone checks.
    pub fn gtilde_points(&self, u: &ScalarField) -> Result<Vec<HermitianMatrix>> {
        if u.grid() != self.spec.grid() {
            return Err(Error::Shape("u does not live on the problem grid".into()));
        }
        let entries = self.spectral.hessian_entries(u.values());
        let pairs = self.spectral.hessian_pairs();
        let n = self.spec.n();
        let g = self.spec.g();
        let ginv = g.inverse();
        let gm = g.matrix().as_matrix();
        let scale = 1.0 / (n as f64 - 1.0);
        Ok(par::map_indexed(u.len(), |x| {
            let mut hess = DMatrix::<C64>::zeros(n, n);
            for (p, &(j, k)) in pairs.iter().enumerate() {
                let z = entries[p][x];
                if j == k {
                    hess[(j, j)] = C64::new(z.re, 0.0);
                } else {
                    hess[(j, k)] = z;
                    hess[(k, j)] = z.conj();
                }
            }
            let lap = (ginv * &hess).trace().re;
            let m = self.h_points[x].as_matrix()
                + (gm * C64::new(lap, 0.0) - hess) * C64::new(scale, 0.0);
            HermitianMatrix::hermitianized(m)
        }))
    }

    /// Residual and cone data; errors if `g̃` leaves the positive cone anywhere.
    pub fn evaluate(&self, u: &ScalarField, b: f64, t: f64) -> Result<Evaluation> {
        let gt = self.gtilde_points(u)?;
        let g = self.spec.g();
        let pieces: Vec<Option<(Metric, f64)>> = par::map_indexed(gt.len(), |i| {
            let margin = g.congruence(&gt[i]).min_eigenvalue();
            if !(margin > 0.0) {
                return None;
            }
            Metric::new(gt[i].clone()).ok().map(|m| (m, margin))
        });
        if pieces.iter().any(Option::is_none) {
            let margin = par::min(&par::map_indexed(gt.len(), |i| {
                g.congruence(&gt[i]).min_eigenvalue()
            }));
            return Err(Error::ConeViolation {
                margin: margin.min(0.0),
            });
        }
        let pieces: Vec<(Metric, f64)> = pieces.into_iter().map(Option::unwrap).collect();
        let margins: Vec<f64> = pieces.iter().map(|p| p.1).collect();
        let residual: Vec<f64> = par::map_indexed(pieces.len(), |i| {
            pieces[i].0.det().ln() - self.log_det_h[i] - t * self.f_hat[i] - b
        });
        let residual = ScalarField::new(*u.grid(), residual)?;
        Ok(Evaluation {
            residual_inf: residual.max_abs(),
            cone_margin_min: par::min(&margins),
            residual,
            gtilde: pieces.into_iter().map(|p| p.0).collect(),
        })
    }

    pub fn linearize(&self, eval: &Evaluation) -> Linearization<'_> {
        Linearization::new(&self.spectral, self.spec.g(), eval.gtilde())
    }
}

/// `(v, db) ↦ Θ^{ij̄} v_{ij̄} − db` frozen at an admissible `g̃`.
pub struct Linearization<'s> {
    spectral: &'s Spectral,
    /// Contraction weights per point, `[point][pair]`.
    weights: Vec<C64>,
    /// Symbol of the grid-averaged operator; the zero bin carries `−1` for `db`.
    precond_symbol: Vec<f64>,
}

impl<'s> Linearization<'s> {
    pub fn new(spectral: &'s Spectral, g: &Metric, gtilde: &[Metric]) -> Self {
        let pairs = spectral.hessian_pairs();
        let np = pairs.len();
        let thetas: Vec<HermitianMatrix> =
            par::map_indexed(gtilde.len(), |i| theta_tensor(g, &gtilde[i]));
        let weights: Vec<C64> = par::map_indexed(gtilde.len(), |i| {
            trace_weights(pairs, thetas[i].as_matrix())
        })
        .into_iter()
        .flatten()
        .collect();
        let mean_w: Vec<C64> = (0..np)
            .map(|p| {
                let re: Vec<f64> = (0..gtilde.len()).map(|i| weights[i * np + p].re).collect();
                let im: Vec<f64> = (0..gtilde.len()).map(|i| weights[i * np + p].im).collect();
                let len = gtilde.len() as f64;
                C64::new(par::pairwise_sum(&re) / len, par::pairwise_sum(&im) / len)
            })
            .collect();
        let precond_symbol = par::map_indexed(gtilde.len(), |bin| {
            if bin == 0 {
                return -1.0;
            }
            let s: f64 = (0..np)
                .map(|p| (mean_w[p] * spectral.hessian_symbol(bin, p)).re)
                .sum();
            if s.abs() < 1e-14 {
                -1.0
            } else {
                s
            }
        });
        Self {
            spectral,
            weights,
            precond_symbol,
        }
    }

    /// `Θ^{ij̄} v_{ij̄}` pointwise.
    pub fn theta_contract(&self, v: &[f64]) -> Vec<f64> {
        let np = self.spectral.hessian_pairs().len();
        let entries = self.spectral.hessian_entries(v);
        par::map_indexed(v.len(), |x| {
            (0..np)
                .map(|p| (self.weights[x * np + p] * entries[p][x]).re)
                .sum()
        })
    }

    /// `Θ^{ij̄} v_{ij̄} − db`.
    pub fn apply(&self, v: &ScalarField, db: f64) -> ScalarField {
        let lv = self.theta_contract(v.values());
        ScalarField::from_vec_unchecked(*v.grid(), lv.into_iter().map(|x| x - db).collect())
    }

    /// Augmented operator on `x = v + db`: the mean of `x` plays the role of `db`.
    fn apply_augmented(&self, x: &[f64]) -> Vec<f64> {
        let mean = par::pairwise_sum(x) / x.len() as f64;
        self.theta_contract(x)
            .into_iter()
            .map(|y| y - mean)
            .collect()
    }

    fn precondition(&self, y: &[f64]) -> Vec<f64> {
        self.spectral
            .apply_multiplier(y, |bin| C64::new(1.0 / self.precond_symbol[bin], 0.0))
    }

    /// Finds mean-zero `v` and `db` with `Θ^{ij̄} v_{ij̄} − db = −rhs` to relative tolerance.
    pub fn solve(
        &self,
        rhs: &ScalarField,
        opts: GmresOptions,
    ) -> Result<(ScalarField, f64, GmresStats)> {
        let b: Vec<f64> = rhs.values().iter().map(|v| -v).collect();
        let (x, stats) = gmres(
            |x| self.apply_augmented(x),
            |y| self.precondition(y),
            &b,
            opts,
        )?;
        let db = par::pairwise_sum(&x) / x.len() as f64;
        let v = x.into_iter().map(|xi| xi - db).collect();
        Ok((ScalarField::from_vec_unchecked(*rhs.grid(), v), db, stats))
    }
}
