use crate::error::{Error, Result};
use crate::form_algebra::{cone_margin, p_operator, HermitianMatrix, Metric};
use crate::par;
use crate::torus::{MatrixField, ScalarField, Spectral, TorusGrid};

/// Required cone margin of `u*` when manufacturing a problem.
pub const MANUFACTURE_MARGIN: f64 = 0.1;

/// Data of the equation: constant Kähler metric `g`, Hermitian metric field `h`
/// (the form `ω_h`), and the right-hand side function `F`.
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    g: Metric,
    h: MatrixField,
    f: ScalarField,
}

impl ProblemSpec {
    /// Validates shapes and pointwise positivity of `h`.
    pub fn new(g: Metric, h: MatrixField, f: ScalarField) -> Result<Self> {
        let grid = *f.grid();
        if *h.grid() != grid {
            return Err(Error::Problem("h and F live on different grids".into()));
        }
        if g.dim() != grid.n() {
            return Err(Error::Problem(format!(
                "metric is {}x{}, grid has n = {}",
                g.dim(),
                g.dim(),
                grid.n()
            )));
        }
        let min_h = h.min_eigenvalue();
        if !(min_h > 0.0) {
            return Err(Error::Problem(format!(
                "h is not positive definite everywhere (min eigenvalue {min_h:e})"
            )));
        }
        Ok(Self { g, h, f })
    }

    /// `h = g`, `F = 0`; solved by `(u, b) = (0, 0)`.
    pub fn trivial(grid: TorusGrid, g: Metric) -> Result<Self> {
        let h = MatrixField::constant(grid, g.matrix())?;
        Self::new(g, h, ScalarField::zeros(grid))
    }

    pub fn grid(&self) -> &TorusGrid {
        self.f.grid()
    }

    pub fn n(&self) -> usize {
        self.g.dim()
    }

    pub fn g(&self) -> &Metric {
        &self.g
    }

    pub fn h(&self) -> &MatrixField {
        &self.h
    }

    pub fn f(&self) -> &ScalarField {
        &self.f
    }

    pub fn with_f(&self, f: ScalarField) -> Result<Self> {
        Self::new(self.g.clone(), self.h.clone(), f)
    }

    /// `log det h` pointwise.
    pub fn log_det_h(&self) -> ScalarField {
        self.h.map_scalar(|h| h.det().ln())
    }

    /// `log(ω_h^n / ω^n) − F`, whose extrema bound `b`.
    pub fn b_bound_profile(&self) -> ScalarField {
        let log_det_g = self.g.det().ln();
        let ldh = self.log_det_h();
        ldh.zip_map(&self.f, |lh, f| lh - log_det_g - f)
            .expect("same grid")
    }

    /// Fraction of spectral magnitude of `F` in the top third of each axis' band,
    /// relative to the peak; small values mean `F` is resolved.
    pub fn f_tail_ratio(&self) -> f64 {
        spectral_tail_ratio(&self.f)
    }
}

/// `max |F̂_k|` over bins with some `|k_a| > N/3`, divided by `max |F̂_k|`.
pub fn spectral_tail_ratio(f: &ScalarField) -> f64 {
    let grid = *f.grid();
    let sp = Spectral::new(grid);
    let spec = sp.forward(f.values());
    let cutoff = grid.samples() as f64 / 3.0;
    let peak = spec.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return 0.0;
    }
    let tail = spec
        .iter()
        .enumerate()
        .filter(|(bin, _)| {
            grid.multi_index(*bin)
                .iter()
                .any(|&b| (grid.wavenumber(b) as f64).abs() > cutoff)
        })
        .map(|(_, z)| z.norm())
        .fold(0.0, f64::max);
    tail / peak
}

/// `g̃(u) = h + ((Δu) g − u_{ij̄})/(n−1)` at every grid point.
pub fn gtilde_field(g: &Metric, h: &MatrixField, u: &ScalarField) -> Result<MatrixField> {
    let hess = Spectral::new(*u.grid()).hessian(u)?;
    MatrixField::from_fn(*u.grid(), |i| p_operator(g, &h.at(i), &hess.at(i)))
}

/// Smallest cone margin of `g̃` relative to `g` over the grid.
pub fn min_cone_margin(g: &Metric, gtilde: &MatrixField) -> f64 {
    let m = par::map_indexed(gtilde.grid().len(), |i| cone_margin(g, &gtilde.at(i)));
    par::min(&m)
}

/// Builds `F = log det g̃(u*) − log det g`, so that `(u*, 0)` solves the equation
/// on the grid. `u*` must keep `g̃` inside the cone with margin at least
/// [`MANUFACTURE_MARGIN`].
pub fn manufacture(g: &Metric, h: &MatrixField, u_star: &ScalarField) -> Result<ProblemSpec> {
    let gt = gtilde_field(g, h, u_star)?;
    let margin = min_cone_margin(g, &gt);
    if !(margin > MANUFACTURE_MARGIN) {
        return Err(Error::ManufactureCone {
            margin,
            required: MANUFACTURE_MARGIN,
        });
    }
    let log_det_g = g.det().ln();
    let f = gt.map_scalar(|m| m.det().ln() - log_det_g);
    ProblemSpec::new(g.clone(), h.clone(), f)
}

/// `(inf, sup)` of `log det h − log det g − F`; every solution has `b` in this range.
pub fn estimate_b_bounds(spec: &ProblemSpec) -> (f64, f64) {
    let profile = spec.b_bound_profile();
    (profile.inf(), profile.sup())
}

/// `h = φ · base` with `φ = 1 + amplitude · mode`.
pub fn conformal_metric_field(
    base: &HermitianMatrix,
    amplitude: f64,
    mode: &ScalarField,
) -> Result<MatrixField> {
    let factor = mode.map(|m| 1.0 + amplitude * m);
    if !(factor.inf() > 0.0) {
        return Err(Error::Problem("conformal factor must stay positive".into()));
    }
    MatrixField::conformal(base, &factor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_u_star_with_h_equal_g_gives_zero_f() {
        let grid = TorusGrid::full(2, 8).unwrap();
        let g = Metric::new(HermitianMatrix::from_real_diagonal(&[1.0, 2.0]).unwrap()).unwrap();
        let h = MatrixField::constant(grid, g.matrix()).unwrap();
        let spec = manufacture(&g, &h, &ScalarField::zeros(grid)).unwrap();
        assert!(spec.f().max_abs() < 1e-14);
    }

    #[test]
    fn zero_u_star_general_h() {
        let grid = TorusGrid::full(2, 8).unwrap();
        let g = Metric::identity(2);
        let mode = ScalarField::from_fn(grid, |x| (2.0 * PI * x[0]).cos());
        let h = conformal_metric_field(g.matrix(), 0.2, &mode).unwrap();
        let spec = manufacture(&g, &h, &ScalarField::zeros(grid)).unwrap();
        let expected = h.map_scalar(|m| m.det().ln() - g.det().ln());
        assert!(spec.f().max_abs_diff(&expected).unwrap() < 1e-14);
    }

    #[test]
    fn manufacture_rejects_large_u_star() {
        let grid = TorusGrid::full(2, 8).unwrap();
        let g = Metric::identity(2);
        let h = MatrixField::constant(grid, g.matrix()).unwrap();
        let u = ScalarField::from_fn(grid, |x| 2.0 * (2.0 * PI * x[0]).cos());
        assert!(matches!(
            manufacture(&g, &h, &u),
            Err(Error::ManufactureCone { .. })
        ));
    }

    #[test]
    fn b_bounds_examples() {
        let grid = TorusGrid::full(2, 8).unwrap();
        let g = Metric::identity(2);
        assert_eq!(
            estimate_b_bounds(&ProblemSpec::trivial(grid, g.clone()).unwrap()),
            (0.0, 0.0)
        );
        let f = ScalarField::from_fn(grid, |x| 0.3 * (2.0 * PI * x[1]).sin() + 0.1);
        let spec = ProblemSpec::trivial(grid, g)
            .unwrap()
            .with_f(f.clone())
            .unwrap();
        let (lo, hi) = estimate_b_bounds(&spec);
        assert!((lo + f.sup()).abs() < 1e-15);
        assert!((hi + f.inf()).abs() < 1e-15);
    }

    #[test]
    fn rejects_indefinite_h() {
        let grid = TorusGrid::full(2, 4).unwrap();
        let bad = MatrixField::constant(
            grid,
            &HermitianMatrix::from_real_diagonal(&[1.0, -1.0]).unwrap(),
        )
        .unwrap();
        assert!(ProblemSpec::new(Metric::identity(2), bad, ScalarField::zeros(grid)).is_err());
    }
}
