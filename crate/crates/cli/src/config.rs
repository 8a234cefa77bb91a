//! Run configuration, parsed from TOML and turned into a [`ProblemSpec`].

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use pshma_core::solver::{conformal_metric_field, uniform_schedule, GmresOptions, SolverOptions};
use pshma_core::torus::io;
use pshma_core::{HermitianMatrix, MatrixField, Metric, ProblemSpec, ScalarField, TorusGrid};
use serde::Deserialize;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Solve,
    Manufacture,
    Verify,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub n: usize,
    #[serde(rename = "N")]
    pub samples: usize,
    /// Complex coordinates the fields depend on; defaults to `n`.
    pub active: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    pub output_dir: PathBuf,
    pub g: Option<MatrixEntries>,
    #[serde(default)]
    pub h: HSpec,
    #[serde(rename = "F", default)]
    pub f: FSpec,
    #[serde(default)]
    pub schedule: Schedule,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub manufacture: Option<ManufactureSpec>,
    #[serde(default)]
    pub verify: VerifySpec,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixEntries {
    pub re: Vec<Vec<f64>>,
    pub im: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum HSpec {
    /// `h = g` unless entries are given.
    Constant {
        #[serde(default)]
        re: Option<Vec<Vec<f64>>>,
        #[serde(default)]
        im: Option<Vec<Vec<f64>>>,
    },
    /// `h = (1 + amplitude · mode) g`.
    Conformal { amplitude: f64, mode: Vec<Factor> },
    File { path: PathBuf },
}

impl Default for HSpec {
    fn default() -> Self {
        Self::Constant { re: None, im: None }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum FSpec {
    #[default]
    Zero,
    Fourier { terms: Vec<Term> },
    File { path: PathBuf },
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trig {
    Cos,
    Sin,
}

/// `trig(2π k x[axis])`, with real axes ordered `x¹, y¹, x², y², …`.
#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Factor {
    pub axis: usize,
    pub k: i32,
    pub trig: Trig,
}

/// `coeff · Π factors`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub coeff: f64,
    pub factors: Vec<Factor>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    #[serde(default = "default_steps")]
    pub steps: usize,
    /// Explicit increasing times; overrides `steps`.
    pub times: Option<Vec<f64>>,
}

fn default_steps() -> usize {
    8
}

impl Default for Schedule {
    fn default() -> Self {
        Self { steps: default_steps(), times: None }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub residual: f64,
    pub intermediate: f64,
    pub linear: f64,
    pub linear_max_iters: usize,
    pub min_dt: f64,
    pub cone_floor: f64,
    pub max_newton: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        let o = SolverOptions::default();
        Self {
            residual: o.tol,
            intermediate: o.intermediate_tol,
            linear: o.gmres.rel_tol,
            linear_max_iters: o.gmres.max_iters,
            min_dt: o.min_dt,
            cone_floor: o.cone_floor,
            max_newton: o.max_newton,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManufactureSpec {
    pub terms: Vec<Term>,
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySpec {
    pub dims: Vec<usize>,
    pub trials: usize,
}

impl Default for VerifySpec {
    fn default() -> Self {
        Self { dims: vec![2, 3, 4], trials: 1000 }
    }
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("field `{field}`: {msg}"))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let grid = self.grid()?;
        let axes = grid.real_axes();
        let check_factors = |field: &str, factors: &[Factor]| {
            factors.iter().try_for_each(|f| {
                if f.axis >= axes {
                    Err(invalid(field, format!("axis {} outside 0..{axes}", f.axis)))
                } else {
                    Ok(())
                }
            })
        };
        if let HSpec::Conformal { mode, .. } = &self.h {
            check_factors("h.mode", mode)?;
        }
        if let FSpec::Fourier { terms } = &self.f {
            terms.iter().try_for_each(|t| check_factors("F.terms", &t.factors))?;
        }
        if let Some(m) = &self.manufacture {
            m.terms.iter().try_for_each(|t| check_factors("manufacture.terms", &t.factors))?;
        }
        if self.command == Command::Manufacture && self.manufacture.is_none() {
            return Err(invalid("manufacture", "required for command = \"manufacture\""));
        }
        if self.schedule.steps == 0 {
            return Err(invalid("schedule.steps", "must be positive"));
        }
        if self.verify.dims.iter().any(|&d| !(2..=8).contains(&d)) {
            return Err(invalid("verify.dims", "dimensions must lie in 2..=8"));
        }
        if self.command != Command::Verify {
            self.problem()?;
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<TorusGrid, CliError> {
        TorusGrid::new(self.n, self.samples, self.active.unwrap_or(self.n))
            .map_err(|e| invalid("n/N/active", e))
    }

    pub fn metric(&self) -> Result<Metric, CliError> {
        match &self.g {
            None => Ok(Metric::identity(self.n)),
            Some(e) => {
                let m = hermitian(&e.re, e.im.as_deref(), self.n).map_err(|e| invalid("g", e))?;
                Metric::new(m).map_err(|e| invalid("g", e))
            }
        }
    }

    /// Builds and revalidates the problem; `F` comes from the config, not from manufacture.
    pub fn problem(&self) -> Result<ProblemSpec, CliError> {
        let grid = self.grid()?;
        let g = self.metric()?;
        let h = match &self.h {
            HSpec::Constant { re: None, .. } => MatrixField::constant(grid, g.matrix()),
            HSpec::Constant { re: Some(re), im } => {
                let m = hermitian(re, im.as_deref(), self.n).map_err(|e| invalid("h", e))?;
                MatrixField::constant(grid, &m)
            }
            HSpec::Conformal { amplitude, mode } => {
                let mode = fourier(grid, &[Term { coeff: 1.0, factors: mode.clone() }]);
                conformal_metric_field(g.matrix(), *amplitude, &mode)
            }
            HSpec::File { path } => io::read_matrix(path),
        }
        .map_err(|e| invalid("h", e))?;
        if h.grid() != &grid {
            return Err(invalid("h", "field grid does not match n/N/active"));
        }
        let f = match &self.f {
            FSpec::Zero => ScalarField::zeros(grid),
            FSpec::Fourier { terms } => fourier(grid, terms),
            FSpec::File { path } => io::read_scalar(path).map_err(|e| invalid("F", e))?,
        };
        if f.grid() != &grid {
            return Err(invalid("F", "field grid does not match n/N/active"));
        }
        ProblemSpec::new(g, h, f).map_err(|e| invalid("h/F", e))
    }

    pub fn u_star(&self) -> Option<ScalarField> {
        let grid = self.grid().ok()?;
        self.manufacture.as_ref().map(|m| fourier(grid, &m.terms))
    }

    pub fn solver_options(&self) -> SolverOptions {
        let t = &self.tolerances;
        let schedule = self.schedule.times.clone().unwrap_or_else(|| uniform_schedule(self.schedule.steps));
        SolverOptions {
            schedule,
            tol: t.residual,
            intermediate_tol: t.intermediate,
            max_newton: t.max_newton,
            min_dt: t.min_dt,
            cone_floor: t.cone_floor,
            gmres: GmresOptions { rel_tol: t.linear, max_iters: t.linear_max_iters, ..GmresOptions::default() },
            ..SolverOptions::default()
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        std::env::var_os("OUTPUT_DIR").map(PathBuf::from).unwrap_or_else(|| self.output_dir.clone())
    }
}

fn hermitian(re: &[Vec<f64>], im: Option<&[Vec<f64>]>, n: usize) -> Result<HermitianMatrix, String> {
    if re.len() != n {
        return Err(format!("expected {n}x{n} entries, found {} rows", re.len()));
    }
    let m = HermitianMatrix::from_parts(re, im).map_err(|e| e.to_string())?;
    let raw_defect = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| {
            let im_ij = im.map_or(0.0, |v| v[i][j]);
            let im_ji = im.map_or(0.0, |v| v[j][i]);
            (re[i][j] - re[j][i]).abs() + (im_ij + im_ji).abs()
        })
        .fold(0.0, f64::max);
    if raw_defect > 1e-12 * m.max_abs_entry().max(1.0) {
        return Err("matrix is not Hermitian".into());
    }
    Ok(m)
}

pub fn fourier(grid: TorusGrid, terms: &[Term]) -> ScalarField {
    ScalarField::from_fn(grid, |x| {
        terms
            .iter()
            .map(|t| {
                t.factors
                    .iter()
                    .map(|f| {
                        let arg = 2.0 * PI * f.k as f64 * x[f.axis];
                        match f.trig {
                            Trig::Cos => arg.cos(),
                            Trig::Sin => arg.sin(),
                        }
                    })
                    .product::<f64>()
                    * t.coeff
            })
            .sum()
    })
}
