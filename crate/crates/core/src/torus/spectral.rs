use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use super::{MatrixField, ScalarField, TorusGrid};
use crate::error::{Error, Result};
use crate::form_algebra::{HermitianMatrix, Metric};
use crate::par;
use crate::C64;

const LINES_PER_TASK: usize = 64;

/// Fourier differentiation on a [`TorusGrid`].
///
/// Second derivatives along a single real axis keep the Nyquist bin; mixed and
/// first derivatives drop it. Every operator is then a real Fourier multiplier,
/// so outputs for real inputs are real (complex Hessians Hermitian) and the
/// Laplacian only annihilates constants.
///
/// The plan is immutable after construction and can be shared across threads.
pub struct Spectral {
    grid: TorusGrid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// `(j, k)` with `j ≤ k < active`, the independent complex Hessian entries.
    pairs: Vec<(usize, usize)>,
    /// Symbol of `∂_j ∂_k̄` per bin, laid out `[bin][pair]`.
    hess_symbols: Vec<C64>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral")
            .field("grid", &self.grid)
            .finish()
    }
}

impl Spectral {
    pub fn new(grid: TorusGrid) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(grid.samples());
        let inverse = planner.plan_fft_inverse(grid.samples());
        let m = grid.active();
        let pairs: Vec<(usize, usize)> = (0..m).flat_map(|j| (j..m).map(move |k| (j, k))).collect();
        let per_bin = par::map_indexed(grid.len(), |bin| {
            let bins = grid.multi_index(bin);
            pairs
                .iter()
                .map(|&(j, k)| complex_hessian_symbol(&grid, &bins, j, k))
                .collect::<Vec<_>>()
        });
        let hess_symbols = per_bin.into_iter().flatten().collect();
        Self {
            grid,
            forward,
            inverse,
            pairs,
            hess_symbols,
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    /// Independent complex Hessian entries `(j, k)`, `j ≤ k`.
    pub fn hessian_pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Symbol of `∂_j∂_k̄` at `bin` for pair index `p` of [`Self::hessian_pairs`].
    pub fn hessian_symbol(&self, bin: usize, p: usize) -> C64 {
        self.hess_symbols[bin * self.pairs.len() + p]
    }

    /// Unnormalized forward DFT of real samples.
    pub fn forward(&self, values: &[f64]) -> Vec<C64> {
        let mut data: Vec<C64> = values.iter().map(|&v| C64::new(v, 0.0)).collect();
        self.transform(&mut data, &self.forward);
        data
    }

    /// Inverse DFT normalized by the number of points.
    pub fn inverse(&self, mut spectrum: Vec<C64>) -> Vec<C64> {
        self.transform(&mut spectrum, &self.inverse);
        let scale = 1.0 / self.grid.len() as f64;
        for z in spectrum.iter_mut() {
            *z *= scale;
        }
        spectrum
    }

    pub fn inverse_real(&self, spectrum: Vec<C64>) -> Vec<f64> {
        self.inverse(spectrum).into_iter().map(|z| z.re).collect()
    }

    /// Multiplies the spectrum of `values` by `symbol(bin)` and transforms back.
    pub fn apply_multiplier(
        &self,
        values: &[f64],
        symbol: impl Fn(usize) -> C64 + Sync + Send,
    ) -> Vec<f64> {
        let mut spec = self.forward(values);
        par::for_each_chunk_mut(&mut spec, 4096, |c, chunk| {
            for (i, z) in chunk.iter_mut().enumerate() {
                *z *= symbol(c * 4096 + i);
            }
        });
        self.inverse_real(spec)
    }

    /// Complex Hessian entries `u_{jk̄}` for every pair in [`Self::hessian_pairs`].
    pub fn hessian_entries(&self, values: &[f64]) -> Vec<Vec<C64>> {
        let spec = self.forward(values);
        self.hessian_entries_from_spectrum(&spec)
    }

    pub(crate) fn hessian_entries_from_spectrum(&self, spec: &[C64]) -> Vec<Vec<C64>> {
        let np = self.pairs.len();
        let jobs: Vec<usize> = (0..np).collect();
        par::map_jobs(jobs, |p| {
            let s: Vec<C64> = spec
                .iter()
                .enumerate()
                .map(|(bin, z)| z * self.hess_symbols[bin * np + p])
                .collect();
            self.inverse(s)
        })
    }

    /// Complex Hessian field `u_{ij̄}`; rows and columns of inactive coordinates are zero.
    pub fn hessian(&self, u: &ScalarField) -> Result<MatrixField> {
        self.check_grid(u.grid())?;
        let entries = self.hessian_entries(u.values());
        let n = self.grid.n();
        let mut data = vec![C64::new(0.0, 0.0); self.grid.len() * n * n];
        for (p, &(j, k)) in self.pairs.iter().enumerate() {
            for (i, z) in entries[p].iter().enumerate() {
                let block = &mut data[i * n * n..(i + 1) * n * n];
                if j == k {
                    block[j * n + j] = C64::new(z.re, 0.0);
                } else {
                    block[j * n + k] = *z;
                    block[k * n + j] = z.conj();
                }
            }
        }
        MatrixField::new(self.grid, data)
    }

    /// `Δu = g^{ij̄} u_{ij̄}` for a constant metric, as a single Fourier multiplier.
    pub fn laplacian(&self, g: &Metric, u: &ScalarField) -> Result<ScalarField> {
        self.check_grid(u.grid())?;
        let weights = trace_weights(&self.pairs, g.inverse());
        let np = self.pairs.len();
        let values = self.apply_multiplier(u.values(), |bin| {
            let sym: f64 = (0..np)
                .map(|p| (weights[p] * self.hess_symbols[bin * np + p]).re)
                .sum();
            C64::new(sym, 0.0)
        });
        Ok(ScalarField::from_vec_unchecked(self.grid, values))
    }

    /// `∂_j u` for each active complex coordinate `j`.
    pub fn holomorphic_gradient(&self, u: &ScalarField) -> Result<Vec<Vec<C64>>> {
        self.check_grid(u.grid())?;
        let spec = self.forward(u.values());
        let jobs: Vec<usize> = (0..self.grid.active()).collect();
        Ok(par::map_jobs(jobs, |j| {
            let s: Vec<C64> = spec
                .iter()
                .enumerate()
                .map(|(bin, z)| {
                    let bins = self.grid.multi_index(bin);
                    let p = first_derivative_wavenumber(&self.grid, bins[2 * j]);
                    let q = first_derivative_wavenumber(&self.grid, bins[2 * j + 1]);
                    // ∂_j = ½(∂_x − i∂_y) acts on e^{2πi(px+qy)} as π(ip + q).
                    z * C64::new(PI * q, PI * p)
                })
                .collect();
            self.inverse(s)
        }))
    }

    /// `|∂u|²_g = g^{ij̄} ∂_i u ∂_j̄ u` pointwise.
    pub fn gradient_norm_sq(&self, g: &Metric, u: &ScalarField) -> Result<ScalarField> {
        let du = self.holomorphic_gradient(u)?;
        let m = self.grid.active();
        let ginv = g.inverse();
        let values = par::map_indexed(self.grid.len(), |x| {
            let mut s = C64::new(0.0, 0.0);
            for i in 0..m {
                for j in 0..m {
                    s += ginv[(j, i)] * du[i][x] * du[j][x].conj();
                }
            }
            s.re
        });
        Ok(ScalarField::from_vec_unchecked(self.grid, values))
    }

    fn check_grid(&self, grid: &TorusGrid) -> Result<()> {
        if *grid != self.grid {
            return Err(Error::Shape(format!(
                "field grid {grid:?} does not match plan grid {:?}",
                self.grid
            )));
        }
        Ok(())
    }

    fn transform(&self, data: &mut [C64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.grid.samples();
        let len = data.len();
        let lines = len / n;
        let chunk = n * LINES_PER_TASK.min(lines).max(1);
        for axis in 0..self.grid.real_axes() {
            let stride = self.grid.stride(axis);
            if stride == 1 {
                par::for_each_chunk_mut(data, chunk, |_, c| fft.process(c));
                continue;
            }
            let mut scratch = vec![C64::new(0.0, 0.0); len];
            {
                let src: &[C64] = data;
                par::for_each_chunk_mut(&mut scratch, chunk, |c, lines_buf| {
                    let first = c * (chunk / n);
                    for (l, line) in lines_buf.chunks_mut(n).enumerate() {
                        let li = first + l;
                        let base = (li / stride) * stride * n + li % stride;
                        for (k, z) in line.iter_mut().enumerate() {
                            *z = src[base + k * stride];
                        }
                    }
                    fft.process(lines_buf);
                });
            }
            let block = stride * n;
            let scratch = &scratch;
            par::for_each_chunk_mut(data, block, |outer, blk| {
                for inner in 0..stride {
                    let line =
                        &scratch[(outer * stride + inner) * n..(outer * stride + inner + 1) * n];
                    for (k, z) in line.iter().enumerate() {
                        blk[k * stride + inner] = *z;
                    }
                }
            });
        }
    }
}

fn first_derivative_wavenumber(grid: &TorusGrid, bin: usize) -> f64 {
    if grid.is_nyquist(bin) {
        0.0
    } else {
        grid.wavenumber(bin) as f64
    }
}

/// Symbol of `∂_a ∂_b` along real axes `a`, `b`.
fn real_second_symbol(grid: &TorusGrid, bins: &[usize], a: usize, b: usize) -> f64 {
    let two_pi = 2.0 * PI;
    if a == b {
        let k = grid.wavenumber(bins[a]) as f64;
        -(two_pi * k).powi(2)
    } else {
        let ka = first_derivative_wavenumber(grid, bins[a]);
        let kb = first_derivative_wavenumber(grid, bins[b]);
        -(two_pi * two_pi) * ka * kb
    }
}

/// `∂_j∂_k̄ = ¼[(∂_{x_j}∂_{x_k} + ∂_{y_j}∂_{y_k}) + i(∂_{x_j}∂_{y_k} − ∂_{y_j}∂_{x_k})]`.
fn complex_hessian_symbol(grid: &TorusGrid, bins: &[usize], j: usize, k: usize) -> C64 {
    let (xj, yj, xk, yk) = (2 * j, 2 * j + 1, 2 * k, 2 * k + 1);
    let re = real_second_symbol(grid, bins, xj, xk) + real_second_symbol(grid, bins, yj, yk);
    let im = real_second_symbol(grid, bins, xj, yk) - real_second_symbol(grid, bins, yj, xk);
    C64::new(0.25 * re, 0.25 * im)
}

/// Weights `w_p` with `tr(M H) = Σ_p Re(w_p H_p)` over the independent entries `H_p = H_{jk}`, `j ≤ k`.
pub(crate) fn trace_weights(pairs: &[(usize, usize)], m: &nalgebra::DMatrix<C64>) -> Vec<C64> {
    pairs
        .iter()
        .map(|&(j, k)| {
            if j == k {
                C64::new(m[(j, j)].re, 0.0)
            } else {
                m[(k, j)] * 2.0
            }
        })
        .collect()
}

/// Complex Hessian of `u` on a one-off plan.
pub fn spectral_hessian(u: &ScalarField) -> Result<MatrixField> {
    Spectral::new(*u.grid()).hessian(u)
}

/// `Δu` for the constant metric `g` on a one-off plan.
pub fn laplacian(g: &Metric, u: &ScalarField) -> Result<ScalarField> {
    Spectral::new(*u.grid()).laplacian(g, u)
}

/// Contracts `tr(M · H)` where `H` is a Hessian field and `M` a constant matrix.
pub fn contract_constant(m: &HermitianMatrix, hess: &MatrixField) -> ScalarField {
    hess.map_scalar(|h| (m.as_matrix() * h.as_matrix()).trace().re)
}
