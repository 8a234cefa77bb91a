//! Naive exterior algebra on `C^n` for cross-checking the matrix fast paths.
//!
//! A form is a dense table over basis elements `dz^I ∧ dz̄^J`, with `I` and `J`
//! bitmasks and indices ascending inside each block.

use nalgebra::DMatrix;
use pshma_core::{HermitianMatrix, Metric, C64};

#[derive(Clone, Debug)]
pub struct Form {
    n: usize,
    coef: Vec<C64>,
}

fn merge_sign(a: u32, b: u32) -> f64 {
    // Transpositions needed to sort a ∪ b with a's elements first.
    let mut count = 0;
    for i in 0..32 {
        if a & (1 << i) != 0 {
            count += (b & ((1u32 << i) - 1)).count_ones();
        }
    }
    if count % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl Form {
    pub fn zero(n: usize) -> Self {
        Self { n, coef: vec![C64::new(0.0, 0.0); 1 << (2 * n)] }
    }

    fn idx(&self, i: u32, j: u32) -> usize {
        ((i as usize) << self.n) | j as usize
    }

    pub fn get(&self, i: u32, j: u32) -> C64 {
        self.coef[self.idx(i, j)]
    }

    pub fn add_basis(&mut self, i: u32, j: u32, c: C64) {
        let k = self.idx(i, j);
        self.coef[k] += c;
    }

    /// `√−1 Σ a_{jk̄} dz^j ∧ dz̄^k`.
    pub fn from_11(a: &HermitianMatrix) -> Self {
        let n = a.dim();
        let mut f = Self::zero(n);
        for j in 0..n {
            for k in 0..n {
                f.add_basis(1 << j, 1 << k, C64::i() * a.entry(j, k));
            }
        }
        f
    }

    pub fn scalar(n: usize, c: f64) -> Self {
        let mut f = Self::zero(n);
        f.add_basis(0, 0, C64::new(c, 0.0));
        f
    }

    pub fn wedge(&self, other: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zero(n);
        let full = 1u32 << n;
        for i in 0..full {
            for j in 0..full {
                let a = self.get(i, j);
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for k in 0..full {
                    if i & k != 0 {
                        continue;
                    }
                    for l in 0..full {
                        if j & l != 0 {
                            continue;
                        }
                        let b = other.get(k, l);
                        if b == C64::new(0.0, 0.0) {
                            continue;
                        }
                        let cross = if (j.count_ones() * k.count_ones()) % 2 == 0 { 1.0 } else { -1.0 };
                        let sign = merge_sign(i, k) * merge_sign(j, l) * cross;
                        out.add_basis(i | k, j | l, a * b * sign);
                    }
                }
            }
        }
        out
    }

    pub fn power(&self, k: usize) -> Self {
        (0..k).fold(Self::scalar(self.n, 1.0), |acc, _| acc.wedge(self))
    }

    pub fn top(&self) -> C64 {
        let full = (1u32 << self.n) - 1;
        self.get(full, full)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coef.iter().zip(&other.coef).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.coef.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }
}

/// `(form)/ω^n` for a top-degree form.
pub fn ratio_to_volume(top: &Form, g: &Metric) -> f64 {
    let n = g.dim();
    let vol = Form::from_11(g.matrix()).power(n).top();
    let r = top.top() / vol;
    assert!(r.im.abs() <= 1e-9 * r.re.abs().max(1.0), "top ratio not real: {r}");
    r.re
}

/// `⟨a, b⟩_g` for real (1,1) forms from the index formula with `g^{αλ̄} = (G^{−1})_{λα}`.
pub fn inner_11(g: &Metric, a: &HermitianMatrix, b: &HermitianMatrix) -> f64 {
    let n = g.dim();
    let gi: &DMatrix<C64> = g.inverse();
    let up = |alpha: usize, lambda: usize| gi[(lambda, alpha)];
    // Coefficients of √−1 a_{jk̄} dz^j∧dz̄^k are √−1 a_{jk̄}.
    let mut s = C64::new(0.0, 0.0);
    for alpha in 0..n {
        for beta in 0..n {
            for lambda in 0..n {
                for mu in 0..n {
                    let phi = C64::i() * a.entry(alpha, beta);
                    let psi = C64::i() * b.entry(lambda, mu);
                    s += up(alpha, lambda) * up(mu, beta) * phi * psi.conj();
                }
            }
        }
    }
    s.re
}

/// `*b` for a real (1,1) form, solved from `φ ∧ *b = ⟨φ, b⟩ ω^n/n!` over all
/// basis (1,1) forms `φ = dz^α ∧ dz̄^β`.
pub fn star_11(g: &Metric, b: &HermitianMatrix) -> Form {
    let n = g.dim();
    let full = (1u32 << n) - 1;
    let vol = Form::from_11(g.matrix()).power(n).top();
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    let gi = g.inverse();
    let mut out = Form::zero(n);
    for alpha in 0..n {
        for beta in 0..n {
            // ⟨dz^α∧dz̄^β, b⟩ with coefficient 1 at (α, β̄) only.
            let mut pairing = C64::new(0.0, 0.0);
            for lambda in 0..n {
                for mu in 0..n {
                    pairing += gi[(lambda, alpha)] * gi[(beta, mu)] * (C64::i() * b.entry(lambda, mu)).conj();
                }
            }
            let (i, j) = (full & !(1 << alpha), full & !(1 << beta));
            let mut probe = Form::zero(n);
            probe.add_basis(1 << alpha, 1 << beta, C64::new(1.0, 0.0));
            let mut unit = Form::zero(n);
            unit.add_basis(i, j, C64::new(1.0, 0.0));
            let sign = probe.wedge(&unit).top();
            out.add_basis(i, j, pairing * vol / fact / sign);
        }
    }
    out
}

fn rel(err: f64, scale: f64) -> f64 {
    err / scale.abs().max(1e-300)
}

/// Largest relative disagreement between the matrix fast paths and the naive
/// expansion over `instances` random inputs in dimension `n`.
pub fn compare_fast_paths(n: usize, instances: usize, seed: u64) -> f64 {
    use pshma_core::form_algebra::{
        det_form_top_minus_one, hodge_star_11, metric_power_n_minus_one, pair_with_top, root_n_minus_one,
        wedge11_invariant, wedge_power_n_minus_one, wedge_with_metric_power,
    };
    use pshma_core::sample::{random_hermitian, random_metric, stream_rng};

    let mut rng = stream_rng(seed, 1000 + n as u64);
    let mut worst = 0.0f64;
    for _ in 0..instances {
        let g = random_metric(n, &mut rng);
        let s = random_metric(n, &mut rng);
        let a = random_hermitian(n, &mut rng);
        let b = random_hermitian(n, &mut rng);
        let omega = Form::from_11(g.matrix());
        let fa = Form::from_11(&a);
        let fb = Form::from_11(&b);
        let fs = Form::from_11(s.matrix());
        let om_n2 = omega.power(n - 2);

        let brute = (n * (n - 1)) as f64 * ratio_to_volume(&fa.wedge(&fb).wedge(&om_n2), &g);
        let fast = wedge11_invariant(&g, &a, &b);
        worst = worst.max(rel((brute - fast).abs(), brute.abs().max(fast.abs())));

        let s_pow = fs.power(n - 1);
        let brute = ratio_to_volume(&fa.wedge(&s_pow), &g);
        let fast = pair_with_top(&g, &a, &wedge_power_n_minus_one(s.matrix()).unwrap());
        worst = worst.max(rel((brute - fast).abs(), brute.abs().max(fast.abs())));

        let brute = ratio_to_volume(&fa.wedge(&fb.wedge(&om_n2)), &g);
        let fast = pair_with_top(&g, &a, &wedge_with_metric_power(&g, &b));
        worst = worst.max(rel((brute - fast).abs(), brute.abs().max(fast.abs())));

        let brute = ratio_to_volume(&fa.wedge(&star_11(&g, &b)), &g);
        let fast = pair_with_top(&g, &a, &hodge_star_11(&g, &b));
        let defining = inner_11(&g, &a, &b) / (1..=n).map(|k| k as f64).product::<f64>();
        worst = worst.max(rel((brute - fast).abs(), brute.abs().max(fast.abs())));
        worst = worst.max(rel((brute - defining).abs(), brute.abs().max(defining.abs())));

        // χ^n/ω^n = det(*χ)/det(*ω).
        let brute = ratio_to_volume(&fs.power(n), &g);
        let fast = hodge_star_11(&g, s.matrix()).coefficients().det()
            / hodge_star_11(&g, g.matrix()).coefficients().det();
        worst = worst.max(rel((brute - fast).abs(), brute.abs()));

        // det(S^{n−1})/det(ω^{n−1}) = (S^n/ω^n)^{n−1}.
        let fast = det_form_top_minus_one(&wedge_power_n_minus_one(s.matrix()).unwrap())
            / det_form_top_minus_one(&metric_power_n_minus_one(&g));
        let expect = brute.powi(n as i32 - 1);
        worst = worst.max(rel((expect - fast).abs(), expect.abs()));

        // The root of ψ = *s is a metric whose (n−1)-th power pairs like ψ.
        let psi = hodge_star_11(&g, s.matrix());
        let root = root_n_minus_one(&g, &psi).unwrap();
        let brute = ratio_to_volume(&fa.wedge(&Form::from_11(root.matrix()).power(n - 1)), &g);
        let fast = pair_with_top(&g, &a, &psi);
        worst = worst.max(rel((brute - fast).abs(), brute.abs().max(fast.abs())));
    }
    worst
}
