// Copyright 2026 Adiabat Contributors
// SPDX-License-Identifier: Apache-2.0

//! Chebyshev–Gauss–Lobatto grid on `[0, 1]`.
//!
//! Sampled quantities are represented by their values at the grid nodes.
//! Off-grid values come from barycentric interpolation, integrals from the
//! Chebyshev expansion (Clenshaw–Curtis).

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};

pub const DEFAULT_GRID_SIZE: usize = 65;
pub const MIN_GRID_SIZE: usize = 33;

#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    nodes: Vec<f64>,
    bary: Vec<f64>,
}

impl TimeGrid {
    /// Grid of `n` nodes; `n` must be odd and at least [`MIN_GRID_SIZE`].
    pub fn new(n: usize) -> Result<Self> {
        if n < MIN_GRID_SIZE || n.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "grid size must be odd and at least {MIN_GRID_SIZE}, got {n}"
            )));
        }
        Ok(Self::with_size(n))
    }

    /// Grid of any size `n >= 2`, without the production constraints.
    pub fn with_size(n: usize) -> Self {
        assert!(n >= 2, "grid needs two nodes");
        let m = (n - 1) as f64;
        let nodes = (0..n).map(|i| 0.5 * (1.0 - (PI * i as f64 / m).cos())).collect();
        let bary = (0..n)
            .map(|i| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                if i == 0 || i == n - 1 {
                    0.5 * s
                } else {
                    s
                }
            })
            .collect();
        Self { nodes, bary }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Interpolation weights at `t`: `f(t) ≈ Σ w_i f(t_i)`.
    pub fn interpolation_weights(&self, t: f64) -> Vec<f64> {
        let n = self.len();
        let mut w = vec![0.0; n];
        for (i, &ti) in self.nodes.iter().enumerate() {
            if (t - ti).abs() < 1e-15 {
                w[i] = 1.0;
                return w;
            }
        }
        let mut total = 0.0;
        for i in 0..n {
            w[i] = self.bary[i] / (t - self.nodes[i]);
            total += w[i];
        }
        w.iter_mut().for_each(|x| *x /= total);
        w
    }

    pub fn interpolate(&self, values: &[f64], t: f64) -> f64 {
        self.interpolation_weights(t).iter().zip(values).map(|(w, v)| w * v).sum()
    }

    pub fn interpolate_matrix(&self, values: &[ComplexMatrix], t: f64) -> ComplexMatrix {
        let w = self.interpolation_weights(t);
        let mut acc = ComplexMatrix::zeros(values[0].dim());
        for (wi, m) in w.iter().zip(values) {
            if *wi != 0.0 {
                acc += &m.scale_real(*wi);
            }
        }
        acc
    }

    /// Chebyshev coefficients `a_k` with `f = Σ a_k T_k(1 - 2t)`.
    pub fn chebyshev_coefficients(&self, values: &[f64]) -> Vec<f64> {
        let n = self.len() - 1;
        let m = n as f64;
        (0..=n)
            .map(|k| {
                let mut s = 0.0;
                for (i, &v) in values.iter().enumerate() {
                    let f = if i == 0 || i == n { 0.5 } else { 1.0 };
                    s += f * v * (PI * (i * k) as f64 / m).cos();
                }
                let a = 2.0 * s / m;
                if k == 0 || k == n {
                    0.5 * a
                } else {
                    a
                }
            })
            .collect()
    }

    /// Spectral derivative at the nodes.
    pub fn differentiate(&self, values: &[f64]) -> Vec<f64> {
        let n = self.len();
        let d = self.diff_matrix();
        (0..n).map(|i| (0..n).map(|j| d[i][j] * values[j]).sum()).collect()
    }

    /// Chebyshev differentiation matrix with respect to `t`.
    pub fn diff_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let x: Vec<f64> = self.nodes.iter().map(|t| 1.0 - 2.0 * t).collect();
        let c: Vec<f64> = (0..n)
            .map(|i| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                if i == 0 || i == n - 1 {
                    2.0 * s
                } else {
                    s
                }
            })
            .collect();
        let mut d = vec![vec![0.0; n]; n];
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                if i != j {
                    d[i][j] = c[i] / c[j] / (x[i] - x[j]);
                    row += d[i][j];
                }
            }
            d[i][i] = -row;
        }
        // dx/dt = -2
        for row in d.iter_mut() {
            for v in row.iter_mut() {
                *v *= -2.0;
            }
        }
        d
    }

    /// `∫_0^1 f dt`.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        let a = self.chebyshev_coefficients(values);
        let mut s = 0.0;
        for (k, ak) in a.iter().enumerate() {
            if k % 2 == 0 {
                s += ak * 2.0 / (1.0 - (k * k) as f64);
            }
        }
        0.5 * s
    }

    /// `∫_0^{t_i} f dt` at every node.
    pub fn cumulative_integral(&self, values: &[f64]) -> Vec<f64> {
        let a = self.chebyshev_coefficients(values);
        let b = antiderivative_coefficients(&a);
        let f1: f64 = b.iter().sum();
        let n = self.len() - 1;
        (0..=n)
            .map(|i| {
                let theta = PI * i as f64 / n as f64;
                let fx: f64 = b.iter().enumerate().map(|(k, bk)| bk * (k as f64 * theta).cos()).sum();
                0.5 * (f1 - fx)
            })
            .collect()
    }

    /// Largest of the last three Chebyshev coefficients relative to the largest one.
    pub fn tail_ratio(&self, values: &[f64]) -> f64 {
        let a = self.chebyshev_coefficients(values);
        let max = a.iter().map(|x| x.abs()).fold(0.0, f64::max);
        if max == 0.0 {
            return 0.0;
        }
        let n = a.len();
        a[n.saturating_sub(3)..].iter().map(|x| x.abs()).fold(0.0, f64::max) / max
    }

    /// [`tail_ratio`](Self::tail_ratio) over every entry of a sampled matrix function.
    pub fn matrix_tail_ratio(&self, values: &[ComplexMatrix]) -> f64 {
        let dim = values[0].dim();
        let scale = values.iter().map(|m| m.max_abs()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                for part in [|z: C64| z.re, |z: C64| z.im] {
                    let v: Vec<f64> = values.iter().map(|m| part(m[(i, j)])).collect();
                    let a = self.chebyshev_coefficients(&v);
                    let n = a.len();
                    let tail = a[n - 3..].iter().map(|x| x.abs()).fold(0.0, f64::max);
                    worst = worst.max(tail / scale);
                }
            }
        }
        worst
    }
}

fn antiderivative_coefficients(a: &[f64]) -> Vec<f64> {
    let n = a.len() - 1;
    let get = |k: usize| if k <= n { a[k] } else { 0.0 };
    let mut b = vec![0.0; n + 2];
    if n >= 1 {
        b[1] = get(0) - 0.5 * get(2);
    } else {
        b[1] = get(0);
    }
    for k in 2..=n + 1 {
        b[k] = (get(k - 1) - get(k + 1)) / (2.0 * k as f64);
    }
    b
}

/// Function on `[0, 1]` stored by its Chebyshev coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct ChebSeries {
    coeffs: Vec<f64>,
}

impl ChebSeries {
    pub fn zero() -> Self {
        Self { coeffs: vec![0.0] }
    }

    pub fn from_samples(grid: &TimeGrid, values: &[f64]) -> Self {
        Self {
            coeffs: grid.chebyshev_coefficients(values),
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Clenshaw evaluation.
    pub fn eval(&self, t: f64) -> f64 {
        let x = 1.0 - 2.0 * t;
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * x * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        self.coeffs[0] + x * b1 - b2
    }

    /// Antiderivative vanishing at `t = 0`.
    pub fn integral(&self) -> ChebSeries {
        // F(t) = ½ (G(1) - G(x)) with G' = f in x
        let b = antiderivative_coefficients(&self.coeffs);
        let g1: f64 = b.iter().sum();
        let mut coeffs: Vec<f64> = b.iter().map(|v| -0.5 * v).collect();
        coeffs[0] += 0.5 * g1;
        ChebSeries { coeffs }
    }
}
