// Copyright 2026 Adiabat Contributors
// SPDX-License-Identifier: Apache-2.0

//! Propagators of `iε ∂ₜU(t,s) = A(t) U(t,s)`.
//!
//! The integrated quantity is always the rescaled propagator
//! `Ũ(t,s) = e^{-∫ₛᵗ ω/ε} U(t,s)`; the removed exponent is returned as a log
//! scale so that raw propagators are only ever handled as pairs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::GeneratorFamily;
use crate::grid::{ChebSeries, TimeGrid, DEFAULT_GRID_SIZE};
use crate::linalg::{ComplexMatrix, C64, I, ZERO};
use crate::ode::Integrator;
use crate::scaled::ScaledMatrix;

/// Largest supported Dyson order.
pub const MAX_DYSON_ORDER: usize = 6;
const GL_POINTS: usize = 12;

/// Matrix-valued function of real time.
pub trait MatrixFunction: Sync {
    fn dim(&self) -> usize;
    fn at(&self, t: f64) -> ComplexMatrix;
}

impl MatrixFunction for GeneratorFamily {
    fn dim(&self) -> usize {
        GeneratorFamily::dim(self)
    }
    fn at(&self, t: f64) -> ComplexMatrix {
        self.eval(t)
    }
}

/// Adapts a closure to [`MatrixFunction`].
pub struct FnMatrix<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(f64) -> ComplexMatrix + Sync> FnMatrix<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(f64) -> ComplexMatrix + Sync> MatrixFunction for FnMatrix<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn at(&self, t: f64) -> ComplexMatrix {
        (self.f)(t)
    }
}

/// `A(t) + scale * B(t)`.
pub struct SumFamily<'a, A: MatrixFunction + ?Sized, B: MatrixFunction + ?Sized> {
    pub a: &'a A,
    pub b: &'a B,
    pub scale: f64,
}

impl<A: MatrixFunction + ?Sized, B: MatrixFunction + ?Sized> MatrixFunction for SumFamily<'_, A, B> {
    fn dim(&self) -> usize {
        self.a.dim()
    }
    fn at(&self, t: f64) -> ComplexMatrix {
        self.a.at(t) + self.b.at(t).scale_real(self.scale)
    }
}

/// Growth rate `ω(t)` used to rescale propagators, with its antiderivative.
#[derive(Clone, Debug, PartialEq)]
pub struct OmegaProfile {
    series: ChebSeries,
    primitive: ChebSeries,
}

impl OmegaProfile {
    pub fn zero() -> Self {
        Self {
            series: ChebSeries::zero(),
            primitive: ChebSeries::zero(),
        }
    }

    pub fn from_samples(grid: &TimeGrid, values: &[f64]) -> Self {
        let series = ChebSeries::from_samples(grid, values);
        let primitive = series.integral();
        Self { series, primitive }
    }

    /// `ω(t) = max_k Im λ_k(t)` sampled on a Chebyshev grid of the family.
    pub fn from_family(family: &impl MatrixFunction) -> Result<Self> {
        let grid = TimeGrid::with_size(DEFAULT_GRID_SIZE);
        let mut values = Vec::with_capacity(grid.len());
        for &t in grid.nodes() {
            let ev = family.at(t).eigenvalues()?;
            values.push(ev.iter().map(|z| z.im).fold(f64::NEG_INFINITY, f64::max));
        }
        Ok(Self::from_samples(&grid, &values))
    }

    pub fn is_zero(&self) -> bool {
        self.series.coeffs().iter().all(|&c| c == 0.0)
    }

    pub fn value(&self, t: f64) -> f64 {
        self.series.eval(t)
    }

    /// `∫ₛᵗ ω`.
    pub fn integral(&self, s: f64, t: f64) -> f64 {
        self.primitive.eval(t) - self.primitive.eval(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionSummary {
    pub epsilon: f64,
    pub s: f64,
    pub t: f64,
    pub norm: f64,
    pub log_scale: f64,
    pub steps: usize,
    pub est_error: f64,
}

/// Rescaled propagator `Ũ(t,s)` with the removed exponent.
#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionResult {
    pub epsilon: f64,
    pub s: f64,
    pub t: f64,
    pub matrix: ComplexMatrix,
    pub log_scale: f64,
    pub steps: usize,
    pub est_error: f64,
}

impl EvolutionResult {
    pub fn scaled(&self) -> ScaledMatrix {
        ScaledMatrix::new(self.matrix.clone(), self.log_scale)
    }

    pub fn summary(&self) -> EvolutionSummary {
        EvolutionSummary {
            epsilon: self.epsilon,
            s: self.s,
            t: self.t,
            norm: self.matrix.norm2(),
            log_scale: self.log_scale,
            steps: self.steps,
            est_error: self.est_error,
        }
    }

    /// The unrescaled propagator; refused when the scale is too large to materialise.
    pub fn raw(&self) -> Result<ComplexMatrix> {
        if self.log_scale.abs() > 200.0 {
            return Err(Error::InvalidArgument(format!(
                "log scale {} too large to materialise the raw propagator",
                self.log_scale
            )));
        }
        Ok(self.matrix.scale_real(self.log_scale.exp()))
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1], got {epsilon}")));
    }
    Ok(())
}

/// `Ũ(t,s)` sampled at every entry of `times`, starting from `Ũ(times[0], times[0]) = I`.
///
/// Times may run in either direction but must be monotone.
pub fn evolve_sampled(
    family: &(impl MatrixFunction + ?Sized),
    epsilon: f64,
    times: &[f64],
    omega: &OmegaProfile,
    tol: f64,
) -> Result<Vec<EvolutionResult>> {
    check_epsilon(epsilon)?;
    let s = *times
        .first()
        .ok_or_else(|| Error::InvalidArgument("need at least one time".into()))?;
    let last = *times.last().expect("nonempty");
    let n = family.dim();
    let inv_eps = 1.0 / epsilon;
    let rhs = |t: f64, y: &[C64], d: &mut [C64]| {
        let a = family.at(t);
        let w = if omega.is_zero() { 0.0 } else { omega.value(t) };
        let shift = C64::new(-w * inv_eps, 0.0);
        let mi = -I * inv_eps;
        for i in 0..n {
            for j in 0..n {
                let mut acc = ZERO;
                for k in 0..n {
                    acc += a[(i, k)] * y[k * n + j];
                }
                d[i * n + j] = mi * acc + shift * y[i * n + j];
            }
        }
    };
    let y0 = ComplexMatrix::identity(n).to_row_major();
    let mut integ = Integrator::new(rhs, s, y0, tol, last - s)?;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        integ.advance_to(t)?;
        out.push(EvolutionResult {
            epsilon,
            s,
            t,
            matrix: ComplexMatrix::from_row_slice(n, integ.state()),
            log_scale: omega.integral(s, t) * inv_eps,
            steps: integ.stats.steps,
            est_error: integ.stats.est_error,
        });
    }
    Ok(out)
}

/// `Ũ(t,s)` for the generator `A`, rescaled by `omega`.
pub fn evolve(
    family: &(impl MatrixFunction + ?Sized),
    epsilon: f64,
    s: f64,
    t: f64,
    omega: &OmegaProfile,
    tol: f64,
) -> Result<EvolutionResult> {
    if !((0.0..=1.0).contains(&s) && (0.0..=1.0).contains(&t)) {
        return Err(Error::InvalidArgument(format!("times must lie in [0, 1], got s = {s}, t = {t}")));
    }
    let mut r = evolve_sampled(family, epsilon, &[s, t], omega, tol)?;
    Ok(r.pop().expect("two samples"))
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(m, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(m, z);
        x[m - 1 - i] = z;
        w[m - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

fn legendre(m: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = m as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, dp)
}

fn legendre_all(m: usize, z: f64) -> Vec<f64> {
    let mut p = vec![0.0; m + 1];
    p[0] = 1.0;
    if m >= 1 {
        p[1] = z;
    }
    for k in 2..=m {
        p[k] = ((2 * k - 1) as f64 * z * p[k - 1] - (k - 1) as f64 * p[k - 2]) / k as f64;
    }
    p
}

/// `Q[i][j] = ∫_{-1}^{x_i} ℓ_j`, the cumulative integration matrix on Gauss–Legendre nodes.
fn gl_integration_matrix(x: &[f64], w: &[f64]) -> Vec<Vec<f64>> {
    let m = x.len();
    // ℓ_j = Σ_k c_{jk} P_k with c_{jk} = (k + ½) w_j P_k(x_j) (discrete orthogonality)
    let pj: Vec<Vec<f64>> = x.iter().map(|&xj| legendre_all(m, xj)).collect();
    let mut q = vec![vec![0.0; m]; m];
    for i in 0..m {
        let pi = legendre_all(m, x[i]);
        // ∫_{-1}^{x} P_k = (P_{k+1} - P_{k-1}) / (2k + 1), ∫ P_0 = x + 1
        let ints: Vec<f64> = (0..m)
            .map(|k| {
                if k == 0 {
                    x[i] + 1.0
                } else {
                    (pi[k + 1] - pi[k - 1]) / (2 * k + 1) as f64
                }
            })
            .collect();
        for j in 0..m {
            let mut s = 0.0;
            for k in 0..m {
                s += (k as f64 + 0.5) * w[j] * pj[j][k] * ints[k];
            }
            q[i][j] = s;
        }
    }
    q
}

/// Truncated Dyson series for `iε ∂ₜS = (A + εB) S` around the base propagator `T` of `A`.
///
/// Returns `Σ_{n ≤ order} (-i)^n ∫…∫ T(t,s₁)B(s₁)…B(sₙ)T(sₙ,s)`, computed in the
/// interaction picture with composite Gauss–Legendre panels.
pub fn dyson_expand(
    base: &(impl MatrixFunction + ?Sized),
    perturbation: &(impl MatrixFunction + ?Sized),
    epsilon: f64,
    s: f64,
    t: f64,
    order: usize,
    tol: f64,
) -> Result<ComplexMatrix> {
    if order > MAX_DYSON_ORDER {
        return Err(Error::OrderTooHigh {
            order,
            max: MAX_DYSON_ORDER,
        });
    }
    check_epsilon(epsilon)?;
    let n = base.dim();
    if perturbation.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: perturbation.dim(),
        });
    }
    let span = t - s;
    if span == 0.0 || order == 0 {
        let r = evolve_sampled(base, epsilon, &[s, t], &OmegaProfile::zero(), tol)?;
        return Ok(r[1].matrix.clone());
    }
    let a_scale = (0..=4)
        .map(|k| base.at(s + span * k as f64 / 4.0).norm2())
        .fold(1.0_f64, f64::max);
    let panel_len = (0.5 * epsilon / a_scale).min(span.abs() / 2.0);
    let panels = (span.abs() / panel_len).ceil().max(2.0) as usize;
    let (gx, gw) = gauss_legendre(GL_POINTS);
    let q = gl_integration_matrix(&gx, &gw);
    let h = span / panels as f64;
    let mut times = vec![s];
    for p in 0..panels {
        let a = s + p as f64 * h;
        for &x in &gx {
            times.push(a + 0.5 * h * (x + 1.0));
        }
        times.push(a + h);
    }
    let props = evolve_sampled(base, epsilon, &times, &OmegaProfile::zero(), tol)?;
    // B̃(u) = T(u,s)^{-1} B(u) T(u,s) at the quadrature nodes of each panel
    let mut btilde: Vec<Vec<ComplexMatrix>> = Vec::with_capacity(panels);
    for p in 0..panels {
        let mut panel = Vec::with_capacity(GL_POINTS);
        for i in 0..GL_POINTS {
            let idx = 1 + p * (GL_POINTS + 1) + i;
            let tu = &props[idx].matrix;
            let b = perturbation.at(times[idx]);
            panel.push(&(&tu.inverse()? * &b) * tu);
        }
        btilde.push(panel);
    }
    let t_end = &props.last().expect("nonempty").matrix;
    let mut total = ComplexMatrix::identity(n);
    // values of I_{k-1} at the panel nodes; I_0 = identity
    let mut prev: Vec<Vec<ComplexMatrix>> = vec![vec![ComplexMatrix::identity(n); GL_POINTS]; panels];
    let mut coeff = C64::new(1.0, 0.0);
    for _k in 1..=order {
        coeff *= -I;
        let mut next: Vec<Vec<ComplexMatrix>> = Vec::with_capacity(panels);
        let mut carry = ComplexMatrix::zeros(n);
        for p in 0..panels {
            let f: Vec<ComplexMatrix> = (0..GL_POINTS).map(|j| &btilde[p][j] * &prev[p][j]).collect();
            let mut vals = Vec::with_capacity(GL_POINTS);
            for i in 0..GL_POINTS {
                let mut acc = carry.clone();
                for j in 0..GL_POINTS {
                    acc += &f[j].scale_real(0.5 * h * q[i][j]);
                }
                vals.push(acc);
            }
            for j in 0..GL_POINTS {
                carry += &f[j].scale_real(0.5 * h * gw[j]);
            }
            next.push(vals);
        }
        total += &carry.scale(coeff);
        prev = next;
    }
    Ok(t_end * &total)
}

/// `M exp(∫ₛᵗ (ω + M ‖B‖))`, a bound on a perturbed propagator.
pub fn perturbation_bound_check(
    m: f64,
    omega_fn: impl Fn(f64) -> f64,
    b_norm_fn: impl Fn(f64) -> f64,
    s: f64,
    t: f64,
) -> Result<f64> {
    if !(m >= 1.0) {
        return Err(Error::InvalidArgument(format!("bound constant must be at least 1, got {m}")));
    }
    let (gx, gw) = gauss_legendre(8);
    let panels = 64;
    let h = (t - s) / panels as f64;
    let mut integral = 0.0;
    for p in 0..panels {
        let a = s + p as f64 * h;
        for (x, w) in gx.iter().zip(&gw) {
            let u = a + 0.5 * h * (x + 1.0);
            integral += 0.5 * h * w * (omega_fn(u) + m * b_norm_fn(u));
        }
    }
    Ok(m * integral.exp())
}
