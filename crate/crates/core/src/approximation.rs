// Copyright 2026 Adiabat Contributors
// SPDX-License-Identifier: Apache-2.0

//! Adiabatic approximation built on a hierarchy level.
//!
//! The Kato intertwiner `W^q` solves `i W' = K^q W`. The approximate
//! propagator `V^q` is generated by `H^q + ε K^q`; it maps `P_k^q(0)` onto
//! `P_k^q(t)` exactly, and `Φ^q = (W^q)^{-1} V^q W^q(0)` is block diagonal.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::GeneratorFamily;
use crate::fit::{bounded_fit, fit_stretched_exp, variation, GrowthFit, GrowthModel};
use crate::grid::TimeGrid;
use crate::hierarchy::Hierarchy;
use crate::linalg::{ComplexMatrix, C64};
use crate::propagator::{evolve_sampled, EvolutionResult, FnMatrix, OmegaProfile};
use crate::scaled::{ScaledMatrix, ScaledValue};
use crate::spectral::SpectralDecomposition;

/// `Ψ` sup-norms varying by less than this factor across ε count as bounded.
pub const BOUNDED_VARIATION: f64 = 1.1;

#[derive(Clone, Debug)]
pub struct Intertwiner {
    pub q: usize,
    pub epsilon: f64,
    pub w: Vec<ComplexMatrix>,
    pub w_inv: Vec<ComplexMatrix>,
    /// `sup_t ‖W(t) P_k(0) - P_k(t) W(t)‖` per group.
    pub residuals: Vec<f64>,
    /// `sup_t ‖W(t) W(t)^{-1} - I‖`.
    pub inverse_defect: f64,
}

/// Integrates `i W' = K^q W` and, for the inverse, `Z' = i Z K^q`.
pub fn build_intertwiner(h: &Hierarchy, q: usize, tol: f64) -> Result<Intertwiner> {
    let level = h.level(q)?;
    let grid = &h.grid;
    let n = level.k[0].dim();
    let k_fn = FnMatrix::new(n, |t| grid.interpolate_matrix(&level.k, t));
    let zero = OmegaProfile::zero();
    let w: Vec<ComplexMatrix> = evolve_sampled(&k_fn, 1.0, grid.nodes(), &zero, tol)?
        .into_iter()
        .map(|r| r.matrix)
        .collect();
    // transpose of Z solves i (Z^T)' = -K^T Z^T
    let kt_fn = FnMatrix::new(n, |t| -grid.interpolate_matrix(&level.k, t).transpose());
    let w_inv: Vec<ComplexMatrix> = evolve_sampled(&kt_fn, 1.0, grid.nodes(), &zero, tol)?
        .into_iter()
        .map(|r| r.matrix.transpose())
        .collect();
    let id = ComplexMatrix::identity(n);
    let inverse_defect = w
        .iter()
        .zip(&w_inv)
        .map(|(a, b)| (a * b - &id).norm2())
        .fold(0.0, f64::max);
    let residuals = level
        .projectors
        .iter()
        .map(|p| {
            (0..grid.len())
                .map(|i| (&w[i] * &p[0] - &p[i] * &w[i]).norm2())
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(Intertwiner {
        q,
        epsilon: h.epsilon,
        w,
        w_inv,
        residuals,
        inverse_defect,
    })
}

/// Everything derived from `V^q` at one `ε`, sampled on the hierarchy grid.
#[derive(Clone, Debug)]
pub struct ApproximationBundle {
    pub epsilon: f64,
    pub q: usize,
    pub nodes: Vec<f64>,
    /// Rescaled `V^q(t,0)`.
    pub v: Vec<EvolutionResult>,
    /// Rescaled `U(t,0)`.
    pub u: Vec<EvolutionResult>,
    /// Rescaled `Φ^q(t,0)`.
    pub phi: Vec<ComplexMatrix>,
    /// `Ψ_j^q(t,0) = e^{i∫λ_j/ε} Φ^q(t,0) P_j^q(0)` per group and node.
    pub psi: Vec<Vec<ScaledMatrix>>,
    /// `sup_t ‖(Ũ - Ṽ) P_k^q(0)‖` per group.
    pub error_vs_u: Vec<f64>,
    /// `‖Ũ(t,0) - Ṽ(t,0)‖` per node.
    pub error_by_node: Vec<f64>,
    /// `sup_t ‖Ṽ P_k(0) - P_k(t) Ṽ‖` over groups.
    pub intertwining_residual: f64,
    /// `sup_t ‖[Φ̃, P_k(0)]‖` over groups.
    pub block_residual: f64,
    pub intertwiner: Intertwiner,
}

impl ApproximationBundle {
    /// `sup_t ‖Ũ - Ṽ‖`.
    pub fn sup_error(&self) -> f64 {
        self.error_by_node.iter().copied().fold(0.0, f64::max)
    }

    /// `sup_t ‖Ψ_j(t,0)‖` as a scaled value.
    pub fn psi_sup(&self, j: usize) -> ScaledValue {
        self.psi[j]
            .iter()
            .map(|p| p.norm2())
            .max_by(|a, b| a.ln().total_cmp(&b.ln()))
            .expect("nonempty grid")
    }
}

/// `∫_0^{t_i} λ` at every node, real and imaginary parts integrated separately.
fn phase_integral(grid: &TimeGrid, lambda: &[C64]) -> Vec<C64> {
    let re: Vec<f64> = lambda.iter().map(|z| z.re).collect();
    let im: Vec<f64> = lambda.iter().map(|z| z.im).collect();
    let ire = grid.cumulative_integral(&re);
    let iim = grid.cumulative_integral(&im);
    ire.into_iter().zip(iim).map(|(a, b)| C64::new(a, b)).collect()
}

pub fn build_approximation(
    family: &GeneratorFamily,
    h: &Hierarchy,
    q: usize,
    tol: f64,
) -> Result<ApproximationBundle> {
    if q > h.max_level() {
        return Err(Error::InvalidArgument(format!("level {q} not built (max {})", h.max_level())));
    }
    let eps = h.epsilon;
    let grid = &h.grid;
    let level = h.level(q)?;
    let n = family.dim();
    // H^q + εK^q = H + ε (K^q - K^{q-1})
    let correction: Vec<ComplexMatrix> = (0..grid.len())
        .map(|i| {
            let prev = if q == 0 {
                ComplexMatrix::zeros(n)
            } else {
                h.levels[q - 1].k[i].clone()
            };
            (&level.k[i] - &prev).scale_real(eps)
        })
        .collect();
    let v_gen = FnMatrix::new(n, |t| family.eval(t) + grid.interpolate_matrix(&correction, t));
    let omega = OmegaProfile::from_family(family)?;
    let v = evolve_sampled(&v_gen, eps, grid.nodes(), &omega, tol)?;
    let u = evolve_sampled(family, eps, grid.nodes(), &omega, tol)?;
    let intertwiner = build_intertwiner(h, q, tol)?;
    let groups = level.projectors.len();
    let phi: Vec<ComplexMatrix> = (0..grid.len()).map(|i| &intertwiner.w_inv[i] * &v[i].matrix).collect();
    let mut psi = Vec::with_capacity(groups);
    for j in 0..groups {
        let phase = phase_integral(grid, &h.eigenvalue_track(j));
        let p0 = &level.projectors[j][0];
        let track = (0..grid.len())
            .map(|i| {
                let rotation = C64::from_polar(1.0, phase[i].re / eps);
                let m = (&phi[i] * p0).scale(rotation);
                ScaledMatrix::new(m, v[i].log_scale - phase[i].im / eps)
            })
            .collect();
        psi.push(track);
    }
    let mut error_vs_u = vec![0.0_f64; groups];
    let mut error_by_node = Vec::with_capacity(grid.len());
    let mut intertwining_residual: f64 = 0.0;
    let mut block_residual: f64 = 0.0;
    for i in 0..grid.len() {
        let diff = &u[i].matrix - &v[i].matrix;
        error_by_node.push(diff.norm2());
        for j in 0..groups {
            let p0 = &level.projectors[j][0];
            let pt = &level.projectors[j][i];
            error_vs_u[j] = error_vs_u[j].max((&diff * p0).norm2());
            intertwining_residual = intertwining_residual.max((&v[i].matrix * p0 - pt * &v[i].matrix).norm2());
            block_residual = block_residual.max(phi[i].commutator(p0).norm2());
        }
    }
    Ok(ApproximationBundle {
        epsilon: eps,
        q,
        nodes: grid.nodes().to_vec(),
        v,
        u,
        phi,
        psi,
        error_vs_u,
        error_by_node,
        intertwining_residual,
        block_residual,
        intertwiner,
    })
}

/// `‖P_j(t) U(t,s) P_k(s)‖` with the propagator's log scale.
pub fn transition_amplitude(
    u: &EvolutionResult,
    at_t: &SpectralDecomposition,
    at_s: &SpectralDecomposition,
    j: usize,
    k: usize,
) -> Result<ScaledValue> {
    let pj = &at_t
        .groups
        .get(j)
        .ok_or_else(|| Error::InvalidArgument(format!("group {j} out of range")))?
        .projector;
    let pk = &at_s
        .groups
        .get(k)
        .ok_or_else(|| Error::InvalidArgument(format!("group {k} out of range")))?
        .projector;
    Ok(ScaledValue::new((&(pj * &u.matrix) * pk).norm2(), u.log_scale))
}

/// Growth of `sup_t ‖Ψ_j‖` across the bundles' ε values.
///
/// Returns the bounded verdict (`d = 0`) when the sup varies by less than
/// [`BOUNDED_VARIATION`]; otherwise fits the stretched law `model`.
pub fn dephased_growth(bundles: &[ApproximationBundle], j: usize, model: GrowthModel) -> Result<GrowthFit> {
    if bundles.len() < 4 {
        return Err(Error::InsufficientData {
            needed: 4,
            found: bundles.len(),
        });
    }
    if bundles.iter().any(|b| j >= b.psi.len()) {
        return Err(Error::InvalidArgument(format!("group {j} out of range")));
    }
    let eps: Vec<f64> = bundles.iter().map(|b| b.epsilon).collect();
    let ln: Vec<f64> = bundles.iter().map(|b| b.psi_sup(j).ln()).collect();
    if variation(&ln) < BOUNDED_VARIATION {
        return Ok(bounded_fit(model, &ln));
    }
    match model {
        GrowthModel::StretchedExp => fit_stretched_exp(&eps, &ln, false),
        GrowthModel::PrefactoredStretchedExp => fit_stretched_exp(&eps, &ln, true),
        other => Err(Error::InvalidArgument(format!("dephased growth uses a stretched law, got {other:?}"))),
    }
}

/// Serializable per-ε summary of a bundle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BundleSummary {
    pub epsilon: f64,
    pub q: usize,
    pub sup_error: f64,
    pub error_vs_u: Vec<f64>,
    pub intertwining_residual: f64,
    pub block_residual: f64,
    pub intertwiner_residual: f64,
    pub psi_sup: Vec<ScaledValue>,
}

impl From<&ApproximationBundle> for BundleSummary {
    fn from(b: &ApproximationBundle) -> Self {
        Self {
            epsilon: b.epsilon,
            q: b.q,
            sup_error: b.sup_error(),
            error_vs_u: b.error_vs_u.clone(),
            intertwining_residual: b.intertwining_residual,
            block_residual: b.block_residual,
            intertwiner_residual: b.intertwiner.residuals.iter().copied().fold(0.0, f64::max),
            psi_sup: (0..b.psi.len()).map(|j| b.psi_sup(j)).collect(),
        }
    }
}
