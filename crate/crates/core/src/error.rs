// Copyright 2026 Adiabat Contributors
// SPDX-License-Identifier: Apache-2.0

//! Error type shared by every module of the crate.

use num_complex::Complex64;
use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// `H - λ` is numerically singular.
    #[error("resolvent is near-singular at lambda = {lambda}: smallest singular value {sigma_min:e}")]
    NearSingular { lambda: Complex64, sigma_min: f64 },

    /// A quadrature circle passes too close to an eigenvalue.
    #[error(
        "contour (center {center}, radius {radius:e}) passes within {distance:e} of eigenvalue {eigenvalue}"
    )]
    ContourTooClose {
        center: Complex64,
        radius: f64,
        eigenvalue: Complex64,
        distance: f64,
    },

    /// An iterative procedure ran out of budget.
    #[error("{what} did not converge: {detail}")]
    NoConvergence { what: &'static str, detail: String },

    /// Two eigenvalue clusters are closer than the requested gap floor.
    #[error("spectral gap {distance:e} below floor {gap_floor:e}{}", at_time(*t))]
    GapViolation {
        t: Option<f64>,
        distance: f64,
        gap_floor: f64,
    },

    /// Matrix dimensions do not agree.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// Caller supplied an argument outside the admissible range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The adaptive integrator needed a step below the floor.
    #[error("step size underflow at t = {t}: step {step:e}")]
    StepUnderflow { t: f64, step: f64 },

    /// The integrated state contains NaN or infinity.
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },

    /// Dyson expansion order above the supported maximum.
    #[error("expansion order {order} exceeds maximum {max}")]
    OrderTooHigh { order: usize, max: usize },

    /// An eigenvalue of a hierarchy generator reached a level-0 circle.
    #[error("gap closed at hierarchy level {level}, t = {t}")]
    GapClosed { level: usize, t: f64 },

    /// Chebyshev tail of a sampled quantity is too large for the grid.
    #[error("grid too coarse for level {level}: relative Chebyshev tail {tail:e}")]
    GridTooCoarse { level: usize, tail: f64 },

    /// Too few points for a fit.
    #[error("insufficient data: need {needed} points, got {found}")]
    InsufficientData { needed: usize, found: usize },

    /// Fit input has no usable variation.
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// Matrix supplied where a nilpotent was required is not nilpotent.
    #[error("matrix is not nilpotent: residual {residual:e}")]
    NotNilpotent { residual: f64 },

    /// Numerical and structural boundedness disagree.
    #[error(
        "verdict conflict: numerical says bounded = {numerical}, structural says bounded = {structural}; {hint}"
    )]
    VerdictConflict {
        numerical: bool,
        structural: bool,
        hint: String,
    },

    /// Closed-form parameters hit a removable singularity.
    #[error("degenerate closed-form parameters: {0}")]
    DegenerateParams(String),

    /// Closed-form transition formula requires `a k < 0`.
    #[error("transition formula requires a*k real and negative, got {0}")]
    WrongSignParams(Complex64),
}

fn at_time(t: Option<f64>) -> String {
    match t {
        Some(t) => format!(" at t = {t}"),
        None => String::new(),
    }
}
