// Copyright 2026 Adiabat Contributors
// SPDX-License-Identifier: Apache-2.0

//! Values carried together with a natural-log scale so that quantities of
//! size `e^{1/ε}` never overflow.

use serde::{Deserialize, Serialize};

use crate::linalg::ComplexMatrix;

/// Positive magnitude `value * e^{log_scale}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaledValue {
    pub value: f64,
    pub log_scale: f64,
}

impl ScaledValue {
    pub fn new(value: f64, log_scale: f64) -> Self {
        Self { value, log_scale }
    }

    pub fn from_ln(ln: f64) -> Self {
        Self {
            value: 1.0,
            log_scale: ln,
        }
    }

    /// Natural log of the represented magnitude (`-inf` for zero).
    pub fn ln(&self) -> f64 {
        self.value.ln() + self.log_scale
    }

    /// The raw magnitude; overflows to infinity when it does not fit.
    pub fn raw(&self) -> f64 {
        self.value * self.log_scale.exp()
    }

    /// Renormalises so that `value` lies in `[1, e)` (or is zero).
    pub fn normalized(&self) -> Self {
        if self.value == 0.0 || !self.value.is_finite() {
            return *self;
        }
        Self::from_ln(self.ln())
    }

    pub fn ratio(&self, other: &ScaledValue) -> f64 {
        (self.value / other.value) * (self.log_scale - other.log_scale).exp()
    }
}

/// Matrix `matrix * e^{log_scale}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaledMatrix {
    pub matrix: ComplexMatrix,
    pub log_scale: f64,
}

impl ScaledMatrix {
    pub fn new(matrix: ComplexMatrix, log_scale: f64) -> Self {
        Self { matrix, log_scale }
    }

    pub fn norm2(&self) -> ScaledValue {
        ScaledValue::new(self.matrix.norm2(), self.log_scale)
    }

    /// Product, with scales added.
    pub fn mul(&self, other: &ScaledMatrix) -> ScaledMatrix {
        ScaledMatrix::new(&self.matrix * &other.matrix, self.log_scale + other.log_scale)
    }

    /// Left multiplication by an unscaled matrix.
    pub fn left(&self, m: &ComplexMatrix) -> ScaledMatrix {
        ScaledMatrix::new(m * &self.matrix, self.log_scale)
    }

    /// Right multiplication by an unscaled matrix.
    pub fn right(&self, m: &ComplexMatrix) -> ScaledMatrix {
        ScaledMatrix::new(&self.matrix * m, self.log_scale)
    }

    /// Expresses the matrix relative to a different log scale.
    pub fn rescaled_to(&self, log_scale: f64) -> ComplexMatrix {
        self.matrix.scale_real((self.log_scale - log_scale).exp())
    }
}
