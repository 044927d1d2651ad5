// Copyright 2026 Adiabat Contributors
// SPDX-License-Identifier: Apache-2.0

//! Time-dependent generators `H(t)` on `[0, 1]`.
//!
//! Every family can be evaluated at complex times. Taylor coefficients are
//! exact for polynomial and conjugated-constant families and come from a
//! discrete Cauchy integral on a circle in complex time otherwise.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::jet::MatrixJet;
use crate::linalg::{ComplexMatrix, C64, I, ONE, ZERO};

/// Points on the Cauchy circle used for Taylor coefficients.
const CAUCHY_POINTS: usize = 128;
/// Cauchy circle radius as a fraction of the distance to the nearest singularity.
const CAUCHY_RADIUS_FRACTION: f64 = 0.6;

#[derive(Clone, Debug, PartialEq)]
pub enum FamilyKind {
    /// `H(t) = Σ_m C_m t^m`.
    Polynomial { coeffs: Vec<ComplexMatrix> },
    /// `H(t) = e^{-itL} H_0 e^{itL}`.
    RotatedConstant { h0: ComplexMatrix, l: ComplexMatrix },
    /// `½ [[tanh((t - ½)/δ), c], [c, -tanh((t - ½)/δ)]]`.
    TwoLevel { delta: f64, coupling: f64 },
}

/// A named analytic matrix family.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorFamily {
    pub name: String,
    pub kind: FamilyKind,
    dim: usize,
}

/// Parameters of the three-level conjugated example.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntroParams {
    pub a: C64,
    pub k: C64,
}

impl IntroParams {
    pub fn new(a: C64, k: C64) -> Self {
        Self { a, k }
    }

    pub fn real(a: f64, k: f64) -> Self {
        Self::new(C64::new(a, 0.0), C64::new(k, 0.0))
    }

    pub fn h0(&self) -> ComplexMatrix {
        ComplexMatrix::from_row_slice(3, &[ZERO, self.a, ZERO, ZERO, ZERO, ZERO, ZERO, ZERO, ONE])
    }

    pub fn l(&self) -> ComplexMatrix {
        let mk = -self.k;
        ComplexMatrix::from_row_slice(3, &[ZERO, ZERO, mk, mk, ZERO, ZERO, ZERO, ZERO, ZERO])
    }

    /// `S(t) = e^{-itL}`.
    pub fn s(&self, t: C64) -> ComplexMatrix {
        self.l().scale(-I * t).exp()
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

impl GeneratorFamily {
    pub fn new(name: impl Into<String>, kind: FamilyKind) -> Result<Self> {
        let dim = match &kind {
            FamilyKind::Polynomial { coeffs } => {
                let first = coeffs
                    .first()
                    .ok_or_else(|| Error::InvalidArgument("polynomial family needs a coefficient".into()))?;
                for c in coeffs {
                    if c.dim() != first.dim() {
                        return Err(Error::DimensionMismatch {
                            expected: first.dim(),
                            found: c.dim(),
                        });
                    }
                }
                first.dim()
            }
            FamilyKind::RotatedConstant { h0, l } => {
                if h0.dim() != l.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: h0.dim(),
                        found: l.dim(),
                    });
                }
                h0.dim()
            }
            FamilyKind::TwoLevel { delta, coupling } => {
                if !(delta.is_finite() && *delta > 0.0 && coupling.is_finite()) {
                    return Err(Error::InvalidArgument(format!(
                        "two-level family needs delta > 0 and finite coupling, got {delta}, {coupling}"
                    )));
                }
                2
            }
        };
        Ok(Self {
            name: name.into(),
            kind,
            dim,
        })
    }

    /// Three-level example: a Jordan block at 0 and an eigenvalue 1, conjugated by `e^{-itL}`.
    pub fn intro_example(params: IntroParams) -> Self {
        Self::new(
            "intro_example",
            FamilyKind::RotatedConstant {
                h0: params.h0(),
                l: params.l(),
            },
        )
        .expect("dimensions agree")
    }

    /// `N(t) = [[t, -1], [t², -t]]`, nilpotent of index 2 for all `t`.
    pub fn nilpotent_example() -> Self {
        let c0 = ComplexMatrix::from_real_rows(&[&[0.0, -1.0], &[0.0, 0.0]]);
        let c1 = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]);
        let c2 = ComplexMatrix::from_real_rows(&[&[0.0, 0.0], &[1.0, 0.0]]);
        Self::new("nilpotent_example", FamilyKind::Polynomial { coeffs: vec![c0, c1, c2] })
            .expect("dimensions agree")
    }

    pub fn polynomial_family(coeffs: Vec<ComplexMatrix>) -> Result<Self> {
        Self::new("polynomial", FamilyKind::Polynomial { coeffs })
    }

    pub fn rotated_constant(h0: ComplexMatrix, l: ComplexMatrix) -> Result<Self> {
        Self::new("rotated_constant", FamilyKind::RotatedConstant { h0, l })
    }

    pub fn two_level(delta: f64, coupling: f64) -> Result<Self> {
        Self::new("two_level", FamilyKind::TwoLevel { delta, coupling })
    }

    /// Constant family `H(t) = H_0`.
    pub fn constant(h0: ComplexMatrix) -> Self {
        Self::new("constant", FamilyKind::Polynomial { coeffs: vec![h0] }).expect("single coefficient")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, t: f64) -> ComplexMatrix {
        self.eval_complex(C64::new(t, 0.0))
    }

    pub fn eval_complex(&self, z: C64) -> ComplexMatrix {
        match &self.kind {
            FamilyKind::Polynomial { coeffs } => {
                let mut acc = ComplexMatrix::zeros(self.dim);
                for c in coeffs.iter().rev() {
                    acc = acc.scale(z) + c;
                }
                acc
            }
            FamilyKind::RotatedConstant { h0, l } => {
                let s = l.scale(-I * z).exp();
                let s_inv = l.scale(I * z).exp();
                &(&s * h0) * &s_inv
            }
            FamilyKind::TwoLevel { delta, coupling } => {
                let th = ((z - 0.5) / delta).tanh() * 0.5;
                let c = C64::new(0.5 * coupling, 0.0);
                ComplexMatrix::from_row_slice(2, &[th, c, c, -th])
            }
        }
    }

    /// `H'(t)`.
    pub fn deriv(&self, t: f64) -> ComplexMatrix {
        match &self.kind {
            FamilyKind::Polynomial { coeffs } => {
                let mut acc = ComplexMatrix::zeros(self.dim);
                for (m, c) in coeffs.iter().enumerate().skip(1).rev() {
                    acc = acc.scale_real(t) + c.scale_real(m as f64);
                }
                acc
            }
            FamilyKind::RotatedConstant { l, .. } => l.commutator(&self.eval(t)).scale(-I),
            FamilyKind::TwoLevel { delta, .. } => {
                let sech = 1.0 / ((t - 0.5) / delta).cosh();
                let v = C64::new(0.5 * sech * sech / delta, 0.0);
                ComplexMatrix::from_row_slice(2, &[v, ZERO, ZERO, -v])
            }
        }
    }

    /// Distance from real `t` to the nearest complex singularity (`inf` for entire families).
    pub fn singularity_distance(&self, t: f64) -> f64 {
        match &self.kind {
            FamilyKind::TwoLevel { delta, .. } => {
                let y = 0.5 * PI * delta;
                ((t - 0.5).powi(2) + y * y).sqrt()
            }
            _ => f64::INFINITY,
        }
    }

    /// Taylor jet of `H` about `t0` up to `degree`.
    pub fn taylor(&self, t0: f64, degree: usize) -> Result<MatrixJet> {
        match &self.kind {
            FamilyKind::Polynomial { coeffs } => {
                let mut out = Vec::with_capacity(degree + 1);
                for k in 0..=degree {
                    let mut acc = ComplexMatrix::zeros(self.dim);
                    for (m, c) in coeffs.iter().enumerate().skip(k) {
                        acc += &c.scale_real(binomial(m, k) * t0.powi((m - k) as i32));
                    }
                    out.push(acc);
                }
                MatrixJet::from_coeffs(&out)
            }
            FamilyKind::RotatedConstant { l, .. } => {
                // (d/dt)^k H = (-i ad_L)^k H
                let mut out = Vec::with_capacity(degree + 1);
                let mut term = self.eval(t0);
                for k in 0..=degree {
                    if k > 0 {
                        term = l.commutator(&term).scale(-I / k as f64);
                    }
                    out.push(term.clone());
                }
                MatrixJet::from_coeffs(&out)
            }
            FamilyKind::TwoLevel { .. } => {
                let r = CAUCHY_RADIUS_FRACTION * self.singularity_distance(t0);
                self.taylor_cauchy(t0, degree, r, CAUCHY_POINTS)
            }
        }
    }

    /// Taylor coefficients from `m` samples of `H` on the circle `|z - t0| = r`.
    pub fn taylor_cauchy(&self, t0: f64, degree: usize, r: f64, m: usize) -> Result<MatrixJet> {
        if m <= degree {
            return Err(Error::InvalidArgument(format!(
                "Cauchy sum needs more than {degree} points, got {m}"
            )));
        }
        let samples: Vec<ComplexMatrix> = (0..m)
            .map(|j| {
                let z = C64::new(t0, 0.0) + C64::from_polar(r, 2.0 * PI * j as f64 / m as f64);
                self.eval_complex(z)
            })
            .collect();
        let mut out = Vec::with_capacity(degree + 1);
        for k in 0..=degree {
            let mut acc = ComplexMatrix::zeros(self.dim);
            for (j, s) in samples.iter().enumerate() {
                let w = C64::from_polar(1.0, -2.0 * PI * (j * k) as f64 / m as f64);
                acc += &s.scale(w);
            }
            out.push(acc.scale_real(1.0 / (m as f64 * r.powi(k as i32))));
        }
        MatrixJet::from_coeffs(&out)
    }
}
