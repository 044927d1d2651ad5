// Copyright 2026 Adiabat Contributors
// SPDX-License-Identifier: Apache-2.0

//! Truncated Taylor series with matrix coefficients.
//!
//! A [`MatrixJet`] of degree `K` stores `A_0, …, A_K` with
//! `A(t0 + h) ≈ Σ A_k h^k`. Products are truncated Cauchy products and the
//! derivative shifts coefficients, so derivatives of projectors are exact up
//! to the truncation order instead of being differenced on a grid.

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64, ZERO};
use crate::spectral::{Contour, CONTOUR_TOL, MAX_CONTOUR_NODES};

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixJet {
    n: usize,
    degree: usize,
    data: Vec<C64>,
}

#[inline]
fn gemm_acc(n: usize, a: &[C64], b: &[C64], out: &mut [C64]) {
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == ZERO {
                continue;
            }
            let brow = &b[k * n..(k + 1) * n];
            let orow = &mut out[i * n..(i + 1) * n];
            for (o, &bkj) in orow.iter_mut().zip(brow) {
                *o += aik * bkj;
            }
        }
    }
}

impl MatrixJet {
    pub fn zeros(n: usize, degree: usize) -> Self {
        Self {
            n,
            degree,
            data: vec![ZERO; (degree + 1) * n * n],
        }
    }

    pub fn constant(m: &ComplexMatrix, degree: usize) -> Self {
        let mut j = Self::zeros(m.dim(), degree);
        j.set_coeff(0, m);
        j
    }

    /// Builds a jet from coefficient matrices `A_0, …, A_K`.
    pub fn from_coeffs(coeffs: &[ComplexMatrix]) -> Result<Self> {
        let first = coeffs
            .first()
            .ok_or_else(|| Error::InvalidArgument("jet needs at least one coefficient".into()))?;
        let n = first.dim();
        let mut j = Self::zeros(n, coeffs.len() - 1);
        for (k, c) in coeffs.iter().enumerate() {
            if c.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: c.dim(),
                });
            }
            j.set_coeff(k, c);
        }
        Ok(j)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    fn block(&self) -> usize {
        self.n * self.n
    }

    pub fn coeff_slice(&self, k: usize) -> &[C64] {
        let b = self.block();
        &self.data[k * b..(k + 1) * b]
    }

    fn coeff_slice_mut(&mut self, k: usize) -> &mut [C64] {
        let b = self.block();
        &mut self.data[k * b..(k + 1) * b]
    }

    pub fn coeff(&self, k: usize) -> ComplexMatrix {
        ComplexMatrix::from_row_slice(self.n, self.coeff_slice(k))
    }

    pub fn set_coeff(&mut self, k: usize, m: &ComplexMatrix) {
        let n = self.n;
        let dst = self.coeff_slice_mut(k);
        for i in 0..n {
            for j in 0..n {
                dst[i * n + j] = m[(i, j)];
            }
        }
    }

    /// `A_0`, the value at the expansion point.
    pub fn value(&self) -> ComplexMatrix {
        self.coeff(0)
    }

    pub fn truncate(&self, degree: usize) -> Self {
        let degree = degree.min(self.degree);
        Self {
            n: self.n,
            degree,
            data: self.data[..(degree + 1) * self.block()].to_vec(),
        }
    }

    /// `Σ A_k h^k`.
    pub fn eval(&self, h: f64) -> ComplexMatrix {
        let b = self.block();
        let mut acc = vec![ZERO; b];
        for k in (0..=self.degree).rev() {
            let c = self.coeff_slice(k);
            for (a, &x) in acc.iter_mut().zip(c) {
                *a = *a * h + x;
            }
        }
        ComplexMatrix::from_row_slice(self.n, &acc)
    }

    /// Truncated Cauchy product; the result has the smaller degree.
    pub fn mul(&self, other: &Self) -> Self {
        let degree = self.degree.min(other.degree);
        let mut out = Self::zeros(self.n, degree);
        let n = self.n;
        for k in 0..=degree {
            let b = self.block();
            let mut acc = vec![ZERO; b];
            for j in 0..=k {
                gemm_acc(n, self.coeff_slice(j), other.coeff_slice(k - j), &mut acc);
            }
            out.coeff_slice_mut(k).copy_from_slice(&acc);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let degree = self.degree.min(other.degree);
        let len = (degree + 1) * self.block();
        Self {
            n: self.n,
            degree,
            data: self.data[..len].iter().zip(&other.data[..len]).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let degree = self.degree.min(other.degree);
        let len = (degree + 1) * self.block();
        Self {
            n: self.n,
            degree,
            data: self.data[..len].iter().zip(&other.data[..len]).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            n: self.n,
            degree: self.degree,
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    /// Adds `c I` to the constant coefficient.
    pub fn shift(&self, c: C64) -> Self {
        let mut out = self.clone();
        let n = self.n;
        let a0 = out.coeff_slice_mut(0);
        for i in 0..n {
            a0[i * n + i] += c;
        }
        out
    }

    /// Jet of the derivative, one degree lower.
    pub fn derivative(&self) -> Result<Self> {
        if self.degree == 0 {
            return Err(Error::InvalidArgument("cannot differentiate a degree-0 jet".into()));
        }
        let mut out = Self::zeros(self.n, self.degree - 1);
        for k in 0..self.degree {
            let f = (k + 1) as f64;
            let src = self.coeff_slice(k + 1).to_vec();
            for (d, s) in out.coeff_slice_mut(k).iter_mut().zip(src) {
                *d = s * f;
            }
        }
        Ok(out)
    }

    /// Jet of `A^{-1}`.
    pub fn inverse(&self) -> Result<Self> {
        let b0 = self.value().inverse()?;
        Ok(self.inverse_with(&b0))
    }

    fn inverse_with(&self, b0: &ComplexMatrix) -> Self {
        let n = self.n;
        let bsz = self.block();
        let mut out = Self::zeros(n, self.degree);
        out.set_coeff(0, b0);
        let b0v = b0.to_row_major();
        let mut acc = vec![ZERO; bsz];
        let mut tmp = vec![ZERO; bsz];
        for k in 1..=self.degree {
            acc.iter_mut().for_each(|z| *z = ZERO);
            for j in 1..=k {
                gemm_acc(n, self.coeff_slice(j), out.coeff_slice(k - j), &mut acc);
            }
            tmp.iter_mut().for_each(|z| *z = ZERO);
            gemm_acc(n, &b0v, &acc, &mut tmp);
            for (d, s) in out.coeff_slice_mut(k).iter_mut().zip(&tmp) {
                *d = -s;
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn coeff_max_abs(&self, k: usize) -> f64 {
        self.coeff_slice(k).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Jet of the Riesz projector `(1/2πi) ∮ (λ - H(t))^{-1} dλ` on a fixed circle.
///
/// Doubles the node count until every coefficient has converged to
/// [`CONTOUR_TOL`] relative to its own size.
pub fn contour_projector_jet(h: &MatrixJet, contour: &Contour) -> Result<MatrixJet> {
    let n = h.dim();
    let degree = h.degree();
    let neg_h = h.scale(C64::new(-1.0, 0.0));
    let h0 = h.value();
    let term = |lambda: C64| -> Result<MatrixJet> {
        let r0 = h0.scale(C64::new(-1.0, 0.0)).shift(lambda).inverse().map_err(|_| Error::NearSingular {
            lambda,
            sigma_min: 0.0,
        })?;
        let jet = neg_h.shift(lambda).inverse_with(&r0);
        Ok(jet.scale(lambda - contour.center))
    };
    let mut m = contour.nodes;
    let mut sum = MatrixJet::zeros(n, degree);
    for k in 0..m {
        sum = sum.add(&term(contour.point(k, m))?);
    }
    let mut estimate = sum.scale(C64::new(1.0 / m as f64, 0.0));
    while m < MAX_CONTOUR_NODES {
        for k in 0..m {
            sum = sum.add(&term(contour.point(2 * k + 1, 2 * m))?);
        }
        m *= 2;
        let next = sum.scale(C64::new(1.0 / m as f64, 0.0));
        let diff = next.sub(&estimate);
        let converged = (0..=degree)
            .all(|k| diff.coeff_max_abs(k) < CONTOUR_TOL * next.coeff_max_abs(k).max(1.0));
        estimate = next;
        if converged {
            if !estimate.is_finite() {
                return Err(Error::NonFinite { t: f64::NAN });
            }
            return Ok(estimate);
        }
    }
    Err(Error::NoConvergence {
        what: "contour quadrature (jet)",
        detail: format!("no agreement to {CONTOUR_TOL:e} with {MAX_CONTOUR_NODES} nodes"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn scalar_jet(coeffs: &[f64]) -> MatrixJet {
        let cs: Vec<ComplexMatrix> = coeffs.iter().map(|&x| ComplexMatrix::diagonal(&[c(x, 0.0)])).collect();
        MatrixJet::from_coeffs(&cs).unwrap()
    }

    #[test]
    fn inverse_of_one_minus_h_is_geometric() {
        let j = scalar_jet(&[1.0, -1.0, 0.0, 0.0, 0.0]);
        let inv = j.inverse().unwrap();
        for k in 0..=4 {
            assert!((inv.coeff(k)[(0, 0)] - ONE).norm() < 1e-15);
        }
    }

    #[test]
    fn product_and_derivative_of_polynomials() {
        let a = scalar_jet(&[1.0, 2.0, 0.0, 0.0]);
        let b = scalar_jet(&[0.0, 1.0, 3.0, 0.0]);
        let p = a.mul(&b);
        let want = [0.0, 1.0, 5.0, 6.0];
        for (k, w) in want.iter().enumerate() {
            assert!((p.coeff(k)[(0, 0)].re - w).abs() < 1e-15);
        }
        let d = p.derivative().unwrap();
        let want_d = [1.0, 10.0, 18.0];
        for (k, w) in want_d.iter().enumerate() {
            assert!((d.coeff(k)[(0, 0)].re - w).abs() < 1e-15);
        }
        assert!((p.eval(0.5).trace().re - (0.5 + 1.25 + 0.75)).abs() < 1e-15);
    }

    #[test]
    fn projector_jet_of_diagonal_family() {
        // H(t0 + h) = diag(h, 1 - h): projector onto the first eigenvalue is constant
        let h = MatrixJet::from_coeffs(&[
            ComplexMatrix::diagonal(&[c(0.0, 0.0), c(1.0, 0.0)]),
            ComplexMatrix::diagonal(&[c(1.0, 0.0), c(-1.0, 0.0)]),
            ComplexMatrix::zeros(2),
        ])
        .unwrap();
        let contour = Contour::new(c(0.0, 0.0), 0.5, 16).unwrap();
        let p = contour_projector_jet(&h, &contour).unwrap();
        assert!((p.value() - ComplexMatrix::diagonal(&[ONE, ZERO])).max_abs() < 1e-12);
        assert!(p.coeff(1).max_abs() < 1e-12 && p.coeff(2).max_abs() < 1e-12);
    }

    #[test]
    fn projector_jet_matches_rotation() {
        // H(θ) = R(θ) diag(1, -1) R(θ)^T, P_+(θ) = [[cos²θ, cs], [cs, sin²θ]]
        let h0 = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]);
        let h1 = ComplexMatrix::from_real_rows(&[&[0.0, 2.0], &[2.0, 0.0]]);
        let h2 = ComplexMatrix::from_real_rows(&[&[-2.0, 0.0], &[0.0, 2.0]]);
        let h = MatrixJet::from_coeffs(&[h0, h1, h2]).unwrap();
        let contour = Contour::new(c(1.0, 0.0), 1.0, 16).unwrap();
        let p = contour_projector_jet(&h, &contour).unwrap();
        // cos²θ = 1 - θ² + ..., cosθ sinθ = θ + ...
        assert!((p.coeff(1)[(0, 1)] - ONE).norm() < 1e-12);
        assert!((p.coeff(2)[(0, 0)] + ONE).norm() < 1e-12);
        assert!((p.coeff(2)[(1, 1)] - ONE).norm() < 1e-12);
    }
}
