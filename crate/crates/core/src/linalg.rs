// Copyright 2026 Adiabat Contributors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex square matrices.
//!
//! [`ComplexMatrix`] wraps a `nalgebra` matrix and adds the handful of
//! operations the rest of the crate needs: operator norms, inversion,
//! eigenvalues through the complex Schur form, and the matrix exponential.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Square complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl ComplexMatrix {
    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    /// Builds a matrix from row-major entries. Panics if `data.len() != n * n`.
    pub fn from_row_slice(n: usize, data: &[C64]) -> Self {
        Self(DMatrix::from_row_slice(n, n, data))
    }

    /// Builds a matrix from rows; every row must have the same length as the row count.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        Ok(Self(m))
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "row {i} has wrong length");
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = C64::new(v, 0.0);
            }
        }
        Self(m)
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self(DMatrix::from_fn(n, n, f))
    }

    pub fn diagonal(d: &[C64]) -> Self {
        let n = d.len();
        Self::from_fn(n, |i, j| if i == j { d[i] } else { ZERO })
    }

    /// Wraps a `nalgebra` matrix; fails unless square.
    pub fn from_inner(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        Ok(Self(m))
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    /// Row-major copy of the entries.
    pub fn to_row_major(&self) -> Vec<C64> {
        let n = self.dim();
        let mut v = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                v.push(self.0[(i, j)]);
            }
        }
        v
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn scale(&self, c: C64) -> Self {
        Self(&self.0 * c)
    }

    pub fn scale_real(&self, c: f64) -> Self {
        Self(self.0.map(|z| z * c))
    }

    /// `self + c I`.
    pub fn shift(&self, c: C64) -> Self {
        let mut m = self.0.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += c;
        }
        Self(m)
    }

    /// `[self, other] = self other - other self`.
    pub fn commutator(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0 - &other.0 * &self.0)
    }

    /// Operator 2-norm (largest singular value).
    pub fn norm2(&self) -> f64 {
        if self.dim() == 0 {
            return 0.0;
        }
        if self.0.iter().all(|z| *z == ZERO) {
            return 0.0;
        }
        self.0
            .clone()
            .svd(false, false)
            .singular_values
            .iter()
            .fold(0.0_f64, |a, &b| a.max(b))
    }

    /// Smallest singular value.
    pub fn min_singular_value(&self) -> f64 {
        if self.dim() == 0 {
            return 0.0;
        }
        self.0
            .clone()
            .svd(false, false)
            .singular_values
            .iter()
            .fold(f64::INFINITY, |a, &b| a.min(b))
    }

    pub fn norm_fro(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Induced 1-norm (max column sum).
    pub fn norm1(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|j| (0..n).map(|i| self.0[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn inverse(&self) -> Result<Self> {
        let n = self.dim();
        let lu = self.0.clone().lu();
        match lu.try_inverse() {
            Some(inv) if inv.iter().all(|z| z.re.is_finite() && z.im.is_finite()) => Ok(Self(inv)),
            _ => Err(Error::NearSingular {
                lambda: ZERO,
                sigma_min: if n == 0 { 0.0 } else { self.min_singular_value() },
            }),
        }
    }

    /// Eigenvalues from the complex Schur form.
    pub fn eigenvalues(&self) -> Result<Vec<C64>> {
        if self.dim() == 0 {
            return Ok(Vec::new());
        }
        if !self.is_finite() {
            return Err(Error::NonFinite { t: f64::NAN });
        }
        let ev = self
            .0
            .clone()
            .schur()
            .eigenvalues()
            .ok_or(Error::NoConvergence {
                what: "Schur decomposition",
                detail: "complex eigenvalues unavailable".into(),
            })?;
        Ok(ev.iter().copied().collect())
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::identity(self.dim());
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Matrix exponential by Padé(13) scaling and squaring.
    pub fn exp(&self) -> Self {
        const B: [f64; 14] = [
            64764752532480000.0,
            32382376266240000.0,
            7771770303897600.0,
            1187353796428800.0,
            129060195264000.0,
            10559470521600.0,
            670442572800.0,
            33522128640.0,
            1323241920.0,
            40840800.0,
            960960.0,
            16380.0,
            182.0,
            1.0,
        ];
        const THETA13: f64 = 5.371920351148152;
        let n = self.dim();
        let norm = self.norm1();
        let s = if norm > THETA13 {
            (norm / THETA13).log2().ceil() as i32
        } else {
            0
        };
        let a = self.0.map(|z| z / 2f64.powi(s));
        let id = DMatrix::<C64>::identity(n, n);
        let a2 = &a * &a;
        let a4 = &a2 * &a2;
        let a6 = &a4 * &a2;
        let b = |k: usize| C64::new(B[k], 0.0);
        let u_inner = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9))
            + &a6 * b(7)
            + &a4 * b(5)
            + &a2 * b(3)
            + &id * b(1);
        let u = &a * u_inner;
        let v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8))
            + &a6 * b(6)
            + &a4 * b(4)
            + &a2 * b(2)
            + &id * b(0);
        let p = &v + &u;
        let q = &v - &u;
        let mut r = q.lu().solve(&p).expect("Padé denominator is nonsingular");
        for _ in 0..s {
            r = &r * &r;
        }
        Self(r)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.0[idx]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, idx: (usize, usize)) -> &mut C64 {
        &mut self.0[idx]
    }
}

macro_rules! binop {
    ($tr:ident, $f:ident, $op:tt) => {
        impl $tr<&ComplexMatrix> for &ComplexMatrix {
            type Output = ComplexMatrix;
            fn $f(self, rhs: &ComplexMatrix) -> ComplexMatrix {
                ComplexMatrix(&self.0 $op &rhs.0)
            }
        }
        impl $tr<ComplexMatrix> for ComplexMatrix {
            type Output = ComplexMatrix;
            fn $f(self, rhs: ComplexMatrix) -> ComplexMatrix {
                ComplexMatrix(self.0 $op rhs.0)
            }
        }
        impl $tr<&ComplexMatrix> for ComplexMatrix {
            type Output = ComplexMatrix;
            fn $f(self, rhs: &ComplexMatrix) -> ComplexMatrix {
                ComplexMatrix(self.0 $op &rhs.0)
            }
        }
        impl $tr<ComplexMatrix> for &ComplexMatrix {
            type Output = ComplexMatrix;
            fn $f(self, rhs: ComplexMatrix) -> ComplexMatrix {
                ComplexMatrix(&self.0 $op rhs.0)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&ComplexMatrix> for ComplexMatrix {
    fn sub_assign(&mut self, rhs: &ComplexMatrix) {
        self.0 -= &rhs.0;
    }
}

impl Neg for ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-self.0)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

impl Mul<C64> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: C64) -> ComplexMatrix {
        ComplexMatrix(&self.0 * rhs)
    }
}

impl Mul<C64> for ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: C64) -> ComplexMatrix {
        ComplexMatrix(self.0 * rhs)
    }
}

/// Operator 2-norm of `m`.
pub fn operator_norm(m: &ComplexMatrix) -> f64 {
    m.norm2()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn exp_of_rotation_generator() {
        let a = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]);
        let e = a.scale_real(2.0).exp();
        assert!((e[(0, 0)].re - 2f64.cos()).abs() < 1e-14);
        assert!((e[(0, 1)].re - 2f64.sin()).abs() < 1e-14);
        assert!((e[(1, 0)].re + 2f64.sin()).abs() < 1e-14);
    }

    #[test]
    fn exp_of_nilpotent_is_polynomial() {
        let n = ComplexMatrix::from_real_rows(&[&[0.0, 3.0, 1.0], &[0.0, 0.0, 2.0], &[0.0, 0.0, 0.0]]);
        let e = n.exp();
        let expect = ComplexMatrix::identity(3) + &n + (&n * &n).scale_real(0.5);
        assert!((e - expect).max_abs() < 1e-13);
    }

    #[test]
    fn exp_large_norm_scaling() {
        let d = ComplexMatrix::diagonal(&[c(10.0, 3.0), c(-20.0, 0.0)]);
        let e = d.exp();
        let want = c(10.0, 3.0).exp();
        assert!(((e[(0, 0)] - want) / want).norm() < 1e-13);
        assert!((e[(1, 1)] - c(-20.0, 0.0).exp()).norm() < 1e-20);
    }

    #[test]
    fn norm2_of_jordan_block() {
        let j = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!((j.norm2() - 1.0).abs() < 1e-15);
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((a.norm2() - golden).abs() < 1e-14);
    }

    #[test]
    fn eigenvalues_of_defective_matrix() {
        let h = ComplexMatrix::from_real_rows(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 0.0], &[0.0, 0.0, 1.0]]);
        let mut ev = h.eigenvalues().unwrap();
        ev.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert!(ev[0].norm() < 1e-12 && ev[1].norm() < 1e-12);
        assert!((ev[2] - ONE).norm() < 1e-12);
    }

    #[test]
    fn inverse_round_trip() {
        let a = ComplexMatrix::from_rows(&[vec![c(1.0, 2.0), c(0.5, 0.0)], vec![c(0.0, -1.0), c(3.0, 1.0)]]).unwrap();
        let inv = a.inverse().unwrap();
        assert!((&a * &inv - ComplexMatrix::identity(2)).max_abs() < 1e-14);
    }

    #[test]
    fn singular_inverse_errors() {
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(matches!(a.inverse(), Err(Error::NearSingular { .. })));
    }

    #[test]
    fn ragged_rows_rejected() {
        let r = ComplexMatrix::from_rows(&[vec![ONE, ZERO], vec![ONE]]);
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }
}
