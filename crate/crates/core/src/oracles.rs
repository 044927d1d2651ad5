// Copyright 2026 Adiabat Contributors
// SPDX-License-Identifier: Apache-2.0

//! Closed forms for the 3×3 introductory model `H(t) = S(t) H S(t)^{-1}`, `S(t) = e^{-itL}`.
//!
//! `Ω(t) = S(t)^{-1} U(t,0) = e^{-it(H - εL)/ε}` is explicit, so these serve
//! as ground truth for the numerical pipelines. The nilpotent example
//! `N(t) = [[t, -1], [t², -t]]` also has an explicit propagator.

use crate::error::{Error, Result};
use crate::families::{GeneratorFamily, IntroParams};
use crate::linalg::{ComplexMatrix, C64, I, ONE, ZERO};
use crate::propagator::{evolve_sampled, OmegaProfile};
use crate::scaled::{ScaledMatrix, ScaledValue};

const DEGENERATE: f64 = 1e-10;

/// Spectral data of `H - εL` for fixed `ε`.
#[derive(Clone, Debug)]
pub struct IntroClosedForm {
    pub params: IntroParams,
    pub epsilon: f64,
    /// Principal `√(εak)`; `λ₋ = -λ₊`.
    pub lambda_plus: C64,
    pub p1: ComplexMatrix,
    pub p_plus: ComplexMatrix,
    pub p_minus: ComplexMatrix,
}

impl IntroClosedForm {
    pub fn new(params: IntroParams, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
        }
        let (a, k) = (params.a, params.k);
        let eak = a * k * epsilon;
        let one_minus = ONE - eak;
        if one_minus.norm() < DEGENERATE {
            return Err(Error::DegenerateParams(format!("1 - eps*a*k = {one_minus} vanishes")));
        }
        if eak.norm() < DEGENERATE {
            return Err(Error::DegenerateParams(format!("eps*a*k = {eak} vanishes")));
        }
        let lp = eak.sqrt();
        let lm = -lp;
        let ek = k * epsilon;
        let p1 = ComplexMatrix::from_row_slice(
            3,
            &[ZERO, ZERO, ek / one_minus, ZERO, ZERO, ek * ek / one_minus, ZERO, ZERO, ONE],
        );
        let branch = |lp: C64, lm: C64| {
            let den = lp - lm;
            let den1 = den * (lp - ONE);
            ComplexMatrix::from_row_slice(
                3,
                &[lp / den, a / den, lp * ek / den1, ek / den, lp / den, ek * ek / den1, ZERO, ZERO, ZERO],
            )
        };
        Ok(Self {
            params,
            epsilon,
            lambda_plus: lp,
            p1,
            p_plus: branch(lp, lm),
            p_minus: branch(lm, lp),
        })
    }

    /// `P₊(ε) + P₋(ε)`.
    pub fn p0(&self) -> ComplexMatrix {
        &self.p_plus + &self.p_minus
    }

    /// `P_j(ε)` for `j ∈ {0, 1}`.
    pub fn projector(&self, j: usize) -> Result<ComplexMatrix> {
        match j {
            0 => Ok(self.p0()),
            1 => Ok(self.p1.clone()),
            _ => Err(Error::InvalidArgument(format!("intro projector index {j} not in {{0, 1}}"))),
        }
    }

    /// `P_j^*(t,ε) = S(t) P_j(ε) S(t)^{-1}`.
    pub fn starred(&self, j: usize, t: f64) -> Result<ComplexMatrix> {
        let s = self.params.s(C64::new(t, 0.0));
        Ok(&(&s * &self.projector(j)?) * &s.inverse()?)
    }

    /// Instantaneous `P_j(t) = S(t) P_j S(t)^{-1}` with `P₀ = e₁e₁* + e₂e₂*`, `P₁ = e₃e₃*`.
    pub fn instantaneous(&self, j: usize, t: f64) -> Result<ComplexMatrix> {
        let d = match j {
            0 => [ONE, ONE, ZERO],
            1 => [ZERO, ZERO, ONE],
            _ => return Err(Error::InvalidArgument(format!("intro projector index {j} not in {{0, 1}}"))),
        };
        let s = self.params.s(C64::new(t, 0.0));
        Ok(&(&s * &ComplexMatrix::diagonal(&d)) * &s.inverse()?)
    }

    /// `Ω(t) = e^{-it/ε}P₁ + e^{-itλ₊/ε}P₊ + e^{-itλ₋/ε}P₋`, scaled by its largest exponent.
    pub fn omega(&self, t: f64) -> ScaledMatrix {
        let eps = self.epsilon;
        let terms = [
            (C64::new(1.0, 0.0), &self.p1),
            (self.lambda_plus, &self.p_plus),
            (-self.lambda_plus, &self.p_minus),
        ];
        // exponent -itλ/ε, real part t Im λ / ε
        let exps: Vec<C64> = terms.iter().map(|(l, _)| -I * *l * (t / eps)).collect();
        let log_scale = exps.iter().map(|e| e.re).fold(f64::NEG_INFINITY, f64::max);
        let mut m = ComplexMatrix::zeros(3);
        for (e, (_, p)) in exps.iter().zip(terms.iter()) {
            m += &p.scale((*e - log_scale).exp());
        }
        ScaledMatrix::new(m, log_scale)
    }

    /// `U(t,0) = S(t) Ω(t)`.
    pub fn propagator(&self, t: f64) -> ScaledMatrix {
        let o = self.omega(t);
        ScaledMatrix::new(&self.params.s(C64::new(t, 0.0)) * &o.matrix, o.log_scale)
    }

    /// Leading-order vector `(-εk/2, iε^{3/2}k²/(2√|ak|), 0)` of `P₀ Ω(t) P₁`.
    fn transition_vector(&self) -> Result<Vec<C64>> {
        let (a, k) = (self.params.a, self.params.k);
        let ak = a * k;
        if ak.im.abs() > DEGENERATE * ak.norm().max(1.0) || ak.re >= 0.0 {
            return Err(Error::WrongSignParams(ak));
        }
        let eps = self.epsilon;
        let r = ak.norm().sqrt();
        Ok(vec![
            -k * (eps / 2.0),
            I * k * k * (eps.powf(1.5) / (2.0 * r)),
            ZERO,
        ])
    }

    fn transition_exponent(&self, t: f64) -> f64 {
        t * (self.params.a * self.params.k).norm().sqrt() / self.epsilon.sqrt()
    }

    /// Leading-order `‖P₀ Ω(t) P₁‖`; requires `ak < 0`.
    pub fn transition(&self, t: f64) -> Result<ScaledValue> {
        let v = self.transition_vector()?;
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        Ok(ScaledValue::new(norm, self.transition_exponent(t)))
    }

    /// Leading-order `‖P₀(t) U(t,0) P₁(0)‖ = ‖S(t) P₀ Ω(t) P₁‖`.
    pub fn transition_lab(&self, t: f64) -> Result<ScaledValue> {
        let v = self.transition_vector()?;
        let s = self.params.s(C64::new(t, 0.0));
        let sv: Vec<C64> = (0..3).map(|i| (0..3).map(|j| s[(i, j)] * v[j]).sum()).collect();
        let norm = sv.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        Ok(ScaledValue::new(norm, self.transition_exponent(t)))
    }
}

pub fn closed_form_omega(params: IntroParams, epsilon: f64, t: f64) -> Result<ScaledMatrix> {
    Ok(IntroClosedForm::new(params, epsilon)?.omega(t))
}

pub fn closed_form_transition(params: IntroParams, epsilon: f64, t: f64) -> Result<ScaledValue> {
    IntroClosedForm::new(params, epsilon)?.transition(t)
}

/// Residuals of the exact intertwining against the naive one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntertwiningCheck {
    /// `‖U(t,0) P_j^*(0) - P_j^*(t) U(t,0)‖` on the propagator's scale.
    pub starred: f64,
    /// Same with instantaneous `P_j(t)`.
    pub instantaneous: f64,
    /// `‖Ũ(t,0)‖`, for relative reading.
    pub u_norm: f64,
    pub log_scale: f64,
}

/// Intertwining residuals for `j ∈ {0, 1}` at each of `times`, from one numerical propagation.
pub fn starred_projector_intertwining(
    params: IntroParams,
    epsilon: f64,
    j: usize,
    times: &[f64],
    tol: f64,
) -> Result<Vec<IntertwiningCheck>> {
    let cf = IntroClosedForm::new(params, epsilon)?;
    let family = GeneratorFamily::intro_example(params);
    let omega = OmegaProfile::from_family(&family)?;
    let mut path = vec![0.0];
    path.extend_from_slice(times);
    let us = evolve_sampled(&family, epsilon, &path, &omega, tol)?;
    let ps0 = cf.starred(j, 0.0)?;
    let pi0 = cf.instantaneous(j, 0.0)?;
    us[1..]
        .iter()
        .map(|u| {
            let m = &u.matrix;
            let starred = (m * &ps0 - &cf.starred(j, u.t)? * m).norm2();
            let instantaneous = (m * &pi0 - &cf.instantaneous(j, u.t)? * m).norm2();
            Ok(IntertwiningCheck {
                starred,
                instantaneous,
                u_norm: m.norm2(),
                log_scale: u.log_scale,
            })
        })
        .collect()
}


/// `Y(t,0)` of `εY' = N(t) Y` for [`GeneratorFamily::nilpotent_example`], scaled by `e^{t/√ε}`.
pub fn nilpotent_example_propagator(epsilon: f64, t: f64) -> Result<ScaledMatrix> {
    if !(epsilon > 0.0 && epsilon <= 1.0) || !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidArgument(format!(
            "need epsilon in (0, 1] and t in [0, 1], got {epsilon}, {t}"
        )));
    }
    let r = epsilon.sqrt();
    let x = t / r;
    // cosh and sinh with e^x factored out
    let d = (-2.0 * x).exp();
    let (c, s) = (0.5 * (1.0 + d), 0.5 * (1.0 - d));
    let m = ComplexMatrix::from_real_rows(&[&[c, -s / r], &[t * c - r * s, c - x * s]]);
    Ok(ScaledMatrix::new(m, x))
}

#[cfg(test)]
mod nilpotent_tests {
    use super::*;

    #[test]
    fn identity_at_zero_and_scaled_entries() {
        let y = nilpotent_example_propagator(0.04, 0.0).unwrap();
        assert!((y.matrix - ComplexMatrix::identity(2)).max_abs() < 1e-15);
        let y = nilpotent_example_propagator(0.25, 0.5).unwrap();
        let raw = y.rescaled_to(0.0);
        // x = 1
        assert!((raw[(0, 0)].re - 1f64.cosh()).abs() < 1e-14);
        assert!((raw[(0, 1)].re + 2.0 * 1f64.sinh()).abs() < 1e-14);
        assert!(nilpotent_example_propagator(0.0, 0.5).is_err());
    }
}
