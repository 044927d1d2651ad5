// Copyright 2026 Adiabat Contributors
// SPDX-License-Identifier: Apache-2.0

//! Curves behind the browser demo. Plain Rust so they test natively.

use adiabat::approximation::transition_amplitude;
use adiabat::families::{GeneratorFamily, IntroParams};
use adiabat::hierarchy::build_hierarchy_auto;
use adiabat::nilpotent::{evolve_nilpotent, NilpotentFamily};
use adiabat::oracles::{nilpotent_example_propagator, IntroClosedForm};
use adiabat::propagator::{evolve, OmegaProfile};
use adiabat::spectral::decompose;
use adiabat::Result;

const TOL: f64 = 1e-9;
const GAP_FLOOR: f64 = 0.5;

/// One point of a numerical curve and its closed-form counterpart, both as natural logs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub epsilon: f64,
    pub numerical_ln: f64,
    pub closed_form_ln: f64,
}

/// `ln ‖P₀(1) U(1,0) P₁(0)‖` for the intro model with real `a`, `k`.
pub fn intro_transition(a: f64, k: f64, epsilons: &[f64]) -> Result<Vec<CurvePoint>> {
    let params = IntroParams::real(a, k);
    let fam = GeneratorFamily::intro_example(params);
    let omega = OmegaProfile::from_family(&fam)?;
    let at0 = decompose(&fam.eval(0.0), GAP_FLOOR)?;
    let at1 = decompose(&fam.eval(1.0), GAP_FLOOR)?;
    epsilons
        .iter()
        .map(|&e| {
            let u = evolve(&fam, e, 0.0, 1.0, &omega, TOL)?;
            // groups come ordered by real part: λ = 0 first
            let num = transition_amplitude(&u, &at1, &at0, 0, 1)?;
            let closed = IntroClosedForm::new(params, e)?.transition_lab(1.0)?;
            Ok(CurvePoint {
                epsilon: e,
                numerical_ln: num.ln(),
                closed_form_ln: closed.ln(),
            })
        })
        .collect()
}

/// `ln ‖Y(1,0)‖` for `εY' = N(t) Y` with the built-in nilpotent example.
pub fn nilpotent_growth(epsilons: &[f64]) -> Result<Vec<CurvePoint>> {
    let nf = NilpotentFamily::new(GeneratorFamily::nilpotent_example(), None)?;
    epsilons
        .iter()
        .map(|&e| {
            let y = evolve_nilpotent(&nf, e, 0.0, 1.0, TOL)?;
            Ok(CurvePoint {
                epsilon: e,
                numerical_ln: y.matrix.norm2().ln() + y.log_scale,
                closed_form_ln: nilpotent_example_propagator(e, 1.0)?.norm2().ln(),
            })
        })
        .collect()
}

/// `sup_t ‖K^q - K^{q-1}‖` for `q = 0..` on the two-level family, and the optimal level.
pub fn delta_turnover(delta: f64, coupling: f64, epsilon: f64, q_max: usize) -> Result<(Vec<f64>, usize)> {
    let fam = GeneratorFamily::two_level(delta, coupling)?;
    let h = build_hierarchy_auto(&fam, epsilon, GAP_FLOOR, 65, q_max)?;
    Ok((h.deltas, h.q_star))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intro_curve_tracks_closed_form() {
        let pts = intro_transition(1.0, -1.0, &[0.04, 0.02]).unwrap();
        for p in pts {
            assert!((p.numerical_ln - p.closed_form_ln).abs() < 0.1, "{p:?}");
        }
    }

    #[test]
    fn nilpotent_curve_matches() {
        for p in nilpotent_growth(&[0.1, 0.02]).unwrap() {
            assert!((p.numerical_ln - p.closed_form_ln).abs() < 1e-8, "{p:?}");
        }
    }

    #[test]
    fn deltas_dip_at_optimal_level() {
        let (d, q) = delta_turnover(0.2, 1.0, 0.05, 10).unwrap();
        assert!(q >= 1 && d[q] < d[0]);
        assert!(delta_turnover(-1.0, 1.0, 0.05, 4).is_err());
    }
}
