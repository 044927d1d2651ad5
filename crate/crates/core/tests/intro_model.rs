// Copyright 2026 Adiabat Contributors
// SPDX-License-Identifier: Apache-2.0

use adiabat::approximation::transition_amplitude;
use adiabat::families::{GeneratorFamily, IntroParams};
use adiabat::linalg::{ComplexMatrix, C64, I};
use adiabat::oracles::{closed_form_omega, starred_projector_intertwining, IntroClosedForm};
use adiabat::propagator::{evolve, evolve_sampled, OmegaProfile};
use adiabat::spectral::decompose;

fn params() -> IntroParams {
    IntroParams::real(1.0, -1.0)
}

#[test]
fn numerical_propagator_matches_closed_form() {
    let fam = GeneratorFamily::intro_example(params());
    let omega = OmegaProfile::from_family(&fam).unwrap();
    for eps in [0.1, 0.03, 0.01] {
        let cf = IntroClosedForm::new(params(), eps).unwrap();
        let times = [0.0, 0.4, 1.0];
        for u in evolve_sampled(&fam, eps, &times, &omega, 1e-11).unwrap() {
            let want = cf.propagator(u.t);
            let got = u.scaled().rescaled_to(want.log_scale);
            let rel = (&got - &want.matrix).norm2() / want.matrix.norm2();
            assert!(rel < 1e-7, "eps {eps} t {}: {rel:e}", u.t);
        }
    }
}

#[test]
fn closed_form_omega_solves_its_equation() {
    let eps = 0.05;
    let h = 1e-5;
    let m = params().h0() - params().l().scale_real(eps);
    for t in [0.2, 0.5, 0.9] {
        let at = |s: f64| {
            let o = closed_form_omega(params(), eps, s).unwrap();
            o.matrix.scale_real(o.log_scale.exp())
        };
        let mid = at(t);
        let deriv = (at(t + h) - at(t - h)).scale_real(0.5 / h);
        let residual = deriv.scale(I * eps) - &m * &mid;
        assert!(residual.norm2() <= 1e-6 * mid.norm2(), "t {t}: {:e}", residual.norm2());
    }
}

#[test]
fn branch_projectors_scale_like_inverse_root_epsilon() {
    let v: Vec<f64> = [0.1, 0.03, 0.01]
        .iter()
        .map(|&e| IntroClosedForm::new(params(), e).unwrap().p_plus.norm2() * e.sqrt())
        .collect();
    let (lo, hi) = v.iter().fold((f64::INFINITY, 0.0_f64), |(l, h), &x| (l.min(x), h.max(x)));
    assert!(hi / lo < 1.15, "{v:?}");
}

#[test]
fn transition_grows_like_the_closed_form() {
    let fam = GeneratorFamily::intro_example(params());
    let omega = OmegaProfile::from_family(&fam).unwrap();
    let at0 = decompose(&fam.eval(0.0), 0.5).unwrap();
    let eps = 0.01;
    for t in [0.5, 1.0] {
        let at_t = decompose(&fam.eval(t), 0.5).unwrap();
        let u = evolve(&fam, eps, 0.0, t, &omega, 1e-10).unwrap();
        let num = transition_amplitude(&u, &at_t, &at0, 0, 1).unwrap();
        let oracle = IntroClosedForm::new(params(), eps).unwrap().transition_lab(t).unwrap();
        let rel = ((num.ln() - oracle.ln()).exp() - 1.0).abs();
        assert!(rel < 0.05, "t {t}: {rel}");
        // the reverse transition vanishes identically
        let back = transition_amplitude(&u, &at_t, &at0, 1, 0).unwrap();
        assert!(back.value < 1e-8 * num.value, "{back:?}");
    }
}

#[test]
fn starred_projectors_are_followed_exactly() {
    for j in 0..2 {
        let checks = starred_projector_intertwining(params(), 0.01, j, &[0.7], 1e-9).unwrap();
        assert!(checks[0].starred <= 1e-7, "{checks:?}");
        assert!(checks[0].instantaneous >= 1.0, "{checks:?}");
    }
}

#[test]
fn complex_parameters_use_principal_root() {
    let p = IntroParams::new(C64::new(0.0, 1.0), C64::new(0.0, 1.0));
    // ak = -1 again, reached through complex factors
    let cf = IntroClosedForm::new(p, 0.04).unwrap();
    assert!((cf.lambda_plus - C64::new(0.0, 0.2)).norm() < 1e-14);
    let sum = &cf.p1 + &cf.p0();
    assert!((sum - ComplexMatrix::identity(3)).max_abs() < 1e-12);
}
