// Copyright 2026 Adiabat Contributors
// SPDX-License-Identifier: Apache-2.0

use adiabat::acceptance::random_gapped_matrix;
use adiabat::families::GeneratorFamily;
use adiabat::fit::{fit_exp_inverse_eps, fit_power_law, fit_stretched_exp};
use adiabat::jet::MatrixJet;
use adiabat::propagator::{evolve, OmegaProfile};
use adiabat::scaled::ScaledValue;
use adiabat::spectral::decompose;
use adiabat::{ComplexMatrix, C64};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

fn small_matrix(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n)
        .prop_map(move |v| ComplexMatrix::from_row_slice(n, &v.iter().map(|&(a, b)| C64::new(a, b)).collect::<Vec<_>>()))
}

proptest! {
    #![proptest_config(cfg(48))]

    #[test]
    fn decomposition_is_complete_and_consistent(seed in any::<u64>()) {
        let h = random_gapped_matrix(&mut StdRng::seed_from_u64(seed));
        let d = decompose(&h, 0.5).unwrap();
        let n = h.dim();
        let scale = 1.0 + h.norm2();
        prop_assert!(d.complement_projector.max_abs() < 1e-9);
        prop_assert!((d.reconstruct() - &h).norm2() < 1e-9 * scale);
        for (a, ga) in d.groups.iter().enumerate() {
            prop_assert!((&ga.projector * &ga.projector - &ga.projector).norm2() < 1e-9 * scale);
            prop_assert!(ga.projector.commutator(&h).norm2() < 1e-9 * scale);
            prop_assert!(ga.nilpotent.pow(n as u32).norm2() < 1e-8 * scale.powi(n as i32));
            for gb in d.groups.iter().skip(a + 1) {
                prop_assert!((&ga.projector * &gb.projector).norm2() < 1e-9 * scale);
            }
        }
    }

    #[test]
    fn jet_product_rule(a in small_matrix(2), b in small_matrix(2), c in small_matrix(2), d in small_matrix(2)) {
        let z = ComplexMatrix::zeros(2);
        let x = MatrixJet::from_coeffs(&[a.clone(), b.clone(), z.clone()]).unwrap();
        let y = MatrixJet::from_coeffs(&[c.clone(), d.clone(), z]).unwrap();
        let lhs = x.mul(&y).derivative().unwrap();
        let rhs = x.derivative().unwrap().mul(&y.truncate(1)).add(&x.truncate(1).mul(&y.derivative().unwrap()));
        for k in 0..=1 {
            prop_assert!((lhs.coeff(k) - rhs.coeff(k)).max_abs() < 1e-13);
        }
        prop_assert!((x.mul(&y).coeff(2) - &(&b * &d)).max_abs() < 1e-13);
    }

    #[test]
    fn jet_inverse_roundtrip(a in small_matrix(3), b in small_matrix(3)) {
        let a0 = a.shift(C64::new(4.0, 0.0));
        let x = MatrixJet::from_coeffs(&[a0, b, ComplexMatrix::zeros(3), ComplexMatrix::zeros(3)]).unwrap();
        let prod = x.mul(&x.inverse().unwrap());
        prop_assert!((prod.coeff(0) - ComplexMatrix::identity(3)).max_abs() < 1e-12);
        for k in 1..=3 {
            prop_assert!(prod.coeff(k).max_abs() < 1e-12);
        }
    }

    #[test]
    fn scaled_value_normalization_preserves_magnitude(v in 1e-6f64..1e6, s in -500.0f64..500.0) {
        let x = ScaledValue::new(v, s);
        let n = x.normalized();
        prop_assert!((n.ln() - x.ln()).abs() < 1e-9 * (1.0 + x.ln().abs()));
        prop_assert!(n.value >= 1.0 && n.value < std::f64::consts::E + 1e-12);
        prop_assert!((x.ratio(&n) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn exp_inverse_fit_recovers_parameters(c in -2.0f64..2.0, kappa in 0.05f64..2.0) {
        let eps = [0.2, 0.1, 0.07, 0.05, 0.03];
        let ln: Vec<f64> = eps.iter().map(|e| c - kappa / e).collect();
        let f = fit_exp_inverse_eps(&eps, &ln).unwrap();
        prop_assert!((f.kappa().unwrap() - kappa).abs() < 1e-8);
        prop_assert!(f.r_squared > 1.0 - 1e-10);
    }

    #[test]
    fn power_law_fit_recovers_exponent(c in -2.0f64..2.0, p in 0.2f64..4.0) {
        let eps: [f64; 5] = [0.2, 0.1, 0.05, 0.02, 0.01];
        let ln: Vec<f64> = eps.iter().map(|e| c - p * e.ln()).collect();
        let f = fit_power_law(&eps, &ln).unwrap();
        match f.params {
            adiabat::fit::FitParams::PowerLaw { p: got, .. } => prop_assert!((got - p).abs() < 1e-8),
            other => prop_assert!(false, "unexpected params {other:?}"),
        }
    }
}

proptest! {
    #![proptest_config(cfg(12))]

    #[test]
    fn stretched_fit_recovers_beta(d in 0.5f64..2.0, beta in 0.3f64..0.7) {
        let eps: [f64; 6] = [0.1, 0.05, 0.02, 0.01, 0.005, 0.0025];
        let ln: Vec<f64> = eps.iter().map(|e| d / e.powf(beta)).collect();
        let f = fit_stretched_exp(&eps, &ln, false).unwrap();
        let (_, got_d, got_beta) = f.stretched().unwrap();
        prop_assert!((got_beta - beta).abs() <= 0.01, "beta {got_beta} vs {beta}");
        prop_assert!((got_d / d - 1.0).abs() < 0.1);
    }

    #[test]
    fn propagator_cocycle(a in small_matrix(2), b in small_matrix(2), r in 0.1f64..0.9) {
        // Hermitian family keeps the propagator unitary
        let h0 = &a + &a.adjoint();
        let h1 = &b + &b.adjoint();
        let fam = GeneratorFamily::polynomial_family(vec![h0, h1]).unwrap();
        let om = OmegaProfile::zero();
        let tol = 1e-11;
        let eps = 0.3;
        let u10 = evolve(&fam, eps, 0.0, 1.0, &om, tol).unwrap().matrix;
        let ur0 = evolve(&fam, eps, 0.0, r, &om, tol).unwrap().matrix;
        let u1r = evolve(&fam, eps, r, 1.0, &om, tol).unwrap().matrix;
        prop_assert!((&u1r * &ur0 - &u10).max_abs() < 1e-8);
        prop_assert!((&u10.adjoint() * &u10 - ComplexMatrix::identity(2)).max_abs() < 1e-8);
        let back = evolve(&fam, eps, 1.0, 0.0, &om, tol).unwrap().matrix;
        prop_assert!((&back * &u10 - ComplexMatrix::identity(2)).max_abs() < 1e-8);
    }
}
