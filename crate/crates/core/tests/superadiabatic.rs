// Copyright 2026 Adiabat Contributors
// SPDX-License-Identifier: Apache-2.0

use adiabat::approximation::{build_approximation, dephased_growth, BundleSummary};
use adiabat::families::GeneratorFamily;
use adiabat::fit::GrowthModel;
use adiabat::grid::TimeGrid;
use adiabat::hierarchy::{build_hierarchy, build_hierarchy_auto};
use adiabat::{ComplexMatrix, Error};

const TOL: f64 = 1e-10;

fn two_level() -> GeneratorFamily {
    GeneratorFamily::two_level(0.2, 1.0).unwrap()
}

#[test]
fn two_level_superadiabatic_evolution_intertwines() {
    let fam = two_level();
    let h = build_hierarchy_auto(&fam, 0.1, 0.5, 65, 8).unwrap();
    for q in 0..=h.q_star.min(3) {
        let b = build_approximation(&fam, &h, q, TOL).unwrap();
        assert!(b.intertwining_residual < 1e-7, "q {q}: {}", b.intertwining_residual);
        assert!(b.intertwiner.inverse_defect < 1e-9, "q {q}: {}", b.intertwiner.inverse_defect);
        assert!(b.block_residual < 1e-7, "q {q}: {}", b.block_residual);
        // U is unitary, V close to it
        assert!(b.sup_error() < 1.0);
        let s = BundleSummary::from(&b);
        assert_eq!(s.q, q);
    }
}

#[test]
fn deltas_turn_over() {
    let h = build_hierarchy_auto(&two_level(), 0.05, 0.5, 65, 12).unwrap();
    let qs = h.q_star;
    assert!(qs >= 1, "deltas {:?}", h.deltas);
    for q in 0..qs {
        assert!(h.deltas[q + 1] < h.deltas[q], "deltas {:?}", h.deltas);
    }
}

#[test]
fn constant_family_is_trivially_converged() {
    let h0 = ComplexMatrix::from_real_rows(&[&[1.0, 1.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, -1.0]]);
    let fam = GeneratorFamily::constant(h0);
    let h = build_hierarchy(&fam, 0.2, 0.5, &TimeGrid::new(33).unwrap(), 4).unwrap();
    assert!(h.trivially_converged());
    assert_eq!(h.q_star, 0);
    let b = build_approximation(&fam, &h, 0, TOL).unwrap();
    // V^0 generator equals H, so V = U
    assert!(b.sup_error() < 1e-12, "{}", b.sup_error());
}

#[test]
fn coarse_grid_is_reported() {
    let r = build_hierarchy(&two_level(), 0.05, 0.5, &TimeGrid::new(33).unwrap(), 6);
    assert!(matches!(r, Err(Error::GridTooCoarse { .. })), "{r:?}");
}

#[test]
fn dephased_growth_needs_four_points() {
    let fam = two_level();
    let h = build_hierarchy_auto(&fam, 0.1, 0.5, 65, 6).unwrap();
    let b = build_approximation(&fam, &h, h.q_star, TOL).unwrap();
    let r = dephased_growth(&[b.clone(), b.clone(), b], 0, GrowthModel::StretchedExp);
    assert!(matches!(r, Err(Error::InsufficientData { needed: 4, found: 3 })));
}

#[test]
fn self_adjoint_dephased_growth_is_bounded() {
    let fam = two_level();
    let bundles: Vec<_> = [0.2, 0.15, 0.1, 0.07]
        .iter()
        .map(|&e| {
            let h = build_hierarchy_auto(&fam, e, 0.5, 65, 6).unwrap();
            build_approximation(&fam, &h, h.q_star, TOL).unwrap()
        })
        .collect();
    // self-adjoint two-level dynamics stays bounded
    let f = dephased_growth(&bundles, 0, GrowthModel::StretchedExp).unwrap();
    assert!(f.bounded);
    assert!(dephased_growth(&bundles, 5, GrowthModel::StretchedExp).is_err());
    // only the bounded shortcut accepts other laws
    assert!(dephased_growth(&bundles, 0, GrowthModel::PowerLaw).unwrap().bounded);
}
