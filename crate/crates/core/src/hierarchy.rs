// Copyright 2026 Adiabat Contributors
// SPDX-License-Identifier: Apache-2.0

//! Superadiabatic hierarchy of corrected generators.
//!
//! Starting from `K^{-1} = 0`, each level sets `H^q = H - ε K^{q-1}`, takes the
//! Riesz projectors `P_j^q` of `H^q` on the level-0 circles and forms
//! `K^q = i Σ_j P_j^q' P_j^q`. Every node of the time grid carries Taylor jets
//! of these quantities, so the derivative at level `q` is exact up to the jet
//! truncation rather than differenced on the grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::GeneratorFamily;
use crate::fit::{fit_exp_inverse_eps, fit_factorial_geometric, linear_fit, GrowthFit};
use crate::grid::{TimeGrid, DEFAULT_GRID_SIZE};
use crate::jet::{contour_projector_jet, MatrixJet};
use crate::linalg::{ComplexMatrix, C64, I};
use crate::par::try_map;
use crate::spectral::{decompose, Contour, SpectralDecomposition, EXCLUSION_BAND};

/// Relative Chebyshev tail of `K^q` above which the grid is declared too coarse.
pub const GRID_TAIL_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct HierarchyLevel {
    pub q: usize,
    /// `K^q` at the grid nodes.
    pub k: Vec<ComplexMatrix>,
    /// `H^q` at the grid nodes.
    pub h: Vec<ComplexMatrix>,
    /// `P_j^q` indexed `[group][node]`.
    pub projectors: Vec<Vec<ComplexMatrix>>,
    /// `I - Σ_j P_j^q` at the grid nodes.
    pub complement: Vec<ComplexMatrix>,
}

#[derive(Clone, Debug)]
pub struct Hierarchy {
    pub epsilon: f64,
    pub gap_floor: f64,
    pub grid: TimeGrid,
    pub levels: Vec<HierarchyLevel>,
    /// `sup_t ‖K^q - K^{q-1}‖` with `K^{-1} = 0`.
    pub deltas: Vec<f64>,
    pub q_star: usize,
    /// Factorial-geometric fit of the deltas against `q`, when enough levels exist.
    pub fit: Option<GrowthFit>,
    pub stopped_early: bool,
    /// Level-0 decomposition at every node, groups in tracked order.
    pub base: Vec<SpectralDecomposition>,
}

impl Hierarchy {
    pub fn groups(&self) -> usize {
        self.base[0].groups.len()
    }

    pub fn max_level(&self) -> usize {
        self.levels.len() - 1
    }

    /// All deltas vanish: the family has constant projectors.
    pub fn trivially_converged(&self) -> bool {
        self.deltas.iter().all(|&d| d == 0.0)
    }

    /// Level-0 eigenvalue of group `j` at every node.
    pub fn eigenvalue_track(&self, j: usize) -> Vec<C64> {
        self.base.iter().map(|d| d.groups[j].eigenvalue).collect()
    }

    pub fn level(&self, q: usize) -> Result<&HierarchyLevel> {
        self.levels.get(q).ok_or_else(|| {
            Error::InvalidArgument(format!("level {q} not built (max {})", self.max_level()))
        })
    }
}

struct NodeState {
    t: f64,
    h: MatrixJet,
    contours: Vec<Contour>,
    multiplicities: Vec<usize>,
}

struct NodeLevel {
    k: MatrixJet,
    h: ComplexMatrix,
    projectors: Vec<ComplexMatrix>,
}

/// Checks that every circle holds exactly its own eigenvalues; re-solves the radius once.
fn admissible_contours(
    state: &NodeState,
    h: &ComplexMatrix,
    level: usize,
) -> Result<Vec<Contour>> {
    let eig = h.eigenvalues()?;
    let mut out = Vec::with_capacity(state.contours.len());
    for (j, c) in state.contours.iter().enumerate() {
        let inside = eig.iter().filter(|z| c.encloses(**z)).count();
        if inside == state.multiplicities[j] && c.check_clear(&eig).is_ok() {
            out.push(*c);
            continue;
        }
        // own eigenvalues are the nearest-centre ones
        let mut own = Vec::new();
        let mut foreign = Vec::new();
        for z in &eig {
            let nearest = state
                .contours
                .iter()
                .enumerate()
                .min_by(|a, b| (z - a.1.center).norm().total_cmp(&(z - b.1.center).norm()))
                .map(|(k, _)| k)
                .expect("at least one contour");
            if nearest == j {
                own.push((z - c.center).norm());
            } else {
                foreign.push((z - c.center).norm());
            }
        }
        let max_in = own.iter().copied().fold(0.0, f64::max);
        let min_out = foreign.iter().copied().fold(f64::INFINITY, f64::min);
        let r = if min_out.is_finite() {
            0.5 * (max_in + min_out)
        } else {
            2.0 * max_in.max(c.radius)
        };
        if own.len() != state.multiplicities[j]
            || !(max_in < (1.0 - EXCLUSION_BAND) * r && min_out > (1.0 + EXCLUSION_BAND) * r)
        {
            return Err(Error::GapClosed { level, t: state.t });
        }
        out.push(Contour::new(c.center, r, c.nodes)?);
    }
    Ok(out)
}

fn node_level(state: &NodeState, k_prev: Option<&MatrixJet>, epsilon: f64, level: usize) -> Result<NodeLevel> {
    let hq = match k_prev {
        None => state.h.clone(),
        Some(k) => state.h.truncate(k.degree()).sub(&k.scale(C64::new(epsilon, 0.0))),
    };
    let h_val = hq.value();
    let n = h_val.dim();
    if state.contours.len() == 1 {
        let id = ComplexMatrix::identity(n);
        let k = MatrixJet::zeros(n, hq.degree().saturating_sub(1));
        return Ok(NodeLevel {
            k,
            h: h_val,
            projectors: vec![id],
        });
    }
    let contours = if level == 0 {
        state.contours.clone()
    } else {
        admissible_contours(state, &h_val, level)?
    };
    let mut k = MatrixJet::zeros(n, hq.degree() - 1);
    let mut projectors = Vec::with_capacity(contours.len());
    for c in &contours {
        let p = contour_projector_jet(&hq, c).map_err(|e| match e {
            Error::NearSingular { .. } | Error::NoConvergence { .. } if level > 0 => {
                Error::GapClosed { level, t: state.t }
            }
            other => other,
        })?;
        k = k.add(&p.derivative()?.mul(&p));
        projectors.push(p.value());
    }
    Ok(NodeLevel {
        k: k.scale(I),
        h: h_val,
        projectors,
    })
}

/// Level-0 decompositions on the grid with groups tracked by nearest centre.
pub fn tracked_decompositions(
    family: &GeneratorFamily,
    grid: &TimeGrid,
    gap_floor: f64,
) -> Result<Vec<SpectralDecomposition>> {
    let mut decs = try_map(grid.len(), |i| {
        let t = grid.nodes()[i];
        decompose(&family.eval(t), gap_floor).map_err(|e| match e {
            Error::GapViolation {
                distance,
                gap_floor,
                ..
            } => Error::GapViolation {
                t: Some(t),
                distance,
                gap_floor,
            },
            other => other,
        })
    })?;
    for i in 1..decs.len() {
        let prev: Vec<C64> = decs[i - 1].groups.iter().map(|g| g.eigenvalue).collect();
        let prev_mults: Vec<usize> = decs[i - 1].groups.iter().map(|g| g.multiplicity).collect();
        let cur = &mut decs[i];
        if cur.groups.len() != prev.len() {
            return Err(Error::GapViolation {
                t: Some(grid.nodes()[i]),
                distance: 0.0,
                gap_floor,
            });
        }
        cur.reorder_like(&prev)?;
        let mults_match = cur.groups.iter().zip(&prev_mults).all(|(a, &m)| a.multiplicity == m);
        if !mults_match {
            return Err(Error::GapViolation {
                t: Some(grid.nodes()[i]),
                distance: 0.0,
                gap_floor,
            });
        }
    }
    Ok(decs)
}

/// Builds levels `0..=q_max` (fewer if the deltas turn up twice in a row).
pub fn build_hierarchy(
    family: &GeneratorFamily,
    epsilon: f64,
    gap_floor: f64,
    grid: &TimeGrid,
    q_max: usize,
) -> Result<Hierarchy> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1], got {epsilon}")));
    }
    let base = tracked_decompositions(family, grid, gap_floor)?;
    let degree = q_max + 1;
    let states = try_map(grid.len(), |i| {
        let t = grid.nodes()[i];
        Ok(NodeState {
            t,
            h: family.taylor(t, degree)?,
            contours: base[i].groups.iter().map(|g| g.contour).collect(),
            multiplicities: base[i].groups.iter().map(|g| g.multiplicity).collect(),
        })
    })?;
    let n = family.dim();
    let mut levels = Vec::new();
    let mut deltas: Vec<f64> = Vec::new();
    let mut k_jets: Option<Vec<MatrixJet>> = None;
    let mut stopped_early = false;
    for q in 0..=q_max {
        let results = try_map(states.len(), |i| {
            node_level(&states[i], k_jets.as_ref().map(|v| &v[i]), epsilon, q)
        })?;
        let delta = results
            .iter()
            .enumerate()
            .map(|(i, r)| match &levels.last() {
                None => r.k.value().norm2(),
                Some(prev) => {
                    let prev: &HierarchyLevel = prev;
                    (r.k.value() - &prev.k[i]).norm2()
                }
            })
            .fold(0.0, f64::max);
        let groups = results[0].projectors.len();
        let mut projectors = vec![Vec::with_capacity(states.len()); groups];
        let mut complement = Vec::with_capacity(states.len());
        for r in &results {
            let mut sum = ComplexMatrix::zeros(n);
            for (j, p) in r.projectors.iter().enumerate() {
                sum += p;
                projectors[j].push(p.clone());
            }
            complement.push(ComplexMatrix::identity(n) - sum);
        }
        levels.push(HierarchyLevel {
            q,
            k: results.iter().map(|r| r.k.value()).collect(),
            h: results.iter().map(|r| r.h.clone()).collect(),
            projectors,
            complement,
        });
        deltas.push(delta);
        k_jets = Some(results.into_iter().map(|r| r.k).collect());
        let m = deltas.len();
        if q >= 1 && delta == 0.0 {
            stopped_early = q < q_max;
            break;
        }
        if m >= 3 && deltas[m - 1] > deltas[m - 2] && deltas[m - 2] > deltas[m - 3] {
            stopped_early = q < q_max;
            break;
        }
    }
    let q_star = deltas
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(q, _)| q)
        .expect("at least level 0");
    for level in levels.iter().take(q_star + 1) {
        let tail = grid.matrix_tail_ratio(&level.k);
        if tail > GRID_TAIL_TOL {
            return Err(Error::GridTooCoarse { level: level.q, tail });
        }
    }
    let positive: Vec<(usize, f64)> = deltas
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, d)| **d > 0.0)
        .map(|(q, d)| (q, d.ln()))
        .collect();
    let fit = if positive.len() >= 3 {
        let qs: Vec<usize> = positive.iter().map(|p| p.0).collect();
        let ln: Vec<f64> = positive.iter().map(|p| p.1).collect();
        fit_factorial_geometric(epsilon, &qs, &ln).ok()
    } else {
        None
    };
    Ok(Hierarchy {
        epsilon,
        gap_floor,
        grid: grid.clone(),
        levels,
        deltas,
        q_star,
        fit,
        stopped_early,
        base,
    })
}

/// [`build_hierarchy`] on the default grid, doubling it once if it is too coarse.
pub fn build_hierarchy_auto(
    family: &GeneratorFamily,
    epsilon: f64,
    gap_floor: f64,
    grid_size: usize,
    q_max: usize,
) -> Result<Hierarchy> {
    let grid = TimeGrid::new(grid_size)?;
    match build_hierarchy(family, epsilon, gap_floor, &grid, q_max) {
        Err(Error::GridTooCoarse { .. }) => {
            let finer = TimeGrid::new(2 * grid_size - 1)?;
            build_hierarchy(family, epsilon, gap_floor, &finer, q_max)
        }
        other => other,
    }
}

pub fn default_grid() -> TimeGrid {
    TimeGrid::with_size(DEFAULT_GRID_SIZE)
}

/// Fits of the optimal deltas across an ε-grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaDecayFit {
    /// `log δ_{q*}` against `1/ε`.
    pub decay: GrowthFit,
    /// Slope of `q*` against `1/ε`, an estimate of `g`.
    pub g: f64,
    pub q_star_r_squared: f64,
}

pub fn fit_delta_decay(hierarchies: &[Hierarchy]) -> Result<DeltaDecayFit> {
    let mut eps: Vec<f64> = hierarchies.iter().map(|h| h.epsilon).collect();
    eps.dedup();
    if eps.len() < 4 {
        return Err(Error::InsufficientData {
            needed: 4,
            found: eps.len(),
        });
    }
    if hierarchies.iter().all(|h| h.trivially_converged()) {
        return Err(Error::DegenerateData("all deltas vanish".into()));
    }
    let eps: Vec<f64> = hierarchies.iter().map(|h| h.epsilon).collect();
    let ln: Vec<f64> = hierarchies.iter().map(|h| h.deltas[h.q_star].ln()).collect();
    let decay = fit_exp_inverse_eps(&eps, &ln)?;
    let inv: Vec<f64> = eps.iter().map(|e| 1.0 / e).collect();
    let qs: Vec<f64> = hierarchies.iter().map(|h| h.q_star as f64).collect();
    let (g, r2) = match linear_fit(&inv, &qs) {
        Ok(l) => (l.slope, l.r_squared),
        Err(_) => (0.0, 0.0),
    };
    Ok(DeltaDecayFit {
        decay,
        g,
        q_star_r_squared: r2,
    })
}

/// Pieces of `H^q P_j^q = λ_j P_j^q + P_j^q D_j P_j^q + ε J_j^q` at one node.
#[derive(Clone, Debug)]
pub struct EffectiveGenerator {
    pub lambda: C64,
    pub d_part: ComplexMatrix,
    pub j_part: ComplexMatrix,
}

pub fn effective_generator(h: &Hierarchy, q: usize, j: usize, node: usize) -> Result<EffectiveGenerator> {
    let level = h.level(q)?;
    if j >= h.groups() {
        return Err(Error::InvalidArgument(format!("group {j} out of range")));
    }
    if node >= h.grid.len() {
        return Err(Error::InvalidArgument(format!("node {node} out of range")));
    }
    let g = &h.base[node].groups[j];
    let p = &level.projectors[j][node];
    let hp = &level.h[node] * p;
    let d_part = &(p * &g.nilpotent) * p;
    let rest = &(&hp - &p.scale(g.eigenvalue)) - &d_part;
    Ok(EffectiveGenerator {
        lambda: g.eigenvalue,
        d_part,
        j_part: rest.scale_real(1.0 / h.epsilon),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::IntroParams;

    #[test]
    fn constant_family_is_trivially_converged() {
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 0.3], &[0.0, -1.0]]);
        let fam = GeneratorFamily::constant(a);
        let h = build_hierarchy(&fam, 0.1, 0.5, &TimeGrid::new(33).unwrap(), 6).unwrap();
        assert!(h.trivially_converged());
        assert_eq!(h.q_star, 0);
        assert!(h.levels[0].k.iter().all(|k| k.max_abs() < 1e-12));
        let e = effective_generator(&h, 1, 0, 3).unwrap();
        assert!(e.d_part.max_abs() < 1e-12 && e.j_part.max_abs() < 1e-9);
    }

    #[test]
    fn level_identities_hold() {
        let fam = GeneratorFamily::two_level(0.2, 1.0).unwrap();
        let eps = 0.1;
        assert!(matches!(
            build_hierarchy(&fam, eps, 0.5, &TimeGrid::new(33).unwrap(), 6),
            Err(Error::GridTooCoarse { level: 0, .. })
        ));
        let h = build_hierarchy(&fam, eps, 0.5, &default_grid(), 6).unwrap();
        for q in 1..h.levels.len() {
            for i in 0..h.grid.len() {
                let t = h.grid.nodes()[i];
                let want = fam.eval(t) - h.levels[q - 1].k[i].scale_real(eps);
                assert!((&h.levels[q].h[i] - &want).max_abs() < 1e-12);
                assert!(h.levels[q].complement[i].max_abs() < 1e-9);
                for p in &h.levels[q].projectors {
                    assert!((&p[i] * &p[i] - &p[i]).max_abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn two_level_turnover_at_large_epsilon() {
        let fam = GeneratorFamily::two_level(0.2, 1.0).unwrap();
        let h = build_hierarchy(&fam, 0.1, 0.5, &default_grid(), 12).unwrap();
        let qs = h.q_star;
        assert!(qs >= 1 && qs + 1 < h.deltas.len(), "deltas {:?}", h.deltas);
        assert!(h.deltas[qs] < h.deltas[0]);
        assert!(*h.deltas.last().unwrap() > h.deltas[qs]);
    }

    #[test]
    fn intro_level_one_projector_moves_by_order_epsilon() {
        let fam = GeneratorFamily::intro_example(IntroParams::real(1.0, -1.0));
        let eps = 0.01;
        let h = build_hierarchy(&fam, eps, 0.5, &TimeGrid::new(33).unwrap(), 2).unwrap();
        let diff = (0..h.grid.len())
            .map(|i| (&h.levels[1].projectors[1][i] - &h.levels[0].projectors[1][i]).norm2())
            .fold(0.0, f64::max);
        assert!(diff > 0.1 * eps && diff < 10.0 * eps, "diff {diff}");
        // D part of the Jordan group keeps norm |a| up to O(ε)
        let e = effective_generator(&h, 1, 0, 0).unwrap();
        assert!((e.d_part.norm2() - 1.0).abs() < 10.0 * eps);
    }
}
