// Copyright 2026 Adiabat Contributors
// SPDX-License-Identifier: Apache-2.0

//! Evolutions `ε Y' = (N(t) + ε A(t)) Y` generated by analytic nilpotents.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::GeneratorFamily;
use crate::fit::{bounded_fit, fit_power_law, fit_stretched_exp, variation, GrowthFit, GrowthModel};
use crate::linalg::{ComplexMatrix, C64, I};
use crate::par::try_map;
use crate::propagator::{evolve_sampled, EvolutionResult, FnMatrix, OmegaProfile};
use crate::scaled::ScaledValue;

const INDEX_SAMPLES: usize = 50;
const INDEX_RELATIVE: f64 = 1e-10;
const ZERO_SAMPLES: usize = 1001;
/// `sup ‖N‖` below this counts as `N ≡ 0`.
pub const ZERO_THRESHOLD: f64 = 1e-12;
/// `max/min` of `‖Y‖` across ε below this counts as bounded.
pub const BOUNDED_RATIO: f64 = 10.0;
/// Growth series varying by less than this factor get the bounded verdict.
pub const GROWTH_BOUNDED_VARIATION: f64 = 1.1;
const ST_GRID: usize = 9;

#[derive(Clone, Debug)]
pub struct NilpotentFamily {
    pub family: GeneratorFamily,
    /// Smallest `d` with `N^d ≡ 0`; 0 when `N ≡ 0`.
    pub index: usize,
    pub perturbation: Option<GeneratorFamily>,
}

fn sample_times(m: usize) -> impl Iterator<Item = f64> {
    (0..m).map(move |i| i as f64 / (m - 1) as f64)
}

fn sup_norm(family: &GeneratorFamily, m: usize) -> f64 {
    sample_times(m).map(|t| family.eval(t).norm2()).fold(0.0, f64::max)
}

impl NilpotentFamily {
    pub fn new(family: GeneratorFamily, perturbation: Option<GeneratorFamily>) -> Result<Self> {
        if let Some(p) = &perturbation {
            if p.dim() != family.dim() {
                return Err(Error::DimensionMismatch {
                    expected: family.dim(),
                    found: p.dim(),
                });
            }
        }
        let index = nilpotency_index(&family)?;
        Ok(Self {
            family,
            index,
            perturbation,
        })
    }

    pub fn dim(&self) -> usize {
        self.family.dim()
    }

    /// `N(t) + ε A(t)`.
    pub fn generator(&self, epsilon: f64, t: f64) -> ComplexMatrix {
        let n = self.family.eval(t);
        match &self.perturbation {
            Some(a) => n + a.eval(t).scale_real(epsilon),
            None => n,
        }
    }

    /// Structural test `sup_u ‖N(u)‖ < 1e-12` on a fine sample.
    pub fn is_identically_zero(&self) -> bool {
        sup_norm(&self.family, ZERO_SAMPLES) < ZERO_THRESHOLD
    }
}

/// Index by collapse of successive powers at sampled times.
pub fn nilpotency_index(family: &GeneratorFamily) -> Result<usize> {
    let samples: Vec<ComplexMatrix> = sample_times(INDEX_SAMPLES).map(|t| family.eval(t)).collect();
    let scale = samples.iter().map(|m| m.norm2()).fold(0.0, f64::max);
    if scale < ZERO_THRESHOLD {
        return Ok(0);
    }
    let n = family.dim();
    let mut powers = samples.clone();
    let mut worst = 0.0_f64;
    for d in 1..=n {
        worst = powers
            .iter()
            .zip(&samples)
            .map(|(p, m)| p.norm2() / m.norm2().max(ZERO_THRESHOLD).powi(d as i32))
            .fold(0.0, f64::max);
        if worst <= INDEX_RELATIVE {
            return Ok(d);
        }
        for (p, m) in powers.iter_mut().zip(&samples) {
            *p = &*p * m;
        }
    }
    Err(Error::NotNilpotent { residual: worst })
}

/// `Y(t,s)` sampled at each of `times`, starting from `Y(times[0], times[0]) = I`.
pub fn evolve_nilpotent_sampled(nf: &NilpotentFamily, epsilon: f64, times: &[f64], tol: f64) -> Result<Vec<EvolutionResult>> {
    // ε Y' = G Y is i ε Y' = (i G) Y
    let gen = FnMatrix::new(nf.dim(), |t| nf.generator(epsilon, t).scale(I));
    evolve_sampled(&gen, epsilon, times, &OmegaProfile::zero(), tol)
}

pub fn evolve_nilpotent(nf: &NilpotentFamily, epsilon: f64, s: f64, t: f64, tol: f64) -> Result<EvolutionResult> {
    if !((0.0..=1.0).contains(&s) && (0.0..=1.0).contains(&t)) {
        return Err(Error::InvalidArgument(format!("times must lie in [0, 1], got s = {s}, t = {t}")));
    }
    let mut r = evolve_nilpotent_sampled(nf, epsilon, &[s, t], tol)?;
    Ok(r.pop().expect("two samples"))
}

/// Location and value of `sup ‖Y(t,s)‖` over a square sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupSample {
    pub epsilon: f64,
    pub s: f64,
    pub t: f64,
    pub value: ScaledValue,
}

/// `max ‖Y(t,s)‖` over `s ∈ ss`, `t ∈ ts`; one forward and one backward sweep per `s`.
fn sup_over(nf: &NilpotentFamily, epsilon: f64, ss: &[f64], ts: &[f64], tol: f64) -> Result<SupSample> {
    let per_s = try_map(ss.len(), |i| {
        let s = ss[i];
        let mut best = SupSample {
            epsilon,
            s,
            t: s,
            value: ScaledValue::new(1.0, 0.0),
        };
        let mut fwd = vec![s];
        fwd.extend(ts.iter().copied().filter(|&t| t > s));
        let mut bwd = vec![s];
        bwd.extend(ts.iter().rev().copied().filter(|&t| t < s));
        for path in [fwd, bwd] {
            if path.len() < 2 {
                continue;
            }
            for r in evolve_nilpotent_sampled(nf, epsilon, &path, tol)? {
                let v = ScaledValue::new(r.matrix.norm2(), r.log_scale);
                if v.ln() > best.value.ln() {
                    best = SupSample { epsilon, s, t: r.t, value: v };
                }
            }
        }
        Ok(best)
    })?;
    Ok(per_s
        .into_iter()
        .max_by(|a, b| a.value.ln().total_cmp(&b.value.ln()))
        .expect("nonempty"))
}

fn refined_axis(center: f64, h: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..ST_GRID)
        .map(|i| (center - h + 2.0 * h * i as f64 / (ST_GRID - 1) as f64).clamp(0.0, 1.0))
        .collect();
    v.dedup();
    v
}

/// `sup_{s,t} ‖Y(t,s)‖` on a 9×9 grid refined once around the maximizer.
pub fn sup_propagator(nf: &NilpotentFamily, epsilon: f64, tol: f64) -> Result<SupSample> {
    let axis: Vec<f64> = sample_times(ST_GRID).collect();
    let coarse = sup_over(nf, epsilon, &axis, &axis, tol)?;
    let h = 1.0 / (ST_GRID - 1) as f64;
    let fine = sup_over(
        nf,
        epsilon,
        &refined_axis(coarse.s, h),
        &refined_axis(coarse.t, h),
        tol,
    )?;
    Ok(if fine.value.ln() > coarse.value.ln() { fine } else { coarse })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NilpotentGrowth {
    /// Prefactored stretched law, or the bounded verdict.
    pub fit: GrowthFit,
    /// `ln sup‖Y‖` against `ln(1/ε)`; slope ≈ `d - 1` for constant `N`.
    pub power_law: Option<GrowthFit>,
    pub samples: Vec<SupSample>,
}

pub fn growth_exponent(nf: &NilpotentFamily, epsilon_grid: &[f64], tol: f64) -> Result<NilpotentGrowth> {
    if epsilon_grid.len() < 5 {
        return Err(Error::InsufficientData {
            needed: 5,
            found: epsilon_grid.len(),
        });
    }
    let samples = try_map(epsilon_grid.len(), |i| sup_propagator(nf, epsilon_grid[i], tol))?;
    let ln: Vec<f64> = samples.iter().map(|s| s.value.ln()).collect();
    if variation(&ln) < GROWTH_BOUNDED_VARIATION {
        return Ok(NilpotentGrowth {
            fit: bounded_fit(GrowthModel::PrefactoredStretchedExp, &ln),
            power_law: None,
            samples,
        });
    }
    Ok(NilpotentGrowth {
        fit: fit_stretched_exp(epsilon_grid, &ln, true)?,
        power_law: fit_power_law(epsilon_grid, &ln).ok(),
        samples,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Bounded,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DichotomyReport {
    pub verdict: Verdict,
    /// `max/min` of `‖Y(t,s)‖` over the ε grid.
    pub ratio: f64,
    pub norms: Vec<ScaledValue>,
    pub sup_n: f64,
}

pub fn boundedness_dichotomy(
    nf: &NilpotentFamily,
    epsilon_grid: &[f64],
    s: f64,
    t: f64,
    tol: f64,
) -> Result<DichotomyReport> {
    if epsilon_grid.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            found: epsilon_grid.len(),
        });
    }
    let norms = try_map(epsilon_grid.len(), |i| {
        evolve_nilpotent(nf, epsilon_grid[i], s, t, tol).map(|r| ScaledValue::new(r.matrix.norm2(), r.log_scale))
    })?;
    let ln: Vec<f64> = norms.iter().map(|v| v.ln()).collect();
    let ratio = variation(&ln);
    let numerical = if ratio < BOUNDED_RATIO {
        Verdict::Bounded
    } else {
        Verdict::Unbounded
    };
    let sup_n = sup_norm(&nf.family, ZERO_SAMPLES);
    let structural = if sup_n < ZERO_THRESHOLD {
        Verdict::Bounded
    } else {
        Verdict::Unbounded
    };
    if numerical != structural {
        return Err(Error::VerdictConflict {
            numerical: numerical == Verdict::Bounded,
            structural: structural == Verdict::Bounded,
            hint: format!(
                "norm ratio {ratio:.3} over epsilon down to {:.3e}; extend the epsilon grid toward 0",
                epsilon_grid.iter().copied().fold(f64::INFINITY, f64::min)
            ),
        });
    }
    Ok(DichotomyReport {
        verdict: numerical,
        ratio,
        norms,
        sup_n,
    })
}

/// `sup_{s ∈ [0, 50/δ]} ‖e^{(N - δ)s}‖` by dense sampling refined at the maximizer.
pub fn shifted_nilpotent_bound(n: &ComplexMatrix, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidArgument(format!("delta must lie in (0, 1], got {delta}")));
    }
    nilpotency_index(&GeneratorFamily::constant(n.clone()))?;
    let f = |s: f64| (-delta * s).exp() * n.scale(C64::new(s, 0.0)).exp().norm2();
    let end = 50.0 / delta;
    let m = 2000;
    let h = end / m as f64;
    let (mut arg, mut best) = (0.0, f(0.0));
    for i in 1..=m {
        let s = i as f64 * h;
        let v = f(s);
        if v > best {
            arg = s;
            best = v;
        }
    }
    // golden section on the bracketing cell pair
    let (mut lo, mut hi) = ((arg - h).max(0.0), (arg + h).min(end));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let x1 = hi - phi * (hi - lo);
        let x2 = lo + phi * (hi - lo);
        if f(x1) >= f(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    Ok(best.max(f(0.5 * (lo + hi))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jordan() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]])
    }

    #[test]
    fn index_detection() {
        let nf = NilpotentFamily::new(GeneratorFamily::nilpotent_example(), None).unwrap();
        assert_eq!(nf.index, 2);
        let zero = NilpotentFamily::new(GeneratorFamily::constant(ComplexMatrix::zeros(2)), None).unwrap();
        assert_eq!(zero.index, 0);
        let j3 = ComplexMatrix::from_real_rows(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &[0.0, 0.0, 0.0]]);
        assert_eq!(nilpotency_index(&GeneratorFamily::constant(j3)).unwrap(), 3);
        let bad = GeneratorFamily::constant(ComplexMatrix::identity(2));
        assert!(matches!(nilpotency_index(&bad), Err(Error::NotNilpotent { .. })));
    }

    #[test]
    fn constant_jordan_is_polynomial() {
        let nf = NilpotentFamily::new(GeneratorFamily::constant(jordan()), None).unwrap();
        let eps = 0.05;
        let y = evolve_nilpotent(&nf, eps, 0.0, 0.6, 1e-11).unwrap();
        let want = ComplexMatrix::from_real_rows(&[&[1.0, 0.6 / eps], &[0.0, 1.0]]);
        assert!((&y.matrix - &want).max_abs() < 1e-9);
    }

    #[test]
    fn reverse_time_inverts() {
        let nf = NilpotentFamily::new(GeneratorFamily::nilpotent_example(), None).unwrap();
        let tol = 1e-10;
        let f = evolve_nilpotent(&nf, 0.04, 0.2, 0.9, tol).unwrap();
        let b = evolve_nilpotent(&nf, 0.04, 0.9, 0.2, tol).unwrap();
        let d = (&f.matrix * &b.matrix - ComplexMatrix::identity(2)).max_abs();
        assert!(d <= 10.0 * tol * f.matrix.norm2().powi(2), "{d}");
    }

    #[test]
    fn zero_nilpotent_with_rotation_is_bounded() {
        let a = ComplexMatrix::from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]]);
        let nf = NilpotentFamily::new(
            GeneratorFamily::constant(ComplexMatrix::zeros(2)),
            Some(GeneratorFamily::constant(a.clone())),
        )
        .unwrap();
        let y = evolve_nilpotent(&nf, 0.01, 0.0, 0.8, 1e-11).unwrap();
        assert!((&y.matrix - &a.scale_real(0.8).exp()).max_abs() < 1e-8);
        let r = boundedness_dichotomy(&nf, &[0.1, 0.03, 0.01, 0.005], 0.0, 1.0, 1e-10).unwrap();
        assert_eq!(r.verdict, Verdict::Bounded);
        let g = growth_exponent(&nf, &[0.1, 0.05, 0.02, 0.01, 0.005], 1e-10).unwrap();
        assert!(g.fit.bounded);
    }

    #[test]
    fn shifted_bound_scaling() {
        let zero = ComplexMatrix::zeros(2);
        assert!((shifted_nilpotent_bound(&zero, 0.3).unwrap() - 1.0).abs() < 1e-12);
        let scaled: Vec<f64> = [1.0, 0.3, 0.1, 0.03]
            .iter()
            .map(|&d| shifted_nilpotent_bound(&jordan(), d).unwrap() * d)
            .collect();
        assert!(scaled.iter().all(|&v| v <= 1.0 + 1e-12), "{scaled:?}");
        // δ = 1 sits below e^{s0 ‖N‖} at the maximizer s0 = 1
        assert!(shifted_nilpotent_bound(&jordan(), 1.0).unwrap() <= 1f64.exp());
        assert!(matches!(
            shifted_nilpotent_bound(&ComplexMatrix::identity(2), 0.5),
            Err(Error::NotNilpotent { .. })
        ));
    }
}
