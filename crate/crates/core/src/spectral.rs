// Copyright 2026 Adiabat Contributors
// SPDX-License-Identifier: Apache-2.0

//! Spectral decomposition of a single complex matrix.
//!
//! [`decompose`] clusters eigenvalues, builds one projector per cluster from
//! the kernel and range of the cluster polynomial, and splits `H` into
//! `Σ λ_j P_j + D_j` with nilpotent `D_j`. [`contour_projector`] computes the
//! same projectors independently by trapezoidal quadrature of the resolvent.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64, ONE, ZERO};

pub const DEFAULT_CONTOUR_NODES: usize = 16;
pub const MAX_CONTOUR_NODES: usize = 4096;
/// Convergence threshold for node doubling in contour quadrature.
pub const CONTOUR_TOL: f64 = 1e-12;
/// Eigenvalues closer than this fraction of the radius to a circle are rejected.
pub const EXCLUSION_BAND: f64 = 0.1;
/// Nilpotent entries below this multiple of `‖H‖` are set to zero.
pub const FLUSH_RELATIVE: f64 = 1e-12;
/// Resolvent requests with `σ_min(H - λ)` below this multiple of `max(1, ‖H - λ‖)` fail.
pub const SINGULAR_RELATIVE: f64 = 1e-13;

/// Circle in the complex plane, discretised with `nodes` equispaced points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub center: C64,
    pub radius: f64,
    pub nodes: usize,
}

impl Contour {
    pub fn new(center: C64, radius: f64, nodes: usize) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidArgument(format!("contour radius must be positive, got {radius}")));
        }
        if nodes < 4 {
            return Err(Error::InvalidArgument(format!("contour needs at least 4 nodes, got {nodes}")));
        }
        if !(center.re.is_finite() && center.im.is_finite()) {
            return Err(Error::InvalidArgument("contour center must be finite".into()));
        }
        Ok(Self {
            center,
            radius,
            nodes,
        })
    }

    pub fn with_default_nodes(center: C64, radius: f64) -> Result<Self> {
        Self::new(center, radius, DEFAULT_CONTOUR_NODES)
    }

    /// `k`-th of `m` equispaced quadrature points.
    pub fn point(&self, k: usize, m: usize) -> C64 {
        let theta = 2.0 * PI * k as f64 / m as f64;
        self.center + C64::from_polar(self.radius, theta)
    }

    pub fn encloses(&self, z: C64) -> bool {
        (z - self.center).norm() < self.radius
    }

    /// Fails if any eigenvalue lies inside the exclusion band around the circle.
    pub fn check_clear(&self, eigenvalues: &[C64]) -> Result<()> {
        for &mu in eigenvalues {
            let d = ((mu - self.center).norm() - self.radius).abs();
            if d < EXCLUSION_BAND * self.radius {
                return Err(Error::ContourTooClose {
                    center: self.center,
                    radius: self.radius,
                    eigenvalue: mu,
                    distance: d,
                });
            }
        }
        Ok(())
    }
}

/// One cluster of eigenvalues with its projector and nilpotent part.
#[derive(Clone, Debug)]
pub struct EigenGroup {
    /// Mean of the clustered eigenvalues.
    pub eigenvalue: C64,
    pub multiplicity: usize,
    /// Raw eigenvalues assigned to the cluster.
    pub members: Vec<C64>,
    pub projector: ComplexMatrix,
    /// `(H - λ) P`.
    pub nilpotent: ComplexMatrix,
    /// Smallest `k` with `D^k` numerically zero.
    pub nilpotency_index: usize,
    /// Circle isolating the cluster.
    pub contour: Contour,
}

#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub groups: Vec<EigenGroup>,
    /// `I - Σ P_j`; numerically zero for a complete decomposition.
    pub complement_projector: ComplexMatrix,
    /// Smallest distance between cluster centres (`inf` for a single cluster).
    pub min_gap: f64,
    /// Largest imaginary part over the spectrum.
    pub omega: f64,
    pub norm: f64,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.complement_projector.dim()
    }

    pub fn eigenvalues(&self) -> Vec<C64> {
        self.groups.iter().flat_map(|g| g.members.iter().copied()).collect()
    }

    /// `Σ (λ_j P_j + D_j)`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let mut h = ComplexMatrix::zeros(self.dim());
        for g in &self.groups {
            h += &(g.projector.scale(g.eigenvalue) + &g.nilpotent);
        }
        h
    }

    /// Reorders groups so that group `j` has the centre closest to `centers[j]`.
    pub fn reorder_like(&mut self, centers: &[C64]) -> Result<()> {
        if centers.len() != self.groups.len() {
            return Err(Error::DimensionMismatch {
                expected: centers.len(),
                found: self.groups.len(),
            });
        }
        let mut remaining: Vec<Option<EigenGroup>> = self.groups.drain(..).map(Some).collect();
        let mut out = Vec::with_capacity(centers.len());
        for &c in centers {
            let best = remaining
                .iter()
                .enumerate()
                .filter_map(|(i, g)| g.as_ref().map(|g| (i, (g.eigenvalue - c).norm())))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .map(|(i, _)| i)
                .expect("counts checked above");
            out.push(remaining[best].take().expect("slot is occupied"));
        }
        self.groups = out;
        Ok(())
    }
}

/// `(H - λ)^{-1}`; fails when `H - λ` is numerically singular.
pub fn resolvent(h: &ComplexMatrix, lambda: C64) -> Result<ComplexMatrix> {
    let shifted = h.shift(-lambda);
    let sigma = shifted.min_singular_value();
    let scale = shifted.norm2().max(1.0);
    if !(sigma > SINGULAR_RELATIVE * scale) {
        return Err(Error::NearSingular {
            lambda,
            sigma_min: sigma,
        });
    }
    shifted.inverse().map_err(|_| Error::NearSingular {
        lambda,
        sigma_min: sigma,
    })
}

/// Riesz projector `(1/2πi) ∮ (λ - H)^{-1} dλ` by trapezoidal quadrature.
///
/// Node count starts at `contour.nodes` and doubles until successive
/// estimates agree to [`CONTOUR_TOL`].
pub fn contour_projector(h: &ComplexMatrix, contour: &Contour) -> Result<ComplexMatrix> {
    let eig = h.eigenvalues()?;
    contour.check_clear(&eig)?;
    contour_projector_unchecked(h, contour)
}

pub(crate) fn contour_projector_unchecked(h: &ComplexMatrix, contour: &Contour) -> Result<ComplexMatrix> {
    let n = h.dim();
    let term = |lambda: C64| -> Result<ComplexMatrix> {
        let r = h.scale(-ONE).shift(lambda).inverse().map_err(|_| Error::NearSingular {
            lambda,
            sigma_min: 0.0,
        })?;
        Ok(r.scale(lambda - contour.center))
    };
    let mut m = contour.nodes;
    let mut sum = ComplexMatrix::zeros(n);
    for k in 0..m {
        sum += &term(contour.point(k, m))?;
    }
    let mut estimate = sum.scale_real(1.0 / m as f64);
    while m < MAX_CONTOUR_NODES {
        for k in 0..m {
            sum += &term(contour.point(2 * k + 1, 2 * m))?;
        }
        m *= 2;
        let next = sum.scale_real(1.0 / m as f64);
        let diff = (&next - &estimate).max_abs();
        estimate = next;
        if diff < CONTOUR_TOL * estimate.max_abs().max(1.0) {
            return Ok(estimate);
        }
    }
    Err(Error::NoConvergence {
        what: "contour quadrature",
        detail: format!("no agreement to {CONTOUR_TOL:e} with {MAX_CONTOUR_NODES} nodes"),
    })
}

struct Cluster {
    members: Vec<C64>,
}

impl Cluster {
    fn center(&self) -> C64 {
        self.members.iter().sum::<C64>() / self.members.len() as f64
    }

    fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for a in &self.members {
            for b in &self.members {
                d = d.max((a - b).norm());
            }
        }
        d
    }
}

fn cluster_eigenvalues(eig: &[C64], radius: f64) -> Vec<Cluster> {
    let n = eig.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut i = i;
        while p[i] != r {
            let next = p[i];
            p[i] = r;
            i = next;
        }
        r
    }
    for a in 0..n {
        for b in a + 1..n {
            if (eig[a] - eig[b]).norm() < radius {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[rb] = ra;
                }
            }
        }
    }
    let mut clusters: Vec<(usize, Cluster)> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match clusters.iter_mut().find(|(root, _)| *root == r) {
            Some((_, c)) => c.members.push(eig[i]),
            None => clusters.push((r, Cluster { members: vec![eig[i]] })),
        }
    }
    let mut out: Vec<Cluster> = clusters.into_iter().map(|(_, c)| c).collect();
    out.sort_by(|a, b| {
        let (ca, cb) = (a.center(), b.center());
        if (ca.re - cb.re).abs() > 1e-9 * (1.0 + ca.re.abs().max(cb.re.abs())) {
            ca.re.total_cmp(&cb.re)
        } else {
            ca.im.total_cmp(&cb.im)
        }
    });
    out
}

/// Projector onto the invariant subspace of a cluster, along the complementary one.
///
/// With `M = Π (H - μ_i)` over the cluster members, the subspace is `ker M`
/// and the complement is `ran M`, whose orthogonal complement is `ker M*`.
fn cluster_projector(h: &ComplexMatrix, members: &[C64]) -> Result<ComplexMatrix> {
    let n = h.dim();
    let m = members.len();
    if m == n {
        return Ok(ComplexMatrix::identity(n));
    }
    let scale = h.norm2().max(1.0);
    let mut poly = ComplexMatrix::identity(n);
    for &mu in members {
        poly = &poly * &h.shift(-mu).scale_real(1.0 / scale);
    }
    let x = right_kernel(poly.inner().clone(), m);
    // separate factorization: left singular vectors of the first are not accurate enough
    let z = right_kernel(poly.inner().adjoint(), m);
    let zx = z.adjoint() * &x;
    let zx_inv = zx.try_inverse().ok_or(Error::NoConvergence {
        what: "cluster projector",
        detail: "kernel and co-range are not complementary".into(),
    })?;
    ComplexMatrix::from_inner(x * zx_inv * z.adjoint())
}

/// Right singular vectors of the `m` smallest singular values, as columns.
fn right_kernel(a: nalgebra::DMatrix<C64>, m: usize) -> nalgebra::DMatrix<C64> {
    let n = a.ncols();
    let svd = a.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    nalgebra::DMatrix::from_fn(n, m, |i, k| vt[(order[k], i)].conj())
}

fn nilpotency_index(d: &ComplexMatrix, scale: f64) -> usize {
    let n = d.dim();
    let mut p = d.clone();
    for k in 1..=n {
        if p.max_abs() <= 1e-8 * scale.powi(k as i32) {
            return k;
        }
        p = &p * d;
    }
    n
}

/// Clusters eigenvalues at `gap_floor / 4`, then returns projectors,
/// nilpotent parts and contours for every cluster.
pub fn decompose(h: &ComplexMatrix, gap_floor: f64) -> Result<SpectralDecomposition> {
    if !(gap_floor.is_finite() && gap_floor > 0.0) {
        return Err(Error::InvalidArgument(format!("gap floor must be positive, got {gap_floor}")));
    }
    let n = h.dim();
    let eig = h.eigenvalues()?;
    let clusters = cluster_eigenvalues(&eig, gap_floor / 4.0);
    let centers: Vec<C64> = clusters.iter().map(Cluster::center).collect();
    let mut min_gap = f64::INFINITY;
    for a in 0..centers.len() {
        for b in a + 1..centers.len() {
            min_gap = min_gap.min((centers[a] - centers[b]).norm());
        }
    }
    if min_gap < gap_floor {
        return Err(Error::GapViolation {
            t: None,
            distance: min_gap,
            gap_floor,
        });
    }
    let norm = h.norm2();
    let mut groups = Vec::with_capacity(clusters.len());
    let mut sum = ComplexMatrix::zeros(n);
    for (ci, cluster) in clusters.iter().enumerate() {
        let center = centers[ci];
        let diam = cluster.diameter();
        let foreign = clusters
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != ci)
            .flat_map(|(_, c)| c.members.iter())
            .map(|mu| (mu - center).norm())
            .fold(f64::INFINITY, f64::min);
        let radius = if foreign.is_finite() {
            (0.5 * foreign).max(2.0 * diam)
        } else {
            (2.0 * diam).max(1.0)
        };
        let contour = Contour::with_default_nodes(center, radius)?;
        let projector = cluster_projector(h, &cluster.members)?;
        let mut nilpotent = &h.shift(-center) * &projector;
        let flush = FLUSH_RELATIVE * norm;
        for i in 0..n {
            for j in 0..n {
                if nilpotent[(i, j)].norm() < flush {
                    nilpotent[(i, j)] = ZERO;
                }
            }
        }
        let nilpotency_index = nilpotency_index(&nilpotent, norm.max(1.0));
        sum += &projector;
        groups.push(EigenGroup {
            eigenvalue: center,
            multiplicity: cluster.members.len(),
            members: cluster.members.clone(),
            projector,
            nilpotent,
            nilpotency_index,
            contour,
        });
    }
    let complement_projector = ComplexMatrix::identity(n) - sum;
    let omega = eig.iter().map(|z| z.im).fold(f64::NEG_INFINITY, f64::max);
    Ok(SpectralDecomposition {
        groups,
        complement_projector,
        min_gap,
        omega,
        norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn intro_h() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 0.0], &[0.0, 0.0, 1.0]])
    }

    #[test]
    fn defective_cluster_is_resolved() {
        let d = decompose(&intro_h(), 0.5).unwrap();
        assert_eq!(d.groups.len(), 2);
        let g0 = &d.groups[0];
        assert_eq!(g0.multiplicity, 2);
        assert_eq!(g0.nilpotency_index, 2);
        let p0 = ComplexMatrix::diagonal(&[ONE, ONE, ZERO]);
        assert!((&g0.projector - &p0).max_abs() < 1e-12);
        assert!((g0.nilpotent[(0, 1)] - ONE).norm() < 1e-12);
        assert!(d.groups[1].nilpotent.max_abs() == 0.0);
        assert!((d.min_gap - 1.0).abs() < 1e-6);
        assert!(d.complement_projector.max_abs() < 1e-12);
    }

    #[test]
    fn contour_and_kernel_routes_agree() {
        let h = ComplexMatrix::from_rows(&[
            vec![c(1.0, 0.5), c(2.0, 0.0), c(0.0, 1.0)],
            vec![c(0.0, 0.0), c(-1.0, 0.0), c(0.3, 0.0)],
            vec![c(0.2, 0.0), c(0.0, 0.0), c(0.5, -1.0)],
        ])
        .unwrap();
        let d = decompose(&h, 0.2).unwrap();
        for g in &d.groups {
            let p = contour_projector(&h, &g.contour).unwrap();
            assert!((&p - &g.projector).max_abs() < 1e-9);
        }
        assert!((d.reconstruct() - &h).max_abs() < 1e-9 * h.norm2());
    }

    #[test]
    fn gap_violation_reported() {
        let h = ComplexMatrix::diagonal(&[c(0.0, 0.0), c(0.2, 0.0)]);
        match decompose(&h, 0.5) {
            Err(Error::GapViolation { distance, .. }) => assert!((distance - 0.2).abs() < 1e-12),
            other => panic!("expected gap violation, got {other:?}"),
        }
    }

    #[test]
    fn contour_near_eigenvalue_rejected() {
        let h = ComplexMatrix::diagonal(&[c(0.0, 0.0), c(1.0, 0.0)]);
        let contour = Contour::with_default_nodes(c(0.0, 0.0), 0.98).unwrap();
        assert!(matches!(contour_projector(&h, &contour), Err(Error::ContourTooClose { .. })));
    }

    #[test]
    fn resolvent_at_eigenvalue_fails() {
        let h = intro_h();
        assert!(matches!(resolvent(&h, ONE), Err(Error::NearSingular { .. })));
        let r = resolvent(&h, c(0.5, 0.5)).unwrap();
        let check = &h.shift(-c(0.5, 0.5)) * &r;
        assert!((check - ComplexMatrix::identity(3)).max_abs() < 1e-13);
    }

    #[test]
    fn close_pair_is_one_cluster() {
        let h = ComplexMatrix::diagonal(&[c(0.0, 0.0), c(0.01, 0.0), c(2.0, 0.0)]);
        let d = decompose(&h, 0.5).unwrap();
        assert_eq!(d.groups.len(), 2);
        assert_eq!(d.groups[0].multiplicity, 2);
        // split cluster: the nilpotent part is the non-scalar diagonal remainder
        assert!((d.groups[0].nilpotent[(1, 1)] - c(0.005, 0.0)).norm() < 1e-12);
    }
}
