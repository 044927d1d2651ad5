// Copyright 2026 Adiabat Contributors
// SPDX-License-Identifier: Apache-2.0

//! Dormand–Prince 5(4) integrator for complex vector states with PI step control.

use crate::error::{Error, Result};
use crate::linalg::C64;

/// Smallest admissible step magnitude.
pub const STEP_FLOOR: f64 = 1e-15;
/// Steps are capped at this fraction of the integration span.
pub const STEP_CAP_FRACTION: f64 = 1.0 / 16.0;
const MAX_STEPS: usize = 2_000_000;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct OdeStats {
    pub steps: usize,
    pub rejected: usize,
    /// Sum of accepted local error estimates in the max norm.
    pub est_error: f64,
}

/// Integrator state advancing `y' = f(t, y)` in either time direction.
pub struct Integrator<F>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    f: F,
    t: f64,
    y: Vec<C64>,
    h: f64,
    h_cap: f64,
    tol: f64,
    err_old: f64,
    k1: Vec<C64>,
    fsal_valid: bool,
    pub stats: OdeStats,
}

impl<F> Integrator<F>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    /// `span` is the length of the whole integration interval; it fixes the step cap.
    pub fn new(f: F, t0: f64, y0: Vec<C64>, tol: f64, span: f64) -> Result<Self> {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
        }
        let n = y0.len();
        let h_cap = (span.abs() * STEP_CAP_FRACTION).max(STEP_FLOOR);
        Ok(Self {
            f,
            t: t0,
            y: y0,
            h: 0.0,
            h_cap,
            tol,
            err_old: 1e-4,
            k1: vec![C64::new(0.0, 0.0); n],
            fsal_valid: false,
            stats: OdeStats::default(),
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn state(&self) -> &[C64] {
        &self.y
    }

    fn initial_step(&mut self, dir: f64) -> f64 {
        let y_norm = self.y.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let f_norm = self.k1.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let h = if f_norm > 0.0 {
            0.01 * (y_norm.max(1e-10) / f_norm) * self.tol.powf(0.2) * 10.0
        } else {
            self.h_cap
        };
        dir * h.clamp(STEP_FLOOR * 10.0, self.h_cap)
    }

    /// Advances the state to `t_end`, landing on it exactly.
    pub fn advance_to(&mut self, t_end: f64) -> Result<()> {
        let n = self.y.len();
        if t_end == self.t {
            return Ok(());
        }
        let dir = (t_end - self.t).signum();
        if !self.fsal_valid {
            (self.f)(self.t, &self.y, &mut self.k1);
            self.fsal_valid = true;
        }
        if self.h == 0.0 || self.h.signum() != dir {
            self.h = self.initial_step(dir);
        }
        let mut k2 = vec![C64::new(0.0, 0.0); n];
        let mut k3 = k2.clone();
        let mut k4 = k2.clone();
        let mut k5 = k2.clone();
        let mut k6 = k2.clone();
        let mut k7 = k2.clone();
        let mut tmp = k2.clone();
        let mut y_new = k2.clone();
        let mut count = 0usize;
        loop {
            let remaining = t_end - self.t;
            if remaining * dir <= 0.0 {
                break;
            }
            count += 1;
            if count > MAX_STEPS {
                return Err(Error::NoConvergence {
                    what: "adaptive integration",
                    detail: format!("more than {MAX_STEPS} steps"),
                });
            }
            let mut h = self.h.abs().min(self.h_cap) * dir;
            let last = h.abs() >= remaining.abs();
            if last {
                h = remaining;
            }
            let t = self.t;
            let y = &self.y;
            let k1 = &self.k1;
            for i in 0..n {
                tmp[i] = y[i] + k1[i] * (h * A21);
            }
            (self.f)(t + C2 * h, &tmp, &mut k2);
            for i in 0..n {
                tmp[i] = y[i] + (k1[i] * A31 + k2[i] * A32) * h;
            }
            (self.f)(t + C3 * h, &tmp, &mut k3);
            for i in 0..n {
                tmp[i] = y[i] + (k1[i] * A41 + k2[i] * A42 + k3[i] * A43) * h;
            }
            (self.f)(t + C4 * h, &tmp, &mut k4);
            for i in 0..n {
                tmp[i] = y[i] + (k1[i] * A51 + k2[i] * A52 + k3[i] * A53 + k4[i] * A54) * h;
            }
            (self.f)(t + C5 * h, &tmp, &mut k5);
            for i in 0..n {
                tmp[i] = y[i] + (k1[i] * A61 + k2[i] * A62 + k3[i] * A63 + k4[i] * A64 + k5[i] * A65) * h;
            }
            (self.f)(t + h, &tmp, &mut k6);
            for i in 0..n {
                y_new[i] = y[i] + (k1[i] * B1 + k3[i] * B3 + k4[i] * B4 + k5[i] * B5 + k6[i] * B6) * h;
            }
            let t_new = if last { t_end } else { t + h };
            (self.f)(t_new, &y_new, &mut k7);
            let mut err: f64 = 0.0;
            let mut err_abs: f64 = 0.0;
            for i in 0..n {
                let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
                let sc = self.tol * (1.0 + y[i].norm().max(y_new[i].norm()));
                err = err.max(e.norm() / sc);
                err_abs = err_abs.max(e.norm());
            }
            if !err.is_finite() {
                if y_new.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) && h.abs() <= STEP_FLOOR {
                    return Err(Error::NonFinite { t });
                }
                err = 1e10;
            }
            if err <= 1.0 {
                self.t = t_new;
                std::mem::swap(&mut self.y, &mut y_new);
                std::mem::swap(&mut self.k1, &mut k7);
                self.stats.steps += 1;
                self.stats.est_error += err_abs;
                if self.y.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                    return Err(Error::NonFinite { t: self.t });
                }
                let err_c = err.max(1e-10);
                let fac = (0.9 * err_c.powf(-0.17) * self.err_old.powf(0.04)).clamp(0.2, 10.0);
                self.err_old = err_c;
                if !last {
                    self.h = h * fac;
                }
            } else {
                self.stats.rejected += 1;
                let fac = (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
                self.h = h * fac;
                if self.h.abs() < STEP_FLOOR {
                    return Err(Error::StepUnderflow { t, step: self.h.abs() });
                }
            }
        }
        Ok(())
    }
}

/// Integrates `y' = f(t, y)` from `t0` to `t1`.
pub fn integrate<F>(f: F, t0: f64, t1: f64, y0: Vec<C64>, tol: f64) -> Result<(Vec<C64>, OdeStats)>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    let mut it = Integrator::new(f, t0, y0, tol, t1 - t0)?;
    it.advance_to(t1)?;
    let stats = it.stats;
    Ok((it.y, stats))
}
