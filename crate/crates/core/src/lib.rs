// Copyright 2026 Adiabat Contributors
// SPDX-License-Identifier: Apache-2.0

//! Superadiabatic approximations of `iε ∂ₜU = H(t) U` for generators whose
//! spectral decomposition carries nilpotent parts.

pub mod acceptance;
pub mod approximation;
pub mod error;
pub mod families;
pub mod fit;
pub mod grid;
pub mod hierarchy;
pub mod jet;
pub mod linalg;
pub mod nilpotent;
pub mod oracles;
pub mod ode;
mod par;
pub mod propagator;
pub mod scaled;
pub mod spectral;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, C64};
