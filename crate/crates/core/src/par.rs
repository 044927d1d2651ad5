// Copyright 2026 Adiabat Contributors
// SPDX-License-Identifier: Apache-2.0

//! Fallible indexed map, parallel when the `parallel` feature is on.

use crate::error::Result;

pub fn try_map<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}
