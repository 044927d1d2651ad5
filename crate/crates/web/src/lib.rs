// Copyright 2026 Adiabat Contributors
// SPDX-License-Identifier: Apache-2.0

//! wasm-bindgen exports for the static demo in `www/`.
//!
//! Curves come back as flat `Float64Array`s: `[ε, ln numerical, ln closed form]` per point.

pub mod demo;

use wasm_bindgen::prelude::*;

use demo::CurvePoint;

fn flatten(points: Vec<CurvePoint>) -> Vec<f64> {
    points
        .into_iter()
        .flat_map(|p| [p.epsilon, p.numerical_ln, p.closed_form_ln])
        .collect()
}

fn js(e: adiabat::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub fn intro_transition(a: f64, k: f64, epsilons: &[f64]) -> Result<Vec<f64>, JsError> {
    demo::intro_transition(a, k, epsilons).map(flatten).map_err(js)
}

#[wasm_bindgen]
pub fn nilpotent_growth(epsilons: &[f64]) -> Result<Vec<f64>, JsError> {
    demo::nilpotent_growth(epsilons).map(flatten).map_err(js)
}

/// Deltas for `q = 0..`, followed by the optimal level as the last entry.
#[wasm_bindgen]
pub fn delta_turnover(delta: f64, coupling: f64, epsilon: f64, q_max: usize) -> Result<Vec<f64>, JsError> {
    let (mut d, q) = demo::delta_turnover(delta, coupling, epsilon, q_max).map_err(js)?;
    d.push(q as f64);
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flatten_layout() {
        let p = CurvePoint {
            epsilon: 0.1,
            numerical_ln: 2.0,
            closed_form_ln: 3.0,
        };
        assert_eq!(flatten(vec![p, p]), vec![0.1, 2.0, 3.0, 0.1, 2.0, 3.0]);
    }
}
