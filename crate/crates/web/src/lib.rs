//! Browser bindings for the simulator. Each export returns a JSON string;
//! the plain functions in [`demo`] do the work and are tested natively.

pub mod demo;

use wasm_bindgen::prelude::*;

fn js<T: serde::Serialize>(r: Result<T, String>) -> Result<String, JsValue> {
    r.and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string()))
        .map_err(|e| JsValue::from_str(&e))
}

/// Capacity and both genie bounds as one state's probability runs over
/// `[0, 1]`, the others keeping their relative weights.
#[wasm_bindgen]
pub fn bounds_curve(weights: &[u32], vary: usize, steps: usize, p: u32) -> Result<String, JsValue> {
    js(demo::bounds_curve(weights, vary, steps, p))
}

/// One seeded end-to-end run with verification.
#[wasm_bindgen]
pub fn simulate(
    weights: &[u32],
    n: usize,
    p: u32,
    seed: u32,
    proportional: bool,
) -> Result<String, JsValue> {
    js(demo::simulate(weights, n, p, seed, proportional))
}

/// The four-use cyclic alignment demo, optionally without its last use.
#[wasm_bindgen]
pub fn jess_demo(p: u32, seed: u32, with_resolving_state: bool) -> Result<String, JsValue> {
    js(demo::jess(p, seed, with_resolving_state))
}
